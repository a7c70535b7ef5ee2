import { describe, expect, it } from 'vitest';

import type { OutboxEnvelope } from '../src/api.js';
import { applyOutbox, applyUserMessage, bodyLines, emptyThread } from '../src/state.js';

function env(id: number, body: string, overrides: Partial<OutboxEnvelope> = {}): OutboxEnvelope {
  return {
    direction: 'outbound',
    user_phone: '+1555',
    ts: 1000 + id,
    kind: 'text',
    body,
    buttons: [],
    reply_to: null,
    envelope_id: id,
    ...overrides,
  };
}

describe('thread state', () => {
  it('renders envelopes as agent bubbles in delivery order', () => {
    const state = applyOutbox(emptyThread(), [env(1, 'first'), env(2, 'second')]);
    expect(state.bubbles.map((b) => b.body)).toEqual(['first', 'second']);
    expect(state.bubbles.every((b) => b.from === 'agent')).toBe(true);
    expect(state.cursor).toBe(2);
  });

  it('keeps order across successive polls', () => {
    let state = applyOutbox(emptyThread(), [env(1, 'a')]);
    state = applyOutbox(state, [env(2, 'b'), env(3, 'c')]);
    expect(state.bubbles.map((b) => b.body)).toEqual(['a', 'b', 'c']);
    expect(state.cursor).toBe(3);
  });

  it('empty poll leaves state untouched', () => {
    const state = applyOutbox(emptyThread(), []);
    expect(state).toEqual(emptyThread());
  });

  it('chips come from the latest envelope that has buttons', () => {
    const state = applyOutbox(emptyThread(), [
      env(1, 'q?', { buttons: ['Yes', 'No'] }),
      env(2, 'more text'),
    ]);
    expect(state.chips).toEqual(['Yes', 'No']);
  });

  it('image envelopes become image bubbles', () => {
    const state = applyOutbox(emptyThread(), [env(1, 'media-123', { kind: 'image' })]);
    expect(state.bubbles[0].kind).toBe('image');
    expect(state.bubbles[0].body).toBe('media-123');
  });

  it('user message clears chips and appends a user bubble', () => {
    let state = applyOutbox(emptyThread(), [env(1, 'q?', { buttons: ['Yes'] })]);
    state = applyUserMessage(state, 'Yes');
    expect(state.chips).toEqual([]);
    const last = state.bubbles[state.bubbles.length - 1];
    expect(last.from).toBe('user');
    expect(last.body).toBe('Yes');
  });

  it('line breaks render as separate lines', () => {
    const state = applyOutbox(emptyThread(), [env(1, 'line one\nline two')]);
    expect(bodyLines(state.bubbles[0])).toEqual(['line one', 'line two']);
  });
});
