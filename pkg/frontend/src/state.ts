/**
 * Thread state: a pure fold from outbox envelopes and local user actions to
 * the render model. Bubbles keep delivery order; suggestion chips belong to
 * the latest envelope that carried buttons and clear once pressed.
 */

import type { OutboxEnvelope } from './api.js';

export interface Bubble {
  from: 'user' | 'agent';
  kind: 'text' | 'image' | 'audio';
  body: string;
  ts: number;
  envelopeId?: number;
}

export interface ThreadState {
  bubbles: Bubble[];
  chips: string[];
  cursor: number;
}

export function emptyThread(): ThreadState {
  return { bubbles: [], chips: [], cursor: 0 };
}

/** Fold newly delivered envelopes into the thread (they arrive in order). */
export function applyOutbox(state: ThreadState, envelopes: OutboxEnvelope[]): ThreadState {
  if (envelopes.length === 0) return state;
  const bubbles = [...state.bubbles];
  let chips = state.chips;
  for (const env of envelopes) {
    bubbles.push({
      from: 'agent',
      kind: env.kind === 'image' ? 'image' : 'text',
      body: env.body,
      ts: env.ts,
      envelopeId: env.envelope_id,
    });
    if (env.buttons.length > 0) chips = [...env.buttons];
  }
  return {
    bubbles,
    chips,
    cursor: envelopes[envelopes.length - 1].envelope_id,
  };
}

/** Local echo of something the user sent; pressing a chip clears the row. */
export function applyUserMessage(
  state: ThreadState,
  body: string,
  kind: 'text' | 'audio' = 'text',
  ts = Date.now() / 1000,
): ThreadState {
  return {
    bubbles: [...state.bubbles, { from: 'user', kind, body, ts }],
    chips: [],
    cursor: state.cursor,
  };
}

/** Multi-line agent text renders as explicit line breaks, never collapsed. */
export function bodyLines(bubble: Bubble): string[] {
  return bubble.body.split('\n');
}
