/**
 * DOM wiring: sign-up form, chat thread, suggestion chips, device panel.
 * All behavior goes through ApiClient; this file only renders and forwards.
 */

import { ApiClient, ApiError } from './api.js';
import {
  applyOutbox,
  applyUserMessage,
  bodyLines,
  emptyThread,
  ThreadState,
} from './state.js';

interface Session {
  phone: string;
  token: string;
  deviceId: string;
}

const POLL_MS = 1200;

export class ChatApp {
  private state: ThreadState = emptyThread();
  private session: Session | null = null;
  private timer: number | undefined;
  private recorder: MediaRecorder | null = null;

  constructor(
    private api: ApiClient,
    private root: Document = document,
  ) {}

  start(): void {
    this.el('signup-form').addEventListener('submit', (e) => {
      e.preventDefault();
      void this.signup();
    });
    this.el('composer').addEventListener('submit', (e) => {
      e.preventDefault();
      void this.sendText();
    });
    this.el('record-btn').addEventListener('click', () => void this.toggleRecording());
    for (const preset of ['normal', 'high-hr', 'low-spo2']) {
      this.el(`preset-${preset}`).addEventListener('click', () => void this.simulate(preset));
    }
    this.el('pause-toggle').addEventListener('change', (e) => {
      const checked = (e.target as HTMLInputElement).checked;
      void this.setPaused(checked);
    });
  }

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  }

  private banner(text: string, isError = true): void {
    const banner = this.el('banner');
    banner.textContent = text;
    banner.className = isError ? 'banner error' : 'banner';
    banner.hidden = text === '';
  }

  private async signup(): Promise<void> {
    const phone = (this.el('phone') as HTMLInputElement).value.trim();
    const passcode = (this.el('passcode') as HTMLInputElement).value;
    if (!phone || passcode.length < 4) {
      this.banner('Enter a phone number and a passcode of at least 4 characters.');
      return;
    }
    try {
      const result = await this.api.signup(phone, passcode);
      this.session = { phone, token: result.token, deviceId: result.device_id };
      this.banner('');
      this.el('signup-view').hidden = true;
      this.el('chat-view').hidden = false;
      this.el('who').textContent = phone;
      this.timer = window.setInterval(() => void this.poll(), POLL_MS);
      void this.poll();
    } catch (err) {
      this.banner(err instanceof ApiError ? err.message : `sign-up failed: ${err}`);
    }
  }

  private async poll(): Promise<void> {
    if (!this.session) return;
    try {
      const page = await this.api.pollOutbox(this.session.token, this.state.cursor);
      if (page.envelopes.length > 0) {
        this.state = applyOutbox(this.state, page.envelopes);
        this.render();
      }
    } catch {
      /* transient poll errors retry on the next tick */
    }
  }

  private async sendText(): Promise<void> {
    if (!this.session) return;
    const input = this.el('message') as HTMLInputElement;
    const text = input.value.trim();
    if (!text) return;
    input.value = '';
    this.state = applyUserMessage(this.state, text);
    this.render();
    try {
      await this.api.sendText(this.session.phone, text);
    } catch (err) {
      this.banner(`send failed, try again: ${err}`);
    }
  }

  private async pressChip(label: string): Promise<void> {
    if (!this.session) return;
    this.state = applyUserMessage(this.state, label);
    this.render();
    try {
      await this.api.sendButton(this.session.phone, label);
    } catch (err) {
      this.banner(`send failed, try again: ${err}`);
    }
  }

  private async toggleRecording(): Promise<void> {
    if (!this.session) return;
    const button = this.el('record-btn');
    if (this.recorder) {
      this.recorder.stop();
      return;
    }
    try {
      const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
      const recorder = new MediaRecorder(stream);
      const parts: Blob[] = [];
      recorder.ondataavailable = (e) => parts.push(e.data);
      recorder.onstop = () => {
        stream.getTracks().forEach((t) => t.stop());
        this.recorder = null;
        button.textContent = 'voice';
        const blob = new Blob(parts, { type: recorder.mimeType || 'audio/webm' });
        this.state = applyUserMessage(this.state, '[voice note]', 'audio');
        this.render();
        void this.api
          .sendAudio(this.session!.phone, this.session!.token, blob, blob.type)
          .catch((err) => this.banner(`voice send failed: ${err}`));
      };
      recorder.start();
      this.recorder = recorder;
      button.textContent = 'stop';
    } catch (err) {
      this.banner(`microphone unavailable: ${err}`);
    }
  }

  private async simulate(preset: string): Promise<void> {
    if (!this.session) return;
    try {
      const result = await this.api.simulate(this.session.token, preset);
      this.banner(
        result.accepted > 0
          ? `device sent a ${preset} burst`
          : 'burst not accepted (uploads paused?)',
        false,
      );
    } catch (err) {
      this.banner(`simulator failed: ${err}`);
    }
  }

  private async setPaused(paused: boolean): Promise<void> {
    if (!this.session) return;
    try {
      await this.api.setUploadsPaused(this.session.token, paused);
      this.banner(paused ? 'uploads paused' : 'uploads resumed', false);
    } catch (err) {
      this.banner(`toggle failed: ${err}`);
    }
  }

  private render(): void {
    const thread = this.el('thread');
    thread.replaceChildren();
    for (const bubble of this.state.bubbles) {
      const node = this.root.createElement('div');
      node.className = `bubble ${bubble.from}`;
      if (bubble.kind === 'image') {
        const img = this.root.createElement('img');
        img.src = this.api.mediaUrl(bubble.body);
        img.alt = 'chart';
        node.appendChild(img);
      } else {
        for (const line of bodyLines(bubble)) {
          const p = this.root.createElement('p');
          p.textContent = line;
          node.appendChild(p);
        }
      }
      thread.appendChild(node);
    }
    const chips = this.el('chips');
    chips.replaceChildren();
    for (const label of this.state.chips) {
      const chip = this.root.createElement('button');
      chip.type = 'button';
      chip.className = 'chip';
      chip.textContent = label;
      chip.addEventListener('click', () => void this.pressChip(label));
      chips.appendChild(chip);
    }
    thread.scrollTop = thread.scrollHeight;
  }

  stop(): void {
    if (this.timer !== undefined) window.clearInterval(this.timer);
  }
}
