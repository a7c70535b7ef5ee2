/**
 * HTTP client for the gateway. The UI holds no business logic: every
 * behavior lives behind these endpoints.
 */

export interface OutboxEnvelope {
  direction: string;
  user_phone: string;
  ts: number;
  kind: 'text' | 'audio' | 'button' | 'image';
  body: string;
  buttons: string[];
  reply_to: string | null;
  envelope_id: number;
}

export interface SignupResult {
  token: string;
  device_id: string;
  created: boolean;
}

export interface OutboxPage {
  envelopes: OutboxEnvelope[];
  cursor: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const data = await response.json();
    if (typeof data?.detail === 'string') detail = data.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private base = '',
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async post<T>(path: string, body: unknown, token?: string): Promise<T> {
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (token) headers.authorization = `Bearer ${token}`;
    const response = await this.fetchFn(`${this.base}${path}`, {
      method: 'POST',
      headers,
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  signup(phone: string, passcode: string): Promise<SignupResult> {
    return this.post<SignupResult>('/v1/signup', { phone, passcode });
  }

  sendText(phone: string, text: string): Promise<{ ok: boolean }> {
    return this.post('/v1/webhook', {
      user_phone: phone,
      ts: Date.now() / 1000,
      kind: 'text',
      body: text,
    });
  }

  /** A pressed suggestion posts its label verbatim. */
  sendButton(phone: string, label: string): Promise<{ ok: boolean }> {
    return this.post('/v1/webhook', {
      user_phone: phone,
      ts: Date.now() / 1000,
      kind: 'button',
      body: label,
    });
  }

  async uploadMedia(token: string, data: Blob | ArrayBuffer, mime: string): Promise<string> {
    const response = await this.fetchFn(`${this.base}/v1/media`, {
      method: 'POST',
      headers: { authorization: `Bearer ${token}`, 'content-type': mime },
      body: data,
    });
    if (!response.ok) await parseError(response);
    const { media_id } = (await response.json()) as { media_id: string };
    return media_id;
  }

  /** Audio goes up as a media reference; the server transcribes. */
  async sendAudio(phone: string, token: string, data: Blob | ArrayBuffer, mime: string) {
    const mediaId = await this.uploadMedia(token, data, mime);
    return this.post('/v1/webhook', {
      user_phone: phone,
      ts: Date.now() / 1000,
      kind: 'audio',
      body: mediaId,
    });
  }

  async pollOutbox(token: string, cursor: number): Promise<OutboxPage> {
    const response = await this.fetchFn(`${this.base}/v1/outbox?cursor=${cursor}`, {
      headers: { authorization: `Bearer ${token}` },
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as OutboxPage;
  }

  mediaUrl(mediaId: string): string {
    return `${this.base}/v1/media/${mediaId}`;
  }

  simulate(token: string, preset: string, cycles = 1): Promise<{ accepted: number }> {
    return this.post('/v1/simulate', { preset, cycles }, token);
  }

  setUploadsPaused(token: string, paused: boolean): Promise<{ paused: boolean }> {
    return this.post('/v1/uploads', { paused }, token);
  }
}
