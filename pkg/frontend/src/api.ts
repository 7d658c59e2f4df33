// Thin client over the session service. The fetch and WebSocket
// implementations are injectable so tests can run without a browser.

import type {
  ClientFrame,
  LibrarySnapshot,
  PlanSnapshot,
  SceneSnapshot,
  ServerFrame,
  SessionState,
} from './types.js';

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onopen: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class SessionApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike,
    private socketFactory: SocketFactory = (url) => new WebSocket(url) as unknown as SocketLike,
  ) {}

  private async post(path: string, body?: unknown): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: body === undefined ? '{}' : JSON.stringify(body),
    });
    const payload = await response.json();
    if (response.status >= 400) {
      const detail = (payload as { error?: string }).error ?? `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return payload;
  }

  private async get(path: string): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (response.status >= 400) throw new ApiError(response.status, `HTTP ${response.status}`);
    return response.json();
  }

  submitTask(text: string) {
    return this.post('/task', { text });
  }

  pause() {
    return this.post('/pause');
  }

  resume() {
    return this.post('/resume');
  }

  clarify(answer: string) {
    return this.post('/clarify', { answer });
  }

  commitSkill(recordingId: string, name?: string, confirmReplace = false) {
    return this.post('/skill/commit', {
      recording_id: recordingId,
      name: name ?? null,
      confirm_replace: confirmReplace,
    });
  }

  getState() {
    return this.get('/state') as Promise<SessionState>;
  }

  getScene() {
    return this.get('/scene') as Promise<SceneSnapshot>;
  }

  getPlan() {
    return this.get('/plan') as Promise<PlanSnapshot>;
  }

  getLibrary() {
    return this.get('/library') as Promise<LibrarySnapshot>;
  }

  /** Poll /state until the phase leaves the busy set (or time runs out). */
  async waitForSettle(timeoutMs = 15000, pollMs = 25): Promise<SessionState> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const state = await this.getState();
      if (state.phase !== 'executing' && state.phase !== 'planning') return state;
      if (Date.now() > deadline) throw new Error(`session stuck in ${state.phase}`);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  connectStream(onFrame: (frame: ServerFrame) => void, onClose?: () => void): StreamHandle {
    const wsUrl = this.baseUrl.replace(/^http/, 'ws') + '/stream';
    const socket = this.socketFactory(wsUrl);
    const handle = new StreamHandle(socket);
    socket.onmessage = (event) => onFrame(JSON.parse(event.data) as ServerFrame);
    socket.onclose = () => {
      handle.connected = false;
      onClose?.();
    };
    socket.onopen = () => {
      handle.connected = true;
    };
    return handle;
  }
}

export class StreamHandle {
  connected = false;

  constructor(private socket: SocketLike) {}

  send(frame: ClientFrame): void {
    this.socket.send(JSON.stringify(frame));
  }

  close(): void {
    this.socket.close();
  }
}
