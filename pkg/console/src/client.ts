// Network clients: plain fetch for request/response, a reconnecting
// WebSocket for the state stream. Implementations are injectable so tests
// can run without a browser.

import {
  GoalResponse,
  MapDocument,
  StreamEvent,
  parseGoalResponse,
  parseMapDocument,
  parseStreamEvent,
} from "./types.js";

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

type FetchLike = (url: string, init?: any) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ServiceClient {
  constructor(readonly baseUrl: string,
              private readonly fetchImpl: FetchLike = fetch) {}

  async createSession(body: object = {}): Promise<string> {
    const res = await this.fetchImpl(`${this.baseUrl}/session`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const data = (await res.json()) as { id?: string; error?: string };
    if (!res.ok || !data.id) {
      throw new ServiceError(data.error ?? "session rejected", res.status);
    }
    return data.id;
  }

  async getMap(sessionId: string): Promise<MapDocument> {
    const res = await this.fetchImpl(`${this.baseUrl}/session/${sessionId}/map`);
    if (!res.ok) throw new ServiceError("map fetch failed", res.status);
    return parseMapDocument(await res.json());
  }

  async postGoal(sessionId: string, cell: [number, number]): Promise<GoalResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/session/${sessionId}/goal`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ h: cell[0], v: cell[1] }),
    });
    const data = await res.json();
    if (!res.ok) {
      const reason = (data as { error?: string }).error ?? `status ${res.status}`;
      throw new ServiceError(reason, res.status);
    }
    return parseGoalResponse(data);
  }
}

export interface StreamHandlers {
  onEvent(ev: StreamEvent): void;
  onStatus?(connected: boolean): void;
}

interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export class StreamClient {
  private socket: WebSocketLike | null = null;
  private closed = false;
  private backoffMs = 500;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly makeSocket: (url: string) => WebSocketLike =
      (url) => new WebSocket(url) as unknown as WebSocketLike,
  ) {}

  connect(): void {
    if (this.closed) return;
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = 500;
      this.handlers.onStatus?.(true);
    };
    socket.onmessage = (msg) => {
      try {
        this.handlers.onEvent(parseStreamEvent(JSON.parse(String(msg.data))));
      } catch {
        // malformed frame: drop it, keep the stream alive
      }
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => { /* close follows */ };
  }

  private scheduleReconnect(): void {
    this.handlers.onStatus?.(false);
    if (this.closed) return;
    this.timer = setTimeout(() => this.connect(), this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, 10000);
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.socket?.close();
  }
}
