import { StateUpdate } from "./types.js";

/** The WebSocket surface the stream needs; the browser class satisfies it. */
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export interface StreamOptions {
  /** Called once per socket open, including reopens; hosts resync here. */
  onOpen?: () => void;
  onUpdate: (u: StateUpdate) => void;
  onStatus?: (connected: boolean) => void;
  factory?: (url: string) => SocketLike;
  schedule?: (fn: () => void, ms: number) => void;
  retryMs?: number;
}

/**
 * Update stream with automatic reconnect. Messages are handed to `onUpdate`
 * in arrival order; after every (re)open `onOpen` fires so the host can pull
 * a snapshot and resynchronize state the socket missed while down.
 */
export class Stream {
  private socket: SocketLike | null = null;
  private closed = false;

  constructor(
    private url: string,
    private opts: StreamOptions,
  ) {}

  connect(): void {
    const factory = this.opts.factory ?? ((u: string) => new WebSocket(u) as SocketLike);
    const socket = factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.opts.onStatus?.(true);
      this.opts.onOpen?.();
    };
    socket.onmessage = (ev) => {
      let update: StateUpdate;
      try {
        update = JSON.parse(ev.data) as StateUpdate;
      } catch {
        return; // a garbled frame must not kill the stream
      }
      this.opts.onUpdate(update);
    };
    socket.onclose = () => {
      this.opts.onStatus?.(false);
      if (this.closed || this.socket !== socket) return;
      const schedule = this.opts.schedule ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => {
        if (!this.closed) this.connect();
      }, this.opts.retryMs ?? 1000);
    };
    socket.onerror = () => {};
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
