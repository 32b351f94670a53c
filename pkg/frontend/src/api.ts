import { Plan, Pt, SessionState, Snapshot } from "./types.js";

/** Service-reported failure, carrying the {error, detail} payload. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public error: string,
    public detail: string,
  ) {
    super(`${error}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

async function fail(status: number, payload: unknown): Promise<never> {
  const body = (payload ?? {}) as { error?: string; detail?: string };
  throw new ApiError(status, body.error ?? "error", body.detail ?? `HTTP ${status}`);
}

export class Client {
  constructor(
    public base: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    const payload = await res.json().catch(() => null);
    if (!res.ok) await fail(res.status, payload);
    return payload as T;
  }

  createSession(timeScale = 1.0, config?: unknown): Promise<{ id: string }> {
    return this.request("POST", "/sessions", { config: config ?? null, time_scale: timeScale });
  }

  submitPolygon(id: string, vertices: Pt[], width: number, direction = 0.0): Promise<Plan> {
    return this.request("POST", `/sessions/${id}/polygon`, { vertices, width, direction });
  }

  start(id: string): Promise<{ state: SessionState }> {
    return this.request("POST", `/sessions/${id}/start`);
  }

  pause(id: string): Promise<{ state: SessionState }> {
    return this.request("POST", `/sessions/${id}/pause`);
  }

  reset(id: string): Promise<{ state: SessionState }> {
    return this.request("POST", `/sessions/${id}/reset`);
  }

  snapshot(id: string): Promise<Snapshot> {
    return this.request("GET", `/sessions/${id}`);
  }

  /** ws:// address of the update stream for a session. */
  streamUrl(id: string): string {
    const ws = this.base.replace(/^http/, "ws");
    return `${ws}/sessions/${id}/stream`;
  }
}
