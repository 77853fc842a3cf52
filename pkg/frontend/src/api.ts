import type {
  BenchState,
  EnvelopePayload,
  S11Sweep,
  ShotMetricsResponse,
  ShotRecordDict,
  ShotSummary,
  SpectrumPayload,
  TracePayload,
  TuneResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface TuneBody {
  height_mm?: number;
  f_target_hz?: number;
  step_hz?: number;
}

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, init);
    if (!res.ok) {
      let detail = res.statusText || `status ${res.status}`;
      try {
        const body = (await res.json()) as { detail?: unknown };
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // body was not json, keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  state(): Promise<BenchState> {
    return this.request("/state");
  }

  s11(spanHz?: number, points?: number): Promise<S11Sweep> {
    const q = new URLSearchParams();
    if (spanHz !== undefined) q.set("span_hz", String(spanHz));
    if (points !== undefined) q.set("points", String(points));
    const qs = q.toString();
    return this.request(qs ? `/s11?${qs}` : "/s11");
  }

  tune(body: TuneBody): Promise<TuneResponse> {
    return this.post("/tune", body);
  }

  fire(energyMj?: number): Promise<ShotRecordDict> {
    return this.post("/fire", energyMj === undefined ? {} : { energy_mj: energyMj });
  }

  autofire(rateHz: number | null): Promise<{ autofire_active: boolean }> {
    return this.post("/autofire", { rate_hz: rateHz });
  }

  shots(): Promise<ShotSummary[]> {
    return this.request("/shots");
  }

  shotMetrics(id: number): Promise<ShotMetricsResponse> {
    return this.request(`/shots/${id}/metrics`);
  }

  shotTrace(id: number, points?: number): Promise<TracePayload> {
    const suffix = points === undefined ? "" : `?points=${points}`;
    return this.request(`/shots/${id}/trace${suffix}`);
  }

  shotEnvelope(id: number): Promise<EnvelopePayload> {
    return this.request(`/shots/${id}/envelope`);
  }

  shotSpectrum(id: number): Promise<SpectrumPayload> {
    return this.request(`/shots/${id}/spectrum`);
  }
}
