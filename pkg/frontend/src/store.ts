// View state and actions for the operator console.
//
// Concurrency rules: everything runs on the one javascript event loop,
// at most one mutation request (tune / fire / autofire) is in flight at
// a time, and reads run freely so the console stays responsive while a
// shot executes server-side. Server pushes are reconciled rather than
// trusted blindly: shot summaries are upserted by shot id so the list
// always matches the server's id order, and sweep updates trigger a
// refetch instead of being applied from the event payload.

import { ApiError } from "./api.js";
import type { ApiClient } from "./api.js";
import type {
  BenchEvent,
  BenchState,
  PulseMetrics,
  S11Sweep,
  ShotRecordDict,
  ShotSummary,
  SpectrumPayload,
  TracePayload,
} from "./types.js";

export type PanelId = "vna" | "scope" | "spectrum" | "shots";

export const PANEL_SET: readonly PanelId[] = ["vna", "scope", "spectrum", "shots"];

export type MutationName = "tune" | "fire" | "autofire";

export interface ShotDetail {
  summary: ShotSummary;
  metrics: PulseMetrics | null;
  trace: TracePayload | null;
  spectrum: SpectrumPayload | null;
}

export interface ZoomWindow {
  t0: number;
  t1: number;
}

export type ConnectionStatus = "connecting" | "live" | "lost";

export interface ViewState {
  bench: BenchState | null;
  sweep: S11Sweep | null;
  shots: ShotSummary[];
  selectedShotId: number | null;
  detail: ShotDetail | null;
  panelLayout: PanelId[];
  // slider position while the operator is dragging; null means the
  // control tracks the bench's actual mode frequency
  tuningValueHz: number | null;
  autofireRateHz: number;
  pendingMutation: MutationName | null;
  firing: boolean;
  tuneError: string | null;
  lastError: string | null;
  scopeZoom: ZoomWindow | null;
  connection: ConnectionStatus;
}

// the subset of ApiClient the store calls; tests substitute a fake
export type BenchApi = Pick<
  ApiClient,
  | "state"
  | "s11"
  | "tune"
  | "fire"
  | "autofire"
  | "shots"
  | "shotMetrics"
  | "shotTrace"
  | "shotSpectrum"
>;

const TRACE_POINTS = 4000;
const MIN_SAMPLES_PER_CARRIER_CYCLE = 2;

function initialState(): ViewState {
  return {
    bench: null,
    sweep: null,
    shots: [],
    selectedShotId: null,
    detail: null,
    panelLayout: [...PANEL_SET],
    tuningValueHz: null,
    autofireRateHz: 1,
    pendingMutation: null,
    firing: false,
    tuneError: null,
    lastError: null,
    scopeZoom: null,
    connection: "connecting",
  };
}

function recordToSummary(r: ShotRecordDict): ShotSummary {
  const m = r.metrics;
  return {
    shot_id: r.shot_id,
    timestamp_utc: r.timestamp_utc,
    detuning_hz: r.detuning_hz,
    energy_mj: r.energy_mj,
    mased: r.mased,
    peak_photons: r.peak_photons,
    p_peak_dbm: m ? m.p_peak_dbm : null,
    delay_to_peak_s: m ? m.delay_to_peak_s : null,
    rabi_freq_td_hz: m ? m.rabi_freq_td_hz : null,
    carrier_est_hz: m ? m.carrier_est_hz : null,
    error: r.error,
  };
}

export class Store {
  private state: ViewState = initialState();
  private listeners = new Set<(s: ViewState) => void>();

  constructor(private readonly api: BenchApi) {}

  getState(): Readonly<ViewState> {
    return this.state;
  }

  subscribe(fn: (s: ViewState) => void): () => void {
    this.listeners.add(fn);
    return () => {
      this.listeners.delete(fn);
    };
  }

  private patch(p: Partial<ViewState>): void {
    this.state = { ...this.state, ...p };
    for (const fn of this.listeners) fn(this.state);
  }

  async init(): Promise<void> {
    const [bench, sweep, shots] = await Promise.all([
      this.api.state(),
      this.api.s11(),
      this.api.shots(),
    ]);
    this.patch({ bench, sweep, shots });
  }

  async refreshState(): Promise<void> {
    this.patch({ bench: await this.api.state() });
  }

  async refreshSweep(): Promise<void> {
    this.patch({ sweep: await this.api.s11() });
  }

  async refreshShots(): Promise<void> {
    const shots = await this.api.shots();
    const selected = this.state.selectedShotId;
    const stillThere = selected === null || shots.some((s) => s.shot_id === selected);
    this.patch({
      shots,
      ...(stillThere ? {} : { selectedShotId: null, detail: null, scopeZoom: null }),
    });
  }

  // selection: the id must exist in the shot list, or be null to deselect
  async selectShot(id: number | null): Promise<void> {
    if (id === null) {
      this.patch({ selectedShotId: null, detail: null, scopeZoom: null });
      return;
    }
    const summary = this.state.shots.find((s) => s.shot_id === id);
    if (!summary) throw new Error(`shot ${id} is not in the shot list`);
    this.patch({ selectedShotId: id, detail: null, scopeZoom: null });

    const [metricsResp, trace] = await Promise.all([
      this.api.shotMetrics(id),
      this.api.shotTrace(id, TRACE_POINTS),
    ]);
    let spectrum: SpectrumPayload | null = null;
    if (summary.mased) {
      try {
        spectrum = await this.api.shotSpectrum(id);
      } catch (e) {
        if (!(e instanceof ApiError && e.status === 404)) throw e;
      }
    }
    if (this.state.selectedShotId !== id) return; // selection moved on while loading
    this.patch({
      detail: {
        summary: metricsResp.summary,
        metrics: metricsResp.metrics,
        trace,
        spectrum,
      },
    });
  }

  async tuneStep(stepHz: number): Promise<void> {
    await this.tuneRequest({ step_hz: stepHz });
  }

  async tuneTo(fTargetHz: number): Promise<void> {
    await this.tuneRequest({ f_target_hz: fTargetHz });
  }

  dragTuning(fHz: number): void {
    this.patch({ tuningValueHz: fHz });
  }

  async commitTuning(): Promise<void> {
    const f = this.state.tuningValueHz;
    if (f === null) return;
    await this.tuneRequest({ f_target_hz: f });
  }

  private async tuneRequest(body: {
    height_mm?: number;
    f_target_hz?: number;
    step_hz?: number;
  }): Promise<void> {
    await this.mutate("tune", async () => {
      try {
        const resp = await this.api.tune(body);
        this.patch({
          bench: resp.state,
          sweep: resp.s11,
          tuningValueHz: null,
          tuneError: null,
        });
      } catch (e) {
        if (e instanceof ApiError) {
          // unreachable frequency or a rejected body: show it next to
          // the control and leave the displayed bench state as it was
          this.patch({ tuneError: e.detail, tuningValueHz: null });
          return;
        }
        throw e;
      }
    });
  }

  async fire(energyMj?: number): Promise<void> {
    await this.mutate("fire", async () => {
      const record = await this.api.fire(energyMj);
      this.upsertSummary(recordToSummary(record));
      this.patch({ bench: await this.api.state() });
      await this.selectShot(record.shot_id);
    });
  }

  async setAutofire(rateHz: number | null): Promise<void> {
    await this.mutate("autofire", async () => {
      try {
        const resp = await this.api.autofire(rateHz);
        const bench = this.state.bench;
        this.patch({
          ...(bench ? { bench: { ...bench, autofire_active: resp.autofire_active } } : {}),
          ...(rateHz !== null ? { autofireRateHz: rateHz } : {}),
        });
      } catch (e) {
        if (e instanceof ApiError) {
          this.patch({ lastError: e.detail });
          return;
        }
        throw e;
      }
    });
  }

  private async mutate<T>(name: MutationName, fn: () => Promise<T>): Promise<T> {
    if (this.state.pendingMutation !== null) {
      throw new Error(`${this.state.pendingMutation} request already in flight`);
    }
    this.patch({ pendingMutation: name, firing: name === "fire", lastError: null });
    try {
      return await fn();
    } catch (e) {
      this.patch({ lastError: e instanceof Error ? e.message : String(e) });
      throw e;
    } finally {
      this.patch({ pendingMutation: null, firing: false });
    }
  }

  async handleEvent(e: BenchEvent): Promise<void> {
    if (e.type === "shot-completed") {
      const { type: _type, ...summary } = e;
      this.upsertSummary(summary);
      await this.refreshState();
    } else if (e.type === "s11-updated") {
      await Promise.all([this.refreshSweep(), this.refreshState()]);
    }
  }

  setConnection(c: ConnectionStatus): void {
    this.patch({ connection: c });
  }

  setPanelLayout(layout: PanelId[]): void {
    const valid =
      layout.length === PANEL_SET.length && PANEL_SET.every((p) => layout.includes(p));
    if (!valid) throw new Error("panel layout must contain each panel exactly once");
    this.patch({ panelLayout: [...layout] });
  }

  async setScopeZoom(t0: number, t1: number): Promise<void> {
    if (!(t1 > t0)) return;
    this.patch({ scopeZoom: { t0, t1 } });
    await this.ensureZoomResolution();
  }

  clearScopeZoom(): void {
    this.patch({ scopeZoom: null });
  }

  // narrow windows need the undecimated record to show individual carrier
  // cycles; when the decimated trace cannot put at least a couple of
  // samples on every cycle inside the window, refetch once with enough
  // points that the server passes the raw samples through
  private async ensureZoomResolution(): Promise<void> {
    const { detail, scopeZoom, selectedShotId } = this.state;
    if (!detail || !detail.trace || !scopeZoom || selectedShotId === null) return;
    const tr = detail.trace;
    const n = tr.t_s.length;
    if (n < 2) return;
    const span = tr.t_s[n - 1] - tr.t_s[0];
    if (span <= 0) return;
    const rawCount = Math.round(span * tr.sample_rate_hz) + 1;
    if (tr.decimated_to >= rawCount) return;
    const windowSpan = scopeZoom.t1 - scopeZoom.t0;
    const have = tr.decimated_to * (windowSpan / span);
    const need = MIN_SAMPLES_PER_CARRIER_CYCLE * windowSpan * tr.carrier_hint_hz;
    if (have >= need) return;

    const fine = await this.api.shotTrace(selectedShotId, rawCount);
    if (this.state.selectedShotId !== selectedShotId || this.state.detail !== detail) return;
    this.patch({ detail: { ...detail, trace: fine } });
  }

  private upsertSummary(s: ShotSummary): void {
    const shots = this.state.shots.filter((x) => x.shot_id !== s.shot_id);
    shots.push(s);
    shots.sort((a, b) => a.shot_id - b.shot_id); // server order is ascending ids
    this.patch({ shots });
  }
}
