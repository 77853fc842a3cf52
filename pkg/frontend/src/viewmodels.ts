// View-model builders for the four panels. These are pure functions from
// fetched payloads to display structures: they pick plot extrema, rank
// server-provided peaks, and convert units, but never run any signal
// processing of their own. Every physics number a panel shows is
// traceable to a field of a service response.

import type {
  BenchState,
  S11Sweep,
  ShotSummary,
  SpectralPeak,
} from "./types.js";
import type { ShotDetail, ViewState, ZoomWindow } from "./store.js";

export const TUNE_STEP_HZ = 500_000;

export type CouplingLabel = "undercoupled" | "critically coupled" | "overcoupled";

export function couplingLabel(beta: number, tol = 0.02): CouplingLabel {
  if (beta < 1 - tol) return "undercoupled";
  if (beta > 1 + tol) return "overcoupled";
  return "critically coupled";
}

export interface VnaReady {
  kind: "ready";
  freqHz: number[];
  magDb: number[];
  re: number[];
  im: number[];
  dipIndex: number;
  dipFreqHz: number;
  dipMagDb: number;
  halfPowerLoHz: number;
  halfPowerHiHz: number;
  qLoaded: number;
  fModeHz: number;
  spinFreqHz: number;
  couplingBeta: number;
  coupling: CouplingLabel;
  polarMinRadius: number;
}

export interface VnaEmpty {
  kind: "empty";
  message: string;
}

export type VnaViewModel = VnaReady | VnaEmpty;

export function vnaViewModel(
  bench: BenchState | null,
  sweep: S11Sweep | null,
): VnaViewModel {
  if (!bench || !sweep || sweep.freq_hz.length === 0) {
    return { kind: "empty", message: "no sweep loaded - tune or refresh to run one" };
  }
  let dipIndex = 0;
  for (let i = 1; i < sweep.mag_db.length; i++) {
    if (sweep.mag_db[i] < sweep.mag_db[dipIndex]) dipIndex = i;
  }
  let polarMinRadius = Infinity;
  for (let i = 0; i < sweep.s11_re.length; i++) {
    const r = Math.hypot(sweep.s11_re[i], sweep.s11_im[i]);
    if (r < polarMinRadius) polarMinRadius = r;
  }
  const res = bench.resonator;
  return {
    kind: "ready",
    freqHz: sweep.freq_hz,
    magDb: sweep.mag_db,
    re: sweep.s11_re,
    im: sweep.s11_im,
    dipIndex,
    dipFreqHz: sweep.freq_hz[dipIndex],
    dipMagDb: sweep.mag_db[dipIndex],
    halfPowerLoHz: res.f_mode_hz - 0.5 * bench.linewidth_hz,
    halfPowerHiHz: res.f_mode_hz + 0.5 * bench.linewidth_hz,
    qLoaded: res.q_loaded,
    fModeHz: res.f_mode_hz,
    spinFreqHz: res.f_spin_hz,
    couplingBeta: res.coupling_beta,
    coupling: couplingLabel(res.coupling_beta),
    polarMinRadius,
  };
}

export interface TuningViewModel {
  valueHz: number;
  rangeLoHz: number;
  rangeHiHz: number;
  stepHz: number;
  disabled: boolean;
  dragging: boolean;
  error: string | null;
}

type TuningInputs = Pick<
  ViewState,
  "bench" | "tuningValueHz" | "pendingMutation" | "firing" | "tuneError"
>;

export function tuningViewModel(view: TuningInputs): TuningViewModel | null {
  const bench = view.bench;
  if (!bench) return null;
  const table = bench.resonator.tuning_table;
  return {
    valueHz: view.tuningValueHz ?? bench.resonator.f_mode_hz,
    rangeLoHz: table[0][1],
    rangeHiHz: table[table.length - 1][1],
    stepHz: TUNE_STEP_HZ,
    disabled: view.firing || view.pendingMutation !== null,
    dragging: view.tuningValueHz !== null,
    error: view.tuneError,
  };
}

// binary searches over the sorted time axis for the zoom window
export function lowerBound(xs: number[], x: number): number {
  let lo = 0;
  let hi = xs.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (xs[mid] < x) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

export function upperBound(xs: number[], x: number): number {
  let lo = 0;
  let hi = xs.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (xs[mid] <= x) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

export interface ScopeReady {
  kind: "ready";
  tS: number[];
  vVolts: number[];
  i0: number; // visible sample window [i0, i1)
  i1: number;
  windowT0: number;
  windowT1: number;
  belowThreshold: boolean;
  vPeakV: number | null;
  sampleRateHz: number;
  carrierHintHz: number;
  loadOhms: number;
  zoomed: boolean;
}

export interface ScopeEmpty {
  kind: "empty";
  message: string;
}

export type ScopeViewModel = ScopeReady | ScopeEmpty;

export function scopeViewModel(
  detail: ShotDetail | null,
  zoom: ZoomWindow | null,
): ScopeViewModel {
  if (!detail || !detail.trace || detail.trace.t_s.length === 0) {
    return { kind: "empty", message: "select a shot to display its record" };
  }
  const tr = detail.trace;
  const t0 = zoom ? zoom.t0 : tr.t_s[0];
  const t1 = zoom ? zoom.t1 : tr.t_s[tr.t_s.length - 1];
  return {
    kind: "ready",
    tS: tr.t_s,
    vVolts: tr.v_volts,
    i0: lowerBound(tr.t_s, t0),
    i1: upperBound(tr.t_s, t1),
    windowT0: t0,
    windowT1: t1,
    belowThreshold: !detail.summary.mased,
    vPeakV: detail.metrics ? detail.metrics.v_peak_v : null,
    sampleRateHz: tr.sample_rate_hz,
    carrierHintHz: tr.carrier_hint_hz,
    loadOhms: tr.load_ohms,
    zoomed: zoom !== null,
  };
}

// the two markers go on the most prominent pair of server-detected peaks
export function dominantPeaks(peaks: SpectralPeak[]): SpectralPeak[] {
  return [...peaks]
    .sort((a, b) => b.prominence - a.prominence || a.freq_hz - b.freq_hz)
    .slice(0, 2);
}

export interface SpectrumReady {
  kind: "ready";
  freqHz: number[];
  psdNorm: number[];
  markerLoHz: number | null;
  markerHiHz: number | null;
  splittingKhz: number | null;
  pPeakDbm: number;
  delayUs: number;
  rabiMhz: number;
  carrierEstHz: number;
}

export interface SpectrumBanner {
  kind: "below-threshold" | "empty";
  message: string;
}

export type SpectrumViewModel = SpectrumReady | SpectrumBanner;

export function spectrumViewModel(detail: ShotDetail | null): SpectrumViewModel {
  if (!detail) return { kind: "empty", message: "select a shot" };
  if (!detail.summary.mased) {
    return { kind: "below-threshold", message: "below threshold - no emission" };
  }
  if (!detail.spectrum || !detail.metrics) {
    return { kind: "empty", message: "spectrum unavailable for this shot" };
  }
  const marks = dominantPeaks(detail.spectrum.peaks)
    .map((p) => p.freq_hz)
    .sort((a, b) => a - b);
  const m = detail.metrics;
  return {
    kind: "ready",
    freqHz: detail.spectrum.freq_hz,
    psdNorm: detail.spectrum.psd_norm,
    markerLoHz: marks.length > 0 ? marks[0] : null,
    markerHiHz: marks.length > 1 ? marks[1] : null,
    splittingKhz: marks.length > 1 ? (marks[1] - marks[0]) / 1e3 : null,
    pPeakDbm: m.p_peak_dbm,
    delayUs: m.delay_to_peak_s * 1e6,
    rabiMhz: m.rabi_freq_td_hz / 1e6,
    carrierEstHz: m.carrier_est_hz,
  };
}

export interface ShotRow {
  shotId: number;
  timestampUtc: string;
  detuningMhz: number;
  energyMj: number;
  mased: boolean;
  pPeakDbm: number | null;
  delayUs: number | null;
  rabiMhz: number | null;
  error: string | null;
  selected: boolean;
}

export function shotTableViewModel(
  shots: ShotSummary[],
  selectedId: number | null,
): ShotRow[] {
  // rows keep the server's ordering; no client-side sort
  return shots.map((s) => ({
    shotId: s.shot_id,
    timestampUtc: s.timestamp_utc,
    detuningMhz: s.detuning_hz / 1e6,
    energyMj: s.energy_mj,
    mased: s.mased,
    pPeakDbm: s.p_peak_dbm,
    delayUs: s.delay_to_peak_s === null ? null : s.delay_to_peak_s * 1e6,
    rabiMhz: s.rabi_freq_td_hz === null ? null : s.rabi_freq_td_hz / 1e6,
    error: s.error,
    selected: s.shot_id === selectedId,
  }));
}
