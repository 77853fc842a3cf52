// Wire types for the bench service. Field names mirror the JSON payloads
// exactly so a response can be used without any mapping layer.

export interface ResonatorState {
  f_mode_hz: number;
  q_loaded: number;
  q_unloaded: number;
  coupling_beta: number;
  ceiling_height_mm: number;
  f_spin_hz: number;
  tuning_table: [number, number][];
  geometry_mm: Record<string, number>;
}

export interface PumpState {
  energy_j: number;
  wavelength_m: number;
  duration_s: number;
  rep_rate_hz: number | null;
}

export interface BenchState {
  resonator: ResonatorState;
  detuning_hz: number;
  linewidth_hz: number;
  pump: PumpState;
  coupling_efficiency: number;
  master_seed: number;
  next_shot_id: number;
  shot_count: number;
  run_dir: string;
  autofire_active: boolean;
}

export interface S11Sweep {
  freq_hz: number[];
  s11_re: number[];
  s11_im: number[];
  mag_db: number[];
}

export interface TuneResponse {
  state: BenchState;
  s11: S11Sweep;
}

export interface PulseMetrics {
  v_peak_v: number;
  p_peak_mw: number;
  p_peak_dbm: number;
  delay_to_peak_s: number;
  rabi_freq_td_hz: number;
  carrier_est_hz: number;
}

export interface ShotSummary {
  shot_id: number;
  timestamp_utc: string;
  detuning_hz: number;
  energy_mj: number;
  mased: boolean;
  peak_photons: number;
  p_peak_dbm: number | null;
  delay_to_peak_s: number | null;
  rabi_freq_td_hz: number | null;
  carrier_est_hz: number | null;
  error: string | null;
}

export interface ShotRecordDict {
  shot_id: number;
  timestamp_utc: string;
  seed: number;
  detuning_hz: number;
  energy_mj: number;
  mased: boolean;
  peak_photons: number;
  metrics: PulseMetrics | null;
  config: Record<string, unknown>;
  files: Record<string, string>;
  error: string | null;
}

export interface ShotMetricsResponse {
  summary: ShotSummary;
  metrics: PulseMetrics | null;
}

export interface TracePayload {
  t_s: number[];
  v_volts: number[];
  sample_rate_hz: number;
  carrier_hint_hz: number;
  load_ohms: number;
  decimated_to: number;
}

export interface EnvelopePayload {
  t_s: number[];
  a_re: number[];
  a_im: number[];
  n_photons: number[];
  w: number[];
  p_out_w: number[];
}

export interface SpectralPeak {
  freq_hz: number;
  height: number;
  prominence: number;
}

export interface SpectrumPayload {
  freq_hz: number[];
  psd_norm: number[];
  peaks: SpectralPeak[];
}

export type BenchEvent =
  | ({ type: "shot-completed" } & ShotSummary)
  | { type: "s11-updated"; f_mode_hz: number; ceiling_height_mm: number };
