"""Calibration of the default bench parameters against the headline targets.

The instrument's true microscopic constants are not knowable from the
outside, so the defaults are produced by this documented procedure instead
of being hard-coded dogma. Fixed choices first:

* resonator: Q_L = 2042 at f_spin with coupling beta = 0.5 (undercoupled),
  so Q0 = 3063; output coupling_efficiency 0.3.
* medium timescales: t2 = 430 ns, t1 = 200 us. t2 trades ring-down
  visibility against detuned ignition: a longer t2 slows the envelope
  modulation into the 0.8 MHz band, but ignition at 1.5 MHz detuning dies
  exponentially once the coherent exchange rate falls behind the detuning;
  430 ns is the longest setting that still fires robustly at +-1.5 MHz.
  t1 must sit well above the build-up delay or spin-lattice decay eats the
  inversion before the burst forms.
* spin capacity: n_spins = 1.1x the inversion deposited at the 30 mJ
  reference energy (the deposit stays below the saturation cap; the ring
  frequency is insensitive to this factor).
* static design threshold: 4.8 mJ, deliberately below the 7 mJ +- 15%
  target band. Near threshold the margin (w0/w_thr - 1) decays through
  spin-lattice relaxation faster than the field can build up from the
  photon seed, so the energy at which a burst actually ignites sits about
  1.5x above the static value; placing the static threshold at 4.8 mJ puts
  the measured ignition near 7.1 mJ, mid-band. The verification stage
  measures it by bisection rather than trusting the static formula.

The free scale w_thr (threshold inversion in spins) is then fixed by
matching the on-resonance peak power to -5 dBm, and the remaining constants
follow in closed form:

    g_single = sqrt(kappa / (2 * t2 * w_thr))
    n_spins  = 1.1 * (30 mJ / 4.8 mJ) * w_thr
    pump_efficiency = w_thr * E_photon(532 nm) / 4.8 mJ

Verification re-measures threshold (bisection), peak power, delay, Rabi
modulation, and splitting from fresh simulations and stores everything in
the result JSON that ships as package data.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from importlib import resources

import numpy as np

from . import memspec, pulse_metrics
from .constants import SPIN_TRANSITION_HZ
from .dynamics import (
    GainMediumParams,
    PumpPulse,
    SimConfig,
    deposit_inversion,
    detuning_sweep,
    emitted_frequency,
    simulate_burst,
    threshold_inversion,
)
from .errors import ConfigError, IoFailure, NoSplitting
from .resonator import ResonatorConfig, cavity_decay_rate

# fixed calibration choices (see module docstring)
Q_LOADED = 2042.0
COUPLING_BETA = 0.5
COUPLING_EFFICIENCY = 0.3
T2_S = 430e-9
T1_S = 200e-6
CAPACITY_FACTOR = 1.1
DESIGN_THRESHOLD_MJ = 4.8
REFERENCE_ENERGY_MJ = 30.0
TARGET_PEAK_DBM = -5.0

TARGET_THRESHOLD_MJ = 7.0
THRESHOLD_TOL_FRAC = 0.15
PEAK_TOL_DB = 3.0
TARGET_RABI_MHZ = 0.8
RABI_TOL_MHZ = 0.2
MAX_DELAY_US = 10.0

_DATA_PACKAGE = "maserbench.data"
_DEFAULTS_NAME = "default_params.json"


def reference_resonator() -> ResonatorConfig:
    return ResonatorConfig.from_loaded(
        q_loaded=Q_LOADED,
        coupling_beta=COUPLING_BETA,
        f_mode_hz=SPIN_TRANSITION_HZ,
    )


def _medium_for(w_thr: float, kappa: float) -> GainMediumParams:
    g_single = math.sqrt(kappa / (2.0 * T2_S * w_thr))
    ratio = REFERENCE_ENERGY_MJ / DESIGN_THRESHOLD_MJ
    n_spins = CAPACITY_FACTOR * ratio * w_thr
    photon_j = PumpPulse(energy_j=1.0).photon_energy_j
    pump_eff = w_thr * photon_j / (DESIGN_THRESHOLD_MJ * 1e-3)
    return GainMediumParams(
        n_spins=n_spins,
        g_single_rad_s=g_single,
        t1_s=T1_S,
        t2_s=T2_S,
        pump_efficiency=pump_eff,
    )


def _burst_detected(env, seed_photons: float = 1.0) -> bool:
    return float(np.max(env.n_photons)) > 100.0 * seed_photons


def run_calibration(fast: bool = False, seed: int = 0) -> dict:
    """Execute the calibration procedure and return the result record.

    fast=True skips the threshold bisection and the verification sweep
    (power matching and the on-resonance checks still run).
    """
    res = reference_resonator()
    kappa = cavity_decay_rate(res.q_loaded, res.f_mode_hz).kappa_rad_per_s
    pump_ref = PumpPulse(energy_j=REFERENCE_ENERGY_MJ * 1e-3)
    target_p_w = pulse_metrics.mw_from_dbm(TARGET_PEAK_DBM) * 1e-3

    # stage 1: fix the inversion scale by matching the on-resonance peak.
    # p_out scales almost linearly with w_thr at fixed dimensionless shape,
    # so a few fixed-point steps converge.
    w_thr = target_p_w / (
        COUPLING_EFFICIENCY * kappa * 6.62607015e-34 * SPIN_TRANSITION_HZ
    )
    iterations = 2 if fast else 3
    env = None
    for _ in range(iterations):
        cfg = SimConfig(
            resonator=res,
            medium=_medium_for(w_thr, kappa),
            pump=pump_ref,
            seed=seed,
            coupling_efficiency=COUPLING_EFFICIENCY,
        )
        env = simulate_burst(cfg)
        p_max = float(np.max(env.p_out_w))
        if p_max <= 0:
            raise ConfigError("calibration run produced no output power")
        w_thr *= target_p_w / p_max

    medium = _medium_for(w_thr, kappa)
    base_cfg = SimConfig(
        resonator=res,
        medium=medium,
        pump=pump_ref,
        seed=seed,
        coupling_efficiency=COUPLING_EFFICIENCY,
    )

    # stage 2: verification measurements with the final constants
    env = simulate_burst(base_cfg)
    peak_dbm = pulse_metrics.dbm_from_mw(float(np.max(env.p_out_w)) * 1e3)
    delay_s = pulse_metrics.delay_to_peak(env)
    rabi_hz = pulse_metrics.rabi_frequency_td(env)
    spectrum = memspec.burst_spectrum(env.t_s, env.a, f_offset_hz=0.0)
    try:
        splitting_hz = memspec.rabi_splitting(spectrum)
    except NoSplitting:
        splitting_hz = None

    measured_threshold_mj = None
    sweep_summary = None
    pulled_fraction = None
    if not fast:
        measured_threshold_mj = _measure_threshold(base_cfg)
        sweep = detuning_sweep(base_cfg, [0.0, 0.5e6, 1.0e6, 1.5e6])
        sweep_summary = [
            {
                "detuning_hz": e.detuning_hz,
                "p_peak_dbm": e.p_peak_dbm,
                "delay_s": e.delay_s,
                "rabi_td_hz": e.rabi_td_hz,
                "error": e.error,
            }
            for e in sweep
        ]
        env_detuned = simulate_burst(base_cfg.with_detuning(1.0e6))
        f_emit = emitted_frequency(env_detuned, res.f_spin_hz)
        pulled_fraction = (f_emit - res.f_spin_hz) / 1.0e6

    thr_lo = TARGET_THRESHOLD_MJ * (1.0 - THRESHOLD_TOL_FRAC)
    thr_hi = TARGET_THRESHOLD_MJ * (1.0 + THRESHOLD_TOL_FRAC)
    targets = {
        "threshold_energy_mj": {
            "target": TARGET_THRESHOLD_MJ,
            "tolerance_frac": THRESHOLD_TOL_FRAC,
            "design_value": DESIGN_THRESHOLD_MJ,
            "measured": measured_threshold_mj,
            "pass": (
                None
                if measured_threshold_mj is None
                else thr_lo <= measured_threshold_mj <= thr_hi
            ),
        },
        "on_resonance_peak_dbm": {
            "target": TARGET_PEAK_DBM,
            "tolerance_db": PEAK_TOL_DB,
            "measured": peak_dbm,
            "pass": abs(peak_dbm - TARGET_PEAK_DBM) <= PEAK_TOL_DB,
        },
        "on_resonance_rabi_mhz": {
            "target": TARGET_RABI_MHZ,
            "tolerance_mhz": RABI_TOL_MHZ,
            "measured": rabi_hz / 1e6,
            "pass": abs(rabi_hz / 1e6 - TARGET_RABI_MHZ) <= RABI_TOL_MHZ,
        },
        "delay_to_peak_us": {
            "max": MAX_DELAY_US,
            "measured": delay_s * 1e6,
            "pass": delay_s * 1e6 < MAX_DELAY_US,
        },
    }

    return {
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "fast": fast,
        "resonator": res.to_dict(),
        "medium": medium.to_dict(),
        "pump_reference": pump_ref.to_dict(),
        "coupling_efficiency": COUPLING_EFFICIENCY,
        "sim_defaults": {
            "duration_s": 40e-6,
            "output_dt_s": 20e-9,
            "seed_photons": 1.0,
            "noise_photons": 0.05,
            "rtol": 1e-8,
            "atol": 1e-13,
            "max_step_s": 25e-9,
        },
        "derived": {
            "kappa_rad_s": kappa,
            "w_thr_spins": w_thr,
            "threshold_check_spins": threshold_inversion(medium, kappa),
            "inversion_ratio_at_reference": deposit_inversion(medium, pump_ref)
            / w_thr,
        },
        "targets": targets,
        "verification": {
            "splitting_hz": splitting_hz,
            "sweep": sweep_summary,
            "pulled_fraction_at_1mhz": pulled_fraction,
        },
    }


def _measure_threshold(base_cfg: SimConfig) -> float:
    """Bisect the pump energy at which a burst first forms.

    Long windows give near-threshold shots time to build up; the remaining
    finite-window bias is well inside the target tolerance band.
    """
    slow = SimConfig(
        resonator=base_cfg.resonator,
        medium=base_cfg.medium,
        pump=base_cfg.pump,
        seed=base_cfg.seed,
        coupling_efficiency=base_cfg.coupling_efficiency,
        duration_s=60e-6,
        output_dt_s=40e-9,
    )

    def fires(energy_mj: float) -> bool:
        cfg = SimConfig(
            resonator=slow.resonator,
            medium=slow.medium,
            pump=PumpPulse(energy_j=energy_mj * 1e-3),
            seed=slow.seed,
            coupling_efficiency=slow.coupling_efficiency,
            duration_s=slow.duration_s,
            output_dt_s=slow.output_dt_s,
        )
        return _burst_detected(simulate_burst(cfg), cfg.seed_photons)

    lo, hi = 4.0, 12.0
    if fires(lo):
        return lo
    if not fires(hi):
        return hi
    for _ in range(9):
        mid = 0.5 * (lo + hi)
        if fires(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def write_calibration(result: dict, path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(result, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


_cached_defaults: dict | None = None


def load_default_params() -> dict:
    """Stored calibration result shipped as package data."""
    global _cached_defaults
    if _cached_defaults is None:
        ref = resources.files(_DATA_PACKAGE).joinpath(_DEFAULTS_NAME)
        try:
            _cached_defaults = json.loads(ref.read_text())
        except (FileNotFoundError, OSError) as exc:
            raise IoFailure(
                f"stored calibration {_DEFAULTS_NAME} missing; run the "
                f"calibrate command to regenerate it"
            ) from exc
    return _cached_defaults


def default_resonator() -> ResonatorConfig:
    return ResonatorConfig.from_dict(load_default_params()["resonator"])


def default_medium() -> GainMediumParams:
    return GainMediumParams.from_dict(load_default_params()["medium"])


def default_pump(energy_mj: float | None = None) -> PumpPulse:
    pump = PumpPulse.from_dict(load_default_params()["pump_reference"])
    if energy_mj is not None:
        pump = PumpPulse(
            energy_j=energy_mj * 1e-3,
            wavelength_m=pump.wavelength_m,
            duration_s=pump.duration_s,
            rep_rate_hz=pump.rep_rate_hz,
        )
    return pump


def default_sim_config(
    detuning_hz: float = 0.0,
    seed: int | None = 0,
    energy_mj: float | None = None,
    **overrides,
) -> SimConfig:
    """SimConfig assembled from the stored calibrated defaults."""
    stored = load_default_params()
    cfg = SimConfig(
        resonator=default_resonator(),
        medium=default_medium(),
        pump=default_pump(energy_mj),
        seed=seed,
        coupling_efficiency=stored["coupling_efficiency"],
        **{**stored["sim_defaults"], **overrides},
    )
    if detuning_hz != 0.0:
        cfg = cfg.with_detuning(detuning_hz)
    return cfg
