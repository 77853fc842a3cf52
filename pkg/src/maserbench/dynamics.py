"""Mean-field spin-cavity burst dynamics in the frame rotating at f_spin.

The model integrates three coupled variables: cavity field a (complex,
|a|^2 photons), collective transverse polarization v (complex, same units
as a), and population inversion w (spins):

    da/dt = -(kappa/2 + i*d_omega)*a + g_eff*v + xi(t)
    dv/dt = -v/t2 + g_eff*a*w/n_spins
    dw/dt = -(w - w_eq)/t1 - 4*g_eff*Re(conj(a)*v)

with d_omega = 2*pi*detuning, g_eff = g_single*sqrt(n_spins), and
w_eq = -n_spins. The pump deposits the initial inversion instantaneously at
t = 0; masing then grows from a small seed field.

Frame convention fixed by the field equation: a free cavity oscillation at
f_mode = f_spin + detuning rotates as exp(-i*d_omega*t) here, so the
physical emitted frequency is f_spin - d(arg a)/dt / (2*pi). Synthesis and
demodulation below both follow this bridge, which keeps the time-domain
trace, the demodulated envelope, and the spectral carrier estimate mutually
consistent.

Seed field: a deterministic coherent seed of seed_photons in a(0) plus a
seeded band-limited complex tone sum xi(t) whose steady-state response
holds noise_photons in the empty cavity (well under one photon). The
deterministic part fixes the burst build-up delay; the stochastic part
provides the noise floor. seed=None disables both, leaving the exact
noiseless equations for fixed-point checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import pulse_metrics
from .constants import (
    PLANCK_CONSTANT_J_S,
    PUMP_PHOTON_ENERGY_J,
    PUMP_WAVELENGTH_M,
    SPEED_OF_LIGHT_M_S,
)
from .errors import (
    ConfigError,
    InsufficientCycles,
    IntegrationFailure,
    MaserBenchError,
    NoBurst,
    NonPhysicalState,
    UndersampledCarrier,
)
from .resonator import ResonatorConfig, cavity_decay_rate, height_for_frequency
from .signals import MaserEnvelope, MaserTrace


@dataclass(frozen=True)
class GainMediumParams:
    """Spin ensemble constants of the pumped crystal."""

    n_spins: float
    g_single_rad_s: float
    t1_s: float
    t2_s: float
    pump_efficiency: float
    doping_note: str = "0.1% pentacene in para-terphenyl"

    def __post_init__(self):
        if min(self.n_spins, self.g_single_rad_s, self.t1_s, self.t2_s) <= 0:
            raise ConfigError("medium parameters must be positive")
        if self.t2_s > 2.0 * self.t1_s:
            raise ConfigError("t2 cannot exceed 2*t1")
        if not (0.0 < self.pump_efficiency <= 1.0):
            raise ConfigError("pump_efficiency must lie in (0, 1]")

    def to_dict(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "g_single_rad_s": self.g_single_rad_s,
            "t1_s": self.t1_s,
            "t2_s": self.t2_s,
            "pump_efficiency": self.pump_efficiency,
            "doping_note": self.doping_note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GainMediumParams":
        return cls(**d)


@dataclass(frozen=True)
class PumpPulse:
    """One optical pump pulse as delivered to the crystal."""

    energy_j: float
    wavelength_m: float = PUMP_WAVELENGTH_M
    duration_s: float = 6e-9
    rep_rate_hz: float | None = None  # None = single-shot

    def __post_init__(self):
        if self.energy_j < 0:
            raise ConfigError("pump energy cannot be negative")
        if self.wavelength_m <= 0 or self.duration_s <= 0:
            raise ConfigError("wavelength and duration must be positive")
        if self.rep_rate_hz is not None and not (0.5 <= self.rep_rate_hz <= 10.0):
            raise ConfigError("rep_rate must lie in [0.5, 10] Hz or be None")

    @property
    def photon_energy_j(self) -> float:
        return PLANCK_CONSTANT_J_S * SPEED_OF_LIGHT_M_S / self.wavelength_m

    def to_dict(self) -> dict:
        return {
            "energy_j": self.energy_j,
            "wavelength_m": self.wavelength_m,
            "duration_s": self.duration_s,
            "rep_rate_hz": self.rep_rate_hz,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PumpPulse":
        return cls(**d)


@dataclass(frozen=True)
class SimConfig:
    """One burst simulation: hardware state plus solver/seed settings.

    detuning_hz is derived from the resonator (f_mode - f_spin) when omitted
    and must agree with it within 1 Hz when given explicitly.
    """

    resonator: ResonatorConfig
    medium: GainMediumParams
    pump: PumpPulse
    detuning_hz: float | None = None
    duration_s: float = 40e-6
    output_dt_s: float = 20e-9
    seed: int | None = 0
    coupling_efficiency: float = 0.3
    seed_photons: float = 1.0
    noise_photons: float = 0.05
    rtol: float = 1e-8
    atol: float = 1e-13
    max_step_s: float = 25e-9
    initial_inversion: float | None = None

    def __post_init__(self):
        derived = self.resonator.f_mode_hz - self.resonator.f_spin_hz
        if self.detuning_hz is None:
            object.__setattr__(self, "detuning_hz", derived)
        elif abs(self.detuning_hz - derived) > 1.0:
            raise ConfigError(
                f"detuning {self.detuning_hz} Hz disagrees with resonator "
                f"(f_mode - f_spin = {derived} Hz) by more than 1 Hz"
            )
        if self.duration_s <= 0:
            raise ConfigError("duration must be positive")
        if not (0 < self.output_dt_s <= self.duration_s):
            raise ConfigError("output_dt must lie in (0, duration]")
        if not (0.0 < self.coupling_efficiency <= 1.0):
            raise ConfigError("coupling_efficiency must lie in (0, 1]")
        if self.seed_photons < 0 or self.noise_photons < 0:
            raise ConfigError("seed and noise photon levels cannot be negative")
        if self.rtol <= 0 or self.atol <= 0 or self.max_step_s <= 0:
            raise ConfigError("solver tolerances must be positive")
        if self.initial_inversion is not None and (
            abs(self.initial_inversion) > self.medium.n_spins
        ):
            raise ConfigError("initial_inversion cannot exceed n_spins in magnitude")

    def with_detuning(self, detuning_hz: float) -> "SimConfig":
        """Retune the resonator (ceiling follows the table) to a new detuning."""
        f_target = self.resonator.f_spin_hz + detuning_hz
        height = height_for_frequency(f_target, self.resonator.tuning_table)
        res = replace(
            self.resonator, f_mode_hz=f_target, ceiling_height_mm=height
        )
        return replace(self, resonator=res, detuning_hz=detuning_hz)

    def to_dict(self) -> dict:
        return {
            "resonator": self.resonator.to_dict(),
            "medium": self.medium.to_dict(),
            "pump": self.pump.to_dict(),
            "detuning_hz": self.detuning_hz,
            "duration_s": self.duration_s,
            "output_dt_s": self.output_dt_s,
            "seed": self.seed,
            "coupling_efficiency": self.coupling_efficiency,
            "seed_photons": self.seed_photons,
            "noise_photons": self.noise_photons,
            "rtol": self.rtol,
            "atol": self.atol,
            "max_step_s": self.max_step_s,
            "initial_inversion": self.initial_inversion,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        d["resonator"] = ResonatorConfig.from_dict(d["resonator"])
        d["medium"] = GainMediumParams.from_dict(d["medium"])
        d["pump"] = PumpPulse.from_dict(d["pump"])
        return cls(**d)


def deposit_inversion(medium: GainMediumParams, pump: PumpPulse) -> float:
    """Inversion deposited by one pump pulse, capped at the spin capacity."""
    if pump.energy_j < 0:
        raise ConfigError("pump energy cannot be negative")
    produced = medium.pump_efficiency * pump.energy_j / pump.photon_energy_j
    return min(medium.n_spins, produced)


def threshold_inversion(medium: GainMediumParams, kappa_rad_s: float) -> float:
    """Inversion at which round-trip gain balances cavity loss."""
    return kappa_rad_s / (2.0 * medium.g_single_rad_s**2 * medium.t2_s)


class _SeedTones:
    """Seeded band-limited complex tone sum standing in for the noise drive.

    The per-tone variance is normalized so the empty-cavity steady-state
    response holds `photons` photons. A smooth (band-limited) drive keeps
    the adaptive integrator's convergence properties intact, which true
    white noise would not.
    """

    def __init__(
        self,
        seed: int,
        kappa_rad_s: float,
        photons: float,
        band_hz: float = 8e6,
        n_tones: int = 64,
    ):
        rng = np.random.default_rng(seed)
        self.omega = 2.0 * math.pi * (np.arange(1, n_tones + 1) * band_hz / n_tones)
        response = np.sum(1.0 / ((kappa_rad_s / 2.0) ** 2 + self.omega**2))
        self.sigma = math.sqrt(photons / response)
        root_half = math.sqrt(0.5)
        self.c_re = rng.standard_normal(n_tones) * root_half
        self.c_im = rng.standard_normal(n_tones) * root_half
        self.d_re = rng.standard_normal(n_tones) * root_half
        self.d_im = rng.standard_normal(n_tones) * root_half

    def __call__(self, t: float) -> complex:
        cos = np.cos(self.omega * t)
        sin = np.sin(self.omega * t)
        re = self.c_re @ cos + self.d_re @ sin
        im = self.c_im @ cos + self.d_im @ sin
        return self.sigma * complex(re, im)


def simulate_burst(cfg: SimConfig) -> MaserEnvelope:
    """Integrate one maser shot and sample the envelope at output_dt."""
    res = cfg.resonator
    medium = cfg.medium
    kappa = cavity_decay_rate(res.q_loaded, res.f_mode_hz).kappa_rad_per_s
    w_thr = threshold_inversion(medium, kappa)
    n_spins = medium.n_spins
    if cfg.initial_inversion is not None:
        w0 = cfg.initial_inversion
    else:
        w0 = deposit_inversion(medium, cfg.pump)

    d_omega = 2.0 * math.pi * cfg.detuning_hz
    g_eff = medium.g_single_rad_s * math.sqrt(n_spins)
    a_scale = math.sqrt(w_thr)  # field in units of sqrt(threshold inversion)
    half_kappa = kappa / 2.0
    inv_t2 = 1.0 / medium.t2_s
    inv_t1 = 1.0 / medium.t1_s
    sink = 4.0 * g_eff * w_thr / n_spins  # inversion drain per |A||V|

    noise = None
    if cfg.seed is not None and cfg.noise_photons > 0.0:
        noise = _SeedTones(cfg.seed, kappa, cfg.noise_photons)
    a0 = math.sqrt(cfg.seed_photons) / a_scale if cfg.seed is not None else 0.0
    y0 = np.array([a0, 0.0, 0.0, 0.0, w0 / n_spins])

    inv_scale = 1.0 / a_scale

    def rhs(t, y):
        a_re, a_im, v_re, v_im, w_rel = y
        if noise is not None:
            xi = noise(t)
            xi_re = xi.real * inv_scale
            xi_im = xi.imag * inv_scale
        else:
            xi_re = xi_im = 0.0
        return (
            -half_kappa * a_re + d_omega * a_im + g_eff * v_re + xi_re,
            -half_kappa * a_im - d_omega * a_re + g_eff * v_im + xi_im,
            -inv_t2 * v_re + g_eff * a_re * w_rel,
            -inv_t2 * v_im + g_eff * a_im * w_rel,
            -inv_t1 * (w_rel + 1.0) - sink * (a_re * v_re + a_im * v_im),
        )

    t_eval = np.arange(0.0, cfg.duration_s + cfg.output_dt_s / 2.0, cfg.output_dt_s)
    sol = solve_ivp(
        rhs,
        (0.0, float(t_eval[-1])),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=cfg.max_step_s,
    )
    if not sol.success:
        raise IntegrationFailure(sol.message)
    y = sol.y
    if not np.all(np.isfinite(y)):
        raise NonPhysicalState("solver produced non-finite state")

    a = a_scale * (y[0] + 1j * y[1])
    n_photons = w_thr * (y[0] ** 2 + y[1] ** 2)
    w_rel = y[4]
    if np.max(np.abs(w_rel)) > 1.0 + 1e-9:
        raise NonPhysicalState("inversion magnitude exceeded the spin count")
    w = n_spins * np.clip(w_rel, -1.0, 1.0)
    p_out = (
        cfg.coupling_efficiency
        * kappa
        * n_photons
        * PLANCK_CONSTANT_J_S
        * res.f_spin_hz
    )
    return MaserEnvelope(t_s=sol.t, a=a, n_photons=n_photons, w=w, p_out_w=p_out)


def synthesize_scope_trace(
    env: MaserEnvelope,
    carrier_hz: float,
    sample_rate_hz: float = 6e9,
    load_ohms: float = 50.0,
    coupling_efficiency: float = 1.0,
) -> MaserTrace:
    """Modulate the envelope onto a passband carrier as a scope would see it.

    v(t) = sqrt(p_out(t)*load*coupling_efficiency) * cos(2*pi*carrier*t - arg a(t)),
    so peak_power(trace) = max(p_out) under the bench P = V^2/R convention
    (coupling_efficiency = 1; env.p_out is already port-referred) and the
    instantaneous frequency is carrier - d(arg a)/dt/(2*pi), the emitted
    line per the frame bridge in the module docstring.
    """
    from fractions import Fraction

    from scipy.signal import resample_poly

    if sample_rate_hz < 4.0 * carrier_hz:
        raise UndersampledCarrier(
            f"sample rate {sample_rate_hz:.3e} Hz below 4x carrier {carrier_hz:.3e} Hz"
        )
    if load_ohms <= 0 or not (0.0 < coupling_efficiency <= 1.0):
        raise ConfigError("load must be positive and coupling in (0, 1]")
    amp = np.sqrt(env.p_out_w * load_ohms * coupling_efficiency)
    mag_a = np.abs(env.a)
    phase_dir = np.where(mag_a > 0, env.a / np.where(mag_a > 0, mag_a, 1.0), 0.0)
    baseband = amp * phase_dir  # sqrt(load*p_out) with the field's phase

    ratio = Fraction(sample_rate_hz * env.dt_s).limit_denominator(100000)
    up, down = ratio.numerator, ratio.denominator
    if up / down <= 0 or abs(float(ratio) - sample_rate_hz * env.dt_s) > 1e-9:
        raise ConfigError("sample_rate must be commensurate with the envelope rate")
    # edge-hold padding keeps the interpolator from ringing at the record
    # boundaries, so a constant envelope synthesizes at constant amplitude
    fast = resample_poly(baseband, up, down, padtype="line")
    t_fast = np.arange(fast.size) / sample_rate_hz
    v = np.real(np.conj(fast) * np.exp(2j * np.pi * carrier_hz * t_fast))
    return MaserTrace(
        v_volts=v,
        sample_rate_hz=sample_rate_hz,
        carrier_hint_hz=carrier_hz,
        load_ohms=load_ohms,
    )


@dataclass(frozen=True)
class SweepEntry:
    """One detuning step of a sweep with its summary metrics."""

    detuning_hz: float
    envelope: MaserEnvelope | None
    p_peak_w: float | None
    p_peak_dbm: float | None
    delay_s: float | None
    rabi_td_hz: float | None
    error: str | None = None


def detuning_sweep(
    base: SimConfig, detunings_hz: Sequence[float]
) -> list[SweepEntry]:
    """simulate_burst per detuning with identical seed and pump.

    Errors are captured per entry (error string set, metrics None) without
    aborting the remaining entries.
    """
    entries: list[SweepEntry] = []
    for det in detunings_hz:
        try:
            cfg = base.with_detuning(det)
            env = simulate_burst(cfg)
        except MaserBenchError as exc:
            entries.append(
                SweepEntry(det, None, None, None, None, None, f"{type(exc).__name__}: {exc}")
            )
            continue
        p_peak = float(np.max(env.p_out_w))
        p_dbm = pulse_metrics.dbm_from_mw(p_peak * 1e3)
        # a decaying seed transient can fool the envelope peak picker, so the
        # photon-count detection line gates the timing metrics explicitly
        if float(np.max(env.n_photons)) <= 100.0 * base.seed_photons:
            entries.append(
                SweepEntry(det, env, p_peak, p_dbm, None, None, "NoBurst: below detection line")
            )
            continue
        try:
            delay = pulse_metrics.delay_to_peak(env)
        except NoBurst:
            entries.append(
                SweepEntry(det, env, p_peak, p_dbm, None, None, "NoBurst: below noise floor")
            )
            continue
        try:
            rabi = pulse_metrics.rabi_frequency_td(env)
        except InsufficientCycles:
            rabi = None
        entries.append(SweepEntry(det, env, p_peak, p_dbm, delay, rabi, None))
    return entries


def emitted_frequency(
    env: MaserEnvelope, f_spin_hz: float, seed_photons: float = 1.0
) -> float:
    """Power-weighted mean emission frequency of a burst.

    The envelope phase derivative enters with a minus sign per the frame
    bridge (free evolution at +detuning rotates as exp(-i*d_omega*t) here).
    """
    n_peak = float(np.max(env.n_photons))
    if n_peak <= 100.0 * seed_photons:
        raise NoBurst(
            f"peak photon number {n_peak:.3g} within 100x of the seed level"
        )
    phase = np.unwrap(np.angle(env.a))
    dphi_dt = np.gradient(phase, env.t_s)
    weights = env.n_photons
    mean_rate = float(np.sum(weights * dphi_dt) / np.sum(weights))
    return f_spin_hz - mean_rate / (2.0 * math.pi)
