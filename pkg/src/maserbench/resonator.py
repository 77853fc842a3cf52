"""Tunable dielectric resonator: ceiling tuning, one-port reflection, Q and
coupling estimation.

The mode is modelled as a single one-port resonance

    S11(f) = (beta - 1 - 2i*Q0*delta) / (beta + 1 + 2i*Q0*delta),
    delta = (f - f_mode) / f_mode,

with beta the coupling coefficient and Q0 the unloaded quality factor. The
loaded quality factor is Q_L = Q0 / (1 + beta).

Bandwidth convention: the half-power crossings are taken at the mean of the
dip-minimum power and the unit-reflection baseline in linear power,
P_level = (P_min + 1) / 2. For the model above this level sits exactly at
the loaded half-width, so the estimator returns Q0/(1+beta) for any beta;
for deep dips it coincides with the usual "-3 dB below baseline" markers.
Traces are assumed calibrated so that the off-resonance reflection is 0 dB.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .constants import SPIN_TRANSITION_HZ
from .errors import (
    BandwidthOutsideSpan,
    ConfigError,
    FrequencyUnreachable,
    HeightOutOfRange,
    InvalidGrid,
    IoFailure,
    NoResonanceFound,
)

CEILING_TRAVEL_MM = (4.5, 20.0)

# Calibration table for the tuning ceiling: (height_mm, f_mode_hz) anchors,
# strictly increasing in both columns, linearly interpolated between anchors.
DEFAULT_TUNING_TABLE: tuple[tuple[float, float], ...] = (
    (CEILING_TRAVEL_MM[0], SPIN_TRANSITION_HZ - 2.5e6),
    (CEILING_TRAVEL_MM[1], SPIN_TRANSITION_HZ + 2.5e6),
)

DEFAULT_GEOMETRY_MM = {
    "sto_ring_od_mm": 12.2,
    "sto_ring_id_mm": 4.1,
    "sto_ring_height_mm": 8.7,
    "cavity_id_mm": 22.0,
}


def _validate_table(table: Sequence[tuple[float, float]]) -> None:
    if len(table) < 2:
        raise ConfigError("tuning table needs at least two anchor points")
    heights = [h for h, _ in table]
    freqs = [f for _, f in table]
    if any(b <= a for a, b in zip(heights, heights[1:])):
        raise ConfigError("tuning table heights must be strictly increasing")
    if any(b <= a for a, b in zip(freqs, freqs[1:])):
        raise ConfigError("tuning table frequencies must be strictly increasing")


def ceiling_frequency(
    height_mm: float,
    table: Sequence[tuple[float, float]] = DEFAULT_TUNING_TABLE,
) -> float:
    """Mode frequency for a given ceiling height, from the calibration table."""
    _validate_table(table)
    lo, hi = table[0][0], table[-1][0]
    if not (lo <= height_mm <= hi):
        raise HeightOutOfRange(
            f"ceiling height {height_mm} mm outside travel [{lo}, {hi}] mm"
        )
    heights = [h for h, _ in table]
    freqs = [f for _, f in table]
    return float(np.interp(height_mm, heights, freqs))


def height_for_frequency(
    f_hz: float,
    table: Sequence[tuple[float, float]] = DEFAULT_TUNING_TABLE,
) -> float:
    """Ceiling height that tunes the mode to f_hz (inverse of the table)."""
    _validate_table(table)
    f_lo, f_hi = table[0][1], table[-1][1]
    if not (f_lo <= f_hz <= f_hi):
        raise FrequencyUnreachable(
            f"{f_hz} Hz outside tunable span [{f_lo}, {f_hi}] Hz"
        )
    heights = [h for h, _ in table]
    freqs = [f for _, f in table]
    return float(np.interp(f_hz, freqs, heights))


@dataclass(frozen=True)
class ResonatorConfig:
    """Loaded cavity state: mode frequency, quality factors, coupling, tuning.

    q_loaded and q_unloaded are related to the coupling through
    q_loaded = q_unloaded / (1 + coupling_beta); the constructor checks the
    ordering but leaves exact consistency to the factory helpers.
    """

    f_mode_hz: float
    q_loaded: float
    q_unloaded: float
    coupling_beta: float
    ceiling_height_mm: float
    f_spin_hz: float = SPIN_TRANSITION_HZ
    tuning_table: tuple[tuple[float, float], ...] = DEFAULT_TUNING_TABLE
    geometry_mm: dict = field(default_factory=lambda: dict(DEFAULT_GEOMETRY_MM))

    def __post_init__(self):
        _validate_table(self.tuning_table)
        if self.q_loaded <= 0 or self.q_unloaded <= 0:
            raise ConfigError("quality factors must be positive")
        if self.q_loaded > self.q_unloaded:
            raise ConfigError("q_loaded cannot exceed q_unloaded")
        if self.coupling_beta <= 0:
            raise ConfigError("coupling_beta must be positive")
        lo, hi = CEILING_TRAVEL_MM
        if not (lo <= self.ceiling_height_mm <= hi):
            raise HeightOutOfRange(
                f"ceiling height {self.ceiling_height_mm} mm outside [{lo}, {hi}] mm"
            )
        f_lo, f_hi = self.tuning_table[0][1], self.tuning_table[-1][1]
        if not (f_lo <= self.f_mode_hz <= f_hi):
            raise ConfigError(
                f"f_mode {self.f_mode_hz} Hz outside tuning span [{f_lo}, {f_hi}] Hz"
            )

    @classmethod
    def from_loaded(
        cls,
        q_loaded: float,
        coupling_beta: float,
        f_mode_hz: float = SPIN_TRANSITION_HZ,
        **kwargs,
    ) -> "ResonatorConfig":
        """Build a self-consistent config from Q_L and beta."""
        q0 = q_loaded * (1.0 + coupling_beta)
        table = kwargs.get("tuning_table", DEFAULT_TUNING_TABLE)
        height = kwargs.pop("ceiling_height_mm", None)
        if height is None:
            height = height_for_frequency(f_mode_hz, table)
        return cls(
            f_mode_hz=f_mode_hz,
            q_loaded=q_loaded,
            q_unloaded=q0,
            coupling_beta=coupling_beta,
            ceiling_height_mm=height,
            **kwargs,
        )

    @property
    def detuning_hz(self) -> float:
        return self.f_mode_hz - self.f_spin_hz

    @property
    def linewidth_hz(self) -> float:
        return self.f_mode_hz / self.q_loaded

    def to_dict(self) -> dict:
        return {
            "f_mode_hz": self.f_mode_hz,
            "q_loaded": self.q_loaded,
            "q_unloaded": self.q_unloaded,
            "coupling_beta": self.coupling_beta,
            "ceiling_height_mm": self.ceiling_height_mm,
            "f_spin_hz": self.f_spin_hz,
            "tuning_table": [list(p) for p in self.tuning_table],
            "geometry_mm": dict(self.geometry_mm),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResonatorConfig":
        d = dict(d)
        d["tuning_table"] = tuple(tuple(p) for p in d["tuning_table"])
        return cls(**d)


def tune_ceiling(cfg: ResonatorConfig, height_mm: float) -> ResonatorConfig:
    """Move the tuning ceiling; returns a config with f_mode set from the table."""
    f_new = ceiling_frequency(height_mm, cfg.tuning_table)
    return replace(cfg, ceiling_height_mm=height_mm, f_mode_hz=f_new)


@dataclass(frozen=True)
class ReflectionTrace:
    """One-port S11 sweep on a strictly increasing frequency grid."""

    freq_hz: np.ndarray
    s11: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.freq_hz, dtype=float)
        s11 = np.asarray(self.s11, dtype=complex)
        object.__setattr__(self, "freq_hz", freq)
        object.__setattr__(self, "s11", s11)
        if freq.ndim != 1 or freq.size < 3:
            raise InvalidGrid("frequency grid needs at least 3 points")
        if s11.shape != freq.shape:
            raise InvalidGrid("s11 and freq_hz must have the same length")
        if not np.all(np.diff(freq) > 0):
            raise InvalidGrid("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(freq)) or not np.all(np.isfinite(s11)):
            raise InvalidGrid("trace contains non-finite values")
        if np.max(np.abs(s11)) > 1.0 + 1e-9:
            raise InvalidGrid("|s11| exceeds unity; trace is not passive")


def reflection_trace(
    cfg: ResonatorConfig,
    f_start_hz: float | None = None,
    f_stop_hz: float | None = None,
    n_points: int = 401,
    noise_sigma: float = 0.0,
    seed: int | None = None,
) -> ReflectionTrace:
    """Synthesize an S11 sweep of the configured resonance.

    Default span is ten loaded linewidths centered on the mode. Optional
    additive complex Gaussian noise (per-quadrature sigma) is applied when a
    seed is given; magnitudes are clipped to the unit circle to keep the
    trace passive.
    """
    if f_start_hz is None or f_stop_hz is None:
        half_span = 5.0 * cfg.linewidth_hz
        f_start_hz = cfg.f_mode_hz - half_span
        f_stop_hz = cfg.f_mode_hz + half_span
    if not (f_start_hz < f_stop_hz):
        raise InvalidGrid("f_start must be below f_stop")
    if n_points < 3:
        raise InvalidGrid("need at least 3 sweep points")
    freq = np.linspace(f_start_hz, f_stop_hz, n_points)
    delta = (freq - cfg.f_mode_hz) / cfg.f_mode_hz
    q0 = cfg.q_unloaded
    beta = cfg.coupling_beta
    s11 = (beta - 1.0 - 2j * q0 * delta) / (beta + 1.0 + 2j * q0 * delta)
    if seed is not None and noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        s11 = s11 + noise_sigma * (
            rng.standard_normal(n_points) + 1j * rng.standard_normal(n_points)
        )
        mag = np.abs(s11)
        over = mag > 1.0
        if np.any(over):
            s11 = np.where(over, s11 / mag, s11)
    return ReflectionTrace(freq_hz=freq, s11=s11)


@dataclass(frozen=True)
class QFactorEstimate:
    """Dip frequency, interpolated half-power crossings, and the loaded Q."""

    f_res_hz: float
    f_lo_hz: float
    f_hi_hz: float
    q_loaded: float

    def __post_init__(self):
        if not (self.f_lo_hz < self.f_res_hz < self.f_hi_hz):
            raise ConfigError("crossings must bracket the dip frequency")
        q = self.f_res_hz / (self.f_hi_hz - self.f_lo_hz)
        if not math.isclose(q, self.q_loaded, rel_tol=1e-9):
            raise ConfigError("q_loaded must equal f_res/(f_hi - f_lo)")

    @classmethod
    def from_crossings(
        cls, f_res_hz: float, f_lo_hz: float, f_hi_hz: float
    ) -> "QFactorEstimate":
        return cls(
            f_res_hz=f_res_hz,
            f_lo_hz=f_lo_hz,
            f_hi_hz=f_hi_hz,
            q_loaded=f_res_hz / (f_hi_hz - f_lo_hz),
        )


def _find_dip(trace: ReflectionTrace, min_depth_db: float) -> int:
    """Index of the dip minimum; raises NoResonanceFound for flat traces."""
    mag = np.abs(trace.s11)
    i_min = int(np.argmin(mag))
    floor = max(np.min(mag), 1e-15)
    depth_db = 20.0 * math.log10(np.max(mag) / floor)
    if depth_db < min_depth_db:
        raise NoResonanceFound(
            f"dip depth {depth_db:.2f} dB below threshold {min_depth_db:.2f} dB"
        )
    if i_min == 0 or i_min == mag.size - 1:
        raise NoResonanceFound("trace minimum sits on the span edge; no dip")
    return i_min


def _parabolic_min(f: np.ndarray, p: np.ndarray, i: int) -> tuple[float, float]:
    """Refine a grid minimum of p(f) with a 3-point parabola."""
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom <= 0:
        return float(f[i]), float(y1)
    shift = float(np.clip(0.5 * (y0 - y2) / denom, -1.0, 1.0))
    h = 0.5 * (f[i + 1] - f[i - 1])
    f_min = float(f[i] + shift * h)
    p_min = float(y1 - 0.25 * (y0 - y2) * shift)
    return f_min, p_min


def estimate_q_loaded(
    trace: ReflectionTrace, min_depth_db: float = 3.0
) -> QFactorEstimate:
    """Loaded Q from the dip width at half linear power depth.

    The crossing level is (P_min + 1)/2 in linear power against the unit
    off-resonance baseline; crossing frequencies are linearly interpolated
    between grid samples.
    """
    i_min = _find_dip(trace, min_depth_db)
    power = np.abs(trace.s11) ** 2
    freq = trace.freq_hz
    f_res, p_min = _parabolic_min(freq, power, i_min)
    level = 0.5 * (p_min + 1.0)

    def cross(direction: int) -> float:
        j = i_min
        while 0 <= j + direction < power.size:
            a, b = power[j], power[j + direction]
            if a < level <= b:
                frac = (level - a) / (b - a)
                return float(freq[j] + frac * (freq[j + direction] - freq[j]))
            j += direction
        raise BandwidthOutsideSpan(
            "half-power crossing not bracketed by the sweep span"
        )

    f_lo = cross(-1)
    f_hi = cross(+1)
    return QFactorEstimate.from_crossings(f_res, f_lo, f_hi)


class CouplingRegime(str, Enum):
    UNDERCOUPLED = "undercoupled"
    CRITICAL = "critical"
    OVERCOUPLED = "overcoupled"


@dataclass(frozen=True)
class CouplingClass:
    """Coupling regime with the polar-circle diagnostic behind it.

    origin_distance is signed: positive when the origin lies outside the
    fitted resonance circle (undercoupled side), negative when enclosed.
    """

    regime: CouplingRegime
    origin_distance: float
    center_re: float
    center_im: float
    radius: float


def _kasa_circle(z: np.ndarray) -> tuple[float, float, float]:
    """Algebraic least-squares circle through complex locus points."""
    x, y = z.real, z.imag
    a_mat = np.column_stack([x, y, np.ones_like(x)])
    rhs = -(x * x + y * y)
    sol, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    d_coef, e_coef, f_coef = sol
    cx, cy = -d_coef / 2.0, -e_coef / 2.0
    r2 = cx * cx + cy * cy - f_coef
    return float(cx), float(cy), float(math.sqrt(max(r2, 0.0)))


def classify_coupling(
    trace: ReflectionTrace,
    tolerance: float = 0.02,
    min_depth_db: float = 3.0,
) -> CouplingClass:
    """Coupling regime from the resonance circle in the complex S11 plane."""
    _find_dip(trace, min_depth_db)
    cx, cy, radius = _kasa_circle(trace.s11)
    dist = math.hypot(cx, cy) - radius
    if abs(dist) <= tolerance:
        regime = CouplingRegime.CRITICAL
    elif dist > 0:
        regime = CouplingRegime.UNDERCOUPLED
    else:
        regime = CouplingRegime.OVERCOUPLED
    return CouplingClass(
        regime=regime,
        origin_distance=dist,
        center_re=cx,
        center_im=cy,
        radius=radius,
    )


class DecayRate(NamedTuple):
    kappa_rad_per_s: float
    linewidth_hz: float


def cavity_decay_rate(q_loaded: float, f_res_hz: float) -> DecayRate:
    """Photon decay rate kappa = 2*pi*f/Q_L and the linewidth f/Q_L."""
    if q_loaded <= 0 or f_res_hz <= 0:
        raise ConfigError("q_loaded and f_res must be positive")
    linewidth = f_res_hz / q_loaded
    return DecayRate(2.0 * math.pi * linewidth, linewidth)


def write_reflection_csv(trace: ReflectionTrace, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["freq_hz", "s11_re", "s11_im"])
            for f, s in zip(trace.freq_hz, trace.s11):
                writer.writerow([repr(float(f)), repr(float(s.real)), repr(float(s.imag))])
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def read_reflection_csv(path) -> ReflectionTrace:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != [
                "freq_hz",
                "s11_re",
                "s11_im",
            ]:
                raise InvalidGrid(f"{path}: expected header freq_hz,s11_re,s11_im")
            rows = [(float(r[0]), float(r[1]), float(r[2])) for r in reader]
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise InvalidGrid(f"{path}: malformed row: {exc}") from exc
    if len(rows) < 3:
        raise InvalidGrid(f"{path}: fewer than 3 points")
    freq = np.array([r[0] for r in rows])
    s11 = np.array([complex(r[1], r[2]) for r in rows])
    return ReflectionTrace(freq_hz=freq, s11=s11)
