"""Maximum-entropy spectral estimation on complex envelopes.

An autoregressive model is fitted with Burg's recursion and evaluated as

    psd(f) = noise_var * dt / |1 + sum_k a_k exp(-2*pi*i*f*k*dt)|^2.

The same recursion serves real and complex records; a real record simply
yields real coefficients. Shot spectra are computed on the demodulated
complex envelope (the quadrature construction of the analytic signal) and
re-offset to absolute frequency, never on raw passband samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .errors import (
    ConfigError,
    FrequencyOutOfRange,
    IoFailure,
    NonFiniteInput,
    NoPeaks,
    NoSplitting,
    OrderTooLarge,
)


@dataclass(frozen=True)
class ArModel:
    """Autoregressive model in the 1 + sum a_k z^{-k} convention."""

    coeffs: np.ndarray
    noise_var: float
    sample_dt_s: float

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs)) if np.size(self.coeffs) else np.asarray(self.coeffs)
        if np.isrealobj(coeffs):
            coeffs = coeffs.astype(float)
        else:
            coeffs = coeffs.astype(complex)
        object.__setattr__(self, "coeffs", coeffs)
        if self.noise_var < 0:
            raise ConfigError("noise_var must be non-negative")
        if self.sample_dt_s <= 0:
            raise ConfigError("sample_dt must be positive")

    @property
    def order(self) -> int:
        return int(self.coeffs.size)

    @property
    def is_real(self) -> bool:
        return bool(np.isrealobj(self.coeffs))

    def poles(self) -> np.ndarray:
        if self.order == 0:
            return np.array([], dtype=complex)
        return np.roots(np.concatenate([[1.0], self.coeffs]))

    def is_stable(self, margin: float = 0.0) -> bool:
        poles = self.poles()
        if poles.size == 0:
            return True
        return bool(np.max(np.abs(poles)) < 1.0 - margin)


@dataclass(frozen=True)
class SpectralPeak:
    freq_hz: float
    height: float
    prominence: float


@dataclass(frozen=True)
class PowerSpectrum:
    """Sampled power spectral density with its detected peaks."""

    freq_hz: np.ndarray
    psd: np.ndarray
    normalized: bool
    peaks: tuple[SpectralPeak, ...] = field(default_factory=tuple)

    def __post_init__(self):
        freq = np.asarray(self.freq_hz, dtype=float)
        psd = np.asarray(self.psd, dtype=float)
        object.__setattr__(self, "freq_hz", freq)
        object.__setattr__(self, "psd", psd)
        object.__setattr__(self, "peaks", tuple(self.peaks))
        if freq.shape != psd.shape or freq.ndim != 1:
            raise ConfigError("freq_hz and psd must be 1-d arrays of equal length")
        if np.min(psd) < 0:
            raise ConfigError("psd must be non-negative")
        if self.normalized and psd.size and abs(float(np.max(psd)) - 1.0) > 1e-9:
            raise ConfigError("normalized spectrum must have unit maximum")


def _require_finite(x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("signal contains NaN or Inf")


def _burg_recursion(x: np.ndarray, max_order: int):
    """One pass of Burg's method up to max_order.

    Returns (coeffs_by_stage is not kept; final coeffs, error_history) where
    error_history[m] is the prediction-error power after fitting order m.
    """
    n = x.size
    energy = float(np.mean(np.abs(x) ** 2))
    errors = [energy]
    coeffs = np.zeros(0, dtype=x.dtype)
    f = x[1:].copy()
    b = x[:-1].copy()
    for _ in range(max_order):
        den = float(np.sum(np.abs(f) ** 2 + np.abs(b) ** 2))
        if den <= 0.0:
            # perfectly predicted; remaining reflection coefficients are zero
            coeffs = np.concatenate([coeffs, np.zeros(1, dtype=x.dtype)])
            errors.append(errors[-1])
            continue
        k = -2.0 * np.sum(f * np.conj(b)) / den
        if abs(k) > 1.0:  # Cauchy-Schwarz guarantees |k| <= 1; guard roundoff
            k = k / abs(k)
        coeffs = np.concatenate([coeffs + k * np.conj(coeffs[::-1]), [k]])
        errors.append(errors[-1] * float(1.0 - abs(k) ** 2))
        f, b = f[1:] + k * b[1:], b[:-1] + np.conj(k) * f[:-1]
    return coeffs, errors


def burg_fit(signal, order: int, sample_dt_s: float = 1.0) -> ArModel:
    """Fit an AR model of the given order by Burg's recursion."""
    x = np.asarray(signal)
    x = x.astype(complex) if np.iscomplexobj(x) else x.astype(float)
    _require_finite(x)
    if x.ndim != 1 or x.size == 0:
        raise ConfigError("signal must be a non-empty 1-d array")
    if order < 0 or order >= x.size:
        raise OrderTooLarge(
            f"order {order} not in [0, {x.size}) for a {x.size}-sample record"
        )
    coeffs, errors = _burg_recursion(x, order)
    return ArModel(coeffs=coeffs, noise_var=errors[-1], sample_dt_s=sample_dt_s)


def select_order(signal, max_order: int, criterion: str = "fpe") -> int:
    """Order minimizing FPE (or AIC) over [0, max_order]."""
    x = np.asarray(signal)
    x = x.astype(complex) if np.iscomplexobj(x) else x.astype(float)
    _require_finite(x)
    n = x.size
    if max_order < 0 or max_order >= n / 2:
        raise OrderTooLarge(f"max_order {max_order} must be below {n}/2")
    if criterion not in ("fpe", "aic"):
        raise ConfigError(f"unknown criterion {criterion!r}")
    _, errors = _burg_recursion(x, max_order)
    best_order, best_score = 0, None
    for p, e in enumerate(errors):
        e = max(e, 1e-300)
        if criterion == "fpe":
            score = e * (n + p + 1) / (n - p - 1)
        else:
            score = n * np.log(e) + 2 * p
        if best_score is None or score < best_score:
            best_order, best_score = p, score
    return best_order


def _refine_peak(freq: np.ndarray, psd: np.ndarray, i: int) -> tuple[float, float]:
    """Parabolic vertex on log psd around a grid peak."""
    if i == 0 or i == psd.size - 1:
        return float(freq[i]), float(psd[i])
    y = np.log(np.maximum(psd[i - 1 : i + 2], 1e-300))
    denom = y[0] - 2.0 * y[1] + y[2]
    if denom >= 0:
        return float(freq[i]), float(psd[i])
    shift = float(np.clip(0.5 * (y[0] - y[2]) / denom, -1.0, 1.0))
    h = 0.5 * (freq[i + 1] - freq[i - 1])
    f_pk = float(freq[i] + shift * h)
    p_pk = float(np.exp(y[1] - 0.25 * (y[0] - y[2]) * shift))
    return f_pk, p_pk


def mem_psd(
    model: ArModel,
    freq_grid_hz,
    normalize: bool = False,
    peak_prominence: float = 0.05,
) -> PowerSpectrum:
    """Evaluate the model's power spectral density on a frequency grid."""
    freq = np.asarray(freq_grid_hz, dtype=float)
    if freq.ndim != 1 or freq.size == 0:
        raise ConfigError("frequency grid must be a non-empty 1-d array")
    nyquist = 0.5 / model.sample_dt_s
    tol = 1e-9 * nyquist
    lo = -tol if model.is_real else -nyquist - tol
    if np.min(freq) < lo or np.max(freq) > nyquist + tol:
        band = "[0, fs/2]" if model.is_real else "[-fs/2, fs/2]"
        raise FrequencyOutOfRange(f"grid outside the Nyquist band {band}")
    if model.order:
        k = np.arange(1, model.order + 1)
        phases = np.exp(-2j * np.pi * np.outer(freq, k) * model.sample_dt_s)
        denom = np.abs(1.0 + phases @ model.coeffs.astype(complex)) ** 2
        psd = model.noise_var * model.sample_dt_s / denom
    else:
        psd = np.full(freq.shape, model.noise_var * model.sample_dt_s)
    if normalize:
        top = float(np.max(psd))
        if top > 0:
            psd = psd / top
    peaks = _scan_peaks(freq, psd, peak_prominence)
    return PowerSpectrum(freq_hz=freq, psd=psd, normalized=normalize, peaks=peaks)


def _scan_peaks(
    freq: np.ndarray, psd: np.ndarray, prominence_frac: float
) -> tuple[SpectralPeak, ...]:
    top = float(np.max(psd)) if psd.size else 0.0
    if top <= 0:
        return ()
    idx, props = find_peaks(psd, prominence=prominence_frac * top)
    peaks = []
    for i, prom in zip(idx, props["prominences"]):
        f_pk, h_pk = _refine_peak(freq, psd, int(i))
        peaks.append(SpectralPeak(freq_hz=f_pk, height=h_pk, prominence=float(prom)))
    return tuple(peaks)


def _peaks_by_prominence(spectrum: PowerSpectrum) -> list[SpectralPeak]:
    return sorted(spectrum.peaks, key=lambda p: (-p.prominence, p.freq_hz))


def carrier_frequency(spectrum: PowerSpectrum) -> float:
    """Central emission frequency: single peak, or midpoint of a doublet."""
    ranked = _peaks_by_prominence(spectrum)
    if not ranked:
        raise NoPeaks("spectrum has no qualifying peaks")
    if len(ranked) == 1:
        return ranked[0].freq_hz
    return 0.5 * (ranked[0].freq_hz + ranked[1].freq_hz)


def rabi_splitting(spectrum: PowerSpectrum) -> float:
    """Distance between the two most prominent spectral peaks."""
    ranked = _peaks_by_prominence(spectrum)
    if len(ranked) < 2:
        raise NoSplitting("fewer than two qualifying peaks")
    return abs(ranked[0].freq_hz - ranked[1].freq_hz)


def burst_spectrum(
    t_s,
    a,
    f_offset_hz: float = 0.0,
    target_sample_rate_hz: float = 25e6,
    span_s: float = 6e-6,
    order: int | None = None,
    n_freq: int = 4001,
    normalize: bool = True,
    peak_prominence: float = 0.05,
    ring_floor_frac: float = 0.01,
) -> PowerSpectrum:
    """Spectrum of the oscillatory part of a burst envelope.

    The analysis window starts at the first local minimum of |a| after the
    main peak (the onset of the ring-down oscillation) provided the envelope
    still holds at least ring_floor_frac of its peak there; otherwise the
    window starts at the peak itself. The windowed segment is decimated to
    target_sample_rate_hz, AR-fitted, and evaluated on a symmetric grid that
    is then shifted by f_offset_hz to absolute frequency.
    """
    t = np.asarray(t_s, dtype=float)
    x = np.asarray(a, dtype=complex)
    _require_finite(x)
    if t.size != x.size or t.size < 16:
        raise ConfigError("need matching t and a arrays with at least 16 samples")
    dt = float(t[1] - t[0])
    amp = np.abs(x)
    ipk = int(np.argmax(amp))
    start = ipk
    tail = -amp[ipk:]
    minima, _ = find_peaks(tail)
    for j in minima:
        idx = ipk + int(j)
        if amp[idx] >= ring_floor_frac * amp[ipk]:
            start = idx
            break
        # ring-down already buried; analyze the decay from the peak instead
        break
    n_span = max(int(round(span_s / dt)), 16)
    end = min(start + n_span, x.size)
    if end - start < 16:
        start = max(0, end - 16)
    dec = max(1, int(round(1.0 / (dt * target_sample_rate_hz))))
    seg = x[start:end:dec]
    dt_dec = dt * dec
    if order is None:
        order = min(32, seg.size // 3)
    order = min(order, seg.size - 1)
    model = burg_fit(seg, order, sample_dt_s=dt_dec)
    nyq = 0.5 / dt_dec
    grid = np.linspace(-nyq, nyq, n_freq)
    spec = mem_psd(model, grid, normalize=normalize, peak_prominence=peak_prominence)
    shifted_peaks = tuple(
        SpectralPeak(p.freq_hz + f_offset_hz, p.height, p.prominence)
        for p in spec.peaks
    )
    return PowerSpectrum(
        freq_hz=spec.freq_hz + f_offset_hz,
        psd=spec.psd,
        normalized=spec.normalized,
        peaks=shifted_peaks,
    )


def write_spectrum_csv(spectrum: PowerSpectrum, path) -> None:
    psd = spectrum.psd
    if not spectrum.normalized:
        top = float(np.max(psd)) if psd.size else 0.0
        if top > 0:
            psd = psd / top
    data = np.column_stack([spectrum.freq_hz, psd])
    try:
        np.savetxt(
            path, data, delimiter=",", header="freq_hz,psd_norm", comments="", fmt="%.17g"
        )
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def peaks_to_dicts(spectrum: PowerSpectrum) -> list[dict]:
    return [
        {"freq_hz": p.freq_hz, "height": p.height, "prominence": p.prominence}
        for p in spectrum.peaks
    ]


def write_peaks_json(spectrum: PowerSpectrum, path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(peaks_to_dicts(spectrum), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc
