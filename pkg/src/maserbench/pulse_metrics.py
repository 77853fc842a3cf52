"""Time-domain burst measurements: peak power, delay, envelope Rabi
frequency, and quadrature demodulation of scope traces.

Power convention: throughout the bench, p = v_peak^2 / load (the envelope
peak voltage squared over the load), reported in mW and dBm.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve, find_peaks, firwin

from . import memspec
from .errors import (
    ConfigError,
    EmptyTrace,
    InsufficientCycles,
    IoFailure,
    NoBurst,
    NoPeaks,
    UndersampledCarrier,
)
from .signals import MaserEnvelope, MaserTrace


def dbm_from_mw(p_mw: float) -> float:
    if p_mw < 0:
        raise ConfigError("power must be non-negative")
    if p_mw == 0.0:
        return float("-inf")
    return 10.0 * math.log10(p_mw)


def mw_from_dbm(p_dbm: float) -> float:
    if p_dbm == float("-inf"):
        return 0.0
    return 10.0 ** (p_dbm / 10.0)


class PeakPower(NamedTuple):
    v_peak_v: float
    p_peak_mw: float
    p_peak_dbm: float


def peak_power(trace_or_v_peak, load_ohms: float | None = None) -> PeakPower:
    """Peak power of a trace, or of a bare peak voltage into a given load.

    A zero record is reported as 0 mW with a -inf dBm sentinel (no power to
    express on the log scale).
    """
    if isinstance(trace_or_v_peak, MaserTrace):
        trace = trace_or_v_peak
        if trace.v_volts.size == 0:
            raise EmptyTrace("cannot take peak power of an empty trace")
        v_peak = float(np.max(np.abs(trace.v_volts)))
        load = trace.load_ohms if load_ohms is None else load_ohms
    else:
        v = np.atleast_1d(np.asarray(trace_or_v_peak, dtype=float))
        if v.size == 0:
            raise EmptyTrace("cannot take peak power of an empty record")
        v_peak = float(np.max(np.abs(v)))
        if load_ohms is None:
            raise ConfigError("load_ohms required when passing raw voltage")
        load = load_ohms
    if load <= 0:
        raise ConfigError("load must be positive")
    p_mw = v_peak * v_peak / load * 1000.0
    return PeakPower(v_peak, p_mw, dbm_from_mw(p_mw))


@dataclass(frozen=True)
class DemodEnvelope:
    """Complex envelope of a passband trace, in peak volts.

    |a_volts(t)| is the instantaneous envelope peak voltage, so the envelope
    power is |a_volts|^2 / load under the bench power convention.
    """

    t_s: np.ndarray
    a_volts: np.ndarray
    sample_rate_hz: float
    f_ref_hz: float
    load_ohms: float

    def __post_init__(self):
        t = np.asarray(self.t_s, dtype=float)
        a = np.asarray(self.a_volts, dtype=complex)
        object.__setattr__(self, "t_s", t)
        object.__setattr__(self, "a_volts", a)
        if t.shape != a.shape or t.ndim != 1 or t.size < 2:
            raise ConfigError("demodulated envelope needs matched 1-d arrays")

    @property
    def p_w(self) -> np.ndarray:
        return np.abs(self.a_volts) ** 2 / self.load_ohms


def demodulate(
    trace: MaserTrace,
    f_ref_hz: float | None = None,
    cutoff_hz: float = 25e6,
    numtaps: int | None = None,
) -> DemodEnvelope:
    """Quadrature demodulation at f_ref with a linear-phase FIR low-pass.

    The filter is applied zero-phase (odd-length symmetric taps, centered
    convolution) so envelope timing is preserved; the output is decimated to
    roughly eight samples per cutoff period.
    """
    if f_ref_hz is None:
        f_ref_hz = trace.carrier_hint_hz
    fs = trace.sample_rate_hz
    if fs < 4.0 * f_ref_hz:
        raise UndersampledCarrier(
            f"sample rate {fs:.3e} Hz below 4x reference {f_ref_hz:.3e} Hz"
        )
    if cutoff_hz <= 0 or cutoff_hz >= fs / 2:
        raise ConfigError("cutoff must sit inside (0, fs/2)")
    if numtaps is None:
        numtaps = int(min(1023, max(63, round(6.0 * fs / cutoff_hz))))
    if numtaps % 2 == 0:
        numtaps += 1
    t = trace.t_s
    mixed = 2.0 * trace.v_volts * np.exp(-2j * np.pi * f_ref_hz * t)
    taps = firwin(numtaps, cutoff_hz, fs=fs)
    env = fftconvolve(mixed, taps, mode="same")
    # the zero-padded convolution edges are not settled; drop them so every
    # returned sample reflects a full filter window
    half = (numtaps - 1) // 2
    if 2 * half >= t.size:
        raise EmptyTrace("trace shorter than the demodulation filter transient")
    t = t[half : t.size - half]
    env = env[half : env.size - half]
    step = max(1, int(fs / (8.0 * cutoff_hz)))
    return DemodEnvelope(
        t_s=t[::step],
        a_volts=env[::step],
        sample_rate_hz=fs / step,
        f_ref_hz=f_ref_hz,
        load_ohms=trace.load_ohms,
    )


def _amplitude_series(obj) -> tuple[np.ndarray, np.ndarray]:
    """(t, envelope amplitude) from any of the record types."""
    if isinstance(obj, MaserEnvelope):
        return obj.t_s, np.abs(obj.a)
    if isinstance(obj, DemodEnvelope):
        return obj.t_s, np.abs(obj.a_volts)
    if isinstance(obj, MaserTrace):
        env = demodulate(obj, obj.carrier_hint_hz)
        return env.t_s, np.abs(env.a_volts)
    raise ConfigError(f"unsupported record type {type(obj).__name__}")


def delay_to_peak(
    obj,
    trigger_time_s: float = 0.0,
    peak_fraction: float = 0.8,
    noise_ratio: float = 5.0,
) -> float:
    """Time from trigger to the first envelope maximum near the global peak.

    The first local maximum reaching peak_fraction of the global maximum
    counts as the burst peak; this tolerates ring-down envelopes whose later
    lobes approach the first. Records whose maximum stays below noise_ratio
    times the median amplitude carry no burst.
    """
    t, amp = _amplitude_series(obj)
    top = float(np.max(amp))
    floor = float(np.median(amp))
    if top <= noise_ratio * floor:
        raise NoBurst(
            f"max/median amplitude {top / floor if floor else math.inf:.2f} "
            f"below burst criterion {noise_ratio}"
        )
    idx, _ = find_peaks(amp)
    candidates = idx[amp[idx] >= peak_fraction * top]
    i_pk = int(candidates[0]) if candidates.size else int(np.argmax(amp))
    return float(t[i_pk]) - trigger_time_s


def rabi_frequency_td(
    obj,
    min_prominence_frac: float = 0.0025,
    min_height_frac: float = 0.01,
) -> float:
    """Envelope modulation frequency from successive-maximum spacing.

    Qualifying maxima need both prominence and height above floors set
    relative to the global peak; the later ring maxima sit orders of
    magnitude above any noise ripple, so the floors separate structure from
    noise without a window guess.

    The periodic structure is the ring after the main emission peak, so
    with three or more maxima the spacing is averaged over the post-peak
    intervals only; the peak-to-first-ring interval reflects the burst
    collapse and reads systematically short. With exactly two maxima that
    single interval is the only reading available and is used as is.
    rabi_frequency_autocorr offers an independent cross-check.
    """
    t, amp = _amplitude_series(obj)
    top = float(np.max(amp))
    if top <= 0:
        raise InsufficientCycles("record is identically zero")
    idx, _ = find_peaks(amp, prominence=min_prominence_frac * top)
    idx = idx[amp[idx] >= min_height_frac * top]
    i_top = int(np.argmax(amp))
    if i_top not in idx:
        # the global maximum is a plateau or boundary sample for find_peaks
        idx = np.sort(np.append(idx, i_top))
    if idx.size < 2:
        raise InsufficientCycles(
            f"found {idx.size} envelope maxima; need at least 2"
        )
    ring = idx[idx > i_top]
    if ring.size >= 2:
        spacing = float(np.mean(np.diff(t[ring])))
    else:
        spacing = float(np.mean(np.diff(t[idx])))
    return 1.0 / spacing


def rabi_frequency_autocorr(obj, region_frac: float = 0.02) -> float:
    """Envelope modulation frequency from the autocorrelation's first lobe."""
    t, amp = _amplitude_series(obj)
    top = float(np.max(amp))
    if top <= 0:
        raise InsufficientCycles("record is identically zero")
    i_top = int(np.argmax(amp))
    above = amp >= region_frac * top
    lo = i_top
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i_top
    while hi < amp.size - 1 and above[hi + 1]:
        hi += 1
    seg = amp[lo : hi + 1] - np.mean(amp[lo : hi + 1])
    if seg.size < 8:
        raise InsufficientCycles("burst region too short for autocorrelation")
    ac = np.correlate(seg, seg, mode="full")[seg.size - 1 :]
    idx, _ = find_peaks(ac)
    if idx.size == 0:
        raise InsufficientCycles("autocorrelation has no secondary lobe")
    dt = float(t[1] - t[0])
    return 1.0 / (float(idx[0]) * dt)


@dataclass(frozen=True)
class PulseMetrics:
    """Headline numbers for one maser shot."""

    v_peak_v: float
    p_peak_mw: float
    p_peak_dbm: float
    delay_to_peak_s: float
    rabi_freq_td_hz: float | None
    carrier_est_hz: float | None

    def to_dict(self) -> dict:
        return {
            "v_peak_v": self.v_peak_v,
            "p_peak_mw": self.p_peak_mw,
            "p_peak_dbm": self.p_peak_dbm,
            "delay_to_peak_s": self.delay_to_peak_s,
            "rabi_freq_td_hz": self.rabi_freq_td_hz,
            "carrier_est_hz": self.carrier_est_hz,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PulseMetrics":
        return cls(
            v_peak_v=d["v_peak_v"],
            p_peak_mw=d["p_peak_mw"],
            p_peak_dbm=d["p_peak_dbm"],
            delay_to_peak_s=d["delay_to_peak_s"],
            rabi_freq_td_hz=d.get("rabi_freq_td_hz"),
            carrier_est_hz=d.get("carrier_est_hz"),
        )


def write_metrics_json(metrics: PulseMetrics, path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(metrics.to_dict(), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"writing {path}: {exc}") from exc


def read_metrics_json(path) -> PulseMetrics:
    try:
        with open(path) as fh:
            return PulseMetrics.from_dict(json.load(fh))
    except OSError as exc:
        raise IoFailure(f"reading {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError) as exc:
        raise IoFailure(f"{path}: malformed metrics JSON: {exc}") from exc


def analyze_trace(
    trace: MaserTrace, trigger_time_s: float = 0.0
) -> tuple[PulseMetrics, memspec.PowerSpectrum, DemodEnvelope]:
    """Shared shot pipeline: demodulate, measure, and take the spectrum.

    Raises NoBurst when the record never rises above the noise floor; the
    Rabi reading and the carrier estimate degrade to None individually.
    """
    env = demodulate(trace, trace.carrier_hint_hz)
    pk = peak_power(trace)
    delay = delay_to_peak(env, trigger_time_s=trigger_time_s)
    try:
        rabi = rabi_frequency_td(env)
    except InsufficientCycles:
        rabi = None
    spectrum = memspec.burst_spectrum(
        env.t_s, env.a_volts, f_offset_hz=env.f_ref_hz
    )
    try:
        carrier = memspec.carrier_frequency(spectrum)
    except NoPeaks:
        carrier = None
    metrics = PulseMetrics(
        v_peak_v=pk.v_peak_v,
        p_peak_mw=pk.p_peak_mw,
        p_peak_dbm=pk.p_peak_dbm,
        delay_to_peak_s=delay,
        rabi_freq_td_hz=rabi,
        carrier_est_hz=carrier,
    )
    return metrics, spectrum, env
