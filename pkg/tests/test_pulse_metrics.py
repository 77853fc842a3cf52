"""Scalar burst measurements: peak power, delay, demodulation, Rabi estimate."""

import math

import numpy as np
import pytest

from maserbench.errors import (
    EmptyTrace,
    InsufficientCycles,
    NoBurst,
    UndersampledCarrier,
)
from maserbench.pulse_metrics import (
    PulseMetrics,
    analyze_trace,
    dbm_from_mw,
    delay_to_peak,
    demodulate,
    mw_from_dbm,
    peak_power,
    rabi_frequency_autocorr,
    rabi_frequency_td,
    read_metrics_json,
    write_metrics_json,
)
from maserbench.signals import MaserEnvelope, MaserTrace

FS = 6e9
CARRIER = 1.4495e9


def tone_trace(amp_fn, duration_s=2e-6, carrier_hz=CARRIER, load=50.0):
    t = np.arange(0, duration_s, 1 / FS)
    v = amp_fn(t) * np.cos(2 * np.pi * carrier_hz * t)
    return MaserTrace(v_volts=v, sample_rate_hz=FS, carrier_hint_hz=carrier_hz, load_ohms=load)


def envelope_of(amp, t):
    a = amp.astype(complex)
    return MaserEnvelope(
        t_s=t, a=a, n_photons=np.abs(a) ** 2, w=np.zeros_like(amp), p_out_w=np.abs(a) ** 2
    )


# ---------------------------------------------------------------- peak power

def test_published_voltage_power_pair():
    # V^2/R convention: 0.13 V into 50 ohm
    result = peak_power(tone_trace(lambda t: np.full_like(t, 0.13)))
    assert result.v_peak_v == pytest.approx(0.13, rel=1e-9)
    assert result.p_peak_mw == pytest.approx(0.13**2 / 50 * 1000, rel=1e-9)
    assert round(result.p_peak_mw, 3) == 0.338
    assert round(result.p_peak_dbm, 2) == -4.71


def test_zero_dbm_reference():
    v = math.sqrt(1e-3 * 50)  # exactly 1 mW into 50 ohm
    result = peak_power(tone_trace(lambda t: np.full_like(t, v)))
    assert result.p_peak_mw == pytest.approx(1.0, rel=1e-9)
    assert abs(result.p_peak_dbm) < 1e-6


def test_scalar_entry_point():
    result = peak_power(0.13, 50.0)
    assert result.p_peak_mw == pytest.approx(0.338, rel=1e-12)
    assert result.p_peak_dbm == pytest.approx(10 * math.log10(0.13**2 / 50 * 1000), rel=1e-12)


def test_all_zero_trace_reports_sentinel():
    t = np.arange(0, 1e-6, 1 / FS)
    trace = MaserTrace(np.zeros(t.size), FS, CARRIER)
    result = peak_power(trace)
    assert result.p_peak_mw == 0.0
    assert result.p_peak_dbm == -math.inf


def test_peak_power_symmetries():
    trace = tone_trace(lambda t: 0.05 * np.exp(-((t - 1e-6) / 0.3e-6) ** 2))
    base = peak_power(trace)
    flipped = MaserTrace(-trace.v_volts, FS, CARRIER)
    reversed_ = MaserTrace(trace.v_volts[::-1].copy(), FS, CARRIER)
    assert peak_power(flipped).p_peak_mw == base.p_peak_mw
    assert peak_power(reversed_).p_peak_mw == base.p_peak_mw


def test_empty_trace_rejected():
    with pytest.raises(EmptyTrace):
        peak_power(MaserTrace(np.array([]), FS, CARRIER))


def test_dbm_mw_identity():
    for mw in (1e-6, 0.338, 1.0, 42.0, 1e4):
        assert mw_from_dbm(dbm_from_mw(mw)) == pytest.approx(mw, rel=1e-12)
    assert dbm_from_mw(0.0) == -math.inf
    assert mw_from_dbm(-math.inf) == 0.0


# ---------------------------------------------------------------- delay

def test_delay_of_synthetic_peak():
    t = np.arange(0, 10e-6, 20e-9)
    amp = np.exp(-((t - 3e-6) / 0.5e-6) ** 2)
    assert delay_to_peak(envelope_of(amp, t)) == pytest.approx(3e-6, abs=20e-9)


def test_delay_honors_trigger_offset():
    t = np.arange(0, 10e-6, 20e-9)
    amp = np.exp(-((t - 3e-6) / 0.5e-6) ** 2)
    assert delay_to_peak(envelope_of(amp, t), trigger_time_s=1e-6) == pytest.approx(
        2e-6, abs=20e-9
    )


def test_delay_picks_first_qualifying_maximum():
    # two maxima above the 80% threshold; the earlier one defines the delay
    t = np.arange(0, 10e-6, 20e-9)
    amp = np.exp(-((t - 4e-6) / 0.4e-6) ** 2) + 0.95 * np.exp(-((t - 6e-6) / 0.4e-6) ** 2)
    assert delay_to_peak(envelope_of(amp, t)) == pytest.approx(4e-6, abs=40e-9)


def test_flat_noise_has_no_burst(rng):
    t = np.arange(0, 10e-6, 20e-9)
    amp = 0.01 * np.abs(rng.standard_normal(t.size))
    with pytest.raises(NoBurst):
        delay_to_peak(envelope_of(amp, t))


# ---------------------------------------------------------------- demodulation

def test_demodulate_constant_tone():
    trace = tone_trace(lambda t: np.full_like(t, 0.08), duration_s=3e-6)
    env = demodulate(trace, CARRIER)
    mid = np.abs(env.a_volts[env.t_s > 0.5e-6])
    mid = mid[: int(mid.size * 0.8)]
    assert np.all(np.abs(mid - 0.08) / 0.08 < 0.01)


def test_demodulate_beat_pair():
    # tones at f_ref +/- 0.4 MHz beat at 0.8 MHz in the envelope
    t = np.arange(0, 20e-6, 1 / FS)
    v = 0.05 * (
        np.cos(2 * np.pi * (CARRIER + 0.4e6) * t) + np.cos(2 * np.pi * (CARRIER - 0.4e6) * t)
    )
    trace = MaserTrace(v, FS, CARRIER)
    env = demodulate(trace, CARRIER)
    assert rabi_frequency_td(env) == pytest.approx(0.8e6, rel=0.02)


def test_undersampled_carrier_rejected_at_construction():
    t = np.arange(0, 1e-6, 1 / 2e9)
    with pytest.raises(UndersampledCarrier):
        MaserTrace(np.zeros(t.size), 2e9, CARRIER)


def test_demodulate_requires_oversampling():
    # trace itself is fine; the requested reference is too fast for fs
    t = np.arange(0, 1e-6, 1 / 2e9)
    trace = MaserTrace(np.zeros(t.size) + 1e-3, 2e9, 0.4e9)
    with pytest.raises(UndersampledCarrier):
        demodulate(trace, CARRIER)


def test_round_trip_on_simulated_burst(default_env, default_trace, default_config):
    # synthesize -> demodulate recovers the envelope within 1% RMS
    env = demodulate(default_trace, default_config.resonator.f_spin_hz)
    scale = np.sqrt(default_env.p_out_w * default_trace.load_ohms)
    recovered = np.interp(default_env.t_s, env.t_s, np.abs(env.a_volts))
    err = np.sqrt(np.mean((recovered - scale) ** 2)) / scale.max()
    assert err < 0.01


# ---------------------------------------------------------------- Rabi estimate

def test_rabi_of_modulated_envelope():
    t = np.arange(0, 20e-6, 20e-9)
    amp = 1.0 + 0.5 * np.cos(2 * np.pi * 0.8e6 * t)
    assert rabi_frequency_td(envelope_of(amp, t)) == pytest.approx(0.8e6, rel=0.02)


def test_rabi_autocorr_agrees_on_clean_modulation():
    t = np.arange(0, 20e-6, 20e-9)
    amp = 1.0 + 0.5 * np.cos(2 * np.pi * 0.8e6 * t)
    td = rabi_frequency_td(envelope_of(amp, t))
    ac = rabi_frequency_autocorr(envelope_of(amp, t))
    assert ac == pytest.approx(td, rel=0.05)


def test_monotone_envelope_has_insufficient_cycles():
    t = np.arange(0, 20e-6, 20e-9)
    amp = np.exp(-t / 5e-6)
    with pytest.raises(InsufficientCycles):
        rabi_frequency_td(envelope_of(amp, t))


def test_calibrated_burst_rabi_in_band(default_env):
    assert rabi_frequency_td(default_env) == pytest.approx(0.8e6, abs=0.2e6)


# ---------------------------------------------------------------- full analysis

def test_analyze_trace_bundles_consistent_results(default_trace, default_config):
    metrics, spectrum, env = analyze_trace(default_trace)
    assert isinstance(metrics, PulseMetrics)
    assert metrics.p_peak_dbm == pytest.approx(-5.0, abs=3.0)
    assert metrics.delay_to_peak_s < 10e-6
    assert metrics.rabi_freq_td_hz == pytest.approx(0.8e6, abs=0.2e6)
    # spectrum carries absolute frequencies near the carrier
    f_spin = default_config.resonator.f_spin_hz
    assert abs(metrics.carrier_est_hz - f_spin) < 2e6
    top = max(spectrum.peaks, key=lambda p: p.prominence)
    assert abs(top.freq_hz - f_spin) < 2e6
    assert metrics.v_peak_v == pytest.approx(np.max(np.abs(default_trace.v_volts)), rel=1e-12)


def test_analyze_flat_trace_raises(rng):
    t = np.arange(0, 5e-6, 1 / FS)
    v = 1e-6 * rng.standard_normal(t.size)
    trace = MaserTrace(v, FS, CARRIER)
    with pytest.raises(NoBurst):
        analyze_trace(trace)


# ---------------------------------------------------------------- persistence

def test_metrics_json_round_trip(tmp_path):
    metrics = PulseMetrics(
        v_peak_v=0.13,
        p_peak_mw=0.338,
        p_peak_dbm=-4.71,
        delay_to_peak_s=5.4e-6,
        rabi_freq_td_hz=0.97e6,
        carrier_est_hz=1.44951e9,
    )
    path = tmp_path / "metrics.json"
    write_metrics_json(metrics, path)
    assert read_metrics_json(path) == metrics


def test_metrics_json_keeps_absent_rabi(tmp_path):
    metrics = PulseMetrics(0.01, 0.002, -26.99, 15.5e-6, None, None)
    path = tmp_path / "metrics.json"
    write_metrics_json(metrics, path)
    back = read_metrics_json(path)
    assert back.rabi_freq_td_hz is None
    assert back.carrier_est_hz is None
