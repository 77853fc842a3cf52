"""Reflection model, Q extraction, coupling classification, tuning curve."""

import numpy as np
import pytest

from maserbench.errors import (
    BandwidthOutsideSpan,
    ConfigError,
    FrequencyUnreachable,
    HeightOutOfRange,
    InvalidGrid,
    NoResonanceFound,
)
from maserbench.resonator import (
    SPIN_TRANSITION_HZ,
    CouplingRegime,
    QFactorEstimate,
    ReflectionTrace,
    ResonatorConfig,
    cavity_decay_rate,
    ceiling_frequency,
    classify_coupling,
    estimate_q_loaded,
    height_for_frequency,
    read_reflection_csv,
    reflection_trace,
    tune_ceiling,
    write_reflection_csv,
)


def make_config(q_loaded=2042.0, beta=0.5, f_mode=SPIN_TRANSITION_HZ):
    return ResonatorConfig.from_loaded(q_loaded, beta, f_mode_hz=f_mode)


# ---------------------------------------------------------------- Q factor

def test_published_crossing_triple_rounds_to_2042():
    est = QFactorEstimate.from_crossings(1.4495e9, 1.44915e9, 1.44986e9)
    assert est.q_loaded == pytest.approx(1.4495e9 / 0.71e6, rel=1e-12)
    assert round(est.q_loaded) == 2042
    assert abs(est.q_loaded - 2042) <= 1.0


def test_crossings_must_bracket_dip():
    with pytest.raises(ConfigError):
        QFactorEstimate.from_crossings(1.4495e9, 1.44986e9, 1.44915e9)


def test_q_estimate_on_synthetic_dip():
    trace = reflection_trace(make_config(), n_points=801)
    est = estimate_q_loaded(trace)
    assert est.q_loaded == pytest.approx(2042.0, abs=1.0)
    assert est.f_res_hz == pytest.approx(SPIN_TRANSITION_HZ, abs=200.0)
    assert est.f_lo_hz < est.f_res_hz < est.f_hi_hz
    # definitional identity of the estimate record
    assert est.q_loaded == pytest.approx(
        est.f_res_hz / (est.f_hi_hz - est.f_lo_hz), rel=1e-12
    )


@pytest.mark.parametrize("q_true", [500.0, 1000.0, 2042.0, 8000.0])
@pytest.mark.parametrize("beta", [0.3, 0.5, 1.0, 2.0])
def test_q_round_trip_half_percent(q_true, beta):
    # noiseless traces, >=401 points, span >= 6 linewidths
    cfg = make_config(q_loaded=q_true, beta=beta)
    span = 8 * SPIN_TRANSITION_HZ / q_true
    trace = reflection_trace(
        cfg,
        f_start_hz=SPIN_TRANSITION_HZ - span / 2,
        f_stop_hz=SPIN_TRANSITION_HZ + span / 2,
        n_points=601,
    )
    est = estimate_q_loaded(trace)
    assert abs(est.q_loaded - q_true) / q_true < 0.005


def test_q_stable_under_grid_refinement():
    cfg = make_config()
    a = estimate_q_loaded(reflection_trace(cfg, n_points=401)).q_loaded
    b = estimate_q_loaded(reflection_trace(cfg, n_points=802)).q_loaded
    assert abs(a - b) / a < 0.001


def test_flat_trace_rejected():
    freq = np.linspace(1.44e9, 1.46e9, 301)
    with pytest.raises(NoResonanceFound):
        estimate_q_loaded(ReflectionTrace(freq_hz=freq, s11=np.ones(301, complex)))


def test_crossings_outside_span_rejected():
    # deep dip, but the upper crossing sits past the end of the span
    cfg = make_config()
    trace = reflection_trace(
        cfg,
        f_start_hz=SPIN_TRANSITION_HZ - 2.5e6,
        f_stop_hz=SPIN_TRANSITION_HZ + 0.14e6,
        n_points=801,
    )
    with pytest.raises(BandwidthOutsideSpan):
        estimate_q_loaded(trace)


def test_shallow_dip_below_threshold_rejected():
    # nearly decoupled port: dip depth under 1 dB, default floor is 3 dB
    cfg = make_config(beta=0.05)
    trace = reflection_trace(cfg, n_points=801)
    with pytest.raises(NoResonanceFound):
        estimate_q_loaded(trace)


# ---------------------------------------------------------------- model form

def test_critical_coupling_dip_reaches_zero():
    trace = reflection_trace(make_config(beta=1.0), n_points=1001)
    assert np.min(np.abs(trace.s11)) < 5e-3


def test_reflection_far_from_resonance_is_total():
    cfg = make_config()
    trace = reflection_trace(
        cfg,
        f_start_hz=SPIN_TRANSITION_HZ + 200e6,
        f_stop_hz=SPIN_TRANSITION_HZ + 220e6,
        n_points=11,
    )
    assert np.all(np.abs(trace.s11) > 0.999)


@pytest.mark.parametrize("beta", [0.2, 0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("q", [300.0, 2042.0, 20000.0])
def test_passivity(beta, q):
    trace = reflection_trace(make_config(q_loaded=q, beta=beta), n_points=501)
    assert np.all(np.abs(trace.s11) <= 1.0 + 1e-9)


def test_noise_is_seeded_and_deterministic():
    cfg = make_config()
    a = reflection_trace(cfg, n_points=401, noise_sigma=0.01, seed=5)
    b = reflection_trace(cfg, n_points=401, noise_sigma=0.01, seed=5)
    c = reflection_trace(cfg, n_points=401, noise_sigma=0.01, seed=6)
    assert np.array_equal(a.s11, b.s11)
    assert not np.array_equal(a.s11, c.s11)


def test_degenerate_grid_rejected():
    with pytest.raises(ConfigError):
        reflection_trace(make_config(), f_start_hz=1.45e9, f_stop_hz=1.45e9)


# ---------------------------------------------------------------- coupling

@pytest.mark.parametrize(
    "beta,regime",
    [
        (0.3, CouplingRegime.UNDERCOUPLED),
        (0.5, CouplingRegime.UNDERCOUPLED),
        (0.9, CouplingRegime.UNDERCOUPLED),
        (1.1, CouplingRegime.OVERCOUPLED),
        (2.0, CouplingRegime.OVERCOUPLED),
        (3.0, CouplingRegime.OVERCOUPLED),
    ],
)
def test_coupling_classification_follows_beta(beta, regime):
    trace = reflection_trace(make_config(beta=beta), n_points=801)
    assert classify_coupling(trace).regime == regime


def test_critical_coupling_classified():
    trace = reflection_trace(make_config(beta=1.0), n_points=801)
    result = classify_coupling(trace)
    assert result.regime == CouplingRegime.CRITICAL
    assert result.origin_distance <= 0.02


def test_classify_requires_a_dip():
    freq = np.linspace(1.44e9, 1.46e9, 301)
    with pytest.raises(NoResonanceFound):
        classify_coupling(ReflectionTrace(freq_hz=freq, s11=np.ones(301, complex)))


# ---------------------------------------------------------------- decay rate

def test_decay_rate_arithmetic():
    rate = cavity_decay_rate(2042.0, 1.4495e9)
    assert rate.linewidth_hz == pytest.approx(1.4495e9 / 2042.0, rel=1e-12)
    assert rate.linewidth_hz == pytest.approx(709843.29, abs=0.01)
    assert rate.kappa_rad_per_s == pytest.approx(2 * np.pi * rate.linewidth_hz, rel=1e-12)
    assert rate.kappa_rad_per_s == pytest.approx(4.460e6, rel=1e-3)


def test_decay_rate_inverse_identity():
    q = 1.4495e9 / 0.71e6
    rate = cavity_decay_rate(q, 1.4495e9)
    assert 1.4495e9 / rate.linewidth_hz == pytest.approx(q, rel=1e-12)


def test_decay_rate_rejects_nonpositive():
    with pytest.raises(ConfigError):
        cavity_decay_rate(0.0, 1.4495e9)
    with pytest.raises(ConfigError):
        cavity_decay_rate(2042.0, -1.0)


# ---------------------------------------------------------------- tuning

def test_midpoint_height_hits_spin_frequency():
    cfg = tune_ceiling(make_config(), 12.25)
    assert cfg.f_mode_hz == pytest.approx(SPIN_TRANSITION_HZ, abs=1e-3)


def test_tuning_curve_monotone():
    heights = np.linspace(4.5, 20.0, 64)
    freqs = [ceiling_frequency(h) for h in heights]
    diffs = np.diff(freqs)
    assert np.all(diffs > 0) or np.all(diffs < 0)


def test_tuning_covers_sweep_window():
    # every detuning used by the sweep must map to a legal height
    for df in (-2.5e6, -1.5e6, 0.0, 1.5e6, 2.5e6):
        h = height_for_frequency(SPIN_TRANSITION_HZ + df)
        assert 4.5 <= h <= 20.0
        assert ceiling_frequency(h) == pytest.approx(SPIN_TRANSITION_HZ + df, abs=1.0)


def test_tune_preserves_other_fields():
    base = make_config()
    tuned = tune_ceiling(base, 9.0)
    assert tuned.q_loaded == base.q_loaded
    assert tuned.coupling_beta == base.coupling_beta
    assert tuned.f_spin_hz == base.f_spin_hz
    assert tuned.ceiling_height_mm == 9.0
    assert tuned.f_mode_hz != base.f_mode_hz


def test_height_bounds_enforced():
    with pytest.raises(HeightOutOfRange):
        tune_ceiling(make_config(), 21.0)
    with pytest.raises(HeightOutOfRange):
        tune_ceiling(make_config(), 4.4)


def test_unreachable_frequency_rejected():
    with pytest.raises(FrequencyUnreachable):
        height_for_frequency(1.40e9)


# ---------------------------------------------------------------- config

def test_from_loaded_splits_q():
    cfg = make_config(q_loaded=2042.0, beta=0.5)
    assert cfg.q_unloaded == pytest.approx(2042.0 * 1.5, rel=1e-12)
    assert cfg.q_loaded <= cfg.q_unloaded
    assert cfg.detuning_hz == 0.0
    assert cfg.linewidth_hz == pytest.approx(1.4495e9 / 2042.0, rel=1e-12)


def test_config_validation():
    with pytest.raises(ConfigError):
        ResonatorConfig.from_loaded(-5.0, 0.5)
    with pytest.raises(ConfigError):
        ResonatorConfig.from_loaded(2042.0, -0.2)


def test_config_dict_round_trip():
    cfg = tune_ceiling(make_config(), 14.0)
    clone = ResonatorConfig.from_dict(cfg.to_dict())
    assert clone == cfg


# ---------------------------------------------------------------- persistence

def test_reflection_csv_round_trip(tmp_path):
    trace = reflection_trace(make_config(), n_points=401, noise_sigma=0.002, seed=1)
    path = tmp_path / "s11.csv"
    write_reflection_csv(trace, path)
    back = read_reflection_csv(path)
    assert np.array_equal(back.freq_hz, trace.freq_hz)
    assert np.array_equal(back.s11, trace.s11)


def test_reader_rejects_non_monotone_grid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "freq_hz,s11_re,s11_im\n"
        "1.0e9,0.5,0.0\n"
        "3.0e9,0.5,0.0\n"
        "2.0e9,0.5,0.0\n"
    )
    with pytest.raises(InvalidGrid):
        read_reflection_csv(path)


def test_reader_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f,re,im\n1,0,0\n2,0,0\n3,0,0\n")
    with pytest.raises(InvalidGrid):
        read_reflection_csv(path)
