"""Burg AR fitting and maximum-entropy spectra against analytic oracles."""

import numpy as np
import pytest

from maserbench.errors import (
    ConfigError,
    FrequencyOutOfRange,
    NonFiniteInput,
    NoPeaks,
    NoSplitting,
    OrderTooLarge,
)
from maserbench.memspec import (
    ArModel,
    burg_fit,
    burst_spectrum,
    carrier_frequency,
    mem_psd,
    peaks_to_dicts,
    rabi_splitting,
    select_order,
    write_spectrum_csv,
)

FS = 50e6
DT = 1 / FS


def ar_series(coeffs, n, rng, scale=1.0):
    """Generate x_n = -sum(coeffs_k * x_{n-k}) + eps_n (1 + sum a_k z^-k convention)."""
    p = len(coeffs)
    eps = rng.standard_normal(n) * scale
    x = np.zeros(n)
    for i in range(n):
        acc = eps[i]
        for k in range(1, min(p, i) + 1):
            acc -= coeffs[k - 1] * x[i - k]
        x[i] = acc
    return x


def two_tone(t, f1, f2, noise, rng):
    sig = np.exp(2j * np.pi * f1 * t) + np.exp(2j * np.pi * f2 * t + 0.7j)
    sig += noise * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    return sig


# ---------------------------------------------------------------- burg_fit

def test_ar1_coefficient_recovery(rng):
    x = ar_series([-0.9], 100_000, rng)
    model = burg_fit(x, 1)
    assert abs(model.coeffs[0] - (-0.9)) / 0.9 < 0.02


def test_ar2_coefficient_recovery(rng):
    true = [-1.2, 0.72]
    x = ar_series(true, 100_000, rng)
    model = burg_fit(x, 2)
    for got, want in zip(model.coeffs, true):
        assert abs(got - want) / abs(want) < 0.02


def test_order_zero_model_is_mean_power(rng):
    x = rng.standard_normal(5000)
    model = burg_fit(x, 0)
    assert len(model.coeffs) == 0
    assert model.noise_var == pytest.approx(np.mean(x**2), rel=1e-12)


def test_burg_stability_guarantee(rng):
    # poles inside the unit circle for any input, including short noisy records
    for n, order in ((64, 8), (256, 20), (4096, 40)):
        x = rng.standard_normal(n) + 0.3 * np.sin(np.arange(n))
        model = burg_fit(x, order)
        roots = np.roots(np.concatenate(([1.0], np.asarray(model.coeffs))))
        assert np.all(np.abs(roots) < 1.0)


def test_burg_determinism(rng):
    x = rng.standard_normal(2048)
    a = burg_fit(x, 12)
    b = burg_fit(x.copy(), 12)
    assert np.array_equal(np.asarray(a.coeffs), np.asarray(b.coeffs))
    assert a.noise_var == b.noise_var


def test_order_bounds():
    x = np.zeros(16) + 1.0
    with pytest.raises(OrderTooLarge):
        burg_fit(x, 16)
    with pytest.raises(ConfigError):
        burg_fit(x, -1)


def test_non_finite_input_rejected():
    x = np.ones(64)
    x[10] = np.nan
    with pytest.raises(NonFiniteInput):
        burg_fit(x, 4)
    x[10] = np.inf
    with pytest.raises(NonFiniteInput):
        burg_fit(x, 4)


# ---------------------------------------------------------------- order selection

def test_fpe_selects_ar2_order(rng):
    x = ar_series([-1.2, 0.72], 100_000, rng)
    order = select_order(x, max_order=20)
    assert 2 <= order <= 6


def test_fpe_on_white_noise_stays_low(rng):
    x = rng.standard_normal(100_000)
    assert select_order(x, max_order=20) <= 2


def test_max_order_zero():
    assert select_order(np.ones(100), max_order=0) == 0


def test_select_order_rejects_long_orders(rng):
    x = rng.standard_normal(64)
    with pytest.raises(ConfigError):
        select_order(x, max_order=40)


# ---------------------------------------------------------------- mem_psd

def test_ar2_psd_matches_closed_form(rng):
    x = ar_series([-1.2, 0.72], 100_000, rng)
    model = burg_fit(x, 2, sample_dt_s=DT)
    grid = np.linspace(0.0, FS / 2, 1001)
    spectrum = mem_psd(model, grid)
    k = np.arange(1, 3)
    phases = np.exp(-2j * np.pi * grid[:, None] * k[None, :] * DT)
    denom = np.abs(1.0 + (np.asarray(model.coeffs)[None, :] * phases).sum(axis=1)) ** 2
    analytic = model.noise_var * DT / denom
    assert np.max(np.abs(spectrum.psd - analytic) / analytic) < 1e-9


def test_order_zero_psd_is_flat(rng):
    x = rng.standard_normal(4096)
    model = burg_fit(x, 0, sample_dt_s=DT)
    grid = np.linspace(0.0, FS / 2, 64)
    spectrum = mem_psd(model, grid)
    assert np.all(spectrum.psd == spectrum.psd[0])
    assert spectrum.psd[0] == pytest.approx(model.noise_var * DT, rel=1e-12)


def test_white_noise_power_consistency(rng):
    # full-band integral of the density equals the sample variance
    x = (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)) / np.sqrt(2)
    model = burg_fit(x, 4, sample_dt_s=DT)
    grid = np.linspace(-FS / 2, FS / 2, 20001)
    spectrum = mem_psd(model, grid)
    total = np.trapezoid(spectrum.psd, grid)
    var = np.mean(np.abs(x) ** 2)
    assert abs(total - var) / var < 0.05


def test_real_input_uses_one_sided_band(rng):
    x = rng.standard_normal(4096)
    model = burg_fit(x, 2, sample_dt_s=DT)
    with pytest.raises(FrequencyOutOfRange):
        mem_psd(model, np.linspace(-FS / 2, FS / 2, 101))
    grid = np.linspace(0.0, FS / 2, 5001)
    total = np.trapezoid(mem_psd(model, grid).psd, grid)
    assert abs(2 * total - x.var()) / x.var() < 0.05


def test_grid_beyond_nyquist_rejected(rng):
    x = (rng.standard_normal(512) + 1j * rng.standard_normal(512))
    model = burg_fit(x, 4, sample_dt_s=DT)
    with pytest.raises(FrequencyOutOfRange):
        mem_psd(model, np.linspace(0.0, FS, 64))


def test_normalized_spectrum_peaks_at_one(rng):
    t = np.arange(0, 20e-6, DT)
    sig = two_tone(t, 0.4e6, -0.4e6, 0.01, rng)
    model = burg_fit(sig, 12, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 4001), normalize=True)
    assert spectrum.normalized
    assert np.max(spectrum.psd) == pytest.approx(1.0, rel=1e-12)
    assert np.all(spectrum.psd >= 0.0)


def test_single_tone_within_two_percent(rng):
    t = np.arange(0, 20e-6, DT)
    tone = 0.37e6
    sig = np.exp(2j * np.pi * tone * t)
    sig = sig + 0.05 * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    model = burg_fit(sig, 8, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 8001), normalize=True)
    assert carrier_frequency(spectrum) == pytest.approx(tone, rel=0.02)


def test_tone_accuracy_half_percent_of_offset():
    # SNR exactly 20 dB, 20 us record at 50 MS/s complex.  The estimator
    # carries a noise-induced absolute bias of a few kHz at this record
    # length, so the relative bound is checked at the MHz-scale offsets
    # the burst analysis of this instrument actually produces.
    t = np.arange(0, 20e-6, DT)
    sigma = np.sqrt(0.01 / 2)
    for seed in (0, 1, 2):
        gen = np.random.default_rng(seed)
        for tone in (0.8e6, 1.1e6, 1.8e6):
            sig = np.exp(2j * np.pi * tone * t)
            sig = sig + sigma * (gen.standard_normal(t.size) + 1j * gen.standard_normal(t.size))
            model = burg_fit(sig, 8, sample_dt_s=DT)
            spectrum = mem_psd(model, np.linspace(-2.5e6, 2.5e6, 20001), normalize=True)
            est = carrier_frequency(spectrum)
            assert abs(est - tone) < 0.005 * abs(tone)


def test_tone_absolute_error_floor(rng):
    # smaller offsets: absolute accuracy within a few kHz at 20 dB
    t = np.arange(0, 20e-6, DT)
    sigma = np.sqrt(0.01 / 2)
    tone = 0.4e6
    sig = np.exp(2j * np.pi * tone * t)
    sig = sig + sigma * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    model = burg_fit(sig, 8, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2.5e6, 2.5e6, 20001), normalize=True)
    assert abs(carrier_frequency(spectrum) - tone) < 3e3


# ---------------------------------------------------------------- peaks

def test_two_tone_splitting_two_percent(rng):
    t = np.arange(0, 20e-6, DT)
    sig = two_tone(t, 0.4e6, -0.4e6, 0.01, rng)
    model = burg_fit(sig, 12, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 4001), normalize=True)
    assert len(spectrum.peaks) >= 2
    assert rabi_splitting(spectrum) == pytest.approx(0.8e6, rel=0.02)


def test_doublet_carrier_is_midpoint(rng):
    t = np.arange(0, 20e-6, DT)
    f0 = 0.15e6
    sig = two_tone(t, f0 + 0.4e6, f0 - 0.4e6, 0.01, rng)
    model = burg_fit(sig, 12, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 8001), normalize=True)
    assert carrier_frequency(spectrum) == pytest.approx(f0, abs=5e3)


def test_single_peak_has_no_splitting(rng):
    t = np.arange(0, 20e-6, DT)
    sig = np.exp(2j * np.pi * 0.3e6 * t)
    sig = sig + 0.02 * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    model = burg_fit(sig, 6, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 4001), normalize=True)
    with pytest.raises(NoSplitting):
        rabi_splitting(spectrum)


def test_empty_spectrum_has_no_peaks(rng):
    x = rng.standard_normal(4096)
    model = burg_fit(x, 0, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(0.0, FS / 2, 512))
    assert not spectrum.peaks
    with pytest.raises(NoPeaks):
        carrier_frequency(spectrum)
    with pytest.raises(NoSplitting):
        rabi_splitting(spectrum)


def test_shift_covariance(rng):
    t = np.arange(0, 20e-6, DT)
    sig = np.exp(2j * np.pi * 0.37e6 * t)
    sig = sig + 0.05 * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    grid = np.linspace(-2e6, 2e6, 8001)
    step = grid[1] - grid[0]
    base = mem_psd(burg_fit(sig, 8, sample_dt_s=DT), grid, normalize=True)
    f_shift = 0.25e6
    shifted_sig = sig * np.exp(2j * np.pi * f_shift * t)
    shifted = mem_psd(burg_fit(shifted_sig, 8, sample_dt_s=DT), grid, normalize=True)
    assert carrier_frequency(shifted) == pytest.approx(
        carrier_frequency(base) + f_shift, abs=2 * step
    )


# ---------------------------------------------------------------- burst helper

def test_burst_spectrum_offset_is_pure_shift(default_env):
    rel = burst_spectrum(default_env.t_s, default_env.a, f_offset_hz=0.0)
    absolute = burst_spectrum(default_env.t_s, default_env.a, f_offset_hz=1.4495e9)
    assert len(rel.peaks) == len(absolute.peaks)
    for p_rel, p_abs in zip(rel.peaks, absolute.peaks):
        assert p_abs.freq_hz == pytest.approx(p_rel.freq_hz + 1.4495e9, abs=1e-3)
        assert p_abs.height == p_rel.height


def test_burst_spectrum_on_calibrated_shot(default_env):
    spectrum = burst_spectrum(default_env.t_s, default_env.a)
    splitting = rabi_splitting(spectrum)
    assert 0.6e6 <= splitting <= 1.0e6


# ---------------------------------------------------------------- persistence

def test_spectrum_csv_and_peak_export(tmp_path, rng):
    t = np.arange(0, 20e-6, DT)
    sig = two_tone(t, 0.4e6, -0.4e6, 0.01, rng)
    model = burg_fit(sig, 12, sample_dt_s=DT)
    spectrum = mem_psd(model, np.linspace(-2e6, 2e6, 1001), normalize=True)
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(spectrum, path)
    header = path.read_text().splitlines()[0]
    assert header == "freq_hz,psd_norm"
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    assert rows.shape == (1001, 2)
    assert np.max(rows[:, 1]) == pytest.approx(1.0, rel=1e-12)
    dicts = peaks_to_dicts(spectrum)
    assert all(set(d) == {"freq_hz", "height", "prominence"} for d in dicts)
