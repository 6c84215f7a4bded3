"""Class-A noise model: density, sampling, theoretical BER, capacity, LLRs."""

import math

import numpy as np
import pytest
from scipy import stats

from polarcraft import (ClassAChannel, ClassAParams, db_to_linear, ebn0_to_sigma2,
                        truncate_mixture)

# pure-Gaussian limit: impulsive power one millionth of the background
AWGN_LIKE = ClassAParams(impulsive_index=0.1, gauss_to_impulse_ratio=1e6,
                         total_variance=0.5)
IMPULSIVE = ClassAParams(impulsive_index=0.1, gauss_to_impulse_ratio=0.1,
                         total_variance=0.5)


def poisson_truncation_oracle(a, tol, cap=256):
    """Brute-force CDF accumulation: smallest M with mass >= 1 - tol."""
    total, pmf, count = 0.0, math.exp(-a), 0
    while total < 1.0 - tol and count < cap:
        total += pmf
        count += 1
        pmf *= a / count
    return count


def mixture_pdf_oracle(params, z):
    """Direct mixture density from the Poisson definition."""
    m_count = poisson_truncation_oracle(params.impulsive_index, 1e-12)
    a, g = params.impulsive_index, params.gauss_to_impulse_ratio
    w = np.array([math.exp(-a) * a ** m / math.factorial(m) for m in range(m_count)])
    w /= w.sum()
    sig2 = params.total_variance * (np.arange(m_count) / a + g) / (1.0 + g)
    z = np.asarray(z, dtype=float)
    return np.sum(w / np.sqrt(2 * np.pi * sig2)
                  * np.exp(-np.square(z)[..., None] / (2 * sig2)), axis=-1)


def erfc_series(x, terms=80):
    """Library-independent erfc from the erf Maclaurin series."""
    total, term = 0.0, x
    for n in range(terms):
        total += term / (2 * n + 1)
        term *= -x * x / (n + 1)
    return 1.0 - 2.0 / math.sqrt(math.pi) * total


# ---------- parameters and truncation ----------

def test_derived_variances_split_the_total():
    p = ClassAParams(0.3, 2.0, 1.7)
    assert p.gaussian_variance + p.impulsive_variance == pytest.approx(1.7, abs=1e-15)
    assert p.gaussian_variance / p.impulsive_variance == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("a,g,s2", [
    (0.0, 0.1, 1.0), (-1.0, 0.1, 1.0), (0.1, 0.0, 1.0), (0.1, 0.1, 0.0),
    (math.nan, 0.1, 1.0), (0.1, math.inf, 1.0),
])
def test_degenerate_parameters_rejected(a, g, s2):
    with pytest.raises(ValueError):
        ClassAParams(a, g, s2)


def test_truncation_matches_poisson_cdf_oracle():
    # A = 0.1 at 1e-12 needs 8 terms; A = 1 at 0.5 needs 2 (e^-1 < 0.5)
    assert truncate_mixture(ClassAParams(0.1, 0.1), 1e-12).term_count == 8
    assert poisson_truncation_oracle(0.1, 1e-12) == 8
    # 0.5 exceeds the allowed tolerance range; check the oracle value it implies
    assert poisson_truncation_oracle(1.0, 0.5) == 2
    for a, tol in [(0.01, 1e-12), (0.5, 1e-9), (3.0, 1e-12), (20.0, 1e-10)]:
        trunc = truncate_mixture(ClassAParams(a, 0.1), tol)
        assert trunc.term_count == poisson_truncation_oracle(a, tol)


def test_truncation_grows_with_the_poisson_mean():
    trunc = truncate_mixture(ClassAParams(50.0, 0.1), 1e-12)
    assert trunc.term_count >= 50
    assert trunc.term_count <= 256


def test_truncation_weights_normalized_and_sigmas_increasing():
    trunc = truncate_mixture(ClassAParams(0.7, 0.3, 2.0), 1e-12)
    assert trunc.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(trunc.sigmas) > 0)
    # second moment reproduces the total variance up to the truncated tail,
    # whose contribution is amplified by the large tail-state variances
    assert np.dot(trunc.weights, trunc.sigmas ** 2) == pytest.approx(2.0, rel=1e-9)


def test_truncation_tolerance_range_enforced():
    with pytest.raises(ValueError):
        truncate_mixture(ClassAParams(0.1, 0.1), mass_tolerance=0.5)
    with pytest.raises(ValueError):
        truncate_mixture(ClassAParams(0.1, 0.1), mass_tolerance=0.0)


# ---------- density ----------

def test_pdf_is_even_and_positive():
    ch = ClassAChannel(ClassAParams(0.2, 0.5, 1.3))
    z = np.linspace(0.0, 20.0, 101)
    assert np.array_equal(ch.pdf(z), ch.pdf(-z))
    assert np.all(ch.pdf(z) > 0)


def test_pdf_integrates_to_one():
    ch = ClassAChannel(ClassAParams(0.2, 0.5, 1.3))
    span = 12.0 * ch.trunc.sigmas[-1]
    z = np.linspace(-span, span, 2_000_001)
    assert np.trapezoid(ch.pdf(z), z) == pytest.approx(1.0, abs=1e-6)


def test_pdf_matches_gaussian_in_the_awgn_limit():
    ch = ClassAChannel(AWGN_LIKE)
    z = np.linspace(-4 * math.sqrt(0.5), 4 * math.sqrt(0.5), 201)
    gauss = np.exp(-np.square(z) / (2 * 0.5)) / math.sqrt(2 * math.pi * 0.5)
    assert np.max(np.abs(ch.pdf(z) / gauss - 1.0)) < 1e-6


def test_pdf_matches_direct_mixture_oracle():
    ch = ClassAChannel(IMPULSIVE)
    z = np.linspace(-6.0, 6.0, 401)
    assert ch.pdf(z) == pytest.approx(mixture_pdf_oracle(IMPULSIVE, z), rel=1e-12)


def test_log_pdf_stable_where_direct_sum_underflows():
    # narrow background state alone would underflow near |z| ~ 40
    ch = ClassAChannel(IMPULSIVE)
    values = ch.log_pdf(np.array([-60.0, 60.0, 300.0]))
    assert np.all(np.isfinite(values))


# ---------- sampling ----------

def test_sample_moments():
    ch = ClassAChannel(IMPULSIVE)
    rng = np.random.default_rng(2024)
    draws = ch.sample(rng, 1_000_000)
    sigma = math.sqrt(0.5)
    assert abs(draws.mean()) < 4.0 * sigma / 1000.0
    assert draws.var() == pytest.approx(0.5, rel=0.02)


def test_sample_is_gaussian_in_the_awgn_limit():
    ch = ClassAChannel(AWGN_LIKE)
    rng = np.random.default_rng(7)
    draws = ch.sample(rng, 100_000)
    statistic = stats.kstest(draws, stats.norm(0.0, math.sqrt(0.5)).cdf).statistic
    assert statistic < 1.628 / math.sqrt(len(draws))  # 1% critical value


def test_sample_heavy_tails_for_rare_strong_impulses():
    params = ClassAParams(0.01, 0.01, 1.0)
    ch = ClassAChannel(params)
    trunc = ch.trunc
    analytic_excess = 3.0 * np.dot(trunc.weights, trunc.sigmas ** 4) - 3.0
    assert analytic_excess > 250.0
    rng = np.random.default_rng(11)
    draws = ch.sample(rng, 1_000_000)
    sample_excess = stats.kurtosis(draws, fisher=True)
    assert sample_excess > 50.0


def test_sample_deterministic_given_seed():
    ch = ClassAChannel(IMPULSIVE)
    a = ch.sample(np.random.default_rng(5), 1000)
    b = ch.sample(np.random.default_rng(5), 1000)
    assert np.array_equal(a, b)
    assert isinstance(ch.sample(np.random.default_rng(5)), float)


# ---------- theoretical BER ----------

def test_ber_reduces_to_awgn_erfc():
    ch = ClassAChannel(AWGN_LIKE)
    value = float(ch.theoretical_ber_bpsk(1.0))
    assert value == pytest.approx(0.5 * erfc_series(1.0), rel=1e-6)


def test_ber_bounded_and_strictly_decreasing():
    ch = ClassAChannel(IMPULSIVE)
    grid = db_to_linear(np.linspace(-20.0, 15.0, 50))
    values = ch.theoretical_ber_bpsk(grid)
    assert np.all(values > 0.0) and np.all(values < 0.5)
    assert np.all(np.diff(values) < 0.0)
    assert float(ch.theoretical_ber_bpsk(1e-9)) == pytest.approx(0.5, abs=1e-4)


def test_ber_rejects_nonpositive_ratio():
    ch = ClassAChannel(IMPULSIVE)
    with pytest.raises(ValueError):
        ch.theoretical_ber_bpsk(0.0)
    with pytest.raises(ValueError):
        ch.theoretical_ber_bpsk(-1.0)


def test_ber_matches_sliced_bpsk_simulation():
    # uncoded: sigma^2 = 1 / (2 Eb/N0); slice y = +-1 + noise at zero
    ebn0_db = 10.0
    ebn0 = float(db_to_linear(ebn0_db))
    params = ClassAParams(0.1, 0.1, 1.0 / (2.0 * ebn0))
    ch = ClassAChannel(params)
    predicted = float(ch.theoretical_ber_bpsk(ebn0))
    rng = np.random.default_rng(31)
    bits = 1_000_000
    errors = np.count_nonzero(1.0 + ch.sample(rng, bits) < 0.0)
    stderr = math.sqrt(predicted * (1.0 - predicted) / bits)
    assert abs(errors / bits - predicted) < 3.0 * stderr


# ---------- capacity ----------

def test_capacity_awgn_limit():
    ch = ClassAChannel(AWGN_LIKE)
    expected = math.log2(1.0 + 4.0 / 0.5)
    assert ch.capacity(4.0, 1.0) == pytest.approx(expected, rel=1e-6)


def test_capacity_vanishes_with_signal_power():
    # slope near zero is sum(w_m / sigma_m^2) / ln 2, about 29 bits/W here
    ch = ClassAChannel(IMPULSIVE)
    assert ch.capacity(1e-12, 1.0) < 1e-10
    with pytest.raises(ValueError):
        ch.capacity(0.0, 1.0)
    with pytest.raises(ValueError):
        ch.capacity(1.0, 0.0)


def test_capacity_against_wide_truncation_oracle():
    params = ClassAParams(0.1, 0.1, 1.0)
    ch = ClassAChannel(params)
    # independent summation over 1024 raw Poisson terms
    m = np.arange(1024)
    log_w = -0.1 + m * math.log(0.1) - np.array([math.lgamma(v + 1) for v in m])
    w = np.exp(log_w)
    sig2 = (m / 0.1 + 0.1) / 1.1
    oracle = float(np.dot(w, np.log2(1.0 + 10.0 / sig2)))
    assert ch.capacity(10.0, 1.0) == pytest.approx(oracle, rel=1e-9)


# ---------- LLRs ----------

def test_llr_zero_and_antisymmetric():
    ch = ClassAChannel(IMPULSIVE)
    assert ch.llr(0.0) == 0.0
    y = np.linspace(0.01, 30.0, 500)
    assert np.array_equal(ch.llr(-y), -ch.llr(y))


def test_llr_awgn_limit_is_two_y_over_sigma2():
    ch = ClassAChannel(AWGN_LIKE)
    y = np.linspace(-3.0, 3.0, 121)
    y = y[np.abs(y) > 1e-9]
    assert np.max(np.abs(ch.llr(y) / (2.0 * y / 0.5) - 1.0)) < 1e-6


def test_llr_matches_two_point_density_oracle():
    ch = ClassAChannel(IMPULSIVE)
    y = 0.5
    oracle = math.log(float(mixture_pdf_oracle(IMPULSIVE, y - 1.0))
                      / float(mixture_pdf_oracle(IMPULSIVE, y + 1.0)))
    assert ch.llr(y) == pytest.approx(oracle, abs=1e-10)


def test_llr_interpolator_tracks_the_exact_curve():
    ch = ClassAChannel(IMPULSIVE)
    demap = ch.llr_interpolator()
    rng = np.random.default_rng(3)
    y = rng.normal(0.0, 3.0, 20_000)
    assert np.max(np.abs(demap(y) - ch.llr(y))) < 1e-5
    # beyond the tabulated range the exact evaluation takes over
    far = np.array([-500.0, 500.0])
    assert demap(far) == pytest.approx(ch.llr(far), rel=1e-12)
    assert demap(0.25) == pytest.approx(float(ch.llr(0.25)), abs=1e-5)


# ---------- Eb/N0 mapping ----------

def test_ebn0_to_sigma2_applies_the_rate_factor():
    assert ebn0_to_sigma2(0.0, 1.0) == pytest.approx(0.5)
    assert ebn0_to_sigma2(0.0, 0.5) == pytest.approx(1.0)
    assert ebn0_to_sigma2(10.0, 0.5) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        ebn0_to_sigma2(0.0, 0.0)
    with pytest.raises(ValueError):
        ebn0_to_sigma2(math.nan, 0.5)
