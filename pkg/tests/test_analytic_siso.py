import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc

from llrquant.analytic_siso import (SisoLlrDensity, conditional_transitions,
                                    conditional_transitions_block,
                                    ergodic_capacity_semianalytic, gaussian_q,
                                    outage_probability_siso,
                                    quadratic_form_eigenvalues, siso_bpsk_llr,
                                    snr_for_rate, soft_rate_given_gamma)
from llrquant.channel import siso_bpsk_observation
from llrquant.infotheory import (bin_counts, mutual_information,
                                 mutual_information_from_counts,
                                 mutual_information_stderr)
from llrquant.quant import design_boundaries_empirical
from llrquant.rng import substream

SIGMA2S = (0.1, 0.5, 2.0)


def test_eigenvalue_identities():
    for s2 in SIGMA2S:
        e1, e2 = quadratic_form_eigenvalues(s2)
        assert e1 + e2 == pytest.approx(1.0, abs=1e-14)
        assert e1 * e2 == pytest.approx(-s2 / 2.0, abs=1e-14)


def test_llr_direct_substitution():
    assert siso_bpsk_llr(1.0, 1.0, 1.0) == 1.0
    assert siso_bpsk_llr(0.0, 3.7, 0.5) == 0.0


def test_conditional_moments():
    # fixing h, LLR given c=1 is N(gamma, 2*gamma) with gamma = h^2/sigma2
    sigma2, h = 0.8, 1.3
    gamma = h * h / sigma2
    rng = substream(0, 0)
    bits = np.ones(1_000_000, dtype=np.uint8)
    w = rng.standard_normal(bits.size) * np.sqrt(2.0 * sigma2)
    y = h * 1.0 + w
    lam = siso_bpsk_llr(h, y, sigma2)
    assert abs(lam.mean() - gamma) < 0.01 * gamma
    assert abs(lam.var() - 2 * gamma) < 0.01 * 2 * gamma


@pytest.mark.parametrize("sigma2", SIGMA2S)
def test_density_normalization(sigma2):
    d = SisoLlrDensity(sigma2)
    neg, _ = quad(d.density, -np.inf, 0, limit=400)
    pos, _ = quad(d.density, 0, np.inf, limit=400)
    assert abs(neg + pos - 1.0) < 1e-8
    assert abs(d.total_mass - 1.0) < 1e-10


def test_density_exponential_tilt_is_even():
    d = SisoLlrDensity(0.7)
    xs = np.array([0.3, 1.1, 2.9, 7.0])
    left = d.density(-xs) * np.exp(xs / 2)
    right = d.density(xs) * np.exp(-xs / 2)
    assert np.allclose(left, right, rtol=1e-12)


def test_density_singular_at_zero():
    d = SisoLlrDensity(1.0)
    with pytest.raises(ValueError):
        d.density(0.0)


def test_density_matches_histogram():
    sigma2 = 0.5
    d = SisoLlrDensity(sigma2)
    rng = substream(1, 0)
    bits = np.ones(1_000_000, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, rng)
    lam = siso_bpsk_llr(h, y, sigma2)
    edges = np.quantile(lam, np.linspace(0.005, 0.995, 41))
    counts, _ = np.histogram(lam, bins=edges)
    emp = counts / lam.size
    cdf = d.cdf_conditional(edges)
    th = np.diff(cdf)
    assert np.sum(np.abs(emp - th / th.sum() * emp.sum())) < 0.01


def test_cdf_basics():
    d = SisoLlrDensity(0.9)
    assert d.cdf(0.0) == 0.5
    assert d.inverse_cdf(0.5) == 0.0
    for x in np.arange(-5.0, 5.5, 1.0):
        assert abs(d.inverse_cdf(d.cdf(x)) - x) < 1e-6
    with pytest.raises(ValueError):
        d.inverse_cdf(0.0)
    with pytest.raises(ValueError):
        d.inverse_cdf(1.0)


def test_cdf_derivative_matches_density():
    d = SisoLlrDensity(0.6)
    h = 1e-5
    for x in (-2.3, -0.4, 0.8, 3.1):
        num = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h)
        assert abs(num - d.density_unconditional(x)) < 1e-6


def test_boundaries_match_monte_carlo_quantiles():
    sigma2 = 0.5
    d = SisoLlrDensity(sigma2)
    rng = substream(2, 0)
    bits = rng.integers(0, 2, size=1_000_000, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, rng)
    lam = siso_bpsk_llr(h, y, sigma2)
    mc = design_boundaries_empirical(lam, 8)
    ana = d.boundaries(8)
    assert np.all(np.abs(mc - ana) < 0.02)


def test_gaussian_tail_example():
    # gamma=1, bit 1, bin [0, inf): Q(-1/sqrt(2))
    dc, degenerate = conditional_transitions(1.0, np.array([0.0]))
    expected = 0.5 * erfc(-0.5)  # Q(-1/sqrt 2) via erfc oracle
    assert not degenerate
    assert dc.p[1, 1] == pytest.approx(expected, abs=1e-12)
    assert dc.p[1, 1] == pytest.approx(0.76025, abs=5e-6)


def test_conditional_rows_sum_to_one():
    b = SisoLlrDensity(0.4).boundaries(8)
    p = conditional_transitions_block(np.array([0.3, 1.0, 4.7, 22.0]), b)
    assert np.max(np.abs(p.sum(axis=2) - 1.0)) < 1e-12


def test_conditional_symmetry():
    b = SisoLlrDensity(1.1).boundaries(4)
    dc, _ = conditional_transitions(2.2, b)
    assert np.allclose(dc.p[0], dc.p[1, ::-1], atol=1e-12)


def test_high_snr_concentrates_top_bin():
    b = SisoLlrDensity(1.0).boundaries(4)
    dc, _ = conditional_transitions(1e4, b)
    assert dc.p[1, -1] > 0.999999


def test_gamma_zero_degenerate():
    dc, degenerate = conditional_transitions(0.0, np.array([-1.0, 0.0, 1.0]))
    assert degenerate
    # mass lands in the bin containing 0 (upper side of the 0 boundary)
    assert dc.p[0, 2] == 1.0 and dc.p[1, 2] == 1.0


def test_capacity_limits():
    # fading keeps the high-SNR deficit O(sigma), so the saturation check
    # needs a very small noise variance
    assert ergodic_capacity_semianalytic(1e4, None) < 1e-3
    assert ergodic_capacity_semianalytic(1e-8, None) > 1 - 1e-3


def test_capacity_monotone_in_k():
    for s2 in SIGMA2S:
        vals = [ergodic_capacity_semianalytic(s2, k) for k in (2, 4, 8, 16)]
        vals.append(ergodic_capacity_semianalytic(s2, None))
        assert np.all(np.diff(vals) > -1e-12)


def test_soft_rate_against_known_capacity():
    # binary-input AWGN capacity is 1/2 at Es/N0 = -2.82 dB, i.e. at an
    # LLR mean of 4*Es/N0; same check at the rate-3/4 point
    gamma_half = 4.0 * 10 ** (-2.82 / 10)
    assert abs(soft_rate_given_gamma(np.array([gamma_half]))[0] - 0.5) < 2e-3
    gamma_34 = 4.0 * 10 ** ((1.626 - 10 * np.log10(4.0 / 3.0)) / 10)
    assert abs(soft_rate_given_gamma(np.array([gamma_34]))[0] - 0.75) < 2e-3


def test_semianalytic_matches_monte_carlo():
    sigma2 = 0.35
    rng = substream(3, 0)
    bits = rng.integers(0, 2, size=800_000, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, rng)
    lam = siso_bpsk_llr(h, y, sigma2)
    for k in (2, 4, 8):
        b = design_boundaries_empirical(lam[:400_000], k)
        counts = bin_counts(lam[400_000:], bits[400_000:], b)
        i_mc = mutual_information_from_counts(counts)
        se = mutual_information_stderr(counts)
        i_an = ergodic_capacity_semianalytic(sigma2, k)
        assert abs(i_mc - i_an) < 2 * se + 1e-4


def test_snr_for_rate_monotone_in_rate():
    s1 = snr_for_rate(0.3, 4)
    s2 = snr_for_rate(0.6, 4)
    assert s1 < s2


def test_outage_trivial_cases():
    rng = substream(4, 0)
    assert outage_probability_siso(0.5, 2, 0.0, 2000, rng) == 0.0
    rng = substream(4, 1)
    assert outage_probability_siso(0.5, None, 1.0, 2000, rng) == 1.0


def test_outage_matches_threshold_form():
    # rate is monotone in gamma, so p_out equals Pr{h^2 <= sigma2*gamma*}
    sigma2 = 10 ** (-2.0)
    h = substream(5, 0).standard_normal(200_000)
    from llrquant.analytic_siso import outage_rates_siso

    rates = outage_rates_siso(sigma2, 2, h)
    p = np.mean(rates <= 0.25)
    # invert the hard-decision rate threshold: 1 - H2(Q(sqrt(g/2))) = 1/4
    from scipy.optimize import brentq

    def hard_rate(g):
        pe = float(gaussian_q(np.sqrt(g / 2.0)))
        return 1 + pe * np.log2(pe) + (1 - pe) * np.log2(1 - pe)

    gstar = brentq(lambda g: hard_rate(g) - 0.25, 1e-3, 50)
    p_exact = np.mean(h ** 2 <= gstar * sigma2)
    assert abs(p - p_exact) < 1e-12
