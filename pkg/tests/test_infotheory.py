import numpy as np
import pytest

from llrquant.analytic_siso import conditional_transitions, siso_bpsk_llr
from llrquant.channel import LinkConfig
from llrquant.infotheory import (DiscreteChannel, LabeledLlrSamples, QuantizerSpec,
                                 RateSample, bin_counts, estimate_transitions,
                                 mutual_information, mutual_information_from_counts,
                                 mutual_information_stderr, outage_probability,
                                 required_snr, sweep_boundary_2bit,
                                 TargetUnreachableError)
from llrquant.link import collect_labeled_llrs
from llrquant.quant import design_boundaries_empirical
from llrquant.rng import substream


def h2(p):
    return -p * np.log2(p) - (1 - p) * np.log2(1 - p)


def samples_from(llr, bit):
    llr = np.asarray(llr, float)
    bit = np.asarray(bit, np.uint8)
    return LabeledLlrSamples(llr, bit, np.zeros(llr.size, np.int64))


def test_discrete_channel_validation():
    with pytest.raises(ValueError):
        DiscreteChannel(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        DiscreteChannel(np.array([[1.1, -0.1], [0.5, 0.5]]))


def test_estimate_transitions_separated():
    rng = substream(0, 0)
    n = 4000
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    llr = (2.0 * bits - 1.0) * rng.uniform(0.5, 3.0, n)
    dc = estimate_transitions(samples_from(llr, bits), np.array([0.0]))
    assert dc.p[0, 0] > 0.999 and dc.p[1, 1] > 0.999


def test_estimate_transitions_uninformative():
    rng = substream(0, 1)
    n = 200_000
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    llr = rng.standard_normal(n)
    dc = estimate_transitions(samples_from(llr, bits), np.array([-0.5, 0.0, 0.5]))
    assert np.max(np.abs(dc.p[0] - dc.p[1])) < 0.01


def test_estimate_transitions_needs_both_bits():
    with pytest.raises(ValueError):
        estimate_transitions(samples_from([1.0, 2.0], [1, 1]), np.array([0.0]))


def test_estimate_matches_conditional_gaussian():
    # fixed h: empirical transitions against the closed-form tail values
    sigma2, h = 0.6, 1.1
    gamma = h * h / sigma2
    boundaries = np.array([-2.0, 0.0, 2.0])
    rng = substream(1, 0)
    n = 1_000_000
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    w = rng.standard_normal(n) * np.sqrt(2 * sigma2)
    y = h * (2.0 * bits - 1.0) + w
    llr = siso_bpsk_llr(h, y, sigma2)
    dc = estimate_transitions(samples_from(llr, bits), boundaries)
    ref, _ = conditional_transitions(gamma, boundaries)
    for b in (0, 1):
        n_b = np.count_nonzero(bits == b)
        se = np.sqrt(ref.p[b] * (1 - ref.p[b]) / n_b)
        assert np.all(np.abs(dc.p[b] - ref.p[b]) < 3 * se + 1e-4)


def test_mutual_information_values():
    assert mutual_information(DiscreteChannel(np.array([[0.3, 0.7], [0.3, 0.7]]))) == 0.0
    bsc = DiscreteChannel(np.array([[0.9, 0.1], [0.1, 0.9]]))
    assert mutual_information(bsc) == pytest.approx(1 - h2(0.1), abs=1e-12)
    assert mutual_information(bsc) == pytest.approx(0.53100, abs=5e-6)
    ident = DiscreteChannel(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert mutual_information(ident) == pytest.approx(1.0)


def test_mutual_information_bounds_and_permutation():
    rng = substream(2, 0)
    for _ in range(50):
        k = int(rng.integers(2, 9))
        p = rng.dirichlet(np.ones(k), size=2)
        dc = DiscreteChannel(p)
        i = mutual_information(dc)
        assert -1e-12 <= i <= 1.0
        perm = rng.permutation(k)
        assert mutual_information(DiscreteChannel(p[:, perm])) == pytest.approx(i, abs=1e-12)


def test_merging_bins_never_increases_information():
    rng = substream(2, 1)
    for _ in range(50):
        k = int(rng.integers(3, 9))
        p = rng.dirichlet(np.ones(k), size=2)
        i_full = mutual_information(DiscreteChannel(p))
        j = int(rng.integers(0, k - 1))
        merged = np.delete(p, j, axis=1)
        merged[:, j] = p[:, j] + p[:, j + 1]
        i_merged = mutual_information(DiscreteChannel(merged))
        assert i_merged <= i_full + 1e-12


def test_pooled_equals_position_mixture():
    link = LinkConfig(2, 2, 0.5, "qam16_gray")
    s = collect_labeled_llrs(link, 30_000, seed=9, stage=1)
    b = design_boundaries_empirical(s.llr, 4)
    pooled = bin_counts(s.llr, s.bit, b)
    mixed = np.zeros_like(pooled)
    for l in range(link.bits_per_use):
        sel = s.position == l
        mixed += bin_counts(s.llr[sel], s.bit[sel], b)
    assert np.array_equal(pooled, mixed)


def test_data_processing_quantization():
    # I(c; d) cannot exceed I(c; LLR) beyond Monte-Carlo noise
    link = LinkConfig(1, 1, 0.4, "bpsk")
    s = collect_labeled_llrs(link, 400_000, seed=3, stage=1)
    fine = design_boundaries_empirical(s.llr, 2048)
    coarse = design_boundaries_empirical(s.llr, 4)
    c_fine = bin_counts(s.llr, s.bit, fine)
    c_coarse = bin_counts(s.llr, s.bit, coarse)
    i_fine = mutual_information_from_counts(c_fine, bias_correction=True)
    i_coarse = mutual_information_from_counts(c_coarse)
    se = mutual_information_stderr(c_coarse)
    assert i_coarse <= i_fine + 2 * se


def test_outage_probability_stats():
    rates = [RateSample(0.1 * i, i) for i in range(1, 11)]
    p, (lo, hi) = outage_probability(rates, 1.0)
    assert p == 1.0 and hi == 1.0
    p, (lo, hi) = outage_probability(rates, 0.05)
    assert p == 0.0 and lo == 0.0
    p, (lo, hi) = outage_probability(rates, 0.5)
    assert p == 0.5 and lo < 0.5 < hi
    with pytest.raises(ValueError):
        outage_probability([], 0.5)


def test_required_snr_trivial_and_monotone():
    link = LinkConfig(1, 1, 1.0, "bpsk")
    spec = QuantizerSpec("equiprobable", q=2)
    kw = dict(seed=11, n_calibration=40_000, n_evaluation=40_000, tol_db=0.1)
    assert required_snr(0.0, link, spec, (-5.0, 15.0), **kw) == -5.0
    s_low = required_snr(0.3, link, spec, (-5.0, 18.0), **kw)
    s_high = required_snr(0.55, link, spec, (-5.0, 18.0), **kw)
    assert s_low < s_high
    with pytest.raises(TargetUnreachableError):
        required_snr(0.95, link, spec, (-5.0, 10.0), **kw)


def test_sweep_single_point():
    link = LinkConfig(1, 1, 1.0, "bpsk")
    rows = sweep_boundary_2bit([2.0], link, 0.4, (-5.0, 15.0), seed=12,
                               n_calibration=40_000, n_evaluation=40_000)
    assert len(rows) == 2
    assert rows[0].is_grid_min and not rows[0].is_proposed
    assert rows[1].is_proposed and rows[1].i3 > 0
