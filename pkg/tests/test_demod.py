import numpy as np
import pytest
from scipy.stats import ks_2samp

from llrquant.analytic_siso import siso_bpsk_llr
from llrquant.channel import LinkConfig, draw_channel_block, siso_bpsk_observation
from llrquant.demod import (candidate_table, maxlog_llr, maxlog_llr_block,
                            siso_bpsk_maxlog, _bit_min_diff_numpy, _min_diffs)
from llrquant.modem import build_constellation
from llrquant.rng import substream


def brute_force_llrs(y, H, sigma2, table):
    """Independent oracle: naive distance enumeration over all candidates."""
    d = np.array([np.sum(np.abs(y - H @ xv) ** 2) for xv in table.vectors])
    bits = table.bits_of(np.arange(table.n_candidates))
    out = np.empty(table.n_bits)
    for l in range(table.n_bits):
        out[l] = (d[bits[:, l] == 0].min() - d[bits[:, l] == 1].min()) / sigma2
    return out


def test_real_fast_path_matches_analytic_op():
    rng = substream(0, 0)
    h = rng.standard_normal(1000)
    y = rng.standard_normal(1000) * 2.0
    for sigma2 in (0.1, 1.0, 7.5):
        a = siso_bpsk_maxlog(y, h, sigma2)
        b = siso_bpsk_llr(h, y, sigma2)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_zero_noise_sign_agreement():
    for name, mt in (("bpsk", 1), ("qpsk_gray", 1), ("qam16_gray", 2)):
        table = candidate_table(name, mt)
        rng = substream(1, hash(name) % 1000)
        cfg = LinkConfig(mt, 2, 1.0, name)
        H = draw_channel_block(cfg, 64, rng)
        idx = rng.integers(0, table.n_candidates, 64)
        y = np.einsum("nrt,nt->nr", H, table.vectors[idx])
        llr = maxlog_llr_block(y, H, 0.5, table)
        bits = table.bits_of(idx)
        assert np.all((llr > 0) == (bits == 1))


def test_matches_brute_force_2x2_qam16():
    table = candidate_table("qam16_gray", 2)
    c = build_constellation("qam16_gray")
    rng = substream(2, 0)
    for trial in range(20):
        H = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
        y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        sigma2 = float(rng.uniform(0.05, 2.0))
        got = maxlog_llr(y, H, sigma2, c, 2)
        ref = brute_force_llrs(y, H, sigma2, table)
        assert np.allclose(got, ref, rtol=1e-10, atol=1e-10)


def test_numpy_fallback_matches_kernel():
    rng = substream(3, 0)
    d = rng.standard_normal((128, 256))
    assert np.array_equal(_min_diffs(d, 8), _bit_min_diff_numpy(d, 8))


def test_antipodal_symmetry():
    table = candidate_table("bpsk", 1)
    rng = substream(4, 0)
    H = (rng.standard_normal((100, 1, 1)) + 1j * rng.standard_normal((100, 1, 1)))
    y = rng.standard_normal((100, 1)) + 1j * rng.standard_normal((100, 1))
    a = maxlog_llr_block(y, H, 0.7, table)
    b = maxlog_llr_block(-y, H, 0.7, table)
    assert np.allclose(a, -b, atol=1e-10)


def test_noise_scaling():
    table = candidate_table("qam16_gray", 2)
    rng = substream(5, 0)
    H = (rng.standard_normal((50, 2, 2)) + 1j * rng.standard_normal((50, 2, 2)))
    y = rng.standard_normal((50, 2)) + 1j * rng.standard_normal((50, 2))
    alpha = 3.7
    a = maxlog_llr_block(y, H, 1.0, table)
    b = maxlog_llr_block(y, H, alpha, table)
    assert np.allclose(a, alpha * b, rtol=1e-12)


def test_conditional_density_symmetry():
    # with uniform bits, f(xi | c=1) should mirror f(-xi | c=0)
    sigma2 = 0.5
    rng = substream(6, 0)
    bits = rng.integers(0, 2, size=1_000_000, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, rng)
    llr = siso_bpsk_llr(h, y, sigma2)
    stat = ks_2samp(llr[bits == 1], -llr[bits == 0]).statistic
    assert stat < 0.01


def test_dimension_mismatch():
    c = build_constellation("qam16_gray")
    with pytest.raises(ValueError):
        maxlog_llr(np.zeros(2, complex), np.zeros((2, 2), complex), 1.0, c, 1)
    with pytest.raises(ValueError):
        maxlog_llr(np.zeros(2, complex), np.zeros((2, 2), complex), -1.0, c, 2)
