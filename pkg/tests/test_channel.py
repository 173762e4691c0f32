import numpy as np
import pytest

from llrquant.channel import (LinkConfig, apply_channel, apply_channel_block,
                              draw_channel, draw_channel_block,
                              siso_bpsk_observation, sigma2_from_snr_db)
from llrquant.rng import substream


def test_linkconfig_validation():
    with pytest.raises(ValueError):
        LinkConfig(0, 1, 1.0, "bpsk")
    with pytest.raises(ValueError):
        LinkConfig(1, 1, 0.0, "bpsk")
    with pytest.raises(ValueError):
        LinkConfig(1, 1, 1.0, "bpsk", fading="sometimes")


def test_snr_convention():
    # SNR = Mt/sigma2: for SISO BPSK 0 dB means sigma2 = 1
    assert sigma2_from_snr_db(0.0, 1) == pytest.approx(1.0)
    assert sigma2_from_snr_db(10.0, 2) == pytest.approx(0.2)


def test_unit_variance_entries():
    cfg = LinkConfig(1, 1, 1.0, "bpsk")
    h = draw_channel_block(cfg, 1_000_000, substream(0, 1))
    power = np.abs(h) ** 2
    # E|h|^2 = 1, Var(|h|^2) = 1 for CN(0,1): 3 standard errors
    assert abs(power.mean() - 1.0) < 3.0 / np.sqrt(power.size)


def test_entries_uncorrelated():
    cfg = LinkConfig(2, 2, 1.0, "qpsk_gray")
    h = draw_channel_block(cfg, 1_000_000, substream(0, 2)).reshape(-1, 4)
    for i in range(4):
        for j in range(i + 1, 4):
            c = np.corrcoef(h[:, i].real, h[:, j].real)[0, 1]
            assert abs(c) < 0.01


def test_same_seed_identical():
    cfg = LinkConfig(2, 2, 0.5, "qam16_gray")
    a = draw_channel(cfg, substream(7, 1, 2))
    b = draw_channel(cfg, substream(7, 1, 2))
    assert np.array_equal(a, b)
    c = draw_channel(cfg, substream(7, 1, 3))
    assert not np.array_equal(a, c)


def test_noiseless_limit():
    cfg = LinkConfig(2, 2, 1.0, "qam16_gray")
    H = draw_channel(cfg, substream(1, 1))
    x = np.array([1 + 1j, -1 + 0j]) / np.sqrt(2)
    y = apply_channel(H, x, 1e-12, substream(1, 2))
    assert np.max(np.abs(y - H @ x)) < 1e-4


def test_noise_variance():
    sigma2 = 0.8
    H = np.eye(2, dtype=complex)
    x = np.zeros(2, dtype=complex)
    y = apply_channel_block(H, np.tile(x, (500_000, 1)), sigma2, substream(2, 1))
    # per complex component variance sigma2, per real dimension sigma2/2
    assert abs(np.mean(np.abs(y) ** 2) - sigma2) < 0.01 * sigma2
    assert abs(np.var(y.real) - sigma2 / 2) < 0.01 * sigma2
    assert abs(np.var(y.imag) - sigma2 / 2) < 0.01 * sigma2


def test_noise_independent_of_channel():
    cfg = LinkConfig(1, 1, 1.0, "bpsk")
    rng = substream(3, 1)
    H = draw_channel_block(cfg, 400_000, rng)[:, 0, 0]
    x = np.ones((400_000, 1), dtype=complex)
    y = apply_channel_block(H[:, None, None], x, 1.0, rng)[:, 0]
    w = y - H
    c = np.corrcoef(np.abs(H), np.abs(w))[0, 1]
    assert abs(c) < 3.0 / np.sqrt(H.size)


def test_dimension_mismatch():
    H = np.eye(2, dtype=complex)
    with pytest.raises(ValueError):
        apply_channel(H, np.zeros(3, dtype=complex), 1.0, substream(0, 0))


def test_siso_real_model():
    # y = h*x + w with Var(w) = 2*sigma2, making h*y/sigma2 the exact LLR
    sigma2 = 0.4
    bits = np.zeros(800_000, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, substream(4, 1))
    w = y + h  # x = -1
    assert abs(np.var(h) - 1.0) < 0.01
    assert abs(np.var(w) - 2.0 * sigma2) < 0.01
