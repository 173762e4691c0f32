"""Flat Rayleigh MIMO channel and system configuration.

SNR convention: SNR = Mt * Es / sigma2 with unit average symbol energy,
i.e. average received signal power per receive antenna over noise power.
For SISO BPSK this reduces to 1/sigma2. All dB values in the package use
this convention.

The SISO/BPSK simulations run on a real-valued fast path y = h*x + w with
h ~ N(0,1) and w ~ N(0, 2*sigma2). With that noise variance the
demodulator output h*y/sigma2 is the exact log-likelihood ratio and obeys
LLR | h, x ~ N(x*gamma, 2*gamma) with gamma = h^2/sigma2, which is the
normalization the closed-form analysis in `analytic_siso` is built on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .modem import Constellation, build_constellation


@dataclass(frozen=True)
class LinkConfig:
    """Antenna counts, noise variance and constellation of one link."""

    mt: int
    mr: int
    sigma2: float
    constellation: str
    fading: str = "ergodic"  # or "quasi_static"

    def __post_init__(self):
        if self.mt < 1 or self.mr < 1:
            raise ValueError("antenna counts must be >= 1")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.fading not in ("ergodic", "quasi_static"):
            raise ValueError(f"unknown fading regime {self.fading!r}")

    @property
    def is_siso_bpsk(self) -> bool:
        return self.mt == 1 and self.mr == 1 and self.constellation == "bpsk"

    def get_constellation(self) -> Constellation:
        return build_constellation(self.constellation)

    @property
    def bits_per_use(self) -> int:
        return self.mt * self.get_constellation().bits_per_symbol

    def with_snr_db(self, snr_db: float) -> "LinkConfig":
        return replace(self, sigma2=sigma2_from_snr_db(snr_db, self.mt))


def sigma2_from_snr_db(snr_db: float, mt: int) -> float:
    return mt / (10.0 ** (snr_db / 10.0))


def snr_db_from_sigma2(sigma2: float, mt: int) -> float:
    return 10.0 * np.log10(mt / sigma2)


def draw_channel(cfg: LinkConfig, rng: np.random.Generator) -> np.ndarray:
    """One Mr x Mt matrix of i.i.d. CN(0,1) gains."""
    shape = (cfg.mr, cfg.mt)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel_block(cfg: LinkConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. channel matrices, shape (n, Mr, Mt)."""
    shape = (n, cfg.mr, cfg.mt)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def apply_channel(H: np.ndarray, x: np.ndarray, sigma2: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Return H @ x + w with w ~ CN(0, sigma2 * I)."""
    H = np.asarray(H)
    x = np.asarray(x)
    if H.ndim != 2 or x.shape != (H.shape[1],):
        raise ValueError("dimension mismatch between H and x")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    mr = H.shape[0]
    w = (rng.standard_normal(mr) + 1j * rng.standard_normal(mr)) * np.sqrt(sigma2 / 2.0)
    return H @ x + w


def apply_channel_block(H: np.ndarray, x: np.ndarray, sigma2: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Vectorized apply_channel.

    ``H`` is (n, Mr, Mt) or a single (Mr, Mt) matrix shared by all n uses;
    ``x`` is (n, Mt). Returns (n, Mr).
    """
    x = np.asarray(x)
    n, mt = x.shape
    H = np.asarray(H)
    if H.ndim == 2:
        hx = x @ H.T
        mr = H.shape[0]
    else:
        hx = np.einsum("nrt,nt->nr", H, x)
        mr = H.shape[1]
    w = (rng.standard_normal((n, mr)) + 1j * rng.standard_normal((n, mr))) * np.sqrt(sigma2 / 2.0)
    return hx + w


def siso_bpsk_observation(bits: np.ndarray, sigma2: float,
                          rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Real-valued SISO/BPSK fast path; returns (h, y) for x = 2*bits - 1.

    Noise is N(0, 2*sigma2) so that h*y/sigma2 is the exact LLR (see the
    module docstring for the normalization).
    """
    bits = np.asarray(bits)
    n = bits.size
    h = rng.standard_normal(n)
    w = rng.standard_normal(n) * np.sqrt(2.0 * sigma2)
    x = 2.0 * bits - 1.0
    return h, h * x + w
