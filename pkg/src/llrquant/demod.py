"""Max-log LLR computation by exhaustive candidate enumeration.

For a received vector y the demodulator returns, for every one of the
R0 = m*Mt code bits,

    LLR_l = (1/sigma2) * [ min_{x: bit l = 0} ||y - Hx||^2
                           - min_{x: bit l = 1} ||y - Hx||^2 ],

so positive values favor bit 1 (log p1/p0 orientation). All M^Mt
candidate vectors are enumerated; the per-candidate distance table is
shared by all bit positions. Batch paths expand the squared distance as
q(x) - 2 Re(z^H x) with z = H^H y, which drops the candidate-independent
||y||^2 term and turns the batch into one small matrix product plus a
bit-indexed min reduction (numba kernel with a numpy fallback).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .modem import Constellation, build_constellation

try:  # pragma: no cover - exercised implicitly everywhere
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


@dataclass(frozen=True)
class CandidateTable:
    """All M^Mt transmit vectors for one constellation, label-ordered.

    Candidate c carries the R0 bits of c's binary expansion, MSB first;
    layer k owns bits k*m .. (k+1)*m - 1. With that ordering the per-bit
    candidate subsets are the regular subdivisions used by the min kernel.

    ``features`` holds per-candidate monomials (|x_t|^2, cross terms,
    real/imaginary parts) so that the distance table of a batch becomes
    a single real matrix product against per-use coefficients.
    """

    constellation: Constellation
    mt: int
    vectors: np.ndarray  # (C, mt) complex
    features: np.ndarray = None  # (C, F) float

    def __post_init__(self):
        X = self.vectors
        mt = self.mt
        cols = [np.abs(X[:, t]) ** 2 for t in range(mt)]
        for t in range(mt):
            for u in range(t + 1, mt):
                cross = np.conj(X[:, t]) * X[:, u]
                cols += [cross.real, cross.imag]
        for t in range(mt):
            cols += [X[:, t].real, X[:, t].imag]
        object.__setattr__(self, "features", np.column_stack(cols))

    @property
    def n_bits(self) -> int:
        return self.mt * self.constellation.bits_per_symbol

    @property
    def n_candidates(self) -> int:
        return self.vectors.shape[0]

    def bits_of(self, idx: np.ndarray) -> np.ndarray:
        """Code bits (MSB first) of candidate indices; shape (..., R0)."""
        idx = np.asarray(idx)
        shifts = np.arange(self.n_bits - 1, -1, -1)
        return ((idx[..., None] >> shifts) & 1).astype(np.uint8)

    def index_of_bits(self, bits: np.ndarray) -> np.ndarray:
        """Inverse of bits_of for (..., R0) bit arrays."""
        bits = np.asarray(bits, dtype=np.int64)
        weights = 1 << np.arange(self.n_bits - 1, -1, -1)
        return bits @ weights


@lru_cache(maxsize=None)
def candidate_table(constellation_name: str, mt: int) -> CandidateTable:
    c = build_constellation(constellation_name)
    m = c.bits_per_symbol
    r0 = m * mt
    n_cand = 1 << r0
    idx = np.arange(n_cand)
    vectors = np.empty((n_cand, mt), dtype=complex)
    for k in range(mt):
        lab = (idx >> ((mt - 1 - k) * m)) & ((1 << m) - 1)
        vectors[:, k] = c.point_by_label[lab]
    return CandidateTable(c, mt, vectors)


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _bit_min_diff_fused(dist, r0, out):
        # out[i, 2l+b] = min distance among candidates with bit l equal b
        n, nc = dist.shape
        for i in prange(n):
            for l in range(r0):
                out[i, 2 * l] = np.inf
                out[i, 2 * l + 1] = np.inf
            for c in range(nc):
                v = dist[i, c]
                for l in range(r0):
                    b = (c >> (r0 - 1 - l)) & 1
                    if v < out[i, 2 * l + b]:
                        out[i, 2 * l + b] = v
        return out


def _bit_min_diff_numpy(dist: np.ndarray, r0: int) -> np.ndarray:
    n = dist.shape[0]
    out = np.empty((n, r0), dtype=dist.dtype)
    folded = dist
    for l in range(r0):
        v = folded.reshape(n, 2, -1)
        mins = v[:, :, 0] if v.shape[2] == 1 else v.min(axis=2)
        out[:, l] = mins[:, 0] - mins[:, 1]
        folded = v.min(axis=1)
    return out


def _min_diffs(dist: np.ndarray, r0: int) -> np.ndarray:
    """Per-bit (min over bit=0) - (min over bit=1) of a distance table."""
    if HAVE_NUMBA:
        out = np.empty((dist.shape[0], 2 * r0), dtype=np.float64)
        _bit_min_diff_fused(dist, r0, out)
        return out[:, 0::2] - out[:, 1::2]
    return _bit_min_diff_numpy(dist, r0)


def _coefficients(Z: np.ndarray, B: np.ndarray, mt: int) -> np.ndarray:
    """Per-use coefficients matching CandidateTable.features column order."""
    n = Z.shape[0]
    cols = [np.broadcast_to(B[..., t, t].real, (n,)) for t in range(mt)]
    for t in range(mt):
        for u in range(t + 1, mt):
            cols += [np.broadcast_to(2.0 * B[..., t, u].real, (n,)),
                     np.broadcast_to(-2.0 * B[..., t, u].imag, (n,))]
    for t in range(mt):
        cols += [-2.0 * Z[:, t].real, -2.0 * Z[:, t].imag]
    return np.column_stack(cols)


def _distance_table(Y: np.ndarray, H: np.ndarray, table: CandidateTable) -> np.ndarray:
    """||y - Hx||^2 up to a per-use constant, for every candidate x.

    Expands ||y - Hx||^2 = ||y||^2 - 2 Re(z^H x) + x^H B x with z = H^H y
    and B = H^H H, drops the candidate-independent ||y||^2, and evaluates
    the rest as (per-use coefficients) @ (per-candidate monomials)^T.
    """
    if H.ndim == 2:
        Z = Y @ np.conj(H)
        B = np.conj(H.T) @ H
    else:
        Z = np.einsum("nrt,nr->nt", np.conj(H), Y)
        B = np.einsum("nrt,nru->ntu", np.conj(H), H)
    coef = _coefficients(Z, B, table.mt)
    return coef @ table.features.T


def maxlog_llr(y, H, sigma2: float, constellation: Constellation, mt: int) -> np.ndarray:
    """Max-log LLRs of all R0 code bits for one received vector."""
    y = np.asarray(y, dtype=complex).ravel()
    H = np.asarray(H, dtype=complex)
    if H.shape != (y.size, mt):
        raise ValueError("dimension mismatch between y, H and mt")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    table = candidate_table(constellation.name, mt)
    dist = _distance_table(y[None, :], H, table)
    return (_min_diffs(dist, table.n_bits) / sigma2)[0]


def maxlog_llr_block(Y: np.ndarray, H: np.ndarray, sigma2: float,
                     table: CandidateTable, chunk: int = 8192) -> np.ndarray:
    """Batch max-log demodulation.

    ``Y`` is (n, Mr); ``H`` is (n, Mr, Mt) for fast fading or (Mr, Mt)
    for a channel held fixed over the batch. Returns (n, R0) LLRs.
    """
    n = Y.shape[0]
    r0 = table.n_bits
    out = np.empty((n, r0))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        Hc = H if H.ndim == 2 else H[lo:hi]
        dist = _distance_table(Y[lo:hi], Hc, table)
        out[lo:hi] = _min_diffs(dist, r0) / sigma2
    return out


def siso_bpsk_maxlog(y, h, sigma2: float):
    """Max-log LLR for the real-valued SISO/BPSK model.

    Evaluates the two-candidate distance difference with the matched
    1/(4*sigma2) scale of the real model (noise variance 2*sigma2), which
    equals h*y/sigma2 up to rounding.
    """
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    return ((y + h) ** 2 - (y - h) ** 2) / (4.0 * sigma2)
