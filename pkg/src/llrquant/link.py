"""Labeled LLR sample generation: channel, mapping and demodulation in one pass.

Capacity and outage experiments need (LLR, code bit) pairs pooled over
all R0 bit positions. Code bits are uniform (the scrambler guarantees
that in the coded chain), so samples are generated directly from uniform
bits. Work is split into fixed-size chunks addressed by (seed, stage,
chunk index), which makes results independent of worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import rng as rngmod
from .channel import LinkConfig, siso_bpsk_observation
from .demod import candidate_table, maxlog_llr_block
from .infotheory import LabeledLlrSamples

CHUNK = 16384


def _siso_chunk(sigma2: float, n: int, rng: np.random.Generator):
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    h, y = siso_bpsk_observation(bits, sigma2, rng)
    return h * y / sigma2, bits


def _mimo_chunk(link: LinkConfig, n: int, rng: np.random.Generator,
                H_fixed: np.ndarray | None = None):
    table = candidate_table(link.constellation, link.mt)
    idx = rng.integers(0, table.n_candidates, size=n)
    x = table.vectors[idx]
    if H_fixed is None:
        shape = (n, link.mr, link.mt)
        H = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    else:
        H = H_fixed
    w = (rng.standard_normal((n, link.mr)) + 1j * rng.standard_normal((n, link.mr)))
    y = (x @ H.T if H_fixed is not None else np.einsum("nrt,nt->nr", H, x))
    y = y + w * np.sqrt(link.sigma2 / 2.0)
    llr = maxlog_llr_block(y, H, link.sigma2, table)
    bits = table.bits_of(idx)
    return llr.ravel(), bits.ravel()


def _collect_chunk(args):
    link, n, seed, stage, chunk_id = args
    rng = rngmod.substream(seed, stage, chunk_id)
    if link.is_siso_bpsk:
        llr, bits = _siso_chunk(link.sigma2, n, rng)
        return llr, bits
    return _mimo_chunk(link, n, rng)


def collect_labeled_llrs(link: LinkConfig, n_uses: int, seed: int, stage: int,
                         threads: int = 1) -> LabeledLlrSamples:
    """(LLR, bit, position) samples from n_uses ergodic channel uses."""
    r0 = link.bits_per_use
    n_chunks = (n_uses + CHUNK - 1) // CHUNK
    sizes = [min(CHUNK, n_uses - i * CHUNK) for i in range(n_chunks)]
    jobs = [(link, sz, seed, stage, i) for i, sz in enumerate(sizes)]
    if threads > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_collect_chunk, jobs, chunksize=4))
    else:
        parts = [_collect_chunk(j) for j in jobs]
    llr = np.concatenate([p[0] for p in parts])
    bits = np.concatenate([p[1] for p in parts])
    pos = np.tile(np.arange(r0), n_uses) if r0 > 1 else np.zeros(n_uses, dtype=np.int64)
    return LabeledLlrSamples(llr, bits, pos)


def collect_labeled_llrs_fixed_channel(link: LinkConfig, H: np.ndarray,
                                       n_uses: int,
                                       rng: np.random.Generator) -> LabeledLlrSamples:
    """Samples for one quasi-static channel realization."""
    if link.is_siso_bpsk:
        raise ValueError("SISO BPSK outage uses the closed-form path")
    llr, bits = _mimo_chunk(link, n_uses, rng, H_fixed=np.asarray(H))
    r0 = link.bits_per_use
    return LabeledLlrSamples(llr, bits, np.tile(np.arange(r0), n_uses))
