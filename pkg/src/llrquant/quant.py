"""Symmetric LLR quantizers with equiprobable bins and log-ratio levels.

A K-bin quantizer is described by K-1 ascending, symmetric boundaries
(implicitly extended by -inf and +inf) and one reproduction level per
bin. Boundaries are placed at the k/K quantiles of the unconditional LLR
distribution, so every bin captures probability 1/K; levels are the
posterior log-ratios log(p_1k / p_0k) of the resulting discrete channel,
which hands the decoder calibrated reliabilities no matter how the raw
LLRs were scaled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .infotheory import DiscreteChannel, bin_index

SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class LlrQuantizer:
    boundaries: np.ndarray  # (K-1,) ascending, symmetric
    levels: np.ndarray      # (K,) non-decreasing, level k inside bin k

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if lv.size != b.size + 1:
            raise ValueError("need exactly one level per bin")
        if b.size and np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly ascending")
        if np.max(np.abs(b + b[::-1])) > SYMMETRY_TOL if b.size else False:
            raise ValueError("boundaries must be symmetric")
        if np.any(np.diff(lv) < 0):
            raise ValueError("levels must be non-decreasing")
        lo = np.concatenate(([-np.inf], b))
        hi = np.concatenate((b, [np.inf]))
        if np.any(lv < lo - SYMMETRY_TOL) or np.any(lv > hi + SYMMETRY_TOL):
            raise ValueError("each level must lie inside its bin")
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "levels", lv)

    @property
    def n_bins(self) -> int:
        return len(self.levels)

    @property
    def word_length(self) -> int:
        q = int(np.log2(self.n_bins))
        if 2 ** q != self.n_bins:
            raise ValueError("bin count is not a power of two")
        return q


def quantize(llr, qz: LlrQuantizer):
    """Map LLR(s) to (bin index, level). Boundary values go to the upper bin."""
    idx = bin_index(llr, qz.boundaries)
    return idx, qz.levels[idx]


def symmetrize_boundaries(boundaries: np.ndarray) -> np.ndarray:
    """Enforce i_k = -i_{K-k}; the middle boundary of an even K becomes 0."""
    b = np.asarray(boundaries, dtype=float)
    return 0.5 * (b - b[::-1])


def design_boundaries_empirical(samples, k: int) -> np.ndarray:
    """Equiprobable boundaries from the k/K sample quantiles, symmetrized.

    The quantile estimate is the order statistic of rank ceil(j*N/K).
    Raises if fewer than 100*K samples are supplied or the sample set is
    too degenerate to separate the bins.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    n = samples.size
    if k < 2 or (k & (k - 1)) != 0:
        raise ValueError("bin count must be a power of two, >= 2")
    if n < 100 * k:
        raise ValueError(f"need at least {100 * k} samples for K={k}, got {n}")
    s = np.sort(samples)
    ranks = np.ceil(np.arange(1, k) * n / k).astype(np.int64) - 1
    b = symmetrize_boundaries(s[ranks])
    if np.any(np.diff(b) <= 0):
        raise ValueError("degenerate sample set produced duplicate boundaries")
    return b


def levels_from_transitions(dc: DiscreteChannel) -> np.ndarray:
    """Reproduction levels log(p_1k / p_0k) of a discrete channel."""
    p = dc.p
    if np.any(p <= 0):
        raise ValueError("transition probabilities must be positive; "
                         "smooth zero-mass bins first")
    return np.log(p[1] / p[0])


def quantizer_from_samples(llrs, bits, k: int) -> LlrQuantizer:
    """Design boundaries and levels from one labeled calibration run."""
    from .infotheory import bin_counts, transitions_from_counts

    boundaries = design_boundaries_empirical(llrs, k)
    dc = transitions_from_counts(bin_counts(llrs, bits, boundaries))
    return LlrQuantizer(boundaries, levels_from_transitions(dc))


def save_quantizer(qz: LlrQuantizer, path) -> None:
    """Plain-text record: K, the K-1 boundaries, then the K levels."""
    fields = [str(qz.n_bins)]
    fields += [format(v, ".17g") for v in qz.boundaries]
    fields += [format(v, ".17g") for v in qz.levels]
    with open(path, "w") as f:
        f.write(", ".join(fields) + "\n")


def load_quantizer(path) -> LlrQuantizer:
    with open(path) as f:
        fields = [t.strip() for t in f.read().strip().split(",")]
    k = int(fields[0])
    values = np.array([float(t) for t in fields[1:]])
    if values.size != 2 * k - 1:
        raise ValueError(f"expected {2 * k - 1} values for K={k}")
    return LlrQuantizer(values[: k - 1], values[k - 1:])
