"""Equivalent discrete channel: transitions, mutual information, outage.

The channel has binary input c (the code bit) and K-ary output d (the
quantized LLR). A LabeledLlrSamples batch pools (LLR, bit) pairs over all
R0 bit positions of a transmit vector, modeling a decoder that is blind
to the position of a bit inside the symbol labels; the system rate in
bits per channel use is then R0 times the per-bit mutual information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng as rngmod
from .channel import LinkConfig, snr_db_from_sigma2

LOG2E = math.log2(math.e)


class LabeledLlrSamples(NamedTuple):
    """Raw material of quantizer design: LLR values with their code bits."""

    llr: np.ndarray       # (N,) float
    bit: np.ndarray       # (N,) uint8
    position: np.ndarray  # (N,) int, bit position l in 0..R0-1


@dataclass(frozen=True)
class DiscreteChannel:
    """Row-stochastic 2 x K transition matrix p[b, k] = Pr{d = level k | c = b}."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != 2:
            raise ValueError("transition matrix must be 2 x K")
        if np.any(p < 0):
            raise ValueError("negative transition probability")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-9:
            raise ValueError("rows must sum to 1")
        object.__setattr__(self, "p", p)

    @property
    def n_outputs(self) -> int:
        return self.p.shape[1]

    def output_law(self) -> np.ndarray:
        return 0.5 * (self.p[0] + self.p[1])


class RateSample(NamedTuple):
    """Per-realization achievable rate of a quasi-static channel draw."""

    rate: float
    channel_id: int


def bin_index(llrs: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
    """Bin of each LLR, 0-based; values on a boundary go to the upper bin."""
    return np.searchsorted(np.asarray(boundaries), np.asarray(llrs), side="right")


def bin_counts(llrs: np.ndarray, bits: np.ndarray,
               boundaries: np.ndarray) -> np.ndarray:
    """Integer landing counts per (bit value, bin); shape (2, K)."""
    k = len(boundaries) + 1
    idx = bin_index(llrs, boundaries)
    counts = np.empty((2, k), dtype=np.int64)
    bits = np.asarray(bits)
    for b in (0, 1):
        counts[b] = np.bincount(idx[bits == b], minlength=k)
    return counts


def transitions_from_counts(counts: np.ndarray) -> DiscreteChannel:
    """Smoothed row-normalized transition estimate from landing counts.

    Each row gets an additive 1/(2*N_row) before renormalization so that
    empty bins still produce finite log-ratio levels.
    """
    counts = np.asarray(counts, dtype=float)
    row_n = counts.sum(axis=1, keepdims=True)
    if np.any(row_n == 0):
        raise ValueError("need samples for both bit values")
    eps = 1.0 / (2.0 * row_n)
    p = counts + eps
    return DiscreteChannel(p / p.sum(axis=1, keepdims=True))


def estimate_transitions(samples: LabeledLlrSamples,
                         boundaries: np.ndarray) -> DiscreteChannel:
    """Monte-Carlo transition estimate from labeled LLR samples."""
    return transitions_from_counts(bin_counts(samples.llr, samples.bit, boundaries))


def mutual_information(dc: DiscreteChannel) -> float:
    """I(c; d) in bits for equiprobable input, with 0*log(0) = 0."""
    return float(_mi_rows(dc.p[None, :, :])[0])


def _mi_rows(p: np.ndarray) -> np.ndarray:
    """Vectorized mutual information for a stack (..., 2, K) of channels."""
    avg = 0.5 * (p[..., 0, :] + p[..., 1, :])
    out = np.zeros(p.shape[:-2])
    for b in (0, 1):
        pb = p[..., b, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            term = pb * np.log2(pb / avg)
        out += 0.5 * np.where(pb > 0, term, 0.0).sum(axis=-1)
    return out


def mutual_information_from_counts(counts: np.ndarray,
                                   bias_correction: bool = False) -> float:
    """Plug-in mutual information of a count table, optionally debiased.

    The Miller-Madow correction subtracts (rows-1)(occupied bins-1) /
    (2 N ln 2); it only matters for fine output grids.
    """
    dc = transitions_from_counts(counts)
    i = mutual_information(dc)
    if bias_correction:
        n = counts.sum()
        occupied = int(np.count_nonzero(counts.sum(axis=0)))
        i -= (occupied - 1) / (2.0 * n) * LOG2E
    return max(i, 0.0)


def mutual_information_stderr(counts: np.ndarray) -> float:
    """Delta-method standard error of the plug-in mutual information."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    p = transitions_from_counts(counts).p
    avg = 0.5 * (p[0] + p[1])
    with np.errstate(divide="ignore"):
        g = np.log2(p / avg)
    g = np.where(p > 0, g, 0.0)
    w = counts / n
    mean = (w * g).sum()
    var = (w * (g - mean) ** 2).sum()
    return float(np.sqrt(var / n))


def outage_probability(rates, r_target: float) -> tuple[float, tuple[float, float]]:
    """Empirical Pr{rate <= R} with a 95% Wilson confidence interval."""
    rates = np.asarray([s.rate if isinstance(s, RateSample) else s for s in rates], dtype=float)
    if rates.size == 0:
        raise ValueError("empty sample list")
    n = rates.size
    hits = int(np.count_nonzero(rates <= r_target))
    p = hits / n
    z = 1.959963984540054
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(center - half, 0.0)
    hi = 1.0 if hits == n else min(center + half, 1.0)
    return p, (lo, hi)


# ---------------------------------------------------------------------------
# Monte-Carlo rate evaluation and SNR searches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantizerSpec:
    """How the quantizer of a rate evaluation is chosen.

    kind "equiprobable": boundaries designed from a calibration run with
    K = 2^q bins. kind "fixed": use the given boundaries. kind "none":
    non-quantized reference, a fine equiprobable grid with 2^12 bins.
    """

    kind: str
    q: int | None = None
    boundaries: tuple | None = None

    REFERENCE_BITS = 12

    def n_bins(self) -> int:
        if self.kind == "equiprobable":
            return 2 ** self.q
        if self.kind == "fixed":
            return len(self.boundaries) + 1
        if self.kind == "none":
            return 2 ** self.REFERENCE_BITS
        raise ValueError(f"unknown quantizer spec kind {self.kind!r}")

    @property
    def needs_calibration(self) -> bool:
        return self.kind in ("equiprobable", "none")


def ergodic_rate_mc(link: LinkConfig, spec: QuantizerSpec, seed: int,
                    n_calibration: int, n_evaluation: int,
                    threads: int = 1) -> tuple[float, float]:
    """Ergodic rate (bpcu) of the equivalent channel by Monte-Carlo.

    Boundaries are designed on a calibration run, transitions estimated
    on an independent evaluation run; fine reference grids additionally
    get the Miller-Madow bias correction. Returns (rate, stderr).
    """
    from . import link as linkmod
    from . import quant

    r0 = link.bits_per_use
    if spec.needs_calibration:
        cal = linkmod.collect_labeled_llrs(link, n_calibration, seed,
                                           rngmod.STAGE_CALIBRATION, threads=threads)
        k = spec.n_bins()
        if spec.kind == "none":
            # the reference grid only needs to be fine, not a designed
            # quantizer; cap it so each bin keeps ~100 samples
            k = min(k, 2 ** int(np.log2(cal.llr.size / 100)))
        boundaries = quant.design_boundaries_empirical(cal.llr, k)
    else:
        boundaries = np.asarray(spec.boundaries, dtype=float)
    ev = linkmod.collect_labeled_llrs(link, n_evaluation, seed,
                                      rngmod.STAGE_EVALUATION, threads=threads)
    counts = bin_counts(ev.llr, ev.bit, boundaries)
    i_bit = mutual_information_from_counts(counts, bias_correction=spec.kind == "none")
    se = mutual_information_stderr(counts)
    return r0 * i_bit, r0 * se


class TargetUnreachableError(ValueError):
    pass


def required_snr(target_rate: float, link_template: LinkConfig,
                 spec: QuantizerSpec, search_range_db: tuple[float, float],
                 seed: int = 0, n_calibration: int = 100_000,
                 n_evaluation: int = 100_000, tol_db: float = 0.05,
                 threads: int = 1) -> float:
    """SNR (dB) at which the Monte-Carlo rate reaches the target.

    Bisection on the monotone rate-vs-SNR map. Every evaluation reuses
    the same seed (common random numbers), which makes the empirical map
    smooth in SNR and keeps the bracket meaningful at small tolerances.
    """

    def rate_at(snr_db: float) -> float:
        cfg = link_template.with_snr_db(snr_db)
        rate, _ = ergodic_rate_mc(cfg, spec, seed, n_calibration, n_evaluation,
                                  threads=threads)
        return rate

    lo, hi = search_range_db
    if target_rate <= 0:
        return lo
    if rate_at(lo) >= target_rate:
        return lo
    if rate_at(hi) < target_rate:
        raise TargetUnreachableError(
            f"rate at {hi} dB below target {target_rate} bpcu")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if rate_at(mid) >= target_rate:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class SweepPoint(NamedTuple):
    i3: float
    required_snr_db: float
    is_grid_min: bool
    is_proposed: bool


def sweep_boundary_2bit(i3_grid, link_template: LinkConfig, target_rate: float,
                        search_range_db: tuple[float, float], seed: int = 0,
                        n_calibration: int = 100_000, n_evaluation: int = 100_000,
                        tol_db: float = 0.05, threads: int = 1) -> list[SweepPoint]:
    """Required SNR over a family of symmetric 4-level quantizers.

    The family is parameterized by the outer boundary i3 > 0 with
    boundaries (-i3, 0, i3). The returned table marks the grid minimum
    and appends the equiprobable design as an extra row whose i3 is the
    boundary that design produces at its own required SNR.
    """
    from . import link as linkmod
    from . import quant

    rows = []
    for i3 in i3_grid:
        snr = required_snr(target_rate, link_template,
                           QuantizerSpec("fixed", boundaries=(-float(i3), 0.0, float(i3))),
                           search_range_db, seed=seed, n_calibration=n_calibration,
                           n_evaluation=n_evaluation, tol_db=tol_db, threads=threads)
        rows.append([float(i3), snr])
    snr_prop = required_snr(target_rate, link_template, QuantizerSpec("equiprobable", q=2),
                            search_range_db, seed=seed, n_calibration=n_calibration,
                            n_evaluation=n_evaluation, tol_db=tol_db, threads=threads)
    cal = linkmod.collect_labeled_llrs(link_template.with_snr_db(snr_prop),
                                       n_calibration, seed, rngmod.STAGE_CALIBRATION,
                                       threads=threads)
    b = quant.design_boundaries_empirical(cal.llr, 4)
    i3_prop = float(b[2])

    min_idx = int(np.argmin([r[1] for r in rows]))
    out = [SweepPoint(i3, snr, j == min_idx, False) for j, (i3, snr) in enumerate(rows)]
    out.append(SweepPoint(i3_prop, snr_prop, False, True))
    return out
