"""On-the-fly quantizer parameter estimation from unlabeled LLRs.

Levels require the conditional LLR densities, which are unavailable at
the receiver because the code bits are unknown. A two-sided exponential
model for f(xi | c=1),

    f(xi | c=1) = alpha*beta/(alpha+beta) * exp(alpha*xi),  xi < 0,
                  alpha*beta/(alpha+beta) * exp(-beta*xi),  xi >= 0,

is fitted by matching the probabilities of two probe intervals of the
unconditional (symmetric) density, which needs no bit labels. Boundaries
are always estimated from empirical quantiles; only the levels use the
model. The unconditional density is invariant under swapping alpha and
beta, so the fit identifies an unordered pair; the smaller decay rate is
assigned to the positive side (beta), where the mass must lean given
c = 1, and the returned pair therefore satisfies alpha >= beta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .quant import LlrQuantizer, design_boundaries_empirical


class InfeasibleFitError(ValueError):
    pass


@dataclass(frozen=True)
class ParametricLlrModel:
    alpha: float  # decay rate of the negative side of f(.|c=1)
    beta: float   # decay rate of the positive side

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("decay rates must be positive")

    @property
    def peak(self) -> float:
        return self.alpha * self.beta / (self.alpha + self.beta)


class ProbeBins(NamedTuple):
    """Two disjoint finite intervals on the non-negative axis."""

    bin1: tuple[float, float]
    bin2: tuple[float, float]


def model_density(m: ParametricLlrModel, xi, condition: int = 1):
    """Conditional model density; the c=0 side is the mirror image."""
    xi = np.asarray(xi, dtype=float)
    s = xi if condition == 1 else -xi
    out = m.peak * np.where(s < 0, np.exp(m.alpha * np.minimum(s, 0.0)),
                            np.exp(-m.beta * np.maximum(s, 0.0)))
    return float(out) if out.ndim == 0 else out


def model_density_unconditional(m: ParametricLlrModel, xi):
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    out = 0.5 * m.peak * (np.exp(-m.alpha * a) + np.exp(-m.beta * a))
    return float(out) if out.ndim == 0 else out


def _half_line_mass(rate: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # integral of exp(-rate*x) over [lo, hi) for 0 <= lo <= hi
    return (np.exp(-rate * lo) - np.exp(-rate * hi)) / rate


def _conditional_mass(m: ParametricLlrModel, lo: float, hi: float) -> float:
    """Integral of the c=1 model density over [lo, hi)."""
    total = 0.0
    if lo < 0:
        a, b = -min(hi, 0.0), -lo
        total += m.peak * _half_line_mass(m.alpha, a, b)
    if hi > 0:
        total += m.peak * _half_line_mass(m.beta, max(lo, 0.0), hi)
    return total


def bin_probability(m: ParametricLlrModel, interval) -> float:
    """Pr{LLR in interval} under the unconditional model density."""
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ValueError("interval endpoints out of order")
    return 0.5 * (_conditional_mass(m, lo, hi) + _conditional_mass(m, -hi, -lo))


def default_probe_bins(abs_llr_median: float) -> ProbeBins:
    """Probe intervals [0, m) and [m, 3m) around the |LLR| median.

    The first weighs the near-origin mass (sensitive to the larger decay
    rate), the second the tail, which keeps the 2x2 system well
    conditioned across SNRs.
    """
    if not abs_llr_median > 0:
        raise ValueError("median of |LLR| must be positive")
    return ProbeBins((0.0, abs_llr_median), (abs_llr_median, 3.0 * abs_llr_median))


def _order(alpha: float, beta: float) -> tuple[float, float]:
    return (alpha, beta) if alpha >= beta else (beta, alpha)


def mean_abs_llr(m: ParametricLlrModel) -> float:
    """Mean of |LLR| under the model: an equal mixture of exponentials."""
    return 0.5 * (1.0 / m.alpha + 1.0 / m.beta)


def _newton_root(target, bins: ProbeBins, x0: float, tol: float):
    """Damped Newton on (log alpha, log beta) from an asymmetric start.

    The start is kept off the diagonal because the swap symmetry of the
    unconditional density makes the Jacobian exactly singular there.
    """

    def residual(logab):
        m = ParametricLlrModel(*np.exp(logab))
        return np.array([bin_probability(m, bins.bin1),
                         bin_probability(m, bins.bin2)]) - target

    x = np.array([x0 + 0.3, x0 - 0.3])
    for _ in range(80):
        r = residual(x)
        if np.max(np.abs(r)) < tol:
            return ParametricLlrModel(*_order(*np.exp(x)))
        jac = np.empty((2, 2))
        h = 1e-6
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            jac[:, j] = (residual(x + e) - residual(x - e)) / (2 * h)
        try:
            step = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            return None
        step = np.clip(step, -3.0, 3.0)
        scale = 1.0
        base = np.sum(r ** 2)
        while scale > 1e-4:
            if np.sum(residual(x - scale * step) ** 2) < base:
                break
            scale /= 2.0
        else:
            return None
        x = x - scale * step
    return None


def fit_all_roots(p_hat1: float, p_hat2: float, bins: ProbeBins,
                  tol: float = 1e-8,
                  newton_starts: tuple = (0.0,)) -> list[ParametricLlrModel]:
    """All models reproducing the probe probabilities, ordered alpha >= beta.

    The two-bin system is not always uniquely solvable: distinct decay
    pairs can match both probe masses. The solve runs in (ratio, scale)
    coordinates with ratio alpha/beta >= 1, which removes the swap
    symmetry, and brackets every sign change of the second-bin mismatch.
    """
    for p in (p_hat1, p_hat2):
        if not 0.0 < p < 0.5:
            raise InfeasibleFitError(f"probe probability {p} outside (0, 1/2)")
    target = np.array([p_hat1, p_hat2])
    blo, bhi = 1e-9, 1e9

    def beta_for(r: float):
        def g(beta):
            return bin_probability(ParametricLlrModel(r * beta, beta), bins.bin1) - target[0]
        if g(blo) * g(bhi) > 0:
            return None
        return brentq(g, blo, bhi, xtol=1e-300, rtol=8.9e-16)

    def outer(logr: float):
        beta = beta_for(np.exp(logr))
        if beta is None:
            return None
        m = ParametricLlrModel(np.exp(logr) * beta, beta)
        return bin_probability(m, bins.bin2) - target[1]

    roots = []

    def accept(m: ParametricLlrModel):
        res = np.array([bin_probability(m, bins.bin1),
                        bin_probability(m, bins.bin2)]) - target
        if np.max(np.abs(res)) >= tol:
            return
        for r in roots:
            if abs(np.log(r.alpha / m.alpha)) + abs(np.log(r.beta / m.beta)) < 1e-6:
                return
        roots.append(m)

    def bracket_scan(points):
        vals = [outer(lr) for lr in points]
        if abs(points[0]) < 1e-12 and vals[0] is not None and abs(vals[0]) < tol:
            beta = beta_for(1.0)
            accept(ParametricLlrModel(beta, beta))
        for l0, l1, v0, v1 in zip(points[:-1], points[1:], vals[:-1], vals[1:]):
            if v0 is None or v1 is None or v0 * v1 > 0:
                continue
            lr = brentq(outer, l0, l1, xtol=1e-14, rtol=8.9e-16)
            beta = beta_for(np.exp(lr))
            if beta is not None:
                accept(ParametricLlrModel(np.exp(lr) * beta, beta))
        return vals

    grid = np.linspace(0.0, np.log(1e10), 160)
    vals = bracket_scan(grid)
    # a pair of roots inside one cell leaves no sign change at the cell
    # edges; rescan finely around local minima of the mismatch magnitude
    mags = np.array([np.inf if v is None else abs(v) for v in vals])
    for i in range(1, len(grid) - 1):
        if np.isfinite(mags[i]) and mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]:
            bracket_scan(np.linspace(grid[i - 1], grid[i + 1], 50))
    # Newton polish catches roots the scans still missed
    for x0 in newton_starts:
        newton = _newton_root(target, bins, x0, tol)
        if newton is not None:
            accept(newton)
    return roots


def fit(p_hat1: float, p_hat2: float, bins: ProbeBins,
        init: float | None = None, tol: float = 1e-8) -> ParametricLlrModel:
    """Solve P_i(alpha, beta) = p_hat_i for the model parameters.

    Damped Newton plus a bracketed (ratio, scale) fallback. When the
    system has several solutions, ``init`` (the reciprocal of the sample
    mean of |LLR|) disambiguates: the root whose model mean is closest to
    1/init wins. Without a hint the least asymmetric root is returned.
    Raises InfeasibleFitError when no positive pair reproduces the probe
    probabilities to the residual tolerance.
    """
    starts = (0.0,) if not init else (0.0, float(np.log(init)))
    roots = fit_all_roots(p_hat1, p_hat2, bins, tol=tol, newton_starts=starts)
    if not roots:
        raise InfeasibleFitError(
            f"no (alpha, beta) reproduces probe probabilities ({p_hat1}, {p_hat2})")
    if init:
        target_mean = 1.0 / init
        return min(roots, key=lambda m: abs(np.log(mean_abs_llr(m) / target_mean)))
    return min(roots, key=lambda m: m.alpha / m.beta)


def levels_from_model(m: ParametricLlrModel, boundaries) -> np.ndarray:
    """Log-ratio levels of the model channel over the given bins."""
    edges = np.concatenate(([-np.inf], np.asarray(boundaries, dtype=float), [np.inf]))
    tiny = 1e-300
    p1 = np.array([_conditional_mass(m, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    p0 = np.array([_conditional_mass(m, -hi, -lo) for lo, hi in zip(edges[:-1], edges[1:])])
    return np.log(np.maximum(p1, tiny) / np.maximum(p0, tiny))


def _mean_log_likelihood(m: ParametricLlrModel, abs_llrs: np.ndarray) -> float:
    dens = m.peak * (np.exp(-m.alpha * abs_llrs) + np.exp(-m.beta * abs_llrs))
    return float(np.mean(np.log(np.maximum(dens, 1e-300))))


def design_quantizer_online(llrs, k: int) -> tuple[LlrQuantizer, ParametricLlrModel]:
    """Quantizer from unlabeled LLRs: quantile boundaries, model levels.

    When several models reproduce the probe probabilities, the sample
    itself arbitrates: the root with the highest average log-likelihood
    of |LLR| wins.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    boundaries = design_boundaries_empirical(llrs, k)
    a = np.abs(llrs)
    med = float(np.median(a))
    bins = default_probe_bins(med)
    p1 = float(np.mean((llrs >= bins.bin1[0]) & (llrs < bins.bin1[1])))
    p2 = float(np.mean((llrs >= bins.bin2[0]) & (llrs < bins.bin2[1])))
    roots = fit_all_roots(p1, p2, bins)
    if not roots:
        raise InfeasibleFitError(
            f"no (alpha, beta) reproduces probe probabilities ({p1}, {p2})")
    if len(roots) == 1:
        model = roots[0]
    else:
        sub = a[: 200_000]
        model = max(roots, key=lambda m: _mean_log_likelihood(m, sub))
    levels = levels_from_model(model, boundaries)
    return LlrQuantizer(boundaries, levels), model
