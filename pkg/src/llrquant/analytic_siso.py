"""Closed-form machinery for BPSK over real Rayleigh fading.

Model: y = h*x + w with h ~ N(0,1), w ~ N(0, 2*sigma2), x = 2c - 1.
The demodulator output LLR = h*y/sigma2 is the exact log-likelihood
ratio; conditioned on the channel it is N(x*gamma, 2*gamma) with
gamma = h^2/sigma2.

Conditioned on c = 1, the LLR is a quadratic form in two independent
standard normals whose matrix has eigenvalues (1 +- sqrt(1+2*sigma2))/2,
and its density is the product-of-correlated-Gaussians law

    f(xi | c=1) = sigma/(sqrt(2)*pi) * exp(xi/2) * K0(b*|xi|),
    b = sqrt(1 + 2*sigma2)/2,

with K0 the modified Bessel function of the second kind, order 0. The
density has an integrable log singularity at 0 and a slow exponential
tail with rate b - 1/2 on the positive side, so all quadrature is done
on dyadic panels that refine geometrically toward 0 and extend far
enough that the analytic tail bound drops below 1e-15.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, k0e

from .infotheory import DiscreteChannel, _mi_rows

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite_e.hermegauss(96)
_GH_WEIGHTS = _GH_WEIGHTS / np.sqrt(2.0 * np.pi)

FINE_GRID_BITS = 12


def quadratic_form_eigenvalues(sigma2: float) -> tuple[float, float]:
    """Eigenvalues (1 +- sqrt(1+2*sigma2))/2 of the LLR quadratic form.

    Their sum is 1 (the trace) and their product is -sigma2/2 (the
    determinant); the density constants derive from them.
    """
    r = np.sqrt(1.0 + 2.0 * sigma2)
    return (1.0 + r) / 2.0, (1.0 - r) / 2.0


def siso_bpsk_llr(h, y, sigma2: float):
    """Exact LLR h*y/sigma2 of the real-valued BPSK observation."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return np.asarray(h, dtype=float) * np.asarray(y, dtype=float) / sigma2


def gaussian_q(x):
    """Gaussian tail probability Q(x) = Pr{N(0,1) > x}."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


class SisoLlrDensity:
    """LLR density, CDFs and quantizer design for one noise variance."""

    def __init__(self, sigma2: float):
        if not sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        self.sigma2 = float(sigma2)
        self.a = 0.5
        self.b = np.sqrt(1.0 + 2.0 * self.sigma2) / 2.0
        self.coef = np.sqrt(self.sigma2 / 2.0) / np.pi  # = sqrt(b^2-a^2)/pi
        self._build_table()

    # -- pointwise laws ----------------------------------------------------

    def _f1_raw(self, xi: np.ndarray) -> np.ndarray:
        # conditional density given c=1; caller guarantees xi != 0
        z = self.b * np.abs(xi)
        return self.coef * np.exp(self.a * xi - z) * k0e(z)

    def density(self, xi, condition: int = 1):
        """Conditional LLR density f(xi | c); singular (raises) at xi = 0."""
        xi = np.asarray(xi, dtype=float)
        if np.any(xi == 0):
            raise ValueError("density has a logarithmic singularity at xi = 0")
        out = self._f1_raw(xi if condition == 1 else -xi)
        return float(out) if out.ndim == 0 else out

    def density_unconditional(self, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi == 0):
            raise ValueError("density has a logarithmic singularity at xi = 0")
        out = 0.5 * (self._f1_raw(xi) + self._f1_raw(-xi))
        return float(out) if out.ndim == 0 else out

    # -- quadrature table --------------------------------------------------

    def _tail_mass(self, x: float, rate: float) -> float:
        # \int_x^inf coef * t^(-1/2) sqrt(pi/(2b)) e^(-rate t) dt, x > 0
        return (self.coef * np.sqrt(np.pi / (2.0 * self.b))
                * np.sqrt(np.pi / rate) * erfc(np.sqrt(rate * x)))

    def _build_table(self):
        slow = self.b - self.a
        t_max = max(42.0 / slow, 50.0)
        n_oct = int(np.ceil(np.log2(t_max / 1e-14)))
        pos = t_max * 2.0 ** np.arange(-n_oct, 1.0)
        edges = np.concatenate((-pos[::-1], [0.0], pos))
        lo, hi = edges[:-1], edges[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        panel = (self._f1_raw(x) * _GL_WEIGHTS[None, :]).sum(axis=1) * half

        tail_neg = self._tail_mass(t_max, self.a + self.b)
        f1 = np.concatenate(([tail_neg], tail_neg + np.cumsum(panel)))
        self._edges = edges
        self._f1_edges = f1
        self._tail_pos = self._tail_mass(t_max, self.b - self.a)
        self.total_mass = float(f1[-1] + self._tail_pos)

    def _f1_cdf(self, x) -> np.ndarray:
        """Conditional CDF F(x | c=1) via table plus a partial panel."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        edges, f1 = self._edges, self._f1_edges
        below = x <= edges[0]
        above = x >= edges[-1]
        if np.any(below):
            out[below] = self._tail_mass(-x[below], self.a + self.b)
        if np.any(above):
            out[above] = 1.0 - self._tail_mass(x[above], self.b - self.a)
        inner = ~(below | above)
        if np.any(inner):
            xi = x[inner]
            idx = np.searchsorted(edges, xi, side="right") - 1
            lo = edges[idx]
            half = 0.5 * (xi - lo)
            vals = f1[idx].copy()
            off = half > 0  # x exactly on a table edge needs no partial panel
            if np.any(off):
                nodes = lo[off, None] + half[off, None] * (_GL_NODES[None, :] + 1.0)
                vals[off] += (self._f1_raw(nodes) * _GL_WEIGHTS[None, :]).sum(axis=1) * half[off]
            out[inner] = vals
        return out

    # -- public CDF API ----------------------------------------------------

    def cdf_conditional(self, x, condition: int = 1):
        x = np.asarray(x, dtype=float)
        vals = self._f1_cdf(x) if condition == 1 else 1.0 - self._f1_cdf(-x)
        return float(vals[0]) if x.ndim == 0 else vals

    def cdf(self, x):
        """Unconditional CDF; equals 1/2 at 0 exactly by symmetry."""
        x = np.asarray(x, dtype=float)
        vals = 0.5 + 0.5 * (self._f1_cdf(x) - self._f1_cdf(-x))
        return float(vals[0]) if x.ndim == 0 else vals

    def inverse_cdf(self, u: float) -> float:
        """Unconditional quantile by bracketed root finding (1e-9 absolute)."""
        if not 0.0 < u < 1.0:
            raise ValueError("u must lie strictly between 0 and 1")
        if u == 0.5:
            return 0.0
        f_edges = 0.5 * (self._f1_edges + 1.0 - self._f1_edges[::-1])
        if not f_edges[0] < u < f_edges[-1]:
            raise ValueError("quantile beyond tabulated tail mass")
        i = int(np.searchsorted(f_edges, u))
        lo, hi = self._edges[i - 1], self._edges[i]
        if lo == hi:
            return lo
        return brentq(lambda x: self.cdf(x) - u, lo, hi, xtol=1e-12, rtol=8.9e-16)

    # -- quantizer design and rates -----------------------------------------

    def boundaries(self, k: int, fine: bool = False) -> np.ndarray:
        """Equiprobable boundaries at the j/K quantiles, exactly symmetric."""
        if fine:
            f_edges = 0.5 * (self._f1_edges + 1.0 - self._f1_edges[::-1])
            u = np.arange(1, k) / k
            b = np.interp(u, f_edges, self._edges)
        else:
            b = np.array([self.inverse_cdf(j / k) for j in range(1, k)])
        return 0.5 * (b - b[::-1])

    def ergodic_transitions(self, boundaries) -> DiscreteChannel:
        """Transition matrix of the fading-averaged equivalent channel."""
        edges = np.concatenate(([-np.inf], np.asarray(boundaries, dtype=float), [np.inf]))
        c1 = np.empty(edges.shape)
        finite = np.isfinite(edges)
        c1[finite] = self._f1_cdf(edges[finite])
        c1[edges == -np.inf] = 0.0
        c1[edges == np.inf] = 1.0
        c0 = np.empty_like(c1)
        c0[finite] = 1.0 - self._f1_cdf(-edges[finite])
        c0[edges == -np.inf] = 0.0
        c0[edges == np.inf] = 1.0
        p = np.stack((np.diff(c0), np.diff(c1)))
        p = np.clip(p, 0.0, None)
        return DiscreteChannel(p / p.sum(axis=1, keepdims=True))

    def design_quantizer(self, k: int):
        """Boundaries plus log-ratio levels, both from the closed forms."""
        from .quant import LlrQuantizer, levels_from_transitions

        b = self.boundaries(k)
        dc = self.ergodic_transitions(b)
        return LlrQuantizer(b, levels_from_transitions(dc))


# ---------------------------------------------------------------------------
# Conditional (per channel realization) laws
# ---------------------------------------------------------------------------


def conditional_transitions(gamma: float, boundaries) -> tuple[DiscreteChannel, bool]:
    """Transitions given the instantaneous SNR gamma = h^2/sigma2.

    Given the channel, LLR | c ~ N((2c-1)*gamma, 2*gamma), so each bin
    probability is a difference of Gaussian tail values. gamma = 0 is
    degenerate: all mass collapses into the bin containing 0 and the
    returned flag is set.
    """
    boundaries = np.asarray(boundaries, dtype=float)
    k = boundaries.size + 1
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if gamma == 0.0:
        p = np.zeros((2, k))
        p[:, int(np.searchsorted(boundaries, 0.0, side="right"))] = 1.0
        return DiscreteChannel(p), True
    p = conditional_transitions_block(np.array([gamma]), boundaries)[0]
    return DiscreteChannel(p), False


def conditional_transitions_block(gammas: np.ndarray, boundaries) -> np.ndarray:
    """Vectorized conditional transitions, shape (n, 2, K)."""
    gammas = np.asarray(gammas, dtype=float)
    edges = np.concatenate(([-np.inf], np.asarray(boundaries, dtype=float), [np.inf]))
    s = np.sqrt(2.0 * gammas)[:, None]
    out = np.empty((gammas.size, 2, edges.size - 1))
    for b in (0, 1):
        mu = (2 * b - 1) * gammas[:, None]
        with np.errstate(invalid="ignore"):
            z = (edges[None, :] - mu) / s
        z[:, 0] = -np.inf
        z[:, -1] = np.inf
        tail = gaussian_q(z)
        out[:, b, :] = tail[:, :-1] - tail[:, 1:]
    return out


def soft_rate_given_gamma(gammas: np.ndarray) -> np.ndarray:
    """Non-quantized rate 1 - E[log2(1+e^-LLR)] with LLR ~ N(gamma, 2*gamma).

    Gauss-Hermite quadrature over the conditional Gaussian; exact for the
    binary-input channel because the LLR here is the true LLR.
    """
    gammas = np.asarray(gammas, dtype=float)
    lam = gammas[:, None] + np.sqrt(2.0 * gammas)[:, None] * _GH_NODES[None, :]
    loss = np.logaddexp(0.0, -lam) / np.log(2.0)
    return np.clip(1.0 - loss @ _GH_WEIGHTS, 0.0, 1.0)


def quantized_rate_given_gamma(gammas: np.ndarray, boundaries) -> np.ndarray:
    """Per-realization mutual information of the quantized channel."""
    p = conditional_transitions_block(gammas, boundaries)
    return _mi_rows(p)


# ---------------------------------------------------------------------------
# Ergodic capacity and outage
# ---------------------------------------------------------------------------


def ergodic_capacity_semianalytic(sigma2: float, k: int | None) -> float:
    """Ergodic rate (bpcu) for a K-bin equiprobable quantizer.

    k = None requests the non-quantized reference, evaluated as the
    large-K limit on a fine 2^12-bin equiprobable grid.
    """
    d = SisoLlrDensity(sigma2)
    if k is None:
        b = d.boundaries(2 ** FINE_GRID_BITS, fine=True)
    else:
        b = d.boundaries(k)
    dc = d.ergodic_transitions(b)
    return float(_mi_rows(dc.p[None])[0])


def snr_for_rate(target_rate: float, k: int | None,
                 bracket_db: tuple[float, float] = (-25.0, 35.0)) -> float:
    """SNR (dB) where the semi-analytic ergodic rate equals the target."""
    def f(snr_db):
        return ergodic_capacity_semianalytic(10.0 ** (-snr_db / 10.0), k) - target_rate

    lo, hi = bracket_db
    return brentq(f, lo, hi, xtol=1e-4)


def outage_rates_siso(sigma2: float, k: int | None, h: np.ndarray) -> np.ndarray:
    """Per-realization rates for given channel gains h.

    Quantizer boundaries are designed once from the unconditional LLR
    distribution at this noise level, then each realization is scored
    through its conditional-Gaussian transitions.
    """
    gammas = np.asarray(h, dtype=float) ** 2 / sigma2
    if k is None:
        return soft_rate_given_gamma(gammas)
    boundaries = SisoLlrDensity(sigma2).boundaries(k)
    return quantized_rate_given_gamma(gammas, boundaries)


def outage_probability_siso(sigma2: float, k: int | None, r: float,
                            n_channels: int, rng: np.random.Generator) -> float:
    """Monte-Carlo outage probability Pr{rate <= R} over h ~ N(0,1)."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("target rate must lie in [0, 1] for BPSK")
    h = rng.standard_normal(n_channels)
    rates = outage_rates_siso(sigma2, k, h)
    return float(np.mean(rates <= r))
