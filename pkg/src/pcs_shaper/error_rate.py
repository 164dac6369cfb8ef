"""Closed-form error-rate analysis of MAP-detected M-PAM with shaped priors.

The probability that a transmitted symbol m loses the MAP comparison against a
competitor n at pairwise distance ``d = h*gamma*eta*(a_m - a_n)`` is

    P_{m,n} = 1/2 * erfc( (2 sigma^2 ln(p_m/p_n) + d^2) / (2 sqrt(2) sigma |d|) ).

Summing over ordered competitor pairs gives a union upper bound on the SER;
keeping only adjacent competitors gives the closed-form approximation.  Both,
scaled by the Gray-coding bit factor, are concave in the probability vector,
which is what the sequential linearization in the solver relies on.

Terms weighted by p_m = 0 are defined as zero (an inactive symbol is never
transmitted), and a competitor with p_n = 0 never wins the comparison; the
erfc limits at +/- infinity realize both conventions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .constellation import Distribution, PamConstellation
from .exceptions import ConfigError
from .validation import check_positive

__all__ = [
    "ACTIVE_SUPPORT_FLOOR",
    "PairwiseGeometry",
    "pairwise_error_prob",
    "ser_upper_bound",
    "ber_upper_bound",
    "ser_approx",
    "ber_approx",
    "grad_ber_upper",
    "grad_ber_approx",
    "pair_term_value",
    "pair_hessian_block",
]

# Probabilities below this are outside the differentiable region of the
# gradient expressions (they contain p_n / p_m); the solver clamps here.
ACTIVE_SUPPORT_FLOOR = 1e-9

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PairwiseGeometry:
    """Signed pairwise received distance d (A) and noise sigma (A).

    ``d = +inf`` / ``-inf`` encode the missing competitors beyond the first and
    last symbol of the grid.
    """

    d: float
    sigma: float

    def __post_init__(self):
        check_positive("sigma", self.sigma)
        if self.d == 0.0:
            raise ConfigError("pairwise distance must be nonzero for m != n")


def _erfc_arg(p_m: float, p_n: float, d: float, sigma: float) -> float:
    if p_n == 0.0:
        return math.inf
    if p_m == 0.0:
        return -math.inf
    if math.isinf(d):
        return math.inf
    return (2.0 * sigma**2 * math.log(p_m / p_n) + d * d) \
        / (2.0 * _SQRT2 * sigma * abs(d))


def pairwise_error_prob(p_m: float, p_n: float, geom: PairwiseGeometry) -> float:
    """Probability that the MAP comparison prefers symbol n over transmitted m."""
    if p_m < 0 or p_n < 0:
        raise ConfigError("probabilities must be nonnegative")
    return 0.5 * erfc(_erfc_arg(p_m, p_n, geom.d, geom.sigma))


def _as_probs(p) -> np.ndarray:
    return p.probs if isinstance(p, Distribution) else np.asarray(p, dtype=float)


def _pair_args(c: PamConstellation, p: np.ndarray, link) -> np.ndarray:
    """Matrix of erfc arguments for all ordered pairs; +inf on dead entries."""
    m = c.order_m
    sig = link.sigma
    d = link.composite_gain * (c.amplitudes[:, None] - c.amplitudes[None, :])
    with np.errstate(divide="ignore"):
        logp = np.where(p > 0, np.log(np.maximum(p, 1e-320)), -np.inf)
    args = np.full((m, m), np.inf)
    off = ~np.eye(m, dtype=bool)
    live = off & (p[:, None] > 0) & (p[None, :] > 0)
    rows, cols = np.nonzero(live)
    args[live] = (2.0 * sig**2 * (logp[rows] - logp[cols]) + d[live] ** 2) \
        / (2.0 * _SQRT2 * sig * np.abs(d[live]))
    return args


def ser_upper_bound(c: PamConstellation, p, link) -> float:
    """Union bound sum_m p_m sum_{n != m} P_{m,n}; may exceed 1 at low SNR."""
    probs = _as_probs(p)
    args = _pair_args(c, probs, link)
    return float(probs @ (0.5 * erfc(args)).sum(axis=1))


def ber_upper_bound(c: PamConstellation, p, link) -> float:
    """Gray-coded BER upper bound: the SER union bound scaled by 1/log2(M)."""
    return ser_upper_bound(c, p, link) / c.bits_per_symbol


def ser_approx(c: PamConstellation, p, link) -> float:
    """Adjacent-competitor approximation of the SER.

    Only the immediate neighbors of each symbol enter the sum; the missing
    neighbors of the edge symbols contribute exactly zero.
    """
    probs = _as_probs(p)
    args = _pair_args(c, probs, link)
    total = 0.0
    m = c.order_m
    for i in range(m):
        if probs[i] == 0.0:
            continue
        acc = 0.0
        if i > 0:
            acc += 0.5 * erfc(args[i, i - 1])
        if i < m - 1:
            acc += 0.5 * erfc(args[i, i + 1])
        total += probs[i] * acc
    return float(total)


def ber_approx(c: PamConstellation, p, link) -> float:
    """Approximate BER on the adjacent-error model: ser_approx / log2(M)."""
    return ser_approx(c, p, link) / c.bits_per_symbol


def _check_interior(p: np.ndarray):
    if p.min() < ACTIVE_SUPPORT_FLOOR:
        raise ConfigError(
            f"gradient requires all probabilities >= {ACTIVE_SUPPORT_FLOOR}; "
            f"clamp the iterate first (min entry {p.min():.3e})")


def grad_ber_upper(c: PamConstellation, p, link) -> np.ndarray:
    """Analytic gradient of ber_upper_bound at an interior point.

    Component m collects the erfc terms it multiplies directly, the chain-rule
    pull of its own log ratio, and the reverse pull through every pair (n, m):

        (1/log2 M) * [ 1/2 sum_n erfc(u_mn)
                       - sigma/sqrt(2 pi) sum_n exp(-u_mn^2)/|d_mn|
                       + sigma/sqrt(2 pi) sum_n (p_n/p_m) exp(-u_nm^2)/|d_mn| ].
    """
    probs = _as_probs(p)
    _check_interior(probs)
    sig = link.sigma
    d = link.composite_gain * (c.amplitudes[:, None] - c.amplitudes[None, :])
    off = ~np.eye(c.order_m, dtype=bool)
    logp = np.log(probs)
    u = np.zeros_like(d)
    u[off] = (2.0 * sig**2 * (logp[:, None] - logp[None, :])[off] + d[off] ** 2) \
        / (2.0 * _SQRT2 * sig * np.abs(d[off]))
    coef = sig / math.sqrt(2.0 * math.pi)
    inv_d = np.zeros_like(d)
    inv_d[off] = 1.0 / np.abs(d[off])
    gauss = np.exp(-u**2) * inv_d
    term1 = 0.5 * np.where(off, erfc(u), 0.0).sum(axis=1)
    term2 = coef * gauss.sum(axis=1)
    ratio = probs[None, :] / probs[:, None]
    term3 = coef * (ratio * gauss.T).sum(axis=1)
    return (term1 - term2 + term3) / c.bits_per_symbol


def grad_ber_approx(c: PamConstellation, p, link) -> np.ndarray:
    """Analytic gradient of ber_approx (adjacent pairs only), interior points."""
    probs = _as_probs(p)
    _check_interior(probs)
    m = c.order_m
    sig = link.sigma
    delta = abs(link.composite_gain * (c.amplitudes[1] - c.amplitudes[0]))
    denom = 2.0 * _SQRT2 * sig * delta
    coef = sig / (_SQRT2 * delta * math.sqrt(math.pi))
    grad = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for j in (i - 1, i + 1):
            if not 0 <= j < m:
                continue
            u_ij = (2.0 * sig**2 * math.log(probs[i] / probs[j]) + delta**2) / denom
            u_ji = (2.0 * sig**2 * math.log(probs[j] / probs[i]) + delta**2) / denom
            acc += 0.5 * erfc(u_ij)
            acc -= coef * math.exp(-u_ij**2)
            acc += coef * (probs[j] / probs[i]) * math.exp(-u_ji**2)
        grad[i] = acc
    return grad / c.bits_per_symbol


def pair_term_value(p_m: float, p_n: float, geom: PairwiseGeometry) -> float:
    """g(p_m, p_n) = p_m erfc(u_mn) + p_n erfc(u_nm), one symmetric pair term."""
    u_mn = _erfc_arg(p_m, p_n, geom.d, geom.sigma)
    u_nm = _erfc_arg(p_n, p_m, geom.d, geom.sigma)
    return p_m * erfc(u_mn) + p_n * erfc(u_nm)


def pair_hessian_block(p_m: float, p_n: float, geom: PairwiseGeometry) -> np.ndarray:
    """Closed-form 2x2 Hessian of the pair term g(p_m, p_n).

    With ``alpha = sigma / (sqrt(2) |d|)``, ``beta = |d| / (2 sqrt(2) sigma)``
    and ``theta_xy = alpha ln(p_x/p_y) + beta`` the common factor is

        Phi = 2 alpha^2 [p_m theta_mn e^(-theta_mn^2) + p_n theta_nm e^(-theta_nm^2)]
              - alpha  [p_m e^(-theta_mn^2) + p_n e^(-theta_nm^2)]

    and the block is (2 Phi / sqrt(pi)) * [[1/p_m^2, -1/(p_m p_n)],
    [-1/(p_m p_n), 1/p_n^2]], which is negative semidefinite because
    Phi = -alpha p_m e^(-theta_mn^2) <= 0.
    """
    if min(p_m, p_n) <= 0:
        raise ConfigError("Hessian block requires strictly positive probabilities")
    sig, d = geom.sigma, abs(geom.d)
    alpha = sig / (_SQRT2 * d)
    beta = d / (2.0 * _SQRT2 * sig)
    th_mn = alpha * math.log(p_m / p_n) + beta
    th_nm = alpha * math.log(p_n / p_m) + beta
    phi = (2.0 * alpha**2 * (p_m * th_mn * math.exp(-th_mn**2)
                             + p_n * th_nm * math.exp(-th_nm**2))
           - alpha * (p_m * math.exp(-th_mn**2) + p_n * math.exp(-th_nm**2)))
    scale = 2.0 * phi / math.sqrt(math.pi)
    return scale * np.array([[1.0 / p_m**2, -1.0 / (p_m * p_n)],
                             [-1.0 / (p_m * p_n), 1.0 / p_n**2]])
