"""Special functions, vectorized adaptive quadrature and a bounded scalar minimizer.

Everything downstream (exact coverage, expected length, their large-m
limits) is an integral against a standard normal density in the pivot
direction and against the density of ``W = sqrt(Q / m)``, ``Q ~ chi2_m``,
in the scale direction.  The integrators here take *vectorized* integrands:
``g`` receives a 1-d array of abscissae and returns an array whose first
axis matches it.  Trailing axes are carried along as a batch, which is how
the nested coverage integral evaluates the inner integral for many outer
nodes in one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError, QuadratureError

__all__ = [
    "QuadratureSpec",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "psi",
    "student_t_quantile",
    "f_w_pdf",
    "w_quantile",
    "gamma_ratio_factor",
    "expected_w",
    "gauss_kronrod",
    "integrate_gauss_weighted",
    "integrate_w_weighted",
    "minimize_scalar",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# 21-point Kronrod extension of the 10-point Gauss-Legendre rule (QUADPACK qk21).
_XK_HALF = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WK_HALF = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525478580,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG_HALF = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

GK21_NODES = np.concatenate([-_XK_HALF, _XK_HALF[-2::-1]])
GK21_KRONROD_WEIGHTS = np.concatenate([_WK_HALF, _WK_HALF[-2::-1]])
# Gauss nodes sit at the odd positions of the Kronrod abscissae.
GK21_GAUSS_WEIGHTS = np.zeros(21)
GK21_GAUSS_WEIGHTS[1:10:2] = _WG_HALF
GK21_GAUSS_WEIGHTS[11:20:2] = _WG_HALF[::-1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy controls for the nested integrals.

    Attributes
    ----------
    abs_tol : float
        Target absolute error for each one-dimensional integral.
    inner_half_width : float
        The standard-normal-weighted integral is taken over
        ``[-inner_half_width, inner_half_width]``.
    outer_prob_tail : float
        Probability discarded at each tail of the ``W`` distribution.
    max_subdivisions : int
        Budget of subintervals per one-dimensional integral.
    """

    abs_tol: float = 1e-8
    inner_half_width: float = 8.0
    outer_prob_tail: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.inner_half_width >= 6:
            raise DomainError(f"inner_half_width must be >= 6, got {self.inner_half_width}")
        if not 0 < self.outer_prob_tail <= 1e-8:
            raise DomainError(f"outer_prob_tail must lie in (0, 1e-8], got {self.outer_prob_tail}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be a positive integer, got {self.max_subdivisions}")


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------

def normal_cdf(x):
    """Standard normal distribution function, saturating at 0 and 1."""
    return special.ndtr(x)


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT_2PI


def normal_quantile(q):
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise DomainError("normal quantile needs 0 < q < 1")
    return special.ndtri(q)


def psi(a, b, mu, v):
    """P(a <= Z <= b) for Z ~ N(mu, v); zero when a > b.

    Broadcasts over all arguments.  The difference of distribution
    functions is taken in whichever tail keeps it accurate, chosen by the
    sign of the standardized midpoint so that ``psi(a, b, mu, v)`` and
    ``psi(-b, -a, -mu, v)`` evaluate the same floating-point expression.
    """
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError("psi needs a positive variance")
    sd = np.sqrt(v)
    sa = (np.asarray(a, dtype=float) - mu) / sd
    sb = (np.asarray(b, dtype=float) - mu) / sd
    upper = special.ndtr(-sa) - special.ndtr(-sb)
    lower = special.ndtr(sb) - special.ndtr(sa)
    out = np.where(sa + sb > 0, upper, lower)
    out = np.where(sa > sb, 0.0, np.maximum(out, 0.0))
    return out[()] if out.ndim == 0 else out


def student_t_quantile(m, q):
    """q-quantile of Student's t with ``m`` degrees of freedom."""
    if not m >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {m}")
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise DomainError("t quantile needs 0 < q < 1")
    # via the regularized incomplete beta inverse, which is more accurate
    # than stdtrit in the tails; exact zero at the median and exact oddness
    tail = np.minimum(q, 1.0 - q)
    x = special.betaincinv(0.5 * m, 0.5, 2.0 * tail)
    y = special.betaincinv(0.5, 0.5 * m, 1.0 - 2.0 * tail)
    small = x < 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small, (1.0 - x) / x, y / (1.0 - y))
    out = np.where(q == 0.5, 0.0, np.sign(q - 0.5) * np.sqrt(m * ratio))
    return out[()] if out.ndim == 0 else out


def _log_f_w(w, m):
    half = 0.5 * m
    return (math.log(2.0) + half * math.log(half) - special.gammaln(half)
            + (m - 1) * np.log(w) - half * w * w)


def f_w_pdf(w, m):
    """Density of ``W = sqrt(Q / m)`` with ``Q ~ chi2_m``."""
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("f_w_pdf is defined for w > 0")
    out = np.exp(_log_f_w(w, m))
    return out[()] if out.ndim == 0 else out


def w_quantile(m, q):
    """Quantile of W; ``q`` may be tiny on either side (evaluated in the matching tail)."""
    if q < 0.5:
        qq = 2.0 * special.gammaincinv(0.5 * m, q)
    else:
        qq = 2.0 * special.gammainccinv(0.5 * m, 1.0 - q)
    return math.sqrt(qq / m)


def gamma_ratio_factor(m):
    """``(m/2)^{1/2} Gamma(m/2) / Gamma((m+1)/2)``, i.e. ``1 / E(W)``."""
    if not m >= 1:
        raise DomainError(f"m must be >= 1, got {m}")
    half = 0.5 * m
    return math.exp(0.5 * math.log(half) + special.gammaln(half) - special.gammaln(half + 0.5))


def expected_w(m):
    return 1.0 / gamma_ratio_factor(m)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _gk21(f, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = centre[:, None] + half[:, None] * GK21_NODES[None, :]
    fx = np.asarray(f(nodes.ravel()), dtype=float)
    fx = fx.reshape((lo.size, GK21_NODES.size) + fx.shape[1:])
    scale = half.reshape((-1,) + (1,) * (fx.ndim - 2))
    kronrod = np.tensordot(GK21_KRONROD_WEIGHTS, fx, axes=([0], [1])) * scale
    gauss = np.tensordot(GK21_GAUSS_WEIGHTS, fx, axes=([0], [1])) * scale
    return kronrod, np.abs(kronrod - gauss)


def gauss_kronrod(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-8,
    max_subdivisions: int = 2000,
    initial_pieces: int = 8,
):
    """Adaptive 21-point Gauss-Kronrod integration of a vectorized integrand.

    Each subinterval must bring its error estimate ``|K21 - G10|`` under its
    length-proportional share of ``abs_tol``; the ones that do not are
    bisected, all in the same sweep.  For batched integrands the largest
    component error decides.  Returns ``(value, error)``.

    Raises
    ------
    QuadratureError
        When more than ``max_subdivisions`` subintervals would be needed.
    """
    if not b > a:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    pieces = max(1, min(int(initial_pieces), int(max_subdivisions)))
    edges = np.linspace(a, b, pieces + 1)
    lo, hi = edges[:-1], edges[1:]
    length = b - a
    value = 0.0
    error = 0.0
    n_intervals = pieces
    while True:
        val, err = _gk21(f, lo, hi)
        worst = err.reshape(err.shape[0], -1).max(axis=1) if err.ndim > 1 else err
        budget = abs_tol * (hi - lo) / length
        mid = 0.5 * (lo + hi)
        ok = (worst <= budget) | (mid <= lo) | (mid >= hi)
        value = value + val[ok].sum(axis=0)
        error = error + err[ok].sum(axis=0)
        if ok.all():
            return value, error
        lo_p, hi_p, mid_p = lo[~ok], hi[~ok], mid[~ok]
        n_intervals += lo_p.size
        if n_intervals > max_subdivisions:
            raise QuadratureError(
                "subdivision budget exhausted",
                estimate=value + val[~ok].sum(axis=0),
                error=error + err[~ok].sum(axis=0),
            )
        lo = np.concatenate([lo_p, mid_p])
        hi = np.concatenate([mid_p, hi_p])


def integrate_gauss_weighted(g, spec: QuadratureSpec = QuadratureSpec(), return_error=False):
    """``int g(y) phi(y) dy`` over ``[-H, H]``, ``H = spec.inner_half_width``."""
    h = spec.inner_half_width

    def integrand(y):
        vals = np.asarray(g(y), dtype=float)
        return vals * normal_pdf(y).reshape((-1,) + (1,) * (vals.ndim - 1))

    value, error = gauss_kronrod(integrand, -h, h, spec.abs_tol, spec.max_subdivisions)
    return (value, error) if return_error else value


def integrate_w_weighted(g, m, spec: QuadratureSpec = QuadratureSpec(), return_error=False):
    """``int g(w) f_W(w) dw`` between the ``outer_prob_tail`` quantiles of W."""
    w_lo = w_quantile(m, spec.outer_prob_tail)
    w_hi = w_quantile(m, 1.0 - spec.outer_prob_tail)

    def integrand(w):
        vals = np.asarray(g(w), dtype=float)
        return vals * np.exp(_log_f_w(w, m)).reshape((-1,) + (1,) * (vals.ndim - 1))

    value, error = gauss_kronrod(integrand, w_lo, w_hi, spec.abs_tol, spec.max_subdivisions)
    return (value, error) if return_error else value


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(f, lo, hi, tol=1e-6, grid_points=201):
    """Grid-seeded golden-section minimization on ``[lo, hi]``.

    ``f`` is evaluated on a uniform grid; golden-section search then refines
    inside the two grid cells around the best grid point until the bracket
    is narrower than ``tol``.  Returns ``(argmin, minimum)`` for the
    smallest value seen anywhere, grid points included.
    """
    if not hi > lo:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    grid = np.linspace(lo, hi, max(int(grid_points), 3))
    values = np.array([f(x) for x in grid])
    i = int(np.argmin(values))
    best_x, best_f = float(grid[i]), float(values[i])

    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, grid.size - 1)])
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for x, fx in ((x1, f1), (x2, f2)):
        if fx < best_f:
            best_x, best_f = x, fx
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
            if f1 < best_f:
                best_x, best_f = x1, f1
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
            if f2 < best_f:
                best_x, best_f = x2, f2
    return best_x, float(best_f)
