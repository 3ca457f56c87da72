"""Limits of coverage and scaled expected length as the residual df grow.

With ``p`` fixed and ``m -> infinity``, ``W -> 1``, the t quantiles become
normal quantiles and the weight kernels converge to their starred forms,
so both performance measures reduce to a single integral over the
standardized distance.  ``rho_bar`` is the limiting correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._parallel import parallel_map
from .errors import DomainError
from .exact import (
    DEFAULT_GAMMA_MAX,
    SEARCH_ABS_TOL,
    CurveRow,
    CurveTable,
    MinCoverageResult,
    default_gamma_grid,
)
from .numeric import QuadratureSpec, integrate_gauss_weighted, minimize_scalar, normal_quantile, psi
from .weights import RHO_CAP, k_star, r_star

HC_RHO_VALUES = (2.0 / 3.0, 1.0)


@dataclass(frozen=True)
class AsymptoticConfig:
    rho_bar: float
    d: float = 2.0
    alpha: float = 0.05

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError(f"d must be positive, got {self.d}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not abs(self.rho_bar) <= RHO_CAP:
            raise DomainError(f"|rho_bar| must not exceed {RHO_CAP}, got {self.rho_bar}")


def _z(alpha):
    return float(normal_quantile(1.0 - alpha / 2.0))


def cp_star(gamma: float, acfg: AsymptoticConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Limiting coverage probability at distance ``gamma``."""
    rho, d = acfg.rho_bar, acfg.d
    z = _z(acfg.alpha)
    var = 1.0 - rho * rho

    def over_y(y):
        h = y + gamma
        centre = rho * k_star(h, d)
        half = z * r_star(h, rho, d)
        return psi(centre - half, centre + half, rho * y, var)

    return float(integrate_gauss_weighted(over_y, quad))


def c_min_star(
    acfg: AsymptoticConfig,
    quad: QuadratureSpec = QuadratureSpec(),
    gamma_max: float = DEFAULT_GAMMA_MAX,
    grid_points: int = 201,
    tol: float = 1e-6,
) -> MinCoverageResult:
    """Minimum over ``0 <= gamma <= gamma_max`` of the limiting coverage."""
    if not gamma_max > 0:
        raise DomainError(f"gamma_max must be positive, got {gamma_max}")
    search = replace(quad, abs_tol=max(quad.abs_tol, SEARCH_ABS_TOL))
    argmin, _ = minimize_scalar(lambda g: cp_star(g, acfg, search), 0.0, gamma_max,
                                tol=tol, grid_points=grid_points)
    return MinCoverageResult(c_min=cp_star(argmin, acfg, quad), gamma_at_min=argmin,
                             grid_points=grid_points)


def sel_star(gamma: float, acfg: AsymptoticConfig, c_min_star: float,
             quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Limiting scaled expected length, relative to the z interval with coverage ``c_min_star``."""
    if not 0 < c_min_star < 1:
        raise DomainError(f"c_min_star must lie in (0, 1), got {c_min_star}")
    ratio = _z(acfg.alpha) / float(normal_quantile((1.0 + c_min_star) / 2.0))
    integral = integrate_gauss_weighted(lambda y: r_star(y + gamma, acfg.rho_bar, acfg.d), quad)
    return ratio * float(integral)


def rho_hc_to_rho_bar(rho_hc: float) -> float:
    """Convert the Hjort-Claeskens correlation parameter to the limiting correlation."""
    if not math.isfinite(rho_hc):
        raise DomainError(f"rho_hc must be finite, got {rho_hc}")
    return -rho_hc / math.sqrt(1.0 + rho_hc * rho_hc)


def rho_bar_to_rho_hc(rho_bar: float) -> float:
    if not abs(rho_bar) < 1:
        raise DomainError(f"|rho_bar| must be below 1, got {rho_bar}")
    return -rho_bar / math.sqrt(1.0 - rho_bar * rho_bar)


def sweep_curve_star(
    acfg: AsymptoticConfig,
    gammas=None,
    quad: QuadratureSpec = QuadratureSpec(),
    cp: bool = True,
    sel: bool = True,
    gamma_max: float = DEFAULT_GAMMA_MAX,
) -> CurveTable:
    """Limiting CP and SEL on a grid of |gamma|; ``c_min_star`` is found first."""
    gammas = default_gamma_grid(gamma_max) if gammas is None else np.asarray(gammas, dtype=float)
    if gammas.size == 0 or np.any(gammas < 0) or np.any(np.diff(gammas) <= 0):
        raise DomainError("gamma grid must be nonempty, nonnegative and strictly increasing")
    c_min = gamma_at_min = None
    if sel:
        mc = c_min_star(acfg, quad, gamma_max=gamma_max)
        c_min, gamma_at_min = mc.c_min, mc.gamma_at_min

    def row(g):
        g = float(g)
        return CurveRow(
            abs_gamma=g,
            cp=cp_star(g, acfg, quad) if cp else None,
            sel=sel_star(g, acfg, c_min, quad) if sel else None,
        )

    rows = parallel_map(row, gammas)
    return CurveTable(config=acfg, rho=acfg.rho_bar, rows=rows, c_min=c_min, gamma_at_min=gamma_at_min)


def hc_figure_curves(quad: QuadratureSpec = QuadratureSpec(), gammas=None, alpha: float = 0.1, d: float = 2.0):
    """Limiting coverage curves at the two Hjort-Claeskens settings ``rho_hc`` = 2/3 and 1.

    Returns two :class:`CurveTable` values (CP only), at ``|rho_bar|`` =
    2/sqrt(13) and 1/sqrt(2), with nominal coverage ``1 - alpha``.
    """
    out = []
    for rho_hc in HC_RHO_VALUES:
        rho_bar = abs(rho_hc_to_rho_bar(rho_hc))
        table = sweep_curve_star(AsymptoticConfig(rho_bar=rho_bar, d=d, alpha=alpha),
                                 gammas=gammas, quad=quad, sel=False)
        table.metadata["rho_hc"] = rho_hc
        out.append(table)
    return tuple(out)
