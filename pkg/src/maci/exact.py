"""Exact finite-sample coverage and scaled expected length of the interval.

Write ``G = (theta_hat - theta) / (sigma v_theta^{1/2})``, ``W = sigma_hat / sigma``
and ``gamma_tilde = tau_hat / (sigma v_tau^{1/2})``.  Then ``(G, gamma_tilde)``
is bivariate normal with means ``(0, gamma)``, unit variances and
correlation ``rho``, independent of ``W``, and the interval covers theta
exactly when ``ell(gamma_tilde, W, rho) <= G <= u(gamma_tilde, W, rho)``.
Conditioning on ``gamma_tilde`` and ``W`` turns the coverage into a double
integral of a normal interval probability, computed here by nested
adaptive quadrature.  No simulation is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._parallel import parallel_map
from .errors import DomainError
from .numeric import (
    QuadratureSpec,
    gamma_ratio_factor,
    integrate_gauss_weighted,
    integrate_w_weighted,
    minimize_scalar,
    psi,
    student_t_quantile,
)
from .weights import RHO_CAP, TestbedConfig, check_rho, k, r

DEFAULT_GAMMA_MAX = 10.0
SEARCH_ABS_TOL = 1e-7


@dataclass(frozen=True)
class ParamPoint:
    gamma: float
    rho: float

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma}")
        if not abs(self.rho) <= RHO_CAP:
            raise DomainError(f"|rho| must not exceed {RHO_CAP}, got {self.rho}")


@dataclass(frozen=True)
class MinCoverageResult:
    c_min: float
    gamma_at_min: float
    grid_points: int


@dataclass(frozen=True)
class CurveRow:
    abs_gamma: float
    cp: float | None = None
    sel: float | None = None


@dataclass
class CurveTable:
    """CP and/or SEL against |gamma| at one correlation, plus the minimum coverage used.

    ``config`` is a :class:`~maci.weights.TestbedConfig` for finite ``m`` or an
    :class:`~maci.asymptotic.AsymptoticConfig` for the limit.
    """

    config: object
    rho: float
    rows: list[CurveRow]
    c_min: float | None = None
    gamma_at_min: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        g = [row.abs_gamma for row in self.rows]
        if any(b <= a for a, b in zip(g, g[1:])):
            raise DomainError("abs_gamma must be strictly increasing")

    @property
    def gammas(self) -> np.ndarray:
        return np.array([row.abs_gamma for row in self.rows])

    @property
    def cp(self) -> np.ndarray:
        return np.array([np.nan if row.cp is None else row.cp for row in self.rows])

    @property
    def sel(self) -> np.ndarray:
        return np.array([np.nan if row.sel is None else row.sel for row in self.rows])


def _t(cfg: TestbedConfig) -> float:
    return float(student_t_quantile(cfg.m, 1.0 - cfg.alpha / 2.0))


def _bounds(h, w, rho, cfg, tq):
    x = h / w
    centre = rho * w * k(x, cfg)
    half = tq * w * r(x, rho, cfg)
    return centre - half, centre + half


def ell(gamma, w, rho, cfg: TestbedConfig):
    """Lower end of the acceptance region for the standardized pivot G."""
    return _bounds(np.asarray(gamma, dtype=float), np.asarray(w, dtype=float), rho, cfg, _t(cfg))[0]


def u(gamma, w, rho, cfg: TestbedConfig):
    """Upper end of the acceptance region for the standardized pivot G."""
    return _bounds(np.asarray(gamma, dtype=float), np.asarray(w, dtype=float), rho, cfg, _t(cfg))[1]


def coverage_probability(point: ParamPoint, cfg: TestbedConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Exact coverage probability CP(gamma, rho)."""
    gamma, rho = point.gamma, point.rho
    tq = _t(cfg)
    var = 1.0 - rho * rho

    def over_w(w):
        w = w[None, :]

        def over_y(y):
            y = y[:, None]
            lo, hi = _bounds(y + gamma, w, rho, cfg, tq)
            return psi(lo, hi, rho * y, var)

        return integrate_gauss_weighted(over_y, quad)

    return float(integrate_w_weighted(over_w, cfg.m, quad))


def expected_scaled_width(point: ParamPoint, cfg: TestbedConfig, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """``E(W r(gamma_tilde / W, rho))``: the expected length over ``2 t sigma v_theta^{1/2}``."""
    gamma, rho = point.gamma, point.rho

    def over_w(w):
        w = w[None, :]

        def over_y(y):
            return w * r((y[:, None] + gamma) / w, rho, cfg)

        return integrate_gauss_weighted(over_y, quad)

    return float(integrate_w_weighted(over_w, cfg.m, quad))


def min_coverage(
    rho: float,
    cfg: TestbedConfig,
    quad: QuadratureSpec = QuadratureSpec(),
    gamma_max: float = DEFAULT_GAMMA_MAX,
    grid_points: int = 201,
    tol: float = 1e-6,
) -> MinCoverageResult:
    """Minimum of CP(gamma, rho) over ``0 <= gamma <= gamma_max``.

    CP is even in gamma, so only nonnegative gamma is searched.  The search
    runs at a looser quadrature tolerance; the reported minimum is
    re-evaluated at ``quad``.
    """
    check_rho(rho)
    if not gamma_max > 0:
        raise DomainError(f"gamma_max must be positive, got {gamma_max}")
    search = replace(quad, abs_tol=max(quad.abs_tol, SEARCH_ABS_TOL))
    argmin, _ = minimize_scalar(
        lambda g: coverage_probability(ParamPoint(g, rho), cfg, search),
        0.0, gamma_max, tol=tol, grid_points=grid_points)
    c_min = coverage_probability(ParamPoint(argmin, rho), cfg, quad)
    return MinCoverageResult(c_min=c_min, gamma_at_min=argmin, grid_points=grid_points)


def scaled_expected_length(
    point: ParamPoint,
    cfg: TestbedConfig,
    c_min: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """SEL(gamma, rho) relative to the full-model t interval with coverage ``c_min``.

    ``c_min`` comes from :func:`min_coverage` at the same ``rho`` and ``cfg``.
    """
    if not 0 < c_min < 1:
        raise DomainError(f"c_min must lie in (0, 1), got {c_min}")
    ratio = _t(cfg) / float(student_t_quantile(cfg.m, (1.0 + c_min) / 2.0))
    return ratio * gamma_ratio_factor(cfg.m) * expected_scaled_width(point, cfg, quad)


def default_gamma_grid(gamma_max: float = DEFAULT_GAMMA_MAX, step: float = 0.1) -> np.ndarray:
    if not step > 0 or not gamma_max > 0:
        raise DomainError("gamma_max and step must be positive")
    n = int(math.floor(gamma_max / step + 1e-9))
    return np.round(np.arange(n + 1) * step, 12)


def sweep_curve(
    rho: float,
    cfg: TestbedConfig,
    gammas=None,
    quad: QuadratureSpec = QuadratureSpec(),
    cp: bool = True,
    sel: bool = True,
    gamma_max: float = DEFAULT_GAMMA_MAX,
) -> CurveTable:
    """CP and SEL on a grid of |gamma| values.

    The minimum coverage is found first (SEL is defined relative to it) and
    stored on the table; the grid points are then evaluated independently.
    """
    check_rho(rho)
    gammas = default_gamma_grid(gamma_max) if gammas is None else np.asarray(gammas, dtype=float)
    if gammas.size == 0:
        raise DomainError("gamma grid is empty")
    if np.any(gammas < 0) or np.any(np.diff(gammas) <= 0):
        raise DomainError("gamma grid must be nonnegative and strictly increasing")
    mc = min_coverage(rho, cfg, quad, gamma_max=gamma_max)
    c_min = mc.c_min

    def row(g):
        point = ParamPoint(float(g), rho)
        return CurveRow(
            abs_gamma=float(g),
            cp=coverage_probability(point, cfg, quad) if cp else None,
            sel=scaled_expected_length(point, cfg, c_min, quad) if sel else None,
        )

    rows = parallel_map(row, gammas)
    return CurveTable(config=cfg, rho=rho, rows=rows, c_min=c_min, gamma_at_min=mc.gamma_at_min)
