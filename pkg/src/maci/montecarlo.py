"""Monte Carlo estimates of coverage and scaled expected length.

Two independent routes to the quantities computed by quadrature in
:mod:`maci.exact`:

* the reduced form, which draws ``(G, gamma_tilde)`` bivariate normal and
  ``W = sqrt(Q / m)`` and checks ``ell <= G <= u`` directly;
* the full regression pipeline, which simulates response vectors,
  refits and rebuilds the interval with :mod:`maci.testbed`.

Randomness is keyed by replicate index: replicates are cut into fixed
blocks and block ``b`` draws from a Philox stream whose counter starts at
``b``.  Per-block sums are merged in block order, so estimates are
bit-identical for a given seed whatever the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._parallel import parallel_map
from .errors import DomainError
from .exact import ParamPoint, _bounds, _t
from .numeric import expected_w, student_t_quantile
from .testbed import RegressionProblem, derived_scalars, fit_columns, interval_from_estimates
from .weights import TestbedConfig, r

BLOCK_SIZE = 1 << 16
CHI2_BY_SUMS_MAX_DF = 50
_HALF_ULP = 2.0 ** -54


@dataclass(frozen=True)
class McSettings:
    replicates: int = 1_000_000
    seed: int = 20190101
    antithetic: bool = False

    def __post_init__(self):
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise DomainError(f"replicates must be a positive integer, got {self.replicates}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.antithetic and self.replicates % 2:
            raise DomainError("antithetic sampling needs an even number of replicates")


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_err: float
    replicates: int

    def __iter__(self):
        yield self.estimate
        yield self.std_err


def _blocks(replicates):
    return [(b, min(BLOCK_SIZE, replicates - b * BLOCK_SIZE))
            for b in range(-(-replicates // BLOCK_SIZE))]


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(block)]))


def _normals(gen, shape):
    # inverse-cdf transform; the half-ulp offset keeps u strictly inside (0, 1)
    return special.ndtri(gen.random(shape) + _HALF_ULP)


def _w_draws(gen, m, size):
    if m <= CHI2_BY_SUMS_MAX_DF:
        z = _normals(gen, (size, m))
        q = np.einsum("ij,ij->i", z, z)
    else:
        q = 2.0 * gen.standard_gamma(0.5 * m, size)
    return np.sqrt(q / m)


def _draw_block(point: ParamPoint, m: int, settings: McSettings, block: int, size: int):
    gen = block_generator(settings.seed, block)
    base = size // 2 if settings.antithetic else size
    z = _normals(gen, (2, base))
    if settings.antithetic:
        z = np.concatenate([z, -z], axis=1)
    w = _w_draws(gen, m, base)
    if settings.antithetic:
        w = np.concatenate([w, w])
    rho = point.rho
    g = z[0]
    gamma_tilde = point.gamma + rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1]
    return g, gamma_tilde, w


def sample_joint(point: ParamPoint, cfg: TestbedConfig, settings: McSettings):
    """Yield blocks of draws ``(g, gamma_tilde, w)``.

    ``g`` is the standardized pivot ``(theta_hat - theta) / (sigma v_theta^{1/2})``;
    ``(g, gamma_tilde)`` has means ``(0, gamma)``, unit variances and
    correlation ``rho``; ``w`` is independent with the law of ``sqrt(chi2_m / m)``.
    With antithetic sampling each block holds its draws followed by their
    mirror images (same ``w``).
    """
    for block, size in _blocks(settings.replicates):
        yield _draw_block(point, cfg.m, settings, block, size)


def _moments(values, antithetic):
    # pair means are the independent units under antithetic sampling
    units = 0.5 * (values[: values.size // 2] + values[values.size // 2:]) if antithetic else values
    mean = float(units.mean())
    return units.size, mean, float(((units - mean) ** 2).sum())


def _merge(parts):
    # Chan et al. pairwise update, applied in block order
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        if nb == 0:
            continue
        delta = mb - mean
        total = n + nb
        mean += delta * nb / total
        m2 += m2b + delta * delta * n * nb / total
        n = total
    return n, mean, m2


def _run(point, cfg, settings, statistic):
    def one(block_and_size):
        block, size = block_and_size
        g, gamma_tilde, w = _draw_block(point, cfg.m, settings, block, size)
        return _moments(statistic(g, gamma_tilde, w), settings.antithetic)

    n, mean, m2 = _merge(parallel_map(one, _blocks(settings.replicates)))
    return mean, math.sqrt(m2 / max(n - 1, 1) / n) if n > 1 else 0.0


def mc_coverage(point: ParamPoint, cfg: TestbedConfig, settings: McSettings = McSettings()) -> McEstimate:
    """Fraction of draws with ``ell(gamma_tilde, W, rho) <= G <= u(gamma_tilde, W, rho)``."""
    tq = _t(cfg)

    def covered(g, gamma_tilde, w):
        lo, hi = _bounds(gamma_tilde, w, point.rho, cfg, tq)
        return ((lo <= g) & (g <= hi)).astype(float)

    mean, se = _run(point, cfg, settings, covered)
    if not settings.antithetic:
        se = math.sqrt(mean * (1.0 - mean) / settings.replicates)
    # a zero binomial variance would make every comparison vacuous
    se = max(se, 1.0 / settings.replicates)
    return McEstimate(mean, se, settings.replicates)


def mc_sel(point: ParamPoint, cfg: TestbedConfig, c_min: float,
           settings: McSettings = McSettings()) -> McEstimate:
    """Scaled expected length from the sample mean of ``W r(gamma_tilde / W, rho)``.

    ``E(W)`` enters in closed form, so the standard error is the scaled
    standard error of that sample mean.
    """
    if not 0 < c_min < 1:
        raise DomainError(f"c_min must lie in (0, 1), got {c_min}")
    factor = _t(cfg) / float(student_t_quantile(cfg.m, (1.0 + c_min) / 2.0)) / expected_w(cfg.m)
    mean, se = _run(point, cfg, settings, lambda g, gamma_tilde, w: w * r(gamma_tilde / w, point.rho, cfg))
    return McEstimate(factor * mean, max(factor * se, 1e-300), settings.replicates)


# ---------------------------------------------------------------------------
# full regression pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionTemplate:
    """Fixed design and contrasts for simulating whole datasets."""

    X: np.ndarray
    a: np.ndarray
    c: np.ndarray
    t: float = 0.0
    sigma: float = 1.0

    def problem(self, y=None) -> RegressionProblem:
        y = np.zeros(self.X.shape[0]) if y is None else y
        return RegressionProblem(X=self.X, y=y, a=self.a, c=self.c, t=self.t)


@dataclass(frozen=True)
class EndToEndResult:
    coverage: float
    coverage_se: float
    mean_length: float
    length_se: float
    rho: float
    replicates: int

    def __iter__(self):
        yield self.coverage
        yield self.mean_length


def engineered_template(m: int, p: int, rho: float, sigma: float = 1.0, seed: int = 0) -> RegressionTemplate:
    """A design with orthonormal columns and contrasts at correlation exactly ``rho``.

    ``X'X = I``, ``a = e1`` and ``c = rho e1 + (1 - rho^2)^{1/2} e2``, so
    ``v_theta = v_tau = 1``.
    """
    if p < 2:
        raise DomainError("two linearly independent contrasts need p >= 2")
    n = m + p
    Q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))
    a = np.zeros(p)
    a[0] = 1.0
    c = np.zeros(p)
    c[0], c[1] = rho, math.sqrt(1.0 - rho * rho)
    return RegressionTemplate(X=Q, a=a, c=c, t=0.0, sigma=sigma)


def true_beta(template: RegressionTemplate, theta: float, gamma: float) -> np.ndarray:
    """Minimum-norm beta with ``a'beta = theta`` and ``c'beta - t = gamma sigma v_tau^{1/2}``."""
    scalars = derived_scalars(template.problem())
    tau = gamma * template.sigma * math.sqrt(scalars.v_tau)
    A = np.vstack([template.a, template.c])
    return A.T @ np.linalg.solve(A @ A.T, np.array([theta, tau + template.t]))


def mc_regression_end_to_end(
    template: RegressionTemplate,
    theta_true: float,
    gamma_true: float,
    cfg: TestbedConfig,
    settings: McSettings = McSettings(replicates=100_000),
) -> EndToEndResult:
    """Coverage and mean length of the interval over simulated datasets.

    Responses are drawn from the full model at the ``beta`` given by
    :func:`true_beta`; every dataset is refitted and its interval built by
    the same arithmetic as :func:`maci.testbed.bba_interval`.
    """
    X = template.X
    n, p = X.shape
    if cfg.m != n - p or cfg.p != p:
        raise DomainError(f"config (m={cfg.m}, p={cfg.p}) does not match template (n={n}, p={p})")
    scalars = derived_scalars(template.problem())
    beta = true_beta(template, theta_true, gamma_true)
    mean_y = X @ beta
    tq = float(student_t_quantile(cfg.m, 1.0 - cfg.alpha / 2.0))

    def one(block_and_size):
        block, size = block_and_size
        gen = block_generator(settings.seed, block)
        base = size // 2 if settings.antithetic else size
        eps = _normals(gen, (n, base))
        if settings.antithetic:
            eps = np.concatenate([eps, -eps], axis=1)
        Y = mean_y[:, None] + template.sigma * eps
        beta_hat, sigma2 = fit_columns(X, Y)
        theta_hat = template.a @ beta_hat
        tau_hat = template.c @ beta_hat - template.t
        centre, se, _, _ = interval_from_estimates(theta_hat, tau_hat, np.sqrt(sigma2), scalars, cfg)
        covered = (np.abs(centre - theta_true) <= tq * se).astype(float)
        return (_moments(covered, settings.antithetic),
                _moments(2.0 * tq * se, settings.antithetic))

    parts = parallel_map(one, _blocks(settings.replicates))
    nc, cov, m2c = _merge([c for c, _ in parts])
    nl, length, m2l = _merge([l for _, l in parts])
    if settings.antithetic:
        cov_se = math.sqrt(m2c / max(nc - 1, 1) / nc)
    else:
        cov_se = math.sqrt(cov * (1.0 - cov) / settings.replicates)
    return EndToEndResult(
        coverage=cov,
        coverage_se=max(cov_se, 1.0 / settings.replicates),
        mean_length=length,
        length_se=math.sqrt(m2l / max(nl - 1, 1) / nl),
        rho=scalars.rho,
        replicates=settings.replicates,
    )
