"""Model-averaging weight of the simpler model and the kernels built from it.

With ``x`` the estimated scaled distance between the two nested models,
the weight obtained by exponentiating ``-GIC/2`` is

    w1(x) = 1 / (1 + (1 + x^2/m)^((m+p)/2) * exp(-d/2)).

``k(x) = x w1(x)`` shifts the interval centre and ``r(x, rho)`` scales
the half-width.  The starred versions are the m -> infinity limits.
All functions broadcast over array arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DomainError

RHO_CAP = 0.999999


@dataclass(frozen=True)
class TestbedConfig:
    """Residual df ``m``, regressor count ``p``, GIC penalty ``d``, and ``alpha``.

    ``d = 2`` gives AIC weights, ``d = log(m + p)`` BIC weights.  The
    nominal coverage of the interval is ``1 - alpha``.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    m: int
    p: int
    d: float = 2.0
    alpha: float = 0.05

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be an integer >= 1, got {self.m}")
        if int(self.p) != self.p or self.p < 1:
            raise DomainError(f"p must be an integer >= 1, got {self.p}")
        if not self.d > 0:
            raise DomainError(f"d must be positive, got {self.d}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def n(self) -> int:
        return self.m + self.p

    @classmethod
    def bic(cls, m: int, p: int, alpha: float = 0.05) -> "TestbedConfig":
        return cls(m=m, p=p, d=math.log(m + p), alpha=alpha)


def check_rho(rho, name="rho"):
    if np.any(np.abs(rho) > RHO_CAP):
        raise DomainError(f"|{name}| must not exceed {RHO_CAP}, got {rho}")


def _log_odds(x, cfg: TestbedConfig):
    # log of (1 + x^2/m)^((m+p)/2) e^{-d/2}; stays finite where the power overflows
    x = np.asarray(x, dtype=float)
    return 0.5 * (cfg.m + cfg.p) * np.log1p(x * x / cfg.m) - 0.5 * cfg.d


def w1(x, cfg: TestbedConfig):
    """Weight given to the simpler model."""
    return expit(-_log_odds(x, cfg))


def k(x, cfg: TestbedConfig):
    return np.asarray(x, dtype=float) * w1(x, cfg)


def _r_from_weight(x, rho, w, v, inner):
    # w is w1(x), v = 1 - w1(x); the smaller of the two is recomputed from
    # the larger so that w + v == 1 exactly (1 - t is exact for t >= 1/2)
    big = w >= 0.5
    w, v = np.where(big, w, 1.0 - v), np.where(big, 1.0 - w, v)
    x2 = x * x
    rho2 = rho * rho
    return (w * np.sqrt(inner * (1.0 - rho2) + v * v * rho2 * x2)
            + v * np.sqrt(1.0 + w * w * rho2 * x2))


def r(x, rho, cfg: TestbedConfig):
    """Standard-error kernel: se = sigma_hat * v_theta^{1/2} * r(gamma_hat, rho)."""
    check_rho(rho)
    x = np.asarray(x, dtype=float)
    z = _log_odds(x, cfg)
    w, v = expit(-z), expit(z)
    return _r_from_weight(x, rho, w, v, (cfg.m + x * x) / (cfg.m + 1))


def w1_star(x, d=2.0):
    x = np.asarray(x, dtype=float)
    return expit(-0.5 * (x * x - d))


def k_star(x, d=2.0):
    return np.asarray(x, dtype=float) * w1_star(x, d)


def r_star(x, rho_bar, d=2.0):
    check_rho(rho_bar, "rho_bar")
    x = np.asarray(x, dtype=float)
    z = 0.5 * (x * x - d)
    return _r_from_weight(x, rho_bar, expit(-z), expit(z), 1.0)
