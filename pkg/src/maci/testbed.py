"""The model-averaged interval computed from regression data.

A :class:`RegressionProblem` holds the design ``X``, responses ``y`` and
the contrasts defining ``theta = a'beta`` and ``tau = c'beta - t``.  The
simpler model imposes ``tau = 0``.  :func:`bba_interval` fits the full
model, averages the two estimates of ``theta`` with GIC weights and
returns the interval together with every intermediate statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateError, DomainError, ProblemFileError, SingularDesignError
from .numeric import student_t_quantile
from .weights import TestbedConfig, k, r, w1

_RHO_DEGENERATE = 1.0 - 1e-12
_SIGMA2_FLOOR = 1e-300


@dataclass(frozen=True)
class RegressionProblem:
    X: np.ndarray
    y: np.ndarray
    a: np.ndarray
    c: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).ravel()
        c = np.asarray(self.c, dtype=float).ravel()
        n, p = X.shape
        if y.size != n:
            raise DomainError(f"y has {y.size} entries, X has {n} rows")
        if a.size != p or c.size != p:
            raise DomainError(f"a and c must have p={p} entries")
        if n <= p:
            raise DomainError(f"need n > p, got n={n}, p={p}")
        if not np.any(a):
            raise DomainError("a must be nonzero")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.n - self.p


@dataclass(frozen=True)
class DerivedScalars:
    """Variances of the two contrast estimators (in units of sigma^2) and their correlation."""

    v_theta: float
    v_tau: float
    rho: float
    m: int


@dataclass(frozen=True)
class IntervalResult:
    theta_hat: float
    theta_hat_1: float
    theta_tilde: float
    tau_hat: float
    sigma_hat: float
    gamma_hat: float
    w1_value: float
    se: float
    t_quantile: float
    lower: float
    upper: float
    scalars: DerivedScalars

    @property
    def half_width(self) -> float:
        return self.t_quantile * self.se


def _qr(X):
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    if diag.min() <= X.shape[0] * np.finfo(float).eps * diag.max():
        raise SingularDesignError("design matrix is rank deficient")
    return Q, R


def fit_columns(X, Y):
    """Least squares for every column of ``Y`` (n x B) against one design.

    Returns ``(beta_hat, sigma_hat2)`` of shapes (p, B) and (B,).
    """
    n, p = X.shape
    Q, R = _qr(X)
    beta = np.linalg.solve(R, Q.T @ Y)
    resid = Y - X @ beta
    return beta, np.einsum("ij,ij->j", resid, resid) / (n - p)


def fit(problem: RegressionProblem):
    """Least squares through a QR factorization.

    Returns ``(beta_hat, sigma_hat2)`` with ``sigma_hat2 = RSS / (n - p)``.
    """
    beta, sigma2 = fit_columns(problem.X, problem.y[:, None])
    return beta[:, 0], float(sigma2[0])


def _xtx_inverse(X):
    _, R = _qr(X)
    Rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    return Rinv @ Rinv.T


def derived_scalars(problem: RegressionProblem) -> DerivedScalars:
    G = _xtx_inverse(problem.X)
    a, c = problem.a, problem.c
    v_theta = float(a @ G @ a)
    v_tau = float(c @ G @ c)
    if v_tau <= 0:
        raise DegenerateError("c must be nonzero")
    rho = float(a @ G @ c) / math.sqrt(v_theta * v_tau)
    if abs(rho) >= _RHO_DEGENERATE:
        raise DegenerateError(f"a and c are linearly dependent (rho={rho})")
    return DerivedScalars(v_theta=v_theta, v_tau=v_tau, rho=rho, m=problem.m)


def theta_hat_1(theta_hat, tau_hat, scalars: DerivedScalars):
    """Estimate of theta under the simpler model."""
    return theta_hat - scalars.rho * math.sqrt(scalars.v_theta) * tau_hat / math.sqrt(scalars.v_tau)


def _check_cfg(problem, cfg):
    if cfg.m != problem.m or cfg.p != problem.p:
        raise DomainError(
            f"config (m={cfg.m}, p={cfg.p}) does not match problem (m={problem.m}, p={problem.p})")


def interval_from_estimates(theta_hat, tau_hat, sigma_hat, scalars: DerivedScalars, cfg: TestbedConfig):
    """Centre and half-width of the interval from the full-model estimates.

    Works elementwise on arrays, which lets simulation code push many
    replicate datasets through the same arithmetic as :func:`bba_interval`.
    Returns ``(theta_tilde, se, gamma_hat, w1_value)``.
    """
    sv_theta = math.sqrt(scalars.v_theta)
    gamma_hat = tau_hat / (sigma_hat * math.sqrt(scalars.v_tau))
    theta_tilde = theta_hat - scalars.rho * sv_theta * sigma_hat * k(gamma_hat, cfg)
    se = sigma_hat * sv_theta * r(gamma_hat, scalars.rho, cfg)
    return theta_tilde, se, gamma_hat, w1(gamma_hat, cfg)


def bba_interval(problem: RegressionProblem, cfg: TestbedConfig) -> IntervalResult:
    """Confidence interval for theta centred on the model-averaged estimate.

    Raises
    ------
    DegenerateError
        If the residual variance estimate is zero (to rounding), so that
        the scaled distance estimate is undefined.
    """
    _check_cfg(problem, cfg)
    beta, sigma2 = fit(problem)
    scale = problem.n * np.finfo(float).eps * float(np.linalg.norm(problem.y))
    if sigma2 < _SIGMA2_FLOOR or sigma2 * problem.m <= scale * scale:
        raise DegenerateError("residual variance estimate is zero; the data fit exactly")
    scalars = derived_scalars(problem)
    theta_hat = float(problem.a @ beta)
    tau_hat = float(problem.c @ beta) - problem.t
    sigma_hat = math.sqrt(sigma2)
    theta_tilde, se, gamma_hat, weight = interval_from_estimates(
        theta_hat, tau_hat, sigma_hat, scalars, cfg)
    tq = float(student_t_quantile(cfg.m, 1.0 - cfg.alpha / 2.0))
    theta_tilde, se = float(theta_tilde), float(se)
    return IntervalResult(
        theta_hat=theta_hat,
        theta_hat_1=theta_hat_1(theta_hat, tau_hat, scalars),
        theta_tilde=theta_tilde,
        tau_hat=tau_hat,
        sigma_hat=sigma_hat,
        gamma_hat=float(gamma_hat),
        w1_value=float(weight),
        se=se,
        t_quantile=tq,
        lower=theta_tilde - tq * se,
        upper=theta_tilde + tq * se,
        scalars=scalars,
    )


def rss1_identity_check(problem: RegressionProblem):
    """Residual sums of squares of the constrained and the full fit.

    The constrained fit imposes ``c'beta = t`` by solving the constraint
    for the coordinate where ``|c|`` is largest and regressing on the rest.
    Returns ``(rss1, rss2)``; they satisfy ``rss1 = tau_hat^2 / v_tau + rss2``.
    """
    _, sigma2 = fit(problem)
    rss2 = sigma2 * problem.m
    X, c = problem.X, problem.c
    j = int(np.argmax(np.abs(c)))
    if c[j] == 0:
        raise DegenerateError("c must be nonzero")
    keep = np.arange(problem.p) != j
    y_adj = problem.y - X[:, j] * (problem.t / c[j])
    Z = X[:, keep] - np.outer(X[:, j], c[keep] / c[j])
    if Z.shape[1] == 0:
        resid = y_adj
    else:
        Q, R = _qr(Z)
        gamma = np.linalg.solve(R, Q.T @ y_adj)
        resid = y_adj - Z @ gamma
    return float(resid @ resid), rss2


# ---------------------------------------------------------------------------
# problem files
# ---------------------------------------------------------------------------

def _tokens(lines):
    for lineno, line in lines:
        for tok in line.split():
            yield lineno, tok


def _to_float(tok, lineno, what):
    try:
        return float(tok)
    except ValueError:
        raise ProblemFileError(f"cannot parse {tok!r} as a real number in section {what!r}", lineno) from None


def parse_problem(text: str) -> RegressionProblem:
    """Parse the plain-text problem format.

    Layout: a header ``n p``; ``n`` lines of ``p`` reals (rows of X);
    then ``n`` reals (y), ``p`` reals (a), ``p`` reals (c) and one real
    (t), which may be spread over lines freely.  Blank lines and text
    after ``#`` are ignored.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))
    if not lines:
        raise ProblemFileError("empty file: missing header 'n p'")

    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise ProblemFileError(f"header must be 'n p', got {header!r}", lineno)
    try:
        n, p = int(parts[0]), int(parts[1])
    except ValueError:
        raise ProblemFileError(f"header must hold two integers, got {header!r}", lineno) from None
    if n < 1 or p < 1:
        raise ProblemFileError(f"n and p must be positive, got n={n}, p={p}", lineno)

    if len(lines) - 1 < n:
        last = lines[-1][0]
        raise ProblemFileError(
            f"truncated file: section 'X' needs {n} rows, found {len(lines) - 1}", last)
    X = np.empty((n, p))
    for i in range(n):
        lineno, body = lines[1 + i]
        row = body.split()
        if len(row) != p:
            raise ProblemFileError(f"row {i + 1} of X has {len(row)} values, expected {p}", lineno)
        X[i] = [_to_float(tok, lineno, "X") for tok in row]

    stream = _tokens(lines[1 + n:])
    last_line = lines[n][0]
    sections = {}
    for name, size in (("y", n), ("a", p), ("c", p), ("t", 1)):
        vals = []
        for _ in range(size):
            try:
                lineno, tok = next(stream)
            except StopIteration:
                raise ProblemFileError(
                    f"truncated file: section {name!r} needs {size} values, found {len(vals)}",
                    last_line) from None
            last_line = lineno
            vals.append(_to_float(tok, lineno, name))
        sections[name] = vals
    extra = next(stream, None)
    if extra is not None:
        raise ProblemFileError(f"unexpected trailing value {extra[1]!r}", extra[0])

    try:
        return RegressionProblem(X=X, y=sections["y"], a=sections["a"], c=sections["c"],
                                 t=sections["t"][0])
    except DomainError as exc:
        raise ProblemFileError(str(exc)) from None


def read_problem(path) -> RegressionProblem:
    return parse_problem(Path(path).read_text(encoding="utf-8"))


def format_problem(problem: RegressionProblem) -> str:
    fmt = lambda v: repr(float(v))  # noqa: E731 - round-trips exactly
    out = [f"{problem.n} {problem.p}"]
    out += [" ".join(fmt(v) for v in row) for row in problem.X]
    out += [" ".join(fmt(v) for v in problem.y)]
    out += [" ".join(fmt(v) for v in problem.a)]
    out += [" ".join(fmt(v) for v in problem.c)]
    out += [fmt(problem.t)]
    return "\n".join(out) + "\n"


def write_problem(problem: RegressionProblem, path) -> None:
    Path(path).write_text(format_problem(problem), encoding="utf-8")
