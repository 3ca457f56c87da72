"""
The model-averaged interval on one dataset
==========================================

Fit a small regression, then build the interval centred on the
AIC-weighted average of the full-model and simpler-model estimates of
theta = a'beta.  The simpler model imposes c'beta = t.
"""

from pathlib import Path

import numpy as np

from maci import RegressionProblem, TestbedConfig, bba_interval, rss1_identity_check

# a 20 x 3 design: intercept, one normal and one uniform covariate
rng = np.random.default_rng(20240607)
n, p = 20, 3
X = np.column_stack([np.ones(n), rng.normal(size=n), rng.uniform(-1, 1, size=n)])
y = X @ np.array([1.0, 0.5, 0.35]) + 0.8 * rng.normal(size=n)

# theta is the intercept; the simpler model drops the third coefficient
problem = RegressionProblem(X=X, y=y, a=[1, 0, 0], c=[0, 0, 1], t=0.0)
cfg = TestbedConfig(m=n - p, p=p, d=2.0, alpha=0.05)
res = bba_interval(problem, cfg)

print(f"rho between theta_hat and tau_hat: {res.scalars.rho:.4f}")
print(f"full-model estimate     {res.theta_hat:.6f}")
print(f"simpler-model estimate  {res.theta_hat_1:.6f}")
print(f"weight on simpler model {res.w1_value:.4f}  (gamma_hat = {res.gamma_hat:.4f})")
print(f"model-averaged centre   {res.theta_tilde:.6f}")
print(f"interval                [{res.lower:.6f}, {res.upper:.6f}]")

# the restricted fit's RSS exceeds the full one by tau_hat^2 / v_tau
rss1, rss2 = rss1_identity_check(problem)
print(f"RSS1 - RSS2 = {rss1 - rss2:.6f}, tau_hat^2 / v_tau = {res.tau_hat ** 2 / res.scalars.v_tau:.6f}")

# the same dataset ships with the tests as a problem file, usable from the CLI:
#   maci interval --data tests/data/reference_problem.txt
print(Path(__file__).resolve().parents[1] / "tests" / "data" / "reference_problem.txt")
