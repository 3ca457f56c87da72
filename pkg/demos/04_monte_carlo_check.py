"""
Checking the quadrature by simulation
=====================================

Three routes to the same coverage probability: the exact double
integral, a Monte Carlo estimate in the reduced (G, gamma_tilde, W)
form, and whole simulated regression datasets pushed through the
interval construction.
"""

from maci import (
    McSettings,
    ParamPoint,
    TestbedConfig,
    coverage_probability,
    engineered_template,
    mc_coverage,
    mc_regression_end_to_end,
    mc_sel,
    min_coverage,
    scaled_expected_length,
)

cfg = TestbedConfig(m=10, p=3)
point = ParamPoint(gamma=3.0, rho=0.9)

exact = coverage_probability(point, cfg)
reduced = mc_coverage(point, cfg, McSettings(replicates=1_000_000, seed=1))
print(f"exact CP           {exact:.5f}")
print(f"reduced-form MC    {reduced.estimate:.5f} +- {reduced.std_err:.5f}")

# a design built so that v_theta = v_tau = 1 and rho = 0.9 exactly
template = engineered_template(m=10, p=3, rho=0.9)
full = mc_regression_end_to_end(template, theta_true=0.0, gamma_true=3.0, cfg=cfg)
print(f"full-regression MC {full.coverage:.5f} +- {full.coverage_se:.5f}")

# the expected length, relative to the t interval with coverage c_min
c_min = min_coverage(0.9, cfg).c_min
sel = scaled_expected_length(point, cfg, c_min)
est = mc_sel(point, cfg, c_min, McSettings(replicates=1_000_000, seed=1))
print(f"SEL exact {sel:.5f}, MC {est.estimate:.5f} +- {est.std_err:.5f}")

# estimates are a pure function of the seed, whatever MA_CI_THREADS says
again = mc_coverage(point, cfg, McSettings(replicates=1_000_000, seed=1))
print("bit-identical rerun:", again == reduced)
