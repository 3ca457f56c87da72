"""
The large-sample limit
======================

As m grows with p fixed the coverage and scaled expected length reduce
to single integrals.  At rho_bar = 0 the interval is exact; at
rho_bar = 0.9 the limiting minimum coverage falls far below nominal.
"""

import math

from maci import (
    AsymptoticConfig,
    ParamPoint,
    TestbedConfig,
    c_min_star,
    coverage_probability,
    cp_star,
    rho_hc_to_rho_bar,
)

for rho_bar in (0.0, 0.5, 0.9):
    res = c_min_star(AsymptoticConfig(rho_bar=rho_bar))
    print(f"rho_bar={rho_bar}: c*_min = {res.c_min:.5f} at |gamma| = {res.gamma_at_min:.3f}")

# finite-m coverage approaches the limit
acfg = AsymptoticConfig(rho_bar=0.9)
limit = cp_star(1.7, acfg)
for m in (10, 50, 200, 1000):
    cp = coverage_probability(ParamPoint(1.7, 0.9), TestbedConfig(m=m, p=4))
    print(f"m={m:5d}: CP(1.7, 0.9) = {cp:.5f}   (limit {limit:.5f})")

# the Hjort-Claeskens parametrization, at nominal coverage 0.9
for rho_hc in (2 / 3, 1.0):
    rb = abs(rho_hc_to_rho_bar(rho_hc))
    acfg = AsymptoticConfig(rho_bar=rb, alpha=0.1)
    print(f"rho_hc={rho_hc:.4f} -> |rho_bar|={rb:.7f}; "
          f"CP*(0)={cp_star(0.0, acfg):.5f}, c*_min={c_min_star(acfg).c_min:.5f}")
print(f"check: 2/sqrt(13) = {2 / math.sqrt(13):.7f}, 1/sqrt(2) = {1 / math.sqrt(2):.7f}")
