"""
The hybrid L(N) model
=====================

A chain term dominates below N0 and a random-graph term above it.
"""

import numpy as np

from wordadj import FitParams, fit, l_chain, l_fit, l_rand, sigmoid

p = FitParams(c0=2.0, growth_alpha=0.4, n0=30.0, theta=2.5)
n = np.unique(np.round(np.logspace(np.log10(2), 6, 60)))

print("      N   chain    rand   sigm     fit")
for x in n[::6]:
    print(f"{x:>7.0f} {l_chain(x):7.2f} {l_rand(x, p.c0, p.growth_alpha):7.3f} "
          f"{sigmoid(x, p.n0, p.theta):6.3f} {l_fit(x, p):7.3f}")

# l_rand tends to 1/alpha, slowly
for x in (1e3, 1e6, 1e9, 1e12):
    print(f"N={x:.0e}: 1/alpha - l_rand = {1 / p.growth_alpha - l_rand(x, p.c0, p.growth_alpha):.4f}")

# Recover the parameters from noisy samples
rng = np.random.default_rng(0)
noisy = l_fit(n, p) + rng.normal(0, 0.01, len(n))
q = fit((n, noisy))
print("true", np.round(p.as_tuple(), 3))
print("fit ", np.round(q.as_tuple(), 3), f"residual {q.residual:.4f}")
