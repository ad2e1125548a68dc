"""
A synthetic growing network
===========================

A walker adds nodes at a rate that slows as p0 * tau^(delta - 1) and
otherwise closes loops with sublinear preferential attachment.
"""

import numpy as np

from wordadj import SynthConfig, generate, synth_curve
from wordadj.metrics import degree_histogram, fit_degree_exponent, heaps_curve_from_counts, heaps_fit

cfg = SynthConfig(p0=1.0, delta=0.8, eta=0.5, seed=1, steps=100_000)
run = generate(cfg)
print(f"N = {run.n_nodes}, E = {run.n_edges} after {cfg.steps} steps")

# The node count grows like tau^delta
hf = heaps_fit(heaps_curve_from_counts(run.n_after))
print(f"Heaps exponent {hf.delta:.3f} (delta = {cfg.delta})")

g = fit_degree_exponent(degree_histogram(run.network()), kmin=4)
print(f"degree tail exponent {g.gamma:.2f} +/- {g.stderr:.2f}")

# Steps by kind: 0 new node, 1 new edge, 2 repeat
print("step kinds:", np.bincount(run.kinds, minlength=3))

curve = synth_curve(cfg, [2, 5, 10, 30, 100, 300, 1000, 3000, 10_000], n_realizations=5)
for n, l in zip(curve.n, curve.mean_l):
    print(f"{n:>6}  {l:.3f}")

# With p0 = 1 and delta = 1 every step adds a node: a chain
chain = generate(SynthConfig(p0=1.0, delta=1.0, steps=30))
print("chain degrees:", sorted(chain.network().degrees().tolist())[:4], "...")
