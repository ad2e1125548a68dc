"""
L(N) for one English text, with and without punctuation
========================================================

Run from the repository root:  python demos/growth_curve_alice.py
"""

from pathlib import Path

import numpy as np

from wordadj import Mode, curve_for_text, fit, load_document, tokenize
from wordadj.model import l_chain

text = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "alice29.txt"
stream = tokenize(load_document(text))
print(f"{stream.total_len} tokens, {len(set(stream.surfaces()))} distinct")

# Punctuation marks are ordinary nodes in the tokens stream. The words stream
# drops them before the network is built. Capping at N=1000 keeps this quick.
curves = {mode: curve_for_text(stream, mode, max_n=1000) for mode in (Mode.TOKENS, Mode.WORDS)}

for mode, c in curves.items():
    n_max, l_max = c.argmax()
    print(f"{mode.value:>6}: L_max = {l_max:.3f} at N = {n_max}, L(1000) = {c.mean_l[-1]:.3f}")

# Small networks are almost chains: compare with (N + 1) / 3.
tok = curves[Mode.TOKENS]
for n in (2, 3, 5, 8):
    print(f"N={n}: L={tok.value_at(n):.3f}  chain={l_chain(n):.3f}")

# The full tokens curve and the hybrid model
full = curve_for_text(stream, Mode.TOKENS)
p = fit(full)
print(f"fit: c0={p.c0:.3f} alpha={p.growth_alpha:.3f} N0={p.n0:.1f} theta={p.theta:.2f}")
print(f"asymptote 1/alpha = {p.asymptote:.3f}, L(N_tot) = {full.mean_l[-1]:.3f}, "
      f"rms residual = {p.residual:.3f}")

np.savetxt("alice_tokens_curve.txt", np.column_stack([full.n, full.mean_l]),
           header="N mean_L", fmt=["%d", "%.6f"])
