"""
Binary channel with multiplicative Bernoulli state
==================================================

The output is ``Y = S * X`` with ``S ~ Bernoulli(q)``, and the transmitter
sees ``Y`` perfectly.  When ``X = 1`` the state is revealed.  When ``X = 0``
the best guess is ``0`` and costs ``q`` in Hamming distortion.  Sending more
ones helps both rate and sensing, up to the point where ``P(X=1)`` passes 1/2.
"""

import numpy as np

from capdist import (
    binary_closed_form,
    build_binary_multiplicative,
    check_curve_properties,
    h2,
    separation_baseline,
    sweep,
)

q = 0.4
ch, d, b = build_binary_multiplicative(q)

# %%
# Sweep the distortion multiplier.  Each point solves a penalized
# Blahut-Arimoto problem and reports rate in bits.
curve = sweep(ch, d, b)
print(curve.to_csv())

# %%
# Along this family the curve has the closed form ``C(D) = q H2(D/q)``.
D, C = curve.arrays()
print("max deviation from q*H2(D/q):", np.max(np.abs(C - q * h2(D / q))))
print(check_curve_properties(curve))

# %%
# Time sharing between the two corner points is the separation baseline.
# The joint design sits strictly above it.
sep = dict(separation_baseline((0.0, 0.0), (q, q), 5))
print(f"C_joint(0.1) = {curve.rate_at(0.1):.4f} bits, C_sep(0.1) = {sep[0.1]:.4f} bits")

# %%
# The closed form is also available directly for any ``P(X=1)``.
for p in (0.1, 0.25, 0.5):
    rate, dist = binary_closed_form(q, p)
    print(f"P(X=1)={p:.2f}: rate {rate:.4f} bits, distortion {dist:.4f}")
