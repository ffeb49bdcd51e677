"""
Real fading AWGN channel
========================

``Y = S X + N`` with ``S ~ N(0, 1)`` and ``N ~ N(0, 1)``.  The state and the
output are quantized, the input is an M-PAM constellation, and the sensing
estimate is the posterior mean of ``S`` given ``(X, Y)``.
"""

import time

import numpy as np

from capdist import (
    AwgnModelSpec,
    SolveOptions,
    build_fading_awgn,
    check_curve_properties,
    quantized_state_variance,
    solve,
    sweep,
    unconstrained_capacity_reference,
)

# %%
# BPSK at 10 dB.  Without a distortion penalty the input is uniform.  With a
# heavy penalty the rate falls and distortion nears the MMSE ``1/(1+P)``.
ch, d, b = build_fading_awgn(AwgnModelSpec.from_db(10.0, pam_order=2))
for mu in (0.0, 100.0):
    r = solve(ch, d, b, SolveOptions(mu=mu))
    print(f"2-PAM mu={mu:5.1f}: rate {r.rate_bits:.4f} bits, distortion {r.distortion:.4f}")
print("quantized var[S] =", round(quantized_state_variance(64), 5))

# %%
# 8-PAM under an average power limit ``E[X^2] <= 10``.  The power
# multiplier is found by projected dual ascent inside each iteration.
ch8, d8, b8 = build_fading_awgn(AwgnModelSpec.from_db(10.0, pam_order=8))
grid = np.concatenate([[0.0], np.geomspace(0.05, 100, 14)])
t0 = time.perf_counter()
curve = sweep(ch8, d8, b8, mu_grid=grid, cost_limit=10.0)
print(f"8-PAM sweep: {time.perf_counter() - t0:.2f} s")
print(curve.to_csv())
print(check_curve_properties(curve))

# %%
# For reference, the Gaussian-input value ``0.5 E[log2(1 + S^2 P)]``.
print("Gaussian-input reference:", round(unconstrained_capacity_reference(10.0), 4), "bits")
