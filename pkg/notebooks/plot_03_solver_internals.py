"""
Inside the alternating maximization
===================================

The solver alternates a closed-form posterior update with a closed-form
input update.  This script runs the two steps by hand on a small random
channel and checks them against the packaged solver.
"""

import numpy as np

from capdist import (
    DistortionMatrix,
    SolveOptions,
    cost_vector,
    from_perfect_feedback,
    grid_oracle,
    j_functional,
    optimal_estimator,
    solve,
    update_p,
    update_q,
)

rng = np.random.default_rng(0)
w = rng.dirichlet(np.ones(3), size=(3, 2))
ch = from_perfect_feedback(w, [0.3, 0.7])
d = DistortionMatrix.hamming(2)

# %%
# The estimator depends on the channel alone, so the per-symbol distortion
# cost ``c(x)`` is computed once.
est = optimal_estimator(ch, d)
c = cost_vector(ch, d)
print("estimator table:\n", est.shat_index)
print("c(x) =", c)

# %%
# Manual iterations.  ``J`` increases at every step.
mu = 0.5
p = np.full(ch.nx, 1 / ch.nx)
for k in range(8):
    q = update_q(p, ch)
    print(f"iter {k}: J - mu E[c] = {j_functional(p, q, ch) - mu * (p @ c):.10f}")
    p = update_p(q, ch, c, None, 0.0, mu)

# %%
# The solver and a brute-force grid search agree.
res = solve(ch, c=c, opts=SolveOptions(mu=mu))
p_grid, best = grid_oracle(ch, None, mu=mu, step=1e-3, c=c)
print("solver P_X:", np.round(res.p_x, 4), "objective", res.objective)
print("grid   P_X:", np.round(p_grid, 4), "objective", best)
