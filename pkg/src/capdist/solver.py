"""Modified Blahut-Arimoto iteration for the capacity-distortion-cost problem.

We maximize ``I(X; Y | S) - mu * sum_x c(x) P_X(x)`` over input laws obeying
``sum_x b(x) P_X(x) <= B``.  Each outer round is the usual alternating pair:

* Q-step: ``Q(x | y, s)`` is the input posterior under the current ``P_X``;
* P-step: ``P_X(x) ∝ exp(g(x))`` with
  ``g(x) = sum_{s,y} P_S(s) P(y|x,s) log Q(x|y,s) - lam * b(x) - mu * c(x)``,
  where the cost multiplier ``lam`` is found by projected dual ascent.

Everything is computed in nats; :class:`SolveResult` reports the rate in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import marginal_y_given_xs
from .estimator import POSTERIOR_MEAN, RESTRICTED, distortion_cost, optimal_estimator

LN2 = math.log(2.0)


class InfeasibleError(ValueError):
    """The input-cost limit cannot be met by any input law."""


@dataclass(frozen=True)
class SolveOptions:
    mu: float = 0.0
    cost_limit: float | None = None
    outer_tol: float = 1e-9
    max_outer_iters: int = 20000
    dual_step0: float = 0.1
    dual_iters: int = 200
    dual_tol: float = 1e-7
    lambda0: float = 1.0

    def __post_init__(self):
        if self.mu < 0 or not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite and >= 0, got {self.mu}")
        if self.cost_limit is not None and self.cost_limit < 0:
            raise ValueError(f"cost_limit must be >= 0, got {self.cost_limit}")
        for name in ("outer_tol", "dual_step0", "dual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_outer_iters < 1 or self.dual_iters < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be > 0")


@dataclass
class SolveResult:
    """One converged (or flagged) point of the tradeoff."""

    p_x: np.ndarray | None
    rate_bits: float
    distortion: float
    input_cost: float
    lam: float
    mu: float
    iterations: int
    converged: bool
    objective: float = float("nan")
    gap: float = float("nan")
    dual_residual: float = 0.0
    trace: list | None = field(default=None, repr=False)

    def as_row(self):
        return {
            "mu": self.mu,
            "lambda": self.lam,
            "rate_bits": self.rate_bits,
            "distortion": self.distortion,
            "input_cost": self.input_cost,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _xlogx_kernel(w):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > 0, w * np.log(w), 0.0)


def _safe_log(a):
    with np.errstate(divide="ignore"):
        return np.log(a)


def output_given_state(p_x, w):
    """``P(y | s) = sum_x P_X(x) P(y | x, s)`` as ``[s, y]``."""
    return np.einsum("x,xsy->sy", p_x, w)


def _divergences(p_x, w2, p_s, wlogw_x):
    """``D_x = sum_s P_S(s) KL(P(.|x,s) || P(.|s))`` for every input symbol.

    ``w2`` is the ``[x, s*y]`` reshaped kernel.
    """
    p_ys = p_x @ w2
    dead = p_ys <= 0
    log_p = np.where(dead, 0.0, _safe_log(np.where(dead, 1.0, p_ys)))
    weight = (p_s[:, None] * log_p.reshape(p_s.size, -1)).ravel()
    d = wlogw_x - w2 @ weight
    if dead.any():
        # symbols reaching outputs that no used symbol reaches have unbounded gain
        d[w2 @ dead.astype(float) > 0] = np.inf
    return d


def _rate(p_x, div):
    used = p_x > 0
    return max(float(p_x[used] @ div[used]), 0.0)


def conditional_mutual_information(p_x, ch):
    """``I(X; Y | S)`` in nats for input law ``p_x``."""
    p_x = np.asarray(p_x, dtype=float)
    w = marginal_y_given_xs(ch)
    if p_x.shape != (ch.nx,):
        raise ValueError(f"p_x has shape {p_x.shape}, channel has nx={ch.nx}")
    p_ys = output_given_state(p_x, w)
    live = (w > 0) & (p_x[:, None, None] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(live, _safe_log(w) - _safe_log(p_ys)[None], 0.0)
    val = np.einsum("s,x,xsy,xsy->", ch.p_s, p_x, w, ratio)
    return max(float(val), 0.0)


def update_q(p_x, ch):
    """Input posterior ``Q*(x | y, s)``, indexed ``[y, s, x]``.

    Pairs ``(y, s)`` that no input produces get a uniform row.
    """
    p_x = np.asarray(p_x, dtype=float)
    w = marginal_y_given_xs(ch)
    num = p_x[:, None, None] * w  # [x, s, y]
    den = num.sum(axis=0)
    q = np.full(num.shape, 1.0 / ch.nx)
    ok = den > 0
    q[:, ok] = num[:, ok] / den[ok]
    return q.transpose(2, 1, 0)


def j_functional(p_x, q, ch):
    """``sum_s P_S(s) sum_{x,y} P_X(x) P(y|x,s) log(Q(x|y,s) / P_X(x))`` in nats.

    Returns ``-inf`` when ``q`` rules out an (x, y, s) triple that occurs.
    """
    p_x = np.asarray(p_x, dtype=float)
    w = marginal_y_given_xs(ch)
    q_xsy = np.asarray(q, dtype=float).transpose(2, 1, 0)
    weight = ch.p_s[None, :, None] * p_x[:, None, None] * w
    live = weight > 0
    if np.any(live & (q_xsy <= 0)):
        return -np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(live, weight * (_safe_log(q_xsy) - _safe_log(p_x)[:, None, None]), 0.0)
    return float(terms.sum())


def _softmax(g):
    finite = np.isfinite(g)
    if not finite.any():
        raise ValueError("every input symbol has zero weight (degenerate Q)")
    out = np.zeros_like(g)
    shifted = g[finite] - g[finite].max()
    e = np.exp(shifted)
    out[finite] = e / e.sum()
    return out


def q_scores(q, ch):
    """``sum_{s,y} P_S(s) P(y|x,s) log Q(x|y,s)`` for every ``x``."""
    w = marginal_y_given_xs(ch)
    log_q = _safe_log(np.asarray(q, dtype=float)).transpose(2, 1, 0)
    with np.errstate(invalid="ignore"):
        terms = np.where(w > 0, w * log_q, 0.0)
    return np.einsum("s,xsy->x", ch.p_s, terms)


def update_p(q, ch, c, b, lam, mu):
    """Input law maximizing ``J - lam * E[b] - mu * E[c]`` for fixed ``q``.

    ``b=None`` means no input cost.
    """
    if lam < 0 or mu < 0:
        raise ValueError("lam and mu must be nonnegative")
    g = q_scores(q, ch) - mu * np.asarray(c, float)
    if b is not None:
        g = g - lam * np.asarray(b, float)
    return _softmax(g)


def kkt_residual(lam, slack):
    """Natural residual ``|lam - [lam + slack]_+|`` of ``lam >= 0, slack <= 0, lam*slack = 0``."""
    return abs(lam - max(lam + slack, 0.0))


def dual_ascent(g0, b, limit, lam, step0, iters, tol):
    """Projected dual ascent on the input-cost multiplier.

    ``g0`` is the P-step score without the cost term.  The step size is
    ``step0 / sqrt(l)`` at inner iteration ``l``.  Returns
    ``(p, lam, residual)`` where ``p`` was computed from the final ``lam``.
    """
    for ell in range(1, iters + 1):
        p = _softmax(g0 - lam * b)
        slack = float(p @ b) - limit
        resid = kkt_residual(lam, slack)
        if resid < tol:
            return p, lam, resid
        lam = max(lam + step0 / math.sqrt(ell) * slack, 0.0)
    p = _softmax(g0 - lam * b)
    slack = float(p @ b) - limit
    return p, lam, kkt_residual(lam, slack)


def default_estimator_mode(ch, d):
    if d.squared_error and ch.s_values is not None:
        return POSTERIOR_MEAN
    return RESTRICTED


def cost_vector(ch, d, mode=None):
    """Per-symbol distortion cost ``c(x)`` under the optimal estimator."""
    mode = mode or default_estimator_mode(ch, d)
    return distortion_cost(ch, optimal_estimator(ch, d, mode), d)


def solve(ch, d=None, b=None, opts=None, *, c=None, estimator_mode=None,
          p_init=None, lambda_init=None, trace=False):
    """Run the modified Blahut-Arimoto algorithm for one ``(mu, B)``.

    Parameters
    ----------
    ch : StateChannel
    d : DistortionMatrix, optional
        Needed whenever ``opts.mu > 0`` (unless ``c`` is given).
    b : array, optional
        Input cost per symbol; zeros when omitted.
    opts : SolveOptions
    c : array, optional
        Precomputed distortion cost, skips the estimator.
    p_init, lambda_init : optional
        Warm start.  Defaults are the uniform law and ``opts.lambda0``.
    trace : bool
        Record ``(iter, objective_nats, lambda, cost, distortion)`` per round.
    """
    opts = opts or SolveOptions()
    if c is None:
        if d is None:
            if opts.mu > 0:
                raise ValueError("distortion required for sweep/solve with mu>0")
            c_vec = np.zeros(ch.nx)
        else:
            c_vec = cost_vector(ch, d, estimator_mode)
    else:
        c_vec = np.asarray(c, dtype=float)
    have_distortion = d is not None or c is not None
    b_vec = np.zeros(ch.nx) if b is None else np.asarray(b, dtype=float)
    if b_vec.shape != (ch.nx,) or c_vec.shape != (ch.nx,):
        raise ValueError(f"cost vectors must have length nx={ch.nx}")

    limit = opts.cost_limit
    if limit is not None:
        if b is None:
            raise ValueError("cost_limit given without a cost vector")
        if limit < b_vec.min():
            raise InfeasibleError(
                f"cost limit {limit} is below the cheapest symbol cost {b_vec.min()}"
            )
    lam = 0.0 if limit is None else float(opts.lambda0 if lambda_init is None else lambda_init)
    mu = float(opts.mu)

    w = marginal_y_given_xs(ch)
    w2 = w.reshape(ch.nx, -1)
    wlogw_x = np.einsum("s,xsy->x", ch.p_s, _xlogx_kernel(w))

    p = np.full(ch.nx, 1.0 / ch.nx) if p_init is None else np.asarray(p_init, float).copy()
    p /= p.sum()
    div = _divergences(p, w2, ch.p_s, wlogw_x)
    obj_prev = _rate(p, div) - mu * float(c_vec @ p)
    resid = 0.0
    converged = False
    rows = [] if trace else None
    k = 0
    for k in range(1, opts.max_outer_iters + 1):
        # Q-step folded into the score: sum_{s,y} P_S W log Q* = log P_X + D_x
        with np.errstate(invalid="ignore"):
            g0 = np.where(p > 0, _safe_log(p) + div, -np.inf) - mu * c_vec
        if limit is None:
            p = _softmax(g0)
        else:
            p, lam, resid = dual_ascent(g0, b_vec, limit, lam, opts.dual_step0,
                                        opts.dual_iters, opts.dual_tol)
        div = _divergences(p, w2, ch.p_s, wlogw_x)
        obj = _rate(p, div) - mu * float(c_vec @ p)
        if trace:
            rows.append((k, obj, lam, float(b_vec @ p), float(c_vec @ p)))
        if abs(obj - obj_prev) < opts.outer_tol and resid < opts.dual_tol:
            converged = True
            break
        obj_prev = obj

    upper = np.max(div - mu * c_vec - lam * b_vec) + (lam * limit if limit is not None else 0.0)
    rate = _rate(p, div)
    obj = rate - mu * float(c_vec @ p)
    return SolveResult(
        p_x=p,
        rate_bits=rate / LN2,
        distortion=float(c_vec @ p) if have_distortion else float("nan"),
        input_cost=float(b_vec @ p),
        lam=float(lam),
        mu=mu,
        iterations=k,
        converged=converged,
        objective=obj,
        gap=float(max(upper - obj, 0.0)),
        dual_residual=float(resid),
        trace=rows,
    )


def with_mu(opts, mu):
    return replace(opts, mu=mu)
