"""Capacity-distortion curves, reference oracles and curve checks."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import marginal_y_given_xs
from .solver import SolveOptions, SolveResult, cost_vector, solve, with_mu

CURVE_COLUMNS = ("mu", "lambda", "rate_bits", "distortion", "input_cost",
                 "iterations", "converged")


def default_mu_grid():
    """``{0} ∪ {0.01 * 1.3**k : k = 0..30}``."""
    return np.concatenate([[0.0], 0.01 * 1.3 ** np.arange(31)])


def h2(p):
    """Binary entropy in bits (``0 log 0 = 0``)."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -(np.where(p > 0, p * np.log2(p), 0.0)
                + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return out if out.ndim else float(out)


@dataclass
class TradeoffCurve:
    points: list = field(default_factory=list)
    channel_id: str = "channel"
    cost_limit: float | None = None

    def converged(self):
        return [pt for pt in self.points if pt.converged]

    def arrays(self, converged_only=True):
        """``(distortion, rate_bits)`` arrays in sweep order."""
        pts = self.converged() if converged_only else self.points
        return (np.array([pt.distortion for pt in pts]),
                np.array([pt.rate_bits for pt in pts]))

    def rate_at(self, distortion):
        """Rate of the piecewise-linear frontier through the converged points."""
        d, r = self.arrays()
        order = np.lexsort((r, d))
        return float(np.interp(distortion, d[order], r[order]))

    def monotone_in_mu(self, tol=1e-9):
        """Distortion and rate are both nonincreasing along the sweep."""
        d, r = self.arrays(converged_only=False)
        return bool(np.all(np.diff(d) <= tol) and np.all(np.diff(r) <= tol))

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for pt in self.points:
            row = pt.as_row()
            w.writerow([repr(float(row[k])) for k in CURVE_COLUMNS[:5]]
                       + [row["iterations"], int(row["converged"])])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def to_json(self, path=None):
        data = {"channel_id": self.channel_id, "cost_limit": self.cost_limit,
                "points": [pt.as_row() for pt in self.points]}
        text = json.dumps(data, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path, channel_id="csv"):
        points = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(CURVE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                points.append(SolveResult(
                    p_x=None, rate_bits=float(row["rate_bits"]),
                    distortion=float(row["distortion"]),
                    input_cost=float(row["input_cost"]), lam=float(row["lambda"]),
                    mu=float(row["mu"]), iterations=int(row["iterations"]),
                    converged=row["converged"].strip().lower() in ("1", "true"),
                ))
        return cls(points, channel_id)


def _solve_point(args):
    ch, c, b, opts = args
    return solve(ch, b=b, opts=opts, c=c)


def sweep(ch, d, b=None, mu_grid=None, cost_limit=None, opts=None,
          warm_start=True, jobs=1, estimator_mode=None):
    """Trace the tradeoff by solving once per penalty ``mu``.

    With ``warm_start`` each solve starts from the previous input law and
    multiplier; otherwise points are independent and may run on ``jobs``
    processes.
    """
    mu_grid = default_mu_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if np.any(mu_grid < 0) or np.any(np.diff(mu_grid) < 0):
        raise ValueError("mu grid must be nonnegative and ascending")
    opts = opts or SolveOptions()
    if cost_limit is not None:
        opts = replace(opts, cost_limit=cost_limit)
    if d is None:
        if np.any(mu_grid > 0):
            raise ValueError("distortion required for sweep/solve with mu>0")
        c = np.zeros(ch.nx)
    else:
        c = cost_vector(ch, d, estimator_mode)
    curve = TradeoffCurve(channel_id=ch.name, cost_limit=opts.cost_limit)
    if warm_start:
        p = lam = None
        for mu in mu_grid:
            res = solve(ch, b=b, opts=with_mu(opts, float(mu)), c=c,
                        p_init=p, lambda_init=lam)
            curve.points.append(res)
            p = res.p_x
            lam = res.lam if opts.cost_limit is not None and res.lam > 0 else None
        return curve
    tasks = [(ch, c, b, with_mu(opts, float(mu))) for mu in mu_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            curve.points.extend(pool.map(_solve_point, tasks))
    else:
        curve.points.extend(map(_solve_point, tasks))
    return curve


def binary_closed_form(q, p):
    """``(q H2(p), q p)``: rate in bits and distortion of the binary example."""
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"q must lie in [0, 1/2], got {q}")
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"p must lie in [0, 1/2], got {p}")
    return q * h2(p), q * p


def _simplex_grid(nx, n):
    if nx == 1:
        return np.array([[n]])
    blocks = []
    for k in range(n + 1):
        sub = _simplex_grid(nx - 1, n - k)
        blocks.append(np.column_stack([np.full(len(sub), k), sub]))
    return np.vstack(blocks)


def _entropy_rows(p):
    with np.errstate(divide="ignore", invalid="ignore"):
        return -np.sum(np.where(p > 0, p * np.log(p), 0.0), axis=-1)


def grid_oracle(ch, d, b=None, mu=0.0, step=1e-3, cost_limit=None, c=None):
    """Exhaustive maximization of ``I - mu E[c]`` over a simplex grid.

    The mutual information is evaluated as ``H(Y|S) - H(Y|X,S)``, a separate
    route from the solver.  Returns ``(best_p_x, objective_nats)``.
    """
    if ch.nx > 4:
        raise ValueError(f"grid oracle supports nx <= 4, got {ch.nx}")
    if not 0 < step <= 0.1:
        raise ValueError("step must lie in (0, 0.1]")
    n = int(round(1.0 / step))
    if math.comb(n + ch.nx - 1, ch.nx - 1) > 20_000_000:
        raise ValueError("simplex grid too large; use a coarser step")
    if c is None:
        c = np.zeros(ch.nx) if d is None else cost_vector(ch, d)
    grid = _simplex_grid(ch.nx, n) / n
    if cost_limit is not None:
        grid = grid[grid @ np.asarray(b, float) <= cost_limit + 1e-12]
        if len(grid) == 0:
            raise ValueError("no grid point satisfies the cost limit")
    w = marginal_y_given_xs(ch)
    h_y_xs = np.einsum("s,xs->x", ch.p_s, _entropy_rows(w))
    best_obj, best_p = -np.inf, None
    for chunk in np.array_split(grid, max(1, len(grid) // 20000)):
        p_ys = np.einsum("kx,xsy->ksy", chunk, w)
        h_y_s = _entropy_rows(p_ys) @ ch.p_s
        obj = h_y_s - chunk @ h_y_xs - mu * (chunk @ c)
        i = int(np.argmax(obj))
        if obj[i] > best_obj:
            best_obj, best_p = float(obj[i]), chunk[i].copy()
    return best_p, best_obj


@dataclass
class CurveReport:
    ok: bool
    monotone_violations: list
    concavity_violations: list

    def __str__(self):
        if self.ok:
            return "curve ok: nondecreasing and concave"
        lines = [f"C decreases by {v:.3g} after D={dd:.6g}" for dd, v in self.monotone_violations]
        lines += [f"point D={dd:.6g} lies {v:.3g} below the concave envelope"
                  for dd, v in self.concavity_violations]
        return "\n".join(lines)


def _upper_hull(d, r):
    hull = []
    for pt in zip(d, r):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(pt)
    return np.array(hull)


def check_curve_properties(curve, tol=2e-3):
    """Check that ``C(D)`` is nondecreasing and concave on the converged points.

    ``curve`` is a :class:`TradeoffCurve` or a sequence of ``(D, C)`` pairs.
    """
    if isinstance(curve, TradeoffCurve):
        d, r = curve.arrays()
    else:
        arr = np.asarray(curve, dtype=float).reshape(-1, 2)
        d, r = arr[:, 0], arr[:, 1]
    if len(d) < 3:
        raise ValueError("need at least 3 converged points")
    order = np.lexsort((r, d))
    d, r = d[order], r[order]
    drops = r[:-1] - r[1:]
    monotone = [(float(d[i]), float(drops[i])) for i in np.flatnonzero(drops > tol)]
    hull = _upper_hull(d, r)
    envelope = np.interp(d, hull[:, 0], hull[:, 1])
    gaps = envelope - r
    concave = [(float(d[i]), float(gaps[i])) for i in np.flatnonzero(gaps > tol)]
    return CurveReport(not monotone and not concave, monotone, concave)


def separation_baseline(corner_low, corner_high, n_points=11):
    """Time-sharing segment between a sensing corner and a communication corner."""
    lo = np.asarray(corner_low, dtype=float)
    hi = np.asarray(corner_high, dtype=float)
    t = np.linspace(0.0, 1.0, n_points)
    return [tuple(map(float, (1 - a) * lo + a * hi)) for a in t]

