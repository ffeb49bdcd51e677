"""State-dependent discrete memoryless channels with generalized feedback.

A channel is described by an i.i.d. state law ``p_s`` and a kernel
``P(y, z | x, s)`` giving the receiver output ``y`` and the feedback output
``z`` seen by the transmitter.  Kernels are dense float arrays indexed
``[x, s, y, z]``.

When the feedback is perfect (``z = y``) the four-dimensional kernel is
diagonal in ``(y, z)`` and can be enormous for finely quantized outputs, so
such channels keep only ``P(y | x, s)`` (indexed ``[x, s, y]``) and set
``perfect_feedback=True``.  Every function in this package accepts both
forms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: Tolerance on probability normalization.
PROB_TOL = 1e-9

#: Input-side tolerance for user supplied ``P(y|x,s)`` rows.  Rows that are
#: off by less than this are treated as rounding and renormalized exactly.
INPUT_TOL = 1e-6


class ChannelError(ValueError):
    """Raised when a channel model violates one of its invariants."""


def _frozen(a, dtype=float):
    if a is None:
        return None
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def check_pmf(p, name="pmf", tol=PROB_TOL):
    """Return a list of problems with ``p`` as a probability vector."""
    p = np.asarray(p, dtype=float)
    problems = []
    if p.ndim != 1 or p.size == 0:
        return [f"{name}: expected a non-empty 1-D vector, got shape {p.shape}"]
    if not np.all(np.isfinite(p)):
        problems.append(f"{name}: non-finite entries")
    if np.any(p < 0):
        i = int(np.argmin(p))
        problems.append(f"{name}: negative probability at index {i} ({p[i]:.3g})")
    if abs(p.sum() - 1.0) > tol:
        problems.append(f"{name}: sums to {p.sum():.12g}, not 1")
    return problems


@dataclass(frozen=True)
class DistortionMatrix:
    """Distortion ``d[s, j]`` between state ``s`` and reconstruction ``j``.

    ``squared_error`` marks matrices built as ``(s_values[s] - shat_values[j])**2``;
    only those can be used with the posterior-mean estimator, which
    reconstructs off the ``shat_values`` grid.
    """

    d: np.ndarray
    shat_values: np.ndarray | None = None
    squared_error: bool = False

    def __post_init__(self):
        d = _frozen(self.d)
        if d.ndim != 2:
            raise ChannelError(f"distortion matrix must be 2-D, got shape {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ChannelError("distortion entries must be finite and nonnegative")
        object.__setattr__(self, "d", d)
        shat = self.shat_values
        if shat is None:
            shat = np.arange(d.shape[1], dtype=float)
        shat = _frozen(shat)
        if shat.shape != (d.shape[1],):
            raise ChannelError(
                f"shat_values has shape {shat.shape}, expected ({d.shape[1]},)"
            )
        object.__setattr__(self, "shat_values", shat)

    @property
    def d_max(self):
        return float(self.d.max())

    @classmethod
    def hamming(cls, n):
        return cls(1.0 - np.eye(n))

    @classmethod
    def squared(cls, s_values, shat_values=None):
        s_values = np.asarray(s_values, dtype=float)
        shat_values = s_values if shat_values is None else np.asarray(shat_values, float)
        d = (s_values[:, None] - shat_values[None, :]) ** 2
        return cls(d, shat_values, squared_error=True)


@dataclass(frozen=True)
class StateChannel:
    """Finite-alphabet channel ``P_S(s) P(y, z | x, s)``.

    Parameters
    ----------
    p_s : array, shape (ns,)
        State distribution.
    kernel : array, shape (nx, ns, ny, nz) or (nx, ns, ny)
        Joint output kernel, or ``P(y|x,s)`` alone when ``perfect_feedback``.
    x_values, s_values : array, optional
        Physical input amplitudes / state values.
    perfect_feedback : bool
        Feedback output equals the channel output, ``z = y``.
    """

    p_s: np.ndarray
    kernel: np.ndarray
    x_values: np.ndarray | None = None
    s_values: np.ndarray | None = None
    perfect_feedback: bool = False
    name: str = field(default="channel", compare=False)

    def __post_init__(self):
        p_s = _frozen(self.p_s)
        kernel = _frozen(self.kernel)
        want = 3 if self.perfect_feedback else 4
        if kernel.ndim != want:
            raise ChannelError(f"kernel must have {want} axes, got shape {kernel.shape}")
        if p_s.shape != (kernel.shape[1],):
            raise ChannelError(
                f"p_s has shape {p_s.shape}, kernel expects ({kernel.shape[1]},)"
            )
        object.__setattr__(self, "p_s", p_s)
        object.__setattr__(self, "kernel", kernel)
        for attr, n in (("x_values", kernel.shape[0]), ("s_values", kernel.shape[1])):
            v = _frozen(getattr(self, attr))
            if v is not None and v.shape != (n,):
                raise ChannelError(f"{attr} has shape {v.shape}, expected ({n},)")
            object.__setattr__(self, attr, v)

    @property
    def nx(self):
        return self.kernel.shape[0]

    @property
    def ns(self):
        return self.kernel.shape[1]

    @property
    def ny(self):
        return self.kernel.shape[2]

    @property
    def nz(self):
        return self.ny if self.perfect_feedback else self.kernel.shape[3]

    @property
    def shape(self):
        return self.nx, self.ns, self.ny, self.nz

    def joint_kernel(self):
        """Dense ``[x, s, y, z]`` kernel (materialized for perfect feedback)."""
        if not self.perfect_feedback:
            return self.kernel
        nx, ns, ny, _ = self.shape
        out = np.zeros((nx, ns, ny, ny))
        idx = np.arange(ny)
        out[:, :, idx, idx] = self.kernel
        return out


def validate_channel(ch):
    """List every violated invariant of ``ch``; an empty list means valid."""
    problems = check_pmf(ch.p_s, "p_s")
    k = ch.kernel
    if not np.all(np.isfinite(k)):
        problems.append("kernel: non-finite entries")
    if np.any(k < 0):
        where = np.argwhere(k < 0)[0]
        problems.append(f"kernel: negative probability at index {tuple(int(i) for i in where)}")
    sums = k.reshape(ch.nx, ch.ns, -1).sum(axis=2)
    for x, s in np.argwhere(np.abs(sums - 1.0) > PROB_TOL):
        problems.append(
            f"kernel slice (x={x}, s={s}) sums to {sums[x, s]:.12g}, not 1"
        )
    return problems


def require_valid(ch):
    problems = validate_channel(ch)
    if problems:
        raise ChannelError("; ".join(problems))
    return ch


def marginal_y_given_xs(ch):
    """``P(y | x, s)`` as an array ``[x, s, y]``."""
    if ch.perfect_feedback:
        return ch.kernel
    return ch.kernel.sum(axis=3)


def z_given_xs(ch):
    """``P(z | x, s)`` as an array ``[x, s, z]``."""
    if ch.perfect_feedback:
        return ch.kernel
    return ch.kernel.sum(axis=2)


def marginal_z_given_x(ch):
    """``P(z | x) = sum_s P_S(s) P(z | x, s)``; valid because S is independent of X."""
    return np.einsum("s,xsz->xz", ch.p_s, z_given_xs(ch))


def from_perfect_feedback(p_y_given_xs, p_s, x_values=None, s_values=None,
                          renormalize=False, name="channel"):
    """Build a channel whose feedback output is the channel output, ``z = y``.

    Rows of ``p_y_given_xs`` off by at most ``INPUT_TOL`` are renormalized
    exactly; larger deviations raise unless ``renormalize`` is set.
    """
    w = np.array(p_y_given_xs, dtype=float)
    if w.ndim != 3:
        raise ChannelError(f"p_y_given_xs must be [x, s, y], got shape {w.shape}")
    if np.any(w < 0):
        where = tuple(int(i) for i in np.argwhere(w < 0)[0])
        raise ChannelError(f"negative probability at (x, s, y)={where}")
    sums = w.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1.0) > INPUT_TOL + 1e-12)
    if len(bad) and not renormalize:
        x, s = bad[0]
        raise ChannelError(
            f"row (x={x}, s={s}) of P(y|x,s) sums to {sums[x, s]:.12g}, not 1"
        )
    if np.any(sums <= 0):
        x, s = np.argwhere(sums <= 0)[0]
        raise ChannelError(f"row (x={x}, s={s}) of P(y|x,s) has no mass")
    w /= sums[:, :, None]
    ch = StateChannel(p_s, w, x_values, s_values, perfect_feedback=True, name=name)
    return require_valid(ch)


# ---------------------------------------------------------------- JSON files

def channel_to_dict(ch, distortion=None, cost=None):
    out = {"name": ch.name, "nx": ch.nx, "ns": ch.ns, "ny": ch.ny, "nz": ch.nz,
           "p_s": ch.p_s.tolist()}
    if ch.perfect_feedback:
        out["feedback"] = "perfect"
    out["kernel"] = ch.kernel.tolist()
    if ch.x_values is not None:
        out["x_values"] = ch.x_values.tolist()
    if ch.s_values is not None:
        out["s_values"] = ch.s_values.tolist()
    if distortion is not None:
        out["distortion"] = {
            "d": distortion.d.tolist(),
            "shat_values": distortion.shat_values.tolist(),
            "squared_error": distortion.squared_error,
        }
    if cost is not None:
        out["cost"] = np.asarray(cost, dtype=float).tolist()
    return out


def save_channel(path, ch, distortion=None, cost=None):
    """Write a channel file (UTF-8 JSON).  Floats round-trip exactly."""
    Path(path).write_text(json.dumps(channel_to_dict(ch, distortion, cost)),
                          encoding="utf-8")


def channel_from_dict(data, renormalize=False):
    """Inverse of :func:`channel_to_dict`, with full validation.

    Returns ``(channel, distortion or None, cost or None)``.
    """
    for key in ("nx", "ns", "ny", "nz", "p_s", "kernel"):
        if key not in data:
            raise ChannelError(f"missing field {key!r}")
    perfect = data.get("feedback", "general") == "perfect"
    dims = tuple(int(data[k]) for k in ("nx", "ns", "ny", "nz"))
    try:
        kernel = np.array(data["kernel"], dtype=float)
    except ValueError as exc:
        raise ChannelError(f"kernel is not a rectangular array: {exc}") from None
    want = dims[:3] if perfect else dims
    if perfect and dims[2] != dims[3]:
        raise ChannelError(f"perfect feedback needs ny == nz, got {dims[2]} and {dims[3]}")
    if kernel.shape != want:
        raise ChannelError(f"kernel has shape {kernel.shape}, header says {want}")
    p_s = np.array(data["p_s"], dtype=float)
    if p_s.shape != (dims[1],):
        raise ChannelError(f"p_s has length {p_s.size}, header says ns={dims[1]}")
    if renormalize:
        p_s = p_s / p_s.sum()
        sums = kernel.reshape(dims[0], dims[1], -1).sum(axis=2)
        kernel = kernel / sums.reshape(sums.shape + (1,) * (kernel.ndim - 2))
    ch = StateChannel(p_s, kernel, data.get("x_values"), data.get("s_values"),
                      perfect_feedback=perfect, name=data.get("name", "channel"))
    require_valid(ch)

    distortion = None
    if "distortion" in data:
        block = data["distortion"]
        distortion = DistortionMatrix(block["d"], block.get("shat_values"),
                                      bool(block.get("squared_error", False)))
        if distortion.d.shape[0] != ch.ns:
            raise ChannelError(
                f"distortion has {distortion.d.shape[0]} rows, channel has ns={ch.ns}"
            )
    cost = None
    if "cost" in data:
        cost = np.array(data["cost"], dtype=float)
        if cost.shape != (ch.nx,) or not np.all(np.isfinite(cost)):
            raise ChannelError(f"cost must be {ch.nx} finite numbers")
    return ch, distortion, cost


def load_channel(path, renormalize=False):
    """Read and validate a channel file written by :func:`save_channel`."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelError(
            f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return channel_from_dict(data, renormalize=renormalize)
