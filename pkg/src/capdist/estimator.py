"""Bayes-optimal state estimation from the transmitter's side information.

The transmitter knows its own input ``x`` and sees the feedback ``z``.  The
state posterior ``P(s | x, z)`` does not depend on the input law (the state is
independent of the input), so the estimator and the per-symbol distortion
cost ``c(x)`` can be computed once, before any input optimization.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import ChannelError, marginal_z_given_x, z_given_xs

#: Index stored for ``(x, z)`` pairs that have zero probability.
UNREACHABLE = -1

RESTRICTED = "restricted"
POSTERIOR_MEAN = "posterior-mean"


@dataclass(frozen=True)
class EstimatorTable:
    """Deterministic estimator ``(x, z) -> reconstruction``.

    ``shat_index[x, z]`` indexes ``shat_values``; unreachable pairs hold
    ``UNREACHABLE``.  In posterior-mean mode ``shat_values`` holds one
    reconstruction per ``(x, z)`` pair (index ``x * nz + z``).
    """

    shat_index: np.ndarray
    shat_values: np.ndarray
    mode: str = RESTRICTED

    @property
    def reachable(self):
        return self.shat_index != UNREACHABLE

    def values(self):
        """Reconstruction values as an ``[x, z]`` array, NaN where unreachable."""
        out = np.full(self.shat_index.shape, np.nan)
        ok = self.reachable
        out[ok] = self.shat_values[self.shat_index[ok]]
        return out

    def to_csv(self, path):
        """Write rows ``x, z, shat_value, reachable``."""
        vals = self.values()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "z", "shat_value", "reachable"])
            for (x, z), v in np.ndenumerate(vals):
                ok = bool(self.reachable[x, z])
                w.writerow([x, z, repr(float(v)) if ok else "", int(ok)])


def posterior_s_given_xz(ch):
    """State posterior given input and feedback.

    Returns
    -------
    post : array, shape (nx, nz, ns)
        ``P(s | x, z)``; rows of unreachable pairs are zero.
    reachable : bool array, shape (nx, nz)
        ``P(z | x) > 0``.
    """
    joint = np.einsum("s,xsz->xzs", ch.p_s, z_given_xs(ch))
    p_zx = joint.sum(axis=2)
    reachable = p_zx > 0
    post = np.zeros_like(joint)
    post[reachable] = joint[reachable] / p_zx[reachable][:, None]
    return post, reachable


def _check_dims(ch, d):
    if d.d.shape[0] != ch.ns:
        raise ChannelError(
            f"distortion matrix has {d.d.shape[0]} rows but the channel has ns={ch.ns}"
        )


def _check_squared_error(ch, d):
    if ch.s_values is None:
        raise ChannelError("posterior-mean estimation needs the channel's s_values")
    if not d.squared_error:
        raise ChannelError("posterior-mean estimation needs a squared-error distortion")
    expected = (ch.s_values[:, None] - d.shat_values[None, :]) ** 2
    if not np.allclose(expected, d.d, rtol=1e-9, atol=1e-12):
        raise ChannelError("distortion matrix is not the squared error of s_values")


def optimal_estimator(ch, d, mode=RESTRICTED):
    """Minimum posterior-risk estimator ``shat(x, z)``.

    In ``restricted`` mode the reconstruction is the column of ``d`` with the
    least posterior risk (ties go to the smallest index).  In
    ``posterior-mean`` mode it is ``E[S | x, z]``, the squared-error optimum
    over the whole real line.
    """
    _check_dims(ch, d)
    post, reachable = posterior_s_given_xz(ch)
    nx, nz, _ = post.shape
    index = np.full((nx, nz), UNREACHABLE, dtype=int)
    if mode == RESTRICTED:
        risk = post @ d.d
        index[reachable] = np.argmin(risk, axis=2)[reachable]
        return EstimatorTable(index, d.shat_values.copy(), mode)
    if mode == POSTERIOR_MEAN:
        _check_squared_error(ch, d)
        means = (post @ ch.s_values).ravel()
        flat = np.arange(nx * nz).reshape(nx, nz)
        index[reachable] = flat[reachable]
        return EstimatorTable(index, means, mode)
    raise ValueError(f"unknown estimator mode {mode!r}")


def conditional_risk(ch, est, d):
    """``sum_s P(s|x,z) d(s, shat(x, z))`` as an ``[x, z]`` array (0 if unreachable)."""
    _check_dims(ch, d)
    post, reachable = posterior_s_given_xz(ch)
    if est.shat_index.shape != reachable.shape:
        raise ChannelError(
            f"estimator table has shape {est.shat_index.shape}, channel needs {reachable.shape}"
        )
    if np.any(reachable & ~est.reachable):
        raise ChannelError("estimator table leaves a reachable (x, z) pair undefined")
    risk = np.zeros(reachable.shape)
    if est.mode == POSTERIOR_MEAN:
        _check_squared_error(ch, d)
        shat = est.values()
        sq = (ch.s_values[None, None, :] - shat[:, :, None]) ** 2
        risk[reachable] = np.sum(post * np.where(reachable[:, :, None], sq, 0.0), axis=2)[reachable]
    else:
        cols = np.where(reachable, est.shat_index, 0)
        dist = d.d.T[cols]  # [x, z, s]
        risk[reachable] = np.sum(post * dist, axis=2)[reachable]
    return risk


def distortion_cost(ch, est, d):
    """Expected estimation distortion ``c(x)`` incurred by sending symbol ``x``."""
    return np.sum(marginal_z_given_x(ch) * conditional_risk(ch, est, d), axis=1)


def min_distortion(c):
    """Smallest achievable expected distortion: ``E[d]`` is linear in ``P_X``."""
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        raise ValueError("empty distortion-cost vector")
    return float(c.min())
