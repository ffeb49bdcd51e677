"""Channel builders for the two worked examples.

* Binary channel ``Y = S X`` with a Bernoulli(q) state, Hamming distortion.
* Real fading channel ``Y = S X + N`` with ``S, N ~ N(0, 1)`` and an M-PAM
  input, quantized to finite state and output alphabets.

Both use perfect feedback ``Z = Y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from .channel import ChannelError, DistortionMatrix, from_perfect_feedback

#: Allowed probability mass that falls outside the output grid (folded into
#: the edge bins).  A 5-sigma margin leaves about 2.9e-7.
MAX_TAIL_MASS = 1e-6


def build_binary_multiplicative(q):
    """Binary multiplicative channel with ``P_S(1) = q``.

    Returns ``(channel, distortion, cost)`` with Hamming distortion and zero
    input cost.
    """
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"q must lie in [0, 1/2], got {q}")
    w = np.zeros((2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x * s] = 1.0
    ch = from_perfect_feedback(w, [1.0 - q, q], x_values=[0.0, 1.0],
                               s_values=[0.0, 1.0], name=f"binary-q{q:g}")
    return ch, DistortionMatrix.hamming(2), np.zeros(2)


def build_pam_constellation(m, power):
    """``m`` equally spaced amplitudes whose uniform average power is ``power``."""
    if m < 2 or power <= 0:
        raise ValueError("need m >= 2 and power > 0")
    a = math.sqrt(3.0 * power / (m * m - 1))
    return a * (2.0 * np.arange(1, m + 1) - 1.0 - m)


def quantize_gaussian_state(k):
    """Equiprobable ``k``-cell quantizer of ``N(0, 1)`` with conditional-mean levels.

    Returns ``(s_values, p_s)``.
    """
    if k < 2:
        raise ValueError("need at least 2 state levels")
    edges = stats.norm.ppf(np.linspace(0.0, 1.0, k + 1))
    pdf = stats.norm.pdf(edges)
    values = k * (pdf[:-1] - pdf[1:])
    # exact antisymmetry; the ppf of the two tails differs in the last ulp
    values = 0.5 * (values - values[::-1])
    return values, np.full(k, 1.0 / k)


@dataclass(frozen=True)
class AwgnModelSpec:
    power: float = 10.0
    pam_order: int = 2
    state_levels: int = 64
    output_levels: int = 513
    output_range_sigma: float = 5.0

    def __post_init__(self):
        if min(self.pam_order, self.state_levels, self.output_levels) < 2:
            raise ValueError("alphabet sizes must be >= 2")
        if self.power <= 0 or self.output_range_sigma <= 0:
            raise ValueError("power and output range must be positive")

    @classmethod
    def from_db(cls, power_db, **kw):
        return cls(power=10.0 ** (power_db / 10.0), **kw)


def build_fading_awgn(spec=AwgnModelSpec()):
    """Quantized ``Y = S X + N`` with M-PAM input and squared-error distortion.

    The output grid has ``output_levels`` equal bins on ``[-L, L]`` with
    ``L = max|s| max|x| + output_range_sigma``; the outermost bins extend to
    infinity.  Returns ``(channel, distortion, cost)`` with ``cost = x**2``.
    """
    x = build_pam_constellation(spec.pam_order, spec.power)
    s, p_s = quantize_gaussian_state(spec.state_levels)
    half = np.abs(s).max() * np.abs(x).max() + spec.output_range_sigma
    edges = np.linspace(-half, half, spec.output_levels + 1)
    if edges[1] - edges[0] > 1.0:
        raise ChannelError(
            f"output bins of width {edges[1] - edges[0]:.3g} are coarser than the noise std"
        )
    mean = (x[:, None] * s[None, :])[:, :, None]  # [x, s, 1]
    tails = special.ndtr(edges[0] - mean) + special.ndtr(mean - edges[-1])
    if tails.max() > MAX_TAIL_MASS:
        raise ChannelError(
            f"output grid loses {tails.max():.3g} mass outside [-{half:.3g}, {half:.3g}]"
        )
    lo = np.concatenate([[-np.inf], edges[1:-1]]) - mean
    hi = np.concatenate([edges[1:-1], [np.inf]]) - mean
    # cdf differences lose precision in the upper tail; use the survival form there
    w = np.where(lo > 0, special.ndtr(-lo) - special.ndtr(-hi),
                 special.ndtr(hi) - special.ndtr(lo))
    w = np.clip(w, 0.0, None)
    ch = from_perfect_feedback(
        w, p_s, x_values=x, s_values=s,
        name=f"awgn-P{spec.power:g}-M{spec.pam_order}-K{spec.state_levels}-Y{spec.output_levels}",
    )
    return ch, DistortionMatrix.squared(s), x ** 2


def quantized_state_variance(k):
    s, p = quantize_gaussian_state(k)
    return float(p @ s**2)


def unconstrained_capacity_reference(power, n_quad=2001):
    """``0.5 E[log2(1 + S^2 P)]`` for ``S ~ N(0, 1)`` by Simpson's rule on ``[-8, 8]``."""
    if power <= 0:
        raise ValueError("power must be > 0")
    if n_quad < 100:
        raise ValueError("n_quad must be >= 100")
    s = np.linspace(-8.0, 8.0, n_quad)
    f = 0.5 * np.log2(1.0 + s**2 * power) * stats.norm.pdf(s)
    return float(integrate.simpson(f, x=s))
