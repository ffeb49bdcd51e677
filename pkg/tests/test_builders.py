import math

import numpy as np
import pytest
from scipy import integrate, stats

from capdist import (
    AwgnModelSpec,
    SolveOptions,
    binary_closed_form,
    build_binary_multiplicative,
    build_fading_awgn,
    build_pam_constellation,
    quantize_gaussian_state,
    quantized_state_variance,
    solve,
    unconstrained_capacity_reference,
    validate_channel,
)
from capdist.channel import ChannelError


def test_binary_builder_shapes():
    ch, d, b = build_binary_multiplicative(0.4)
    assert ch.shape == (2, 2, 2, 2) and ch.perfect_feedback
    np.testing.assert_array_equal(ch.p_s, [0.6, 0.4])
    np.testing.assert_array_equal(d.d, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(b, 0.0)
    assert validate_channel(ch) == []
    with pytest.raises(ValueError):
        build_binary_multiplicative(0.6)


@pytest.mark.parametrize("q", [0.1, 0.25, 0.4, 0.5])
@pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
def test_binary_builder_agrees_with_closed_form(q, p):
    from capdist import conditional_mutual_information, cost_vector

    ch, d, _ = build_binary_multiplicative(q)
    p_x = np.array([p, 1 - p])
    rate, dist = binary_closed_form(q, p)
    assert conditional_mutual_information(p_x, ch) / math.log(2) == pytest.approx(rate, abs=1e-14)
    assert cost_vector(ch, d) @ p_x == pytest.approx(dist, abs=1e-15)


def test_pam_levels():
    np.testing.assert_allclose(build_pam_constellation(2, 10.0), [-math.sqrt(10), math.sqrt(10)])
    r2 = math.sqrt(2)
    np.testing.assert_allclose(build_pam_constellation(4, 10.0), [-3 * r2, -r2, r2, 3 * r2])
    np.testing.assert_allclose(build_pam_constellation(2, 1.0), [-1.0, 1.0])
    for m in (2, 3, 8, 64):
        assert np.mean(build_pam_constellation(m, 7.3) ** 2) == pytest.approx(7.3, rel=1e-13)


def conditional_means_by_quadrature(k):
    edges = stats.norm.ppf(np.linspace(0, 1, k + 1))
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        num = integrate.quad(lambda s: s * stats.norm.pdf(s), a, b)[0]
        out.append(num * k)
    return np.array(out)


def test_state_quantizer():
    s, p = quantize_gaussian_state(2)
    np.testing.assert_allclose(s, [-math.sqrt(2 / math.pi), math.sqrt(2 / math.pi)], rtol=1e-14)
    np.testing.assert_allclose(p, 0.5)
    for k in (3, 7, 16):
        s, p = quantize_gaussian_state(k)
        assert p @ s == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(s, conditional_means_by_quadrature(k), atol=1e-8)


def test_quantized_variance_by_integration():
    s_quad = conditional_means_by_quadrature(64)
    var_quad = float(np.mean(s_quad**2))
    assert 0.99 <= var_quad <= 1.0
    assert quantized_state_variance(64) == pytest.approx(var_quad, abs=1e-8)


def test_quantized_variance_increases_to_one():
    vals = [quantized_state_variance(k) for k in (2, 4, 8, 16, 32, 64, 128)]
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] < 1.0


def test_awgn_builder_default():
    ch, d, b = build_fading_awgn(AwgnModelSpec(power=10.0, pam_order=2))
    assert validate_channel(ch) == []
    assert ch.shape == (2, 64, 513, 513)
    assert np.mean(b) == pytest.approx(10.0, rel=1e-14)
    assert d.squared_error


def test_awgn_builder_row_probabilities_match_cdf():
    spec = AwgnModelSpec(power=4.0, pam_order=4, state_levels=8, output_levels=101)
    ch, _, _ = build_fading_awgn(spec)
    w = ch.kernel
    half = np.abs(ch.s_values).max() * np.abs(ch.x_values).max() + 5.0
    edges = np.linspace(-half, half, 102)
    x, s = 1, 5
    mean = ch.x_values[x] * ch.s_values[s]
    for j in (10, 50, 90):
        expected = stats.norm.cdf(edges[j + 1] - mean) - stats.norm.cdf(edges[j] - mean)
        assert w[x, s, j] == pytest.approx(expected, rel=1e-9, abs=1e-14)
    assert w[x, s, 0] == pytest.approx(stats.norm.cdf(edges[1] - mean), rel=1e-9)


def test_awgn_builder_rejects_coarse_grid():
    with pytest.raises(ChannelError):
        build_fading_awgn(AwgnModelSpec(power=10.0, pam_order=2, output_levels=8))
    with pytest.raises(ChannelError):
        build_fading_awgn(AwgnModelSpec(power=10.0, pam_order=2, output_range_sigma=2.0))


def test_awgn_two_pam_numbers():
    ch, d, b = build_fading_awgn(AwgnModelSpec.from_db(10.0, pam_order=2))
    res = solve(ch, d, b, SolveOptions(mu=0.0))
    assert res.rate_bits == pytest.approx(0.733, abs=0.02)
    res = solve(ch, d, b, SolveOptions(mu=100.0))
    assert res.distortion == pytest.approx(0.091, abs=0.005)


def test_reference_capacity_by_quadrature():
    exact = integrate.quad(lambda s: 0.5 * math.log2(1 + 10 * s * s) * stats.norm.pdf(s),
                           -np.inf, np.inf)[0]
    assert unconstrained_capacity_reference(10.0) == pytest.approx(exact, abs=1e-6)
    assert unconstrained_capacity_reference(1e-9) < 1e-8


def test_reference_capacity_monte_carlo():
    rng = np.random.default_rng(5)
    s = rng.standard_normal(10**6)
    samples = 0.5 * np.log2(1 + s**2)
    mc, se = samples.mean(), samples.std() / math.sqrt(s.size)
    val = unconstrained_capacity_reference(1.0)
    assert 0 < val <= 0.5
    assert abs(val - mc) < 3 * se


def test_reference_rejects_bad_args():
    with pytest.raises(ValueError):
        unconstrained_capacity_reference(0.0)
    with pytest.raises(ValueError):
        unconstrained_capacity_reference(1.0, n_quad=10)
