import itertools

import numpy as np
import pytest

from capdist import (
    AwgnModelSpec,
    ChannelError,
    DistortionMatrix,
    StateChannel,
    build_binary_multiplicative,
    build_fading_awgn,
    distortion_cost,
    min_distortion,
    optimal_estimator,
    posterior_s_given_xz,
)
from capdist.estimator import POSTERIOR_MEAN, UNREACHABLE, conditional_risk
from conftest import random_channel, random_distortion


def expected_distortion_joint(ch, p_x, shat_prob, d):
    """E[d(S, Shat)] summed directly over the joint law of (X, S, Z, Shat).

    ``shat_prob[x, z, j]`` is a (possibly randomized) estimator.
    """
    k = ch.joint_kernel()
    total = 0.0
    for x, s, y, z in itertools.product(*(range(n) for n in k.shape)):
        mass = p_x[x] * ch.p_s[s] * k[x, s, y, z]
        if mass:
            total += mass * float(shat_prob[x, z] @ d.d[s])
    return total


def table_to_prob(est, nshat):
    nx, nz = est.shat_index.shape
    prob = np.zeros((nx, nz, nshat))
    for x in range(nx):
        for z in range(nz):
            prob[x, z, max(est.shat_index[x, z], 0)] = 1.0
    return prob


def test_binary_posterior(binary04):
    ch, _, _ = binary04
    post, reach = posterior_s_given_xz(ch)
    assert post[0, 0, 1] == pytest.approx(0.4)
    assert post[0, 0, 0] == pytest.approx(0.6)
    assert post[1, 1, 1] == 1.0
    assert post[1, 0, 0] == 1.0
    assert not reach[0, 1]
    assert reach[0, 0] and reach[1, 0] and reach[1, 1]


def test_binary_estimator_and_cost(binary04):
    ch, d, _ = binary04
    est = optimal_estimator(ch, d)
    assert est.shat_index[0, 0] == 0 and est.shat_index[1, 0] == 0
    assert est.shat_index[1, 1] == 1
    assert est.shat_index[0, 1] == UNREACHABLE
    c = distortion_cost(ch, est, d)
    np.testing.assert_allclose(c, [0.4, 0.0], atol=1e-15)
    assert min_distortion(c) == 0.0


def test_estimator_flips_above_one_half():
    # the builder rejects q > 1/2, so assemble the channel by hand
    ch, d, _ = build_binary_multiplicative(0.4)
    flipped = StateChannel([0.4, 0.6], ch.kernel, perfect_feedback=True)
    est = optimal_estimator(flipped, d)
    assert est.shat_index[0, 0] == 1


def test_tie_goes_to_smallest_index():
    ch, d, _ = build_binary_multiplicative(0.5)
    est = optimal_estimator(ch, d)
    assert est.shat_index[0, 0] == 0


def test_degenerate_posterior_reconstructs_state():
    k = np.zeros((2, 3, 3))
    for x in range(2):
        for s in range(3):
            k[x, s, s] = 1.0
    ch = StateChannel([0.2, 0.3, 0.5], k, perfect_feedback=True)
    d = DistortionMatrix.hamming(3)
    est = optimal_estimator(ch, d)
    np.testing.assert_array_equal(est.shat_index, np.tile(np.arange(3), (2, 1)))
    np.testing.assert_array_equal(distortion_cost(ch, est, d), 0.0)


def test_two_pam_cost_near_mmse():
    ch, d, _ = build_fading_awgn(AwgnModelSpec(power=10.0, pam_order=2))
    est = optimal_estimator(ch, d, POSTERIOR_MEAN)
    c = distortion_cost(ch, est, d)
    np.testing.assert_allclose(c, 1 / 11, atol=0.005)
    assert min_distortion(c) == pytest.approx(1 / 11, abs=0.005)
    # the grid-restricted estimator can only do worse than the posterior mean
    c_grid = distortion_cost(ch, optimal_estimator(ch, d), d)
    assert np.all(c_grid >= c - 1e-12)


def test_min_distortion_edge_cases():
    assert min_distortion([0.3, 0.3]) == 0.3
    with pytest.raises(ValueError):
        min_distortion([])


def test_posterior_mean_needs_state_values(binary04):
    ch, _, _ = binary04
    bare = StateChannel(ch.p_s, ch.kernel, perfect_feedback=True)
    with pytest.raises(ChannelError):
        optimal_estimator(bare, DistortionMatrix.squared([0.0, 1.0]), POSTERIOR_MEAN)
    with pytest.raises(ChannelError):
        optimal_estimator(ch, DistortionMatrix.hamming(2), POSTERIOR_MEAN)


def test_dimension_mismatch(binary04):
    ch, _, _ = binary04
    with pytest.raises(ChannelError):
        optimal_estimator(ch, DistortionMatrix.hamming(3))


@pytest.mark.parametrize("seed", range(10))
def test_posterior_rows_and_optimality(seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, 3, 3, 2, 3, sparsity=0.4)
    d = random_distortion(rng, 3, 2)
    post, reach = posterior_s_given_xz(ch)
    np.testing.assert_allclose(post.sum(axis=2)[reach], 1.0, atol=1e-9)
    assert np.all((post >= 0) & (post <= 1))
    est = optimal_estimator(ch, d)
    risk = post @ d.d
    chosen = np.take_along_axis(risk, np.maximum(est.shat_index, 0)[..., None], 2)[..., 0]
    assert np.all((chosen[..., None] <= risk + 1e-15)[reach])


@pytest.mark.parametrize("seed", range(5))
def test_cost_matches_joint_sum_and_ignores_input_law(seed):
    rng = np.random.default_rng(100 + seed)
    ch = random_channel(rng, 2, 3, 2, 2, sparsity=0.3)
    d = random_distortion(rng, 3)
    est = optimal_estimator(ch, d)
    c = distortion_cost(ch, est, d)
    prob = table_to_prob(est, 3)
    for _ in range(3):
        p_x = rng.dirichlet(np.ones(2))
        assert p_x @ c == pytest.approx(expected_distortion_joint(ch, p_x, prob, d), abs=1e-12)
    # c depends on the channel alone
    np.testing.assert_array_equal(c, distortion_cost(ch, optimal_estimator(ch, d), d))
    assert np.all(c >= 0) and np.all(c <= d.d_max + 1e-12)


def test_export_csv(tmp_path, binary04):
    ch, d, _ = binary04
    est = optimal_estimator(ch, d)
    path = tmp_path / "est.csv"
    est.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,z,shat_value,reachable"
    assert "0,1,,0" in lines
    assert "1,1,1.0,1" in lines


def test_noiseless_state_feedback_has_zero_cost(rng):
    # z reveals s exactly, y is arbitrary
    nx, ns, ny = 2, 3, 2
    k = np.zeros((nx, ns, ny, ns))
    for x in range(nx):
        for s in range(ns):
            k[x, s, :, s] = rng.dirichlet(np.ones(ny))
    ch = StateChannel(rng.dirichlet(np.ones(ns)), k)
    d = random_distortion(rng, ns)
    d = DistortionMatrix(d.d * (1 - np.eye(ns)))
    c = distortion_cost(ch, optimal_estimator(ch, d), d)
    np.testing.assert_allclose(c, 0.0, atol=1e-15)
    assert conditional_risk(ch, optimal_estimator(ch, d), d).max() < 1e-15
