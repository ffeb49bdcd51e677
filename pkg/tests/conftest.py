import numpy as np
import pytest

from capdist import DistortionMatrix, StateChannel, build_binary_multiplicative

ACCEPTANCE_LINES = []


def random_channel(rng, nx, ns, ny, nz=None, perfect=False, sparsity=0.0):
    """Channel with Dirichlet-random kernel; ``sparsity`` zeroes entries at random."""
    p_s = rng.dirichlet(np.ones(ns))
    if perfect:
        w = rng.dirichlet(np.ones(ny), size=(nx, ns))
        if sparsity:
            w = w * (rng.random(w.shape) > sparsity)
            w[..., 0] += (w.sum(axis=-1) == 0)
            w /= w.sum(axis=-1, keepdims=True)
        return StateChannel(p_s, w, perfect_feedback=True)
    k = rng.dirichlet(np.ones(ny * nz), size=(nx, ns))
    if sparsity:
        k = k * (rng.random(k.shape) > sparsity)
        k[..., 0] += (k.sum(axis=-1) == 0)
        k /= k.sum(axis=-1, keepdims=True)
    return StateChannel(p_s, k.reshape(nx, ns, ny, nz))


def random_distortion(rng, ns, nshat=None):
    nshat = nshat or ns
    return DistortionMatrix(rng.random((ns, nshat)) * 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def binary04():
    return build_binary_multiplicative(0.4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
