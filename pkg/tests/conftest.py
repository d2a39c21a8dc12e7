import numpy as np
import pytest

from relu_regions import AffineSlice, InitSpec, Network, he_init


def make_hat():
    """x -> relu(x) - 2 relu(x - 1)."""
    return Network(1, [2, 1], [[[1.0], [1.0]], [[1.0, -2.0]]], [[0.0, -1.0], [0.0]])


def random_net(seed, input_dim=2, widths=(8, 8, 8), bias_std=0.5, n_out=1, weight_scale=1.0):
    return he_init(input_dim, list(widths) + [n_out],
                   InitSpec(weight_scale=weight_scale, bias_std=bias_std, seed=seed))


@pytest.fixture
def hat():
    return make_hat()


@pytest.fixture
def line1d():
    return AffineSlice([0.0], [[1.0]])


@pytest.fixture
def plane2d():
    return AffineSlice.coordinate_plane(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
