import numpy as np
import pytest

from relu_regions import (
    InitSpec, Network, cell_affine_map, forward, he_init, layerwise_scale_biases,
    pattern_at, scale_biases, scale_weights, zero_bias_equivariance_check,
)
from relu_regions.errors import (
    BoundaryPointError, InvalidArchitectureError, InvalidScaleError, PreconditionError, ShapeError,
)
from relu_regions.network import from_json, load, save, to_json

from conftest import random_net


class TestHeInit:
    def test_layer_one_variance_is_two_over_fan_in(self):
        net = he_init(2, [4, 1], InitSpec(weight_scale=1.0, seed=0))
        assert net.weights[0].shape == (4, 2)
        wide = he_init(2, [50_000, 1], InitSpec(weight_scale=1.0, seed=0))
        assert wide.weights[0].var() == pytest.approx(1.0, rel=0.02)

    def test_zero_bias_std_gives_exact_zeros(self):
        net = he_init(3, [5, 5, 1], InitSpec(bias_std=0.0, seed=1))
        assert all(np.all(b == 0) for b in net.biases)

    def test_empirical_variance(self):
        fan_in = 10
        net = he_init(fan_in, [10_000, 1], InitSpec(weight_scale=1.0, seed=3))
        w = net.weights[0].ravel()
        assert w.size == 100_000
        assert abs(w.var() - 2.0 / fan_in) < 0.05 * 2.0 / fan_in

    def test_weight_scale_multiplies_std(self):
        a = he_init(4, [2000, 1], InitSpec(weight_scale=1.0, seed=5))
        b = he_init(4, [2000, 1], InitSpec(weight_scale=3.0, seed=5))
        np.testing.assert_allclose(b.weights[0], 3.0 * a.weights[0])

    def test_deterministic(self):
        spec = InitSpec(bias_std=0.1, seed=42)
        assert he_init(2, [8, 8, 1], spec) == he_init(2, [8, 8, 1], spec)

    def test_adding_layers_keeps_earlier_layers(self):
        spec = InitSpec(bias_std=0.1, seed=7)
        a = he_init(2, [8, 8, 1], spec)
        b = he_init(2, [8, 8, 8, 8, 1], spec)
        np.testing.assert_array_equal(a.weights[0], b.weights[0])
        np.testing.assert_array_equal(a.biases[1], b.biases[1])

    def test_zero_width_rejected(self):
        with pytest.raises(InvalidArchitectureError):
            he_init(2, [4, 0, 1])


class TestForward:
    def test_identity_relu(self):
        net = Network(1, [1, 1], [[[1.0]], [[1.0]]], [[0.0], [0.0]])
        assert forward(net, [2.0])[0][0] == 2.0
        assert forward(net, [-1.0])[0][0] == 0.0

    def test_hat(self, hat):
        assert forward(hat, [0.5])[0][0] == 0.5
        assert forward(hat, [2.0])[0][0] == 0.0
        np.testing.assert_array_equal(forward(hat, [0.5])[1], [0.5, -0.5])

    def test_batch_matches_single(self, rng):
        net = random_net(0)
        x = rng.normal(size=(20, 2))
        out, pre = forward(net, x)
        for i in range(20):
            o, p = forward(net, x[i])
            np.testing.assert_allclose(out[i], o)
            np.testing.assert_allclose(pre[i], p)

    def test_shape_error(self, hat):
        with pytest.raises(ShapeError):
            forward(hat, [1.0, 2.0])

    def test_matches_cell_affine_map(self, rng):
        for seed in range(5):
            net = random_net(seed, input_dim=3, widths=(10, 7, 5), n_out=2)
            for x in rng.normal(size=(50, 3)):
                G, c = cell_affine_map(net, pattern_at(net, x))
                y = net(x)
                np.testing.assert_allclose(G @ x + c, y, rtol=1e-9, atol=1e-9 * (1 + np.abs(y).max()))


class TestPattern:
    def test_hat_patterns(self, hat):
        np.testing.assert_array_equal(pattern_at(hat, [0.5]), [1, -1])
        np.testing.assert_array_equal(pattern_at(hat, [-1.0]), [-1, -1])

    def test_boundary_raises(self, hat):
        with pytest.raises(BoundaryPointError):
            pattern_at(hat, [1.0])

    def test_agrees_with_preactivation_signs(self, rng):
        net = random_net(11, input_dim=4, widths=(6, 6))
        x = rng.normal(size=(200, 4))
        _, pre = forward(net, x)
        np.testing.assert_array_equal(pattern_at(net, x), np.where(pre > 0, 1, -1))


class TestAffineMap:
    def test_hat_maps(self, hat):
        G, c = cell_affine_map(hat, [1, -1])
        assert G[0, 0] == 1.0 and c[0] == 0.0
        G, c = cell_affine_map(hat, [1, 1])
        assert G[0, 0] == -1.0 and c[0] == 2.0

    def test_all_off_is_output_bias(self):
        net = random_net(2, widths=(5, 5), n_out=3)
        G, c = cell_affine_map(net, -np.ones(10))
        assert np.all(G == 0)
        np.testing.assert_array_equal(c, net.biases[-1])


class TestScaling:
    def test_identity_scalings(self):
        net = random_net(0)
        assert scale_biases(net, 1.0) == net
        assert scale_weights(net, 1.0) == net
        assert layerwise_scale_biases(net, 1.0) == net

    @pytest.mark.parametrize("fn", [scale_biases, scale_weights, layerwise_scale_biases])
    @pytest.mark.parametrize("c", [0.0, -1.0, float("nan")])
    def test_invalid_scale(self, fn, c):
        with pytest.raises(InvalidScaleError):
            fn(random_net(0), c)

    def test_bias_scaling_conjugacy(self, rng):
        net = random_net(1, widths=(8, 8, 8))
        scaled = scale_biases(net, 3.0)
        x = rng.normal(size=(1000, 2))
        np.testing.assert_allclose(net(x), scaled(3.0 * x) / 3.0, rtol=1e-9, atol=1e-9)
        assert np.max(np.abs(net(x) - scaled(3.0 * x) / 3.0)) < 1e-6

    def test_weight_scaling_scales_first_layer_gradients(self):
        net = random_net(4)
        np.testing.assert_allclose(scale_weights(net, 2.5).weights[0], 2.5 * net.weights[0])

    def test_weight_bias_duality(self, rng):
        net = random_net(3, widths=(8, 8, 8), bias_std=0.3)
        c = 2.0
        L = net.depth + 1
        a, b = scale_weights(net, c), layerwise_scale_biases(net, c)
        x = rng.normal(size=(1000, 2))
        np.testing.assert_allclose(a(x), c ** L * b(x), rtol=1e-9, atol=1e-12)
        np.testing.assert_array_equal(pattern_at(a, x), pattern_at(b, x))


class TestZeroBias:
    def test_c_equal_one(self, rng):
        net = random_net(0, bias_std=0.0)
        assert zero_bias_equivariance_check(net, rng.normal(size=2), 1.0)

    def test_random_points(self, rng):
        net = random_net(5, widths=(8, 8, 8), bias_std=0.0)
        assert all(zero_bias_equivariance_check(net, x, 17.3) for x in rng.normal(size=(1000, 2)))

    def test_nonzero_bias_precondition(self):
        net = random_net(0, bias_std=0.0)
        biases = [b.copy() for b in net.biases]
        biases[1][0] = 0.01
        with pytest.raises(PreconditionError):
            zero_bias_equivariance_check(net.replace(biases=biases), np.ones(2), 2.0)


class TestSerialisation:
    def test_round_trip(self, tmp_path, rng):
        net = random_net(9, input_dim=5, widths=(7, 3), n_out=4)
        save(net, tmp_path / "n.json")
        back = load(tmp_path / "n.json")
        x = rng.normal(size=(100, 5))
        np.testing.assert_allclose(back(x), net(x), rtol=1e-12, atol=1e-12)
        assert from_json(to_json(net)) == net

    def test_immutable(self):
        net = random_net(0)
        with pytest.raises(AttributeError):
            net.input_dim = 3
        with pytest.raises(ValueError):
            net.weights[0][0, 0] = 1.0
