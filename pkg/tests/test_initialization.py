"""
Unit tests for source initialization plans, rescaling and retargeting.
"""

import numpy as np
import pytest

from src.core.errors import ActivationError, DomainError, ShapeError
from src.initialization import (
    InitPlan,
    LayerInit,
    init_convenient,
    init_looks_linear,
    init_thm1_scaled,
    materialize,
    materialize_layer,
    plan_convenient,
    plan_looks_linear,
    plan_thm1_scaled,
    rescale_to_convenient,
    retarget_ticket,
    second_layer_range,
)
from src.network.activation import spec_for
from src.network.network import Layer, Network, forward
from src.network.ticket import Ticket, forward_ticket


def _scaled(net: Network, sigmas) -> Network:
    layers = tuple(Layer(layer.weights * s, layer.bias * s, layer.activation)
                   for layer, s in zip(net.layers, sigmas))
    return Network(layers, net.domain, role="source")


@pytest.mark.unit
class TestConvenient:
    """Test the U[-1, 1] scheme with zero deeper biases."""

    def test_ranges_and_zero_biases(self):
        """Test parameter ranges per layer."""
        net = init_convenient([3, 5, 4, 2], seed=0)

        assert net.arch == [3, 5, 4, 2]
        for layer in net.layers:
            assert np.all(np.abs(layer.weights) <= 1.0)
        assert np.any(net.layers[0].bias != 0.0)
        assert np.all(net.layers[1].bias == 0.0)
        assert np.all(net.layers[2].bias == 0.0)

    def test_deterministic(self):
        """Test that the same seed draws the same network."""
        first = init_convenient([2, 6, 1], seed=4)
        second = init_convenient([2, 6, 1], seed=4)

        for a, b in zip(first.layers, second.layers):
            np.testing.assert_array_equal(a.weights, b.weights)
            np.testing.assert_array_equal(a.bias, b.bias)

    def test_prefix_stable_rows(self):
        """Test that adding rows keeps the earlier rows unchanged."""
        small = materialize_layer(plan_convenient([2, 4, 1], seed=9), 1)
        large = materialize_layer(plan_convenient([2, 8, 1], seed=9), 1)

        np.testing.assert_array_equal(large.weights[:4], small.weights)
        np.testing.assert_array_equal(large.bias[:4], small.bias)

    def test_prefix_stable_columns(self):
        """Test that adding inputs keeps the earlier columns unchanged."""
        small = materialize_layer(plan_convenient([2, 4, 1], seed=9), 1)
        large = materialize_layer(plan_convenient([3, 4, 1], seed=9), 1)

        np.testing.assert_array_equal(large.weights[:, :2], small.weights)

    def test_activation_list(self):
        """Test per-layer activations and their length check."""
        net = init_convenient([2, 3, 1], seed=0, activations=["tanh", "linear"])

        assert net.activations == ["tanh", "linear"]
        with pytest.raises(ShapeError):
            init_convenient([2, 3, 1], seed=0, activations=["relu"])


@pytest.mark.unit
class TestLooksLinear:
    """Test mirrored initialization."""

    def test_mirrored_rows_and_columns(self):
        """Test that the second half of each even dimension is the negated first half."""
        net = init_looks_linear([2, 4, 1], seed=1)
        first, second = net.layers[0].weights, net.layers[1].weights

        np.testing.assert_array_equal(first[2:], -first[:2])
        np.testing.assert_array_equal(first[:, 1], -first[:, 0])
        np.testing.assert_array_equal(second[:, 2:], -second[:, :2])

    def test_mirror_pairs(self):
        """Test the recorded row pairs."""
        plan = plan_looks_linear([2, 4, 1], seed=1)

        assert plan.mirror_pairs(1) == [(0, 2), (1, 3)]
        assert plan.mirror_pairs(2) == []

    def test_odd_hidden_width(self):
        """Test that odd hidden widths cannot be mirrored."""
        with pytest.raises(ShapeError):
            plan_looks_linear([2, 3, 1], seed=0)


@pytest.mark.unit
class TestScaledScheme:
    """Test the sigma-scaled first two layers."""

    def test_second_layer_range(self):
        """Test 1/(|m+ + m-| sigma) for several activations."""
        assert second_layer_range(spec_for("relu"), 0.5) == pytest.approx(2.0)
        assert second_layer_range(spec_for("tanh"), 0.5) == pytest.approx(1.0)
        assert second_layer_range(spec_for("sigmoid"), 0.5) == pytest.approx(4.0)

    @pytest.mark.parametrize("sigma", [0.0, -0.1, 1.5])
    def test_sigma_domain(self, sigma):
        """Test that sigma outside (0, 1] is refused."""
        with pytest.raises(DomainError):
            second_layer_range(spec_for("tanh"), sigma)

    def test_ranges(self):
        """Test the drawn ranges of the scaled scheme."""
        net = init_thm1_scaled([2, 6, 3], spec_for("tanh"), sigma=0.25, seed=2)

        assert np.all(np.abs(net.layers[0].weights) <= 0.25)
        assert np.all(np.abs(net.layers[0].bias) <= 0.25)
        assert np.all(np.abs(net.layers[1].weights) <= 2.0)
        assert np.max(np.abs(net.layers[1].weights)) > 1.0
        assert np.all(net.layers[1].bias == 0.0)

    def test_looks_linear_variant(self):
        """Test that the scaled scheme can mirror the first hidden layer."""
        plan = plan_thm1_scaled([2, 4, 2], spec_for("tanh"), 0.5, seed=3, looks_linear=True)
        net = materialize(plan)

        np.testing.assert_array_equal(net.layers[0].weights[2:], -net.layers[0].weights[:2])
        np.testing.assert_array_equal(net.layers[1].weights[:, 2:],
                                      -net.layers[1].weights[:, :2])
        assert plan.scheme == "thm1_scaled"

    def test_needs_two_layers(self):
        """Test that a single layer cannot use the scaled scheme."""
        with pytest.raises(ShapeError):
            plan_thm1_scaled([2, 1], spec_for("relu"), 0.5, seed=0)


@pytest.mark.unit
class TestPlan:
    """Test plan records."""

    def test_dict_round_trip(self):
        """Test that a plan survives to_dict/from_dict."""
        plan = plan_thm1_scaled([2, 4, 2], spec_for("sigmoid"), 0.5, seed=3, looks_linear=True)

        assert InitPlan.from_dict(plan.to_dict()) == plan
        assert plan.arch == [2, 4, 2]

    def test_unknown_scheme(self):
        """Test that unknown schemes are refused."""
        with pytest.raises(DomainError):
            InitPlan("xavier", 0, (LayerInit(2, 2, 1.0, 0.0, "relu"),))

    def test_layers_must_compose(self):
        """Test that consecutive widths must agree."""
        with pytest.raises(ShapeError):
            InitPlan("convenient", 0, (LayerInit(2, 3, 1.0, 0.0, "relu"),
                                       LayerInit(4, 1, 1.0, 0.0, "relu")))

    def test_layer_init_guards(self):
        """Test LayerInit argument checks."""
        with pytest.raises(ShapeError):
            LayerInit(2, 3, 1.0, 0.0, "relu", mirror_rows=True)
        with pytest.raises(DomainError):
            LayerInit(2, 2, 0.0, 0.0, "relu")


@pytest.mark.unit
class TestRescaling:
    """Test lambda-rescaling of homogeneous networks."""

    def test_dense_ticket_matches_rescaled(self):
        """Test that the returned scales reproduce the rescaled network."""
        net = init_convenient([2, 5, 1], seed=5)
        rescaled, lambdas = rescale_to_convenient(net, [0.5, 0.25])
        dense = Ticket.dense(net)
        ticket = Ticket(net, dense.weight_masks, dense.bias_masks, tuple(lambdas))
        x = np.array([[0.3, -0.8], [1.0, 0.2], [-0.5, -0.5]])

        assert lambdas == [2.0, 4.0]
        np.testing.assert_allclose(forward_ticket(ticket, x), forward(rescaled, x), rtol=1e-12)

    def test_non_homogeneous_refused(self):
        """Test that smooth activations cannot be rescaled exactly."""
        net = init_convenient([2, 3, 1], seed=0, activations=["tanh", "linear"])
        with pytest.raises(ActivationError):
            rescale_to_convenient(net, [0.5, 0.5])

    def test_scale_checks(self):
        """Test the length and sign checks of the scales."""
        net = init_convenient([2, 3, 1], seed=0)
        with pytest.raises(ShapeError):
            rescale_to_convenient(net, [0.5])
        with pytest.raises(DomainError):
            rescale_to_convenient(net, [0.5, 0.0])

    def test_retarget_ticket(self):
        """Test that a retargeted ticket evaluates like the original."""
        convenient = init_convenient([2, 4, 1], seed=6)
        sigmas = [0.1, 0.3]
        realistic = _scaled(convenient, sigmas)
        masks = (np.array([[True, False], [True, True], [False, True], [False, False]]),
                 np.array([[True, True, False, True]]))
        biases = (np.array([True, False, True, False]), np.array([False]))
        ticket = Ticket(convenient, masks, biases)
        x = np.array([[0.4, -0.9], [-1.0, 1.0]])

        moved = retarget_ticket(ticket, realistic, sigmas)

        assert moved.source is realistic
        assert moved.scales == pytest.approx((10.0, 1.0 / 0.3))
        np.testing.assert_allclose(forward_ticket(moved, x), forward_ticket(ticket, x),
                                   rtol=1e-12, atol=1e-15)

    def test_retarget_mismatch(self):
        """Test that a source scaled by other factors is refused."""
        convenient = init_convenient([2, 4, 1], seed=6)
        realistic = _scaled(convenient, [0.1, 0.3])
        with pytest.raises(DomainError):
            retarget_ticket(Ticket.dense(convenient), realistic, [0.2, 0.3])
