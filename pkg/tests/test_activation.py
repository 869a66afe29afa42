"""
Unit tests for the activation registry and linearization machinery.
"""

import math

import numpy as np
import pytest

from src.core.errors import ActivationError, DomainError, RadiusError
from src.network.activation import (
    UNCONSTRAINED,
    check_linearization,
    identity_residual,
    invert_g,
    is_registered,
    register_activation,
    spec_for,
    unregister_activation,
)


@pytest.mark.unit
class TestRegistry:
    """Test activation lookup."""

    def test_builtin_constants(self):
        """Test the linearization constants of the built-in activations."""
        relu, tanh, sigmoid = spec_for("relu"), spec_for("tanh"), spec_for("sigmoid")

        assert (relu.m_plus, relu.m_minus, relu.d) == (1.0, 0.0, 0.0)
        assert (tanh.m_plus, tanh.m_minus, tanh.d) == (1.0, 1.0, 0.0)
        assert (sigmoid.m_plus, sigmoid.m_minus, sigmoid.d) == (0.25, 0.25, 0.5)
        assert sigmoid.lipschitz == 0.25
        assert relu.homogeneous and not tanh.homogeneous

    def test_phi0(self):
        """Test the value at zero."""
        assert spec_for("relu").phi0 == 0.0
        assert spec_for("sigmoid").phi0 == 0.5

    def test_leaky_relu_tag(self):
        """Test parametrized leaky-ReLU tags."""
        spec = spec_for("lrelu:0.1")

        assert spec.m_minus == pytest.approx(0.1)
        assert spec.homogeneous
        np.testing.assert_allclose(spec(np.array([-2.0, 3.0])), [-0.2, 3.0])

    @pytest.mark.parametrize("tag", ["swish", "lrelu:abc", "lrelu:-0.5", "lrelu:0", "lrelu:inf"])
    def test_unknown_tags(self, tag):
        """Test that unknown or malformed tags are rejected."""
        with pytest.raises(ActivationError):
            spec_for(tag)
        assert not is_registered(tag)

    def test_sigmoid_is_stable_for_large_inputs(self):
        """Test that the sigmoid does not overflow."""
        values = spec_for("sigmoid")(np.array([-1000.0, 1000.0]))

        np.testing.assert_allclose(values, [0.0, 1.0])

    def test_radius(self):
        """Test validity radii."""
        assert spec_for("relu").radius(0.01) == UNCONSTRAINED
        assert not spec_for("relu").bounded_radius
        assert spec_for("tanh").radius(1e-3) == pytest.approx((3e-3) ** (1 / 3))
        assert spec_for("sigmoid").radius(1e-3) == pytest.approx((48e-3) ** (1 / 3))
        assert spec_for("tanh").bounded_radius


@pytest.mark.unit
class TestCustomActivations:
    """Test registration of user-supplied activations."""

    def test_register_and_remove(self):
        """Test registering an exactly piecewise-linear activation."""
        try:
            spec = register_activation("double_relu", lambda x: 2.0 * np.maximum(x, 0.0),
                                       lipschitz=2.0, m_plus=2.0, m_minus=0.0, d=0.0)
            assert spec_for("double_relu") is spec
            assert is_registered("double_relu")
        finally:
            unregister_activation("double_relu")
        assert not is_registered("double_relu")

    def test_absolute_value_refused(self):
        """Test that cancelling slopes are refused."""
        with pytest.raises(ActivationError, match="slopes cancel"):
            register_activation("abs", np.abs, lipschitz=1.0, m_plus=1.0, m_minus=-1.0, d=0.0)

    def test_shifted_relu_refused(self):
        """Test that a wrong linearization claim fails the grid scan."""
        with pytest.raises(ActivationError, match="linearization bound"):
            register_activation("shifted", lambda x: np.maximum(x - 0.1, 0.0), lipschitz=1.0,
                                m_plus=1.0, m_minus=0.0, d=0.0)
        assert not is_registered("shifted")

    def test_duplicate_tag_refused(self):
        """Test that built-in tags cannot be redefined."""
        with pytest.raises(ActivationError, match="already registered"):
            register_activation("relu", np.abs, 1.0, 1.0, 0.0, 0.0)

    def test_builtin_cannot_be_removed(self):
        """Test that built-in tags stay registered."""
        with pytest.raises(ActivationError):
            unregister_activation("tanh")


@pytest.mark.unit
class TestLinearization:
    """Test the identity residual and the inverse of g."""

    @pytest.mark.parametrize("tag", ["relu", "tanh", "sigmoid", "linear", "lrelu:0.3"])
    def test_builtin_grid_scan(self, tag):
        """Test that every built-in activation passes its own grid scan."""
        assert check_linearization(spec_for(tag)) <= 1.0 + 1e-9

    @pytest.mark.parametrize("tag", ["tanh", "sigmoid"])
    @pytest.mark.parametrize("eps2", [1e-1, 1e-2, 1e-3])
    def test_identity_residual_bound(self, tag, eps2):
        """Test the mirrored-pair identity error on a grid inside the radius."""
        spec = spec_for(tag)
        a = spec.radius(eps2)
        bound = 2.0 * eps2 / spec.slope_sum

        worst = max(identity_residual(spec, float(x), eps2) for x in np.linspace(-a, a, 2001))

        assert worst <= bound * (1.0 + 1e-9)

    @pytest.mark.parametrize("tag", ["relu", "lrelu:0.5", "linear"])
    def test_identity_residual_exact_for_piecewise_linear(self, tag):
        """Test that piecewise-linear activations represent the identity exactly."""
        spec = spec_for(tag)
        for x in np.linspace(-3.0, 3.0, 61):
            assert identity_residual(spec, float(x), 1e-3) == 0.0

    def test_identity_residual_outside_radius(self):
        """Test that inputs beyond a(eps'') are refused."""
        spec = spec_for("tanh")
        with pytest.raises(RadiusError):
            identity_residual(spec, 2.0 * spec.radius(1e-3), 1e-3)

    def test_invert_g_tanh_closed_form(self):
        """Test g^-1 for tanh against (y 3^(1/3))^(3/2)."""
        eps2 = invert_g(spec_for("tanh"), 0.01)

        assert eps2 == pytest.approx((0.01 * 3 ** (1 / 3)) ** 1.5, rel=1e-9)
        assert eps2 == pytest.approx(1.732e-3, rel=1e-3)

    def test_invert_g_sigmoid(self):
        """Test that g(g^-1(y)) = y for the sigmoid."""
        spec = spec_for("sigmoid")
        eps2 = invert_g(spec, 0.01)

        assert spec.g(eps2) == pytest.approx(0.01, abs=1e-12)
        assert eps2 == pytest.approx((0.01 * 48 ** (1 / 3)) ** 1.5, rel=1e-9)

    def test_invert_g_upper_end(self):
        """Test that y = g(1) maps back to 1."""
        spec = spec_for("tanh")
        assert invert_g(spec, spec.g(1.0)) == 1.0

    @pytest.mark.parametrize("y", [0.0, -0.1, 5.0])
    def test_invert_g_domain(self, y):
        """Test that y outside (0, g(1)] is refused."""
        with pytest.raises(DomainError):
            invert_g(spec_for("tanh"), y)

    def test_invert_g_unbounded(self):
        """Test that activations without a radius limit are unconstrained."""
        assert math.isinf(invert_g(spec_for("relu"), 0.5))
