"""
Unit tests for the error budget and the width calculators.
"""

import math

import numpy as np
import pytest

from src.budget import (
    WIDTH_MODES,
    budget_from_norms,
    dense_param_count,
    error_budget,
    interval_bounds,
    layer_norms,
    layer_peaks,
    perturb_within_budget,
    rho_bound,
    sigma_eps2,
    width_bounds,
)
from src.core.errors import BudgetUnderflowError, DomainError
from src.core.rng import stream
from src.formats import gen_target
from src.network.activation import invert_g, spec_for
from src.network.network import forward, forward_layers
from src.subsetsum import UniformContainment


def _box_points(net, n: int, seed: int) -> np.ndarray:
    unit = stream(seed, 99).random((n, net.n_inputs))
    points = net.domain.low + unit * (net.domain.high - net.domain.low)
    return np.vstack([points, net.domain.corners()])


@pytest.mark.unit
class TestLayerNorms:
    """Test interval and sampled layer norms."""

    def test_interval_bounds_contain_samples(self):
        """Test that every sampled activation lies inside its interval."""
        net = gen_target([3, 5, 4, 2], "tanh", seed=3)
        outputs = forward_layers(net, _box_points(net, 500, 1))

        for (low, high), x in zip(interval_bounds(net), outputs):
            assert np.all(x >= low - 1e-12)
            assert np.all(x <= high + 1e-12)

    def test_input_norm_of_unit_box(self):
        """Test that M_0 of [-1, 1]^n is n."""
        norms, w_inf = layer_norms(gen_target([3, 4, 1], seed=0))

        assert norms[0] == pytest.approx(3.0)
        assert len(norms) == 3
        assert len(w_inf) == 2

    def test_row_sum_norm(self):
        """Test ||W||_inf as the largest absolute row sum."""
        net = gen_target([2, 3, 1], seed=4)
        _, w_inf = layer_norms(net)

        expected = np.abs(net.layers[0].weights).sum(axis=1).max()
        assert w_inf[0] == pytest.approx(expected)

    def test_sampled_norms_below_interval(self):
        """Test that sampled estimates never exceed the sound bound times the safety factor."""
        net = gen_target([3, 6, 2], seed=5)
        interval, _ = layer_norms(net, "interval")
        sampled, _ = layer_norms(net, "sampled", samples=400, safety=1.05)

        for bound, estimate in zip(interval, sampled):
            assert estimate <= 1.05 * bound + 1e-12

    def test_unknown_method(self):
        """Test that unknown norm methods are refused."""
        with pytest.raises(DomainError):
            layer_norms(gen_target([2, 2, 1], seed=0), "exact")

    def test_peaks(self):
        """Test that the input peak of the unit box is 1."""
        peaks = layer_peaks(gen_target([2, 3, 1], seed=0))

        assert peaks[0] == 1.0
        assert len(peaks) == 3


@pytest.mark.unit
class TestBudget:
    """Test the per-layer tolerance formula."""

    def test_closed_form_by_hand(self):
        """Test three layers against a hand evaluation."""
        eps_layers = budget_from_norms(0.3, [2, 2, 1], [1.0, 2.0, 3.0], [0.5, 1.5, 0.7], 1.0)

        assert eps_layers[0] == pytest.approx(0.05 / 3.52)
        assert eps_layers[1] == pytest.approx(0.05 / 3.3)
        assert eps_layers[2] == pytest.approx(0.1 / 4.4)

    def test_lipschitz_power(self):
        """Test that T enters with exponent L - l + 1."""
        base = budget_from_norms(0.3, [2, 2, 1], [1.0, 2.0, 3.0], [0.5, 1.5, 0.7], 1.0)
        doubled = budget_from_norms(0.3, [2, 2, 1], [1.0, 2.0, 3.0], [0.5, 1.5, 0.7], 2.0)

        assert [b / d for b, d in zip(base, doubled)] == pytest.approx([8.0, 4.0, 2.0])

    def test_error_budget_fields(self, small_target):
        """Test the budget record of a small target."""
        budget = error_budget(small_target, 0.1)

        assert budget.depth == 2
        assert budget.widths == [3, 1]
        assert budget.lipschitz == 1.0
        assert budget.sound
        assert budget.eps_for(1) == budget.eps_layers[0]
        assert all(0 < e < 0.1 for e in budget.eps_layers)
        assert budget.to_dict()["norm_method"] == "interval"

    def test_sampled_budget_is_not_sound(self, small_target):
        """Test that sampled norms mark the budget as unsound."""
        budget = error_budget(small_target, 0.1, method="sampled", samples=200)

        assert not budget.sound
        assert budget.to_dict()["sound"] is False

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.2])
    def test_eps_domain(self, small_target, eps):
        """Test that eps outside (0, 1) is refused."""
        with pytest.raises(DomainError):
            error_budget(small_target, eps)

    def test_underflow(self, small_target):
        """Test that tolerances below the floor raise."""
        with pytest.raises(BudgetUnderflowError, match="budget underflow"):
            error_budget(small_target, 0.1, underflow=0.5)

    @pytest.mark.parametrize("eps", [0.1, 0.05])
    def test_perturbation_stays_within_eps(self, eps):
        """Test 50 random nets of depth <= 4 and width <= 8 over all activation families."""
        activations = ["relu", "lrelu:0.1", "tanh", "sigmoid"]
        violations = []
        for index in range(50):
            shape = stream(index, 7)
            depth = int(shape.integers(1, 5))
            arch = [int(n) for n in shape.integers(1, 9, size=depth + 1)]
            activation = activations[index % len(activations)]
            net = gen_target(arch, activation, sparsity=float(shape.uniform(0.0, 0.5)),
                             seed=index)
            budget = error_budget(net, eps)
            moved = perturb_within_budget(net, budget, seed=1000 + index)
            points = _box_points(net, 1000, index)

            error = np.max(np.abs(forward(net, points) - forward(moved, points)))

            if error > eps:
                violations.append((index, arch, activation, error))

        assert violations == []

    def test_perturbation_is_bounded(self, small_target):
        """Test that each parameter moves by at most its layer tolerance."""
        budget = error_budget(small_target, 0.2)
        moved = perturb_within_budget(small_target, budget, seed=3)

        for old, new, eps_l in zip(small_target.layers, moved.layers, budget.eps_layers):
            assert np.max(np.abs(old.weights - new.weights)) <= eps_l
            assert np.max(np.abs(old.bias - new.bias)) <= eps_l


@pytest.mark.unit
class TestSigmaEps2:
    """Test the first-layer scale and linearization error."""

    def test_unbounded_activation(self):
        """Test that relu needs neither scaling nor linearization."""
        sigma, eps2 = sigma_eps2(spec_for("relu"), 0.01, 2, 1.0, 0.05, 3)

        assert sigma == 1.0
        assert math.isinf(eps2)

    @pytest.mark.parametrize("tag", ["tanh", "sigmoid"])
    def test_bounded_activation(self, tag):
        """Test that sigma matches a(eps'')/M and eps'' is small."""
        spec = spec_for(tag)
        sigma, eps2 = sigma_eps2(spec, 0.01, 4, 2.0, 0.05, 3)

        assert 0 < eps2 < 0.01
        assert sigma == pytest.approx(min(1.0, spec.radius(eps2) / 2.0))

    def test_monotone_in_eps(self):
        """Test that a tighter eps' gives a smaller eps''."""
        spec = spec_for("tanh")
        _, loose = sigma_eps2(spec, 0.05, 4, 1.0, 0.05, 3)
        _, tight = sigma_eps2(spec, 0.005, 4, 1.0, 0.05, 3)

        assert tight < loose

    def test_domain(self):
        """Test the argument checks."""
        with pytest.raises(DomainError):
            sigma_eps2(spec_for("tanh"), 0.0, 2, 1.0, 0.05, 3)
        with pytest.raises(DomainError):
            sigma_eps2(spec_for("tanh"), 0.1, 2, 1.0, 1.0, 3)
        with pytest.raises(DomainError):
            sigma_eps2(spec_for("tanh"), 0.1, 0, 1.0, 0.05, 3)
        with pytest.raises(DomainError):
            sigma_eps2(spec_for("tanh"), 0.1, 2, 0.0, 0.05, 3)

    @pytest.mark.parametrize("tag", ["tanh", "sigmoid"])
    def test_small_log_factor_is_not_floored(self, tag):
        """Test that a log factor below 1 enters eps'' unchanged."""
        spec = spec_for(tag)
        eps1, n0, M, delta1, n_t1 = 0.5, 1, 1.0, 0.9, 1
        log_term = math.log(n0 / min(delta1 / n_t1, eps1 / (spec.lipschitz * M)))
        assert 0 < log_term < 1

        sigma, eps2 = sigma_eps2(spec, eps1, n0, M, delta1, n_t1)

        y = eps1 / (spec.lipschitz * n0 * (M / abs(spec.slope_sum)) * log_term)
        assert eps2 == pytest.approx(invert_g(spec, min(y, spec.g(1.0))))
        assert sigma == pytest.approx(min(1.0, spec.radius(eps2) / M))


@pytest.mark.unit
class TestWidths:
    """Test the width formulas."""

    def test_rho(self):
        """Test the worst-case copy count for N_t = 100."""
        assert rho_bound(100, 0.01, 0.05, 1.0, 0.1) == 730

    def test_dense_param_count(self):
        """Test weight plus bias counts."""
        assert dense_param_count([4, 8, 2]) == 58
        assert dense_param_count([2, 1]) == 3

    def test_two_for_one(self):
        """Test that each target layer becomes a slab and an output layer."""
        report = width_bounds([2, 3, 1], 0.1, 0.05, "two_for_one")

        assert len(report.widths) == 4
        assert report.widths[1] == 3
        assert report.widths[3] == 1
        assert report.rho is None
        expected = math.ceil(2 * math.log(2 / min(0.1, 0.05 / 3)))
        assert report.widths[0] == expected

    def test_one_for_one(self):
        """Test L + 1 widths with the pool as copy count."""
        report = width_bounds([2, 3, 1], 0.1, 0.05, "one_for_one", pool=15)

        assert len(report.widths) == 3
        assert report.widths[-1] == 1
        assert report.rho == 15
        assert report.copy_plan == [15, 1]

    def test_full_form_uses_rho(self):
        """Test that the worst-case form reports rho."""
        report = width_bounds([4, 8, 2], 0.01, 0.05, "full_L_plus_1")

        assert report.rho == rho_bound(58, 0.01, 0.05, 1.0, 0.1)
        assert report.copy_plan == [report.rho, 1]
        assert report.to_dict()["mode"] == "full_L_plus_1"

    def test_containment_widens(self):
        """Test that a weaker uniform component raises the bounds."""
        plain = width_bounds([2, 3, 1], 0.1, 0.05, "two_for_one")
        weak = width_bounds([2, 3, 1], 0.1, 0.05, "two_for_one",
                            containment=UniformContainment(alpha=0.5, c=1.0, h=1.0))

        assert weak.widths[0] > plain.widths[0]

    def test_modes(self):
        """Test the mode list and unknown modes."""
        assert WIDTH_MODES == ("two_for_one", "one_for_one", "full_L_plus_1")
        with pytest.raises(DomainError):
            width_bounds([2, 3, 1], 0.1, 0.05, "three_for_one")

    def test_argument_checks(self):
        """Test that invalid constants are refused."""
        with pytest.raises(DomainError):
            width_bounds([2, 3, 1], 0.1, 0.05, "two_for_one", C=0.0)
        with pytest.raises(DomainError):
            width_bounds([2, 3, 1], 0.1, 1.5, "two_for_one")
        with pytest.raises(DomainError):
            width_bounds([2], 0.1, 0.05, "two_for_one")
