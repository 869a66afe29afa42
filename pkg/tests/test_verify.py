"""
Tests for sampled sup-norm errors, manifest audits and mode comparison.
"""

from dataclasses import replace

import numpy as np
import pytest

from src.core.errors import DomainError, ManifestError, ShapeError
from src.formats import gen_target
from src.network.network import Domain, Layer, Network
from src.network.ticket import Ticket
from src.verify import COMPARE_COLUMNS, audit, compare_modes, domain_samples, halton_points
from src.verify import sup_error
from tests.conftest import fast_config


def _with_records(ticket: Ticket, records) -> Ticket:
    manifest = replace(ticket.manifest, records=tuple(records))
    return Ticket(ticket.source, ticket.weight_masks, ticket.bias_masks, ticket.scales,
                  ticket.output_rows, manifest)


@pytest.mark.unit
class TestSampling:
    """Test quasi-random points in the input box."""

    def test_points_inside_box(self):
        """Test that points respect per-coordinate bounds."""
        box = Domain(np.array([0.0, -2.0, 5.0]), np.array([1.0, 2.0, 6.0]))
        points = halton_points(box, 500, seed=3)

        assert points.shape == (500, 3)
        assert np.all(points >= box.low)
        assert np.all(points <= box.high)

    def test_prefix_stable(self):
        """Test that more points extend the shorter run."""
        box = Domain.unit(2)

        np.testing.assert_array_equal(halton_points(box, 100, 5)[:50], halton_points(box, 50, 5))

    def test_count_guard(self):
        """Test that at least one point is required."""
        with pytest.raises(DomainError):
            halton_points(Domain.unit(2), 0, 0)

    def test_corners_added(self):
        """Test that box corners are appended while their number is small."""
        assert domain_samples(Domain.unit(3), 10, 0).shape == (18, 3)
        assert domain_samples(Domain.unit(3), 10, 0, corner_limit=4).shape == (10, 3)


@pytest.mark.unit
class TestSupError:
    """Test the sampled sup-norm estimate."""

    def test_dense_ticket_has_zero_error(self, small_target):
        """Test that the target as its own dense ticket has no error."""
        source = small_target.as_role("source")

        assert sup_error(small_target, Ticket.dense(source), 500) == 0.0

    def test_known_offset(self, small_target):
        """Test a bias offset on a linear output layer."""
        last = small_target.layers[-1]
        shifted = Layer(last.weights, last.bias + 0.125, last.activation)
        target = Network((small_target.layers[0], Layer(last.weights, last.bias, "linear")),
                         small_target.domain)
        source = Network((small_target.layers[0], Layer(shifted.weights, shifted.bias,
                                                        "linear")),
                         small_target.domain, role="source")

        assert sup_error(target, Ticket.dense(source), 200) == pytest.approx(0.125)

    def test_monotone_in_samples(self, small_target, l1_ticket):
        """Test that more samples never lower the estimate."""
        few = sup_error(small_target, l1_ticket, 100, seed=2)
        many = sup_error(small_target, l1_ticket, 1000, seed=2)

        assert many >= few

    def test_shape_mismatch(self, l1_ticket):
        """Test that targets of another shape are refused."""
        with pytest.raises(ShapeError):
            sup_error(gen_target([3, 2, 1], seed=0), l1_ticket, 10)


@pytest.mark.integration
class TestAudit:
    """Test re-deriving blocks from the seed."""

    def test_clean_ticket(self, l1_ticket, small_target):
        """Test that a freshly built ticket passes the audit."""
        report = audit(l1_ticket, small_target, samples=2000)

        assert report.consistent
        assert report.flagged == []
        assert report.failed == 0
        assert report.attempted == 260
        assert report.within_eps
        assert report.exit_code == 0
        assert set(report.layer_residuals) == {2, 3}

    def test_audit_without_target(self, twol_ticket):
        """Test that the audit alone skips the error estimate."""
        report = audit(twol_ticket)

        assert report.sup_error is None
        assert report.samples == 0
        assert report.consistent
        assert report.to_dict()["blocks"]["failed"] == 0

    def test_missing_manifest(self, small_target):
        """Test that hand-made tickets cannot be audited."""
        with pytest.raises(ManifestError):
            audit(Ticket.dense(small_target.as_role("source")))

    def test_tampered_indices(self, l1_ticket):
        """Test that swapping a block's subset is flagged and breaks the masks."""
        records = list(l1_ticket.manifest.records)
        position = next(i for i, r in enumerate(records)
                        if r.pool_id is not None and len(r.indices) >= 1)
        original = records[position]
        pool = l1_ticket.manifest.pool(original.pool_id)
        unused = next(p for p in range(pool.size) if p not in original.indices)
        records[position] = replace(original, indices=original.indices[:-1] + (unused,))

        report = audit(_with_records(l1_ticket, records))

        assert len(report.flagged) == 1
        assert report.mask_violations >= 1
        assert report.exit_code == 1

    def test_modified_source_weight(self, l1_ticket):
        """Test that changing one kept source value is counted."""
        layer_index = 1
        mask = l1_ticket.weight_masks[layer_index]
        row, col = np.argwhere(mask)[0]
        layers = list(l1_ticket.source.layers)
        weights = np.array(layers[layer_index].weights)
        weights[row, col] += 0.5
        layers[layer_index] = Layer(weights, layers[layer_index].bias,
                                    layers[layer_index].activation)
        source = Network(tuple(layers), l1_ticket.source.domain, role="source")
        tampered = Ticket(source, l1_ticket.weight_masks, l1_ticket.bias_masks,
                          l1_ticket.scales, l1_ticket.output_rows, l1_ticket.manifest)

        report = audit(tampered)

        assert report.value_violations == 1
        assert not report.consistent

    def test_unknown_pool(self, l1_ticket):
        """Test that records pointing at missing pools raise."""
        records = list(l1_ticket.manifest.records)
        records[0] = replace(records[0], pool_id="L9.w0")

        with pytest.raises(ManifestError):
            audit(_with_records(l1_ticket, records))

    def test_report_dict(self, l1_ticket, small_target):
        """Test the report document."""
        document = audit(l1_ticket, small_target, samples=500).to_dict()

        assert document["eps"] == pytest.approx(0.2)
        assert document["stats"]["depth"] == 3
        assert set(document["layer_residuals"]) == {"2", "3"}


@pytest.mark.integration
class TestCompareModes:
    """Test the construction comparison table."""

    def test_table(self, small_target):
        """Test one row per mode with the expected depths."""
        frame = compare_modes(small_target, fast_config(), samples=500)

        assert list(frame.columns) == COMPARE_COLUMNS
        assert list(frame["mode"]) == ["l+1", "2l"]
        assert list(frame["depth"]) == [3, 4]
        assert (frame["error"] <= 0.2).all()
        assert (frame["wall_time"] >= 0).all()
