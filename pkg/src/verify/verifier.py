"""
Ticket verification: sampled sup-norm error, manifest audit and mode comparison.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..construct.blocks import collect_masks
from ..construct.pipeline import construct
from ..core.config import TicketForgeConfig, load_default_config
from ..core.errors import ManifestError, ShapeError
from ..initialization.plan import materialize
from ..network.manifest import BlockRecord, ConstructionManifest, Pool
from ..network.network import Network, forward, forward_layers
from ..network.ticket import Ticket, TicketStats, forward_ticket, ticket_stats
from .sampling import domain_samples

logger = logging.getLogger(__name__)

AUDIT_TOLERANCE = 1e-12
BATCH = 2048
COMPARE_COLUMNS = ["mode", "error", "params", "max_width", "depth", "wall_time"]


@dataclass
class VerificationReport:
    """Outcome of auditing (and optionally measuring) one ticket."""
    sup_error: Optional[float]
    samples: int
    layer_residuals: Dict[int, float]
    stats: TicketStats
    attempted: int
    achieved: int
    failed: int
    seed: int
    eps: Optional[float] = None
    flagged: List[str] = field(default_factory=list)
    value_violations: int = 0
    cancellation_violations: int = 0
    mask_violations: int = 0

    @property
    def within_eps(self) -> bool:
        if self.sup_error is None or self.eps is None:
            return True
        return self.sup_error <= self.eps

    @property
    def consistent(self) -> bool:
        """True when the audit found nothing to flag."""
        return not (self.flagged or self.value_violations or self.cancellation_violations
                    or self.mask_violations)

    @property
    def exit_code(self) -> int:
        """2 when a block failed, 1 when the error exceeds eps or the audit flagged something."""
        if self.failed:
            return 2
        return 0 if self.within_eps and self.consistent else 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sup_error": self.sup_error,
            "samples": self.samples,
            "eps": self.eps,
            "layer_residuals": {str(k): v for k, v in sorted(self.layer_residuals.items())},
            "stats": self.stats.to_dict(),
            "blocks": {"attempted": self.attempted, "achieved": self.achieved,
                       "failed": self.failed},
            "seed": self.seed,
            "flagged": list(self.flagged),
            "value_violations": self.value_violations,
            "cancellation_violations": self.cancellation_violations,
            "mask_violations": self.mask_violations,
        }


def sup_error(target: Network, ticket: Ticket, n_samples: int = 10_000, seed: int = 0,
              corner_limit: int = 4096) -> float:
    """
    Sampled estimate of sup_x ||f_t(x) - f_ticket(x)||_1.

    A max over finitely many points, hence a lower bound of the true sup norm.
    Growing ``n_samples`` with the same seed never lowers the estimate.
    """
    if target.n_inputs != ticket.source.n_inputs or target.n_outputs != ticket.n_outputs:
        raise ShapeError(f"target maps {target.n_inputs}->{target.n_outputs} but the ticket "
                         f"maps {ticket.source.n_inputs}->{ticket.n_outputs}")
    points = domain_samples(target.domain, n_samples, seed, corner_limit)
    worst = 0.0
    for start in range(0, points.shape[0], BATCH):
        batch = points[start:start + BATCH]
        gap = np.sum(np.abs(forward(target, batch) - forward_ticket(ticket, batch)), axis=1)
        worst = max(worst, float(gap.max()))
    return worst


def _pool_values(pool: Pool, source: Network, at_zero: List[np.ndarray]) -> np.ndarray:
    """Pool values re-derived from the regenerated source."""
    members = list(pool.members)
    if pool.kind == "hidden_weight":
        return source.layers[pool.layer - 2].weights[members, pool.input_column]
    if pool.kind == "hidden_bias":
        hidden = source.layers[pool.layer - 2]
        values = hidden.spec(hidden.bias[members])
        if pool.mirrored:
            values = values - hidden.spec(hidden.bias[list(pool.partners)])
        return values
    if pool.kind == "copies":
        return np.ones(len(members))
    if pool.kind == "carriers":
        return at_zero[pool.layer - 1][0, members]
    raise ManifestError(f"Unknown pool kind {pool.kind!r} in pool {pool.pool_id!r}")


def _block_label(record: BlockRecord) -> str:
    where = "bias" if record.input_neuron is None else f"input {record.input_neuron}"
    return (f"layer {record.layer} row {record.row} neuron {record.target_neuron} "
            f"copy {record.copy} {record.kind} ({where})")


def _addressable(record: BlockRecord, manifest: ConstructionManifest, source: Network) -> bool:
    """Whether the record's row and pool positions exist in the source."""
    pool = manifest.pool(record.pool_id)
    if pool is None:
        return True
    if pool.layer < 1 or pool.layer > source.depth:
        return False
    if not 0 <= record.row < source.layers[pool.layer - 1].n_out:
        return False
    return all(0 <= p < pool.size for p in record.indices)


def _count_value_violations(ticket: Ticket, regenerated: Network) -> int:
    count = 0
    for mine, truth, wm, bm in zip(ticket.source.layers, regenerated.layers,
                                   ticket.weight_masks, ticket.bias_masks):
        count += int(np.count_nonzero(wm & (mine.weights != truth.weights)))
        count += int(np.count_nonzero(bm & (mine.bias != truth.bias)))
    return count


def _regenerate(ticket: Ticket, manifest: ConstructionManifest) -> Network:
    regenerated = materialize(manifest.init_plan)
    if regenerated.arch != ticket.source.arch:
        raise ManifestError(f"init plan yields architecture {regenerated.arch}, ticket source "
                            f"has {ticket.source.arch}")
    return Network(regenerated.layers, ticket.source.domain, role="source")


def audit(ticket: Ticket, target: Optional[Network] = None, samples: int = 10_000,
          seed: int = 0, corner_limit: int = 4096) -> VerificationReport:
    """
    Re-derive every block of a ticket from its seed and compare with the manifest.

    The source is regenerated from the init plan. Kept parameters must equal
    the regenerated values, pool values and block residuals must match the
    manifest within 1e-12, achieved blocks must be within tolerance, masks
    must be exactly those implied by the records, and mirrored blocks must
    cancel exactly. When ``target`` is given the sampled sup error is added.

    Raises:
        ManifestError: missing or inconsistent manifest
    """
    manifest = ticket.manifest
    if manifest is None:
        raise ManifestError("ticket carries no construction manifest")
    unknown = sorted({r.pool_id for r in manifest.records if r.pool_id is not None}
                     - set(manifest.pools))
    if unknown:
        raise ManifestError(f"blocks reference unknown pools: {', '.join(unknown)}")
    regenerated = _regenerate(ticket, manifest)
    value_violations = _count_value_violations(ticket, regenerated)

    addressable = [r for r in manifest.records if _addressable(r, manifest, regenerated)]
    expected_w, expected_b = collect_masks(regenerated, manifest.pools, addressable)
    mask_violations = sum(int(np.count_nonzero(e != m))
                          for e, m in zip(expected_w, ticket.weight_masks))
    mask_violations += sum(int(np.count_nonzero(e != m))
                           for e, m in zip(expected_b, ticket.bias_masks))

    truth = Ticket(regenerated, ticket.weight_masks, ticket.bias_masks, ticket.scales,
                   ticket.output_rows)
    at_zero = forward_layers(truth.effective, np.zeros(regenerated.n_inputs))

    flagged: List[str] = []
    pools: Dict[str, Pool] = {}
    for pool_id, pool in sorted(manifest.pools.items()):
        values = _pool_values(pool, regenerated, at_zero)
        stored = np.asarray(pool.values, dtype=np.float64)
        if stored.shape != values.shape or np.any(np.abs(stored - values) > AUDIT_TOLERANCE):
            flagged.append(f"pool {pool_id}")
        pools[pool_id] = replace(pool, values=tuple(float(v) for v in values))

    layer_residuals: Dict[int, float] = {}
    cancellation_violations = 0
    for record in manifest.records:
        pool = pools[record.pool_id] if record.pool_id is not None else None
        if pool is None:
            residual = abs(record.target)
        else:
            if not _addressable(record, manifest, regenerated):
                flagged.append(_block_label(record))
                continue
            row = regenerated.layers[pool.layer - 1].weights[record.row]
            candidates = pool.candidates(row)
            residual = abs(record.target - math.fsum(float(candidates[p])
                                                     for p in record.indices))
            if pool.mirrored:
                edges = [float(row[pool.members[p]]) for p in record.indices]
                edges += [float(row[pool.partners[p]]) for p in record.indices]
                if math.fsum(edges) != 0.0:
                    cancellation_violations += 1
        layer_residuals[record.layer] = max(layer_residuals.get(record.layer, 0.0), residual)
        mismatch = abs(residual - record.residual) > AUDIT_TOLERANCE
        if mismatch or (record.achieved and residual > record.tolerance):
            flagged.append(_block_label(record))

    error = None
    if target is not None:
        error = sup_error(target, ticket, samples, seed, corner_limit)
    report = VerificationReport(
        sup_error=error,
        samples=samples if target is not None else 0,
        layer_residuals=layer_residuals,
        stats=ticket_stats(ticket),
        attempted=manifest.attempted,
        achieved=manifest.achieved,
        failed=manifest.failed,
        seed=seed,
        eps=manifest.eps,
        flagged=flagged,
        value_violations=value_violations,
        cancellation_violations=cancellation_violations,
        mask_violations=mask_violations,
    )
    logger.info("Audit: %d blocks, %d failed, %d flagged, %d value / %d cancellation / "
                "%d mask violations", report.attempted, report.failed, len(flagged),
                value_violations, cancellation_violations, mask_violations)
    return report


def compare_modes(target: Network, config: Optional[TicketForgeConfig] = None,
                  modes: Sequence[str] = ("l+1", "2l"), samples: Optional[int] = None
                  ) -> pd.DataFrame:
    """
    Construct the same target in several modes and tabulate the tickets.

    Returns:
        DataFrame with COMPARE_COLUMNS, one row per mode
    """
    config = config or load_default_config()
    n_samples = samples if samples is not None else config.verify.samples
    rows = []
    for mode in modes:
        run_config = replace(config, construction=replace(config.construction, mode=mode))
        started = time.perf_counter()
        ticket = construct(target, run_config)
        elapsed = time.perf_counter() - started
        stats = ticket_stats(ticket)
        error = sup_error(target, ticket, n_samples, config.verify.seed,
                          config.verify.corner_limit)
        rows.append({
            "mode": mode,
            "error": error,
            "params": stats.param_count,
            "max_width": stats.max_width,
            "depth": stats.depth,
            "wall_time": elapsed,
        })
        logger.info("%s: error %.3e, %d params, max width %d, %.1fs", mode, error,
                    stats.param_count, stats.max_width, elapsed)
    return pd.DataFrame(rows, columns=COMPARE_COLUMNS)
