"""
Construction manifests.

A manifest records everything needed to re-derive and audit a ticket: the
init plan the source was drawn from, the candidate pools, the row layout of
every source layer and one BlockRecord per solved subset-sum block.
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Tuple

import numpy as np

from ..core.errors import ManifestError

if TYPE_CHECKING:
    from ..initialization.plan import InitPlan

BLOCK_KINDS = ("weight", "weight+", "weight-", "bias", "carrier")
POOL_KINDS = ("hidden_weight", "hidden_bias", "copies", "carriers")


@dataclass(frozen=True)
class Pool:
    """
    Candidate set shared by the blocks of one source layer.

    The candidate for member position p on source row r is
    ``coefficient * W[layer][r, members[p]] * values[p]``. Mirrored pools
    keep ``partners[p]`` alongside ``members[p]``; its outgoing weight is the
    exact negative of the member's.
    """
    pool_id: str
    layer: int
    kind: str
    members: Tuple[int, ...]
    values: Tuple[float, ...]
    coefficient: float = 1.0
    partners: Tuple[int, ...] = ()
    input_neuron: Optional[int] = None
    input_column: Optional[int] = None
    sign: int = 0

    @property
    def mirrored(self) -> bool:
        return len(self.partners) > 0

    @property
    def size(self) -> int:
        return len(self.members)

    def candidates(self, row_weights: np.ndarray) -> np.ndarray:
        """Candidate values seen by one source row (its full weight vector)."""
        members = np.asarray(self.members, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        return self.coefficient * row_weights[members] * values

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.pool_id,
            "layer": self.layer,
            "kind": self.kind,
            "members": list(self.members),
            "values": list(self.values),
            "coefficient": self.coefficient,
            "partners": list(self.partners),
            "input_neuron": self.input_neuron,
            "input_column": self.input_column,
            "sign": self.sign,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Pool":
        return cls(
            pool_id=str(data["id"]),
            layer=int(data["layer"]),
            kind=str(data["kind"]),
            members=tuple(int(k) for k in data["members"]),
            values=tuple(float(v) for v in data["values"]),
            coefficient=float(data.get("coefficient", 1.0)),
            partners=tuple(int(k) for k in data.get("partners", [])),
            input_neuron=data.get("input_neuron"),
            input_column=data.get("input_column"),
            sign=int(data.get("sign", 0)),
        )


@dataclass(frozen=True)
class BlockRecord:
    """Outcome of one subset-sum block on one source row."""
    layer: int
    row: int
    target_neuron: int
    copy: int
    input_neuron: Optional[int]
    kind: str
    pool_id: Optional[str]
    indices: Tuple[int, ...]
    target: float
    tolerance: float
    residual: float
    achieved: bool
    attempts: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "row": self.row,
            "target_neuron": self.target_neuron,
            "copy": self.copy,
            "input_neuron": self.input_neuron,
            "kind": self.kind,
            "pool": self.pool_id,
            "indices": list(self.indices),
            "target": self.target,
            "tolerance": self.tolerance,
            "residual": self.residual,
            "achieved": self.achieved,
            "attempts": self.attempts,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlockRecord":
        kind = str(data["kind"])
        if kind not in BLOCK_KINDS:
            raise ManifestError(f"Unknown block kind: {kind!r}")
        return cls(
            layer=int(data["layer"]),
            row=int(data["row"]),
            target_neuron=int(data["target_neuron"]),
            copy=int(data["copy"]),
            input_neuron=data.get("input_neuron"),
            kind=kind,
            pool_id=data.get("pool"),
            indices=tuple(int(k) for k in data["indices"]),
            target=float(data["target"]),
            tolerance=float(data["tolerance"]),
            residual=float(data["residual"]),
            achieved=bool(data["achieved"]),
            attempts=int(data.get("attempts", 1)),
        )


@dataclass(frozen=True)
class BlockPlan:
    """Row layout of one source layer that realizes (part of) a target layer."""
    layer: int
    target_layer: int
    rows: Tuple[Tuple[int, ...], ...]
    carrier_rows: Tuple[int, ...] = ()
    carrier_values: Tuple[float, ...] = ()
    input_pools: Tuple[Tuple[str, ...], ...] = ()
    bias_pool: Optional[str] = None
    mirror_pairs: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "target_layer": self.target_layer,
            "rows": [list(r) for r in self.rows],
            "carrier_rows": list(self.carrier_rows),
            "carrier_values": list(self.carrier_values),
            "input_pools": [list(p) for p in self.input_pools],
            "bias_pool": self.bias_pool,
            "mirror_pairs": self.mirror_pairs,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BlockPlan":
        return cls(
            layer=int(data["layer"]),
            target_layer=int(data["target_layer"]),
            rows=tuple(tuple(int(r) for r in rows) for rows in data["rows"]),
            carrier_rows=tuple(int(r) for r in data.get("carrier_rows", [])),
            carrier_values=tuple(float(v) for v in data.get("carrier_values", [])),
            input_pools=tuple(tuple(str(p) for p in pools)
                              for pools in data.get("input_pools", [])),
            bias_pool=data.get("bias_pool"),
            mirror_pairs=bool(data.get("mirror_pairs", False)),
        )


@dataclass(frozen=True)
class CopyPlan:
    """Copies kept per target neuron and carrier rows, one entry per target layer."""
    copies: Tuple[int, ...]
    carriers: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.copies) != len(self.carriers):
            raise ManifestError("copy plan needs one carrier count per target layer")
        if self.copies and self.copies[-1] != 1:
            raise ManifestError("output layer must keep exactly one copy per neuron")
        if any(c < 1 for c in self.copies):
            raise ManifestError("copy counts must be >= 1")

    def to_dict(self) -> Dict[str, Any]:
        return {"copies": list(self.copies), "carriers": list(self.carriers)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CopyPlan":
        return cls(tuple(int(c) for c in data["copies"]),
                   tuple(int(c) for c in data["carriers"]))


@dataclass(frozen=True)
class ConstructionManifest:
    """Provenance and per-block residuals of one construction run."""
    seed: int
    mode: str
    eps: float
    delta: float
    pool_size: int
    init_plan: "InitPlan"
    copy_plan: CopyPlan
    block_plans: Tuple[BlockPlan, ...]
    pools: Dict[str, Pool]
    records: Tuple[BlockRecord, ...]
    eps_layers: Tuple[float, ...] = ()
    sigmas: Tuple[float, ...] = ()
    eps2: Tuple[float, ...] = ()
    tolerance_policy: str = "lemma"
    config_sha256: str = ""
    delta_report: Dict[str, Any] = field(default_factory=dict)

    @property
    def attempted(self) -> int:
        return len(self.records)

    @property
    def achieved(self) -> int:
        return sum(1 for r in self.records if r.achieved)

    @property
    def failed(self) -> int:
        return self.attempted - self.achieved

    def records_for(self, layer: int) -> List[BlockRecord]:
        return [r for r in self.records if r.layer == layer]

    def pool(self, pool_id: Optional[str]) -> Optional[Pool]:
        if pool_id is None:
            return None
        try:
            return self.pools[pool_id]
        except KeyError:
            raise ManifestError(f"Block references unknown pool {pool_id!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "mode": self.mode,
            "eps": self.eps,
            "delta": self.delta,
            "pool_size": self.pool_size,
            "init_plan": self.init_plan.to_dict(),
            "copy_plan": self.copy_plan.to_dict(),
            "block_plans": [p.to_dict() for p in self.block_plans],
            "pools": [self.pools[k].to_dict() for k in sorted(self.pools)],
            "records": [r.to_dict() for r in self.records],
            "eps_layers": list(self.eps_layers),
            "sigmas": list(self.sigmas),
            "eps2": [None if math.isinf(e) else e for e in self.eps2],
            "tolerance_policy": self.tolerance_policy,
            "config_sha256": self.config_sha256,
            "delta_report": dict(self.delta_report),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConstructionManifest":
        from ..initialization.plan import InitPlan

        try:
            pools = [Pool.from_dict(p) for p in data["pools"]]
            return cls(
                seed=int(data["seed"]),
                mode=str(data["mode"]),
                eps=float(data["eps"]),
                delta=float(data["delta"]),
                pool_size=int(data["pool_size"]),
                init_plan=InitPlan.from_dict(data["init_plan"]),
                copy_plan=CopyPlan.from_dict(data["copy_plan"]),
                block_plans=tuple(BlockPlan.from_dict(p) for p in data["block_plans"]),
                pools={p.pool_id: p for p in pools},
                records=tuple(BlockRecord.from_dict(r) for r in data["records"]),
                eps_layers=tuple(float(e) for e in data.get("eps_layers", [])),
                sigmas=tuple(float(s) for s in data.get("sigmas", [])),
                eps2=tuple(math.inf if e is None else float(e) for e in data.get("eps2", [])),
                tolerance_policy=str(data.get("tolerance_policy", "lemma")),
                config_sha256=str(data.get("config_sha256", "")),
                delta_report=dict(data.get("delta_report", {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ManifestError):
                raise
            raise ManifestError(f"Corrupted construction manifest: {e}")
