"""
Subset-sum block builders.

A source layer realizes one target layer row by row: every row that stands
for (a copy of) target neuron i solves one block per incoming target weight
plus one bias block, each over a candidate pool shared by all rows of the
layer. Two block families exist:

* two-layers-for-one: the pools are univariate hidden neurons of the layer
  below, either sign-split (d = 0) or looks-linear mirror pairs (d != 0);
* one-layer-for-one: the pools are the copies of each input neuron in the
  layer below, plus constant carrier neurons for the biases.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import TicketForgeConfig
from ..core.errors import BlockFailureError, InsufficientWidthError, ShapeError
from ..core.interfaces import ISubsetSumSolver
from ..network.activation import ActivationSpec
from ..network.manifest import BlockPlan, BlockRecord, Pool
from ..network.network import Layer, Network
from ..subsetsum.problem import SubsetSolution, SubsetSumProblem
from ..subsetsum.solvers import make_solver
from .retry import retry_block

logger = logging.getLogger(__name__)

CARRIER_TARGET = 1.0


@dataclass
class BlockSettings:
    """Solver and retry settings shared by all blocks of a construction."""
    solver: ISubsetSumSolver
    cap: Optional[int] = None
    retries: int = 3
    best_effort: bool = False
    workers: int = 1
    carrier_tolerance: float = 0.1

    @classmethod
    def from_config(cls, config: TicketForgeConfig) -> "BlockSettings":
        c = config.construction
        return cls(
            solver=make_solver(config.solver),
            cap=c.subset_cap(),
            retries=c.retries,
            best_effort=c.best_effort,
            workers=c.workers,
            carrier_tolerance=c.carrier_tolerance,
        )


@dataclass(frozen=True)
class BlockTask:
    """One block solved on every row that realizes a given target neuron."""
    kind: str
    pool: Optional[Pool]
    target: float
    tolerance: float
    input_neuron: Optional[int]


class RowLayout:
    """
    Row assignment of one source layer.

    Rows [0, neurons * copies) hold the copies of the target neurons, the next
    ``carriers`` rows hold constant carriers and the remaining ``spare`` rows
    are untouched capacity for retries.
    """

    def __init__(self, neurons: int, copies: int, carriers: int, spare: int):
        self.neurons = neurons
        self.copies = copies
        self.carriers = carriers
        self.spare = spare
        self._next = neurons * copies + carriers

    @property
    def size(self) -> int:
        return self.neurons * self.copies + self.carriers + self.spare

    @property
    def spare_used(self) -> int:
        return self._next - (self.neurons * self.copies + self.carriers)

    def primary(self, neuron: int, copy: int) -> int:
        return neuron * self.copies + copy

    def carrier(self, index: int) -> int:
        return self.neurons * self.copies + index

    def next_spare(self) -> Optional[int]:
        if self._next >= self.size:
            return None
        row = self._next
        self._next += 1
        return row


@dataclass
class HiddenPools:
    """Univariate hidden-neuron pools of a two-layers-for-one slab."""
    weight_pools: List[List[Pool]]
    bias_pool: Pool
    mirrored: bool

    def all(self) -> List[Pool]:
        return [p for pools in self.weight_pools for p in pools] + [self.bias_pool]


@dataclass
class SlabResult:
    """Pools, records and row layout produced for one target layer."""
    plan: BlockPlan
    pools: Dict[str, Pool]
    records: List[BlockRecord]
    spare_used: int = 0
    retried_rows: int = 0
    hidden_width: Optional[int] = None

    @property
    def worst_residual(self) -> float:
        return max((r.residual for r in self.records), default=0.0)


def uses_mirror_pairs(spec: ActivationSpec) -> bool:
    """Intercepts (d != 0) and curved activations are realized by looks-linear pairs."""
    return spec.d != 0.0 or spec.bounded_radius


def sign_split_width(n_in: int, pool: int) -> int:
    """Initial hidden width of a sign-split slab: 2m n_in + m pool slots plus slack."""
    slack = pool + 4 * math.ceil(math.sqrt(pool * (n_in + 1))) + 8
    return 2 * pool * n_in + pool + slack


def mirrored_width(n_in: int, pool: int) -> int:
    return 2 * pool * (n_in + 1)


def allocate_sign_split(hidden: Layer, layer: int, input_columns: Sequence[int],
                        phi0: ActivationSpec, pool: int) -> HiddenPools:
    """
    Assign hidden neurons to the bias pool and the (input, sign) pools.

    Neurons are scanned in order. The bias pool takes the first ``pool``
    neurons with phi0(b) != 0; every other neuron joins the first input j whose
    pool of sign(w[k, col_j]) is not full yet.

    Raises:
        InsufficientWidthError: some pool stays short
    """
    n_in = len(input_columns)
    members: Dict[Tuple[int, int], List[int]] = {(j, s): [] for j in range(n_in) for s in (1, -1)}
    bias_members: List[int] = []
    bias_values = phi0(hidden.bias)
    for k in range(hidden.n_out):
        if len(bias_members) < pool and bias_values[k] != 0.0:
            bias_members.append(k)
            continue
        for j, col in enumerate(input_columns):
            sign = 1 if hidden.weights[k, col] >= 0.0 else -1
            if len(members[(j, sign)]) < pool:
                members[(j, sign)].append(k)
                break
    short = sum(1 for ks in members.values() if len(ks) < pool) + int(len(bias_members) < pool)
    if short:
        raise InsufficientWidthError(
            f"hidden layer {layer - 1} of width {hidden.n_out} leaves {short} of "
            f"{2 * n_in + 1} pools below {pool} neurons"
        )

    weight_pools = []
    for j, col in enumerate(input_columns):
        halves = []
        for sign in (1, -1):
            ks = members[(j, sign)]
            halves.append(Pool(
                pool_id=f"L{layer}.w{j}{'+' if sign > 0 else '-'}",
                layer=layer,
                kind="hidden_weight",
                members=tuple(ks),
                values=tuple(float(v) for v in hidden.weights[ks, col]),
                coefficient=phi0.slope_sum,
                input_neuron=j,
                input_column=int(col),
                sign=sign,
            ))
        weight_pools.append(halves)
    bias_pool = Pool(
        pool_id=f"L{layer}.b",
        layer=layer,
        kind="hidden_bias",
        members=tuple(bias_members),
        values=tuple(float(v) for v in bias_values[bias_members]),
    )
    return HiddenPools(weight_pools, bias_pool, mirrored=False)


def _check_looks_linear(hidden: Layer, outer: Layer, half: int) -> None:
    if not (np.array_equal(hidden.weights[half:], -hidden.weights[:half])
            and np.array_equal(outer.weights[:, half:], -outer.weights[:, :half])):
        raise ShapeError("slab weights are not mirrored; use a looks-linear plan")


def allocate_mirrored(hidden: Layer, outer: Layer, layer: int, input_columns: Sequence[int],
                      phi0: ActivationSpec, pool: int) -> HiddenPools:
    """
    Assign looks-linear pairs (k, k + H/2) to consecutive pools.

    Pool j holds pairs k in [j m, (j+1) m); the bias pool follows. A pair
    contributes w2[r, k] (phi0(w1 x) - phi0(-w1 x)), so the intercept cancels.
    """
    if hidden.n_out % 2:
        raise ShapeError(f"mirrored hidden layer needs an even width, got {hidden.n_out}")
    half = hidden.n_out // 2
    n_in = len(input_columns)
    if half < pool * (n_in + 1):
        raise InsufficientWidthError(
            f"hidden layer {layer - 1} holds {half} mirror pairs, {pool * (n_in + 1)} needed"
        )
    _check_looks_linear(hidden, outer, half)

    weight_pools = []
    for j, col in enumerate(input_columns):
        ks = list(range(j * pool, (j + 1) * pool))
        weight_pools.append([Pool(
            pool_id=f"L{layer}.w{j}",
            layer=layer,
            kind="hidden_weight",
            members=tuple(ks),
            values=tuple(float(v) for v in hidden.weights[ks, col]),
            coefficient=phi0.slope_sum,
            partners=tuple(k + half for k in ks),
            input_neuron=j,
            input_column=int(col),
        )])
    ks = list(range(n_in * pool, (n_in + 1) * pool))
    partners = [k + half for k in ks]
    values = phi0(hidden.bias[ks]) - phi0(hidden.bias[partners])
    bias_pool = Pool(
        pool_id=f"L{layer}.b",
        layer=layer,
        kind="hidden_bias",
        members=tuple(ks),
        values=tuple(float(v) for v in values),
        partners=tuple(partners),
    )
    return HiddenPools(weight_pools, bias_pool, mirrored=True)


def solve_row(weights: np.ndarray, row: int, tasks: Sequence[BlockTask],
              settings: BlockSettings) -> List[SubsetSolution]:
    """Solve every block of one source row."""
    solutions = []
    for task in tasks:
        if task.pool is None:
            residual = abs(task.target)
            solutions.append(SubsetSolution((), residual, residual <= task.tolerance))
            continue
        problem = SubsetSumProblem(task.target, task.pool.candidates(weights[row]),
                                   task.tolerance, settings.cap)
        solutions.append(settings.solver.solve(problem))
    return solutions


def _record(layer: int, row: int, neuron: int, copy: int, task: BlockTask,
            solution: SubsetSolution, attempts: int) -> BlockRecord:
    return BlockRecord(
        layer=layer,
        row=row,
        target_neuron=neuron,
        copy=copy,
        input_neuron=task.input_neuron,
        kind=task.kind,
        pool_id=task.pool.pool_id if task.pool is not None else None,
        indices=solution.indices,
        target=task.target,
        tolerance=task.tolerance,
        residual=solution.residual,
        achieved=solution.achieved,
        attempts=attempts,
    )


def realize_neurons(weights: np.ndarray, layout: RowLayout, tasks: Sequence[Sequence[BlockTask]],
                    layer: int, settings: BlockSettings
                    ) -> Tuple[Tuple[Tuple[int, ...], ...], List[BlockRecord], int]:
    """
    Solve the blocks of every neuron copy, moving failed copies to spare rows.

    First attempts may run on several threads; retries run in neuron order so
    the spare rows a copy lands on never depend on scheduling.

    Returns:
        (rows per target neuron and copy, block records, number of retried copies)
    """
    jobs = [(i, c) for i in range(layout.neurons) for c in range(layout.copies)]

    def first_attempt(job: Tuple[int, int]) -> List[SubsetSolution]:
        i, c = job
        return solve_row(weights, layout.primary(i, c), tasks[i], settings)

    if settings.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=settings.workers) as executor:
            firsts = list(executor.map(first_attempt, jobs))
    else:
        firsts = [first_attempt(job) for job in jobs]

    rows = [[0] * layout.copies for _ in range(layout.neurons)]
    records: List[BlockRecord] = []
    retried = 0
    for (i, c), solutions in zip(jobs, firsts):
        row = layout.primary(i, c)
        attempts = 1
        while not all(s.achieved for s in solutions) and attempts <= settings.retries:
            spare = layout.next_spare()
            if spare is None:
                logger.debug("Layer %d: spare rows exhausted for neuron %d copy %d", layer, i, c)
                break
            logger.debug("Layer %d: neuron %d copy %d moves from row %d to row %d",
                         layer, i, c, row, spare)
            row, attempts = spare, attempts + 1
            solutions = solve_row(weights, row, tasks[i], settings)
        if attempts > 1:
            retried += 1
        failed = [(t, s) for t, s in zip(tasks[i], solutions) if not s.achieved]
        if failed:
            task, solution = failed[0]
            if not settings.best_effort:
                raise BlockFailureError(layer, c, task.input_neuron, solution.residual,
                                        task.tolerance, attempts, neuron=i)
            logger.warning("Layer %d neuron %d copy %d: %d block(s) above tolerance "
                           "after %d attempts (worst residual %.3e)", layer, i, c, len(failed),
                           attempts, max(s.residual for _, s in failed))
        rows[i][c] = row
        records.extend(_record(layer, row, i, c, t, s, attempts)
                       for t, s in zip(tasks[i], solutions))
    return tuple(tuple(r) for r in rows), records, retried


def realize_carriers(weights: np.ndarray, layout: RowLayout, pool: Optional[Pool],
                     activation: ActivationSpec, layer: int, settings: BlockSettings
                     ) -> Tuple[Tuple[int, ...], Tuple[float, ...], List[BlockRecord]]:
    """
    Build the constant carrier neurons of a source layer.

    Activations with phi(0) != 0 get zero-input carriers emitting phi(0).
    Otherwise each carrier approximates the pre-activation 1 from ``pool`` and
    emits the exact constant phi(sum of the chosen candidates).
    """
    if layout.carriers == 0:
        return (), (), []
    if activation.phi0 != 0.0:
        rows = tuple(layout.carrier(q) for q in range(layout.carriers))
        return rows, (activation.phi0,) * len(rows), []
    if pool is None:
        raise ShapeError(f"layer {layer} needs carriers but the layer below provides none")
    source_pool: Pool = pool

    rows_out: List[int] = []
    values: List[float] = []
    records: List[BlockRecord] = []
    for q in range(layout.carriers):
        tried = [layout.carrier(q)]

        def fresh(_: int, tried: List[int] = tried) -> Optional[np.ndarray]:
            spare = layout.next_spare()
            if spare is None:
                return None
            tried.append(spare)
            return source_pool.candidates(weights[spare])

        problem = SubsetSumProblem(CARRIER_TARGET, source_pool.candidates(weights[tried[0]]),
                                   settings.carrier_tolerance, settings.cap)
        coordinates = None if settings.best_effort else (layer, q, None)
        outcome = retry_block(problem, fresh, 1 + settings.retries, settings.solver, coordinates)
        row = tried[-1]
        solution = outcome.solution
        if not solution.achieved:
            logger.warning("Layer %d carrier %d off by %.3e after %d attempts", layer, q,
                           solution.residual, outcome.attempt)
        chosen = pool.candidates(weights[row])
        pre = math.fsum(float(chosen[k]) for k in solution.indices)
        rows_out.append(row)
        values.append(float(activation(np.array([pre]))[0]))
        task = BlockTask("carrier", pool, CARRIER_TARGET, settings.carrier_tolerance, None)
        records.append(_record(layer, row, q, 0, task, solution, outcome.attempt))
    return tuple(rows_out), tuple(values), records


def build_two_for_one(target_layer: Layer, hidden: Layer, outer: Layer, layer: int,
                      target_index: int, input_columns: Sequence[int], phi0: ActivationSpec,
                      pool: int, copies: int, carriers: int, spare_rows: int, tolerance: float,
                      settings: BlockSettings) -> SlabResult:
    """
    Realize one target layer with two source layers.

    Hidden neurons are pruned to univariate units and grouped into pools; each
    of the ``copies`` rows per target neuron in ``outer`` then approximates
    w_ij through the candidates |m+ + m-| w2[r, k] w1[k, j] (both sign halves,
    or one mirrored pool) and b_i through w2[r, k] phi0(b_k).

    Args:
        target_layer: Target layer to realize
        hidden, outer: Source layers ``layer - 1`` and ``layer``
        layer: 1-based index of ``outer`` in the source network
        target_index: 1-based index of ``target_layer``
        input_columns: Source column carrying each target input
        phi0: Activation of ``hidden``
        pool: Neurons per pool (m)
        copies: Rows per target neuron
        carriers: Constant carrier rows to add to ``outer``
        spare_rows: Spare rows reserved in ``outer``
        tolerance: Subset-sum tolerance of every weight and bias block
        settings: Solver and retry settings

    Returns:
        SlabResult with pools, records and the row layout of ``outer``

    Raises:
        InsufficientWidthError: hidden layer too narrow for the pools
        BlockFailureError: a block stays above tolerance (unless best effort)
    """
    if len(input_columns) != target_layer.n_in:
        raise ShapeError(f"expected {target_layer.n_in} input columns, got {len(input_columns)}")
    layout = RowLayout(target_layer.n_out, copies, carriers, spare_rows)
    if outer.n_out != layout.size or outer.n_in != hidden.n_out:
        raise ShapeError(f"source layer {layer} has shape {outer.weights.shape}, expected "
                         f"({layout.size}, {hidden.n_out})")
    if uses_mirror_pairs(phi0):
        hidden_pools = allocate_mirrored(hidden, outer, layer, input_columns, phi0, pool)
    else:
        hidden_pools = allocate_sign_split(hidden, layer, input_columns, phi0, pool)

    tasks: List[List[BlockTask]] = []
    for i in range(target_layer.n_out):
        row_tasks = []
        for j, halves in enumerate(hidden_pools.weight_pools):
            w = float(target_layer.weights[i, j])
            for half in halves:
                kind = "weight" if half.sign == 0 else ("weight+" if half.sign > 0 else "weight-")
                row_tasks.append(BlockTask(kind, half, w, tolerance, j))
        row_tasks.append(BlockTask("bias", hidden_pools.bias_pool, float(target_layer.bias[i]),
                                   tolerance, None))
        tasks.append(row_tasks)

    rows, records, retried = realize_neurons(outer.weights, layout, tasks, layer, settings)
    carrier_rows, carrier_values, carrier_records = realize_carriers(
        outer.weights, layout, hidden_pools.bias_pool, outer.spec, layer, settings)
    plan = BlockPlan(
        layer=layer,
        target_layer=target_index,
        rows=rows,
        carrier_rows=carrier_rows,
        carrier_values=carrier_values,
        input_pools=tuple(tuple(p.pool_id for p in halves) for halves in hidden_pools.weight_pools),
        bias_pool=hidden_pools.bias_pool.pool_id,
        mirror_pairs=hidden_pools.mirrored,
    )
    logger.info("Target layer %d -> source layers %d-%d: %d rows, %d retried, %d spare used",
                target_index, layer - 1, layer, target_layer.n_out * copies, retried,
                layout.spare_used)
    return SlabResult(plan, {p.pool_id: p for p in hidden_pools.all()},
                      records + carrier_records, layout.spare_used, retried, hidden.n_out)


def build_one_for_one(target_layer: Layer, source: Layer, layer: int, target_index: int,
                      previous: BlockPlan, copies: int, carriers: int, spare_rows: int,
                      tolerance: float, settings: BlockSettings) -> SlabResult:
    """
    Realize one target layer with a single source layer.

    The layer below hosts copies of every input neuron j (``previous.rows[j]``)
    and, when biases need them, constant carriers. Each row of ``source``
    chooses a subset of the copies of j whose weights sum to w_ij, and a subset
    of carriers whose weighted values sum to b_i. Copy pools are shared by all
    output copies.
    """
    if len(previous.rows) != target_layer.n_in:
        raise ShapeError(f"layer below hosts {len(previous.rows)} neurons, target layer "
                         f"{target_index} expects {target_layer.n_in}")
    layout = RowLayout(target_layer.n_out, copies, carriers, spare_rows)
    if source.n_out != layout.size:
        raise ShapeError(f"source layer {layer} has {source.n_out} rows, expected {layout.size}")

    copy_pools = [
        Pool(
            pool_id=f"L{layer}.x{j}",
            layer=layer,
            kind="copies",
            members=tuple(rows),
            values=(1.0,) * len(rows),
            input_neuron=j,
        )
        for j, rows in enumerate(previous.rows)
    ]
    carrier_pool: Optional[Pool] = None
    if previous.carrier_rows:
        carrier_pool = Pool(
            pool_id=f"L{layer}.c",
            layer=layer,
            kind="carriers",
            members=previous.carrier_rows,
            values=previous.carrier_values,
        )

    tasks: List[List[BlockTask]] = []
    for i in range(target_layer.n_out):
        row_tasks = [BlockTask("weight", p, float(target_layer.weights[i, j]), tolerance, j)
                     for j, p in enumerate(copy_pools)]
        row_tasks.append(BlockTask("bias", carrier_pool, float(target_layer.bias[i]),
                                   tolerance, None))
        tasks.append(row_tasks)

    rows, records, retried = realize_neurons(source.weights, layout, tasks, layer, settings)
    carrier_rows, carrier_values, carrier_records = realize_carriers(
        source.weights, layout, carrier_pool, source.spec, layer, settings)
    pools = {p.pool_id: p for p in copy_pools}
    if carrier_pool is not None:
        pools[carrier_pool.pool_id] = carrier_pool
    plan = BlockPlan(
        layer=layer,
        target_layer=target_index,
        rows=rows,
        carrier_rows=carrier_rows,
        carrier_values=carrier_values,
        input_pools=tuple((p.pool_id,) for p in copy_pools),
        bias_pool=carrier_pool.pool_id if carrier_pool is not None else None,
    )
    logger.info("Target layer %d -> source layer %d: %d rows, %d retried, %d spare used",
                target_index, layer, target_layer.n_out * copies, retried, layout.spare_used)
    return SlabResult(plan, pools, records + carrier_records, layout.spare_used, retried)


def collect_masks(source: Network, pools: Dict[str, Pool], records: Sequence[BlockRecord]
                  ) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Masks implied by the block records.

    A chosen pool member keeps its edge into the record's row (and its mirror
    partner's edge). Hidden pool members additionally keep their single input
    weight or their bias. Nothing else is kept.
    """
    weight_masks = [np.zeros(layer.weights.shape, dtype=bool) for layer in source.layers]
    bias_masks = [np.zeros(layer.bias.shape, dtype=bool) for layer in source.layers]
    for record in records:
        if record.pool_id is None:
            continue
        pool = pools[record.pool_id]
        outgoing = weight_masks[pool.layer - 1]
        for position in record.indices:
            units = [pool.members[position]]
            if pool.mirrored:
                units.append(pool.partners[position])
            for k in units:
                outgoing[record.row, k] = True
                if pool.kind == "hidden_weight":
                    weight_masks[pool.layer - 2][k, pool.input_column] = True
                elif pool.kind == "hidden_bias":
                    bias_masks[pool.layer - 2][k] = True
    return weight_masks, bias_masks
