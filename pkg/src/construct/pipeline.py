"""
Construction pipelines.

``construct_L_plus_1`` realizes target layer 1 with a two-layers-for-one slab
that emits several copies of every first-layer neuron, and each deeper target
layer with a single source layer; the ticket has depth L + 1. ``construct_2L``
realizes every target layer with its own slab; the ticket has depth 2L.

Each target layer gets its own pool size, chosen from its block tolerance by
``size_pool``; in the L+1 construction the copy count of a layer is the pool
size of the layer above.

Source layers are drawn from an InitPlan keyed by the configured seed, so a
ticket file only stores the plan. Hidden layers of sign-split slabs grow
(prefix-stably) until their pools fill.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..budget.error_budget import ErrorBudget, error_budget, sigma_eps2
from ..core.config import ConfigLoader, TicketForgeConfig, load_default_config
from ..core.errors import BudgetUnderflowError, DomainError, InsufficientWidthError
from ..initialization.initializers import plan_thm1_scaled, second_layer_range
from ..initialization.plan import InitPlan, materialize_layer, plan_from_arch
from ..network.activation import UNCONSTRAINED, ActivationSpec, invert_g, spec_for
from ..network.manifest import BlockRecord, ConstructionManifest, CopyPlan, Pool
from ..network.network import Layer, Network
from ..network.ticket import Ticket
from ..subsetsum.statistics import pool_for_tolerance
from .blocks import (
    BlockSettings,
    SlabResult,
    build_one_for_one,
    build_two_for_one,
    collect_masks,
    mirrored_width,
    sign_split_width,
    uses_mirror_pairs,
)

logger = logging.getLogger(__name__)

MAX_GROWTH_STEPS = 6


def carriers_needed(target: Network) -> List[bool]:
    """
    Entry s tells whether source layer s (2..L) of an L+1 ticket hosts carriers.

    Target layer t >= 2 takes its bias from the carriers of source layer t, and
    those are fed by the carriers below, so layer s needs them as soon as any
    target layer t >= s has a nonzero bias.
    """
    depth = target.depth
    needed = [False] * (depth + 1)
    for s in range(2, depth + 1):
        needed[s] = any(bool(np.any(target.layers[t - 1].bias != 0.0))
                        for t in range(s, depth + 1))
    return needed


def block_tolerance(budget: ErrorBudget, target_index: int, policy: str, two_for_one: bool,
                    radius_bounded: bool, n_in: int, input_scale: float) -> float:
    """
    Subset-sum tolerance of the blocks realizing one target layer.

    ``lemma`` hands eps_l to every effective parameter (halved for two-for-one
    slabs whose activation is only linear near zero); ``proof`` divides eps_l
    by 2 M (n_in + 1) for two-for-one and by M T (n_in + 1) for one-for-one
    blocks.
    """
    eps_l = budget.eps_for(target_index)
    if policy == "proof":
        if two_for_one:
            return eps_l / (2.0 * input_scale * (n_in + 1))
        return eps_l / (input_scale * budget.lipschitz * (n_in + 1))
    if two_for_one and radius_bounded:
        return eps_l / 2.0
    return eps_l


def choose_eps2(phi0: ActivationSpec, share: float, subset_bound: int, input_scale: float,
                eps_l: float, delta: float, n_in: int, n_out: int, C: float = 1.0
                ) -> Tuple[float, float]:
    """
    First-layer scale sigma and linearization error eps'' of a slab.

    A weight block keeps at most 2K hidden units whose outgoing weights are
    bounded by 1/(|m+ + m-| sigma), so its linearization error is at most
    2K max(eps'', M g(eps'')) / |m+ + m-|. eps'' is the smaller of the
    closed-form choice and the value that keeps this error within ``share``.

    Returns:
        (sigma, eps''); (1, UNCONSTRAINED) for activations linear on all of R
    """
    if not phi0.bounded_radius:
        return 1.0, UNCONSTRAINED
    _, eps2 = sigma_eps2(phi0, eps_l, n_in, input_scale, delta, n_out, C)
    allowed = abs(phi0.slope_sum) * share / (2.0 * subset_bound)
    y = min(allowed / input_scale, phi0.g(1.0))
    eps2 = min(eps2, invert_g(phi0, y), allowed)
    return min(1.0, phi0.radius(eps2) / input_scale), eps2


def construction_hash(config: TicketForgeConfig) -> str:
    """SHA-256 of every setting that can change a ticket (worker count excluded)."""
    data = config.to_dict()
    construction = {k: v for k, v in data["CONSTRUCTION"].items() if k != "WORKERS"}
    return ConfigLoader().get_config_hash({
        "CONSTRUCTION": construction,
        "SOLVER": data["SOLVER"],
        "BOUNDS": data["BOUNDS"],
    })


def _budget(target: Network, config: TicketForgeConfig) -> ErrorBudget:
    c = config.construction
    return error_budget(target, c.eps, method=config.bounds.norms,
                        samples=config.verify.samples, seed=c.seed,
                        safety=config.bounds.sampled_safety, underflow=config.bounds.underflow)


def _check_floor(tolerance: float, floor: float, target_index: int) -> None:
    if tolerance < floor:
        raise BudgetUnderflowError(
            f"block tolerance {tolerance:.3e} of target layer {target_index} is below "
            f"the floor {floor:.1e}"
        )


def _subset_bound(settings: BlockSettings, pool: int) -> int:
    return min(settings.cap, pool) if settings.cap else pool


def _slab_distribution(mirrored: bool) -> str:
    return "product_signed" if mirrored else "product"


def size_pool(config: TicketForgeConfig, settings: BlockSettings, tolerance: float, dist: str,
              n_out: int, n_in: int, depth: int) -> int:
    """
    Pool size for the blocks of one target layer.

    ``fixed`` sizing keeps CONSTRUCTION.POOL. ``auto`` sizing treats POOL as a
    floor and grows the pool until a block misses ``tolerance`` with
    probability at most delta / (L n_out POOL (2 n_in + 1)), a union bound over
    the blocks of the layer, capped by POOL_LIMIT and the solver's size limit.
    """
    c = config.construction
    if c.pool_sizing == "fixed":
        return c.pool
    failure = c.delta / (depth * n_out * c.pool * (2 * n_in + 1))
    ceiling = min(c.pool_limit, settings.solver.max_size)
    pool = pool_for_tolerance(tolerance, dist, failure, c.pool, ceiling, settings.cap)
    if pool > c.pool:
        logger.debug("Pool grown from %d to %d for tolerance %.3e (%s candidates)", c.pool,
                     pool, tolerance, dist)
    return pool


def _realize_slab(plan_for: Callable[[int], InitPlan], hidden_index: int, width: int,
                  growable: bool, pool: int, build: Callable[[Layer, Layer], SlabResult]
                  ) -> Tuple[Layer, Layer, SlabResult]:
    """Draw a slab and build it, widening the hidden layer while pools stay short."""
    step = 0
    while True:
        plan = plan_for(width)
        hidden = materialize_layer(plan, hidden_index)
        outer = materialize_layer(plan, hidden_index + 1)
        try:
            return hidden, outer, build(hidden, outer)
        except InsufficientWidthError:
            if not growable or step == MAX_GROWTH_STEPS:
                raise
            step += 1
            width += max(pool, width // 2)
            logger.debug("Growing source layer %d to %d neurons", hidden_index, width)


def _assemble(target: Network, plan: InitPlan, layers: List[Layer], slabs: List[SlabResult],
              budget: ErrorBudget, config: TicketForgeConfig, mode: str, copy_plan: CopyPlan,
              sigmas: List[float], eps2s: List[float], pool_sizes: List[int]) -> Ticket:
    c = config.construction
    source = Network(tuple(layers), target.domain, role="source")
    pools: Dict[str, Pool] = {}
    records: List[BlockRecord] = []
    for slab in slabs:
        pools.update(slab.pools)
        records.extend(slab.records)
    weight_masks, bias_masks = collect_masks(source, pools, records)
    failed = sum(1 for r in records if not r.achieved)
    delta_report = {
        "delta": c.delta,
        "blocks": len(records),
        "failed_blocks": failed,
        "retried_rows": sum(s.retried_rows for s in slabs),
        "spare_rows_used": [s.spare_used for s in slabs],
        "retries": c.retries,
        "pool_sizes": list(pool_sizes),
        "sound_norms": budget.sound,
    }
    manifest = ConstructionManifest(
        seed=c.seed,
        mode=mode,
        eps=c.eps,
        delta=c.delta,
        pool_size=c.pool,
        init_plan=plan,
        copy_plan=copy_plan,
        block_plans=tuple(s.plan for s in slabs),
        pools=pools,
        records=tuple(records),
        eps_layers=tuple(budget.eps_layers),
        sigmas=tuple(sigmas),
        eps2=tuple(eps2s),
        tolerance_policy=c.tolerance_policy,
        config_sha256=construction_hash(config),
        delta_report=delta_report,
    )
    output_rows = tuple(rows[0] for rows in slabs[-1].plan.rows)
    logger.info("Constructed %s ticket of depth %d: %d blocks, %d failed, source widths %s",
                mode, source.depth, len(records), failed, source.arch)
    return Ticket(source, tuple(weight_masks), tuple(bias_masks), (), output_rows, manifest)


def construct_L_plus_1(target: Network, config: Optional[TicketForgeConfig] = None) -> Ticket:
    """
    Prune a depth L+1 source into an approximation of ``target``.

    Args:
        target: Network to approximate
        config: Run configuration; defaults when omitted

    Returns:
        Ticket whose manifest records every block

    Raises:
        BudgetUnderflowError: tolerances below the configured floor
        BlockFailureError: a block stays unsolved after all retries
        InsufficientWidthError: the hidden layer cannot be grown enough
    """
    config = config or load_default_config()
    c = config.construction
    settings = BlockSettings.from_config(config)
    budget = _budget(target, config)
    arch, depth = target.arch, target.depth

    first = target.layers[0]
    phi0_tag = c.first_activation or first.activation
    phi0 = spec_for(phi0_tag)
    mirrored = uses_mirror_pairs(phi0)
    needed = carriers_needed(target)

    input_scale = max(1.0, budget.peaks[0])
    tolerances = [block_tolerance(budget, 1, c.tolerance_policy, True, phi0.bounded_radius,
                                  arch[0], input_scale)]
    tolerances += [block_tolerance(budget, t, c.tolerance_policy, False, False, arch[t - 1],
                                   max(1.0, budget.peaks[t - 1])) for t in range(2, depth + 1)]
    for t, tolerance in enumerate(tolerances, start=1):
        _check_floor(tolerance, config.bounds.underflow, t)
    # pools[t - 1] feeds the blocks of target layer t: hidden units for t = 1,
    # copies and carriers of the layer below otherwise
    pools = []
    for t in range(1, depth + 1):
        dist = _slab_distribution(mirrored) if t == 1 else "uniform"
        pools.append(size_pool(config, settings, tolerances[t - 1], dist, arch[t], arch[t - 1],
                               depth))
    copies = pools[1:] + [1]
    carriers = [pools[t] if t < depth and needed[t + 1] else 0 for t in range(1, depth + 1)]
    rows = [arch[t] * copies[t - 1] + carriers[t - 1] + c.spare_rows for t in range(1, depth + 1)]
    m = pools[0]

    sigma, eps2 = choose_eps2(phi0, tolerances[0], _subset_bound(settings, m), input_scale,
                              budget.eps_for(1), c.delta, arch[0], arch[1], config.bounds.c)
    logger.info("L+1 construction: sigma=%.4g eps''=%.3g, pools %s, copies %s, carriers %s",
                sigma, eps2, pools, copies, carriers)
    activations = [phi0_tag] + target.activations

    def plan_for(width: int) -> InitPlan:
        return plan_thm1_scaled([arch[0], width] + rows, phi0, sigma, c.seed, activations,
                                looks_linear=mirrored)

    def build(hidden: Layer, outer: Layer) -> SlabResult:
        return build_two_for_one(first, hidden, outer, 2, 1, list(range(arch[0])), phi0, m,
                                 copies[0], carriers[0], c.spare_rows, tolerances[0], settings)

    width = mirrored_width(arch[0], m) if mirrored else sign_split_width(arch[0], m)
    hidden, outer, slab = _realize_slab(plan_for, 1, width, not mirrored, m, build)
    plan = plan_for(hidden.n_out)
    layers = [hidden, outer]
    slabs = [slab]

    for t in range(2, depth + 1):
        source_layer = materialize_layer(plan, t + 1)
        slab = build_one_for_one(target.layers[t - 1], source_layer, t + 1, t, slabs[-1].plan,
                                 copies[t - 1], carriers[t - 1], c.spare_rows, tolerances[t - 1],
                                 settings)
        layers.append(source_layer)
        slabs.append(slab)

    copy_plan = CopyPlan(tuple(copies), tuple(carriers))
    return _assemble(target, plan, layers, slabs, budget, config, "l+1", copy_plan,
                     [sigma], [eps2], pools)


def construct_2L(target: Network, config: Optional[TicketForgeConfig] = None) -> Ticket:
    """
    Prune a depth 2L source, two source layers per target layer.

    Slab l takes its inputs from the rows that realize target layer l-1 and
    draws its own first-layer scale sigma_l and pool size; deeper source
    biases stay zero.
    """
    config = config or load_default_config()
    c = config.construction
    settings = BlockSettings.from_config(config)
    budget = _budget(target, config)
    arch, depth = target.arch, target.depth

    phi0_tags = [c.first_activation or layer.activation for layer in target.layers]
    specs = [spec_for(tag) for tag in phi0_tags]
    mirrored = [uses_mirror_pairs(spec) for spec in specs]
    rows = [n + c.spare_rows for n in arch[1:]]

    tolerances: List[float] = []
    pools: List[int] = []
    sigmas: List[float] = []
    eps2s: List[float] = []
    for t in range(1, depth + 1):
        # later slabs see realized inputs, which may overshoot the target by eps
        scale = max(1.0, budget.peaks[t - 1] + (c.eps if t > 1 else 0.0))
        tolerance = block_tolerance(budget, t, c.tolerance_policy, True,
                                    specs[t - 1].bounded_radius, arch[t - 1], scale)
        _check_floor(tolerance, config.bounds.underflow, t)
        pool = size_pool(config, settings, tolerance, _slab_distribution(mirrored[t - 1]),
                         arch[t], arch[t - 1], depth)
        sigma, eps2 = choose_eps2(specs[t - 1], tolerance, _subset_bound(settings, pool), scale,
                                  budget.eps_for(t), c.delta, arch[t - 1], arch[t],
                                  config.bounds.c)
        tolerances.append(tolerance)
        pools.append(pool)
        sigmas.append(sigma)
        eps2s.append(eps2)
    logger.info("2L construction: pools %s, sigmas %s", pools,
                ", ".join(f"{s:.4g}" for s in sigmas))

    widths = [mirrored_width(arch[t], pools[t]) if mirrored[t]
              else sign_split_width(arch[t], pools[t]) for t in range(depth)]

    def make_plan(hidden_widths: List[int]) -> InitPlan:
        source_arch = [arch[0]]
        activations: List[str] = []
        weight_ranges: List[float] = []
        bias_ranges: List[float] = []
        mirror_rows: List[bool] = []
        mirror_cols: List[bool] = []
        for t in range(depth):
            source_arch += [hidden_widths[t], rows[t]]
            activations += [phi0_tags[t], target.layers[t].activation]
            weight_ranges += [sigmas[t], second_layer_range(specs[t], sigmas[t])]
            bias_ranges += [sigmas[t], 0.0]
            mirror_rows += [mirrored[t], False]
            mirror_cols += [False, mirrored[t]]
        return plan_from_arch("construction", source_arch, c.seed, activations, weight_ranges,
                              bias_ranges, mirror_rows, mirror_cols)

    layers: List[Layer] = []
    slabs: List[SlabResult] = []
    columns = list(range(arch[0]))
    for t in range(1, depth + 1):

        def plan_for(width: int) -> InitPlan:
            return make_plan(widths[:t - 1] + [width] + widths[t:])

        def build(hidden: Layer, outer: Layer) -> SlabResult:
            return build_two_for_one(target.layers[t - 1], hidden, outer, 2 * t, t, columns,
                                     specs[t - 1], pools[t - 1], 1, 0, c.spare_rows,
                                     tolerances[t - 1], settings)

        hidden, outer, slab = _realize_slab(plan_for, 2 * t - 1, widths[t - 1],
                                            not mirrored[t - 1], pools[t - 1], build)
        widths[t - 1] = hidden.n_out
        layers += [hidden, outer]
        slabs.append(slab)
        columns = [r[0] for r in slab.plan.rows]

    copy_plan = CopyPlan((1,) * depth, (0,) * depth)
    return _assemble(target, make_plan(widths), layers, slabs, budget, config, "2l", copy_plan,
                     sigmas, eps2s, pools)


def construct(target: Network, config: Optional[TicketForgeConfig] = None) -> Ticket:
    """Run the construction selected by ``CONSTRUCTION.MODE``."""
    config = config or load_default_config()
    mode = config.construction.mode
    if mode == "l+1":
        return construct_L_plus_1(target, config)
    if mode == "2l":
        return construct_2L(target, config)
    raise DomainError(f"Unknown construction mode {mode!r}")
