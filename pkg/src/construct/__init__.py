"""
Lottery-ticket constructions: subset-sum block builders and the L+1 / 2L pipelines.
"""

from .blocks import (
    BlockSettings,
    BlockTask,
    RowLayout,
    SlabResult,
    allocate_mirrored,
    allocate_sign_split,
    build_one_for_one,
    build_two_for_one,
    collect_masks,
    uses_mirror_pairs,
)
from .pipeline import (
    block_tolerance,
    carriers_needed,
    choose_eps2,
    construct,
    construct_2L,
    construct_L_plus_1,
    construction_hash,
    size_pool,
)
from .retry import RetryOutcome, retry_block

__all__ = [
    "BlockSettings",
    "BlockTask",
    "RetryOutcome",
    "RowLayout",
    "SlabResult",
    "allocate_mirrored",
    "allocate_sign_split",
    "block_tolerance",
    "build_one_for_one",
    "build_two_for_one",
    "carriers_needed",
    "choose_eps2",
    "collect_masks",
    "construct",
    "construct_2L",
    "construct_L_plus_1",
    "construction_hash",
    "retry_block",
    "size_pool",
    "uses_mirror_pairs",
]
