"""
Counter-based random streams.

Every random draw in ticketforge is addressed by a key tuple such as
(seed, purpose, layer, kind, row). A stream depends only on its key, so
growing a layer by extra rows or columns never shifts the values already
drawn elsewhere, and blocks can be generated in any order.

The first key element names the purpose of the draws, and the key length is
hashed along with the key, so keys of different purposes or lengths never
share a stream.
"""

from typing import Tuple

import numpy as np

# Stream purposes (first key element)
SOURCE = 0
TARGET = 1
TRIALS = 2
SAMPLES = 3
SPARSITY = 4
PERTURBATION = 5

# Parameter kinds
WEIGHTS = 0
BIASES = 1

_WORD = 2 ** 32


def stream(seed: int, *key: int) -> np.random.Generator:
    """
    Return an independent Philox generator for ``(seed, *key)``.

    The seed is the entropy; the key, prefixed with its length, is the spawn
    key. Key elements must fit one 32-bit word.
    """
    if seed < 0 or any(k < 0 or k >= _WORD for k in key):
        raise ValueError(f"stream keys must lie in [0, 2^32), got {(seed,) + key}")
    sequence = np.random.SeedSequence(seed, spawn_key=(len(key),) + tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def uniform_rows(seed: int, layer: int, kind: int, shape: Tuple[int, int],
                 half_range: float, purpose: int = SOURCE) -> np.ndarray:
    """
    Draw a matrix with i.i.d. U[-half_range, half_range] entries, one stream per row.

    Column j of row i is always the j-th draw of stream
    (seed, purpose, layer, kind, i), which makes the matrix prefix-stable in
    both dimensions.
    """
    rows, cols = shape
    out = np.empty((rows, cols), dtype=np.float64)
    for i in range(rows):
        out[i] = stream(seed, purpose, layer, kind, i).uniform(-half_range, half_range, size=cols)
    return out


def uniform_vector(seed: int, layer: int, kind: int, size: int, half_range: float,
                   purpose: int = SOURCE) -> np.ndarray:
    """Draw a prefix-stable vector of U[-half_range, half_range] values."""
    return stream(seed, purpose, layer, kind, 0).uniform(-half_range, half_range, size=size)


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Stream for one Monte-Carlo trial; independent of how trials are scheduled."""
    return stream(seed, TRIALS, trial)
