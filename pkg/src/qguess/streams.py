"""Deterministic random streams for the Monte Carlo drivers.

A master seed expands into independent substreams through numpy's Philox
counter-based generator: the Philox key is (seed, worker index) and distinct
experiment arms get distinct high counter words, so streams are separated by
2^128 counter steps and can never overlap. Results are therefore
bit-reproducible for a fixed (seed, worker count) and independent of how the
work would be scheduled.

Drivers consume substreams in whole batches with a fixed draw order; trials
are chunked so memory stays bounded without changing the draw sequence
(chunk size is a constant, never derived from the workload).
"""

from __future__ import annotations

import numpy as np

MAX_SEED = 2**64 - 1

# fixed internal batch cap; part of the reproducibility contract
BATCH_CAP = 1 << 19


def substream(seed: int, worker: int = 0, block: int = 0) -> np.random.Generator:
    """Generator for one (seed, worker, block) cell of the stream lattice."""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if worker < 0 or block < 0:
        raise ValueError("worker and block indices must be non-negative")
    key = np.array([seed, worker], dtype=np.uint64)
    counter = np.array([0, 0, worker, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def split_trials(trials: int, workers: int) -> list[int]:
    """Per-worker trial counts: as even as possible, remainder to low indices."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    base, extra = divmod(trials, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def batch_sizes(n: int, cap: int = BATCH_CAP) -> list[int]:
    """Chunk n trials into fixed-cap batches (all full except possibly the last)."""
    full, rest = divmod(n, cap)
    return [cap] * full + ([rest] if rest else [])


def worker_batches(seed: int, trials: int, workers: int, block: int = 0):
    """Yield (generator, batch_size) over every worker's chunked substream.

    Workers are visited in index order with one fresh substream each, so any
    order-insensitive aggregate (count sums, moment sums) is bit-identical
    for a fixed (seed, workers); a worker assigned zero trials yields nothing.
    """
    for w, n_w in enumerate(split_trials(trials, workers)):
        if n_w == 0:
            continue
        rng = substream(seed, w, block)
        for m in batch_sizes(n_w):
            yield rng, m
