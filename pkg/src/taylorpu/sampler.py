"""Global proportional random stratified sampling into pseudo-batches.

Full-dataset gradient descent on a single scene degenerates into plain
gradient descent; carving each epoch into pseudo-batches that hold fixed
quotas of positive and unlabeled indices recovers stochastic updates while
keeping the positive fraction identical across batches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class PseudoBatch(NamedTuple):
    positive_indices: np.ndarray
    unlabeled_indices: np.ndarray


@dataclass(frozen=True)
class StratifiedEpochPlan:
    """One epoch's pseudo-batches.

    Within each class the blocks are pairwise disjoint, every block has
    the same size floor(N_class / n_batches), and the positive fraction
    is identical in every batch.
    """

    batches: list[PseudoBatch]

    def __len__(self) -> int:
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)


def stratify(
    positive_idx,
    unlabeled_idx,
    n_pseudo_batches: int,
    rng: np.random.Generator,
) -> StratifiedEpochPlan:
    """Build an epoch plan of ``n_pseudo_batches`` disjoint index blocks.

    Each class's index list is shuffled and cut into blocks of size
    floor(N / n_pseudo_batches); the first n_pseudo_batches blocks per
    class are paired up in order.  Indices beyond the last full block are
    dropped for this epoch and re-enter through the next epoch's shuffle.

    Args:
        positive_idx: labeled-positive row indices.
        unlabeled_idx: unlabeled row indices.
        n_pseudo_batches: number of blocks per class (must not exceed
            either class count).
        rng: random generator driving the shuffles.

    Raises:
        ValueError: if a class has fewer indices than requested batches.
    """
    pos = np.asarray(positive_idx, dtype=np.int64).reshape(-1)
    unl = np.asarray(unlabeled_idx, dtype=np.int64).reshape(-1)
    if n_pseudo_batches < 1:
        raise ValueError(f"n_pseudo_batches must be >= 1, got {n_pseudo_batches}")
    if pos.size < n_pseudo_batches or unl.size < n_pseudo_batches:
        raise ValueError(
            f"n_pseudo_batches={n_pseudo_batches} exceeds a class count "
            f"(positives {pos.size}, unlabeled {unl.size})"
        )
    pos = rng.permutation(pos)
    unl = rng.permutation(unl)
    block_p = pos.size // n_pseudo_batches
    block_u = unl.size // n_pseudo_batches
    batches = [
        PseudoBatch(
            positive_indices=pos[i * block_p : (i + 1) * block_p],
            unlabeled_indices=unl[i * block_u : (i + 1) * block_u],
        )
        for i in range(n_pseudo_batches)
    ]
    return StratifiedEpochPlan(batches=batches)
