"""Hierarchical training-batch composition and hard-negative mining.

Batches are drawn chunk-first, then items within each chunk, with the
positive fraction capped over the whole batch.  Hard batches additionally
reserve a capped share for mined hard negatives, with the remainder coming
from the standard mid-overlap negatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Optional, Sequence

import numpy as np

from .geometry import Tube, tube_overlap
from .suppression import ScoredTube

TUBE_CNN_BATCH = dict(chunks_per_batch=4, items_per_chunk=64, max_positive_fraction=0.25)
TPN_BATCH = dict(chunks_per_batch=4, items_per_chunk=128, max_positive_fraction=0.5)
HARD_NEGATIVE_FRACTION = 0.5


@dataclass(frozen=True)
class BatchConfig:
    chunks_per_batch: int = 4
    items_per_chunk: int = 64
    max_positive_fraction: float = 0.25
    max_hard_negative_fraction: Optional[float] = None

    def __post_init__(self):
        if self.chunks_per_batch < 1 or self.items_per_chunk < 1:
            raise ValueError("counts must be >= 1")
        for f in (self.max_positive_fraction, self.max_hard_negative_fraction):
            if f is not None and not 0.0 <= f <= 1.0:
                raise ValueError("fractions must lie in [0, 1]")

    @property
    def batch_size(self) -> int:
        return self.chunks_per_batch * self.items_per_chunk


@dataclass(frozen=True)
class ChunkPool:
    """Disjoint label partitions of one chunk's proposals or anchors."""

    positives: tuple[Hashable, ...]
    negatives: tuple[Hashable, ...]       # overlap in [0.1, 0.5)
    far_negatives: tuple[Hashable, ...] = ()  # overlap < 0.1; hard-mining only

    def __post_init__(self):
        sets = [set(self.positives), set(self.negatives), set(self.far_negatives)]
        if sum(len(s) for s in sets) != len(set().union(*sets)):
            raise ValueError("pool partitions must be disjoint")


@dataclass(frozen=True)
class BatchItem:
    chunk_id: Hashable
    item_id: Hashable
    role: str  # "positive" | "negative" | "hard_negative"


@dataclass(frozen=True)
class Batch:
    items: tuple[BatchItem, ...]
    underfilled: bool = False


def sample_batch(pool: dict[Hashable, ChunkPool], config: BatchConfig, seed: int) -> Batch:
    """Draw chunks, then items per chunk, with the positive cap enforced
    over the whole batch.  Fully deterministic given the seed."""
    if not pool:
        raise ValueError("empty pool")
    rng = np.random.default_rng(seed)
    chunk_ids = sorted(pool, key=str)
    usable = [c for c in chunk_ids if pool[c].positives or pool[c].negatives]
    if not usable:
        raise ValueError("no chunk has positives or negatives")
    n_chunks = min(config.chunks_per_batch, len(usable))
    chosen = [usable[i] for i in rng.choice(len(usable), size=n_chunks, replace=False)]

    positive_budget = int(config.max_positive_fraction * config.batch_size)
    items: list[BatchItem] = []
    for cid in chosen:
        cpool = pool[cid]
        pos = list(cpool.positives)
        neg = list(cpool.negatives)
        rng.shuffle(pos)
        rng.shuffle(neg)
        take_pos = min(len(pos), config.items_per_chunk, positive_budget)
        positive_budget -= take_pos
        take_neg = min(len(neg), config.items_per_chunk - take_pos)
        items.extend(BatchItem(cid, i, "positive") for i in pos[:take_pos])
        items.extend(BatchItem(cid, i, "negative") for i in neg[:take_neg])
    return Batch(tuple(items), underfilled=len(items) < config.batch_size)


def mine_hard_negatives(proposals: Sequence[ScoredTube], gt_tubes: Sequence[Tube],
                        top_k: int) -> list[int]:
    """Indices of the top-k scoring proposals with zero overlap to every GT.

    Ties break toward the lower input index; scores come out non-increasing.
    """
    zero_overlap = [i for i, p in enumerate(proposals)
                    if all(tube_overlap(p.tube, g) == 0.0 for g in gt_tubes)]
    zero_overlap.sort(key=lambda i: (-proposals[i].score, i))
    return zero_overlap[:top_k]


def default_mining_top_k(config: BatchConfig) -> int:
    """Mine twice as many hard negatives as the batch has slots for."""
    frac = config.max_hard_negative_fraction or HARD_NEGATIVE_FRACTION
    return 2 * int(frac * config.batch_size)


def compose_hard_batch(positives: Sequence[BatchItem], hard_negatives: Sequence[BatchItem],
                       negatives: Sequence[BatchItem], config: BatchConfig) -> Batch:
    """Batch with capped positive and hard-negative shares, the rest filled
    from standard negatives.  Caps are upper bounds, not quotas."""
    if config.max_hard_negative_fraction is None:
        raise ValueError("config must set max_hard_negative_fraction")
    size = config.batch_size
    n_pos = min(len(positives), int(config.max_positive_fraction * size))
    n_hard = min(len(hard_negatives), int(config.max_hard_negative_fraction * size))
    n_neg = min(len(negatives), size - n_pos - n_hard)
    items = tuple(positives[:n_pos]) + tuple(hard_negatives[:n_hard]) + tuple(negatives[:n_neg])
    return Batch(items, underfilled=len(items) < size)
