"""Greedy non-maximum suppression for scored boxes and tubes."""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite
from typing import Callable, Optional, Sequence, TypeVar

from .geometry import Box, Tube, iou, tube_overlap

# Defaults for the two suppression stages; both are CLI-overridable.
PROPOSAL_TUBE_NMS_THRESHOLD = 0.7
DETECTION_BOX_NMS_THRESHOLD = 0.3


@dataclass(frozen=True)
class ScoredBox:
    box: Box
    frame: int
    score: float
    class_id: Optional[int] = None

    def __post_init__(self):
        if not isfinite(self.score):
            raise ValueError("score must be finite")


@dataclass(frozen=True)
class ScoredTube:
    tube: Tube
    score: float
    class_id: Optional[int] = None

    def __post_init__(self):
        if not isfinite(self.score):
            raise ValueError("score must be finite")


_T = TypeVar("_T")


def greedy_nms(items: Sequence[_T], similarity: Callable[[_T, _T], float], threshold: float,
               score: Callable[[_T], float]) -> list[int]:
    """Greedy suppression: keep the best remaining item, drop near-duplicates.

    Returns kept indices in descending-score order.  Score ties break toward
    the lower input index, so the result is deterministic across platforms.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    order = sorted(range(len(items)), key=lambda i: (-score(items[i]), i))
    kept: list[int] = []
    alive = [True] * len(items)
    for i in order:
        if not alive[i]:
            continue
        kept.append(i)
        for j in order:
            if alive[j] and j != i and similarity(items[i], items[j]) > threshold:
                alive[j] = False
    return kept


def nms_boxes(items: Sequence[ScoredBox], threshold: float) -> list[int]:
    """NMS over scored boxes using spatial IoU."""
    return greedy_nms(items, lambda a, b: iou(a.box, b.box), threshold, lambda s: s.score)


def nms_tubes(items: Sequence[ScoredTube], threshold: float) -> list[int]:
    """NMS over scored tubes with tube overlap replacing the spatial IoU."""
    return greedy_nms(items, lambda a, b: tube_overlap(a.tube, b.tube), threshold, lambda s: s.score)
