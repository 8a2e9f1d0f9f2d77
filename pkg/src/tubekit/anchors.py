"""Tube anchor grids, regression coding, label assignment and map decoding.

Anchors are zero-motion tubes attached to the spatial cells of a feature
volume; K anchors per seed location span the configured scales and aspect
ratios.  Decoded proposals may gain motion even though anchors have none,
because the regression coding treats the two tube ends independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .geometry import Box, FullyOutsideError, GeometryError, Tube, clip_tube, tube_overlap
from .suppression import ScoredTube, nms_tubes

ANCHOR_POSITIVE_THRESHOLD = 0.5
ANCHOR_NEGATIVE_THRESHOLD = 0.3
PROPOSAL_POSITIVE_THRESHOLD = 0.5
PROPOSAL_NEGATIVE_LOW = 0.1

# Scale count is fixed at six; the values themselves are engineering defaults
# tuned for head-sized objects and can be overridden in the run config.
DEFAULT_SCALES = (16.0, 32.0, 64.0, 128.0, 256.0, 512.0)
SQUARE_ASPECT_RATIOS = (1.0,)
DIVERSE_ASPECT_RATIOS = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class AnchorConfig:
    """Anchor layout: feature stride plus the scale / aspect-ratio sets."""

    stride: float = 16.0
    scales: tuple[float, ...] = DEFAULT_SCALES
    aspect_ratios: tuple[float, ...] = SQUARE_ASPECT_RATIOS

    def __post_init__(self):
        if not self.scales or not self.aspect_ratios:
            raise ValueError("scales and aspect_ratios must be non-empty")
        if any(s <= 0 for s in self.scales) or any(r <= 0 for r in self.aspect_ratios):
            raise ValueError("scales and aspect_ratios must be positive")
        if self.stride <= 0:
            raise ValueError("stride must be positive")

    @property
    def anchors_per_seed(self) -> int:
        return len(self.scales) * len(self.aspect_ratios)


@dataclass(frozen=True)
class AnchorGrid:
    """All anchors of one feature map, row-major seed order then anchor index."""

    feat_h: int
    feat_w: int
    config: AnchorConfig
    tube_length: int
    anchors: tuple[Tube, ...] = field(repr=False)

    @property
    def frame_width(self) -> float:
        return self.feat_w * self.config.stride

    @property
    def frame_height(self) -> float:
        return self.feat_h * self.config.stride


@dataclass(frozen=True)
class RegressionParams:
    """Center/log-size offsets for the start and end boxes of a tube."""

    start: tuple[float, float, float, float]
    end: tuple[float, float, float, float]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.start + self.end):
            raise ValueError("regression params must be finite")

    def as_array(self) -> np.ndarray:
        return np.array(self.start + self.end, dtype=np.float64)


class AnchorLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    IGNORE = "ignore"


class ProposalLabel(Enum):
    POSITIVE = "positive"
    BACKGROUND = "background"
    EXCLUDED = "excluded"


def generate_anchor_grid(feat_h: int, feat_w: int, config: AnchorConfig,
                         tube_length: int = 1) -> AnchorGrid:
    """Zero-motion tube anchors centered on each feature cell.

    Box dimensions are scale * sqrt(ratio) by scale / sqrt(ratio) where the
    ratio is width over height.
    """
    if feat_h < 1 or feat_w < 1:
        raise ValueError("feature map dimensions must be >= 1")
    anchors = []
    for i in range(feat_h):
        for j in range(feat_w):
            cx = (j + 0.5) * config.stride
            cy = (i + 0.5) * config.stride
            for scale in config.scales:
                for ratio in config.aspect_ratios:
                    w = scale * math.sqrt(ratio)
                    h = scale / math.sqrt(ratio)
                    box = Box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)
                    anchors.append(Tube.static(0, tube_length, box))
    return AnchorGrid(feat_h, feat_w, config, tube_length, tuple(anchors))


def _encode_box(anchor: Box, target: Box) -> tuple[float, float, float, float]:
    if anchor.width <= 0 or anchor.height <= 0:
        raise GeometryError("degenerate anchor box")
    acx, acy = anchor.center
    tcx, tcy = target.center
    return (
        (tcx - acx) / anchor.width,
        (tcy - acy) / anchor.height,
        math.log(target.width / anchor.width),
        math.log(target.height / anchor.height),
    )


def _decode_box(anchor: Box, p: Sequence[float]) -> Box:
    acx, acy = anchor.center
    cx = acx + p[0] * anchor.width
    cy = acy + p[1] * anchor.height
    try:
        w = anchor.width * math.exp(p[2])
        h = anchor.height * math.exp(p[3])
    except OverflowError as e:
        raise GeometryError("regression params decode to a degenerate box") from e
    if not all(math.isfinite(v) for v in (cx, cy, w, h)) or w <= 0 or h <= 0:
        raise GeometryError("regression params decode to a degenerate box")
    return Box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)


def encode_regression(anchor: Tube, target: Tube) -> RegressionParams:
    """Center/log-size coding of a target tube relative to an anchor, per end."""
    return RegressionParams(_encode_box(anchor.start, target.start),
                            _encode_box(anchor.end, target.end))


def decode_regression(anchor: Tube, params: RegressionParams) -> Tube:
    """Inverse of :func:`encode_regression` applied to both tube ends."""
    return Tube(anchor.t0, anchor.length,
                _decode_box(anchor.start, params.start),
                _decode_box(anchor.end, params.end))


def smooth_l1(x: float) -> float:
    """0.5 x^2 inside the unit interval, |x| - 0.5 outside."""
    ax = abs(x)
    return 0.5 * x * x if ax < 1.0 else ax - 0.5


def assign_anchor_labels(anchors: Sequence[Tube], gt_tubes: Sequence[Tube],
                         positive_threshold: float = ANCHOR_POSITIVE_THRESHOLD,
                         negative_threshold: float = ANCHOR_NEGATIVE_THRESHOLD) -> list[AnchorLabel]:
    """Class-agnostic anchor labels from the best tube overlap with ground truth.

    Anchors falling in the gap between the two thresholds are marked IGNORE
    and excluded from training batches entirely.
    """
    labels = []
    for a in anchors:
        best = max((tube_overlap(a, g) for g in gt_tubes), default=0.0)
        if gt_tubes and best >= positive_threshold:
            labels.append(AnchorLabel.POSITIVE)
        elif best <= negative_threshold:
            labels.append(AnchorLabel.NEGATIVE)
        else:
            labels.append(AnchorLabel.IGNORE)
    return labels


@dataclass(frozen=True)
class ProposalAssignment:
    label: ProposalLabel
    class_id: Optional[int] = None
    matched_gt: Optional[int] = None
    regression_target: Optional[RegressionParams] = None


def assign_proposal_labels(proposals: Sequence[Tube], gt_tubes: Sequence[Tube],
                           gt_classes: Sequence[int],
                           positive_threshold: float = PROPOSAL_POSITIVE_THRESHOLD,
                           negative_low: float = PROPOSAL_NEGATIVE_LOW) -> list[ProposalAssignment]:
    """Proposal labels against class-carrying ground-truth tubes.

    Positives take the class and regression target of the maximal-overlap
    ground truth (ties to the lower GT index); mid-overlap proposals become
    background; proposals below the lower bound are excluded from standard
    sampling and only re-enter through hard-negative mining.
    """
    if len(gt_tubes) != len(gt_classes):
        raise ValueError("gt_tubes and gt_classes must have equal length")
    out = []
    for p in proposals:
        best_i, best_ov = None, 0.0
        for i, g in enumerate(gt_tubes):
            ov = tube_overlap(p, g)
            if ov > best_ov:
                best_i, best_ov = i, ov
        if best_i is not None and best_ov >= positive_threshold:
            out.append(ProposalAssignment(ProposalLabel.POSITIVE, gt_classes[best_i], best_i,
                                          encode_regression(p, gt_tubes[best_i])))
        elif best_ov >= negative_low:
            out.append(ProposalAssignment(ProposalLabel.BACKGROUND))
        else:
            out.append(ProposalAssignment(ProposalLabel.EXCLUDED))
    return out


def propose_from_maps(scores: np.ndarray, regressions: np.ndarray, grid: AnchorGrid,
                      top_n: int, nms_threshold: float) -> list[ScoredTube]:
    """Decode every anchor with its regression slice and prune by tube-NMS.

    `scores` has shape (H', W', K) and `regressions` (H', W', K, 8); outputs
    are clipped to the frame spanned by the grid and returned as the top_n
    NMS survivors in descending score order.
    """
    k = grid.config.anchors_per_seed
    if scores.shape != (grid.feat_h, grid.feat_w, k):
        raise ValueError(f"score map shape {scores.shape} does not match grid")
    if regressions.shape != (grid.feat_h, grid.feat_w, k, 8):
        raise ValueError(f"regression map shape {regressions.shape} does not match grid")
    candidates = []
    flat_scores = scores.reshape(-1)
    flat_regs = regressions.reshape(-1, 8)
    for idx, anchor in enumerate(grid.anchors):
        p = flat_regs[idx]
        params = RegressionParams(tuple(float(v) for v in p[:4]), tuple(float(v) for v in p[4:]))
        try:
            tube = decode_regression(anchor, params)
            tube = clip_tube(tube, grid.frame_width, grid.frame_height)
        except (GeometryError, FullyOutsideError, ValueError):
            continue
        candidates.append(ScoredTube(tube, float(flat_scores[idx])))
    kept = nms_tubes(candidates, nms_threshold)
    return [candidates[i] for i in kept[:top_n]]
