"""Recall, AP and CorLoc metrics plus tube-to-frame detection decomposition.

All metrics are deterministic and order-invariant: score ties break toward
the lower (stable) input index.  Classes or inputs with no ground truth are
reported as absent (None) rather than zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .geometry import Box, Track, Tube, interpolate_tube, iou, tube_overlap
from .suppression import DETECTION_BOX_NMS_THRESHOLD, ScoredBox, ScoredTube, nms_boxes

Detection = ScoredBox

RECALL_THRESHOLD = 0.5
AP_IOU_THRESHOLD = 0.5
CORLOC_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class GroundTruthBox:
    frame: int
    class_id: int
    box: Box


@dataclass(frozen=True)
class MetricReport:
    metric: str
    value: Optional[float]
    params: dict[str, Any] = field(default_factory=dict)
    per_class: dict[int, float] = field(default_factory=dict)


def tracks_to_gt_boxes(tracks: Sequence[Track]) -> list[GroundTruthBox]:
    return [GroundTruthBox(f, t.class_id, b) for t in tracks for f, b in t.entries]


def tube_recall(proposals: Sequence[Tube], gt_tubes: Sequence[Tube],
                threshold: float = RECALL_THRESHOLD) -> Optional[float]:
    """Fraction of ground-truth tubes covered by >= 1 proposal at the given
    tube overlap; None when there is no ground truth."""
    if not gt_tubes:
        return None
    hit = sum(1 for g in gt_tubes
              if any(tube_overlap(p, g) >= threshold for p in proposals))
    return hit / len(gt_tubes)


def decompose_tube(tube: Tube) -> list[tuple[int, Box]]:
    """Per-frame boxes of a tube at absolute frame indices."""
    return [(tube.t0 + k, interpolate_tube(tube, k)) for k in range(tube.length)]


def box_recall(proposals: Sequence[Tube], gt_tracks: Sequence[Track],
               threshold: float = RECALL_THRESHOLD) -> Optional[float]:
    """Fraction of per-frame ground-truth boxes covered by the per-frame
    decomposition of the proposals at the given IoU."""
    gt = tracks_to_gt_boxes(gt_tracks)
    if not gt:
        return None
    by_frame: dict[int, list[Box]] = {}
    for p in proposals:
        for f, b in decompose_tube(p):
            by_frame.setdefault(f, []).append(b)
    hit = sum(1 for g in gt
              if any(iou(b, g.box) >= threshold for b in by_frame.get(g.frame, ())))
    return hit / len(gt)


def tubes_to_detections(tubes: Sequence[ScoredTube],
                        nms_threshold: float = DETECTION_BOX_NMS_THRESHOLD) -> list[Detection]:
    """Decompose scored tubes into per-frame detections and suppress
    duplicates per frame and class with standard box NMS.

    Each frame box inherits its tube's score and class unchanged.
    """
    groups: dict[tuple[int, Optional[int]], list[Detection]] = {}
    for st in tubes:
        for f, b in decompose_tube(st.tube):
            det = Detection(b, f, st.score, st.class_id)
            groups.setdefault((f, st.class_id), []).append(det)
    out: list[Detection] = []
    for key in sorted(groups, key=lambda k: (k[0], -1 if k[1] is None else k[1])):
        dets = groups[key]
        out.extend(dets[i] for i in nms_boxes(dets, nms_threshold))
    return out


def _match_detections(dets: list[Detection], gts: list[GroundTruthBox],
                      iou_threshold: float) -> list[bool]:
    """Greedy matching in descending score order: each detection takes the
    highest-IoU unmatched GT on its frame, if any clears the threshold."""
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    taken = [False] * len(gts)
    tp = [False] * len(dets)
    for i in order:
        d = dets[i]
        best_j, best = None, -1.0
        for j, g in enumerate(gts):
            if taken[j] or g.frame != d.frame:
                continue
            ov = iou(d.box, g.box)
            if ov >= iou_threshold and ov > best:
                best_j, best = j, ov
        if best_j is not None:
            taken[best_j] = True
            tp[i] = True
    return [tp[i] for i in order]


def _ap_from_flags(flags: Sequence[bool], n_gt: int) -> float:
    # All-points interpolated area under the precision-recall curve.
    recalls = [0.0]
    precisions = [1.0]
    tp = 0
    for n, flag in enumerate(flags, start=1):
        tp += flag
        recalls.append(tp / n_gt)
        precisions.append(tp / n)
    # Precision envelope from the right.
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    return sum((recalls[i + 1] - recalls[i]) * precisions[i + 1]
               for i in range(len(recalls) - 1))


def average_precision(detections: Sequence[Detection], gt_boxes: Sequence[GroundTruthBox],
                      iou_threshold: float = AP_IOU_THRESHOLD) -> dict[int, float]:
    """Per-class AP over frame-level detections; classes without ground
    truth are omitted."""
    classes = sorted({g.class_id for g in gt_boxes})
    result: dict[int, float] = {}
    for cls in classes:
        gts = [g for g in gt_boxes if g.class_id == cls]
        dets = [d for d in detections if d.class_id == cls]
        if not dets:
            result[cls] = 0.0
            continue
        flags = _match_detections(dets, gts, iou_threshold)
        result[cls] = _ap_from_flags(flags, len(gts))
    return result


def corloc(detections: Sequence[Detection], gt_boxes: Sequence[GroundTruthBox],
           iou_threshold: float = CORLOC_IOU_THRESHOLD) -> dict[int, float]:
    """Per class: fraction of positive frames whose top-scoring detection
    localizes some ground truth of that class at the given IoU."""
    classes = sorted({g.class_id for g in gt_boxes})
    result: dict[int, float] = {}
    for cls in classes:
        frames = sorted({g.frame for g in gt_boxes if g.class_id == cls})
        correct = 0
        for f in frames:
            dets = [d for d in detections if d.class_id == cls and d.frame == f]
            if not dets:
                continue
            top = min(range(len(dets)), key=lambda i: (-dets[i].score, i))
            gts = [g.box for g in gt_boxes if g.class_id == cls and g.frame == f]
            if any(iou(dets[top].box, g) >= iou_threshold for g in gts):
                correct += 1
        result[cls] = correct / len(frames)
    return result


def mean_of(per_class: dict[int, float]) -> Optional[float]:
    if not per_class:
        return None
    return sum(per_class.values()) / len(per_class)
