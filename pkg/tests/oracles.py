"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive (pixel grids, nested loops, explicit
greedy passes) and shares no code path with the library implementations.
"""

from __future__ import annotations

from math import ceil, floor


def raster_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """IoU of integer boxes by counting unit pixels on a grid."""
    def cells(box):
        x1, y1, x2, y2 = box
        return {(x, y) for x in range(x1, x2) for y in range(y1, y2)}
    ca, cb = cells(a), cells(b)
    inter = len(ca & cb)
    union = len(ca | cb)
    return inter / union if union else 0.0


def greedy_nms_oracle(scores, similarity, threshold):
    """Re-derivation of greedy NMS: explicit remaining-set loop."""
    remaining = list(range(len(scores)))
    kept = []
    while remaining:
        best = remaining[0]
        for i in remaining[1:]:
            if scores[i] > scores[best]:
                best = i
        kept.append(best)
        remaining = [i for i in remaining
                     if i != best and similarity(best, i) <= threshold]
    return kept


def pool_region_oracle(values, box, stride, pooled_side):
    """Pure-Python spatial max pooling of one frame region.

    values: list-of-lists-of-lists indexed [c][y][x].  Returns
    (maxima[c][py][px], argmax[c][py][px] = (y, x)).  Mirrors the package's
    documented mapping convention (outward rounding, proportional splits,
    bins widened to one cell) with independent scalar code.
    """
    c_n = len(values)
    h = len(values[0])
    w = len(values[0][0])
    x1, y1, x2, y2 = box
    xa = min(max(floor(x1 / stride), 0), w - 1)
    xb = max(min(ceil(x2 / stride), w), xa + 1)
    ya = min(max(floor(y1 / stride), 0), h - 1)
    yb = max(min(ceil(y2 / stride), h), ya + 1)
    p = pooled_side
    out = [[[None] * p for _ in range(p)] for _ in range(c_n)]
    arg = [[[None] * p for _ in range(p)] for _ in range(c_n)]
    for ci in range(c_n):
        for py in range(p):
            ys = ya + floor(py * (yb - ya) / p)
            ye = ya + ceil((py + 1) * (yb - ya) / p)
            ye = max(ye, ys + 1)
            for px in range(p):
                xs = xa + floor(px * (xb - xa) / p)
                xe = xa + ceil((px + 1) * (xb - xa) / p)
                xe = max(xe, xs + 1)
                best = None
                best_yx = None
                for y in range(ys, ye):
                    for x in range(xs, xe):
                        v = values[ci][y][x]
                        if best is None or v > best:
                            best = v
                            best_yx = (y, x)
                out[ci][py][px] = best
                arg[ci][py][px] = best_yx
    return out, arg


def toi_pool_oracle(volume, boxes, stride, pooled_side, mode):
    """Nested-loop TOI pooling over explicit per-frame boxes.

    volume indexed [t][c][y][x]; boxes: one (x1, y1, x2, y2) per frame.
    Returns maxima [c][py][px] after temporal max or average aggregation.
    """
    t_n = len(volume)
    per_frame = [pool_region_oracle(volume[k], boxes[k], stride, pooled_side)[0]
                 for k in range(t_n)]
    c_n = len(volume[0])
    p = pooled_side
    out = [[[None] * p for _ in range(p)] for _ in range(c_n)]
    for ci in range(c_n):
        for py in range(p):
            for px in range(p):
                vals = [per_frame[k][ci][py][px] for k in range(t_n)]
                out[ci][py][px] = max(vals) if mode == "max" else sum(vals) / t_n
    return out


def match_oracle(dets, gts, iou_fn, threshold):
    """Greedy score-ordered detection/GT matching; returns per-detection TP
    flags in descending score order (ties by input index)."""
    order = sorted(range(len(dets)), key=lambda i: (-dets[i][1], i))
    used = set()
    flags = []
    for i in order:
        box, _score, frame = dets[i]
        candidates = [(j, iou_fn(box, gts[j][0])) for j in range(len(gts))
                      if j not in used and gts[j][1] == frame]
        candidates = [(j, ov) for j, ov in candidates if ov >= threshold]
        if candidates:
            j = max(candidates, key=lambda t: (t[1], -t[0]))[0]
            used.add(j)
            flags.append(True)
        else:
            flags.append(False)
    return flags


def ap_oracle(flags, n_gt):
    """All-points AP from ordered TP flags: for every recall step, take the
    best precision at that recall or beyond."""
    points = []
    tp = 0
    for n, f in enumerate(flags, start=1):
        tp += f
        points.append((tp / n_gt, tp / n))
    ap = 0.0
    prev_r = 0.0
    for k, (r, _p) in enumerate(points):
        if r > prev_r:
            best_p = max(p2 for r2, p2 in points[k:])
            ap += (r - prev_r) * best_p
            prev_r = r
    return ap
