"""Batched kernel dispatch behind the `kernel` CLI subcommand.

Foreign-language callers (the frontend bindings) funnel many kernel
invocations through one process call: a JSON request with a list of cases,
a JSON response with one result per case.  All payloads are plain JSON so
float64 values survive the boundary bit-exactly.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .anchors import AnchorConfig, generate_anchor_grid, propose_from_maps
from .geometry import Box, Tube, iou, tube_overlap
from .pooling import FeatureVolume, TemporalMode, toi_pool_backward, toi_pool_forward
from .suppression import ScoredBox, ScoredTube, nms_boxes, nms_tubes


def _box(v: list[float]) -> Box:
    return Box(*v)


def _tube(r: dict[str, Any]) -> Tube:
    return Tube(r.get("t0", 0), r["length"], _box(r["start"]), _box(r["end"]))


def _tube_out(t: Tube) -> dict[str, Any]:
    return {"t0": t.t0, "length": t.length,
            "start": [t.start.x1, t.start.y1, t.start.x2, t.start.y2],
            "end": [t.end.x1, t.end.y1, t.end.x2, t.end.y2]}


def _pool_case(case: dict[str, Any]):
    volume = FeatureVolume(np.asarray(case["volume"], dtype=np.float64),
                           case.get("stride", 1.0))
    mode = TemporalMode(case.get("mode", "max"))
    pooled = toi_pool_forward(volume, _tube(case["tube"]), case["size"], mode)
    return volume, pooled


def _run_case(op: str, case: dict[str, Any]) -> Any:
    if op == "iou":
        return iou(_box(case["a"]), _box(case["b"]))
    if op == "tube_overlap":
        return tube_overlap(_tube(case["a"]), _tube(case["b"]))
    if op == "nms_tubes":
        items = [ScoredTube(_tube(r), r["score"]) for r in case["items"]]
        return nms_tubes(items, case["threshold"])
    if op == "nms_boxes":
        items = [ScoredBox(_box(r["box"]), r.get("frame", 0), r["score"])
                 for r in case["items"]]
        return nms_boxes(items, case["threshold"])
    if op == "toi_pool_forward":
        _, pooled = _pool_case(case)
        out = {"values": pooled.values.tolist()}
        if pooled.argmax is not None:
            out["argmax"] = pooled.argmax.tolist()
        return out
    if op == "toi_pool_backward":
        volume, pooled = _pool_case(case)
        grad_out = np.asarray(case["grad"], dtype=np.float64)
        grad_in = toi_pool_backward(grad_out, pooled, volume.shape)
        return {"grad": grad_in.tolist()}
    if op == "propose_from_maps":
        a = case["anchor"]
        config = AnchorConfig(a.get("stride", 16.0), tuple(a["scales"]),
                              tuple(a["aspect_ratios"]))
        scores = np.asarray(case["scores"], dtype=np.float64)
        regs = np.asarray(case["regressions"], dtype=np.float64)
        grid = generate_anchor_grid(scores.shape[0], scores.shape[1], config,
                                    case.get("length", 1))
        proposals = propose_from_maps(scores, regs, grid, case["top_n"],
                                      case["threshold"])
        return [dict(_tube_out(p.tube), score=p.score) for p in proposals]
    raise ValueError(f"unknown kernel op: {op}")


def run_kernel_request(op: str, request: dict[str, Any]) -> dict[str, Any]:
    return {"results": [_run_case(op, case) for case in request["cases"]]}
