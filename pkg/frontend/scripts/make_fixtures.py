#!/usr/bin/env python3
"""Generate equivalence fixtures for the TypeScript bindings tests.

For each kernel op this emits fixtures/<op>.json holding randomized cases
and the expected results, computed in-process by the primary library. The
bindings test replays the same cases through the `tubekit kernel` CLI and
asserts bit-identical results.
"""

import argparse
import json
from pathlib import Path

import numpy as np

from tubekit.kernel_service import run_kernel_request

N_CASES = 1000


def rand_box(rng, lo=0.0, hi=80.0, wmax=60.0):
    x1 = rng.uniform(lo, hi)
    y1 = rng.uniform(lo, hi)
    return [x1, y1, x1 + rng.uniform(1.0, wmax), y1 + rng.uniform(1.0, wmax)]


def rand_tube(rng, length):
    return {"t0": 0, "length": length,
            "start": rand_box(rng), "end": rand_box(rng)}


def iou_cases(rng):
    return [{"a": rand_box(rng), "b": rand_box(rng)} for _ in range(N_CASES)]


def tube_overlap_cases(rng):
    return [{"a": rand_tube(rng, 5), "b": rand_tube(rng, 5)} for _ in range(N_CASES)]


def nms_tubes_cases(rng):
    cases = []
    for _ in range(N_CASES):
        items = [dict(rand_tube(rng, 4), score=float(rng.uniform(0, 1)))
                 for _ in range(int(rng.integers(1, 7)))]
        cases.append({"items": items, "threshold": float(rng.uniform(0.2, 0.8))})
    return cases


def nms_boxes_cases(rng):
    cases = []
    for _ in range(N_CASES):
        items = [{"box": rand_box(rng), "frame": 0, "score": float(rng.uniform(0, 1))}
                 for _ in range(int(rng.integers(1, 7)))]
        cases.append({"items": items, "threshold": float(rng.uniform(0.2, 0.8))})
    return cases


def pool_case(rng):
    volume = rng.normal(size=(2, 2, 4, 4))
    x1 = rng.uniform(0, 9)
    y1 = rng.uniform(0, 9)
    box = [x1, y1, x1 + rng.uniform(2, 6), y1 + rng.uniform(2, 6)]
    return {
        "volume": volume.tolist(),
        "stride": 4.0,
        "tube": {"t0": 0, "length": 2, "start": box, "end": rand_box(rng, 0, 9, 6.0)},
        "size": 2,
        "mode": "max" if rng.uniform() < 0.5 else "average",
    }


def toi_pool_forward_cases(rng):
    return [pool_case(rng) for _ in range(N_CASES)]


def toi_pool_backward_cases(rng):
    cases = []
    for _ in range(N_CASES):
        case = pool_case(rng)
        case["grad"] = rng.normal(size=(2, 2, 2)).tolist()
        cases.append(case)
    return cases


def propose_from_maps_cases(rng):
    cases = []
    for _ in range(N_CASES):
        cases.append({
            "anchor": {"stride": 4.0, "scales": [8.0, 16.0], "aspect_ratios": [1.0]},
            "scores": rng.uniform(0, 1, size=(2, 2, 2)).tolist(),
            "regressions": (rng.normal(size=(2, 2, 2, 8)) * 0.1).tolist(),
            "length": 3,
            "top_n": 5,
            "threshold": float(rng.uniform(0.3, 0.9)),
        })
    return cases


GENERATORS = {
    "iou": iou_cases,
    "tube_overlap": tube_overlap_cases,
    "nms_tubes": nms_tubes_cases,
    "nms_boxes": nms_boxes_cases,
    "toi_pool_forward": toi_pool_forward_cases,
    "toi_pool_backward": toi_pool_backward_cases,
    "propose_from_maps": propose_from_maps_cases,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).parent.parent / "fixtures")
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    for op_idx, (op, gen) in enumerate(GENERATORS.items()):
        rng = np.random.default_rng([args.seed, op_idx])
        cases = gen(rng)
        expected = run_kernel_request(op, {"cases": cases})["results"]
        (args.out / f"{op}.json").write_text(
            json.dumps({"op": op, "cases": cases, "expected": expected}) + "\n")
        print(f"{op}: {len(cases)} cases")


if __name__ == "__main__":
    main()
