"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line (visible with `pytest -s` or `-rP`).  Tolerances and runtime
budgets are pinned here, not configurable.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from tubekit.anchors import decode_regression, encode_regression, smooth_l1
from tubekit.config import RunConfig
from tubekit.evaluation import average_precision, box_recall, corloc, tube_recall
from tubekit.geometry import Box, Tube, interpolate_tube, iou, tube_overlap
from tubekit.motion import MotionConfig, tube_proposals_from_tracks
from tubekit.pooling import FeatureVolume, TemporalMode, toi_pool_backward, toi_pool_forward
from tubekit.sampling import BatchConfig, sample_batch
from tubekit.suppression import ScoredBox, ScoredTube, nms_boxes, nms_tubes
from tubekit.synthdata import SceneConfig, generate_scene

from oracles import ap_oracle, greedy_nms_oracle, match_oracle, raster_iou, toi_pool_oracle
from test_evaluation import HAND_CASES
from test_sampling import make_pool


@contextmanager
def criterion(name, budget_seconds=None):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.monotonic() - start
    if budget_seconds is not None and elapsed > budget_seconds:
        print(f"[FAIL] {name} (runtime {elapsed:.1f}s > {budget_seconds}s)")
        pytest.fail(f"{name}: runtime budget exceeded ({elapsed:.1f}s)")
    print(f"[PASS] {name} ({elapsed:.1f}s)")


def random_int_box(rng, side=32):
    x1 = int(rng.integers(0, side - 1))
    y1 = int(rng.integers(0, side - 1))
    x2 = int(rng.integers(x1 + 1, side + 1))
    y2 = int(rng.integers(y1 + 1, side + 1))
    return (x1, y1, x2, y2)


def random_float_box(rng, span=100.0):
    x1, y1 = rng.uniform(0, span, size=2)
    w, h = rng.uniform(0.5, span / 2, size=2)
    return Box(x1, y1, x1 + w, y1 + h)


def test_geometry_oracle_suite():
    with criterion("geometry oracle suite", budget_seconds=5):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            a, b = random_int_box(rng), random_int_box(rng)
            got = iou(Box(*a), Box(*b))
            want = raster_iou(a, b)
            assert abs(got - want) <= 1e-9
            assert (got == 0.0) == (want == 0.0)
        for _ in range(10_000):
            a, b = random_float_box(rng), random_float_box(rng)
            v = iou(a, b)
            assert v == iou(b, a) and 0.0 <= v <= 1.0
            assert iou(a, a) == 1.0
            ta = Tube(0, 3, a, b)
            tb = Tube(0, 3, b, a)
            o = tube_overlap(ta, tb)
            assert o == tube_overlap(tb, ta) and 0.0 <= o <= 1.0
            assert tube_overlap(ta, ta) == 1.0


def test_nms_oracle_suite():
    with criterion("NMS oracle suite", budget_seconds=5):
        rng = np.random.default_rng(1)
        for trial in range(500):
            n = int(rng.integers(1, 9))
            threshold = float(rng.uniform(0, 1))
            boxes = [ScoredBox(random_float_box(rng, 40), 0, float(rng.uniform()))
                     for _ in range(n)]
            sim = lambda i, j: iou(boxes[i].box, boxes[j].box)
            assert nms_boxes(boxes, threshold) == greedy_nms_oracle(
                [b.score for b in boxes], sim, threshold)

            tubes = [ScoredTube(Tube(0, 4, random_float_box(rng, 40),
                                     random_float_box(rng, 40)), float(rng.uniform()))
                     for _ in range(n)]
            tsim = lambda i, j: tube_overlap(tubes[i].tube, tubes[j].tube)
            assert nms_tubes(tubes, threshold) == greedy_nms_oracle(
                [t.score for t in tubes], tsim, threshold)


def _random_pool_case(rng, distinct=False):
    t = int(rng.integers(1, 5))
    c = int(rng.integers(1, 5))
    h = int(rng.integers(4, 17))
    w = int(rng.integers(4, 17))
    if distinct:
        values = rng.permutation(t * c * h * w).astype(np.float64).reshape(t, c, h, w)
    else:
        values = rng.uniform(-1, 1, size=(t, c, h, w))
    volume = FeatureVolume(values, 1.0)
    x1, y1 = rng.uniform(0, w * 0.5), rng.uniform(0, h * 0.5)
    bw, bh = rng.uniform(1.0, w * 0.5), rng.uniform(1.0, h * 0.5)
    dx, dy = rng.uniform(-2, 2, size=2)
    tube = Tube(0, t, Box(x1, y1, x1 + bw, y1 + bh),
                Box(x1 + dx, y1 + dy, x1 + bw + dx, y1 + bh + dy))
    p = int(rng.integers(1, 7))
    return volume, tube, p


def test_pooling_oracle_and_gradient_suite():
    with criterion("pooling oracle + gradient suite", budget_seconds=60):
        rng = np.random.default_rng(2)
        for trial in range(200):
            volume, tube, p = _random_pool_case(rng)
            mode = "max" if trial % 2 == 0 else "average"
            pooled = toi_pool_forward(volume, tube, p, TemporalMode(mode))
            boxes = [(b.x1, b.y1, b.x2, b.y2)
                     for b in (interpolate_tube(tube, k) for k in range(tube.length))]
            expected = toi_pool_oracle(volume.values.tolist(), boxes, 1.0, p, mode)
            assert pooled.values.tolist() == expected  # bit-equal

        for trial in range(100):
            volume, tube, p = _random_pool_case(rng, distinct=True)
            mode = TemporalMode.MAX if trial % 2 == 0 else TemporalMode.AVERAGE
            pooled = toi_pool_forward(volume, tube, p, mode)
            g_out = rng.uniform(-1, 1, size=pooled.values.shape)
            analytic = (toi_pool_backward(g_out, pooled, volume.shape))
            direction = rng.uniform(-1, 1, size=volume.values.shape)
            h = 1e-5
            plus = toi_pool_forward(FeatureVolume(volume.values + h * direction, 1.0),
                                    tube, p, mode).values
            minus = toi_pool_forward(FeatureVolume(volume.values - h * direction, 1.0),
                                     tube, p, mode).values
            fd = ((plus - minus) * g_out).sum() / (2 * h)
            expected = (analytic * direction).sum()
            assert fd == pytest.approx(expected, rel=1e-4, abs=1e-8)


def test_regression_coding():
    with criterion("regression coding"):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            anchor = Tube(0, 4, random_float_box(rng), random_float_box(rng))
            target = Tube(0, 4, random_float_box(rng), random_float_box(rng))
            decoded = decode_regression(anchor, encode_regression(anchor, target))
            for got, want in ((decoded.start, target.start), (decoded.end, target.end)):
                for attr in ("x1", "y1", "x2", "y2"):
                    assert abs(getattr(got, attr) - getattr(want, attr)) <= 1e-6
        # Continuity and matching one-sided slopes at |x| = 1: the quadratic
        # branch has value 0.5 x^2 and slope x, the linear branch |x| - 0.5
        # and slope sign(x); both pairs must agree at the joints.
        for s in (1.0, -1.0):
            assert abs(smooth_l1(s) - 0.5) <= 1e-9
            quad_value, lin_value = 0.5 * s * s, abs(s) - 0.5
            quad_slope, lin_slope = s, np.sign(s)
            assert abs(quad_value - lin_value) <= 1e-9
            assert abs(quad_slope - lin_slope) <= 1e-9
            h = 1e-6
            fd_left = (smooth_l1(s) - smooth_l1(s - h)) / h
            fd_right = (smooth_l1(s + h) - smooth_l1(s)) / h
            assert abs(fd_left - fd_right) <= 1e-5


def test_motion_proposal_recovery():
    with criterion("motion-proposal recovery", budget_seconds=30):
        config = MotionConfig(direction_bins=16, hypotheses=4)

        # Noiseless: every planted displacement recovered exactly.
        for seed in range(20):
            cfg = SceneConfig(num_objects=3, seed=seed, tracks_per_object=40)
            scene = generate_scene(cfg)
            per_seed = tube_proposals_from_tracks(
                list(scene.seed_boxes), list(scene.point_tracks), cfg.length,
                config, cfg.frame_width, cfg.frame_height, seed=seed)
            for tubes, (dx, dy) in zip(per_seed, scene.displacements):
                err = min(max(abs((t.end.x1 - t.start.x1) - dx),
                              abs((t.end.y1 - t.start.y1) - dy)) for t in tubes)
                assert err <= 1e-9

        # 1 px track noise: within the 2 px inlier threshold for >= 95% of
        # 200 seeded objects.
        recovered = 0
        total = 0
        seed = 0
        while total < 200:
            cfg = SceneConfig(num_objects=4, seed=1000 + seed, track_noise=1.0,
                              tracks_per_object=40, clutter_tracks=10)
            scene = generate_scene(cfg)
            per_seed = tube_proposals_from_tracks(
                list(scene.seed_boxes), list(scene.point_tracks), cfg.length,
                config, cfg.frame_width, cfg.frame_height, seed=seed)
            for tubes, (dx, dy) in zip(per_seed, scene.displacements):
                err = min(np.hypot((t.end.x1 - t.start.x1) - dx,
                                   (t.end.y1 - t.start.y1) - dy) for t in tubes)
                recovered += err <= config.ransac_inlier_threshold
                total += 1
            seed += 1
        assert recovered / total >= 0.95, f"recovered {recovered}/{total}"


def test_end_to_end_recall_sanity():
    with criterion("end-to-end recall sanity"):
        scene = generate_scene(SceneConfig(num_objects=4, seed=10))
        gt = list(scene.gt_tubes)
        assert tube_recall(gt, gt) == 1.0
        assert box_recall(gt, list(scene.tracks)) == 1.0

        # Shift by 3w/7 so IoU at both ends is exactly 0.4 < 0.5.
        jittered = []
        for t in gt:
            dx = 3.0 * t.start.width / 7.0
            jittered.append(Tube(t.t0, t.length, t.start.translated(dx, 0),
                                 t.end.translated(dx, 0)))
        for j, g in zip(jittered, gt):
            assert tube_overlap(j, g) == pytest.approx(0.4, abs=1e-9)
        assert tube_recall(jittered, gt, threshold=0.5) == 0.0

        # Monotonicity of recall in proposal-set size on 50 random scenes.
        rng = np.random.default_rng(11)
        for s in range(50):
            scene = generate_scene(SceneConfig(num_objects=3, seed=200 + s))
            proposals = [Tube(0, scene.config.length, random_float_box(rng, 150),
                              random_float_box(rng, 150)) for _ in range(12)]
            values = [tube_recall(proposals[:n], list(scene.gt_tubes))
                      for n in range(len(proposals) + 1)]
            assert values == sorted(values)


def test_paper_constant_conformance():
    with criterion("default-config constant conformance"):
        cfg = RunConfig()
        assert cfg.tube_length == 10
        assert cfg.proposal_positive_threshold == 0.5
        assert cfg.proposal_negative_low == 0.1
        assert cfg.anchor_positive_threshold == 0.5
        assert cfg.anchor_negative_threshold == 0.3
        assert cfg.batch.batch_size == 4 * 64
        assert cfg.batch.max_positive_fraction == 0.25
        assert cfg.anchor_batch.batch_size == 4 * 128
        assert cfg.anchor_batch.max_positive_fraction == 0.5
        assert cfg.batch.max_hard_negative_fraction == 0.5
        assert cfg.pooled_side == 6 and cfg.pooled_side_deep == 7
        assert len(cfg.anchor.scales) == 6 and len(cfg.anchor_diverse.scales) == 6
        assert cfg.anchor.aspect_ratios == (1.0,)
        assert cfg.anchor_diverse.aspect_ratios == (1 / 4, 1 / 2, 1.0, 2.0, 4.0)


def test_sampler_determinism_and_caps():
    with criterion("sampler determinism and caps"):
        rng = np.random.default_rng(12)
        for trial in range(1000):
            pool = make_pool(int(rng.integers(1, 9)), int(rng.integers(1, 70)),
                             int(rng.integers(1, 160)))
            cfg = BatchConfig(4, 64, 0.25) if trial % 2 == 0 else BatchConfig(4, 128, 0.5)
            seed = int(rng.integers(0, 2**31))
            batch = sample_batch(pool, cfg, seed)
            assert len(batch.items) <= cfg.batch_size
            n_pos = sum(i.role == "positive" for i in batch.items)
            assert n_pos <= cfg.max_positive_fraction * cfg.batch_size
            keys = [(i.chunk_id, i.item_id) for i in batch.items]
            assert len(keys) == len(set(keys))
            assert sample_batch(pool, cfg, seed) == batch


def test_ap_corloc_hand_case_suite():
    with criterion("AP/CorLoc hand-case suite"):
        assert len(HAND_CASES) >= 10
        for name, dets, gts, ap, cl in HAND_CASES:
            got_ap = average_precision(dets, gts)[0]
            got_cl = corloc(dets, gts)[0]
            assert got_ap == pytest.approx(float(ap), abs=1e-12), name
            assert got_cl == pytest.approx(float(cl), abs=1e-12), name
            # Cross-check the frozen value against the matching oracle.
            flags = match_oracle([(d.box, d.score, d.frame) for d in dets],
                                 [(g.box, g.frame) for g in gts], iou, 0.5)
            assert got_ap == pytest.approx(ap_oracle(flags, len(gts)), abs=1e-12), name
