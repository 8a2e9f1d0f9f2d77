import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubekit.geometry import Box, Tube, iou, tube_overlap
from tubekit.suppression import ScoredBox, ScoredTube, nms_boxes, nms_tubes

from oracles import greedy_nms_oracle


def random_scored_boxes(rng, n):
    out = []
    for _ in range(n):
        x1, y1 = rng.uniform(0, 20, size=2)
        w, h = rng.uniform(1, 15, size=2)
        out.append(ScoredBox(Box(x1, y1, x1 + w, y1 + h), 0, float(rng.uniform(0, 1))))
    return out


def random_scored_tubes(rng, n):
    out = []
    for _ in range(n):
        x1, y1 = rng.uniform(0, 20, size=2)
        w, h = rng.uniform(1, 15, size=2)
        dx, dy = rng.uniform(-5, 5, size=2)
        tube = Tube(0, 4, Box(x1, y1, x1 + w, y1 + h),
                    Box(x1 + dx, y1 + dy, x1 + w + dx, y1 + h + dy))
        out.append(ScoredTube(tube, float(rng.uniform(0, 1))))
    return out


def test_threshold_validated():
    with pytest.raises(ValueError):
        nms_boxes([], 1.5)


def test_singleton_box_kept():
    items = [ScoredBox(Box(0, 0, 5, 5), 0, 0.4)]
    assert nms_boxes(items, 0.5) == [0]


def test_duplicate_boxes_suppressed():
    b = Box(0, 0, 10, 10)
    items = [ScoredBox(b, 0, 0.9), ScoredBox(b, 0, 0.8)]
    assert nms_boxes(items, 0.5) == [0]


def test_singleton_tube_kept():
    t = Tube(0, 3, Box(0, 0, 5, 5), Box(0, 0, 5, 5))
    assert nms_tubes([ScoredTube(t, 0.2)], 0.5) == [0]


def test_min_rule_keeps_divergent_tubes():
    start = Box(0, 0, 10, 10)
    a = ScoredTube(Tube(0, 5, start, Box(0, 0, 10, 10)), 0.9)
    b = ScoredTube(Tube(0, 5, start, Box(50, 50, 60, 60)), 0.8)
    assert nms_tubes([a, b], 0.5) == [0, 1]


def test_score_ties_break_by_lower_index():
    b = Box(0, 0, 10, 10)
    items = [ScoredBox(b, 0, 0.5), ScoredBox(b, 0, 0.5)]
    assert nms_boxes(items, 0.5) == [0]


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("threshold", [0.0, 0.3, 0.5, 0.9])
def test_boxes_match_brute_force(seed, threshold):
    rng = np.random.default_rng(seed)
    items = random_scored_boxes(rng, int(rng.integers(1, 9)))
    sim = lambda i, j: iou(items[i].box, items[j].box)
    expected = greedy_nms_oracle([s.score for s in items], sim, threshold)
    assert nms_boxes(items, threshold) == expected


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("threshold", [0.0, 0.3, 0.5, 0.9])
def test_tubes_match_brute_force(seed, threshold):
    rng = np.random.default_rng(seed + 1000)
    items = random_scored_tubes(rng, int(rng.integers(1, 9)))
    sim = lambda i, j: tube_overlap(items[i].tube, items[j].tube)
    expected = greedy_nms_oracle([s.score for s in items], sim, threshold)
    assert nms_tubes(items, threshold) == expected


@given(st.integers(0, 10_000), st.floats(0, 1), st.integers(1, 12))
@settings(max_examples=100)
def test_kept_set_properties(seed, threshold, n):
    rng = np.random.default_rng(seed)
    items = random_scored_boxes(rng, n)
    kept = nms_boxes(items, threshold)
    scores = [items[i].score for i in kept]
    assert scores == sorted(scores, reverse=True)
    for a in kept:
        for b in kept:
            if a != b:
                assert iou(items[a].box, items[b].box) <= threshold
    # Every suppressed item is close to some kept item of >= score.
    for i in set(range(n)) - set(kept):
        assert any(items[k].score >= items[i].score
                   and iou(items[k].box, items[i].box) > threshold for k in kept)


@given(st.integers(0, 10_000), st.integers(1, 10))
@settings(max_examples=60)
def test_raising_threshold_never_shrinks_kept_set(seed, n):
    rng = np.random.default_rng(seed)
    items = random_scored_boxes(rng, n)
    sizes = [len(nms_boxes(items, t)) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert sizes == sorted(sizes)
