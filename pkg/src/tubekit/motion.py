"""Tracking-based tube proposals from seed boxes and point tracks.

Point tracks interior to a seed box are grouped into a stationary cluster
plus equal-angle directional bins; the most populated groups each get a
RANSAC translation fit, and every surviving consensus displacement yields
one linear tube starting at the seed box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Box, FullyOutsideError, Tube, clip_box

MIN_GROUP_SIZE = 3  # groups smaller than this carry too little consensus evidence


@dataclass(frozen=True)
class PointTrack:
    """A point tracked from the chunk's first frame to its last."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def displacement(self) -> tuple[float, float]:
        return (self.x1 - self.x0, self.y1 - self.y0)


@dataclass(frozen=True)
class MotionConfig:
    direction_bins: int = 16
    hypotheses: int = 4
    stationary_epsilon: float = 0.5
    ransac_iterations: int = 100
    ransac_inlier_threshold: float = 2.0

    def __post_init__(self):
        if self.direction_bins < 1 or self.hypotheses < 1:
            raise ValueError("direction_bins and hypotheses must be >= 1")
        if self.stationary_epsilon < 0 or self.ransac_inlier_threshold < 0:
            raise ValueError("epsilon and inlier threshold must be >= 0")


def _group_tracks(tracks: Sequence[PointTrack], config: MotionConfig) -> dict[int, list[PointTrack]]:
    # Group index -1 is the stationary cluster; 0..N_b-1 are angle sectors.
    groups: dict[int, list[PointTrack]] = {}
    sector = 2.0 * math.pi / config.direction_bins
    for tr in tracks:
        dx, dy = tr.displacement
        if math.hypot(dx, dy) < config.stationary_epsilon:
            key = -1
        else:
            angle = math.atan2(dy, dx) % (2.0 * math.pi)
            key = min(int(angle / sector), config.direction_bins - 1)
        groups.setdefault(key, []).append(tr)
    return groups


def _ransac_translation(tracks: Sequence[PointTrack], config: MotionConfig,
                        rng: np.random.Generator) -> tuple[float, float]:
    """Fit one translation: hypothesize a single track's displacement, keep
    the hypothesis with the largest inlier set, return the mean inlier
    displacement."""
    disps = np.array([t.displacement for t in tracks], dtype=np.float64)
    best_inliers = None
    best_count = -1
    for _ in range(config.ransac_iterations):
        model = disps[rng.integers(len(disps))]
        err = np.hypot(disps[:, 0] - model[0], disps[:, 1] - model[1])
        inliers = err <= config.ransac_inlier_threshold
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    mean = disps[best_inliers].mean(axis=0)
    return float(mean[0]), float(mean[1])


def tube_proposals_from_tracks(seed_boxes: Sequence[Box], tracks: Sequence[PointTrack],
                               length: int, config: MotionConfig,
                               frame_width: float, frame_height: float,
                               seed: int = 0) -> list[list[Tube]]:
    """One list of tube hypotheses per seed box, ordered by group population.

    A seed box without interior tracks (or with no group surviving the
    minimum-size filter) falls back to a single zero-motion tube.
    """
    if length < 2:
        raise ValueError("chunk length must be >= 2 for motion hypotheses")
    results: list[list[Tube]] = []
    for seed_idx, box in enumerate(seed_boxes):
        rng = np.random.default_rng([seed, seed_idx])
        interior = [t for t in tracks if box.contains_point(t.x0, t.y0)]
        clipped_seed = clip_box(box, frame_width, frame_height)
        groups = _group_tracks(interior, config)
        # Most populated first; ties toward the lower bin key (stationary first).
        ranked = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        ranked = [(k, g) for k, g in ranked if len(g) >= MIN_GROUP_SIZE][:config.hypotheses]
        tubes: list[Tube] = []
        for _, group in ranked:
            dx, dy = _ransac_translation(group, config, rng)
            try:
                end = clip_box(clipped_seed.translated(dx, dy), frame_width, frame_height)
            except FullyOutsideError:
                continue
            tubes.append(Tube(0, length, clipped_seed, end))
        if not tubes:
            tubes = [Tube.static(0, length, clipped_seed)]
        results.append(tubes)
    return results
