"""Deterministic synthetic scenes for oracle and acceptance testing.

A scene plants objects with known static or linear motion, samples point
tracks inside them, adds clutter tracks, and renders feature volumes with
an isotropic activation bump (peak 1.0) at each object center.  Everything
is reproducible bit-for-bit from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import Box, Chunk, Track, Tube, interpolate_tube
from .motion import PointTrack
from .pooling import FeatureVolume


@dataclass(frozen=True)
class SceneConfig:
    frame_width: float = 200.0
    frame_height: float = 200.0
    length: int = 10
    num_objects: int = 2
    velocities: Optional[Sequence[tuple[float, float]]] = None  # None: random per object
    tracks_per_object: int = 30
    clutter_tracks: int = 0
    track_noise: float = 0.0
    feature_channels: int = 1
    feature_stride: float = 1.0
    feature_noise: float = 0.0
    blob_sigma: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.length < 1 or self.frame_width <= 0 or self.frame_height <= 0:
            raise ValueError("invalid scene dimensions")


@dataclass(frozen=True)
class Scene:
    config: SceneConfig
    tracks: tuple[Track, ...]
    gt_tubes: tuple[Tube, ...]
    displacements: tuple[tuple[float, float], ...]  # per object, start-to-end
    point_tracks: tuple[PointTrack, ...]
    seed_boxes: tuple[Box, ...]
    volume: FeatureVolume = field(repr=False)
    velocity_clamped: tuple[bool, ...] = ()

    @property
    def chunk(self) -> Chunk:
        return Chunk("synthetic", 0, self.config.length)


def _plant_object(cfg: SceneConfig, rng: np.random.Generator,
                  velocity: Optional[tuple[float, float]]) -> tuple[Tube, bool]:
    w = rng.uniform(20.0, min(60.0, cfg.frame_width / 2))
    h = rng.uniform(20.0, min(60.0, cfg.frame_height / 2))
    x1 = rng.uniform(0.0, cfg.frame_width - w)
    y1 = rng.uniform(0.0, cfg.frame_height - h)
    if velocity is None:
        vx = rng.uniform(-3.0, 3.0)
        vy = rng.uniform(-3.0, 3.0)
    else:
        vx, vy = velocity
    steps = cfg.length - 1
    clamped = False
    if steps > 0:
        # Clamp velocity so the object stays inside the frame on every frame.
        lo_x = -x1 / steps
        hi_x = (cfg.frame_width - w - x1) / steps
        lo_y = -y1 / steps
        hi_y = (cfg.frame_height - h - y1) / steps
        cvx = min(max(vx, lo_x), hi_x)
        cvy = min(max(vy, lo_y), hi_y)
        clamped = (cvx != vx) or (cvy != vy)
        vx, vy = cvx, cvy
        dx, dy = vx * steps, vy * steps
    else:
        dx = dy = 0.0
    start = Box(x1, y1, x1 + w, y1 + h)
    end = start.translated(dx, dy)
    return Tube(0, cfg.length, start, end), clamped


def generate_scene(cfg: SceneConfig) -> Scene:
    """Build the full synthetic scene: tracks, point tracks, seeds, features."""
    rng = np.random.default_rng(cfg.seed)
    tubes: list[Tube] = []
    clamped_flags: list[bool] = []
    for i in range(cfg.num_objects):
        vel = None if cfg.velocities is None else cfg.velocities[i % len(cfg.velocities)]
        tube, clamped = _plant_object(cfg, rng, vel)
        tubes.append(tube)
        clamped_flags.append(clamped)

    tracks = []
    displacements = []
    for obj, tube in enumerate(tubes):
        entries = tuple((k, interpolate_tube(tube, k)) for k in range(cfg.length))
        tracks.append(Track("synthetic", obj % 3, entries))
        displacements.append((tube.end.x1 - tube.start.x1, tube.end.y1 - tube.start.y1))

    point_tracks: list[PointTrack] = []
    for tube, (dx, dy) in zip(tubes, displacements):
        s = tube.start
        for _ in range(cfg.tracks_per_object):
            x0 = rng.uniform(s.x1, s.x2)
            y0 = rng.uniform(s.y1, s.y2)
            nx, ny = (rng.normal(0.0, cfg.track_noise, size=2)
                      if cfg.track_noise > 0 else (0.0, 0.0))
            point_tracks.append(PointTrack(x0, y0, x0 + dx + nx, y0 + dy + ny))
    for _ in range(cfg.clutter_tracks):
        x0 = rng.uniform(0.0, cfg.frame_width)
        y0 = rng.uniform(0.0, cfg.frame_height)
        point_tracks.append(PointTrack(x0, y0,
                                       rng.uniform(0.0, cfg.frame_width),
                                       rng.uniform(0.0, cfg.frame_height)))

    seed_boxes = tuple(t.start for t in tubes)

    fh = int(round(cfg.frame_height / cfg.feature_stride))
    fw = int(round(cfg.frame_width / cfg.feature_stride))
    values = np.zeros((cfg.length, cfg.feature_channels, fh, fw), dtype=np.float64)
    ys = (np.arange(fh) + 0.5) * cfg.feature_stride
    xs = (np.arange(fw) + 0.5) * cfg.feature_stride
    for obj, tube in enumerate(tubes):
        ch = obj % cfg.feature_channels
        for k in range(cfg.length):
            cx, cy = interpolate_tube(tube, k).center
            d2 = (ys[:, None] - cy) ** 2 + (xs[None, :] - cx) ** 2
            blob = np.exp(-d2 / (2.0 * cfg.blob_sigma ** 2))
            values[k, ch] = np.maximum(values[k, ch], blob)
    if cfg.feature_noise > 0:
        values += rng.uniform(0.0, cfg.feature_noise, size=values.shape)

    return Scene(cfg, tuple(tracks), tuple(tubes), tuple(displacements),
                 tuple(point_tracks), seed_boxes,
                 FeatureVolume(values, cfg.feature_stride), tuple(clamped_flags))
