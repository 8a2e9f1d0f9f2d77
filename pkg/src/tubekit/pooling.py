"""TOI and ROI pooling: exact forward passes and argmax-routed backward passes.

A tube's interpolated box on each frame is mapped to feature cells by
dividing by the stride and rounding the region outward (floor on left/top,
ceil on right/bottom).  The region is split into a P x P grid by
proportional integer boundaries with empty bins widened to one cell, then
spatially max-pooled per channel.  Frames are aggregated by temporal max
(the default) or by averaging the per-frame spatial maxima.

Backward passes route each output-cell gradient to the recorded argmax
element (max mode) or spread grad / T over the per-frame argmaxes (average
mode).  Argmax ties break toward the first element in (t, y, x) scan order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import ceil, floor
from typing import Optional

import numpy as np

from .geometry import Box, GeometryError, Tube, interpolate_tube

POOLED_SIDE_SMALL = 6   # classification head pooled extent
POOLED_SIDE_LARGE = 7   # deeper-backbone pooled extent


class TemporalMode(Enum):
    MAX = "max"
    AVERAGE = "average"


@dataclass(frozen=True)
class FeatureVolume:
    """Dense (T, C, H, W) tensor with a spatial stride tying it to pixels."""

    values: np.ndarray = field(repr=False)
    stride: float = 1.0

    def __post_init__(self):
        if self.values.ndim != 4:
            raise ValueError(f"feature volume must be 4-D, got shape {self.values.shape}")
        if self.stride <= 0:
            raise ValueError("stride must be positive")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.values.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class PooledMap:
    """(C, P, P) pooled values plus the argmax bookkeeping for backward.

    `argmax` holds the winning (t, y, x) per output cell in max mode, None in
    average mode.  `frame_argmax` holds the per-frame spatial argmax (y, x)
    per (t, c, py, px) in both modes.
    """

    values: np.ndarray = field(repr=False)
    mode: TemporalMode
    frame_argmax: np.ndarray = field(repr=False)
    argmax: Optional[np.ndarray] = field(default=None, repr=False)


def _map_extent(lo: float, hi: float, stride: float, n_cells: int) -> tuple[int, int]:
    # Outward rounding into cell units, clamped to a non-empty range in-grid.
    a = floor(lo / stride)
    b = ceil(hi / stride)
    a = min(max(a, 0), n_cells - 1)
    b = max(min(b, n_cells), a + 1)
    return a, b


def _bin_bounds(start: int, end: int, p: int, b: int) -> tuple[int, int]:
    # Proportional split of [start, end) into p bins; bin b never empty.
    w = end - start
    lo = start + floor(b * w / p)
    hi = start + ceil((b + 1) * w / p)
    return lo, max(hi, lo + 1)


def toi_pool_forward(volume: FeatureVolume, tube: Tube, pooled_side: int,
                     mode: TemporalMode = TemporalMode.MAX) -> PooledMap:
    """Pool the tube's space-time region of a feature volume to (C, P, P)."""
    t, c, h, w = volume.shape
    if tube.length != t:
        raise GeometryError(f"tube length {tube.length} != volume T {t}")
    if pooled_side < 1:
        raise ValueError("pooled side must be >= 1")
    if (tube.start.x2 <= 0 and tube.end.x2 <= 0) or (tube.start.x1 >= w * volume.stride and tube.end.x1 >= w * volume.stride) \
            or (tube.start.y2 <= 0 and tube.end.y2 <= 0) or (tube.start.y1 >= h * volume.stride and tube.end.y1 >= h * volume.stride):
        raise GeometryError("tube lies fully outside the feature volume")

    p = pooled_side
    per_frame = np.empty((t, c, p, p), dtype=volume.values.dtype)
    frame_argmax = np.empty((t, c, p, p, 2), dtype=np.int64)
    for k in range(t):
        box = interpolate_tube(tube, k)
        x_lo, x_hi = _map_extent(box.x1, box.x2, volume.stride, w)
        y_lo, y_hi = _map_extent(box.y1, box.y2, volume.stride, h)
        for py in range(p):
            ys, ye = _bin_bounds(y_lo, y_hi, p, py)
            for px in range(p):
                xs, xe = _bin_bounds(x_lo, x_hi, p, px)
                region = volume.values[k, :, ys:ye, xs:xe]
                flat = region.reshape(c, -1)
                idx = flat.argmax(axis=1)
                per_frame[k, :, py, px] = flat[np.arange(c), idx]
                frame_argmax[k, :, py, px, 0] = ys + idx // (xe - xs)
                frame_argmax[k, :, py, px, 1] = xs + idx % (xe - xs)

    if mode is TemporalMode.MAX:
        winner = per_frame.argmax(axis=0)  # (c, p, p)
        values = np.take_along_axis(per_frame, winner[None], axis=0)[0]
        argmax = np.empty((c, p, p, 3), dtype=np.int64)
        argmax[..., 0] = winner
        ci, pyi, pxi = np.meshgrid(np.arange(c), np.arange(p), np.arange(p), indexing="ij")
        argmax[..., 1] = frame_argmax[winner, ci, pyi, pxi, 0]
        argmax[..., 2] = frame_argmax[winner, ci, pyi, pxi, 1]
        return PooledMap(values, mode, frame_argmax, argmax)
    values = per_frame.mean(axis=0)
    return PooledMap(values, mode, frame_argmax)


def toi_pool_backward(grad_out: np.ndarray, pooled: PooledMap,
                      volume_shape: tuple[int, int, int, int]) -> np.ndarray:
    """Gradient of the forward pass with respect to the feature volume."""
    t, c, h, w = volume_shape
    p = pooled.values.shape[-1]
    if grad_out.shape != pooled.values.shape:
        raise ValueError(f"grad shape {grad_out.shape} != pooled shape {pooled.values.shape}")
    grad_in = np.zeros((t, c, h, w), dtype=np.float64)
    if pooled.mode is TemporalMode.MAX:
        assert pooled.argmax is not None
        for ci in range(c):
            for py in range(p):
                for px in range(p):
                    tk, y, x = pooled.argmax[ci, py, px]
                    grad_in[tk, ci, y, x] += grad_out[ci, py, px]
    else:
        for k in range(t):
            for ci in range(c):
                for py in range(p):
                    for px in range(p):
                        y, x = pooled.frame_argmax[k, ci, py, px]
                        grad_in[k, ci, y, x] += grad_out[ci, py, px] / t
    return grad_in


def roi_pool_forward(frame_map: np.ndarray, box: Box, pooled_side: int,
                     stride: float = 1.0) -> PooledMap:
    """Single-frame region pooling: the T=1 specialization of TOI pooling."""
    if frame_map.ndim != 3:
        raise ValueError(f"frame map must be (C, H, W), got shape {frame_map.shape}")
    volume = FeatureVolume(frame_map[None], stride)
    return toi_pool_forward(volume, Tube.static(0, 1, box), pooled_side, TemporalMode.MAX)


def roi_pool_backward(grad_out: np.ndarray, pooled: PooledMap,
                      frame_shape: tuple[int, int, int]) -> np.ndarray:
    """Gradient of :func:`roi_pool_forward` with respect to the frame map."""
    c, h, w = frame_shape
    return toi_pool_backward(grad_out, pooled, (1, c, h, w))[0]
