"""Boxes, linear space-time tubes, tracks and the overlap measures built on them.

Coordinate convention: continuous (x1, y1, x2, y2) with right/bottom exclusive.
A box with zero extent in either dimension is invalid everywhere in this
package; that removes the classic +/-1 pixel ambiguity from IoU values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class GeometryError(ValueError):
    """Invalid box, tube or track input."""


class FullyOutsideError(GeometryError):
    """Clipping collapsed a tube to zero extent: it lies outside the frame."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in continuous pixel coordinates on one frame."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        if not (self.x2 > self.x1 and self.y2 > self.y1):
            raise GeometryError(f"degenerate box: {self!r}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))

    def translated(self, dx: float, dy: float) -> "Box":
        return Box(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x1 <= x < self.x2 and self.y1 <= y < self.y2


@dataclass(frozen=True)
class Tube:
    """Linear space-time box pair over a chunk of ``length`` frames.

    Intermediate boxes follow by per-coordinate linear interpolation between
    ``start`` and ``end``.  With length 1 both boxes denote the same frame.
    """

    t0: int
    length: int
    start: Box
    end: Box

    def __post_init__(self):
        if self.length < 1:
            raise GeometryError(f"tube length must be >= 1, got {self.length}")

    @staticmethod
    def static(t0: int, length: int, box: Box) -> "Tube":
        return Tube(t0, length, box, box)


@dataclass(frozen=True)
class Track:
    """Per-frame ground-truth box sequence with a class label.

    Frame indices are strictly increasing and contiguous.
    """

    video_id: str
    class_id: int
    entries: tuple[tuple[int, Box], ...]

    def __post_init__(self):
        frames = [f for f, _ in self.entries]
        for a, b in zip(frames, frames[1:]):
            if b != a + 1:
                raise GeometryError("track frames must be contiguous and increasing")

    def boxes_in(self, t0: int, length: int) -> list[tuple[int, Box]]:
        """Entries whose frame falls inside [t0, t0 + length)."""
        return [(f, b) for f, b in self.entries if t0 <= f < t0 + length]


@dataclass(frozen=True)
class Chunk:
    """A window of consecutive frames from one video."""

    video_id: str
    t0: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise GeometryError("chunk length must be >= 1")


def iou(a: Box, b: Box) -> float:
    """Spatial intersection-over-union of two boxes, in [0, 1]."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def tube_overlap(a: Tube, b: Tube) -> float:
    """Tube similarity: the minimum of the start-box and end-box IoUs.

    Tubes are compared end-to-end; the caller is responsible for aligning
    chunks before comparing.
    """
    return min(iou(a.start, b.start), iou(a.end, b.end))


def interpolate_tube(t: Tube, k: int) -> Box:
    """Box at frame offset ``k`` in [0, length - 1] under uniform linear motion."""
    if not 0 <= k <= t.length - 1:
        raise GeometryError(f"frame offset {k} outside [0, {t.length - 1}]")
    if t.length == 1:
        return t.start
    f = k / (t.length - 1)
    s, e = t.start, t.end
    return Box(
        s.x1 + f * (e.x1 - s.x1),
        s.y1 + f * (e.y1 - s.y1),
        s.x2 + f * (e.x2 - s.x2),
        s.y2 + f * (e.y2 - s.y2),
    )


def _ols_endpoints(offsets: Sequence[float], values: Sequence[float], last: float) -> tuple[float, float]:
    # Ordinary least-squares line through (offset, value), evaluated at 0 and `last`.
    n = len(offsets)
    if n == 1:
        return values[0], values[0]
    mx = sum(offsets) / n
    my = sum(values) / n
    sxx = sum((x - mx) ** 2 for x in offsets)
    if sxx == 0.0:
        return my, my
    slope = sum((x - mx) * (y - my) for x, y in zip(offsets, values)) / sxx
    intercept = my - slope * mx
    return intercept, intercept + slope * last


def fit_linear_tube(entries: Iterable[tuple[int, Box]], chunk: Chunk) -> Tube:
    """Least-squares linear tube through a track's boxes inside a chunk.

    Each of the four box coordinates is fitted independently over frame
    offsets, then evaluated at offsets 0 and length - 1.  A single entry
    yields a static tube.
    """
    inside = [(f - chunk.t0, b) for f, b in entries if 0 <= f - chunk.t0 < chunk.length]
    if not inside:
        raise GeometryError("no track entries inside the chunk")
    offsets = [float(k) for k, _ in inside]
    last = float(chunk.length - 1)
    coords = []
    for attr in ("x1", "y1", "x2", "y2"):
        vals = [getattr(b, attr) for _, b in inside]
        coords.append(_ols_endpoints(offsets, vals, last))
    start = Box(coords[0][0], coords[1][0], coords[2][0], coords[3][0])
    end = Box(coords[0][1], coords[1][1], coords[2][1], coords[3][1])
    return Tube(chunk.t0, chunk.length, start, end)


def chunk_coverage(entries: Iterable[tuple[int, Box]], chunk: Chunk) -> float:
    """Fraction of the chunk's frames carrying a track annotation."""
    n = sum(1 for f, _ in entries if 0 <= f - chunk.t0 < chunk.length)
    return n / chunk.length


def clip_box(b: Box, width: float, height: float) -> Box:
    """Clamp a box to [0, width] x [0, height]; degenerate result raises."""
    if width <= 0 or height <= 0:
        raise GeometryError("frame dimensions must be positive")
    x1 = min(max(b.x1, 0.0), width)
    x2 = min(max(b.x2, 0.0), width)
    y1 = min(max(b.y1, 0.0), height)
    y2 = min(max(b.y2, 0.0), height)
    if x2 <= x1 or y2 <= y1:
        raise FullyOutsideError(f"box {b!r} lies outside the {width}x{height} frame")
    return Box(x1, y1, x2, y2)


def clip_tube(t: Tube, width: float, height: float) -> Tube:
    """Clamp both end boxes of a tube to the frame; fully-outside tubes raise."""
    return Tube(t.t0, t.length, clip_box(t.start, width, height), clip_box(t.end, width, height))
