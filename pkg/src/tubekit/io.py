"""File formats: line-delimited JSON records and the FVOL binary container.

Text artifacts are JSON-lines files whose first line is a schema header
``{"schema": "tubekit/<kind>/v1"}``; readers reject version mismatches and
report parse errors with the offending line number.  Feature volumes use a
small binary container (magic ``FVOL``) because dense tensors are
impractical as text.  All writers are atomic (write to a temp file in the
same directory, then rename).
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .evaluation import Detection, GroundTruthBox, MetricReport
from .geometry import Box, Track, Tube
from .motion import PointTrack
from .pooling import FeatureVolume
from .sampling import Batch, BatchItem
from .suppression import ScoredBox, ScoredTube

SCHEMA_VERSION = "v1"
FVOL_MAGIC = b"FVOL"
FVOL_VERSION = 1


class FormatError(ValueError):
    """Malformed or mismatched file content."""


def _schema(kind: str) -> str:
    return f"tubekit/{kind}/{SCHEMA_VERSION}"


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(path: str | Path, kind: str, records: Iterable[dict[str, Any]]) -> None:
    lines = [json.dumps({"schema": _schema(kind)})]
    lines.extend(json.dumps(r) for r in records)
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_records(path: str | Path, kind: str) -> Iterator[dict[str, Any]]:
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}:{lineno}: malformed record: {e}") from e
            if lineno == 1:
                if rec.get("schema") != _schema(kind):
                    raise FormatError(
                        f"{path}:1: schema mismatch: expected {_schema(kind)}, "
                        f"got {rec.get('schema')!r}")
                continue
            yield rec


# ---------------------------------------------------------------------------
# record codecs

def _box_to_list(b: Box) -> list[float]:
    return [b.x1, b.y1, b.x2, b.y2]


def _box_from_list(v: Sequence[float]) -> Box:
    return Box(*v)


def write_tracks(path, tracks: Iterable[Track]) -> None:
    write_records(path, "tracks", (
        {"video": t.video_id, "class_id": t.class_id,
         "t0": t.entries[0][0] if t.entries else 0,
         "boxes": [_box_to_list(b) for _, b in t.entries]}
        for t in tracks))


def read_tracks(path) -> list[Track]:
    out = []
    for r in read_records(path, "tracks"):
        entries = tuple((r["t0"] + i, _box_from_list(b)) for i, b in enumerate(r["boxes"]))
        out.append(Track(r["video"], r["class_id"], entries))
    return out


def _tube_record(t: Tube, score: Optional[float] = None,
                 class_id: Optional[int] = None) -> dict[str, Any]:
    rec: dict[str, Any] = {"t0": t.t0, "length": t.length,
                           "start": _box_to_list(t.start), "end": _box_to_list(t.end)}
    if score is not None:
        rec["score"] = score
    if class_id is not None:
        rec["class_id"] = class_id
    return rec


def write_tubes(path, tubes: Iterable[Tube]) -> None:
    write_records(path, "tubes", (_tube_record(t) for t in tubes))


def write_scored_tubes(path, tubes: Iterable[ScoredTube]) -> None:
    write_records(path, "tubes",
                  (_tube_record(s.tube, s.score, s.class_id) for s in tubes))


def _tube_from_record(r: dict[str, Any]) -> Tube:
    return Tube(r["t0"], r["length"], _box_from_list(r["start"]), _box_from_list(r["end"]))


def read_tubes(path) -> list[Tube]:
    return [_tube_from_record(r) for r in read_records(path, "tubes")]


def read_scored_tubes(path, default_score: float = 0.0) -> list[ScoredTube]:
    return [ScoredTube(_tube_from_record(r), r.get("score", default_score), r.get("class_id"))
            for r in read_records(path, "tubes")]


def write_point_tracks(path, tracks: Iterable[PointTrack]) -> None:
    write_records(path, "point_tracks",
                  ({"x0": t.x0, "y0": t.y0, "x1": t.x1, "y1": t.y1} for t in tracks))


def read_point_tracks(path) -> list[PointTrack]:
    return [PointTrack(r["x0"], r["y0"], r["x1"], r["y1"])
            for r in read_records(path, "point_tracks")]


def write_seed_boxes(path, boxes: Iterable[Box]) -> None:
    write_records(path, "seed_boxes", ({"box": _box_to_list(b)} for b in boxes))


def read_seed_boxes(path) -> list[Box]:
    return [_box_from_list(r["box"]) for r in read_records(path, "seed_boxes")]


def write_detections(path, dets: Iterable[Detection]) -> None:
    write_records(path, "detections", (
        {"frame": d.frame, "score": d.score, "class_id": d.class_id,
         "box": _box_to_list(d.box)} for d in dets))


def read_detections(path) -> list[Detection]:
    return [ScoredBox(_box_from_list(r["box"]), r["frame"], r["score"], r.get("class_id"))
            for r in read_records(path, "detections")]


def write_gt_boxes(path, boxes: Iterable[GroundTruthBox]) -> None:
    write_records(path, "gt_boxes", (
        {"frame": g.frame, "class_id": g.class_id, "box": _box_to_list(g.box)}
        for g in boxes))


def read_gt_boxes(path) -> list[GroundTruthBox]:
    return [GroundTruthBox(r["frame"], r["class_id"], _box_from_list(r["box"]))
            for r in read_records(path, "gt_boxes")]


def write_batch(path, batch: Batch) -> None:
    records: list[dict[str, Any]] = [{"underfilled": batch.underfilled, "size": len(batch.items)}]
    records.extend({"chunk": i.chunk_id, "item": i.item_id, "role": i.role}
                   for i in batch.items)
    write_records(path, "batch", records)


def read_batch(path) -> Batch:
    recs = list(read_records(path, "batch"))
    head, rest = recs[0], recs[1:]
    return Batch(tuple(BatchItem(r["chunk"], r["item"], r["role"]) for r in rest),
                 underfilled=head["underfilled"])


def write_reports(path, reports: Iterable[MetricReport]) -> None:
    write_records(path, "reports", (
        {"metric": r.metric, "value": r.value, "params": r.params,
         "per_class": {str(k): v for k, v in r.per_class.items()}}
        for r in reports))


def read_reports(path) -> list[MetricReport]:
    return [MetricReport(r["metric"], r["value"], r["params"],
                         {int(k): v for k, v in r["per_class"].items()})
            for r in read_records(path, "reports")]


# ---------------------------------------------------------------------------
# FVOL binary container

def write_feature_volume(path, volume: FeatureVolume) -> None:
    t, c, h, w = volume.shape
    header = FVOL_MAGIC + struct.pack("<IIIIIf", FVOL_VERSION, t, c, h, w, volume.stride)
    body = np.ascontiguousarray(volume.values, dtype=np.float32).tobytes()
    atomic_write_bytes(path, header + body)


def read_feature_volume(path) -> FeatureVolume:
    data = Path(path).read_bytes()
    if data[:4] != FVOL_MAGIC:
        raise FormatError(f"{path}: not an FVOL file")
    version, t, c, h, w, stride = struct.unpack("<IIIIIf", data[4:28])
    if version != FVOL_VERSION:
        raise FormatError(f"{path}: unsupported FVOL version {version}")
    n = t * c * h * w
    values = np.frombuffer(data[28:], dtype="<f4", count=n).reshape(t, c, h, w)
    return FeatureVolume(values.astype(np.float32), float(stride))
