"""Run configuration with the published training-recipe constants as defaults.

Every default here matches the reference training setup: chunk length 10,
proposal label thresholds {0.5 positive, [0.1, 0.5) negative}, anchor label
thresholds {0.5, 0.3}, batches of 4x64 (<= 25% positives) and 4x128
(<= 50% positives), hard batches capped at 25% positives / 50% hard
negatives, pooled sides 6 and 7, and six anchor scales with aspect-ratio
sets {1:1} and {1:4, 1:2, 1:1, 2:1, 4:1}.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .anchors import AnchorConfig, DIVERSE_ASPECT_RATIOS
from .motion import MotionConfig
from .sampling import BatchConfig

CONFIG_ENV_VAR = "TUBEKIT_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    tube_length: int = 10
    proposal_positive_threshold: float = 0.5
    proposal_negative_low: float = 0.1
    anchor_positive_threshold: float = 0.5
    anchor_negative_threshold: float = 0.3
    proposal_nms_threshold: float = 0.7
    detection_nms_threshold: float = 0.3
    recall_threshold: float = 0.5
    ap_iou_threshold: float = 0.5
    pooled_side: int = 6
    pooled_side_deep: int = 7
    anchor: AnchorConfig = field(default_factory=AnchorConfig)
    anchor_diverse: AnchorConfig = field(
        default_factory=lambda: AnchorConfig(aspect_ratios=DIVERSE_ASPECT_RATIOS))
    batch: BatchConfig = field(default_factory=lambda: BatchConfig(4, 64, 0.25, 0.5))
    anchor_batch: BatchConfig = field(default_factory=lambda: BatchConfig(4, 128, 0.5))
    motion: MotionConfig = field(default_factory=MotionConfig)
    seed: int = 0

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _build(cls, data: dict[str, Any]):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ValueError(f"unknown config field: {key}")
        ftype = fields[key].type
        if isinstance(value, dict):
            sub = {"anchor": AnchorConfig, "anchor_diverse": AnchorConfig,
                   "batch": BatchConfig, "anchor_batch": BatchConfig,
                   "motion": MotionConfig}[key]
            kwargs[key] = _build(sub, value)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def load_config(path: Optional[str] = None) -> RunConfig:
    """Load a JSON run config; fall back to the env var, then to defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return RunConfig()
    data = json.loads(Path(path).read_text())
    return _build(RunConfig, data)


def save_config(config: RunConfig, path: str) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")
