"""tubekit: linear space-time tube toolkit for video object detection.

Boxes and tubes, overlap measures, greedy NMS, TOI/ROI pooling with exact
gradients, tube-anchor grids with regression coding, tracking-based tube
proposals, training-batch sampling with hard-negative mining, and
recall/AP/CorLoc evaluation.
"""

from .geometry import (Box, Chunk, FullyOutsideError, GeometryError, Track, Tube,
                       clip_box, clip_tube, fit_linear_tube, interpolate_tube, iou,
                       tube_overlap)
from .suppression import ScoredBox, ScoredTube, nms_boxes, nms_tubes
from .anchors import (AnchorConfig, AnchorGrid, AnchorLabel, ProposalLabel,
                      RegressionParams, assign_anchor_labels, assign_proposal_labels,
                      decode_regression, encode_regression, generate_anchor_grid,
                      propose_from_maps, smooth_l1)
from .pooling import (FeatureVolume, PooledMap, TemporalMode, roi_pool_backward,
                      roi_pool_forward, toi_pool_backward, toi_pool_forward)
from .motion import MotionConfig, PointTrack, tube_proposals_from_tracks
from .sampling import (Batch, BatchConfig, BatchItem, ChunkPool, compose_hard_batch,
                       mine_hard_negatives, sample_batch)
from .evaluation import (Detection, GroundTruthBox, MetricReport, average_precision,
                         box_recall, corloc, tube_recall, tubes_to_detections)
from .synthdata import Scene, SceneConfig, generate_scene
from .config import RunConfig, load_config, save_config

__version__ = "0.1.0"
