from .ingest import load_frames
from .classification import classify_frames_cls as classify_frames, reject_all
from .restoration import deblur_frames_cls as deblur_frames, deblur_fused_cls as deblur_fused
from .fusion import fuse_frames
from .scoring import score_output_cls as score_output

__all__ = [
    "load_frames",
    "classify_frames",
    "reject_all",
    "deblur_frames",
    "deblur_fused",
    "fuse_frames",
    "score_output",
]
