from .state import PipelineState
from .builder import create_compiled_graph, run_pipeline
from .helpers import (
    build_report,
    classify_enabled,
    deblur_enabled,
    load_pipeline_models,
    next_stage,
    stage_plan,
    validate_pipeline_config,
)
from .edges import (
    route_after_classification,
    route_after_deblur_frames,
    route_after_deblur_fused,
    route_after_fusion,
    route_after_ingest,
)
from .nodes import (
    classify_frames,
    deblur_frames,
    deblur_fused,
    fuse_frames,
    load_frames,
    reject_all,
    score_output,
)

__all__ = [
    "PipelineState",
    "create_compiled_graph",
    "run_pipeline",
    "build_report",
    "classify_enabled",
    "deblur_enabled",
    "load_pipeline_models",
    "next_stage",
    "stage_plan",
    "validate_pipeline_config",
    "route_after_ingest",
    "route_after_classification",
    "route_after_deblur_frames",
    "route_after_fusion",
    "route_after_deblur_fused",
    "load_frames",
    "classify_frames",
    "reject_all",
    "deblur_frames",
    "deblur_fused",
    "fuse_frames",
    "score_output",
]
