from src.application.graph.state import PipelineState
from src.application.graph.helpers import next_stage


def route_after_ingest(state: PipelineState) -> str:
    return next_stage(state["config"], "ingest")


def route_after_classification(state: PipelineState) -> str:
    if not state.get("survivors"):
        return "reject_all"
    return next_stage(state["config"], "classify")


def route_after_deblur_frames(state: PipelineState) -> str:
    return next_stage(state["config"], "deblur_frames")


def route_after_fusion(state: PipelineState) -> str:
    return next_stage(state["config"], "fuse")


def route_after_deblur_fused(state: PipelineState) -> str:
    return next_stage(state["config"], "deblur_fused")
