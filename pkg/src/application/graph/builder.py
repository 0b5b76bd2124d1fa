import logging

from langgraph.graph import END, START, StateGraph

from src.domain.models import Image, PipelineConfig, PipelineReport, PristineModel
from src.application.graph.state import PipelineState
from src.application.graph.edges import (
    route_after_classification,
    route_after_deblur_fused,
    route_after_deblur_frames,
    route_after_fusion,
    route_after_ingest,
)
from src.application.graph.helpers import (
    END_ROUTE,
    build_report,
    load_pipeline_models,
    validate_pipeline_config,
)
from src.application.graph.nodes import (
    classify_frames,
    deblur_frames,
    deblur_fused,
    fuse_frames,
    load_frames,
    reject_all,
    score_output,
)
from src.application.tinynn import Network

logger = logging.getLogger(__name__)

# region GRAPH

_STAGES = ["classify", "deblur_frames", "fuse", "deblur_fused", "score"]


def _routes(*names: str) -> dict[str, str]:
    routes = {name: name for name in names}
    routes[END_ROUTE] = END
    return routes


def create_compiled_graph(
    classifier: Network | None = None,
    deblurrer: Network | None = None,
    pristine: PristineModel | None = None,
    reference: Image | None = None,
):
    graph = StateGraph(PipelineState)

    graph.add_node("ingest", load_frames)
    graph.add_node("classify", classify_frames(classifier=classifier))
    graph.add_node("reject_all", reject_all)
    graph.add_node("deblur_frames", deblur_frames(deblurrer=deblurrer, reference=reference))
    graph.add_node("fuse", fuse_frames)
    graph.add_node("deblur_fused", deblur_fused(deblurrer=deblurrer, reference=reference))
    graph.add_node("score", score_output(pristine=pristine, reference=reference))

    graph.add_edge(START, "ingest")
    graph.add_conditional_edges("ingest", route_after_ingest, _routes(*_STAGES))
    graph.add_conditional_edges(
        "classify", route_after_classification, _routes("reject_all", *_STAGES[1:])
    )
    graph.add_edge("reject_all", END)
    graph.add_conditional_edges("deblur_frames", route_after_deblur_frames, _routes("fuse", "score"))
    graph.add_conditional_edges("fuse", route_after_fusion, _routes("deblur_fused", "score"))
    graph.add_conditional_edges("deblur_fused", route_after_deblur_fused, _routes("score"))
    graph.add_edge("score", END)

    return graph.compile()


# region RUNNER


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    """Validate, load models, run every enabled stage and return the report.

    An all-rejected stack ends early with exit code 3 in the report.
    """
    validate_pipeline_config(config)
    classifier, deblurrer, pristine, reference = load_pipeline_models(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    compiled_graph = create_compiled_graph(classifier, deblurrer, pristine, reference)
    initial_state: PipelineState = {"config": config, "timings": {}}
    final_state = compiled_graph.invoke(initial_state)

    report = build_report(final_state)
    logger.info(f"pipeline finished with exit code {report.exit_code}, {len(report.survivors)} survivor(s)")
    return report
