import time
from pathlib import Path

import numpy as np

from src.domain.exceptions import ConfigValidationError, MissingModelError
from src.domain.models import Image, PipelineConfig, PipelineReport, PristineModel, QualityScores
from src.infrastructure.config import TOOL_VERSION
from src.infrastructure.extensions.loaders import read_image
from src.application.services.quality import load_pristine
from src.application.tinynn import Network, load_model

END_ROUTE = "end"
FUSED_FILENAME = "fused.png"
FOCUS_INDEX_FILENAME = "focus_index.png"


def classify_enabled(config: PipelineConfig) -> bool:
    return not config.skip_classify and config.classifier_model is not None


def deblur_enabled(config: PipelineConfig) -> bool:
    return not config.skip_deblur and config.deblur_model is not None


def stage_plan(config: PipelineConfig) -> list[str]:
    """Stages in execution order after ingestion."""
    fuse = not config.skip_fuse
    deblur_late = deblur_enabled(config) and config.deblur_after_fusion and fuse

    stages = []
    if classify_enabled(config):
        stages.append("classify")
    if deblur_enabled(config) and not deblur_late:
        stages.append("deblur_frames")
    if fuse:
        stages.append("fuse")
    if deblur_late:
        stages.append("deblur_fused")
    if not config.skip_score:
        stages.append("score")
    return stages


def next_stage(config: PipelineConfig, after: str) -> str:
    plan = ["ingest", *stage_plan(config)]
    position = plan.index(after)
    return plan[position + 1] if position + 1 < len(plan) else END_ROUTE


def validate_pipeline_config(config: PipelineConfig) -> None:
    if not config.stack.is_dir():
        raise ConfigValidationError("pipeline", ["stack"], f"'{config.stack}' is not a directory")
    for path in (config.classifier_model, config.deblur_model, config.pristine_model):
        if path is not None and not path.is_file():
            raise MissingModelError(str(path))
    if config.reference is not None and not config.reference.is_file():
        raise ConfigValidationError("pipeline", ["reference"], f"'{config.reference}' does not exist")


def load_pipeline_models(
    config: PipelineConfig,
) -> tuple[Network | None, Network | None, PristineModel | None, Image | None]:
    classifier = load_model(config.classifier_model) if classify_enabled(config) else None
    deblurrer = load_model(config.deblur_model) if deblur_enabled(config) else None
    pristine = load_pristine(config.pristine_model) if config.pristine_model and not config.skip_score else None
    reference = read_image(config.reference) if config.reference else None
    return classifier, deblurrer, pristine, reference


def elapsed(start: float) -> float:
    return round(time.perf_counter() - start, 6)


def matches_reference(img: Image, reference: Image | None) -> bool:
    return reference is not None and np.shape(img) == np.shape(reference)


def build_report(state: dict) -> PipelineReport:
    config: PipelineConfig = state["config"]
    return PipelineReport(
        tool_version=TOOL_VERSION,
        seed=config.seed,
        config=config.model_dump(mode="json"),
        exit_code=state.get("exit_code", 0),
        frames=state.get("frames", []),
        survivors=state.get("survivors", []),
        deblur=state.get("deblur"),
        fusion_output=state.get("fusion_output"),
        quality=state.get("quality") or QualityScores(),
        timings=state.get("timings", {}),
    )


def output_path(config: PipelineConfig, filename: str) -> Path:
    return config.output_dir / filename
