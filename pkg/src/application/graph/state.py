import operator
try:
    from typing import Annotated, NotRequired, TypedDict
except ImportError:  # Python < 3.11
    from typing import Annotated

    from typing_extensions import NotRequired, TypedDict

from src.domain.models import (
    FocusIndexMap,
    FrameRecord,
    Image,
    PipelineConfig,
    QualityScores,
    RestorationMetrics,
    ZStack,
)


class PipelineState(TypedDict):
    config: PipelineConfig
    stack: NotRequired[ZStack]
    frames: NotRequired[list[FrameRecord]]
    survivors: NotRequired[list[int]]
    # survivor frames as they move through the stages (deblurred once restoration ran)
    working: NotRequired[ZStack]
    deblur: NotRequired[RestorationMetrics | None]
    fused: NotRequired[Image]
    focus_map: NotRequired[FocusIndexMap | None]
    fusion_output: NotRequired[str]
    quality: NotRequired[QualityScores]
    timings: Annotated[dict[str, float], operator.or_]
    exit_code: NotRequired[int]
