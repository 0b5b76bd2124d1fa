import math
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, Field, PlainSerializer

from src.domain.models.imaging import FocusDecision


def _parse_inf(value: Any) -> Any:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return value


def _dump_inf(value: float) -> float | str:
    return "inf" if math.isinf(value) and value > 0 else value


# PSNR of identical images is +inf, written as the string "inf"
Decibels = Annotated[
    float,
    BeforeValidator(_parse_inf),
    PlainSerializer(_dump_inf, return_type=float | str),
]


class FrameRecord(BaseModel):
    index: int
    decision: FocusDecision
    mean_level: float
    min_level: float
    crop_levels: list[float]


class AccuracyReport(BaseModel):
    accuracy: float
    lower: float
    upper: float
    n_samples: int
    n_correct: int


class RestorationMetrics(BaseModel):
    psnr_before: Decibels
    psnr_after: Decibels
    ssim_before: float
    ssim_after: float


class QualityScores(BaseModel):
    tenengrad: float | None = None
    brisque: float | None = None
    psnr: Decibels | None = None
    ssim: float | None = None


class PipelineReport(BaseModel):
    tool_version: str
    seed: int
    config: dict[str, Any]
    exit_code: int = 0
    frames: list[FrameRecord] = Field(default_factory=list)
    survivors: list[int] = Field(default_factory=list)
    deblur: RestorationMetrics | None = None
    fusion_output: str | None = None
    quality: QualityScores = Field(default_factory=QualityScores)
    timings: dict[str, float] = Field(default_factory=dict)
