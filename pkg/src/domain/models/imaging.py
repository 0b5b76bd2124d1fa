from enum import Enum
from typing import Literal, TypeAlias

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.domain.exceptions import MixedShapesError, InvalidImageError

# (height, width, channels) float64 samples in [0, 1]
Image: TypeAlias = NDArray[np.float64]
# (k, k) float64 taps, k odd
Kernel: TypeAlias = NDArray[np.float64]
# (height, width) bool
BinaryMask: TypeAlias = NDArray[np.bool_]


class ZStack(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: list[np.ndarray] = Field(min_length=1)
    z_step: float | None = Field(default=None)
    names: list[str] = Field(default_factory=list)

    @field_validator("frames")
    @classmethod
    def _check_frames(cls, frames: list[np.ndarray]) -> list[np.ndarray]:
        for frame in frames:
            if frame.ndim != 3 or frame.shape[2] not in (1, 3):
                raise InvalidImageError(f"frame shape {frame.shape} is not HxWx1 or HxWx3")
        return frames

    @model_validator(mode="after")
    def _check_uniform_shape(self) -> "ZStack":
        expected = self.frames[0].shape
        for idx, frame in enumerate(self.frames):
            if frame.shape != expected:
                name = self.names[idx] if idx < len(self.names) else f"frame {idx}"
                raise MixedShapesError(name, expected, frame.shape)
        return self

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.frames[0].shape

    def select(self, indices: list[int]) -> "ZStack":
        return ZStack(
            frames=[self.frames[i] for i in indices],
            z_step=self.z_step,
            names=[self.names[i] for i in indices] if self.names else [],
        )


class FocusIndexMap(BaseModel):
    """Per-pixel index of the sharpest frame."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    index: np.ndarray
    n_frames: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "FocusIndexMap":
        if self.index.ndim != 2:
            raise InvalidImageError(f"index map must be 2-D, got {self.index.shape}")
        if self.index.size and (self.index.min() < 0 or self.index.max() >= self.n_frames):
            raise InvalidImageError(
                f"index map values must lie in [0, {self.n_frames}), "
                f"got [{self.index.min()}, {self.index.max()}]"
            )
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.index.shape

    def masks(self) -> list[BinaryMask]:
        return [self.index == i for i in range(self.n_frames)]


class WaveletPyramid(BaseModel):
    """Multi-level 2-D wavelet decomposition, coarsest level first."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    approximation: np.ndarray
    # one (LH, HL, HH) triple per level, coarsest first
    details: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    original_shape: tuple[int, int]
    wavelet: Literal["haar"] = "haar"

    @property
    def levels(self) -> int:
        return len(self.details)


class FocusOperator(str, Enum):
    LAPLACIAN_VARIANCE = "laplacian_variance"
    TENENGRAD = "tenengrad"
    VOLLATH_F4 = "vollath_f4"


class FocusDecision(str, Enum):
    IN_FOCUS = "in_focus"
    OUT_OF_FOCUS = "out_of_focus"


class FocusScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    operator: FocusOperator
    value: float

    @model_validator(mode="after")
    def _check_sign(self) -> "FocusScore":
        if self.operator != FocusOperator.VOLLATH_F4 and self.value < 0:
            raise ValueError(f"{self.operator.value} scores are non-negative, got {self.value}")
        return self
