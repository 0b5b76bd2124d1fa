from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

BlurFamily = Literal["gaussian", "disk", "airy"]


class DefocusDataset(BaseModel):
    """Level-labelled crops; level 0 is the sharpest."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    # (n, crop, crop, channels)
    crops: np.ndarray
    levels: np.ndarray
    n_levels: int = Field(ge=1)
    provenance: Literal["real_zstack", "synthetic_psf"]
    seed: int

    @model_validator(mode="after")
    def _check_consistency(self) -> "DefocusDataset":
        if self.crops.ndim != 4 or self.crops.shape[1] != self.crops.shape[2]:
            raise ValueError(f"crops must be (n, s, s, c), got {self.crops.shape}")
        if len(self.levels) != len(self.crops):
            raise ValueError("one level per crop is required")
        if len(self.levels) and (self.levels.min() < 0 or self.levels.max() >= self.n_levels):
            raise ValueError(f"levels must lie in [0, {self.n_levels})")
        return self

    def __len__(self) -> int:
        return len(self.crops)

    def class_counts(self) -> list[int]:
        return np.bincount(self.levels, minlength=self.n_levels).tolist()


class BlurRecipe(BaseModel):
    """How blurred frames are synthesized from sharp ones."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["mixed", "motion", "gaussian", "disk"] = "mixed"
    motion_length: tuple[int, int] = (3, 9)
    gaussian_sigma: tuple[float, float] = (0.5, 2.0)
    disk_radius: tuple[float, float] = (1.0, 3.0)
    # share of motion kernels in the mixed family
    motion_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=0.01, ge=0.0)

    @model_validator(mode="after")
    def _check_ranges(self) -> "BlurRecipe":
        for name in ("motion_length", "gaussian_sigma", "disk_radius"):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} range is reversed: {low} > {high}")
        if self.motion_length[0] < 1:
            raise ValueError("motion_length must be >= 1")
        if self.gaussian_sigma[0] <= 0:
            raise ValueError("gaussian_sigma must be > 0")
        if self.disk_radius[0] < 0:
            raise ValueError("disk_radius must be >= 0")
        return self


class BlurPairSet(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    blurred: list[np.ndarray]
    sharp: list[np.ndarray]
    recipe: BlurRecipe
    seed: int

    @model_validator(mode="after")
    def _check_pairs(self) -> "BlurPairSet":
        if len(self.blurred) != len(self.sharp):
            raise ValueError("blurred and sharp lists differ in length")
        for idx, (b, s) in enumerate(zip(self.blurred, self.sharp)):
            if b.shape != s.shape:
                raise ValueError(f"pair {idx} has shapes {b.shape} vs {s.shape}")
        return self

    def __len__(self) -> int:
        return len(self.sharp)
