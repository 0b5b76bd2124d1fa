from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.domain.models.datasets import BlurFamily, BlurRecipe


class ClassifierConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_levels: int = Field(default=10, ge=2)
    epochs: int = Field(default=100, ge=1)
    lr: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=8, ge=1)
    loss: Literal["cross_entropy", "rps"] = "cross_entropy"
    seed: int = 0
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    crop_size: int = Field(default=84, ge=4)

    @property
    def default_level_threshold(self) -> float:
        return (self.n_levels - 1) / 4


class DeblurConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    patch_size: int = Field(default=64, ge=32)
    epochs: int = Field(default=100, ge=1)
    lr: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=4, ge=1)
    seed: int = 0
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    patches_per_pair: int = Field(default=1, ge=1)


class TrainClassifierSettings(ClassifierConfig):
    """Contents of a `train-classifier` TOML file."""

    epochs: int = Field(ge=1)
    source: Literal["synthetic", "zstack"] = "synthetic"
    # directory of sharp images (synthetic) or a stack (zstack); generated specimens when unset
    input: Path | None = None
    n_images: int = Field(default=4, ge=1)
    image_size: int = Field(default=256, ge=96)
    blur_family: BlurFamily = "gaussian"
    crops_per_level: int = Field(default=200, ge=1)
    level_step: float = Field(default=0.8, gt=0)
    sharpest_index: int | None = Field(default=None, ge=0)
    step_frames: int = Field(default=1, ge=1)
    mask_threshold: float = Field(default=0.05, ge=0, le=1)
    output: Path = Path("classifier.mstk")


class TrainDeblurSettings(DeblurConfig):
    """Contents of a `train-deblur` TOML file."""

    epochs: int = Field(ge=1)
    input: Path | None = None
    n_images: int = Field(default=4, ge=1)
    image_size: int = Field(default=128, ge=32)
    pair_count: int = Field(default=20, ge=1)
    recipe: BlurRecipe = Field(default_factory=BlurRecipe)
    output: Path = Path("deblur.mstk")


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    stack: Path
    output_dir: Path = Path("microstack-out")
    classifier_model: Path | None = None
    deblur_model: Path | None = None
    pristine_model: Path | None = None
    reference: Path | None = None
    level_threshold: float | None = Field(default=None, ge=0)
    n_crops: int = Field(default=8, ge=1)
    mask_threshold: float = Field(default=0.05, ge=0, le=1)
    fusion_method: Literal["masks", "wavelet"] = "masks"
    feather: float = Field(default=2.0, ge=0)
    wavelet_levels: int = Field(default=4, ge=1)
    tile: int = Field(default=256, ge=32)
    overlap: int = Field(default=16, ge=0)
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    skip_classify: bool = False
    skip_deblur: bool = False
    skip_fuse: bool = False
    skip_score: bool = False
    deblur_after_fusion: bool = False
