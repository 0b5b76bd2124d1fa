from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

LayerKind = Literal["conv2d", "relu", "maxpool2", "dense", "nearest_upsample2", "flatten"]


class LayerSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: LayerKind
    in_channels: int | None = Field(default=None, ge=1)
    out_channels: int | None = Field(default=None, ge=1)
    kernel_size: int | None = Field(default=None, ge=1)
    in_features: int | None = Field(default=None, ge=1)
    out_features: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_parameters(self) -> "LayerSpec":
        if self.kind == "conv2d":
            if None in (self.in_channels, self.out_channels, self.kernel_size):
                raise ValueError("conv2d needs in_channels, out_channels and kernel_size")
            if self.kernel_size % 2 == 0:
                raise ValueError(f"conv2d kernel_size must be odd, got {self.kernel_size}")
        if self.kind == "dense" and None in (self.in_features, self.out_features):
            raise ValueError("dense needs in_features and out_features")
        return self

    @property
    def is_parametric(self) -> bool:
        return self.kind in ("conv2d", "dense")

    def parameter_count(self) -> int:
        if self.kind == "conv2d":
            return self.out_channels * self.in_channels * self.kernel_size**2 + self.out_channels
        if self.kind == "dense":
            return self.out_features * self.in_features + self.out_features
        return 0


def conv2d(in_channels: int, out_channels: int, kernel_size: int) -> LayerSpec:
    return LayerSpec(
        kind="conv2d",
        in_channels=in_channels,
        out_channels=out_channels,
        kernel_size=kernel_size,
    )


def dense(in_features: int, out_features: int) -> LayerSpec:
    return LayerSpec(kind="dense", in_features=in_features, out_features=out_features)


def relu() -> LayerSpec:
    return LayerSpec(kind="relu")


def maxpool2() -> LayerSpec:
    return LayerSpec(kind="maxpool2")


def flatten() -> LayerSpec:
    return LayerSpec(kind="flatten")


def nearest_upsample2() -> LayerSpec:
    return LayerSpec(kind="nearest_upsample2")


class TensorEntry(BaseModel):
    name: str
    shape: list[int]


class ModelManifest(BaseModel):
    """JSON header of a model file; the weight blob follows in `tensors` order."""

    format_version: int
    seed: int
    layers: list[LayerSpec]
    tensors: list[TensorEntry]
    metadata: dict[str, Any] = Field(default_factory=dict)
