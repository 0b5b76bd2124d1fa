import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# canonical feature order, see docs/brisque-format.md
BRISQUE_FEATURE_NAMES: tuple[str, ...] = tuple(
    f"s{scale}_{name}"
    for scale in (1, 2)
    for name in (
        "ggd_alpha",
        "ggd_sigma2",
        *(
            f"{orient}_{param}"
            for orient in ("h", "v", "d1", "d2")
            for param in ("eta", "nu", "sigma_l2", "sigma_r2")
        ),
    )
)
FEATURE_ORDER_TAG = "brisque-36-v1"


class BrisqueFeatures(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(BRISQUE_FEATURE_NAMES),):
            raise ValueError(f"expected {len(BRISQUE_FEATURE_NAMES)} features, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("features must be finite")
        return values

    def as_dict(self) -> dict[str, float]:
        return dict(zip(BRISQUE_FEATURE_NAMES, self.values.tolist()))


class PristineModel(BaseModel):
    """Feature distribution of a clean-image corpus."""

    model_config = ConfigDict(frozen=True)

    mean: list[float]
    covariance: list[list[float]]
    regularization: float = Field(gt=0)
    feature_order: str = FEATURE_ORDER_TAG
    corpus_size: int = Field(ge=1)

    def mean_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=np.float64)

    def covariance_array(self) -> np.ndarray:
        return np.asarray(self.covariance, dtype=np.float64)
