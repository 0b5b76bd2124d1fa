from src.domain.models.imaging import (
    Image,
    Kernel,
    BinaryMask,
    ZStack,
    FocusIndexMap,
    WaveletPyramid,
    FocusOperator,
    FocusDecision,
    FocusScore,
)
from src.domain.models.network import (
    LayerKind,
    LayerSpec,
    TensorEntry,
    ModelManifest,
    conv2d,
    dense,
    relu,
    maxpool2,
    flatten,
    nearest_upsample2,
)
from src.domain.models.datasets import (
    BlurFamily,
    DefocusDataset,
    BlurRecipe,
    BlurPairSet,
)
from src.domain.models.configs import (
    ClassifierConfig,
    DeblurConfig,
    TrainClassifierSettings,
    TrainDeblurSettings,
    PipelineConfig,
)
from src.domain.models.quality import (
    BRISQUE_FEATURE_NAMES,
    FEATURE_ORDER_TAG,
    BrisqueFeatures,
    PristineModel,
)
from src.domain.models.report import (
    Decibels,
    FrameRecord,
    AccuracyReport,
    RestorationMetrics,
    QualityScores,
    PipelineReport,
)

__all__ = [
    "Image",
    "Kernel",
    "BinaryMask",
    "ZStack",
    "FocusIndexMap",
    "WaveletPyramid",
    "FocusOperator",
    "FocusDecision",
    "FocusScore",
    "LayerKind",
    "LayerSpec",
    "TensorEntry",
    "ModelManifest",
    "conv2d",
    "dense",
    "relu",
    "maxpool2",
    "flatten",
    "nearest_upsample2",
    "BlurFamily",
    "DefocusDataset",
    "BlurRecipe",
    "BlurPairSet",
    "ClassifierConfig",
    "DeblurConfig",
    "TrainClassifierSettings",
    "TrainDeblurSettings",
    "PipelineConfig",
    "BRISQUE_FEATURE_NAMES",
    "FEATURE_ORDER_TAG",
    "BrisqueFeatures",
    "PristineModel",
    "Decibels",
    "FrameRecord",
    "AccuracyReport",
    "RestorationMetrics",
    "QualityScores",
    "PipelineReport",
]
