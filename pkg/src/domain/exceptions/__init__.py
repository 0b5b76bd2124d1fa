from .imaging import (
    EmptyStackError,
    MixedShapesError,
    FrameLoadError,
    ImageWriteError,
    InvalidImageError,
    KernelTooLargeError,
    InvalidKernelParameterError,
    InvalidResizeError,
    CropSamplingError,
    InvalidCropRequestError,
    ImageTooSmallError,
    ShapeMismatchError,
    OverlappingMasksError,
    EmptyMaskUnionError,
    InvalidWaveletLevelsError,
    StackTooShortError,
)
from .network import (
    LayerShapeError,
    BackwardBeforeForwardError,
    InvalidLossInputError,
    ModelFileError,
    NotAModelFileError,
    UnsupportedModelVersionError,
    BlobLengthMismatchError,
    MissingModelError,
)
from .dataset import (
    EmptyDatasetError,
    InvalidLevelCountError,
    CropSizeError,
    DatasetBuildError,
)
from .quality import (
    DegenerateDistributionError,
    PristineCorpusTooSmallError,
    SingularCovarianceError,
)
from .pipeline import (
    ConfigValidationError,
    ConfigFileError,
    EmptyPipelineError,
    ReportWriteError,
)

__all__ = [
    # Imaging
    "EmptyStackError",
    "MixedShapesError",
    "FrameLoadError",
    "ImageWriteError",
    "InvalidImageError",
    "KernelTooLargeError",
    "InvalidKernelParameterError",
    "InvalidResizeError",
    "CropSamplingError",
    "InvalidCropRequestError",
    "ImageTooSmallError",
    "ShapeMismatchError",
    "OverlappingMasksError",
    "EmptyMaskUnionError",
    "InvalidWaveletLevelsError",
    "StackTooShortError",
    # Network
    "LayerShapeError",
    "BackwardBeforeForwardError",
    "InvalidLossInputError",
    "ModelFileError",
    "NotAModelFileError",
    "UnsupportedModelVersionError",
    "BlobLengthMismatchError",
    "MissingModelError",
    # Dataset
    "EmptyDatasetError",
    "InvalidLevelCountError",
    "CropSizeError",
    "DatasetBuildError",
    # Quality
    "DegenerateDistributionError",
    "PristineCorpusTooSmallError",
    "SingularCovarianceError",
    # Pipeline
    "ConfigValidationError",
    "ConfigFileError",
    "EmptyPipelineError",
    "ReportWriteError",
]
