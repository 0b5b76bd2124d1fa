from src.application.services import (
    deblur,
    defocusnet,
    focusmeasure,
    fusion,
    imgcore,
    quality,
    synthetic,
)
from src.application.services.imgcore import (
    convolve2d,
    ensure_rgb,
    foreground_mask,
    load_stack,
    resize,
    sample_crops,
    to_grayscale,
)
from src.application.services.focusmeasure import classify_by_threshold, focus_score
from src.application.services.defocusnet import classify_frame, train_classifier
from src.application.services.deblur import deblur_image, train_deblur
from src.application.services.fusion import fuse
from src.application.services.quality import brisque_score, psnr, ssim

__all__ = [
    # Modules
    "imgcore",
    "focusmeasure",
    "defocusnet",
    "deblur",
    "fusion",
    "quality",
    "synthetic",
    # Frequently used operations
    "load_stack",
    "to_grayscale",
    "ensure_rgb",
    "convolve2d",
    "resize",
    "foreground_mask",
    "sample_crops",
    "focus_score",
    "classify_by_threshold",
    "train_classifier",
    "classify_frame",
    "train_deblur",
    "deblur_image",
    "fuse",
    "psnr",
    "ssim",
    "brisque_score",
]
