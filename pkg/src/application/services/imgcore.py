"""Image containers, convolution, resampling, blur kernels, masking and crop sampling.

Images are (height, width, channels) float64 arrays in [0, 1]; "reflect" padding
mirrors without repeating the edge sample.
"""

import math

import numpy as np
from scipy import ndimage, special

from src.domain.exceptions import (
    CropSamplingError,
    InvalidCropRequestError,
    InvalidImageError,
    InvalidKernelParameterError,
    InvalidResizeError,
    KernelTooLargeError,
    ShapeMismatchError,
)
from src.domain.models import BinaryMask, Image, Kernel, ZStack
from src.infrastructure.config import CROP_ATTEMPT_FACTOR, FRAME_PATTERN
from src.infrastructure.extensions.loaders import load_stack as _load_stack

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
AIRY_FIRST_ZERO = 3.8317059702075125
_SCIPY_MODES = {"reflect": "mirror", "zero": "constant"}


def as_image(data: np.ndarray) -> Image:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise InvalidImageError(f"expected HxW, HxWx1 or HxWx3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidImageError("samples must be finite")
    return arr


def load_stack(directory_path: str, pattern: str = FRAME_PATTERN) -> ZStack:
    return _load_stack(directory_path, pattern)


def to_grayscale(img: Image) -> Image:
    img = as_image(img)
    if img.shape[2] == 1:
        return img
    return (img @ LUMA_WEIGHTS)[:, :, None]


def ensure_rgb(img: Image) -> Image:
    img = as_image(img)
    if img.shape[2] == 3:
        return img
    return np.repeat(img, 3, axis=2)


def convolve2d(img: Image, ker: Kernel, padding: str = "reflect") -> Image:
    img = as_image(img)
    ker = np.asarray(ker, dtype=np.float64)
    if padding not in _SCIPY_MODES:
        raise ValueError(f"padding must be one of {sorted(_SCIPY_MODES)}, got '{padding}'")
    k = ker.shape[0]
    if ker.ndim != 2 or ker.shape[0] != ker.shape[1] or k % 2 == 0:
        raise InvalidKernelParameterError("shape", ker.shape, "square with odd size")
    if k > img.shape[0] or k > img.shape[1]:
        raise KernelTooLargeError(k, img.shape)

    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[:, :, c] = ndimage.convolve(img[:, :, c], ker, mode=_SCIPY_MODES[padding], cval=0.0)
    return out


def _normalized(weights: np.ndarray) -> Kernel:
    return weights / weights.sum()


def gaussian_kernel(sigma: float) -> Kernel:
    if sigma <= 0:
        raise InvalidKernelParameterError("sigma", sigma, "> 0")
    half = math.ceil(3 * sigma)
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    weights = np.exp(-(x**2 + y**2) / (2 * sigma**2)) / (2 * math.pi * sigma**2)
    return _normalized(weights)


def disk_kernel(radius: float) -> Kernel:
    """Uniform pillbox with anti-aliased rim; radius 0 is the identity tap."""
    if radius < 0:
        raise InvalidKernelParameterError("radius", radius, ">= 0")
    half = math.ceil(radius)
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    coverage = np.clip(radius + 0.5 - np.hypot(x, y), 0.0, 1.0)
    return _normalized(coverage)


def airy_kernel(radius: float) -> Kernel:
    """Airy pattern [2 J1(x)/x]^2 whose first dark ring lies `radius` pixels out."""
    if radius < 0:
        raise InvalidKernelParameterError("radius", radius, ">= 0")
    if radius == 0:
        return np.ones((1, 1))
    half = max(1, math.ceil(2 * radius))
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    arg = AIRY_FIRST_ZERO * np.hypot(x, y) / radius
    safe = np.where(arg == 0, 1.0, arg)
    pattern = np.where(arg == 0, 1.0, (2 * special.j1(safe) / safe) ** 2)
    return _normalized(pattern)


def motion_kernel(length: int, angle_deg: float) -> Kernel:
    """Unit-mass line segment of `length` taps at `angle_deg` (counter-clockwise, x right).

    Taps step one pixel along the dominant axis, so they are distinct and
    8-connected for every angle and length.
    """
    if length < 1:
        raise InvalidKernelParameterError("length", length, ">= 1")
    size = length if length % 2 == 1 else length + 1
    center = size // 2
    theta = math.radians(angle_deg)
    d_row, d_col = -math.sin(theta), math.cos(theta)
    major = max(abs(d_row), abs(d_col))
    steps = np.arange(length) - length // 2
    rows = center + np.rint(steps * d_row / major).astype(int)
    cols = center + np.rint(steps * d_col / major).astype(int)
    weights = np.zeros((size, size))
    weights[rows, cols] = 1.0 / length
    return weights


def resize(img: Image, new_h: int, new_w: int, mode: str = "bilinear") -> Image:
    img = as_image(img)
    if new_h < 1 or new_w < 1:
        raise InvalidResizeError(new_h, new_w)
    orders = {"nearest": 0, "bilinear": 1}
    if mode not in orders:
        raise ValueError(f"mode must be 'nearest' or 'bilinear', got '{mode}'")
    h, w, _ = img.shape
    if (h, w) == (new_h, new_w):
        return img.copy()

    # grid_mode aligns pixel edges, which puts samples at half-pixel centers
    out = ndimage.zoom(
        img,
        (new_h / h, new_w / w, 1.0),
        order=orders[mode],
        mode="nearest",
        grid_mode=True,
    )
    return out[:new_h, :new_w]


def foreground_mask(img: Image, threshold: float) -> BinaryMask:
    return to_grayscale(img)[:, :, 0] > threshold


def sample_crop_origins(
    mask: BinaryMask,
    crop_size: int,
    count: int,
    min_fg_fraction: float,
    rng_seed: int,
) -> list[tuple[int, int]]:
    """Top-left corners of `count` crops whose foreground share reaches `min_fg_fraction`."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if crop_size < 1 or crop_size > min(h, w):
        raise InvalidCropRequestError(f"crop size {crop_size} does not fit a {h}x{w} image")
    if not 0.0 <= min_fg_fraction <= 1.0:
        raise InvalidCropRequestError(f"min_fg_fraction must lie in [0, 1], got {min_fg_fraction}")
    if count < 0:
        raise InvalidCropRequestError(f"count must be >= 0, got {count}")

    # summed-area table, padded so window sums need no bounds checks
    table = np.zeros((h + 1, w + 1), dtype=np.int64)
    table[1:, 1:] = np.cumsum(np.cumsum(mask, axis=0), axis=1)
    area = crop_size * crop_size

    rng = np.random.default_rng(rng_seed)
    budget = CROP_ATTEMPT_FACTOR * count
    origins: list[tuple[int, int]] = []
    attempts = 0
    while len(origins) < count:
        if attempts >= budget:
            raise CropSamplingError(len(origins), count, attempts, min_fg_fraction)
        attempts += 1
        y = int(rng.integers(0, h - crop_size + 1))
        x = int(rng.integers(0, w - crop_size + 1))
        y2, x2 = y + crop_size, x + crop_size
        inside = table[y2, x2] - table[y, x2] - table[y2, x] + table[y, x]
        if inside / area >= min_fg_fraction:
            origins.append((y, x))
    return origins


def crop_at(img: Image, origin: tuple[int, int], crop_size: int) -> Image:
    y, x = origin
    return img[y : y + crop_size, x : x + crop_size].copy()


def sample_crops(
    img: Image,
    mask: BinaryMask,
    crop_size: int,
    count: int,
    min_fg_fraction: float,
    rng_seed: int,
) -> list[Image]:
    img = as_image(img)
    if mask.shape != img.shape[:2]:
        raise ShapeMismatchError("image and mask", img.shape[:2], mask.shape)
    origins = sample_crop_origins(mask, crop_size, count, min_fg_fraction, rng_seed)
    return [crop_at(img, origin, crop_size) for origin in origins]


BLUR_KERNELS = {
    "gaussian": gaussian_kernel,
    "disk": disk_kernel,
    "airy": airy_kernel,
}


def defocus(img: Image, family: str, amount: float) -> Image:
    """Blur with a `family` kernel of sigma/radius `amount`; zero returns the input unchanged."""
    if family not in BLUR_KERNELS:
        raise ValueError(f"Unknown blur family '{family}', expected one of {sorted(BLUR_KERNELS)}")
    if amount == 0:
        return as_image(img)
    return convolve2d(img, BLUR_KERNELS[family](amount))
