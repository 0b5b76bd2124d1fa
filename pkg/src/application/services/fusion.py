"""Focus stacking: Harris-based focus maps, mask refinement, mask-composite and wavelet fusion."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np
import pywt
from scipy import ndimage

from src.domain.exceptions import (
    InvalidWaveletLevelsError,
    KernelTooLargeError,
    ShapeMismatchError,
    StackTooShortError,
)
from src.domain.models import FocusIndexMap, Image, WaveletPyramid, ZStack
from src.application.services.focusmeasure import sobel_gradients
from src.application.services.imgcore import as_image, to_grayscale

logger = logging.getLogger(__name__)

HARRIS_K = 0.04
HARRIS_WINDOW = 7
SMOOTH_WINDOW = 9
REFINE_RADIUS = 4
REFINE_MAX_PASSES = 10

FusionMethod = Literal["masks", "wavelet"]


def harris_response(img_gray: Image, k: float = HARRIS_K, window: int = HARRIS_WINDOW) -> np.ndarray:
    """R = det(M) - k * trace(M)^2 with M the window-summed structure tensor of Sobel gradients."""
    plane = to_grayscale(img_gray)[:, :, 0]
    if window >= min(plane.shape):
        raise KernelTooLargeError(window, plane.shape)
    gx, gy = sobel_gradients(plane)
    area = window * window
    sxx = ndimage.uniform_filter(gx * gx, size=window, mode="mirror") * area
    syy = ndimage.uniform_filter(gy * gy, size=window, mode="mirror") * area
    sxy = ndimage.uniform_filter(gx * gy, size=window, mode="mirror") * area
    return sxx * syy - sxy * sxy - k * (sxx + syy) ** 2


def focus_index_map(
    stack: ZStack,
    k: float = HARRIS_K,
    window: int = HARRIS_WINDOW,
    smooth_window: int = SMOOTH_WINDOW,
    threads: int = 1,
) -> FocusIndexMap:
    """Per pixel, the frame with the strongest locally averaged |Harris response|.

    Ties go to the lower frame index.
    """
    h, w = stack.shape[:2]
    if len(stack) < 2:
        logger.warning("focus_index_map called on a single-frame stack; every pixel maps to frame 0")
        return FocusIndexMap(index=np.zeros((h, w), dtype=np.int64), n_frames=len(stack))

    def activity(frame: Image) -> np.ndarray:
        return ndimage.uniform_filter(np.abs(harris_response(frame, k, window)), size=smooth_window, mode="mirror")

    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        responses = np.stack(list(pool.map(activity, stack.frames)))
    return FocusIndexMap(index=responses.argmax(axis=0).astype(np.int64), n_frames=len(stack))


def refine_mask(
    focus_map: FocusIndexMap,
    radius: int = REFINE_RADIUS,
    max_passes: int = REFINE_MAX_PASSES,
) -> FocusIndexMap:
    """Majority vote over (2r+1)^2 neighbourhoods, repeated until stable; ties keep the current label."""
    index = focus_map.index.copy()
    footprint = np.ones((2 * radius + 1, 2 * radius + 1), dtype=np.int64)
    n_pass = 0
    for n_pass in range(max_passes):
        counts = np.stack(
            [ndimage.convolve((index == i).astype(np.int64), footprint, mode="mirror") for i in range(focus_map.n_frames)]
        )
        current = np.take_along_axis(counts, index[None], axis=0)[0]
        updated = np.where(current == counts.max(axis=0), index, counts.argmax(axis=0))
        if np.array_equal(updated, index):
            break
        index = updated
    logger.debug(f"refine_mask stopped after {n_pass + 1} pass(es)")
    return FocusIndexMap(index=index, n_frames=focus_map.n_frames)


def composite_fuse(stack: ZStack, focus_map: FocusIndexMap, feather: float = 2.0) -> Image:
    """Blend frames with their (feathered) masks; feather 0 copies each pixel from its indexed frame."""
    if focus_map.shape != stack.shape[:2]:
        raise ShapeMismatchError("focus map and frames", focus_map.shape, stack.shape[:2])
    if focus_map.n_frames != len(stack):
        raise ShapeMismatchError("focus map frame count and stack length", (focus_map.n_frames,), (len(stack),))

    frames = np.stack(stack.frames)
    if feather == 0:
        return np.take_along_axis(frames, focus_map.index[None, :, :, None], axis=0)[0]

    weights = np.stack(
        [ndimage.gaussian_filter(mask.astype(np.float64), feather, mode="mirror") for mask in focus_map.masks()]
    )
    weights /= weights.sum(axis=0, keepdims=True)
    return np.einsum("nhw,nhwc->hwc", weights, frames)


def _pad_to_multiple(plane: np.ndarray, multiple: int) -> np.ndarray:
    h, w = plane.shape
    pad_h, pad_w = (-h) % multiple, (-w) % multiple
    if pad_h == 0 and pad_w == 0:
        return plane
    return np.pad(plane, ((0, pad_h), (0, pad_w)), mode="reflect" if min(h, w) > 1 else "edge")


def haar_dwt2(img_gray: Image, levels: int, wavelet: Literal["haar"] = "haar") -> WaveletPyramid:
    """Orthonormal multi-level 2-D Haar analysis; input is reflect-padded to a multiple of 2^levels."""
    if levels < 1:
        raise InvalidWaveletLevelsError(levels)
    plane = np.asarray(img_gray, dtype=np.float64)
    if plane.ndim == 3:
        plane = to_grayscale(plane)[:, :, 0]
    padded = _pad_to_multiple(plane, 2**levels)
    coeffs = pywt.wavedec2(padded, wavelet, mode="periodization", level=levels)
    return WaveletPyramid(
        approximation=coeffs[0],
        details=[tuple(band) for band in coeffs[1:]],
        original_shape=plane.shape,
        wavelet=wavelet,
    )


def haar_idwt2(pyramid: WaveletPyramid) -> np.ndarray:
    coeffs = [pyramid.approximation, *pyramid.details]
    plane = pywt.waverec2(coeffs, pyramid.wavelet, mode="periodization")
    h, w = pyramid.original_shape
    return plane[:h, :w]


def _fuse_max_abs(bands: np.ndarray) -> np.ndarray:
    """Coefficient of largest magnitude across frames; positive wins exact magnitude ties."""
    high, low = bands.max(axis=0), bands.min(axis=0)
    return np.where(high >= -low, high, low)


def wavelet_fuse(stack: ZStack, levels: int = 4, wavelet: Literal["haar"] = "haar") -> Image:
    """Per channel: mean of approximations, max-absolute selection of detail coefficients."""
    if len(stack) < 2:
        raise StackTooShortError(len(stack), 2, "wavelet_fuse")
    h, w, channels = stack.shape
    fused = np.empty((h, w, channels))
    for c in range(channels):
        pyramids = [haar_dwt2(frame[:, :, c], levels, wavelet) for frame in stack.frames]
        approximation = np.mean([p.approximation for p in pyramids], axis=0)
        details = [
            tuple(_fuse_max_abs(np.stack([p.details[lvl][band] for p in pyramids])) for band in range(3))
            for lvl in range(levels)
        ]
        merged = WaveletPyramid(
            approximation=approximation,
            details=details,
            original_shape=(h, w),
            wavelet=wavelet,
        )
        fused[:, :, c] = haar_idwt2(merged)
    return np.clip(fused, 0.0, 1.0)


def fuse(
    stack: ZStack,
    method: FusionMethod = "masks",
    feather: float = 2.0,
    wavelet_levels: int = 4,
    refine_radius: int = REFINE_RADIUS,
    threads: int = 1,
) -> tuple[Image, FocusIndexMap | None]:
    """Fuse a stack with the chosen method; the focus map is returned for the mask method."""
    if method == "wavelet":
        return wavelet_fuse(stack, wavelet_levels), None
    if method != "masks":
        raise ValueError(f"Unknown fusion method: {method}")
    focus_map = focus_index_map(stack, threads=threads)
    if refine_radius > 0:
        focus_map = refine_mask(focus_map, refine_radius)
    fused = composite_fuse(stack, focus_map, feather)
    logger.info(f"Fused {len(stack)} frames with feathered masks")
    return as_image(np.clip(fused, 0.0, 1.0)), focus_map
