"""Procedural specimens and stacks with known ground truth.

Frames mimic a mobile-microscope view: stained, textured cells inside a circular
aperture surrounded by black.
"""

import numpy as np
from scipy import ndimage

from src.domain.models import BlurFamily, Image, ZStack
from src.application.services.imgcore import defocus, gaussian_kernel, convolve2d

APERTURE_FRACTION = 0.46
STAIN = np.array([0.85, 0.45, 0.65])


def _smooth_noise(rng: np.random.Generator, size: int, sigma: float) -> np.ndarray:
    field = ndimage.gaussian_filter(rng.random((size, size)), sigma, mode="wrap")
    field -= field.min()
    peak = field.max()
    return field / peak if peak > 0 else field


def specimen_image(size: int = 256, seed: int = 0, channels: int = 3) -> Image:
    """A (size, size, channels) specimen frame, deterministic in `seed`."""
    if size < 16:
        raise ValueError(f"specimen size must be >= 16, got {size}")
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)

    background = 0.45 + 0.25 * _smooth_noise(rng, size, size / 16)
    grain = _smooth_noise(rng, size, 0.8) - 0.5
    density = np.zeros((size, size))

    n_cells = int(rng.integers(18, 32))
    for _ in range(n_cells):
        cy, cx = rng.uniform(0.1 * size, 0.9 * size, size=2)
        ry, rx = rng.uniform(0.03 * size, 0.08 * size, size=2)
        angle = rng.uniform(0, np.pi)
        dy, dx = yy - cy, xx - cx
        u = (dx * np.cos(angle) + dy * np.sin(angle)) / rx
        v = (-dx * np.sin(angle) + dy * np.cos(angle)) / ry
        r = np.sqrt(u * u + v * v)
        body = (r <= 1.0) * rng.uniform(0.3, 0.6)
        membrane = (np.abs(r - 1.0) < 0.12) * 0.35
        nucleus = (r <= rng.uniform(0.25, 0.4)) * 0.3
        density = np.maximum(density, body + membrane + nucleus)

    luminance = np.clip(background - 0.5 * density + 0.35 * grain, 0.12, 1.0)
    tint = 1.0 - density[:, :, None] * (1.0 - STAIN[None, None, :])
    img = luminance[:, :, None] * tint

    radius = APERTURE_FRACTION * size
    aperture = np.hypot(yy - (size - 1) / 2, xx - (size - 1) / 2) <= radius
    img = np.clip(img * aperture[:, :, None], 0.0, 1.0)
    if channels == 1:
        return (img @ np.array([0.299, 0.587, 0.114]))[:, :, None]
    return img


def specimen_corpus(count: int, size: int = 256, seed: int = 0, channels: int = 3) -> list[Image]:
    return [specimen_image(size, seed + i, channels) for i in range(count)]


def defocus_stack(
    sharp: Image,
    n_frames: int,
    step: float = 0.8,
    family: BlurFamily = "gaussian",
) -> ZStack:
    """Frame k is `sharp` defocused by k * step; frame 0 is the sharp image."""
    frames = [defocus(sharp, family, k * step) for k in range(n_frames)]
    return ZStack(frames=frames, names=[f"level {k}" for k in range(n_frames)])


def band_masks(width: int, n_bands: int) -> list[np.ndarray]:
    """Column masks splitting [0, width) into `n_bands` contiguous vertical bands."""
    edges = np.linspace(0, width, n_bands + 1).round().astype(int)
    cols = np.arange(width)
    return [(cols >= edges[i]) & (cols < edges[i + 1]) for i in range(n_bands)]


def complementary_stack(truth: Image, n_frames: int = 3, sigma: float = 2.0) -> ZStack:
    """Frame i keeps `truth` sharp inside vertical band i and blurred elsewhere."""
    if n_frames < 2:
        raise ValueError(f"a complementary stack needs >= 2 frames, got {n_frames}")
    blurred = convolve2d(truth, gaussian_kernel(sigma))
    frames = []
    for cols in band_masks(truth.shape[1], n_frames):
        frames.append(np.where(cols[None, :, None], truth, blurred))
    return ZStack(frames=frames, names=[f"band {i}" for i in range(n_frames)])
