"""Fast-scan deblurring: synthetic blur pairs, SRCNN training and tiled inference.

Also hosts the checkerboard diagnostic comparing strided transposed convolution
with resize-convolution on constant input.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np

from src.domain.exceptions import EmptyDatasetError, ImageTooSmallError
from src.domain.models import (
    BlurPairSet,
    BlurRecipe,
    DeblurConfig,
    Image,
    Kernel,
    RestorationMetrics,
    conv2d,
    nearest_upsample2,
    relu,
)
from src.infrastructure.config import DEBLUR_TILE, DEBLUR_TILE_OVERLAP
from src.application.services.imgcore import (
    as_image,
    convolve2d,
    disk_kernel,
    ensure_rgb,
    gaussian_kernel,
    motion_kernel,
)
from src.application.services.quality import psnr, ssim
from src.application.tinynn import Adam, Network, draw_augmentation, loss_mse

logger = logging.getLogger(__name__)

EVAL_BATCH = 16
Upsampler = Literal["transposed_conv_stride2", "resize_convolution"]


def draw_kernel(recipe: BlurRecipe, rng: np.random.Generator) -> Kernel:
    family = recipe.family
    if family == "mixed":
        family = "motion" if rng.random() < recipe.motion_fraction else "gaussian"
    if family == "motion":
        length = int(rng.integers(recipe.motion_length[0], recipe.motion_length[1] + 1))
        return motion_kernel(length, float(rng.uniform(0.0, 180.0)))
    if family == "gaussian":
        return gaussian_kernel(float(rng.uniform(*recipe.gaussian_sigma)))
    return disk_kernel(float(rng.uniform(*recipe.disk_radius)))


def blur_with(sharp: Image, kernel: Kernel, noise_sigma: float, rng: np.random.Generator) -> Image:
    """Convolve, add Gaussian noise of `noise_sigma`, clamp to [0, 1]."""
    blurred = convolve2d(sharp, kernel)
    if noise_sigma > 0:
        blurred = blurred + rng.normal(0.0, noise_sigma, size=blurred.shape)
    return np.clip(blurred, 0.0, 1.0)


def make_blur_pairs(
    sharp_frames: list[Image],
    recipe: BlurRecipe | None = None,
    count: int | None = None,
    seed: int = 0,
) -> BlurPairSet:
    """`count` (blurred, sharp) pairs cycling through `sharp_frames`, one kernel draw per pair."""
    if not sharp_frames:
        raise EmptyDatasetError("sharp frame list")
    recipe = recipe or BlurRecipe()
    count = len(sharp_frames) if count is None else count

    rng = np.random.default_rng(seed)
    blurred, sharp = [], []
    for i in range(count):
        frame = as_image(sharp_frames[i % len(sharp_frames)])
        kernel = draw_kernel(recipe, rng)
        blurred.append(blur_with(frame, kernel, recipe.noise_sigma, rng))
        sharp.append(frame)
    logger.info(f"Synthesized {count} blur pairs ({recipe.family} recipe, seed {seed})")
    return BlurPairSet(blurred=blurred, sharp=sharp, recipe=recipe, seed=seed)


def build_srcnn(identity: bool = False, seed: int = 0) -> Network:
    """Three convolutions (9x9, 1x1, 5x5) with ReLUs between; fully convolutional.

    `identity=True` sets centre-tap kernels on the first three channels so that
    the network passes any non-negative image through unchanged.
    """
    specs = [conv2d(3, 64, 9), relu(), conv2d(64, 32, 1), relu(), conv2d(32, 3, 5)]
    net = Network(specs, seed=seed, metadata={"task": "deblur"})
    if identity:
        for layer in net.layers:
            if not layer.params:
                continue
            weight, bias = layer.params
            weight.data[...] = 0.0
            bias.data[...] = 0.0
            centre = layer.spec.kernel_size // 2
            for c in range(3):
                weight.data[c, c, centre, centre] = 1.0
        net.metadata["identity"] = True
    return net


def _nchw(images: list[Image]) -> np.ndarray:
    return np.ascontiguousarray(np.stack(images).transpose(0, 3, 1, 2), dtype=np.float32)


def _random_patch(pairs: BlurPairSet, idx: int, size: int, rng: np.random.Generator) -> tuple[Image, Image]:
    blurred, sharp = ensure_rgb(pairs.blurred[idx]), ensure_rgb(pairs.sharp[idx])
    h, w = sharp.shape[:2]
    y = int(rng.integers(0, h - size + 1))
    x = int(rng.integers(0, w - size + 1))
    aug = draw_augmentation(rng)
    return aug.apply(blurred[y : y + size, x : x + size]), aug.apply(sharp[y : y + size, x : x + size])


def centre_patches(pairs: BlurPairSet, size: int) -> tuple[np.ndarray, np.ndarray]:
    blurred, sharp = [], []
    for b, s in zip(pairs.blurred, pairs.sharp):
        h, w = s.shape[:2]
        y, x = (h - size) // 2, (w - size) // 2
        blurred.append(ensure_rgb(b)[y : y + size, x : x + size])
        sharp.append(ensure_rgb(s)[y : y + size, x : x + size])
    return _nchw(blurred), _nchw(sharp)


def patch_loss(net: Network, blurred: np.ndarray, sharp: np.ndarray) -> float:
    """Mean squared error over NCHW patch batches, in fixed chunks."""
    total = 0.0
    for start in range(0, len(blurred), EVAL_BATCH):
        pred = net.infer(blurred[start : start + EVAL_BATCH])
        value, _ = loss_mse(pred, sharp[start : start + EVAL_BATCH])
        total += value * len(pred)
    return total / len(blurred)


def train_deblur(pairs: BlurPairSet, config: DeblurConfig) -> tuple[Network, list[float]]:
    """MSE training on random augmented patches; the log holds centre-patch MSE per epoch."""
    if len(pairs) == 0:
        raise EmptyDatasetError("blur pair set")
    for s in pairs.sharp:
        if min(s.shape[:2]) < config.patch_size:
            raise ImageTooSmallError("train_deblur", s.shape, config.patch_size)

    net = build_srcnn(seed=config.seed)
    optimizer = Adam(net.parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    rng = np.random.default_rng(config.seed)
    eval_blurred, eval_sharp = centre_patches(pairs, config.patch_size)

    samples = np.repeat(np.arange(len(pairs)), config.patches_per_pair)
    log: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(samples)
        for start in range(0, len(order), config.batch_size):
            patches = [_random_patch(pairs, int(i), config.patch_size, rng) for i in order[start : start + config.batch_size]]
            x = _nchw([b for b, _ in patches])
            y = _nchw([s for _, s in patches])
            net.zero_grad()
            _, grad = loss_mse(net.forward(x), y)
            net.backward(grad)
            optimizer.step()
        epoch_loss = patch_loss(net, eval_blurred, eval_sharp)
        log.append(epoch_loss)
        logger.debug(f"deblur epoch {epoch}/{config.epochs}: mse {epoch_loss:.6f}")

    net.clear_cache()
    net.metadata["config"] = config.model_dump(mode="json")
    net.metadata["recipe"] = pairs.recipe.model_dump(mode="json")
    logger.info(f"Trained deblur network for {config.epochs} epochs, final mse {log[-1]:.6f}")
    return net, log


def tile_starts(length: int, tile: int, overlap: int) -> list[int]:
    if length <= tile:
        return [0]
    step = max(tile - overlap, 1)
    starts = list(range(0, length - tile + 1, step))
    if starts[-1] + tile < length:
        starts.append(length - tile)
    return starts


def _feather(length: int, overlap: int, ramp_start: bool, ramp_end: bool) -> np.ndarray:
    """Blend weights along one tile axis: linear ramps on edges shared with a neighbour."""
    weights = np.ones(length)
    if overlap <= 0:
        return weights
    pos = np.arange(length) + 0.5
    if ramp_start:
        weights = np.minimum(weights, pos / overlap)
    if ramp_end:
        weights = np.minimum(weights, (length - pos) / overlap)
    return weights


def _infer_image(net: Network, rgb: Image) -> np.ndarray:
    batch = np.ascontiguousarray(rgb.transpose(2, 0, 1)[None], dtype=np.float32)
    return net.infer(batch)[0].transpose(1, 2, 0).astype(np.float64)


def deblur_image(
    net: Network,
    img: Image,
    tile: int = DEBLUR_TILE,
    overlap: int = DEBLUR_TILE_OVERLAP,
    threads: int = 1,
) -> Image:
    """Restore `img` tile by tile, blending overlaps with linear feathering.

    Tiles may run on `threads` workers; blending happens in tile order, so the
    result does not depend on the worker count. Gray input comes back gray.
    """
    img = as_image(img)
    gray = img.shape[2] == 1
    rgb = ensure_rgb(img)
    h, w = rgb.shape[:2]

    if h <= tile and w <= tile:
        out = _infer_image(net, rgb)
    else:
        ys, xs = tile_starts(h, tile, overlap), tile_starts(w, tile, overlap)
        boxes = [(y, x, min(tile, h), min(tile, w)) for y in ys for x in xs]

        def run(box):
            y, x, th, tw = box
            return _infer_image(net, rgb[y : y + th, x : x + tw])

        with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
            results = list(pool.map(run, boxes))

        acc = np.zeros_like(rgb)
        total = np.zeros((h, w, 1))
        for (y, x, th, tw), pred in zip(boxes, results):
            wy = _feather(th, overlap, y > 0, y + th < h)
            wx = _feather(tw, overlap, x > 0, x + tw < w)
            weight = np.outer(wy, wx)[:, :, None]
            acc[y : y + th, x : x + tw] += weight * pred
            total[y : y + th, x : x + tw] += weight
        out = acc / total
        logger.debug(f"Deblurred {h}x{w} image in {len(boxes)} tiles")

    out = np.clip(out, 0.0, 1.0)
    if gray:
        out = out.mean(axis=2, keepdims=True)
    return out


def evaluate_restoration(
    net: Network,
    pairs: BlurPairSet,
    tile: int = DEBLUR_TILE,
    overlap: int = DEBLUR_TILE_OVERLAP,
    threads: int = 1,
) -> RestorationMetrics:
    """Mean PSNR/SSIM of blurred and restored frames against their sharp references."""
    if len(pairs) == 0:
        raise EmptyDatasetError("blur pair set")
    before_p, after_p, before_s, after_s = [], [], [], []
    for blurred, sharp in zip(pairs.blurred, pairs.sharp):
        restored = deblur_image(net, blurred, tile, overlap, threads)
        before_p.append(psnr(blurred, sharp))
        after_p.append(psnr(restored, sharp))
        before_s.append(ssim(blurred, sharp))
        after_s.append(ssim(restored, sharp))
    return RestorationMetrics(
        psnr_before=float(np.mean(before_p)),
        psnr_after=float(np.mean(after_p)),
        ssim_before=float(np.mean(before_s)),
        ssim_after=float(np.mean(after_s)),
    )


def transposed_conv_stride2(x: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """Stride-2 transposed convolution of (C_in, H, W) with (C_in, C_out, k, k) weights, no padding."""
    c_in, h, w = x.shape
    _, c_out, k, _ = weight.shape
    out = np.zeros((c_out, 2 * (h - 1) + k, 2 * (w - 1) + k))
    for a in range(k):
        for b in range(k):
            # every input pixel scatters tap (a, b) to (2i + a, 2j + b)
            out[:, a : a + 2 * h - 1 : 2, b : b + 2 * w - 1 : 2] += np.tensordot(weight[:, :, a, b], x, axes=([0], [0]))
    return out


def checkerboard_diagnostic(
    upsampler: Upsampler,
    seed: int,
    kernel_size: int = 3,
    equal_weights: bool = False,
    channels: int = 3,
    size: int = 8,
) -> np.ndarray:
    """Per-channel spatial variance of a 2x upsampler's response to a constant image.

    Border pixels touched by fewer kernel taps are excluded for the transposed
    convolution, so any remaining variance comes from uneven tap overlap.
    """
    rng = np.random.default_rng(seed)
    x = np.full((channels, size, size), 0.5)

    if upsampler == "transposed_conv_stride2":
        if equal_weights:
            weight = np.full((channels, channels, kernel_size, kernel_size), 1.0 / kernel_size**2)
        else:
            weight = rng.standard_normal((channels, channels, kernel_size, kernel_size))
        out = transposed_conv_stride2(x, weight)
        border = kernel_size - 1
        if border:
            out = out[:, border:-border, border:-border]
    elif upsampler == "resize_convolution":
        net = Network([nearest_upsample2(), conv2d(channels, channels, kernel_size)], seed=seed, dtype=np.float64)
        if equal_weights:
            net.layers[1].weight.data[...] = 1.0 / kernel_size**2
        else:
            net.layers[1].weight.data = rng.standard_normal(net.layers[1].weight.shape)
        out = net.infer(x[None])[0]
    else:
        raise ValueError(f"Unknown upsampler: {upsampler}")

    return out.reshape(channels, -1).var(axis=1)
