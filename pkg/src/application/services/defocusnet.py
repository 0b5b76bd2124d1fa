"""Defocus-level classifier: datasets, training, per-crop prediction and frame decisions."""

import logging

import numpy as np
from scipy.stats import binomtest

from src.domain.exceptions import (
    CropSamplingError,
    CropSizeError,
    DatasetBuildError,
    EmptyDatasetError,
    ImageTooSmallError,
    InvalidLevelCountError,
    StackTooShortError,
)
from src.domain.models import (
    AccuracyReport,
    BlurFamily,
    ClassifierConfig,
    DefocusDataset,
    FocusDecision,
    FrameRecord,
    Image,
    ZStack,
    conv2d,
    dense,
    flatten,
    maxpool2,
    relu,
)
from src.infrastructure.config import CROP_MIN_FG_FRACTION, CROP_SIZE, MASK_THRESHOLD
from src.application.services.imgcore import (
    crop_at,
    defocus,
    ensure_rgb,
    foreground_mask,
    sample_crop_origins,
    sample_crops,
)
from src.application.tinynn import (
    Adam,
    Network,
    loss_cross_entropy,
    loss_rps_from_logits,
    softmax,
)

logger = logging.getLogger(__name__)

DEFAULT_LEVEL_STEP = 0.8
EVAL_BATCH = 64

_LOSSES = {
    "cross_entropy": loss_cross_entropy,
    "rps": loss_rps_from_logits,
}


def _split_counts(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _sample_origins(img: Image, crop_size: int, count: int, seed: int, mask_threshold: float, source: str):
    mask = foreground_mask(img, mask_threshold)
    try:
        return sample_crop_origins(mask, crop_size, count, CROP_MIN_FG_FRACTION, seed)
    except CropSamplingError as e:
        raise DatasetBuildError(f"crop sampling on {source}", e) from e


def build_synthetic_dataset(
    sharp_images: list[Image],
    n_levels: int,
    crops_per_level: int,
    blur_family: BlurFamily = "gaussian",
    seed: int = 0,
    level_step: float = DEFAULT_LEVEL_STEP,
    crop_size: int = CROP_SIZE,
    mask_threshold: float = MASK_THRESHOLD,
) -> DefocusDataset:
    """Crops of every sharp image at `n_levels` synthetic defocus levels.

    Level k is the image blurred with a `blur_family` kernel of size parameter
    k * level_step. Crop positions are drawn once per image from its foreground
    mask and reused at every level, so classes are exactly balanced.
    """
    if not sharp_images:
        raise EmptyDatasetError("sharp image list")
    if n_levels < 2:
        raise InvalidLevelCountError(n_levels, 2)

    rng = np.random.default_rng(seed)
    counts = _split_counts(crops_per_level, len(sharp_images))
    crops: list[list[Image]] = [[] for _ in range(n_levels)]

    for idx, (image, count) in enumerate(zip(sharp_images, counts)):
        image_seed = int(rng.integers(2**31))
        if count == 0:
            continue
        image = ensure_rgb(image)
        origins = _sample_origins(image, crop_size, count, image_seed, mask_threshold, f"sharp image {idx}")
        for level in range(n_levels):
            blurred = defocus(image, blur_family, level * level_step)
            crops[level].extend(crop_at(blurred, origin, crop_size) for origin in origins)

    levels = np.repeat(np.arange(n_levels), [len(c) for c in crops])
    dataset = DefocusDataset(
        crops=np.stack([crop for level_crops in crops for crop in level_crops]),
        levels=levels,
        n_levels=n_levels,
        provenance="synthetic_psf",
        seed=seed,
    )
    logger.info(
        f"Built synthetic {blur_family} dataset: {len(dataset)} crops, {n_levels} levels, "
        f"{len(sharp_images)} source images"
    )
    return dataset


def build_zstack_dataset(
    stack: ZStack,
    sharpest_index: int,
    n_levels: int,
    step_frames: int,
    crops_per_level: int,
    seed: int = 0,
    crop_size: int = CROP_SIZE,
    mask_threshold: float = MASK_THRESHOLD,
) -> DefocusDataset:
    """Level k is read from frame `sharpest_index + k * step_frames` at shared crop positions."""
    if n_levels < 1:
        raise InvalidLevelCountError(n_levels, 1)
    if step_frames < 1:
        raise ValueError(f"step_frames must be >= 1, got {step_frames}")
    last = sharpest_index + (n_levels - 1) * step_frames
    if sharpest_index < 0 or last >= len(stack):
        raise StackTooShortError(len(stack), last + 1, "build_zstack_dataset")

    sharp = ensure_rgb(stack.frames[sharpest_index])
    origins = _sample_origins(sharp, crop_size, crops_per_level, seed, mask_threshold, f"frame {sharpest_index}")

    crops = []
    for level in range(n_levels):
        frame = ensure_rgb(stack.frames[sharpest_index + level * step_frames])
        crops.extend(crop_at(frame, origin, crop_size) for origin in origins)

    dataset = DefocusDataset(
        crops=np.stack(crops),
        levels=np.repeat(np.arange(n_levels), len(origins)),
        n_levels=n_levels,
        provenance="real_zstack",
        seed=seed,
    )
    logger.info(
        f"Built z-stack dataset: {len(dataset)} crops from frames "
        f"{sharpest_index}..{last} (step {step_frames})"
    )
    return dataset


def build_classifier(n_levels: int = 10, crop_size: int = CROP_SIZE, seed: int = 0) -> Network:
    """Two conv/relu/pool blocks followed by two dense layers, ending in `n_levels` logits."""
    if crop_size % 4:
        raise ValueError(f"crop_size must be divisible by 4, got {crop_size}")
    side = crop_size // 4
    specs = [
        conv2d(3, 16, 3),
        relu(),
        maxpool2(),
        conv2d(16, 32, 3),
        relu(),
        maxpool2(),
        flatten(),
        dense(32 * side * side, 128),
        relu(),
        dense(128, n_levels),
    ]
    return Network(specs, seed=seed, metadata={"task": "classifier", "n_levels": n_levels, "crop_size": crop_size})


def _as_batch(crops: np.ndarray) -> np.ndarray:
    """(N, H, W, C) images to the engine's (N, C, H, W) float32 layout."""
    crops = np.asarray(crops)
    if crops.shape[-1] == 1:
        crops = np.repeat(crops, 3, axis=-1)
    return np.ascontiguousarray(crops.transpose(0, 3, 1, 2), dtype=np.float32)


def dataset_loss(net: Network, crops: np.ndarray, levels: np.ndarray, loss: str = "cross_entropy") -> float:
    """Mean loss over `crops` in order, evaluated in fixed-size batches."""
    loss_fn = _LOSSES[loss]
    n = len(crops)
    if n == 0:
        raise EmptyDatasetError("evaluation set")
    total = 0.0
    for start in range(0, n, EVAL_BATCH):
        batch = _as_batch(crops[start : start + EVAL_BATCH])
        value, _ = loss_fn(net.infer(batch), levels[start : start + EVAL_BATCH])
        total += value * len(batch)
    return total / n


def train_classifier(dataset: DefocusDataset, config: ClassifierConfig) -> tuple[Network, list[float]]:
    """Minibatch Adam training; the log holds the whole-set loss after each epoch."""
    if len(dataset) == 0:
        raise EmptyDatasetError("classifier training set")
    if dataset.n_levels > config.n_levels:
        raise InvalidLevelCountError(config.n_levels, dataset.n_levels)
    if dataset.crops.shape[1] != config.crop_size:
        raise CropSizeError(config.crop_size, dataset.crops.shape[1:])

    net = build_classifier(config.n_levels, config.crop_size, seed=config.seed)
    optimizer = Adam(net.parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    loss_fn = _LOSSES[config.loss]
    rng = np.random.default_rng(config.seed)

    x = _as_batch(dataset.crops)
    y = np.asarray(dataset.levels, dtype=np.int64)
    n = len(x)

    log: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            net.zero_grad()
            _, grad = loss_fn(net.forward(x[idx]), y[idx])
            net.backward(grad)
            optimizer.step()
        epoch_loss = dataset_loss(net, dataset.crops, y, config.loss)
        log.append(epoch_loss)
        logger.debug(f"classifier epoch {epoch}/{config.epochs}: {config.loss} loss {epoch_loss:.6f}")

    net.clear_cache()
    net.metadata["config"] = config.model_dump(mode="json")
    logger.info(f"Trained classifier for {config.epochs} epochs, final loss {log[-1]:.6f}")
    return net, log


def _expected_crop_size(net: Network) -> int:
    return int(net.metadata.get("crop_size", CROP_SIZE))


def predict_levels(net: Network, crops: np.ndarray) -> np.ndarray:
    """(N, K) level probabilities for a batch of crops."""
    size = _expected_crop_size(net)
    crops = np.asarray(crops)
    if crops.ndim != 4 or crops.shape[1:3] != (size, size):
        raise CropSizeError(size, crops.shape[1:])
    rows = [softmax(net.infer(_as_batch(crops[start : start + EVAL_BATCH]))) for start in range(0, len(crops), EVAL_BATCH)]
    return np.concatenate(rows) if rows else np.zeros((0, 0))


def predict_level(net: Network, crop: Image) -> np.ndarray:
    crop = np.asarray(crop)
    if crop.ndim == 2:
        crop = crop[:, :, None]
    return predict_levels(net, crop[None])[0]


def expected_levels(probs: np.ndarray) -> np.ndarray:
    return probs @ np.arange(probs.shape[-1])


def default_level_threshold(n_levels: int) -> float:
    return (n_levels - 1) / 4


def classify_frame(
    net: Network,
    frame: Image,
    n_crops: int,
    seed: int,
    level_threshold: float | None = None,
    index: int = 0,
    mask_threshold: float = MASK_THRESHOLD,
) -> FrameRecord:
    """In focus when the sharpest sampled crop's expected level is within `level_threshold`."""
    frame = ensure_rgb(frame)
    size = _expected_crop_size(net)
    if min(frame.shape[:2]) < size:
        raise ImageTooSmallError("classify_frame", frame.shape, size)

    mask = foreground_mask(frame, mask_threshold)
    crops = sample_crops(frame, mask, size, n_crops, CROP_MIN_FG_FRACTION, seed)
    probs = predict_levels(net, np.stack(crops))
    levels = expected_levels(probs)
    threshold = default_level_threshold(probs.shape[1]) if level_threshold is None else level_threshold

    min_level = float(levels.min())
    decision = FocusDecision.IN_FOCUS if min_level <= threshold else FocusDecision.OUT_OF_FOCUS
    return FrameRecord(
        index=index,
        decision=decision,
        mean_level=float(levels.mean()),
        min_level=min_level,
        crop_levels=[float(v) for v in levels],
    )


def wilson_report(n_correct: int, n_samples: int, confidence: float = 0.95) -> AccuracyReport:
    if n_samples == 0:
        raise EmptyDatasetError("labeled crop set")
    interval = binomtest(n_correct, n_samples).proportion_ci(confidence_level=confidence, method="wilson")
    return AccuracyReport(
        accuracy=n_correct / n_samples,
        lower=float(interval.low),
        upper=float(interval.high),
        n_samples=n_samples,
        n_correct=n_correct,
    )


def evaluate_accuracy(
    net: Network,
    crops: np.ndarray,
    in_focus: np.ndarray,
    level_threshold: float | None = None,
    confidence: float = 0.95,
) -> AccuracyReport:
    """Binary in/out-of-focus accuracy of the expected level against `level_threshold`."""
    in_focus = np.asarray(in_focus, dtype=bool)
    if len(in_focus) == 0:
        raise EmptyDatasetError("labeled crop set")
    levels = expected_levels(predict_levels(net, crops))
    threshold = default_level_threshold(net.specs[-1].out_features) if level_threshold is None else level_threshold
    n_correct = int(np.sum((levels <= threshold) == in_focus))
    return wilson_report(n_correct, len(in_focus), confidence)


def level_threshold_sweep(net: Network, crops: np.ndarray, in_focus: np.ndarray) -> tuple[float, float]:
    """Best (threshold, accuracy) over every distinct expected level as a cut-off."""
    in_focus = np.asarray(in_focus, dtype=bool)
    levels = expected_levels(predict_levels(net, crops))
    best = (0.0, -1.0)
    for threshold in np.unique(levels):
        accuracy = float(np.mean((levels <= threshold) == in_focus))
        if accuracy > best[1]:
            best = (float(threshold), accuracy)
    return best


def mean_level_error(net: Network, crops: np.ndarray, levels: np.ndarray) -> float:
    """Mean |argmax level - true level|."""
    if len(levels) == 0:
        raise EmptyDatasetError("labeled crop set")
    predicted = predict_levels(net, crops).argmax(axis=1)
    return float(np.mean(np.abs(predicted - np.asarray(levels))))
