"""Loss functions; each returns (value, gradient w.r.t. its first argument).

Batched inputs are reduced with a mean over the batch; a 1-D input is treated as a
batch of one and its gradient keeps the 1-D shape.
"""

import numpy as np

from src.domain.exceptions import (
    EmptyMaskUnionError,
    InvalidLossInputError,
    OverlappingMasksError,
    ShapeMismatchError,
)

BCE_EPS = 1e-7


def _batch(values: np.ndarray, labels) -> tuple[np.ndarray, np.ndarray, bool]:
    values = np.asarray(values, dtype=np.float64)
    single = values.ndim == 1
    values = np.atleast_2d(values)
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    return values, labels, single


def _check_classes(loss: str, k: int, labels: np.ndarray, n: int) -> None:
    if k < 2:
        raise InvalidLossInputError(loss, f"need at least 2 classes, got {k}")
    if len(labels) != n:
        raise InvalidLossInputError(loss, f"{n} rows but {len(labels)} labels")
    if labels.min() < 0 or labels.max() >= k:
        raise InvalidLossInputError(loss, f"class index out of range [0, {k})")


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def loss_cross_entropy(logits: np.ndarray, class_index) -> tuple[float, np.ndarray]:
    dtype = np.asarray(logits).dtype
    z, labels, single = _batch(logits, class_index)
    n, k = z.shape
    _check_classes("cross_entropy", k, labels, n)

    shifted = z - z.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    value = float(-log_probs[np.arange(n), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return value, (grad[0] if single else grad).astype(dtype)


def loss_rps(probs: np.ndarray, class_index) -> tuple[float, np.ndarray]:
    """Ranked probability score over ordinal classes."""
    dtype = np.asarray(probs).dtype
    p, labels, single = _batch(probs, class_index)
    n, k = p.shape
    _check_classes("rps", k, labels, n)
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-6):
        raise InvalidLossInputError("rps", "probs not a distribution")

    cdf_pred = np.cumsum(p, axis=1)
    cdf_true = (np.arange(k)[None, :] >= labels[:, None]).astype(np.float64)
    diff = cdf_pred - cdf_true
    value = float((diff**2).sum(axis=1).mean())
    # d/dp_j sums over every cumulative term that contains p_j
    grad = 2.0 * np.cumsum(diff[:, ::-1], axis=1)[:, ::-1] / n
    return value, (grad[0] if single else grad).astype(dtype)


def loss_rps_from_logits(logits: np.ndarray, class_index) -> tuple[float, np.ndarray]:
    dtype = np.asarray(logits).dtype
    p = softmax(logits)
    value, grad_p = loss_rps(p, class_index)
    grad_z = p * (grad_p - (p * grad_p).sum(axis=-1, keepdims=True))
    return value, grad_z.astype(dtype)


def _check_pair(loss: str, pred: np.ndarray, target: np.ndarray) -> None:
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"{loss} inputs", pred.shape, target.shape)


def loss_mse(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    dtype = np.asarray(pred).dtype
    pred64 = np.asarray(pred, dtype=np.float64)
    target64 = np.asarray(target, dtype=np.float64)
    _check_pair("mse", pred64, target64)
    diff = pred64 - target64
    return float(np.mean(diff**2)), (2.0 * diff / diff.size).astype(dtype)


def loss_bce(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    dtype = np.asarray(pred).dtype
    p = np.clip(np.asarray(pred, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    t = np.asarray(target, dtype=np.float64)
    _check_pair("bce", p, t)
    value = float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))
    grad = (p - t) / (p * (1.0 - p)) / p.size
    return value, grad.astype(dtype)


def loss_masked_l1(pred: np.ndarray, sources: list[np.ndarray], masks: list[np.ndarray]) -> float:
    """Mean absolute error of `pred` against each source inside that source's mask.

    Sums over channels and divides by the number of pixels in the union of the masks.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim == 2:
        pred = pred[:, :, None]
    if len(sources) != len(masks):
        raise InvalidLossInputError("masked_l1", f"{len(sources)} sources but {len(masks)} masks")
    stacked = np.stack([np.asarray(m, dtype=bool) for m in masks])
    for source, mask in zip(sources, stacked):
        source_shape = np.asarray(source).shape[:2]
        if source_shape != pred.shape[:2] or mask.shape != pred.shape[:2]:
            raise ShapeMismatchError("masked_l1 inputs", pred.shape[:2], source_shape)

    coverage = stacked.sum(axis=0)
    if np.any(coverage > 1):
        raise OverlappingMasksError(int(np.sum(coverage > 1)))
    union = int(np.sum(coverage > 0))
    if union == 0:
        raise EmptyMaskUnionError()

    total = 0.0
    for source, mask in zip(sources, stacked):
        source = np.asarray(source, dtype=np.float64).reshape(pred.shape)
        total += float(np.abs(pred - source)[mask].sum())
    return total / union
