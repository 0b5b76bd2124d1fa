"""Classical sharpness operators and the threshold in/out-of-focus baseline."""

import numpy as np
from scipy import ndimage

from src.domain.exceptions import ImageTooSmallError, ShapeMismatchError
from src.domain.models import FocusDecision, FocusOperator, FocusScore, Image, ZStack
from src.application.services.imgcore import as_image, to_grayscale

LAPLACIAN_STENCIL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def _gray_plane(img_gray: Image, operation: str, min_h: int, min_w: int) -> np.ndarray:
    plane = to_grayscale(as_image(img_gray))[:, :, 0]
    if plane.shape[0] < min_h or plane.shape[1] < min_w:
        raise ImageTooSmallError(operation, plane.shape, max(min_h, min_w))
    return plane


def sobel_gradients(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = ndimage.sobel(plane, axis=1, mode="mirror")
    gy = ndimage.sobel(plane, axis=0, mode="mirror")
    return gx, gy


def laplacian_variance(img_gray: Image) -> FocusScore:
    plane = _gray_plane(img_gray, "laplacian_variance", 3, 3)
    response = ndimage.correlate(plane, LAPLACIAN_STENCIL, mode="mirror")
    return FocusScore(operator=FocusOperator.LAPLACIAN_VARIANCE, value=float(response.var()))


def tenengrad(img_gray: Image) -> FocusScore:
    plane = _gray_plane(img_gray, "tenengrad", 3, 3)
    gx, gy = sobel_gradients(plane)
    return FocusScore(operator=FocusOperator.TENENGRAD, value=float(np.mean(gx**2 + gy**2)))


def vollath_f4(img_gray: Image) -> FocusScore:
    plane = _gray_plane(img_gray, "vollath_f4", 1, 3)
    near = np.mean(plane[:, :-1] * plane[:, 1:])
    far = np.mean(plane[:, :-2] * plane[:, 2:])
    return FocusScore(operator=FocusOperator.VOLLATH_F4, value=float(near - far))


OPERATORS = {
    FocusOperator.LAPLACIAN_VARIANCE: laplacian_variance,
    FocusOperator.TENENGRAD: tenengrad,
    FocusOperator.VOLLATH_F4: vollath_f4,
}


def focus_score(img: Image, operator: FocusOperator | str) -> FocusScore:
    return OPERATORS[FocusOperator(operator)](img)


def classify_by_threshold(score: FocusScore, threshold: float) -> FocusDecision:
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if score.value >= threshold:
        return FocusDecision.IN_FOCUS
    return FocusDecision.OUT_OF_FOCUS


def threshold_sweep(
    values: np.ndarray, labels: np.ndarray
) -> tuple[list[tuple[float, float, float]], float, float]:
    """ROC points (threshold, tpr, fpr) and the best-accuracy threshold.

    `labels` are True for in-focus samples; every distinct score is tried as a threshold.
    Returns (roc, best_threshold, best_accuracy).
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if values.shape != labels.shape:
        raise ShapeMismatchError("scores and labels", values.shape, labels.shape)
    n_pos = max(int(labels.sum()), 1)
    n_neg = max(int((~labels).sum()), 1)

    candidates = np.concatenate([np.unique(values), [np.inf]])
    roc = []
    best_threshold, best_accuracy = float(candidates[0]), -1.0
    for threshold in candidates:
        predicted = values >= threshold
        tpr = float(np.sum(predicted & labels)) / n_pos
        fpr = float(np.sum(predicted & ~labels)) / n_neg
        accuracy = float(np.mean(predicted == labels))
        roc.append((float(threshold), tpr, fpr))
        if accuracy > best_accuracy:
            best_threshold, best_accuracy = float(threshold), accuracy
    return roc, best_threshold, best_accuracy


def best_focused_index(stack: ZStack, operator: FocusOperator | str = FocusOperator.TENENGRAD) -> int:
    scores = [focus_score(frame, operator).value for frame in stack.frames]
    return int(np.argmax(scores))
