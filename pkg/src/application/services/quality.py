"""Image quality metrics: PSNR and SSIM against a reference, BRISQUE-feature scoring without one.

The no-reference score is the Mahalanobis distance of an image's 36 BRISQUE
features to a pristine-corpus feature distribution; lower is better.
"""

import logging
import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from scipy import linalg, ndimage
from scipy.special import gammaln
from skimage.metrics import peak_signal_noise_ratio, structural_similarity

from src.domain.exceptions import (
    DegenerateDistributionError,
    ImageTooSmallError,
    MissingModelError,
    ModelFileError,
    PristineCorpusTooSmallError,
    ShapeMismatchError,
    SingularCovarianceError,
)
from src.domain.models import FEATURE_ORDER_TAG, BrisqueFeatures, Image, PristineModel
from src.application.services.imgcore import as_image, resize, to_grayscale

logger = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
MSCN_SIGMA = 7 / 6
MSCN_RADIUS = 3
MSCN_C = 1 / 255
MIN_FIT_SAMPLES = 100
MIN_PRISTINE_CORPUS = 20
DEFAULT_REGULARIZATION = 1e-3
FLAT_VARIANCE = 1e-20
MAX_SHAPE = 10.0


def psnr(a: Image, b: Image, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give math.inf."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError("psnr inputs", a.shape, b.shape)
    if np.array_equal(a, b):
        return math.inf
    return float(peak_signal_noise_ratio(a, b, data_range=peak))


def _luma_plane(img: Image) -> np.ndarray:
    return to_grayscale(img)[:, :, 0]


def ssim(a: Image, b: Image, dynamic_range: float = 1.0) -> float:
    """Gaussian-window (11x11, sigma 1.5) SSIM on luma."""
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise ShapeMismatchError("ssim inputs", a.shape, b.shape)
    if min(a.shape[:2]) < SSIM_WINDOW:
        raise ImageTooSmallError("ssim", a.shape, SSIM_WINDOW)
    return float(
        structural_similarity(
            _luma_plane(a),
            _luma_plane(b),
            data_range=dynamic_range,
            gaussian_weights=True,
            sigma=SSIM_SIGMA,
            use_sample_covariance=False,
        )
    )


def mscn(img_gray: Image) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients of a gray image."""
    plane = _luma_plane(img_gray)
    if min(plane.shape) < 2 * MSCN_RADIUS + 1:
        raise ImageTooSmallError("mscn", plane.shape, 2 * MSCN_RADIUS + 1)
    truncate = MSCN_RADIUS / MSCN_SIGMA
    mu = ndimage.gaussian_filter(plane, MSCN_SIGMA, mode="mirror", truncate=truncate)
    second = ndimage.gaussian_filter(plane * plane, MSCN_SIGMA, mode="mirror", truncate=truncate)
    sigma = np.sqrt(np.abs(second - mu * mu))
    return (plane - mu) / (sigma + MSCN_C)


@lru_cache(maxsize=1)
def _gamma_ratio_table() -> tuple[np.ndarray, np.ndarray]:
    """Shape grid alpha in [0.2, 10] and rho(alpha) = G(2/a)^2 / (G(1/a) G(3/a)), increasing."""
    alphas = np.arange(0.2, MAX_SHAPE + 5e-4, 1e-3)
    rho = np.exp(2 * gammaln(2 / alphas) - gammaln(1 / alphas) - gammaln(3 / alphas))
    return alphas, rho


def _invert_gamma_ratio(ratio: float) -> float:
    alphas, rho = _gamma_ratio_table()
    return float(alphas[np.argmin(np.abs(rho - ratio))])


def _check_samples(fit: str, samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < MIN_FIT_SAMPLES:
        raise DegenerateDistributionError(fit, f"need at least {MIN_FIT_SAMPLES} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DegenerateDistributionError(fit, "samples must be finite")
    return x


def fit_ggd(samples: np.ndarray) -> tuple[float, float]:
    """Moment-matched generalized Gaussian: (shape alpha, variance sigma^2)."""
    x = _check_samples("ggd", samples)
    sigma2 = float(np.mean(x * x))
    if sigma2 <= FLAT_VARIANCE:
        raise DegenerateDistributionError("ggd", "zero variance")
    ratio = float(np.mean(np.abs(x))) ** 2 / sigma2
    return _invert_gamma_ratio(ratio), sigma2


def fit_aggd(samples: np.ndarray) -> tuple[float, float, float, float]:
    """Moment-matched asymmetric generalized Gaussian: (eta, nu, sigma_l^2, sigma_r^2)."""
    x = _check_samples("aggd", samples)
    left, right = x[x < 0], x[x > 0]
    if left.size == 0 or right.size == 0:
        raise DegenerateDistributionError("aggd", "samples must take both signs")
    sigma_l2 = float(np.mean(left * left))
    sigma_r2 = float(np.mean(right * right))
    mean_sq = float(np.mean(x * x))

    gamma_hat = math.sqrt(sigma_l2 / sigma_r2)
    r_hat = float(np.mean(np.abs(x))) ** 2 / mean_sq
    r_norm = r_hat * (gamma_hat**3 + 1) * (gamma_hat + 1) / (gamma_hat**2 + 1) ** 2
    nu = _invert_gamma_ratio(r_norm)

    scale = math.exp(0.5 * (gammaln(1 / nu) - gammaln(3 / nu)))
    beta_l = math.sqrt(sigma_l2) * scale
    beta_r = math.sqrt(sigma_r2) * scale
    eta = (beta_r - beta_l) * math.exp(gammaln(2 / nu) - gammaln(1 / nu))
    return eta, nu, sigma_l2, sigma_r2


def _neighbour_products(m: np.ndarray) -> list[np.ndarray]:
    """Horizontal, vertical, main-diagonal and anti-diagonal pairwise products."""
    return [
        m[:, :-1] * m[:, 1:],
        m[:-1, :] * m[1:, :],
        m[:-1, :-1] * m[1:, 1:],
        m[:-1, 1:] * m[1:, :-1],
    ]


def _ggd_features(m: np.ndarray) -> tuple[float, float]:
    # flat regions leave no spread to fit; report the narrowest shape
    if float(np.mean(m * m)) <= FLAT_VARIANCE:
        return MAX_SHAPE, 0.0
    return fit_ggd(m)


def _aggd_features(product: np.ndarray) -> tuple[float, float, float, float]:
    left, right = product[product < 0], product[product > 0]
    if left.size and right.size:
        return fit_aggd(product)
    sigma_l2 = float(np.mean(left * left)) if left.size else 0.0
    sigma_r2 = float(np.mean(right * right)) if right.size else 0.0
    return 0.0, MAX_SHAPE, sigma_l2, sigma_r2


def _scale_features(plane: np.ndarray) -> list[float]:
    m = mscn(plane)
    features = list(_ggd_features(m))
    for product in _neighbour_products(m):
        features.extend(_aggd_features(product))
    return features


def brisque_features(img: Image) -> BrisqueFeatures:
    """36 features: native scale then half scale, in the order of BRISQUE_FEATURE_NAMES."""
    plane = _luma_plane(img)
    h, w = plane.shape
    if min(h, w) < 32:
        raise ImageTooSmallError("brisque_features", plane.shape, 32)
    half = resize(plane, h // 2, w // 2, mode="bilinear")[:, :, 0]
    return BrisqueFeatures(values=np.array(_scale_features(plane) + _scale_features(half)))


def fit_pristine(corpus: list[Image], regularization: float = DEFAULT_REGULARIZATION) -> PristineModel:
    if len(corpus) < MIN_PRISTINE_CORPUS:
        raise PristineCorpusTooSmallError(len(corpus), MIN_PRISTINE_CORPUS)
    features = np.stack([brisque_features(img).values for img in corpus])
    covariance = np.cov(features, rowvar=False) + regularization * np.eye(features.shape[1])
    try:
        linalg.cho_factor(covariance)
    except linalg.LinAlgError as e:
        raise SingularCovarianceError(regularization, e) from e

    logger.info(f"Fitted pristine model on {len(corpus)} images")
    return PristineModel(
        mean=features.mean(axis=0).tolist(),
        covariance=covariance.tolist(),
        regularization=regularization,
        feature_order=FEATURE_ORDER_TAG,
        corpus_size=len(corpus),
    )


def mahalanobis(features: np.ndarray, model: PristineModel) -> float:
    diff = np.asarray(features, dtype=np.float64) - model.mean_array()
    try:
        factor = linalg.cho_factor(model.covariance_array())
    except linalg.LinAlgError as e:
        raise SingularCovarianceError(model.regularization, e) from e
    return math.sqrt(max(float(diff @ linalg.cho_solve(factor, diff)), 0.0))


def brisque_score(img: Image, model: PristineModel) -> float:
    """Distance of the image's features to the pristine distribution (0 = corpus mean)."""
    return mahalanobis(brisque_features(img).values, model)


def save_pristine(model: PristineModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Saved pristine model to {path}")
    return path


def load_pristine(path: str | Path) -> PristineModel:
    path = Path(path)
    if not path.is_file():
        raise MissingModelError(str(path))
    try:
        model = PristineModel.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ModelFileError(str(path), f"invalid pristine model: {e.error_count()} error(s)") from e
    if model.feature_order != FEATURE_ORDER_TAG:
        raise ModelFileError(str(path), f"unknown feature order '{model.feature_order}'")
    return model
