import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.application.services.imgcore import convolve2d, gaussian_kernel


def half_blurred_pair(image: np.ndarray, sigma: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Frame 0 sharp on the left half, frame 1 sharp on the right half."""
    blurred = convolve2d(image, gaussian_kernel(sigma))
    left = np.zeros(image.shape[:2], dtype=bool)
    left[:, : image.shape[1] // 2] = True
    frame0 = np.where(left[:, :, None], image, blurred)
    frame1 = np.where(left[:, :, None], blurred, image)
    return frame0, frame1


def direct_convolve(plane: np.ndarray, ker: np.ndarray) -> np.ndarray:
    """Nested-loop true convolution with mirror padding."""
    k = ker.shape[0]
    p = k // 2
    padded = np.pad(plane, p, mode="reflect")
    h, w = plane.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(k):
                for j in range(k):
                    acc += ker[k - 1 - i, k - 1 - j] * padded[y + i, x + j]
            out[y, x] = acc
    return out


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum p = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ranks = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - (css - 1.0) / ranks > 0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def direct_ssim(a: np.ndarray, b: np.ndarray, sigma: float = 1.5, radius: int = 5) -> float:
    """SSIM averaged over every fully contained 11x11 Gaussian window, written out term by term."""
    taps = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma) ** 2)
    weights = np.outer(taps, taps) / np.outer(taps, taps).sum()
    wa = sliding_window_view(a, weights.shape)
    wb = sliding_window_view(b, weights.shape)

    def local(x: np.ndarray) -> np.ndarray:
        return np.einsum("ijkl,kl->ij", x, weights)

    mu_a, mu_b = local(wa), local(wb)
    var_a = local(wa * wa) - mu_a**2
    var_b = local(wb * wb) - mu_b**2
    cov = local(wa * wb) - mu_a * mu_b
    c1, c2 = 0.01**2, 0.03**2
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
    return float(ssim_map.mean())
