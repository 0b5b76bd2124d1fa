from typing import Callable

import numpy as np

from src.application.tinynn.network import Network

LossFn = Callable[[np.ndarray], tuple[float, np.ndarray]]


def numerical_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Central finite differences of scalar `f` at `x` (perturbed in place, then restored)."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + h
        plus = f(x)
        flat[i] = saved - h
        minus = f(x)
        flat[i] = saved
        out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
    return float(np.abs(analytic - numeric).max() / scale)


def gradient_check(net: Network, x: np.ndarray, loss: LossFn, h: float = 1e-3) -> dict[str, float]:
    """Worst relative error per parameter (plus "input") between backward and finite differences.

    Runs on a float64 copy of `net`; the original is left untouched.
    """
    net64 = net.astype(np.float64)
    x = np.array(x, dtype=np.float64)

    net64.zero_grad()
    _, grad = loss(net64.forward(x))
    dx = net64.backward(grad)

    def objective(_: np.ndarray) -> float:
        return loss(net64.infer(x))[0]

    errors = {}
    for name, tensor in net64.named_parameters():
        numeric = numerical_gradient(objective, tensor.data, h)
        errors[name] = relative_error(tensor.grad, numeric)
    errors["input"] = relative_error(dx, numerical_gradient(objective, x, h))
    return errors
