"""Layer kinds of the engine. Activations are NCHW (or N x features after flatten)."""

import math
from typing import Any

import numpy as np

from src.domain.models import LayerSpec
from src.application.tinynn.tensor import Tensor


def _pad_reflect(x: np.ndarray, p: int) -> np.ndarray:
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)), mode="reflect")


def _fold_reflect(gpad: np.ndarray, p: int) -> np.ndarray:
    """Adjoint of `_pad_reflect`: pad-region gradients flow back to their mirror sources."""
    if p == 0:
        return gpad
    g = gpad.copy()
    h = g.shape[2] - 2 * p
    for t in range(p):
        g[:, :, 2 * p - t, :] += g[:, :, t, :]
        g[:, :, p + h - 2 - t, :] += g[:, :, p + h + t, :]
    g = g[:, :, p : p + h, :]
    w = g.shape[3] - 2 * p
    for t in range(p):
        g[:, :, :, 2 * p - t] += g[:, :, :, t]
        g[:, :, :, p + w - 2 - t] += g[:, :, :, p + w + t]
    return np.ascontiguousarray(g[:, :, :, p : p + w])


class Layer:
    def __init__(self, spec: LayerSpec):
        self.spec = spec

    @property
    def params(self) -> list[Tensor]:
        return []

    def check(self, shape: tuple[int, ...]) -> str | None:
        """Describe the expected input when `shape` is unacceptable, else None."""
        return None

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, Any]:
        raise NotImplementedError

    def backward(self, grad: np.ndarray, cache: Any) -> np.ndarray:
        raise NotImplementedError

    def astype(self, dtype) -> "Layer":
        return self


class Conv2d(Layer):
    """Stride-1 convolution (cross-correlation) with reflect padding."""

    def __init__(self, spec: LayerSpec, rng: np.random.Generator, dtype=np.float32):
        super().__init__(spec)
        o, c, k = spec.out_channels, spec.in_channels, spec.kernel_size
        limit = math.sqrt(6.0 / (c * k * k))
        self.weight = Tensor(rng.uniform(-limit, limit, size=(o, c, k, k)).astype(dtype))
        self.bias = Tensor(np.zeros(o, dtype=dtype))

    @property
    def params(self) -> list[Tensor]:
        return [self.weight, self.bias]

    def check(self, shape):
        p = self.spec.kernel_size // 2
        if len(shape) != 4 or shape[1] != self.spec.in_channels or min(shape[2:]) <= p:
            return f"(N, {self.spec.in_channels}, H, W) with H, W > {p}"
        return None

    def forward(self, x):
        _, _, h, w = x.shape
        k = self.spec.kernel_size
        xpad = _pad_reflect(x, k // 2)
        wt = self.weight.data
        acc = None
        for i in range(k):
            for j in range(k):
                # (O, C) . (N, C, H, W) -> (O, N, H, W)
                term = np.tensordot(wt[:, :, i, j], xpad[:, :, i : i + h, j : j + w], axes=([1], [1]))
                acc = term if acc is None else acc + term
        out = acc.transpose(1, 0, 2, 3) + self.bias.data[None, :, None, None]
        return np.ascontiguousarray(out), xpad

    def backward(self, grad, cache):
        xpad = cache
        n, _, h, w = grad.shape
        k = self.spec.kernel_size
        wt = self.weight.data
        dweight = np.zeros_like(wt)
        dxpad = np.zeros_like(xpad)
        for i in range(k):
            for j in range(k):
                window = xpad[:, :, i : i + h, j : j + w]
                dweight[:, :, i, j] = np.tensordot(grad, window, axes=([0, 2, 3], [0, 2, 3]))
                # (N, O, H, W) . (O, C) -> (N, H, W, C)
                back = np.tensordot(grad, wt[:, :, i, j], axes=([1], [0]))
                dxpad[:, :, i : i + h, j : j + w] += back.transpose(0, 3, 1, 2)
        self.weight.grad = dweight
        self.bias.grad = grad.sum(axis=(0, 2, 3)).astype(wt.dtype)
        return _fold_reflect(dxpad, k // 2)

    def astype(self, dtype):
        self.weight = self.weight.astype(dtype)
        self.bias = self.bias.astype(dtype)
        return self


class ReLU(Layer):
    def forward(self, x):
        mask = x > 0
        return np.where(mask, x, 0).astype(x.dtype), mask

    def backward(self, grad, cache):
        return np.where(cache, grad, 0).astype(grad.dtype)


class MaxPool2(Layer):
    """2x2 max pooling, stride 2; ties go to the first element in row-major order."""

    def check(self, shape):
        if len(shape) != 4 or shape[2] < 2 or shape[3] < 2:
            return "(N, C, H, W) with H, W >= 2"
        return None

    def forward(self, x):
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        blocks = (
            x[:, :, : 2 * h2, : 2 * w2]
            .reshape(n, c, h2, 2, w2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h2, w2, 4)
        )
        argmax = blocks.argmax(axis=-1)
        out = np.take_along_axis(blocks, argmax[..., None], axis=-1)[..., 0]
        return out, (x.shape, argmax)

    def backward(self, grad, cache):
        shape, argmax = cache
        n, c, h, w = shape
        h2, w2 = h // 2, w // 2
        blocks = np.zeros((n, c, h2, w2, 4), dtype=grad.dtype)
        np.put_along_axis(blocks, argmax[..., None], grad[..., None], axis=-1)
        dx = np.zeros(shape, dtype=grad.dtype)
        dx[:, :, : 2 * h2, : 2 * w2] = (
            blocks.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * h2, 2 * w2)
        )
        return dx


class Dense(Layer):
    def __init__(self, spec: LayerSpec, rng: np.random.Generator, dtype=np.float32):
        super().__init__(spec)
        limit = math.sqrt(6.0 / spec.in_features)
        self.weight = Tensor(
            rng.uniform(-limit, limit, size=(spec.out_features, spec.in_features)).astype(dtype)
        )
        self.bias = Tensor(np.zeros(spec.out_features, dtype=dtype))

    @property
    def params(self) -> list[Tensor]:
        return [self.weight, self.bias]

    def check(self, shape):
        if len(shape) != 2 or shape[1] != self.spec.in_features:
            return f"(N, {self.spec.in_features})"
        return None

    def forward(self, x):
        return x @ self.weight.data.T + self.bias.data, x

    def backward(self, grad, cache):
        self.weight.grad = grad.T @ cache
        self.bias.grad = grad.sum(axis=0)
        return grad @ self.weight.data

    def astype(self, dtype):
        self.weight = self.weight.astype(dtype)
        self.bias = self.bias.astype(dtype)
        return self


class Flatten(Layer):
    def check(self, shape):
        if len(shape) < 2:
            return "(N, ...)"
        return None

    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, grad, cache):
        return grad.reshape(cache)


class NearestUpsample2(Layer):
    def check(self, shape):
        if len(shape) != 4:
            return "(N, C, H, W)"
        return None

    def forward(self, x):
        return x.repeat(2, axis=2).repeat(2, axis=3), x.shape

    def backward(self, grad, cache):
        n, c, h, w = cache
        return grad.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5))


def build_layer(spec: LayerSpec, rng: np.random.Generator, dtype=np.float32) -> Layer:
    if spec.kind == "conv2d":
        return Conv2d(spec, rng, dtype)
    if spec.kind == "dense":
        return Dense(spec, rng, dtype)
    simple = {
        "relu": ReLU,
        "maxpool2": MaxPool2,
        "flatten": Flatten,
        "nearest_upsample2": NearestUpsample2,
    }
    return simple[spec.kind](spec)
