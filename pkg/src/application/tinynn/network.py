import logging
from typing import Any

import numpy as np

from src.domain.exceptions import BackwardBeforeForwardError, LayerShapeError
from src.domain.models import LayerSpec
from src.application.tinynn.layers import Layer, build_layer
from src.application.tinynn.tensor import Tensor

logger = logging.getLogger(__name__)


class Network:
    """Sequential stack of layers with seeded He-uniform initialization."""

    def __init__(
        self,
        specs: list[LayerSpec],
        seed: int = 0,
        dtype=np.float32,
        metadata: dict[str, Any] | None = None,
    ):
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.metadata: dict[str, Any] = dict(metadata or {})
        rng = np.random.default_rng(seed)
        self.layers: list[Layer] = [build_layer(spec, rng, self.dtype) for spec in specs]
        self._caches: list[Any] | None = None

    @property
    def specs(self) -> list[LayerSpec]:
        return [layer.spec for layer in self.layers]

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        named = []
        for idx, layer in enumerate(self.layers):
            if layer.params:
                named.append((f"{idx}.weight", layer.params[0]))
                named.append((f"{idx}.bias", layer.params[1]))
        return named

    def parameters(self) -> list[Tensor]:
        return [tensor for _, tensor in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(tensor.size for tensor in self.parameters())

    def _run(self, x: np.ndarray, keep_cache: bool) -> np.ndarray:
        out = np.asarray(x, dtype=self.dtype)
        caches = []
        for idx, layer in enumerate(self.layers):
            expected = layer.check(out.shape)
            if expected is not None:
                raise LayerShapeError(idx, layer.spec.kind, expected, out.shape)
            out, cache = layer.forward(out)
            if keep_cache:
                caches.append(cache)
        if keep_cache:
            self._caches = caches
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Forward pass that retains intermediates for `backward`."""
        return self._run(x, keep_cache=True)

    def infer(self, x: np.ndarray) -> np.ndarray:
        """Forward pass without touching network state; safe to call from several threads."""
        return self._run(x, keep_cache=False)

    def backward(self, loss_grad: np.ndarray) -> np.ndarray:
        """Populate every parameter gradient and return the gradient w.r.t. the input."""
        if self._caches is None:
            raise BackwardBeforeForwardError(len(self.layers) - 1)
        grad = np.asarray(loss_grad, dtype=self.dtype)
        for idx in range(len(self.layers) - 1, -1, -1):
            grad = self.layers[idx].backward(grad, self._caches[idx])
        return grad

    def zero_grad(self) -> None:
        for tensor in self.parameters():
            tensor.zero_grad()

    def clear_cache(self) -> None:
        self._caches = None

    def astype(self, dtype) -> "Network":
        """Copy of the network computing in `dtype` (float64 is for gradient checks)."""
        clone = Network.__new__(Network)
        clone.seed = self.seed
        clone.dtype = np.dtype(dtype)
        clone.metadata = dict(self.metadata)
        clone._caches = None
        clone.layers = []
        for layer in self.layers:
            copy = build_layer(layer.spec, np.random.default_rng(0), clone.dtype)
            for dst, src in zip(copy.params, layer.params):
                dst.data = src.data.astype(clone.dtype)
            clone.layers.append(copy)
        return clone

    def load_weights(self, arrays: list[np.ndarray]) -> None:
        params = self.parameters()
        if len(arrays) != len(params):
            raise ValueError(f"expected {len(params)} weight arrays, got {len(arrays)}")
        for tensor, array in zip(params, arrays):
            if tuple(array.shape) != tensor.shape:
                raise ValueError(f"weight shape {array.shape} does not match {tensor.shape}")
            tensor.data = np.array(array, dtype=self.dtype)
