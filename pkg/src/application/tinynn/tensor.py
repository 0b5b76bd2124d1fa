import numpy as np


class Tensor:
    """Array with an optional gradient buffer of the same shape."""

    __slots__ = ("data", "grad")

    def __init__(self, data: np.ndarray, grad: np.ndarray | None = None):
        self.data = data
        self.grad = grad
        if grad is not None and grad.shape != data.shape:
            raise ValueError(f"gradient shape {grad.shape} does not match data shape {data.shape}")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def astype(self, dtype) -> "Tensor":
        grad = None if self.grad is None else self.grad.astype(dtype)
        return Tensor(self.data.astype(dtype), grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype})"
