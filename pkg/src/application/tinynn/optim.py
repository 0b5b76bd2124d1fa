from dataclasses import dataclass, field

import numpy as np

from src.application.tinynn.tensor import Tensor


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(state: AdamState, weights: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    """Bias-corrected Adam update of `weights` in place; returns the same arrays."""
    if not state.m:
        state.m = [np.zeros_like(w) for w in weights]
        state.v = [np.zeros_like(w) for w in weights]
    if len(weights) != len(grads) or len(weights) != len(state.m):
        raise ValueError("weights, gradients and moment buffers must align")

    state.t += 1
    correction1 = 1.0 - state.beta1**state.t
    correction2 = 1.0 - state.beta2**state.t
    for w, g, m, v in zip(weights, grads, state.m, state.v):
        if g.shape != w.shape:
            raise ValueError(f"gradient shape {g.shape} does not match weight shape {w.shape}")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        w -= (state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(w.dtype)
    return weights


class Adam:
    def __init__(self, params: list[Tensor], lr: float, beta1: float = 0.9, beta2: float = 0.999):
        self.params = params
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2)

    def step(self) -> None:
        adam_step(
            self.state,
            [p.data for p in self.params],
            [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params],
        )
