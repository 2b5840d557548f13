"""Full-batch optimizers over a tape's parameter registry."""

from __future__ import annotations

import numpy as np

from .autodiff import NonFiniteError, Tensor

__all__ = ["SGD", "Adam", "make_optimizer"]


class SGD:
    def __init__(self, lr: float = 0.01):
        self.lr = float(lr)

    def step(self, params: dict[str, Tensor]) -> None:
        for name, p in params.items():
            if p.grad is None:
                raise ValueError(f"parameter {name!r} has no gradient")
            p.data -= self.lr * p.grad
            if not np.isfinite(p.data).all():
                raise NonFiniteError(f"non-finite update for parameter {name!r}")


class Adam:
    """Adam with bias correction; state is keyed by parameter name."""

    def __init__(
        self,
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self._t = 0

    def step(self, params: dict[str, Tensor]) -> None:
        self._t += 1
        correction1 = 1.0 - self.beta1**self._t
        correction2 = 1.0 - self.beta2**self._t
        for name, p in params.items():
            g = p.grad
            if g is None:
                raise ValueError(f"parameter {name!r} has no gradient")
            m = self._m.setdefault(name, np.zeros_like(p.data))
            v = self._v.setdefault(name, np.zeros_like(p.data))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correction1
            v_hat = v / correction2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.isfinite(p.data).all():
                raise NonFiniteError(f"non-finite update for parameter {name!r}")


def make_optimizer(kind: str, lr: float, **hyper):
    kind = kind.lower()
    if kind == "sgd":
        return SGD(lr=lr, **hyper)
    if kind == "adam":
        return Adam(lr=lr, **hyper)
    raise ValueError(f"unknown optimizer {kind!r} (expected 'sgd' or 'adam')")
