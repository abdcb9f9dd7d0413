"""Building blocks for the from-scratch MLP stack.

Every layer implements forward/backward on float64 arrays. Backward relies on
caches written by the most recent training-mode forward; evaluation-mode
forwards never touch gradients. Shapes are (batch, width) throughout.
"""
from __future__ import annotations

import numpy as np

HE_UNIFORM = "he_uniform"


class Linear:
    """Affine layer y = x W + b with He-style uniform init."""

    def __init__(self, in_width: int, out_width: int, rng: np.random.Generator):
        if in_width < 1 or out_width < 1:
            raise ValueError("Linear: widths must be positive")
        limit = np.sqrt(6.0 / in_width)
        self.W = rng.uniform(-limit, limit, size=(in_width, out_width))
        self.b = np.zeros(out_width)
        self.gW = np.zeros_like(self.W)
        self.gb = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if x.shape[1] != self.W.shape[0]:
            raise ValueError(
                f"Linear: input width {x.shape[1]} does not match layer width {self.W.shape[0]}"
            )
        if train:
            self._x = x
        return x @ self.W + self.b

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._x is None:
            raise RuntimeError("Linear.backward: no training-mode forward cached")
        self.gW = self._x.T @ grad
        self.gb = grad.sum(axis=0)
        return grad @ self.W.T

    def parameters(self):
        return [self.W, self.b]

    def gradients(self):
        return [self.gW, self.gb]

    def state_arrays(self):
        return [self.W, self.b]


class BatchNorm:
    """Per-feature normalization with running statistics for eval mode.

    Training uses biased batch variance; running stats keep momentum * old +
    (1 - momentum) * batch. Backward is defined for training-mode forwards
    only (eval-mode normalization is an affine map we never differentiate).
    """

    def __init__(self, width: int, momentum: float = 0.9, eps: float = 1e-5):
        self.gamma = np.ones(width)
        self.beta = np.zeros(width)
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)
        self.momentum = momentum
        self.eps = eps
        self.g_gamma = np.zeros(width)
        self.g_beta = np.zeros(width)
        self._xhat: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if train:
            mean = x.mean(axis=0)
            var = x.var(axis=0)  # biased, matches the backward formula
            self.running_mean = self.momentum * self.running_mean + (1.0 - self.momentum) * mean
            self.running_var = self.momentum * self.running_var + (1.0 - self.momentum) * var
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mean) * inv_std
            self._xhat = xhat
            self._inv_std = inv_std
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
            xhat = (x - self.running_mean) * inv_std
            self._xhat = None
            self._inv_std = None
        return self.gamma * xhat + self.beta

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._xhat is None:
            raise RuntimeError("BatchNorm.backward: no training-mode forward cached")
        xhat, inv_std = self._xhat, self._inv_std
        n = grad.shape[0]
        self.g_gamma = (grad * xhat).sum(axis=0)
        self.g_beta = grad.sum(axis=0)
        gx_hat = grad * self.gamma
        return (
            inv_std
            / n
            * (n * gx_hat - gx_hat.sum(axis=0) - xhat * (gx_hat * xhat).sum(axis=0))
        )

    def parameters(self):
        return [self.gamma, self.beta]

    def gradients(self):
        return [self.g_gamma, self.g_beta]

    def state_arrays(self):
        # running stats ride along so eval behaviour survives persistence
        return [self.gamma, self.beta, self.running_mean, self.running_var]


class ReLU:
    def __init__(self):
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if train:
            self._mask = x > 0.0
        return np.maximum(x, 0.0)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._mask is None:
            raise RuntimeError("ReLU.backward: no training-mode forward cached")
        return grad * self._mask

    def parameters(self):
        return []

    def gradients(self):
        return []

    def state_arrays(self):
        return []


class Sigmoid:
    def __init__(self):
        self._out: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        if train:
            self._out = out
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._out is None:
            raise RuntimeError("Sigmoid.backward: no training-mode forward cached")
        return grad * self._out * (1.0 - self._out)

    def parameters(self):
        return []

    def gradients(self):
        return []

    def state_arrays(self):
        return []


class L2Normalize:
    """Row-wise projection onto the unit sphere; zero rows pass through as zero."""

    def __init__(self, eps: float = 1e-12):
        self.eps = eps
        self._x: np.ndarray | None = None
        self._r: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        r = np.sqrt(np.einsum("ij,ij->i", x, x))
        r_safe = np.maximum(r, self.eps)[:, None]
        if train:
            self._x = x
            self._r = r_safe
        return x / r_safe

    def backward(self, grad: np.ndarray) -> np.ndarray:
        if self._x is None:
            raise RuntimeError("L2Normalize.backward: no training-mode forward cached")
        x, r = self._x, self._r
        dot = np.einsum("ij,ij->i", x, grad)[:, None]
        return grad / r - x * dot / r**3

    def parameters(self):
        return []

    def gradients(self):
        return []

    def state_arrays(self):
        return []
