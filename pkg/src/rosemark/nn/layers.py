"""Dense layers for the shallow watermarking networks.

Inference mode is fully deterministic: Dropout is the identity and
BatchNorm uses running statistics. Training-mode BatchNorm normalizes
with batch statistics; running-stat updates are an explicit side effect
so re-evaluating a loss never perturbs state.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor, parameter


class Linear:
    kind = "linear"

    def __init__(self, in_dim, out_dim, rng=None, scale=None, dtype=np.float32):
        self.in_dim = in_dim
        self.out_dim = out_dim
        if rng is None:
            weight = np.zeros((out_dim, in_dim), dtype=dtype)
        else:
            scale = scale if scale is not None else 1.0 / np.sqrt(in_dim)
            weight = rng.normal(0.0, scale, size=(out_dim, in_dim)).astype(dtype)
        self.weight = parameter(weight)
        self.bias = parameter(np.zeros(out_dim, dtype=dtype))

    def forward(self, x: Tensor, mode="infer", rng=None) -> Tensor:
        if x.data.shape[-1] != self.in_dim:
            raise ShapeMismatchError(
                f"linear expects {self.in_dim} features, got {x.data.shape}"
            )
        return x.matmul(_t(self.weight)) + self.bias

    def params(self):
        return [self.weight, self.bias]

    def arrays(self):
        return {"weight": self.weight, "bias": self.bias}


def _t(param):
    # transpose view of a parameter that still routes gradients
    out = Tensor(param.data.T)
    if param.requires_grad:
        out.requires_grad = True
        out._parents = (param,)

        def backward(grad, p=param):
            p.accumulate(grad.T)

        out._backward = backward
    return out


class BatchNorm:
    kind = "batchnorm"

    def __init__(self, dim, eps=1e-5, momentum=0.1, dtype=np.float32):
        self.dim = dim
        self.eps = eps
        self.momentum = momentum
        self.gamma = parameter(np.ones(dim, dtype=dtype))
        self.beta = parameter(np.zeros(dim, dtype=dtype))
        self.running_mean = np.zeros(dim, dtype=dtype)
        self.running_var = np.ones(dim, dtype=dtype)

    def forward(self, x: Tensor, mode="infer", rng=None, update_stats=False) -> Tensor:
        if x.data.shape[-1] != self.dim:
            raise ShapeMismatchError(f"batchnorm dim {self.dim}, got {x.data.shape}")
        if mode == "train":
            mean = x.mean(axis=0, keepdims=True)
            centered = x - mean
            var = (centered * centered).mean(axis=0, keepdims=True)
            if update_stats:
                m = self.momentum
                self.running_mean = (
                    (1 - m) * self.running_mean + m * x.data.mean(axis=0)
                ).astype(self.running_mean.dtype)
                self.running_var = (
                    (1 - m) * self.running_var + m * x.data.var(axis=0)
                ).astype(self.running_var.dtype)
            std = (var + self.eps).sqrt()
            normed = centered / std
        else:
            inv = np.sqrt(self.running_var + self.eps)
            normed = (x - self.running_mean) * Tensor(1.0 / inv)
        return normed * self.gamma + self.beta

    def params(self):
        return [self.gamma, self.beta]

    def arrays(self):
        return {
            "gamma": self.gamma,
            "beta": self.beta,
            "running_mean": self.running_mean,
            "running_var": self.running_var,
        }


class ReLU:
    kind = "relu"

    def forward(self, x: Tensor, mode="infer", rng=None) -> Tensor:
        return x.relu()

    def params(self):
        return []

    def arrays(self):
        return {}


class Sigmoid:
    kind = "sigmoid"

    def forward(self, x: Tensor, mode="infer", rng=None) -> Tensor:
        return x.sigmoid()

    def params(self):
        return []

    def arrays(self):
        return {}


class Dropout:
    kind = "dropout"

    def __init__(self, rate=0.1):
        self.rate = rate

    def forward(self, x: Tensor, mode="infer", rng=None) -> Tensor:
        if mode != "train" or self.rate <= 0.0:
            return x
        if rng is None:
            raise ValueError("train-mode dropout needs an rng")
        keep = 1.0 - self.rate
        mask = (rng.random(x.data.shape) < keep).astype(x.data.dtype) / keep
        return x * Tensor(mask)

    def params(self):
        return []

    def arrays(self):
        return {}


class Softmax:
    kind = "softmax"

    def forward(self, x: Tensor, mode="infer", rng=None) -> Tensor:
        return x.softmax()

    def params(self):
        return []

    def arrays(self):
        return {}


class Stack:
    """Sequential container with explicit mode/rng threading."""

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x: Tensor, mode="infer", rng=None, update_stats=False) -> Tensor:
        for layer in self.layers:
            if isinstance(layer, BatchNorm):
                x = layer.forward(x, mode=mode, update_stats=update_stats)
            else:
                x = layer.forward(x, mode=mode, rng=rng)
        return x

    def params(self):
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out


def forward(layer, x: Tensor, mode="infer", rng=None) -> Tensor:
    """Uniform entry point over any layer kind."""
    return layer.forward(x, mode=mode, rng=rng)
