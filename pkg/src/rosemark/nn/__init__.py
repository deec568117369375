"""Minimal dense-layer library with reverse-mode gradients."""

from .layers import (
    BatchNorm,
    Dropout,
    Linear,
    ReLU,
    Sigmoid,
    Softmax,
    Stack,
    forward,
)
from .losses import BCE_CLAMP, bce, mse
from .optim import AdamW
from .tensor import Tensor, parameter

__all__ = [
    "AdamW",
    "BCE_CLAMP",
    "BatchNorm",
    "Dropout",
    "Linear",
    "ReLU",
    "Sigmoid",
    "Softmax",
    "Stack",
    "Tensor",
    "bce",
    "forward",
    "mse",
    "parameter",
]
