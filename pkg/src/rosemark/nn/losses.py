"""Training losses: binary cross entropy and mean squared error."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor

BCE_CLAMP = 1e-7


def bce(pred, target, eps=BCE_CLAMP):
    """Mean of -[t*ln(p) + (1-t)*ln(1-p)] with predictions clamped away
    from {0, 1} for numerical stability."""
    pred = pred if isinstance(pred, Tensor) else Tensor(np.asarray(pred))
    target_data = target.data if isinstance(target, Tensor) else np.asarray(target)
    if pred.data.shape != target_data.shape:
        raise ShapeMismatchError(f"bce {pred.data.shape} vs {target_data.shape}")
    t = Tensor(np.asarray(target_data, dtype=pred.data.dtype))
    p = pred.clip(eps, 1.0 - eps)
    loss = -(t * p.log() + (1.0 - t) * (1.0 - p).log())
    return loss.mean()


def mse(a, b):
    """Mean of elementwise squared differences."""
    a = a if isinstance(a, Tensor) else Tensor(np.asarray(a))
    b_data = b.data if isinstance(b, Tensor) else np.asarray(b)
    if a.data.shape != b_data.shape:
        raise ShapeMismatchError(f"mse {a.data.shape} vs {b_data.shape}")
    b = b if isinstance(b, Tensor) else Tensor(np.asarray(b_data, dtype=a.data.dtype))
    diff = a - b
    return (diff * diff).mean()
