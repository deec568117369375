"""Reverse-mode autodiff over dense numpy arrays.

Covers exactly the ops the shallow watermarking networks need. Arrays
are float32 during training; float64 is available for finite-difference
verification. Single-threaded and deterministic.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum-reduce a broadcast gradient back to the operand's shape."""
    if grad.shape == tuple(shape):
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    # -- graph construction ---------------------------------------------------

    @staticmethod
    def _node(data, parents, backward):
        out = Tensor(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    @staticmethod
    def _lift(value, like=None):
        if isinstance(value, Tensor):
            return value
        dtype = like.data.dtype if like is not None else np.float32
        return Tensor(np.asarray(value, dtype=dtype))

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = Tensor._lift(other, self)
        out_data = self.data + other.data

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a.accumulate(_unbroadcast(grad, a.data.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(grad, b.data.shape))

        return Tensor._node(out_data, (self, other), backward)

    __radd__ = __add__

    def __neg__(self):
        def backward(grad, a=self):
            if a.requires_grad:
                a.accumulate(-grad)

        return Tensor._node(-self.data, (self,), backward)

    def __sub__(self, other):
        return self + (-Tensor._lift(other, self))

    def __rsub__(self, other):
        return Tensor._lift(other, self) + (-self)

    def __mul__(self, other):
        other = Tensor._lift(other, self)
        out_data = self.data * other.data

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a.accumulate(_unbroadcast(grad * b.data, a.data.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(grad * a.data, b.data.shape))

        return Tensor._node(out_data, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor._lift(other, self)
        out_data = self.data / other.data

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a.accumulate(_unbroadcast(grad / b.data, a.data.shape))
            if b.requires_grad:
                b.accumulate(
                    _unbroadcast(-grad * a.data / (b.data * b.data), b.data.shape)
                )

        return Tensor._node(out_data, (self, other), backward)

    def matmul(self, other):
        other = Tensor._lift(other, self)
        if self.data.shape[-1] != other.data.shape[0]:
            raise ShapeMismatchError(
                f"matmul {self.data.shape} @ {other.data.shape}"
            )
        out_data = self.data @ other.data

        def backward(grad, a=self, b=other):
            if a.requires_grad:
                a.accumulate(grad @ b.data.T)
            if b.requires_grad:
                b.accumulate(a.data.T @ grad)

        return Tensor._node(out_data, (self, other), backward)

    __matmul__ = matmul

    # -- nonlinearities ----------------------------------------------------------

    def relu(self):
        mask = self.data > 0
        out_data = self.data * mask

        def backward(grad, a=self, m=mask):
            if a.requires_grad:
                a.accumulate(grad * m)

        return Tensor._node(out_data, (self,), backward)

    def sigmoid(self):
        x = self.data
        out_data = np.empty_like(x)
        pos = x >= 0
        out_data[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        expx = np.exp(x[~pos])
        out_data[~pos] = expx / (1.0 + expx)

        def backward(grad, a=self, y=out_data):
            if a.requires_grad:
                a.accumulate(grad * y * (1.0 - y))

        return Tensor._node(out_data, (self,), backward)

    def log(self):
        def backward(grad, a=self):
            if a.requires_grad:
                a.accumulate(grad / a.data)

        return Tensor._node(np.log(self.data), (self,), backward)

    def sqrt(self):
        out_data = np.sqrt(self.data)

        def backward(grad, a=self, y=out_data):
            if a.requires_grad:
                a.accumulate(grad * 0.5 / y)

        return Tensor._node(out_data, (self,), backward)

    def clip(self, lo, hi):
        mask = (self.data > lo) & (self.data < hi)
        out_data = np.clip(self.data, lo, hi)

        def backward(grad, a=self, m=mask):
            if a.requires_grad:
                a.accumulate(grad * m)

        return Tensor._node(out_data, (self,), backward)

    def maximum(self, floor):
        mask = self.data > floor
        out_data = np.maximum(self.data, floor)

        def backward(grad, a=self, m=mask):
            if a.requires_grad:
                a.accumulate(grad * m)

        return Tensor._node(out_data, (self,), backward)

    # -- reductions / shaping ------------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out_data = self.data.sum(axis=axis, keepdims=keepdims)

        def backward(grad, a=self):
            if not a.requires_grad:
                return
            g = np.asarray(grad)
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a.accumulate(np.broadcast_to(g, a.data.shape).copy())

        return Tensor._node(out_data, (self,), backward)

    def mean(self, axis=None, keepdims=False):
        if axis is None:
            count = self.data.size
        else:
            count = self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape):
        original = self.data.shape
        out_data = self.data.reshape(*shape)

        def backward(grad, a=self, shp=original):
            if a.requires_grad:
                a.accumulate(grad.reshape(shp))

        return Tensor._node(out_data, (self,), backward)

    @staticmethod
    def concat(tensors, axis=1):
        data = np.concatenate([t.data for t in tensors], axis=axis)
        sizes = [t.data.shape[axis] for t in tensors]

        def backward(grad, parts=tuple(tensors), sz=tuple(sizes)):
            offset = 0
            for part, size in zip(parts, sz):
                if part.requires_grad:
                    index = [slice(None)] * grad.ndim
                    index[axis] = slice(offset, offset + size)
                    part.accumulate(grad[tuple(index)])
                offset += size

        return Tensor._node(data, tuple(tensors), backward)

    def masked_softmax(self, mask: np.ndarray):
        """Row-wise softmax over the last axis, limited to mask==1 slots.

        Masked-out entries get probability 0 and no gradient.
        """
        neg_inf = np.array(-np.inf, dtype=self.data.dtype)
        logits = np.where(mask > 0, self.data, neg_inf)
        # rows that are fully masked produce all-zero probabilities
        with np.errstate(invalid="ignore"):
            shifted = logits - logits.max(axis=-1, keepdims=True)
            expd = np.exp(shifted)
        expd = np.where(np.isfinite(shifted), expd, 0.0)
        denom = expd.sum(axis=-1, keepdims=True)
        safe = np.where(denom > 0, denom, 1.0)
        probs = (expd / safe).astype(self.data.dtype)

        def backward(grad, a=self, y=probs):
            if a.requires_grad:
                inner = (grad * y).sum(axis=-1, keepdims=True)
                a.accumulate((grad - inner) * y)

        return Tensor._node(probs, (self,), backward)

    def softmax(self):
        return self.masked_softmax(np.ones_like(self.data))

    def detach(self):
        return Tensor(self.data.copy())

    # -- engine ----------------------------------------------------------------------

    def accumulate(self, grad):
        grad = np.asarray(grad, dtype=self.data.dtype)
        if self.grad is None:
            self.grad = grad.copy()
        else:
            self.grad += grad

    def backward(self):
        if self.data.size != 1:
            raise ShapeMismatchError("backward() requires a scalar loss")
        order = []
        seen = set()

        def topo(node):
            if id(node) in seen:
                return
            seen.add(id(node))
            for parent in node._parents:
                topo(parent)
            order.append(node)

        topo(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None:
                node._backward(node.grad)

    def item(self) -> float:
        return float(self.data.reshape(()))

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"


def parameter(array, requires_grad=True) -> Tensor:
    return Tensor(np.asarray(array), requires_grad=requires_grad)
