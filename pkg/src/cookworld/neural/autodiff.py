"""Small reverse-mode autodiff over float64 numpy arrays.

Only the operations the policy networks need. Gradients accumulate into
Tensor.grad; every backward formula is covered by finite-difference tests.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Optional, Sequence

import numpy as np

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class DetachedGraphError(RuntimeError):
    """backward() was called on a tensor with no recorded graph."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: Sequence["Tensor"] = (),
        backward: Optional[Callable[[np.ndarray], None]] = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = tuple(parents)
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, grad={'set' if self.grad is not None else 'none'})"

    def item(self) -> float:
        return float(self.data)

    def backward(self) -> None:
        if not self._parents and self._backward is None:
            raise DetachedGraphError("tensor has no recorded computation graph")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node.grad = g if node.grad is None else node.grad + g
            if node._backward is None:
                continue
            for parent, pg in node._backward(g):
                if id(parent) in grads:
                    grads[id(parent)] += pg
                else:
                    grads[id(parent)] = pg.copy() if pg.base is not None else pg


def _wrap(data, parents, backward) -> Tensor:
    if not _GRAD_ENABLED:
        return Tensor(data)
    return Tensor(data, parents=parents, backward=backward)


def constant(data) -> Tensor:
    return Tensor(data)


def _sum_to_shape(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Undo numpy broadcasting in the backward pass."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data

    def backward(g):
        return ((a, _sum_to_shape(g, a.data.shape)), (b, _sum_to_shape(g, b.data.shape)))

    return _wrap(out, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data

    def backward(g):
        return ((a, _sum_to_shape(g, a.data.shape)), (b, _sum_to_shape(-g, b.data.shape)))

    return _wrap(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data

    def backward(g):
        return (
            (a, _sum_to_shape(g * b.data, a.data.shape)),
            (b, _sum_to_shape(g * a.data, b.data.shape)),
        )

    return _wrap(out, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    out = a.data * factor

    def backward(g):
        return ((a, g * factor),)

    return _wrap(out, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data

    def backward(g):
        return ((a, g @ b.data.T), (b, a.data.T @ g))

    return _wrap(out, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    out = a.data.T

    def backward(g):
        return ((a, g.T),)

    return _wrap(out, (a,), backward)


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    out = a.data * mask

    def backward(g):
        return ((a, g * mask),)

    return _wrap(out, (a,), backward)


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=1)
    widths = [p.data.shape[1] for p in parts]

    def backward(g):
        grads = []
        offset = 0
        for part, width in zip(parts, widths):
            grads.append((part, g[:, offset : offset + width]))
            offset += width
        return tuple(grads)

    return _wrap(out, tuple(parts), backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=0)
    heights = [p.data.shape[0] for p in parts]

    def backward(g):
        grads = []
        offset = 0
        for part, height in zip(parts, heights):
            grads.append((part, g[offset : offset + height]))
            offset += height
        return tuple(grads)

    return _wrap(out, tuple(parts), backward)


def mean_rows(a: Tensor) -> Tensor:
    n = a.data.shape[0]
    out = a.data.mean(axis=0, keepdims=True)

    def backward(g):
        return ((a, np.repeat(g / n, n, axis=0)),)

    return _wrap(out, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    out = a.data.sum()

    def backward(g):
        return ((a, np.full_like(a.data, float(g))),)

    return _wrap(out, (a,), backward)


def gather_rows(table: Tensor, indices: Sequence[int]) -> Tensor:
    idx = np.asarray(indices, dtype=np.intp)
    out = table.data[idx]

    def backward(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, idx, g)
        return ((table, grad),)

    return _wrap(out, (table,), backward)


def tile_rows(row: Tensor, count: int) -> Tensor:
    out = np.repeat(row.data, count, axis=0)

    def backward(g):
        return ((row, g.sum(axis=0, keepdims=True)),)

    return _wrap(out, (row,), backward)


def softmax_rows(a: Tensor) -> Tensor:
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=1, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=1, keepdims=True)
        return ((a, out * (g - inner)),)

    return _wrap(out, (a,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    mu = x.data.mean(axis=1, keepdims=True)
    var = x.data.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        d = x.data.shape[1]
        dxhat = g * gain.data
        dx = inv * (
            dxhat
            - dxhat.mean(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        )
        dgain = _sum_to_shape(g * xhat, gain.data.shape)
        dbias = _sum_to_shape(g, bias.data.shape)
        return ((x, dx), (gain, dgain), (bias, dbias))

    return _wrap(out, (x, gain, bias), backward)


def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x @ weight + bias as one tape node."""
    out = x.data @ weight.data + bias.data

    def backward(g):
        return (
            (x, g @ weight.data.T),
            (weight, x.data.T @ g),
            (bias, _sum_to_shape(g, bias.data.shape)),
        )

    return _wrap(out, (x, weight, bias), backward)
