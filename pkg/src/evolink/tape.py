"""Recorded dense-array computations with reverse-mode gradients.

Every operation returns a new Tensor that remembers its parents and how to
push a gradient back to them, so a forward pass implicitly records an
acyclic operation log. Calling :func:`backward` on a scalar result walks
that log once in reverse topological order and fills ``.grad`` on every
tensor the result depends on. All storage is float64.
"""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import DegenerateSoftmaxError, NumericError, ShapeError

Array = np.ndarray


class Tensor:
    """A float64 array plus the bookkeeping needed for backpropagation."""

    __slots__ = ("value", "grad", "name", "_parents", "_backward")

    def __init__(self, value, *, name: str | None = None, _parents=(), _backward=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: Array | None = None
        self.name = name
        self._parents: tuple[Tensor, ...] = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"Tensor(shape={self.value.shape}{tag})"

    # Light operator sugar; every operator defers to the module-level ops.
    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)


def as_tensor(x) -> Tensor:
    """Wrap ``x`` in a constant Tensor unless it already is one."""
    return x if isinstance(x, Tensor) else Tensor(x)


def param(value, name: str | None = None) -> Tensor:
    """Create a trainable leaf. Leaf values must be finite."""
    t = Tensor(value, name=name)
    if not np.all(np.isfinite(t.value)):
        raise NumericError(f"non-finite entries in parameter {name!r}")
    return t


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(t) into ``t.grad`` for every ancestor of loss."""
    if loss.value.shape != ():
        raise ShapeError(f"backward requires a scalar, got shape {loss.value.shape}")
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    for t in order:
        t.grad = np.zeros_like(t.value)
    loss.grad = np.ones((), dtype=np.float64)
    for t in reversed(order):
        if t._backward is not None:
            t._backward(t.grad)


def _unbroadcast(g: Array, shape: tuple[int, ...]) -> Array:
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _broadcastable(a: Tensor, b: Tensor, opname: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(f"{opname}: shapes {a.shape} and {b.shape} do not broadcast") from exc


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.value.ndim != 2 or b.value.ndim != 2:
        raise ShapeError(f"matmul needs 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} @ {b.shape}")
    out = Tensor(a.value @ b.value, _parents=(a, b))

    def bw(g: Array) -> None:
        a.grad += g @ b.value.T
        b.grad += a.value.T @ g

    out._backward = bw
    return out


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcastable(a, b, "add")
    out = Tensor(a.value + b.value, _parents=(a, b))

    def bw(g: Array) -> None:
        a.grad += _unbroadcast(g, a.shape)
        b.grad += _unbroadcast(g, b.shape)

    out._backward = bw
    return out


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcastable(a, b, "sub")
    out = Tensor(a.value - b.value, _parents=(a, b))

    def bw(g: Array) -> None:
        a.grad += _unbroadcast(g, a.shape)
        b.grad -= _unbroadcast(g, b.shape)

    out._backward = bw
    return out


def mul(a, b) -> Tensor:
    """Hadamard (elementwise) product with numpy broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcastable(a, b, "mul")
    out = Tensor(a.value * b.value, _parents=(a, b))

    def bw(g: Array) -> None:
        a.grad += _unbroadcast(g * b.value, a.shape)
        b.grad += _unbroadcast(g * a.value, b.shape)

    out._backward = bw
    return out


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    out = Tensor(a.value * c, _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g * c

    out._backward = bw
    return out


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.value.ndim != 2:
        raise ShapeError(f"transpose needs a 2-d operand, got {a.shape}")
    out = Tensor(a.value.T, _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g.T

    out._backward = bw
    return out


def concat_cols(a, b) -> Tensor:
    """Concatenate two matrices with equal row counts along columns."""
    a, b = as_tensor(a), as_tensor(b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_cols: incompatible shapes {a.shape} and {b.shape}")
    p = a.shape[1]
    out = Tensor(np.concatenate([a.value, b.value], axis=1), _parents=(a, b))

    def bw(g: Array) -> None:
        a.grad += g[:, :p]
        b.grad += g[:, p:]

    out._backward = bw
    return out


def rows(a, idx) -> Tensor:
    """Gather rows of a matrix; the backward pass scatter-adds."""
    a = as_tensor(a)
    if a.value.ndim != 2:
        raise ShapeError(f"rows needs a 2-d operand, got {a.shape}")
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError("rows: index must be one-dimensional")
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise ShapeError(f"rows: index out of range for {a.shape[0]} rows")
    out = Tensor(a.value[idx], _parents=(a,))

    def bw(g: Array) -> None:
        np.add.at(a.grad, idx, g)

    out._backward = bw
    return out


def with_rows(base, idx, new) -> Tensor:
    """Copy ``base`` with the rows at ``idx`` replaced by ``new``."""
    base, new = as_tensor(base), as_tensor(new)
    idx = np.asarray(idx, dtype=np.intp)
    if base.value.ndim != 2 or new.value.ndim != 2:
        raise ShapeError("with_rows needs 2-d operands")
    if new.shape != (idx.size, base.shape[1]):
        raise ShapeError(f"with_rows: replacement shape {new.shape} does not match "
                         f"({idx.size}, {base.shape[1]})")
    if idx.size and (idx.min() < 0 or idx.max() >= base.shape[0]):
        raise ShapeError(f"with_rows: index out of range for {base.shape[0]} rows")
    if len(np.unique(idx)) != idx.size:
        raise ShapeError("with_rows: duplicate row indices")
    value = base.value.copy()
    value[idx] = new.value
    out = Tensor(value, _parents=(base, new))

    def bw(g: Array) -> None:
        gb = g.copy()
        gb[idx] = 0.0
        base.grad += gb
        new.grad += g[idx]

    out._backward = bw
    return out


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.maximum(a.value, 0.0), _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g * (a.value > 0.0)

    out._backward = bw
    return out


def elu(a) -> Tensor:
    """Exponential linear unit with unit negative-branch scale."""
    a = as_tensor(a)
    pos = a.value > 0.0
    # expm1 is evaluated on the positive branch too and discarded; suppress
    # the spurious overflow warning that can generate.
    with np.errstate(over="ignore"):
        value = np.where(pos, a.value, np.expm1(a.value))
    out = Tensor(value, _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g * np.where(pos, 1.0, np.exp(np.minimum(a.value, 0.0)))

    out._backward = bw
    return out


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    s = expit(a.value)
    out = Tensor(s, _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g * s * (1.0 - s)

    out._backward = bw
    return out


def masked_softmax_rows(a, mask) -> Tensor:
    """Row-wise softmax over the entries where ``mask`` is True.

    Masked entries are exactly zero in the output. Every row must keep at
    least one unmasked entry. Stable under large scores: the row maximum
    is subtracted before exponentiation.
    """
    a = as_tensor(a)
    mask = np.asarray(mask, dtype=bool)
    if a.value.ndim != 2 or mask.shape != a.shape:
        raise ShapeError(f"masked_softmax_rows: mask {mask.shape} does not match {a.shape}")
    if not mask.any(axis=1).all():
        raise DegenerateSoftmaxError("softmax row with every entry masked")
    z = np.where(mask, a.value, -np.inf)
    m = z.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        e = np.exp(z - m)
    s = e.sum(axis=1, keepdims=True)
    out_val = e / s
    out = Tensor(out_val, _parents=(a,))

    def bw(g: Array) -> None:
        inner = (g * out_val).sum(axis=1, keepdims=True)
        a.grad += out_val * (g - inner)

    out._backward = bw
    return out


def tsum(a) -> Tensor:
    """Reduce to a scalar by summing every entry."""
    a = as_tensor(a)
    out = Tensor(a.value.sum(), _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g

    out._backward = bw
    return out


def mean(a) -> Tensor:
    a = as_tensor(a)
    n = a.value.size
    if n == 0:
        raise ShapeError("mean of an empty tensor")
    out = Tensor(a.value.mean(), _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += g / n

    out._backward = bw
    return out


def square(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.value * a.value, _parents=(a,))

    def bw(g: Array) -> None:
        a.grad += 2.0 * a.value * g

    out._backward = bw
    return out


def sqrt(a) -> Tensor:
    """Elementwise square root; the derivative at exactly zero is taken as 0."""
    a = as_tensor(a)
    if np.any(a.value < 0.0):
        raise NumericError("sqrt of a negative value")
    root = np.sqrt(a.value)
    out = Tensor(root, _parents=(a,))

    def bw(g: Array) -> None:
        safe = np.where(root > 0.0, root, 1.0)
        a.grad += g * np.where(root > 0.0, 0.5 / safe, 0.0)

    out._backward = bw
    return out
