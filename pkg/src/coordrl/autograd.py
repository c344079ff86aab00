"""Reverse-mode automatic differentiation on numpy arrays.

The graph is built eagerly: every operation returns a new Tensor that keeps
its value, its parent nodes and one vector-Jacobian closure per parent.
``backward()`` seeds the (scalar) output with 1 and walks the graph in
reverse topological order exactly once, accumulating gradients into
``Tensor.grad``.

Only the operations the networks actually need exist here.  Broadcasting is
supported just far enough for bias vectors and gain/shift rows; gradients of
broadcast operands are summed back to the operand's shape.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Array = np.ndarray


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A node in the compute graph: a value plus how to push gradients back."""

    __slots__ = ("data", "grad", "_parents", "_vjps")

    def __init__(
        self,
        data,
        parents: tuple["Tensor", ...] = (),
        vjps: tuple[Callable[[Array], Array], ...] = (),
    ):
        self.data = np.asarray(data, dtype=None if hasattr(data, "dtype") else np.float64)
        self.grad: Array | None = None
        self._parents = parents
        self._vjps = vjps

    # -- niceties -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    def item(self) -> float:
        return float(self.data)

    # -- graph construction -------------------------------------------------

    def _coerce(self, other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(np.asarray(other, dtype=self.data.dtype))

    def __add__(self, other) -> "Tensor":
        other = self._coerce(other)
        out = self.data + other.data
        return Tensor(
            out,
            (self, other),
            (
                lambda g, s=self.data.shape: _unbroadcast(g, s),
                lambda g, s=other.data.shape: _unbroadcast(g, s),
            ),
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return Tensor(-self.data, (self,), (lambda g: -g,))

    def __sub__(self, other) -> "Tensor":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Tensor":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self.data, other.data
        return Tensor(
            a * b,
            (self, other),
            (
                lambda g, b=b, s=a.shape: _unbroadcast(g * b, s),
                lambda g, a=a, s=b.shape: _unbroadcast(g * a, s),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self.data, other.data
        out = a / b
        return Tensor(
            out,
            (self, other),
            (
                lambda g, b=b, s=a.shape: _unbroadcast(g / b, s),
                lambda g, a=a, b=b, s=b.shape: _unbroadcast(-g * a / (b * b), s),
            ),
        )

    def __pow__(self, exponent: float) -> "Tensor":
        if not isinstance(exponent, (int, float)):
            raise TypeError("only constant exponents are supported")
        a = self.data
        out = a ** exponent
        return Tensor(
            out,
            (self,),
            (lambda g, a=a, c=exponent: g * c * a ** (c - 1.0),),
        )

    def __matmul__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self.data, other.data
        if a.ndim != 2 or b.ndim != 2:
            raise ValueError(f"matmul expects 2-d operands, got {a.shape} @ {b.shape}")
        return Tensor(
            a @ b,
            (self, other),
            (
                lambda g, b=b: g @ b.T,
                lambda g, a=a: a.T @ g,
            ),
        )

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor(out, (self,), (lambda g, o=out: g * o,))

    def log(self) -> "Tensor":
        a = self.data
        return Tensor(np.log(a), (self,), (lambda g, a=a: g / a,))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.data)
        return Tensor(out, (self,), (lambda g, o=out: g * (1.0 - o * o),))

    def relu(self) -> "Tensor":
        mask = self.data > 0
        return Tensor(
            np.where(mask, self.data, 0.0),
            (self,),
            (lambda g, m=mask: g * m,),
        )

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self.data
        out = a.sum(axis=axis, keepdims=keepdims)

        def vjp(g, a_shape=a.shape, axis=axis, keepdims=keepdims):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, a_shape).copy()

        return Tensor(out, (self,), (vjp,))

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self.data
        count = a.size if axis is None else a.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    # -- backward pass -------------------------------------------------------

    def backward(self) -> None:
        """Accumulate gradients of this (scalar) node into the whole graph.

        Each node's closure runs exactly once, in reverse topological order.
        A non-finite gradient anywhere is a hard error.
        """
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar output, got shape {self.data.shape}")

        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))

        self.grad = np.ones_like(self.data) if self.grad is None else self.grad + np.ones_like(self.data)
        for node in reversed(topo):
            g = node.grad
            if g is None:
                continue
            if not np.isfinite(np.sum(g)):
                raise RuntimeError("non-finite gradient encountered during backward")
            for parent, vjp in zip(node._parents, node._vjps):
                contrib = vjp(g)
                parent.grad = contrib if parent.grad is None else parent.grad + contrib


class Param(Tensor):
    """A named leaf tensor holding learnable values."""

    __slots__ = ("name",)

    def __init__(self, name: str, data):
        super().__init__(np.asarray(data))
        self.name = name

    def __repr__(self) -> str:
        return f"Param({self.name!r}, shape={self.data.shape})"


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    """Concatenate along `axis`; gradients split back by the input widths."""
    tensors = list(tensors)
    datas = [t.data for t in tensors]
    sizes = [d.shape[axis] for d in datas]
    offsets = np.cumsum([0] + sizes)

    def make_vjp(lo, hi):
        def vjp(g):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            return g[tuple(index)]

        return vjp

    vjps = tuple(make_vjp(int(offsets[k]), int(offsets[k + 1])) for k in range(len(tensors)))
    return Tensor(np.concatenate(datas, axis=axis), tuple(tensors), vjps)


def constant(data, dtype=None) -> Tensor:
    """A leaf node that participates in the graph but is never updated."""
    return Tensor(np.asarray(data, dtype=dtype))


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None


def finite_diff_check(
    build_loss: Callable[[], Tensor],
    params: Sequence[Param],
    eps: float = 1e-5,
) -> float:
    """Worst-case discrepancy between backprop and central finite differences.

    `build_loss` must rebuild the graph from the params' current data and
    return the scalar loss.  Any stochastic draws inside it must be frozen by
    the caller.  The returned error is relative with a unit floor, so
    near-zero gradients are compared absolutely.  Test helper: expects 64-bit
    params and small models.
    """
    loss = build_loss()
    zero_grads(params)
    for p in params:
        p.grad = None
    loss.backward()
    grads = [np.zeros_like(p.data) if p.grad is None else np.array(p.grad, copy=True) for p in params]

    worst = 0.0
    for p, g in zip(params, grads):
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up = float(build_loss().data)
            flat[k] = orig - eps
            down = float(build_loss().data)
            flat[k] = orig
            fd = (up - down) / (2.0 * eps)
            ad = float(gflat[k])
            err = abs(ad - fd) / max(1.0, abs(ad), abs(fd))
            worst = max(worst, err)
    return worst
