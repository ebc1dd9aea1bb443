"""Dense tensors with reverse-mode automatic differentiation.

Small numpy-backed autograd engine sized for this package: 2-D matrices
(plus 0-d scalars from reductions), two precision modes (float32 for
training and rendering, float64 for test oracles), and a fixed primitive
set. Ops record onto an implicit graph carried by the output tensors;
``Tape`` exposes the recorded graph for a single reverse sweep or a
forward replay.

The ``matmul`` primitive has a ``column_stable`` mode whose reduction
order per output element depends only on the contraction length, never
on the number of columns of the right operand. Rendering uses it so a
pixel's value is bit-identical whether it is computed alone, in a
subset, or in a full grid. BLAS does not guarantee this, so the stable
kernel avoids it entirely.

Gradient functions are themselves built from these primitives, so
``grad(..., create_graph=True)`` yields differentiable gradients
(needed for the discriminator's gradient penalty). Exceptions: softplus
treats its sigmoid factor as a constant in second-order graphs, which
is fine because no supported loss differentiates through it twice.
"""

from __future__ import annotations

import itertools
import threading
from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DimensionError,
    EvaluationError,
    KinkError,
    TapeConsumedError,
)

_SID = itertools.count()

FLOAT_DTYPES = (np.float32, np.float64)


class _ThreadState(threading.local):
    def __init__(self):
        self.grad_enabled = True
        self.kink_watch = []


_STATE = _ThreadState()


@contextmanager
def no_grad():
    """Disable graph recording inside the block."""
    prev = _STATE.grad_enabled
    _STATE.grad_enabled = False
    try:
        yield
    finally:
        _STATE.grad_enabled = prev


def grad_enabled() -> bool:
    return _STATE.grad_enabled


class Tensor:
    """Immutable dense array that may participate in a gradient graph.

    ``data`` is a numpy array of dtype float32 or float64. Tensors
    produced by ops are never mutated; optimizers rebind ``data`` on
    leaf parameters between steps instead of writing through views.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn",
                 "_forward_fn", "_op", "_sid", "_tape")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in FLOAT_DTYPES:
            arr = arr.astype(np.float32 if dtype is None else dtype)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._grad_fn = None
        self._forward_fn = None
        self._op = "leaf"
        self._sid = next(_SID)
        self._tape: Tape | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def astype(self, dtype) -> "Tensor":
        return Tensor(self.data.astype(dtype), requires_grad=self.requires_grad)

    def backward(self) -> None:
        """Run the reverse sweep from this scalar output.

        Populates ``grad`` on every reachable requires-grad leaf. A
        second call raises ``TapeConsumedError``; use ``grad()`` for
        repeated or partial differentiation.
        """
        if self._tape is None:
            self._tape = Tape(self)
        self._tape.backward()

    def __repr__(self) -> str:
        flags = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flags}, op={self._op})"

    # operator sugar
    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_scalar(self, other)

    def __radd__(self, other):
        return add_scalar(self, other)

    def __sub__(self, other):
        return sub(self, other) if isinstance(other, Tensor) else add_scalar(self, -other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def tensor(data, requires_grad: bool = False, dtype=np.float32) -> Tensor:
    return Tensor(np.array(data, dtype=dtype), requires_grad=requires_grad)


def zeros(shape, dtype=np.float32, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=requires_grad)


def ones(shape, dtype=np.float32, requires_grad: bool = False) -> Tensor:
    return Tensor(np.ones(shape, dtype=dtype), requires_grad=requires_grad)


def _check_same_dtype(op: str, *ts: Tensor) -> None:
    dts = {t.data.dtype for t in ts}
    if len(dts) > 1:
        raise DimensionError(f"{op}: mixed dtypes {sorted(str(d) for d in dts)}")


def _make(op: str, data: np.ndarray, parents: tuple[Tensor, ...],
          grad_fn, forward_fn) -> Tensor:
    out = Tensor(data)
    if _STATE.grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._grad_fn = grad_fn
        out._forward_fn = forward_fn
        out._op = op
    return out


# ---------------------------------------------------------------------------
# forward kernels (shared by op construction and tape replay)

def _k_add(a, b):
    return a + b


def _k_sub(a, b):
    return a - b


def _k_neg(a):
    return -a


def _k_mul(a, b):
    return a * b


def _k_matmul(a, b):
    return a @ b


def _k_matmul_stable(a, b):
    # Fixed contraction order built from elementwise ufuncs only: the
    # value of output column j depends on b[:, j] alone, bit-exactly,
    # regardless of how many other columns are present.
    out = a[:, 0:1] * b[0:1, :]
    for k in range(1, a.shape[1]):
        out += a[:, k : k + 1] * b[k : k + 1, :]
    return out


def _k_leaky(a, slope):
    return np.where(a > 0, a, a * np.asarray(slope, dtype=a.dtype))


def _k_softplus(a):
    return np.logaddexp(np.asarray(0, dtype=a.dtype), a)


def _k_sum(a):
    return np.asarray(np.sum(a), dtype=a.dtype)


def _k_sum_axis(a, axis):
    return np.sum(a, axis=axis, keepdims=True)


def _k_mse(a, b):
    d = a - b
    return np.asarray(np.mean(d * d), dtype=a.dtype)


# ---------------------------------------------------------------------------
# primitive ops

def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype("add", a, b)
    if a.shape != b.shape:
        raise DimensionError(f"add: shapes {a.shape} vs {b.shape}")

    def grad_fn(up, wanted):
        return (up if wanted[0] else None, up if wanted[1] else None)

    return _make("add", _k_add(a.data, b.data), (a, b), grad_fn, _k_add)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype("sub", a, b)
    if a.shape != b.shape:
        raise DimensionError(f"sub: shapes {a.shape} vs {b.shape}")

    def grad_fn(up, wanted):
        return (up if wanted[0] else None, neg(up) if wanted[1] else None)

    return _make("sub", _k_sub(a.data, b.data), (a, b), grad_fn, _k_sub)


def neg(a: Tensor) -> Tensor:
    def grad_fn(up, wanted):
        return (neg(up),)

    return _make("neg", _k_neg(a.data), (a,), grad_fn, _k_neg)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (Hadamard) product of same-shape tensors."""
    _check_same_dtype("mul", a, b)
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes {a.shape} vs {b.shape}")

    def grad_fn(up, wanted):
        ga = mul(up, b.detach() if not b.requires_grad else b) if wanted[0] else None
        gb = mul(up, a.detach() if not a.requires_grad else a) if wanted[1] else None
        return (ga, gb)

    return _make("mul", _k_mul(a.data, b.data), (a, b), grad_fn, _k_mul)


def scale(a: Tensor, c: float) -> Tensor:
    """Multiply by a python scalar (dtype-preserving)."""
    c = float(c)

    def grad_fn(up, wanted):
        return (scale(up, c),)

    def fwd(a_, _c=c):
        return a_ * _c

    return _make("scale", a.data * c, (a,), grad_fn, fwd)


def add_scalar(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def grad_fn(up, wanted):
        return (up,)

    def fwd(a_, _c=c):
        return a_ + _c

    return _make("add_scalar", a.data + c, (a,), grad_fn, fwd)


def mul_scalar(a: Tensor, s: Tensor) -> Tensor:
    """Multiply a tensor by a 0-d (or single-element) scalar tensor."""
    _check_same_dtype("mul_scalar", a, s)
    if s.data.size != 1:
        raise DimensionError(f"mul_scalar: scalar operand has shape {s.shape}")

    def grad_fn(up, wanted):
        ga = mul_scalar(up, s) if wanted[0] else None
        gs = None
        if wanted[1]:
            gs = reshape(total(mul(up, a.detach() if not a.requires_grad else a)), s.shape)
        return (ga, gs)

    def fwd(a_, s_):
        return a_ * s_.reshape(s.data.shape)

    return _make("mul_scalar", a.data * s.data.reshape(s.data.shape), (a, s), grad_fn, fwd)


def matmul(a: Tensor, b: Tensor, column_stable: bool = False) -> Tensor:
    """2-D matrix product.

    ``column_stable=True`` selects the fixed-order kernel whose per-column
    results do not depend on the column count of ``b``; rendering paths
    require it. Gradients always use the fast kernel.
    """
    _check_same_dtype("matmul", a, b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: shapes {a.shape} vs {b.shape}")
    kernel = _k_matmul_stable if column_stable else _k_matmul

    def grad_fn(up, wanted):
        ga = matmul(up, transpose(b.detach() if not b.requires_grad else b)) if wanted[0] else None
        gb = matmul(transpose(a.detach() if not a.requires_grad else a), up) if wanted[1] else None
        return (ga, gb)

    return _make("matmul", kernel(a.data, b.data), (a, b), grad_fn, kernel)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise DimensionError(f"transpose: expected 2-D, got {a.shape}")

    def grad_fn(up, wanted):
        return (transpose(up),)

    def fwd(a_):
        return a_.T

    return _make("transpose", a.data.T, (a,), grad_fn, fwd)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape, dtype=np.int64)) != a.data.size:
        raise DimensionError(f"reshape: {a.shape} -> {shape}")
    old = a.data.shape

    def grad_fn(up, wanted):
        return (reshape(up, old),)

    def fwd(a_, _s=shape):
        return np.reshape(a_, _s)

    return _make("reshape", np.reshape(a.data, shape), (a,), grad_fn, fwd)


def add_bias(m: Tensor, col: Tensor) -> Tensor:
    """Add an (n, 1) bias column to every column of an (n, p) matrix.

    The one broadcasting form the engine supports.
    """
    _check_same_dtype("add_bias", m, col)
    if m.data.ndim != 2 or col.data.shape != (m.data.shape[0], 1):
        raise DimensionError(f"add_bias: shapes {m.shape} vs {col.shape}")

    def grad_fn(up, wanted):
        gm = up if wanted[0] else None
        gc = sum_axis(up, 1) if wanted[1] else None
        return (gm, gc)

    return _make("add_bias", _k_add(m.data, col.data), (m, col), grad_fn, _k_add)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    """Leaky rectifier; the subgradient at 0 is the negative-side slope."""
    slope = float(slope)
    if _STATE.kink_watch:
        closest = float(np.min(np.abs(a.data))) if a.data.size else np.inf
        for rec in _STATE.kink_watch:
            rec[0] = min(rec[0], closest)

    def grad_fn(up, wanted):
        mask = np.where(a.data > 0, np.asarray(1, dtype=a.data.dtype),
                        np.asarray(slope, dtype=a.data.dtype))
        return (mul(up, Tensor(mask)),)

    def fwd(a_, _s=slope):
        return _k_leaky(a_, _s)

    return _make("leaky_relu", _k_leaky(a.data, slope), (a,), grad_fn, fwd)


def softplus(a: Tensor) -> Tensor:
    def grad_fn(up, wanted):
        x = a.data
        s = np.exp(-np.abs(x))
        sig = np.where(x >= 0, 1.0 / (1.0 + s), s / (1.0 + s)).astype(x.dtype)
        return (mul(up, Tensor(sig)),)

    return _make("softplus", _k_softplus(a.data), (a,), grad_fn, _k_softplus)


def total(a: Tensor) -> Tensor:
    """Sum of all elements (0-d result)."""

    def grad_fn(up, wanted):
        return (mul_scalar(ones(a.shape, dtype=a.dtype.type), up),)

    return _make("sum", _k_sum(a.data), (a,), grad_fn, _k_sum)


def mean(a: Tensor) -> Tensor:
    n = a.data.size

    def grad_fn(up, wanted):
        return (mul_scalar(Tensor(np.full(a.shape, 1.0 / n, dtype=a.dtype)), up),)

    def fwd(a_):
        return np.asarray(np.mean(a_), dtype=a_.dtype)

    return _make("mean", fwd(a.data), (a,), grad_fn, fwd)


def sum_axis(a: Tensor, axis: int) -> Tensor:
    """Sum over one axis, keeping it as size 1."""
    if a.data.ndim != 2:
        raise DimensionError(f"sum_axis: expected 2-D, got {a.shape}")
    axis = int(axis)

    def grad_fn(up, wanted):
        if axis == 1:
            return (add_bias(zeros(a.shape, dtype=a.dtype.type), up),)
        return (transpose(add_bias(zeros(a.shape[::-1], dtype=a.dtype.type), transpose(up))),)

    def fwd(a_, _ax=axis):
        return _k_sum_axis(a_, _ax)

    return _make("sum_axis", _k_sum_axis(a.data, axis), (a,), grad_fn, fwd)


def mse(a: Tensor, b: Tensor) -> Tensor:
    """Mean squared error, a single fused node."""
    _check_same_dtype("mse", a, b)
    if a.shape != b.shape:
        raise DimensionError(f"mse: shapes {a.shape} vs {b.shape}")
    n = a.data.size

    def grad_fn(up, wanted):
        d = sub(a, b)
        g = mul_scalar(scale(d, 2.0 / n), up)
        ga = g if wanted[0] else None
        gb = neg(g) if wanted[1] else None
        return (ga, gb)

    return _make("mse", _k_mse(a.data, b.data), (a, b), grad_fn, _k_mse)


def gather_rows(a: Tensor, indices) -> Tensor:
    idx = np.asarray(indices, dtype=np.int64)
    if a.data.ndim != 2 or idx.ndim != 1:
        raise DimensionError(f"gather_rows: matrix {a.shape}, indices {idx.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise ArgumentError(f"gather_rows: index out of range for {a.shape[0]} rows")
    n_rows = a.shape[0]

    def grad_fn(up, wanted):
        return (scatter_rows(up, idx, n_rows),)

    def fwd(a_, _i=idx):
        return a_[_i, :]

    return _make("gather_rows", a.data[idx, :], (a,), grad_fn, fwd)


def scatter_rows(a: Tensor, indices, n_rows: int) -> Tensor:
    """Place rows of ``a`` into a zero matrix of ``n_rows`` rows, adding duplicates."""
    idx = np.asarray(indices, dtype=np.int64)
    if a.data.ndim != 2 or idx.shape != (a.shape[0],):
        raise DimensionError(f"scatter_rows: matrix {a.shape}, indices {idx.shape}")

    def grad_fn(up, wanted):
        return (gather_rows(up, idx),)

    def fwd(a_, _i=idx, _n=int(n_rows)):
        out = np.zeros((_n, a_.shape[1]), dtype=a_.dtype)
        np.add.at(out, _i, a_)
        return out

    return _make("scatter_rows", fwd(a.data), (a,), grad_fn, fwd)


def _slice_pad(axis: int):
    def slice_op(a: Tensor, start: int, stop: int) -> Tensor:
        if a.data.ndim != 2:
            raise DimensionError("slice: expected 2-D")
        n = a.shape[axis]
        if not (0 <= start <= stop <= n):
            raise ArgumentError(f"slice: [{start}:{stop}] outside 0..{n}")
        before, after = start, n - stop

        def grad_fn(up, wanted):
            return (pad_op(up, before, after),)

        def fwd(a_, _s=start, _t=stop):
            return a_[_s:_t, :] if axis == 0 else a_[:, _s:_t]

        return _make("slice", fwd(a.data), (a,), grad_fn, fwd)

    def pad_op(a: Tensor, before: int, after: int) -> Tensor:
        if a.data.ndim != 2:
            raise DimensionError("pad: expected 2-D")
        before, after = int(before), int(after)
        start, stop = before, before + a.shape[axis]

        def grad_fn(up, wanted):
            return (slice_op(up, start, stop),)

        def fwd(a_, _b=before, _a=after):
            width = ((_b, _a), (0, 0)) if axis == 0 else ((0, 0), (_b, _a))
            return np.pad(a_, width)

        return _make("pad", fwd(a.data), (a,), grad_fn, fwd)

    return slice_op, pad_op


slice_rows, pad_rows = _slice_pad(0)
slice_cols, pad_cols = _slice_pad(1)


def vstack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack along rows, built from pad + add so gradients come for free."""
    tensors = list(tensors)
    total_rows = sum(t.shape[0] for t in tensors)
    out = None
    offset = 0
    for t in tensors:
        piece = pad_rows(t, offset, total_rows - offset - t.shape[0])
        out = piece if out is None else add(out, piece)
        offset += t.shape[0]
    return out


def hstack(tensors: Sequence[Tensor]) -> Tensor:
    tensors = list(tensors)
    total_cols = sum(t.shape[1] for t in tensors)
    out = None
    offset = 0
    for t in tensors:
        piece = pad_cols(t, offset, total_cols - offset - t.shape[1])
        out = piece if out is None else add(out, piece)
        offset += t.shape[1]
    return out


# ---------------------------------------------------------------------------
# reverse sweep

def _toposort(root: Tensor) -> list[Tensor]:
    seen = set()
    stack = [root]
    out = []
    while stack:
        t = stack.pop()
        if id(t) in seen:
            continue
        seen.add(id(t))
        out.append(t)
        stack.extend(t._parents)
    out.sort(key=lambda t: t._sid)
    return out


def _sweep(output: Tensor, nodes: list[Tensor], targets: Sequence[Tensor] | None,
           create_graph: bool) -> dict[int, Tensor]:
    if output.data.size != 1:
        raise ArgumentError(f"backward: output must be scalar, got shape {output.shape}")
    needed = None
    if targets is not None:
        target_ids = {id(t) for t in targets}
        needed = {}
        for t in nodes:  # ascending creation order: parents precede children
            needed[id(t)] = id(t) in target_ids or any(
                needed.get(id(p), False) for p in t._parents
            )
    grads: dict[int, Tensor] = {
        id(output): Tensor(np.ones(output.shape, dtype=output.dtype))
    }

    def run():
        for t in reversed(nodes):
            g = grads.get(id(t))
            if g is None or t._grad_fn is None:
                continue
            wanted = tuple(
                p.requires_grad and (needed is None or needed[id(p)])
                for p in t._parents
            )
            if not any(wanted):
                continue
            contribs = t._grad_fn(g, wanted)
            for p, c in zip(t._parents, contribs):
                if c is None:
                    continue
                prev = grads.get(id(p))
                grads[id(p)] = c if prev is None else add(prev, c)

    if create_graph:
        run()
    else:
        with no_grad():
            run()
    return grads


class Tape:
    """The recorded op graph reachable from one output tensor.

    ``nodes`` lists every tensor of the graph in execution order (a
    topological order). The reverse sweep may run exactly once; replay
    re-executes the recorded forward kernels and must reproduce the
    output bit-identically.
    """

    def __init__(self, output: Tensor):
        self.output = output
        self.nodes = _toposort(output)
        self._consumed = False

    def backward(self) -> None:
        if self._consumed:
            raise TapeConsumedError("tape already ran its reverse sweep")
        self._consumed = True
        grads = _sweep(self.output, self.nodes, None, create_graph=False)
        for t in self.nodes:
            if t.requires_grad and t._grad_fn is None:
                g = grads.get(id(t))
                if g is not None:
                    t.grad = g.data if t.grad is None else t.grad + g.data

    def replay(self) -> np.ndarray:
        """Re-run every recorded forward kernel; returns the output values."""
        values: dict[int, np.ndarray] = {}
        for t in self.nodes:
            if t._forward_fn is None:
                values[id(t)] = t.data
            else:
                values[id(t)] = t._forward_fn(*(values[id(p)] for p in t._parents))
        return values[id(self.output)]


def backward(output: Tensor) -> None:
    output.backward()


def grad(output: Tensor, wrt: Sequence[Tensor], create_graph: bool = False) -> list[Tensor]:
    """Gradient map of a scalar output with respect to ``wrt`` tensors.

    Leaves that do not participate in the graph receive zeros. Does not
    consume tapes and does not touch ``.grad`` fields, so it can run
    repeatedly over one graph (the gradient-penalty path relies on
    this, with ``create_graph=True``).
    """
    wrt = list(wrt)
    nodes = _toposort(output)
    grads = _sweep(output, nodes, wrt, create_graph)
    out = []
    for w in wrt:
        g = grads.get(id(w))
        out.append(g if g is not None else zeros(w.shape, dtype=w.dtype.type))
    return out


# ---------------------------------------------------------------------------
# numeric verification

@contextmanager
def _watch_kinks():
    rec = [np.inf]
    _STATE.kink_watch.append(rec)
    try:
        yield rec
    finally:
        _STATE.kink_watch.remove(rec)


def forward_eval(fn: Callable[..., Tensor], inputs: Iterable[Tensor]) -> tuple[Tensor, Tape]:
    """Evaluate ``fn`` on ``inputs`` and return (output, recorded tape)."""
    out = fn(*inputs)
    if not isinstance(out, Tensor):
        raise ArgumentError("forward_eval: fn must return a Tensor")
    return out, Tape(out)


def gradcheck(fn: Callable[[Tensor], Tensor], point: Tensor, epsilon: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``fn`` must map one tensor to a scalar and be evaluated in float64.
    Raises ``KinkError`` when any rectifier pre-activation at the point
    is within ``10 * epsilon`` of the kink, and ``EvaluationError`` on
    non-finite values.
    """
    if point.data.dtype != np.float64:
        raise ArgumentError("gradcheck: point must be float64")
    epsilon = float(epsilon)
    if epsilon <= 0:
        raise ArgumentError("gradcheck: epsilon must be positive")

    x = Tensor(point.data.copy(), requires_grad=True)
    with _watch_kinks() as rec:
        out = fn(x)
        if out.data.size != 1:
            raise ArgumentError("gradcheck: fn must return a scalar")
        if not np.isfinite(out.data).all():
            raise EvaluationError("gradcheck: fn produced a non-finite value")
        (analytic_t,) = grad(out, [x])
    if rec[0] <= 10.0 * epsilon:
        raise KinkError(
            f"gradcheck: rectifier pre-activation {rec[0]:.3e} within "
            f"10*epsilon={10 * epsilon:.3e} of the kink"
        )
    analytic = analytic_t.data

    flat = point.data.copy().reshape(-1)
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        for sign in (1.0, -1.0):
            flat[i] = orig + sign * epsilon
            val = fn(Tensor(flat.reshape(point.data.shape))).data
            if not np.isfinite(val).all():
                raise EvaluationError(f"gradcheck: non-finite value at coordinate {i}")
            numeric[i] += sign * float(val)
        flat[i] = orig
    numeric /= 2.0 * epsilon
    numeric = numeric.reshape(point.data.shape)

    denom = np.maximum(1.0, np.abs(analytic))
    return float(np.max(np.abs(analytic - numeric) / denom))
