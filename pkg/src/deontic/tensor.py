"""Dense float64 tensors with recorded reverse-mode differentiation.

Provides exactly the operations the classifiers need: matrix products,
elementwise arithmetic, the usual activations, softmax, concatenation,
slicing, row gathering and categorical cross-entropy.  Operations on
tensors attached to a :class:`ComputationRecord` are taped so that
:func:`backward` can return gradients for every registered leaf.
Tensors without a record are plain values; running the same code on
them performs the forward computation with no recording overhead.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "ComputationRecord",
    "ShapeError",
    "DomainError",
    "matmul",
    "add",
    "sub",
    "mul",
    "neg",
    "tanh",
    "sigmoid",
    "exp",
    "log",
    "softmax",
    "concat",
    "slice_axis",
    "reshape",
    "gather_rows",
    "stack_rows",
    "cross_entropy",
    "backward",
    "finite_diff_grad",
]

PROB_CLAMP = 1e-12


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DomainError(ValueError):
    """A value lies outside the mathematical domain of an operation."""


def _as_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    return arr


class Tensor:
    """A dense float64 array, optionally attached to a computation record.

    Detached tensors (``record is None``) are immutable values as far as
    this library is concerned and may be shared freely.  Attached tensors
    are nodes of exactly one record and must not be mixed with nodes of
    another record.
    """

    __slots__ = ("data", "record", "node_id")

    def __init__(self, values, record: "ComputationRecord | None" = None,
                 node_id: int | None = None):
        self.data = _as_array(values)
        self.record = record
        self.node_id = node_id

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() requires a scalar tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __float__(self) -> float:
        return self.item()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, recorded={self.record is not None})"

    # Operator sugar; all dispatch to the module-level functions.
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

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


class ComputationRecord:
    """Append-only tape of one forward pass.

    Nodes are stored in creation order, which is topological by
    construction: an operation can only consume tensors that already
    exist.  A record is owned by a single execution context; distinct
    records may be used concurrently.
    """

    __slots__ = ("_inputs", "_vjps", "_shapes", "_leaf_ids")

    def __init__(self):
        self._inputs: list[tuple[int, ...]] = []
        self._vjps: list[Callable[[np.ndarray], Sequence[np.ndarray | None]] | None] = []
        self._shapes: list[tuple[int, ...]] = []
        self._leaf_ids: list[int] = []

    def __len__(self) -> int:
        return len(self._inputs)

    @property
    def leaf_ids(self) -> tuple[int, ...]:
        return tuple(self._leaf_ids)

    def leaf(self, values) -> Tensor:
        """Register a leaf (a learnable parameter) and return its tensor."""
        data = _as_array(values)
        nid = len(self._inputs)
        self._inputs.append(())
        self._vjps.append(None)
        self._shapes.append(data.shape)
        self._leaf_ids.append(nid)
        return Tensor(data, record=self, node_id=nid)

    def _emit(self, data: np.ndarray, input_ids: tuple[int, ...],
              vjp: Callable[[np.ndarray], Sequence[np.ndarray | None]]) -> Tensor:
        nid = len(self._inputs)
        self._inputs.append(input_ids)
        self._vjps.append(vjp)
        self._shapes.append(data.shape)
        return Tensor(data, record=self, node_id=nid)


def _record_of(*operands) -> ComputationRecord | None:
    rec = None
    for t in operands:
        if isinstance(t, Tensor) and t.record is not None:
            if rec is None:
                rec = t.record
            elif rec is not t.record:
                raise ValueError("operands belong to different computation records")
    return rec


def _apply(data: np.ndarray, parents: Sequence,
           vjp: Callable[[np.ndarray], Sequence[np.ndarray | None]]) -> Tensor:
    rec = _record_of(*parents)
    if rec is None:
        return Tensor(data)
    ids = tuple(
        p.node_id if isinstance(p, Tensor) and p.record is rec else -1
        for p in parents
    )
    return rec._emit(data, ids, vjp)


def _data(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else _as_array(x)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, d in enumerate(shape) if d == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise binary operations


def _binary(a, b, fwd, vjp_pair):
    da, db = _data(a), _data(b)
    try:
        out = fwd(da, db)
    except ValueError:
        raise ShapeError(
            f"incompatible shapes {da.shape} and {db.shape}") from None

    def vjp(g):
        ga, gb = vjp_pair(g, da, db)
        return (_unbroadcast(ga, da.shape), _unbroadcast(gb, db.shape))

    return _apply(out, (a, b), vjp)


def add(a, b) -> Tensor:
    """Elementwise sum; operands may broadcast (scalar, row or column)."""
    return _binary(a, b, np.add, lambda g, da, db: (g, g))


def sub(a, b) -> Tensor:
    """Elementwise difference with the same broadcasting rules as add."""
    return _binary(a, b, np.subtract, lambda g, da, db: (g, -g))


def mul(a, b) -> Tensor:
    """Elementwise (Hadamard) product with broadcasting."""
    return _binary(a, b, np.multiply, lambda g, da, db: (g * db, g * da))


# ---------------------------------------------------------------------------
# elementwise unary operations


def _unary(x, out, vjp_local):
    def vjp(g):
        return (vjp_local(g),)
    return _apply(out, (x,), vjp)


def neg(x) -> Tensor:
    return _unary(x, -_data(x), lambda g: -g)


def tanh(x) -> Tensor:
    out = np.tanh(_data(x))
    return _unary(x, out, lambda g: g * (1.0 - out * out))


def sigmoid(x) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-_data(x)))
    return _unary(x, out, lambda g: g * out * (1.0 - out))


def exp(x) -> Tensor:
    out = np.exp(_data(x))
    return _unary(x, out, lambda g: g * out)


def log(x) -> Tensor:
    d = _data(x)
    if np.any(d <= 0.0):
        idx = int(np.flatnonzero(d <= 0.0)[0])
        raise DomainError(f"log of non-positive entry at flat index {idx}")
    return _unary(x, np.log(d), lambda g: g / d)


# ---------------------------------------------------------------------------
# structural operations


def matmul(a, b) -> Tensor:
    """Matrix product; 1-D operands are treated as a row (left) or column (right)."""
    da, db = _data(a), _data(b)
    if da.ndim > 2 or db.ndim > 2 or da.ndim == 0 or db.ndim == 0:
        raise ShapeError(f"matmul supports 1-D and 2-D operands, got {da.shape} and {db.shape}")
    a2 = da[None, :] if da.ndim == 1 else da
    b2 = db[:, None] if db.ndim == 1 else db
    if a2.shape[1] != b2.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {da.shape} vs {db.shape}")
    out2 = a2 @ b2
    out = out2
    if da.ndim == 1:
        out = out[0]
    if db.ndim == 1:
        out = out[..., 0]

    def vjp(g):
        g2 = g.reshape(out2.shape)
        ga = (g2 @ b2.T).reshape(da.shape)
        gb = (a2.T @ g2).reshape(db.shape)
        return (ga, gb)

    return _apply(out, (a, b), vjp)


def softmax(x) -> Tensor:
    """Numerically stable softmax of a 1-D tensor (max-subtracted)."""
    d = _data(x)
    if d.ndim != 1 or d.size == 0:
        raise ShapeError(f"softmax requires a non-empty 1-D tensor, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DomainError("softmax input contains non-finite entries")
    e = np.exp(d - d.max())
    out = e / e.sum()

    def vjp(g):
        return (out * (g - float(g @ out)),)

    return _apply(out, (x,), vjp)


def concat(parts: Sequence, axis: int = 0) -> Tensor:
    """Concatenate tensors along `axis`; all other extents must agree."""
    if len(parts) == 0:
        raise ShapeError("concat requires at least one part")
    datas = [_data(p) for p in parts]
    ndim = datas[0].ndim
    if axis < 0 or axis >= max(ndim, 1):
        raise ShapeError(f"concat axis {axis} out of range for rank {ndim}")
    for d in datas[1:]:
        if d.ndim != ndim:
            raise ShapeError(f"concat rank mismatch: {datas[0].shape} vs {d.shape}")
        for ax in range(ndim):
            if ax != axis and d.shape[ax] != datas[0].shape[ax]:
                raise ShapeError(
                    f"concat extent mismatch on axis {ax}: {datas[0].shape} vs {d.shape}")
    out = np.concatenate(datas, axis=axis) if len(datas) > 1 else datas[0].copy()
    offsets = np.cumsum([0] + [d.shape[axis] for d in datas])

    def vjp(g):
        sl = [slice(None)] * ndim
        grads = []
        for i in range(len(datas)):
            sl[axis] = slice(int(offsets[i]), int(offsets[i + 1]))
            grads.append(g[tuple(sl)])
        return grads

    return _apply(out, tuple(parts), vjp)


def slice_axis(x, axis: int, start: int, stop: int) -> Tensor:
    """Contiguous slice [start, stop) along one axis."""
    d = _data(x)
    if axis < 0 or axis >= d.ndim:
        raise ShapeError(f"slice axis {axis} out of range for shape {d.shape}")
    if not (0 <= start < stop <= d.shape[axis]):
        raise ShapeError(
            f"slice [{start}:{stop}) out of bounds for extent {d.shape[axis]}")
    sl = [slice(None)] * d.ndim
    sl[axis] = slice(start, stop)
    sl = tuple(sl)
    out = d[sl]

    def vjp(g):
        full = np.zeros_like(d)
        full[sl] = g
        return (full,)

    return _apply(out, (x,), vjp)


def reshape(x, shape: Sequence[int]) -> Tensor:
    d = _data(x)
    shape = tuple(int(s) for s in shape)
    if math.prod(shape) != d.size:
        raise ShapeError(f"cannot reshape {d.shape} to {shape}")
    return _apply(d.reshape(shape), (x,), lambda g: (g.reshape(d.shape),))


def gather_rows(x, indices) -> Tensor:
    """Select rows of a 2-D tensor; duplicate indices accumulate gradient."""
    d = _data(x)
    if d.ndim != 2:
        raise ShapeError(f"gather_rows requires a 2-D tensor, got shape {d.shape}")
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError("gather_rows indices must be a flat sequence")
    if idx.size and (idx.min() < 0 or idx.max() >= d.shape[0]):
        raise IndexError(f"row index out of range for extent {d.shape[0]}")
    out = d[idx]

    def vjp(g):
        full = np.zeros_like(d)
        np.add.at(full, idx, g)
        return (full,)

    return _apply(out, (x,), vjp)


def stack_rows(parts: Sequence) -> Tensor:
    """Stack 1-D tensors of equal length into a matrix, one per row."""
    rows = [reshape(p, (1, _data(p).size)) for p in parts]
    return concat(rows, axis=0)


# ---------------------------------------------------------------------------
# loss and differentiation


def cross_entropy(probs, gold: int) -> Tensor:
    """Negative log probability of the gold class.

    `probs` must be a 1-D distribution summing to 1 within 1e-6; the gold
    probability is clamped to PROB_CLAMP before the log so that a
    vanishing probability yields a large finite loss instead of infinity.
    """
    d = _data(probs)
    if d.ndim != 1 or d.size == 0:
        raise ShapeError(f"cross_entropy requires a 1-D distribution, got shape {d.shape}")
    if abs(float(d.sum()) - 1.0) > 1e-6:
        raise DomainError(f"probabilities sum to {d.sum():.9f}, not 1")
    gold = int(gold)
    if not (0 <= gold < d.size):
        raise IndexError(f"gold class {gold} out of range for {d.size} classes")
    p = float(d[gold])
    clamped = max(p, PROB_CLAMP)
    out = np.asarray(-math.log(clamped))

    def vjp(g):
        full = np.zeros_like(d)
        if p >= PROB_CLAMP:
            full[gold] = -float(g) / p
        return (full,)

    return _apply(out, (probs,), vjp)


def backward(loss: Tensor) -> dict[int, Tensor]:
    """Gradients of a recorded scalar loss for every leaf of its record.

    Leaves that do not participate in the loss get zero gradients.
    When a node feeds several consumers its gradient contributions
    accumulate additively.
    """
    if not isinstance(loss, Tensor) or loss.record is None:
        raise ValueError("backward requires a tensor attached to a computation record")
    if loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.shape}")
    rec = loss.record
    grads: list[np.ndarray | None] = [None] * len(rec)
    grads[loss.node_id] = np.ones_like(loss.data)
    for nid in range(loss.node_id, -1, -1):
        g = grads[nid]
        if g is None:
            continue
        vjp = rec._vjps[nid]
        if vjp is None:
            continue
        for pid, pg in zip(rec._inputs[nid], vjp(g)):
            if pid < 0 or pg is None:
                continue
            # accumulate out of place: vjp outputs may alias upstream buffers
            grads[pid] = pg if grads[pid] is None else grads[pid] + pg
    return {
        nid: Tensor(grads[nid] if grads[nid] is not None else np.zeros(rec._shapes[nid]))
        for nid in rec.leaf_ids
    }


def finite_diff_grad(f: Callable[[Tensor], "Tensor | float"], x,
                     h: float = 1e-5) -> Tensor:
    """Central-difference gradient of a scalar function, one coordinate at a time.

    The testing oracle for every analytic gradient in this library: it never
    touches the recorded backward pass.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    base = _data(x).copy()
    grad = np.zeros_like(base)
    flat = base.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        hi = float(f(Tensor(base.copy())))
        flat[i] = keep - h
        lo = float(f(Tensor(base.copy())))
        flat[i] = keep
        gflat[i] = (hi - lo) / (2.0 * h)
    return Tensor(grad)
