"""Dense 2-D tensors with tape-based reverse-mode differentiation.

Everything is a (rows, cols) float64 matrix; batch structure lives in the
rows. Operations record themselves on a :class:`Tape` whenever at least
one input is tracked, and :meth:`Tape.backward` replays the recorded steps
once, in reverse creation order. Forward results are checked for NaN/Inf
and raise :class:`NonFiniteError` rather than propagating garbage.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NonFiniteError",
    "Tensor",
    "Tape",
    "matmul",
    "add",
    "add_row_broadcast",
    "scale",
    "neg",
    "relu",
    "sigmoid",
    "softplus",
    "concat_cols",
    "sum_all",
    "select_cols",
    "embed_cols",
    "gather_rows",
    "scatter_add_rows",
    "softmax_rows",
    "bce_loss",
    "check_gradient",
    "stable_sigmoid",
]


class NonFiniteError(ArithmeticError):
    """An operation produced (or received) NaN or Inf."""


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"tensors are 2-D, got shape {arr.shape}")
    return arr


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function without overflow for large |x|."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Tensor:
    """A 2-D float64 matrix, optionally tracked on a tape."""

    __slots__ = ("data", "tape", "node_id", "grad")

    def __init__(self, data, tape: "Tape | None" = None, node_id: int | None = None):
        self.data = _as_matrix(data)
        self.tape = tape
        self.node_id = node_id
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def tracked(self) -> bool:
        return self.tape is not None

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def detached(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, tracked={self.tracked})"


class Tape:
    """Append-only record of operations plus a registry of parameters.

    A tape is single-owner while recording. ``parameter`` wraps a
    persistent float64 array in place (no copy), so optimizer updates to
    ``tensor.data`` mutate the caller's array; registering the same array
    under the same name again returns the existing tensor, which is what
    makes weight sharing across layers work.
    """

    def __init__(self):
        self._steps: list[tuple[int, tuple[int | None, ...], Callable]] = []
        self._num_nodes = 0
        self.parameters: dict[str, Tensor] = {}
        self._leaves: list[Tensor] = []

    def _new_id(self) -> int:
        node_id = self._num_nodes
        self._num_nodes += 1
        return node_id

    def parameter(self, name: str, data: np.ndarray) -> Tensor:
        if name in self.parameters:
            existing = self.parameters[name]
            if existing.data is not data:
                raise ValueError(f"parameter {name!r} already bound to another array")
            return existing
        if not (
            isinstance(data, np.ndarray)
            and data.dtype == np.float64
            and data.ndim == 2
        ):
            raise TypeError("parameters must be 2-D float64 ndarrays")
        tensor = Tensor(data, self, self._new_id())
        self.parameters[name] = tensor
        self._leaves.append(tensor)
        return tensor

    def watch(self, data) -> Tensor:
        """Track a non-parameter input so backward fills its gradient."""
        tensor = Tensor(data, self, self._new_id())
        self._leaves.append(tensor)
        return tensor

    def backward(self, loss: Tensor) -> None:
        """Accumulate gradients of a scalar loss into every leaf's .grad."""
        if loss.tape is not self:
            raise ValueError("loss was not recorded on this tape")
        if loss.shape != (1, 1):
            raise ValueError(f"backward needs a scalar (1x1) loss, got {loss.shape}")
        grads: list[np.ndarray | None] = [None] * self._num_nodes
        grads[loss.node_id] = np.ones((1, 1))
        for out_id, input_ids, vjp in reversed(self._steps):
            g = grads[out_id]
            if g is None:
                continue
            for input_id, gi in zip(input_ids, vjp(g)):
                if input_id is None or gi is None:
                    continue
                if grads[input_id] is None:
                    grads[input_id] = gi
                else:
                    grads[input_id] = grads[input_id] + gi
        for leaf in self._leaves:
            g = grads[leaf.node_id]
            leaf.grad = np.zeros_like(leaf.data) if g is None else np.asarray(g)


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _tape_of(inputs: Sequence[Tensor]) -> Tape | None:
    tape = None
    for t in inputs:
        if t.tape is None:
            continue
        if tape is None:
            tape = t.tape
        elif tape is not t.tape:
            raise ValueError("inputs were recorded on different tapes")
    return tape


def _make(data: np.ndarray, inputs: Sequence[Tensor], vjp: Callable) -> Tensor:
    if not np.isfinite(data).all():
        raise NonFiniteError("operation produced a non-finite value")
    out = Tensor(data)
    tape = _tape_of(inputs)
    if tape is not None:
        out.tape = tape
        out.node_id = tape._new_id()
        input_ids = tuple(
            t.node_id if t.tape is tape else None for t in inputs
        )
        tape._steps.append((out.node_id, input_ids, vjp))
    return out


def matmul(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.cols != b.rows:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    ad, bd = a.data, b.data
    return _make(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g))


def add(a, b) -> Tensor:
    a, b = _wrap(a), _wrap(b)
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    return _make(a.data + b.data, (a, b), lambda g: (g, g))


def add_row_broadcast(a, row) -> Tensor:
    """a + row, with row a 1 x cols bias broadcast over every row of a."""
    a, row = _wrap(a), _wrap(row)
    if row.rows != 1 or row.cols != a.cols:
        raise ValueError(f"broadcast row must be 1x{a.cols}, got {row.shape}")
    return _make(
        a.data + row.data,
        (a, row),
        lambda g: (g, g.sum(axis=0, keepdims=True)),
    )


def scale(a, s) -> Tensor:
    """a * s for a python scalar or a 1x1 (possibly learnable) tensor."""
    a = _wrap(a)
    if isinstance(s, Tensor):
        if s.shape != (1, 1):
            raise ValueError(f"scale factor tensor must be 1x1, got {s.shape}")
        ad, sval = a.data, s.data[0, 0]
        return _make(
            ad * sval,
            (a, s),
            lambda g: (g * sval, np.array([[float((g * ad).sum())]])),
        )
    s = float(s)
    return _make(a.data * s, (a,), lambda g: (g * s,))


def neg(a) -> Tensor:
    a = _wrap(a)
    return _make(-a.data, (a,), lambda g: (-g,))


def relu(a) -> Tensor:
    a = _wrap(a)
    mask = a.data > 0
    return _make(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def sigmoid(a) -> Tensor:
    a = _wrap(a)
    out = stable_sigmoid(a.data)
    return _make(out, (a,), lambda g: (g * out * (1.0 - out),))


def softplus(a) -> Tensor:
    a = _wrap(a)
    ad = a.data
    return _make(
        np.logaddexp(0.0, ad), (a,), lambda g: (g * stable_sigmoid(ad),)
    )


def concat_cols(tensors: Sequence) -> Tensor:
    tensors = [_wrap(t) for t in tensors]
    if not tensors:
        raise ValueError("concat_cols needs at least one tensor")
    rows = tensors[0].rows
    if any(t.rows != rows for t in tensors):
        raise ValueError("concat_cols inputs must share the row count")
    widths = [t.cols for t in tensors]
    offsets = np.cumsum([0] + widths)

    def vjp(g):
        return tuple(g[:, offsets[i] : offsets[i + 1]] for i in range(len(widths)))

    return _make(np.concatenate([t.data for t in tensors], axis=1), tensors, vjp)


def sum_all(a) -> Tensor:
    a = _wrap(a)
    ad = a.data
    return _make(
        np.array([[float(ad.sum())]]),
        (a,),
        lambda g: (np.full_like(ad, g[0, 0]),),
    )


def _check_index(index, bound: int, what: str) -> np.ndarray:
    idx = np.asarray(index, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= bound):
        raise IndexError(f"{what} index out of range [0, {bound})")
    return idx


def select_cols(a, cols) -> Tensor:
    a = _wrap(a)
    idx = _check_index(cols, a.cols, "column")
    ad = a.data

    def vjp(g):
        z = np.zeros_like(ad)
        np.add.at(z.T, idx, g.T)
        return (z,)

    return _make(ad[:, idx], (a,), vjp)


def embed_cols(a, num_cols: int, cols) -> Tensor:
    """Place the columns of a into a wider zero matrix (adjoint of select_cols)."""
    a = _wrap(a)
    idx = _check_index(cols, num_cols, "column")
    if idx.size != a.cols:
        raise ValueError(f"embed_cols got {a.cols} columns for {idx.size} targets")
    out = np.zeros((a.rows, num_cols))
    np.add.at(out.T, idx, a.data.T)
    return _make(out, (a,), lambda g: (g[:, idx],))


def gather_rows(src, index) -> Tensor:
    """out[k] = src[index[k]]; duplicates allowed, backward scatter-adds."""
    src = _wrap(src)
    idx = _check_index(index, src.rows, "row")
    sd = src.data

    def vjp(g):
        z = np.zeros_like(sd)
        np.add.at(z, idx, g)
        return (z,)

    return _make(sd[idx], (src,), vjp)


def scatter_add_rows(target_rows: int, index, src) -> Tensor:
    """Zero matrix with src rows summed into the listed target rows."""
    src = _wrap(src)
    idx = _check_index(index, target_rows, "row")
    if idx.size != src.rows:
        raise ValueError(f"scatter_add_rows got {src.rows} rows for {idx.size} indices")
    out = np.zeros((target_rows, src.cols))
    np.add.at(out, idx, src.data)
    return _make(out, (src,), lambda g: (g[idx],))


def softmax_rows(z) -> Tensor:
    z = _wrap(z)
    if z.cols < 1:
        raise ValueError("softmax_rows needs at least one column")
    shifted = z.data - z.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=1, keepdims=True)

    def vjp(g):
        return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

    return _make(out, (z,), vjp)


BCE_EPS = 1e-7


def bce_loss(y, labels, mask) -> Tensor:
    """Mean binary cross-entropy over masked entries; y clamped to [eps, 1-eps].

    labels and mask are treated as constants (no gradient flows to them).
    """
    y = _wrap(y)
    ld = _wrap(labels).data
    md = _wrap(mask).data
    if ld.shape != y.shape or md.shape != y.shape:
        raise ValueError("labels and mask must match the prediction shape")
    count = md.sum()
    if count <= 0:
        raise ValueError("bce_loss mask selects no entries")
    yd = y.data
    yc = np.clip(yd, BCE_EPS, 1.0 - BCE_EPS)
    total = -(ld * np.log(yc) + (1.0 - ld) * np.log1p(-yc))
    loss = np.array([[float((total * md).sum() / count)]])
    inside = (yd > BCE_EPS) & (yd < 1.0 - BCE_EPS)

    def vjp(g):
        grad = (yc - ld) / (yc * (1.0 - yc)) * md * inside / count
        return (g[0, 0] * grad,)

    return _make(loss, (y,), vjp)


def _eval_scalar(f: Callable, arrays: list[np.ndarray]) -> float:
    out = f([Tensor(a.copy()) for a in arrays])
    return out.item()


def check_gradient(
    f: Callable[[list[Tensor]], Tensor],
    params: Sequence[np.ndarray],
    step: float = 1e-5,
) -> float:
    """Max relative error of tape gradients vs central finite differences.

    f maps a list of tensors (same order as params) to a scalar tensor and
    must be deterministic. Error per coordinate is
    |g_ad - g_fd| / max(1, |g_fd|).
    """
    arrays = [np.array(_as_matrix(p), dtype=np.float64) for p in params]
    tape = Tape()
    tensors = [tape.parameter(f"p{i}", a) for i, a in enumerate(arrays)]
    tape.backward(f(tensors))
    analytic = [t.grad.copy() for t in tensors]
    if any(not np.isfinite(g).all() for g in analytic):
        raise NonFiniteError("tape gradient is non-finite")
    worst = 0.0
    for base, grad in zip(arrays, analytic):
        flat = base.reshape(-1)
        grad_flat = grad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            f_plus = _eval_scalar(f, arrays)
            flat[i] = orig - step
            f_minus = _eval_scalar(f, arrays)
            flat[i] = orig
            fd = (f_plus - f_minus) / (2.0 * step)
            worst = max(worst, abs(grad_flat[i] - fd) / max(1.0, abs(fd)))
    return worst
