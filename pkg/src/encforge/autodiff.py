"""Dense float64 tensors with tape-based reverse-mode differentiation.

Everything is double precision. Operations evaluate eagerly on numpy
arrays; when a :class:`Tape` is active (entered as a context manager on
the current thread), every operation whose inputs require gradients is
recorded so that ``tape.backward(loss)`` can push d(loss)/d(x) into the
``grad`` slot of every leaf tensor that was touched.

Ranks are limited to what the sequence models need: scalars, vectors and
matrices, where the leading axis of a matrix is a batch axis. Any
non-finite value produced by an operation aborts it with
:class:`NumericError` instead of propagating NaN/Inf.
"""

from __future__ import annotations

import math
import threading

import numpy as np


class DimensionError(ValueError):
    """Operand shapes are not conformable for the requested operation."""


class DomainError(ValueError):
    """Operand values lie outside the mathematical domain of the operation."""


class NumericError(ArithmeticError):
    """An operation produced NaN or Inf."""


_trace = threading.local()


def _tapes() -> list:
    stack = getattr(_trace, "stack", None)
    if stack is None:
        stack = _trace.stack = []
    return stack


def active_tape():
    """The innermost tape on this thread, or None when not tracing."""
    stack = _tapes()
    return stack[-1] if stack else None


class Tensor:
    """A numpy float64 array plus a gradient slot.

    Leaf tensors are created directly (parameters with
    ``requires_grad=True``, data constants without). Interior tensors are
    produced by the ops below and carry a backward closure while their
    tape is alive.
    """

    __slots__ = ("data", "grad", "requires_grad", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericError("tensor: non-finite values in input")
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar; all arithmetic lives in the module-level ops
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return hadamard(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Recorded computation trace for one forward pass.

    Ops executed while the tape is active append themselves in execution
    order, which is already a valid topological order, so backward is a
    single reverse sweep. A tape is single-use: backward consumes it.
    """

    def __init__(self):
        self._nodes: list[Tensor] = []
        self._used = False

    def __enter__(self):
        _tapes().append(self)
        return self

    def __exit__(self, *exc):
        stack = _tapes()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every touched grad slot."""
        if self._used:
            raise RuntimeError("tape already consumed by a previous backward pass")
        if loss.data.size != 1:
            raise DimensionError(f"backward expects a scalar loss, got shape {loss.shape}")
        if not loss.requires_grad:
            raise RuntimeError("loss does not depend on any tracked parameter")
        self._used = True
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self._nodes):
            if node.grad is not None and node._backward is not None:
                node._backward(node.grad)
        # free interior structure; leaf grads survive the tape
        for node in self._nodes:
            node._backward = None
        self._nodes.clear()


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `g` down to `shape`, inverting numpy broadcasting."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def as_tensor(x) -> Tensor:
    """Coerce arrays/scalars to a constant Tensor; pass Tensors through."""
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data: np.ndarray, op: str, backward) -> Tensor:
    # cheap non-finite screen: any NaN/Inf makes sum-sum non-zero
    s = float(data.sum())
    if s - s != 0.0:
        raise NumericError(f"{op}: non-finite values in result")
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.requires_grad = backward is not None
    out._backward = None
    if backward is not None:
        stack = _tapes()
        if stack:
            out._backward = backward
            stack[-1]._nodes.append(out)
    return out


# ---------------------------------------------------------------------------
# primitive operations


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError:
        raise DimensionError(f"add: shapes {a.shape} and {b.shape} do not broadcast") from None
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            if a.requires_grad:
                _accumulate(a, _unbroadcast(g, a.shape))
            if b.requires_grad:
                _accumulate(b, _unbroadcast(g, b.shape))
    return _result(data, "add", bw)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data - b.data
    except ValueError:
        raise DimensionError(f"sub: shapes {a.shape} and {b.shape} do not broadcast") from None
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            if a.requires_grad:
                _accumulate(a, _unbroadcast(g, a.shape))
            if b.requires_grad:
                _accumulate(b, _unbroadcast(-g, b.shape))
    return _result(data, "sub", bw)


def hadamard(a, b) -> Tensor:
    """Elementwise product (with numpy broadcasting)."""
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError:
        raise DimensionError(f"hadamard: shapes {a.shape} and {b.shape} do not broadcast") from None
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            if a.requires_grad:
                _accumulate(a, _unbroadcast(g * b.data, a.shape))
            if b.requires_grad:
                _accumulate(b, _unbroadcast(g * a.data, b.shape))
    return _result(data, "hadamard", bw)


mul = hadamard


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    if not math.isfinite(c):
        raise NumericError("scale: non-finite scalar")
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g * c)
    return _result(a.data * c, "scale", bw)


def matmul(a, b) -> Tensor:
    """Matrix product for 1-D/2-D operands with numpy @ semantics."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim not in (1, 2) or b.ndim not in (1, 2):
        raise DimensionError(f"matmul: only 1-D/2-D operands, got {a.shape} @ {b.shape}")
    a2 = a.data if a.ndim == 2 else a.data[None, :]
    b2 = b.data if b.ndim == 2 else b.data[:, None]
    if a2.shape[1] != b2.shape[0]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} are not conformable")
    out2 = a2 @ b2
    data = out2
    if a.ndim == 1:
        data = data[0]
    if b.ndim == 1:
        data = data[..., 0]
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            g2 = g.reshape(out2.shape)
            if a.requires_grad:
                ga = g2 @ b2.T
                _accumulate(a, ga[0] if a.ndim == 1 else ga)
            if b.requires_grad:
                gb = a2.T @ g2
                _accumulate(b, gb[:, 0] if b.ndim == 1 else gb)
    return _result(data, "matmul", bw)


def matmul_t(a, b) -> Tensor:
    """a @ b.T for matrices; one node instead of transpose + matmul."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(f"matmul_t: expected matrices, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[1]:
        raise DimensionError(f"matmul_t: shapes {a.shape} and {b.shape} are not conformable")
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            if a.requires_grad:
                _accumulate(a, g @ b.data)
            if b.requires_grad:
                _accumulate(b, g.T @ a.data)
    return _result(a.data @ b.data.T, "matmul_t", bw)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise DimensionError(f"transpose: expected a matrix, got shape {a.shape}")
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g.T)
    return _result(a.data.T.copy(), "transpose", bw)


def concat(a, b, axis: int = -1) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != b.ndim:
        raise DimensionError(f"concat: ranks differ, shapes {a.shape} and {b.shape}")
    ax = axis if axis >= 0 else a.ndim + axis
    for i in range(a.ndim):
        if i != ax and a.shape[i] != b.shape[i]:
            raise DimensionError(f"concat: shapes {a.shape} and {b.shape} differ off axis {ax}")
    data = np.concatenate([a.data, b.data], axis=ax)
    split = a.shape[ax]
    bw = None
    if a.requires_grad or b.requires_grad:
        def bw(g):
            ga, gb = np.split(g, [split], axis=ax)
            if a.requires_grad:
                _accumulate(a, ga)
            if b.requires_grad:
                _accumulate(b, gb)
    return _result(data, "concat", bw)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    t = np.tanh(a.data)
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g * (1.0 - t * t))
    return _result(t, "tanh", bw)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    # stable logistic: exp of a negative magnitude only
    d = a.data
    s = np.where(d >= 0, 1.0 / (1.0 + np.exp(-np.abs(d))),
                 np.exp(-np.abs(d)) / (1.0 + np.exp(-np.abs(d))))
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g * s * (1.0 - s))
    return _result(s, "sigmoid", bw)


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):  # overflow becomes inf; _result aborts on it
        e = np.exp(a.data)
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g * e)
    return _result(e, "exp", bw)


def log(a) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise DomainError(f"log: requires positive values, min was {a.data.min()}")
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g / a.data)
    return _result(np.log(a.data), "log", bw)


def square(a) -> Tensor:
    a = as_tensor(a)
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, g * (2.0 * a.data))
    return _result(a.data * a.data, "square", bw)


def sum_all(a) -> Tensor:
    """Sum of all elements, as a 0-d tensor."""
    a = as_tensor(a)
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, np.full(a.shape, float(g)))
    return _result(np.asarray(a.data.sum()), "sum_all", bw)


def mean_all(a) -> Tensor:
    """Mean of all elements, as a 0-d tensor."""
    a = as_tensor(a)
    n = a.data.size
    if n == 0:
        raise DimensionError("mean_all: empty tensor")
    bw = None
    if a.requires_grad:
        def bw(g):
            _accumulate(a, np.full(a.shape, float(g) / n))
    return _result(np.asarray(a.data.mean()), "mean_all", bw)


# ---------------------------------------------------------------------------
# parameters


class ParamStore:
    """Ordered name -> parameter map with one gradient slot per entry.

    Iteration order is insertion order, which fixes checkpoint layout and
    makes optimizer sweeps deterministic.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ValueError(f"parameter {name!r} already registered")
        t = as_tensor(np.array(value, dtype=np.float64))
        t.requires_grad = True
        t.grad = np.zeros(t.shape)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def zero_grads(self) -> None:
        for t in self._params.values():
            t.grad = np.zeros(t.shape)

    def snapshot(self) -> dict[str, np.ndarray]:
        """Copies of all parameter values (for restore/comparison)."""
        return {name: t.data.copy() for name, t in self._params.items()}

    def load(self, values: dict[str, np.ndarray]) -> None:
        for name, arr in values.items():
            t = self._params[name]
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != t.shape:
                raise DimensionError(
                    f"parameter {name!r}: expected shape {t.shape}, got {arr.shape}")
            t.data = arr.copy()


def glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform init in +-sqrt(6/(fan_in+fan_out)) for an (rows, cols) matrix."""
    bound = math.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


# ---------------------------------------------------------------------------
# losses


def mse(a, b) -> Tensor:
    """Mean over all elements of the squared difference.

    Accepts tensors/arrays or equal-length sequences of them; sequences
    are treated as one big collection of elements.
    """
    if isinstance(a, (list, tuple)) or isinstance(b, (list, tuple)):
        if not (isinstance(a, (list, tuple)) and isinstance(b, (list, tuple))):
            raise DimensionError("mse: mixed sequence and tensor arguments")
        if len(a) != len(b):
            raise DimensionError(f"mse: sequence lengths {len(a)} and {len(b)} differ")
        if not a:
            raise DimensionError("mse: empty sequences")
        total = None
        count = 0
        for ai, bi in zip(a, b):
            ai, bi = as_tensor(ai), as_tensor(bi)
            if ai.shape != bi.shape:
                raise DimensionError(f"mse: shapes {ai.shape} and {bi.shape} differ")
            term = sum_all(square(sub(ai, bi)))
            total = term if total is None else add(total, term)
            count += ai.data.size
        return scale(total, 1.0 / count)
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"mse: shapes {a.shape} and {b.shape} differ")
    return mean_all(square(sub(a, b)))


def gaussian_kl(mu, sigma) -> Tensor:
    """KL(N(mu, diag sigma^2) || N(0, I)) = 0.5 * sum(mu^2 + sigma^2 - 1 - ln sigma^2).

    Sums over every element, so a (batch, K) input yields the batch total.
    """
    mu, sigma = as_tensor(mu), as_tensor(sigma)
    if mu.shape != sigma.shape:
        raise DimensionError(f"gaussian_kl: shapes {mu.shape} and {sigma.shape} differ")
    if np.any(sigma.data <= 0):
        raise DomainError(f"gaussian_kl: sigma must be positive, min was {sigma.data.min()}")
    var = square(sigma)
    inner = sub(sub(add(square(mu), var), np.ones(mu.shape)), log(var))
    return scale(sum_all(inner), 0.5)
