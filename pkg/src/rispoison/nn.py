"""Minimal reverse-mode autodiff over dense float64 arrays, plus MLPs and Adam.

Everything is 2-D and row-major: a batch of N vectors of width D is an
(N, D) array. Tapes are rebuilt per training step; parameters live in plain
numpy arrays owned by the networks and are updated in place.
"""

from __future__ import annotations

import math

import numpy as np

Array2 = np.ndarray  # 2-D float64, all entries finite


class ShapeError(ValueError):
    """Incompatible operand or layer dimensions."""


class NumericalDivergence(RuntimeError):
    """A loss, gradient, or parameter became non-finite; the run must stop."""


def _as_array2(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D array, got shape {a.shape}")
    return a


class Tensor:
    """A node on a tape: a value, an accumulated gradient, and a local backward rule."""

    __slots__ = ("value", "grad", "_backward", "watched")

    def __init__(self, value: np.ndarray, watched: bool = False):
        self.value = value
        self.grad: np.ndarray | None = None
        self._backward = None
        self.watched = watched

    @property
    def shape(self):
        return self.value.shape

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g


class Tape:
    """Records primitive ops in creation order, which is a valid topological order.

    backward() visits nodes exactly once in reverse creation order, so every
    node's gradient is fully accumulated before it is consumed.
    """

    def __init__(self):
        self._nodes: list[Tensor] = []

    def __len__(self) -> int:
        return len(self._nodes)

    def _node(self, value: np.ndarray, backward=None, watched: bool = False) -> Tensor:
        t = Tensor(value, watched=watched)
        t._backward = backward
        self._nodes.append(t)
        return t

    # -- leaves ------------------------------------------------------------

    def leaf(self, value, watched: bool = False) -> Tensor:
        """Wrap an array as a leaf. Watched leaves receive gradients."""
        return self._node(_as_array2(value), watched=watched)

    def constant(self, value) -> Tensor:
        return self.leaf(value, watched=False)

    # -- primitives ----------------------------------------------------------

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape[1] != b.value.shape[0]:
            raise ShapeError(f"matmul: {a.value.shape} @ {b.value.shape}")

        def backward(g):
            a._accumulate(g @ b.value.T)
            b._accumulate(a.value.T @ g)

        return self._node(a.value @ b.value, backward)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        """Elementwise add; b may be a (1, D) bias row broadcast over a's rows."""
        bias_row = b.value.shape[0] == 1 and a.value.shape[0] != 1

        def backward(g):
            a._accumulate(g)
            b._accumulate(g.sum(axis=0, keepdims=True) if bias_row else g)

        return self._node(a.value + b.value, backward)

    def sub(self, a: Tensor, b: Tensor) -> Tensor:
        def backward(g):
            a._accumulate(g)
            b._accumulate(-g)

        return self._node(a.value - b.value, backward)

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape != b.value.shape:
            raise ShapeError(f"mul: {a.value.shape} vs {b.value.shape}")

        def backward(g):
            a._accumulate(g * b.value)
            b._accumulate(g * a.value)

        return self._node(a.value * b.value, backward)

    def scale(self, a: Tensor, k: float, shift: float = 0.0) -> Tensor:
        def backward(g):
            a._accumulate(g * k)

        return self._node(a.value * k + shift, backward)

    def relu(self, a: Tensor) -> Tensor:
        mask = a.value > 0.0

        def backward(g):
            a._accumulate(g * mask)

        return self._node(a.value * mask, backward)

    def tanh(self, a: Tensor) -> Tensor:
        out = np.tanh(a.value)

        def backward(g):
            a._accumulate(g * (1.0 - out * out))

        return self._node(out, backward)

    def exp(self, a: Tensor) -> Tensor:
        out = np.exp(a.value)

        def backward(g):
            a._accumulate(g * out)

        return self._node(out, backward)

    def log(self, a: Tensor) -> Tensor:
        def backward(g):
            a._accumulate(g / a.value)

        return self._node(np.log(a.value), backward)

    def square(self, a: Tensor) -> Tensor:
        def backward(g):
            a._accumulate(g * 2.0 * a.value)

        return self._node(a.value * a.value, backward)

    def minimum(self, a: Tensor, b: Tensor) -> Tensor:
        """Elementwise min acting as a selector; ties route gradient to a."""
        take_a = a.value <= b.value

        def backward(g):
            a._accumulate(g * take_a)
            b._accumulate(g * ~take_a)

        return self._node(np.where(take_a, a.value, b.value), backward)

    def clip(self, a: Tensor, lo: float, hi: float) -> Tensor:
        inside = (a.value >= lo) & (a.value <= hi)

        def backward(g):
            a._accumulate(g * inside)

        return self._node(np.clip(a.value, lo, hi), backward)

    def concat_cols(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape[0] != b.value.shape[0]:
            raise ShapeError(f"concat_cols: {a.value.shape} vs {b.value.shape}")
        na = a.value.shape[1]

        def backward(g):
            a._accumulate(g[:, :na])
            b._accumulate(g[:, na:])

        return self._node(np.concatenate([a.value, b.value], axis=1), backward)

    def slice_cols(self, a: Tensor, start: int, stop: int) -> Tensor:
        def backward(g):
            full = np.zeros_like(a.value)
            full[:, start:stop] = g
            a._accumulate(full)

        return self._node(a.value[:, start:stop].copy(), backward)

    def sum_cols(self, a: Tensor) -> Tensor:
        """Row-wise sum: (N, D) -> (N, 1)."""

        def backward(g):
            a._accumulate(np.broadcast_to(g, a.value.shape))

        return self._node(a.value.sum(axis=1, keepdims=True), backward)

    def mean_all(self, a: Tensor) -> Tensor:
        n = a.value.size

        def backward(g):
            a._accumulate(np.full_like(a.value, g[0, 0] / n))

        return self._node(np.array([[a.value.mean()]]), backward)

    # -- reverse pass --------------------------------------------------------

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every watched leaf's .grad."""
        if loss.value.size != 1:
            raise ValueError("backward requires a scalar loss node")
        for n in self._nodes:
            n.grad = None
        loss.grad = np.ones_like(loss.value)
        for node in reversed(self._nodes):
            if node.grad is not None and node._backward is not None:
                node._backward(node.grad)


class MLP:
    """Dense net with rectified-linear hidden layers and an identity output layer.

    Weights are fan-in-scaled uniform; `out_scale` shrinks selected output
    columns (used to start the actor's log-std head near zero).
    """

    def __init__(self, widths: list[int], rng: np.random.Generator,
                 out_scale: float = 1.0, out_scale_cols: slice | None = None):
        if len(widths) < 2:
            raise ShapeError("an MLP needs at least an input and an output width")
        self.widths = list(widths)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(widths[:-1], widths[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=(1, fan_out)))
        if out_scale != 1.0:
            cols = out_scale_cols if out_scale_cols is not None else slice(None)
            self.weights[-1][:, cols] *= out_scale
            self.biases[-1][:, cols] *= out_scale

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def copy_from(self, other: "MLP") -> None:
        for dst, src in zip(self.parameters(), other.parameters()):
            dst[...] = src

    def forward(self, x) -> np.ndarray:
        """Plain forward pass, no tape."""
        h = _as_array2(x)
        if h.shape[1] != self.widths[0]:
            raise ShapeError(f"input width {h.shape[1]} != first layer width {self.widths[0]}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                h = np.maximum(h, 0.0)
        return h

    def forward_tape(self, tape: Tape, x: Tensor, watched: bool = True) -> tuple[Tensor, list[Tensor]]:
        """Forward pass on a tape; returns the output node and the parameter leaves."""
        if x.value.shape[1] != self.widths[0]:
            raise ShapeError(f"input width {x.value.shape[1]} != first layer width {self.widths[0]}")
        leaves: list[Tensor] = []
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            wt = tape.leaf(w, watched=watched)
            bt = tape.leaf(b, watched=watched)
            leaves.extend((wt, bt))
            h = tape.add(tape.matmul(h, wt), bt)
            if i != last:
                h = tape.relu(h)
        return h, leaves


class Adam:
    """Adaptive moment estimation; updates the given parameter arrays in place."""

    def __init__(self, params: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ShapeError(f"{len(grads)} gradients for {len(self.params)} parameters")
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise NumericalDivergence("non-finite gradient in optimizer step")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
