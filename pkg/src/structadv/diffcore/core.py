"""Dense float64 tensors and a tape for reverse-mode gradients.

The op set is fixed and small: exactly what the predictor families and the
perturbation parameterizations need.  Shapes are checked at every op boundary;
the only implicit broadcast is scalar*tensor (``scale``).  Batch-vs-single
additions (``add_rows``) and per-channel matrix products (``channel_matmul``)
are explicit ops, not broadcasting.
"""

from __future__ import annotations

import numpy as np


class ShapeMismatchError(ValueError):
    """Operand shapes are incompatible for the requested op."""


class NonFiniteError(ArithmeticError):
    """A NaN or Inf appeared where a finite value is required."""


class Tensor:
    """Immutable dense array of 64-bit floats, row-major.

    The wrapped ndarray is marked read-only; gradients are accumulated on the
    tape, never on the tensor.  Identity (``id``) is what ties a parameter to
    its gradient in a backward pass.
    """

    __slots__ = ("data",)

    def __init__(self, data, *, check_finite: bool = True):
        arr = np.array(data, dtype=np.float64, order="C")
        if check_finite and not np.all(np.isfinite(arr)):
            raise NonFiniteError("tensor contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatchError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"


def _require_shape(t: Tensor, shape: tuple[int, ...], what: str) -> None:
    if t.shape != shape:
        raise ShapeMismatchError(f"{what}: expected shape {shape}, got {t.shape}")


def _finite_out(arr: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite result in op '{op}'")
    return arr


class GradientTape:
    """Single-owner record of one forward pass.

    Ops are recorded in execution order, which is already a topological order,
    so backward is a single reverse sweep.  ``watch`` registers parameters;
    every watched tensor gets an entry in the gradient map, zero if the tape
    never touched it.  ``backward`` may run once per tape.
    """

    def __init__(self):
        self._records: list[tuple[Tensor, list[tuple[Tensor, object]]]] = []
        self._watched: list[Tensor] = []
        self._used = False

    def watch(self, *tensors: Tensor) -> None:
        for t in tensors:
            if not isinstance(t, Tensor):
                raise TypeError("watch() expects Tensor arguments")
            if not any(w is t for w in self._watched):
                self._watched.append(t)

    @property
    def num_ops(self) -> int:
        return len(self._records)

    def _emit(self, out_data: np.ndarray, pulls, op: str) -> Tensor:
        out = Tensor(_finite_out(out_data, op), check_finite=False)
        self._records.append((out, pulls))
        return out

    # -- elementwise / linear ops -------------------------------------------

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        _require_shape(b, a.shape, "add")
        return self._emit(
            a.data + b.data,
            [(a, lambda g: g), (b, lambda g: g)],
            "add",
        )

    def sub(self, a: Tensor, b: Tensor) -> Tensor:
        _require_shape(b, a.shape, "sub")
        return self._emit(
            a.data - b.data,
            [(a, lambda g: g), (b, lambda g: -g)],
            "sub",
        )

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        _require_shape(b, a.shape, "mul")
        return self._emit(
            a.data * b.data,
            [(a, lambda g: g * b.data), (b, lambda g: g * a.data)],
            "mul",
        )

    def scale(self, a: Tensor, s: float) -> Tensor:
        s = float(s)
        return self._emit(s * a.data, [(a, lambda g: s * g)], "scale")

    def relu(self, a: Tensor) -> Tensor:
        mask = a.data > 0
        return self._emit(
            np.where(mask, a.data, 0.0),
            [(a, lambda g: g * mask)],
            "relu",
        )

    def reshape(self, a: Tensor, shape: tuple[int, ...]) -> Tensor:
        shape = tuple(int(s) for s in shape)
        if int(np.prod(shape, dtype=np.int64)) != a.size:
            raise ShapeMismatchError(f"cannot reshape {a.shape} to {shape}")
        old = a.shape
        return self._emit(
            a.data.reshape(shape),
            [(a, lambda g: g.reshape(old))],
            "reshape",
        )

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeMismatchError(f"matmul: {a.shape} @ {b.shape}")
        return self._emit(
            a.data @ b.data,
            [(a, lambda g: g @ b.data.T), (b, lambda g: a.data.T @ g)],
            "matmul",
        )

    def channel_matmul(self, a: Tensor, b: Tensor) -> Tensor:
        """Per-channel product: (r, l, C) x (l, c, C) -> (r, c, C)."""
        if (
            a.data.ndim != 3
            or b.data.ndim != 3
            or a.shape[1] != b.shape[0]
            or a.shape[2] != b.shape[2]
        ):
            raise ShapeMismatchError(f"channel_matmul: {a.shape} x {b.shape}")
        out = np.einsum("ilc,ljc->ijc", a.data, b.data)
        return self._emit(
            out,
            [
                (a, lambda g: np.einsum("ijc,ljc->ilc", g, b.data)),
                (b, lambda g: np.einsum("ilc,ijc->ljc", a.data, g)),
            ],
            "channel_matmul",
        )

    def add_rows(self, x: Tensor, v: Tensor) -> Tensor:
        """Add one sample-shaped tensor to every row of a batch.

        ``x`` has shape (batch, *s) and ``v`` shape (*s); the gradient of
        ``v`` is the sum over the batch axis.
        """
        if x.data.ndim < 1 or x.shape[1:] != v.shape:
            raise ShapeMismatchError(f"add_rows: batch {x.shape} + {v.shape}")
        return self._emit(
            x.data + v.data[None, ...],
            [(x, lambda g: g), (v, lambda g: g.sum(axis=0))],
            "add_rows",
        )

    def dropout(self, x: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
        """Inverted dropout; identity when rate == 0."""
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate {rate} outside [0, 1)")
        if rate == 0.0:
            return self._emit(x.data.copy(), [(x, lambda g: g)], "dropout")
        keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
        return self._emit(x.data * keep, [(x, lambda g: g * keep)], "dropout")

    # -- convolution ops for the small CNN ----------------------------------

    def conv2d(self, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
        """Valid-padding stride-1 convolution.

        ``x``: (batch, H, W, Cin), ``w``: (kh, kw, Cin, Cout), ``b``: (Cout,).
        """
        if x.data.ndim != 4 or w.data.ndim != 4 or b.data.ndim != 1:
            raise ShapeMismatchError("conv2d expects (b,H,W,C), (kh,kw,C,F), (F,)")
        n, hh, ww, cin = x.shape
        kh, kw, cin2, cout = w.shape
        if cin != cin2 or b.shape[0] != cout:
            raise ShapeMismatchError(f"conv2d: {x.shape} * {w.shape} + {b.shape}")
        if kh > hh or kw > ww:
            raise ShapeMismatchError("conv2d: kernel larger than input")
        oh, ow = hh - kh + 1, ww - kw + 1
        cols = _im2col(x.data, kh, kw)  # (n, oh, ow, kh*kw*cin)
        wf = w.data.reshape(-1, cout)
        out = cols.reshape(-1, wf.shape[0]) @ wf
        out = out.reshape(n, oh, ow, cout) + b.data

        def pull_x(g):
            gcol = g.reshape(-1, cout) @ wf.T
            return _col2im(gcol.reshape(n, oh, ow, -1), (n, hh, ww, cin), kh, kw)

        def pull_w(g):
            gw = cols.reshape(-1, wf.shape[0]).T @ g.reshape(-1, cout)
            return gw.reshape(w.shape)

        return self._emit(
            out,
            [(x, pull_x), (w, pull_w), (b, lambda g: g.sum(axis=(0, 1, 2)))],
            "conv2d",
        )

    def maxpool2(self, x: Tensor) -> Tensor:
        """2x2 max pooling, stride 2; spatial dims must be even."""
        if x.data.ndim != 4:
            raise ShapeMismatchError("maxpool2 expects (b,H,W,C)")
        n, hh, ww, c = x.shape
        if hh % 2 or ww % 2:
            raise ShapeMismatchError(f"maxpool2 needs even spatial dims, got {x.shape}")
        blocks = x.data.reshape(n, hh // 2, 2, ww // 2, 2, c)
        flat = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(n, hh // 2, ww // 2, c, 4)
        idx = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]

        def pull(g):
            gx = np.zeros_like(flat)
            np.put_along_axis(gx, idx[..., None], g[..., None], axis=-1)
            gx = gx.reshape(n, hh // 2, ww // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
            return gx.reshape(n, hh, ww, c)

        return self._emit(out, [(x, pull)], "maxpool2")

    # -- backward ------------------------------------------------------------

    def backward_from(self, loss: Tensor) -> dict[Tensor, Tensor]:
        """Reverse sweep from a scalar produced on this tape.

        Returns a map keyed by watched-tensor identity; tensors the forward
        pass never touched map to zeros of the parameter's shape.
        """
        if self._used:
            raise RuntimeError("backward already ran on this tape")
        self._used = True
        if loss.data.shape != ():
            raise ShapeMismatchError(f"backward needs a scalar, got {loss.shape}")
        if not any(out is loss for out, _ in self._records):
            raise ValueError("loss scalar was not produced on this tape")
        grads: dict[int, np.ndarray] = {id(loss): np.ones((), dtype=np.float64)}
        for out, pulls in reversed(self._records):
            g = grads.pop(id(out), None)
            if g is None:
                continue
            for src, pull in pulls:
                contrib = pull(g)
                prev = grads.get(id(src))
                grads[id(src)] = contrib if prev is None else prev + contrib
        result: dict[Tensor, Tensor] = {}
        for t in self._watched:
            g = grads.get(id(t))
            if g is None:
                g = np.zeros(t.shape, dtype=np.float64)
            result[t] = Tensor(np.ascontiguousarray(g, dtype=np.float64))
        return result


def backward(tape: GradientTape, loss: Tensor) -> dict[Tensor, Tensor]:
    """Gradient map for every parameter registered on ``tape``."""
    return tape.backward_from(loss)


def _im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    n, hh, ww, c = x.shape
    oh, ow = hh - kh + 1, ww - kw + 1
    s0, s1, s2, s3 = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x, shape=(n, oh, ow, kh, kw, c), strides=(s0, s1, s2, s1, s2, s3)
    )
    return np.ascontiguousarray(windows).reshape(n, oh, ow, kh * kw * c)


def _col2im(gcol: np.ndarray, x_shape: tuple, kh: int, kw: int) -> np.ndarray:
    n, hh, ww, c = x_shape
    oh, ow = hh - kh + 1, ww - kw + 1
    g6 = gcol.reshape(n, oh, ow, kh, kw, c)
    gx = np.zeros(x_shape, dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            gx[:, i : i + oh, j : j + ow, :] += g6[:, :, :, i, j, :]
    return gx
