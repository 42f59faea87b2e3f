"""Predictor families: linear classifier, MLP, small CNN.

Parameters live in an ordered name->Tensor dict.  Tensors are immutable, so
an optimizer step swaps in fresh tensors via ``set_parameters``.  Forward is
pure given parameters: same inputs, same bits.
"""

from __future__ import annotations

import numpy as np

from ..diffcore import GradientTape, Tensor


def _kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class _Model:
    family = "base"

    def __init__(self):
        self._params: dict[str, Tensor] = {}

    def parameters(self) -> dict[str, Tensor]:
        return dict(self._params)

    def set_parameters(self, params: dict[str, Tensor]) -> None:
        for name, t in params.items():
            if name not in self._params:
                raise KeyError(f"unknown parameter '{name}'")
            if t.shape != self._params[name].shape:
                raise ValueError(
                    f"parameter '{name}': shape {t.shape} != {self._params[name].shape}"
                )
            self._params[name] = t

    def watch(self, tape: GradientTape) -> None:
        tape.watch(*self._params.values())

    def init_params(self, scheme: str = "zeros", seed: int = 0) -> None:
        """Set all parameters: 'zeros' or 'uniform-kaiming' (seeded)."""
        rng = np.random.default_rng(seed)
        fresh = {}
        for name, t in self._params.items():
            if scheme == "zeros":
                fresh[name] = Tensor(np.zeros(t.shape))
            elif scheme == "uniform-kaiming":
                if name.rsplit(".", 1)[-1] == "b":
                    fresh[name] = Tensor(np.zeros(t.shape))
                else:
                    fan_in = self._fan_in(name, t)
                    fresh[name] = Tensor(_kaiming_uniform(rng, t.shape, fan_in))
            else:
                raise ValueError(f"unknown init scheme '{scheme}'")
        self._params = fresh

    def _fan_in(self, name: str, t: Tensor) -> int:
        return t.shape[0]

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Tape-free forward for evaluation."""
        tape = GradientTape()
        return self.forward(tape, Tensor(x)).data

    @property
    def scalar_output(self) -> bool:
        return False


class LinearClassifier(_Model):
    """Scalar-output linear model f(x) = x . w (+ b).

    The 2-feature theory form is ``LinearClassifier(2, bias=False)`` with
    zero initialization: weights (w_inv, w_sp), no bias.
    """

    family = "linear"

    def __init__(self, in_dim: int = 2, *, bias: bool = False):
        super().__init__()
        if in_dim < 1:
            raise ValueError("in_dim must be positive")
        self.in_dim = in_dim
        self.bias = bias
        self._params["w"] = Tensor(np.zeros(in_dim))
        if bias:
            self._params["b"] = Tensor(np.zeros(()))

    @property
    def w_inv(self) -> float:
        return float(self._params["w"].data[0])

    @property
    def w_sp(self) -> float:
        return float(self._params["w"].data[1])

    def forward(self, tape: GradientTape, x: Tensor, *, train: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        if x.data.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"expected (batch, {self.in_dim}) input, got {x.shape}")
        w_col = tape.reshape(self._params["w"], (self.in_dim, 1))
        out = tape.reshape(tape.matmul(x, w_col), (x.shape[0],))
        if self.bias:
            b_row = tape.reshape(self._params["b"], (1,))
            out = tape.add_rows(tape.reshape(out, (x.shape[0], 1)), b_row)
            out = tape.reshape(out, (x.shape[0],))
        return out

    @property
    def scalar_output(self) -> bool:
        return True


class Mlp(_Model):
    """Fully connected ReLU network over flattened inputs."""

    family = "mlp"

    def __init__(self, sizes: tuple[int, ...] = (392, 256, 2), *, dropout: float = 0.0):
        super().__init__()
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ValueError(f"bad layer sizes {sizes}")
        if not 0.0 <= dropout < 1.0:
            raise ValueError(f"dropout {dropout} outside [0, 1)")
        self.sizes = tuple(int(s) for s in sizes)
        self.dropout = dropout
        for i in range(len(self.sizes) - 1):
            self._params[f"layer{i}.W"] = Tensor(np.zeros((self.sizes[i], self.sizes[i + 1])))
            self._params[f"layer{i}.b"] = Tensor(np.zeros(self.sizes[i + 1]))

    def forward(self, tape: GradientTape, x: Tensor, *, train: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        h = x
        if h.data.ndim > 2:
            h = tape.reshape(h, (h.shape[0], int(np.prod(h.shape[1:]))))
        if h.data.ndim != 2 or h.shape[1] != self.sizes[0]:
            raise ValueError(f"expected (batch, {self.sizes[0]}) input, got {h.shape}")
        n_layers = len(self.sizes) - 1
        for i in range(n_layers):
            h = tape.add_rows(tape.matmul(h, self._params[f"layer{i}.W"]),
                              self._params[f"layer{i}.b"])
            if i < n_layers - 1:
                h = tape.relu(h)
                if train and self.dropout > 0.0:
                    if rng is None:
                        raise ValueError("dropout needs an rng at train time")
                    h = tape.dropout(h, self.dropout, rng)
        return h


class SmallCnn(_Model):
    """Two conv/pool stages and a linear head, for small 2-channel images."""

    family = "cnn"

    def __init__(self, input_hw: tuple[int, int] = (14, 14), in_channels: int = 2,
                 conv_channels: tuple[int, int] = (16, 32), n_classes: int = 2,
                 kernel: int = 3):
        super().__init__()
        self.input_hw = tuple(input_hw)
        self.in_channels = in_channels
        self.conv_channels = tuple(conv_channels)
        self.n_classes = n_classes
        self.kernel = kernel
        h, w = self.input_hw
        c_prev = in_channels
        for i, c in enumerate(self.conv_channels):
            self._params[f"conv{i}.W"] = Tensor(np.zeros((kernel, kernel, c_prev, c)))
            self._params[f"conv{i}.b"] = Tensor(np.zeros(c))
            h, w = h - kernel + 1, w - kernel + 1
            if h % 2 or w % 2:
                raise ValueError(f"spatial dims must stay even for pooling, got {(h, w)}")
            h, w = h // 2, w // 2
            c_prev = c
        if h < 1 or w < 1:
            raise ValueError("input too small for this conv stack")
        self._head_in = h * w * c_prev
        self._params["head.W"] = Tensor(np.zeros((self._head_in, n_classes)))
        self._params["head.b"] = Tensor(np.zeros(n_classes))

    def _fan_in(self, name: str, t: Tensor) -> int:
        if name.startswith("conv"):
            kh, kw, cin, _ = t.shape
            return kh * kw * cin
        return t.shape[0]

    def forward(self, tape: GradientTape, x: Tensor, *, train: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        expect = (self.input_hw[0], self.input_hw[1], self.in_channels)
        if x.data.ndim != 4 or x.shape[1:] != expect:
            raise ValueError(f"expected (batch, {expect[0]}, {expect[1]}, {expect[2]}), got {x.shape}")
        h = x
        for i in range(len(self.conv_channels)):
            h = tape.conv2d(h, self._params[f"conv{i}.W"], self._params[f"conv{i}.b"])
            h = tape.relu(h)
            h = tape.maxpool2(h)
        h = tape.reshape(h, (x.shape[0], self._head_in))
        return tape.add_rows(tape.matmul(h, self._params["head.W"]), self._params["head.b"])


def model_from_family(family: str, **kwargs) -> _Model:
    families = {"linear": LinearClassifier, "mlp": Mlp, "cnn": SmallCnn}
    if family not in families:
        raise ValueError(f"unknown model family '{family}'")
    return families[family](**kwargs)
