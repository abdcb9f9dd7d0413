"""MLP assembly: specs, the encoder+projection pair, and the auxiliary head."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import BatchNorm, L2Normalize, Linear, ReLU, Sigmoid

PAPER_ENCODER_WIDTHS = (2048, 1024, 512, 256, 128)
DESK_ENCODER_WIDTHS = (256, 128, 64, 32)
PAPER_PROJECTION_WIDTHS = (64, 32)
DESK_PROJECTION_WIDTHS = (16, 8)
AUXILIARY_WIDTHS = (64, 32, 16, 8, 2)

_NORMS = ("batch_norm", "none")
_ACTS = ("relu", "sigmoid", "none")


@dataclass(frozen=True)
class MlpSpec:
    """Layer-by-layer description: output width, normalization, activation."""

    layer_widths: tuple[int, ...]
    normalize: tuple[str, ...]
    activation: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "layer_widths", tuple(int(w) for w in self.layer_widths))
        object.__setattr__(self, "normalize", tuple(self.normalize))
        object.__setattr__(self, "activation", tuple(self.activation))
        if len(self.layer_widths) < 1:
            raise ValueError("MlpSpec: need at least one layer")
        if any(w < 1 for w in self.layer_widths):
            raise ValueError("MlpSpec: widths must be positive")
        if not (len(self.layer_widths) == len(self.normalize) == len(self.activation)):
            raise ValueError("MlpSpec: widths, normalize and activation must align")
        if any(nm not in _NORMS for nm in self.normalize):
            raise ValueError(f"MlpSpec: normalize entries must be one of {_NORMS}")
        if any(a not in _ACTS for a in self.activation):
            raise ValueError(f"MlpSpec: activation entries must be one of {_ACTS}")

    @property
    def out_width(self) -> int:
        return self.layer_widths[-1]


def encoder_spec(widths=DESK_ENCODER_WIDTHS) -> MlpSpec:
    """Fully connected stack, every layer normalized then ReLU-activated."""
    widths = tuple(widths)
    return MlpSpec(widths, ("batch_norm",) * len(widths), ("relu",) * len(widths))


def projection_spec(widths=DESK_PROJECTION_WIDTHS) -> MlpSpec:
    """Projection head: hidden ReLU layers, linear final layer, no normalization."""
    widths = tuple(widths)
    acts = ("relu",) * (len(widths) - 1) + ("none",)
    return MlpSpec(widths, ("none",) * len(widths), acts)


def auxiliary_spec() -> MlpSpec:
    """Fixed five-layer head ending in two sigmoid units."""
    w = AUXILIARY_WIDTHS
    return MlpSpec(
        w,
        ("batch_norm",) * (len(w) - 1) + ("none",),
        ("relu",) * (len(w) - 1) + ("sigmoid",),
    )


def _seed_list(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


class MLP:
    """Sequential network built from an MlpSpec.

    Layer seeds derive from (seed sequence, layer index) so identical specs
    and seeds rebuild identical parameters regardless of surrounding code.
    """

    def __init__(self, input_width: int, spec: MlpSpec, seed):
        if input_width < 1:
            raise ValueError("MLP: input width must be positive")
        self.input_width = input_width
        self.spec = spec
        self.seed = _seed_list(seed)
        self.layers = []
        prev = input_width
        for i, width in enumerate(spec.layer_widths):
            rng = np.random.default_rng(self.seed + [i])
            self.layers.append(Linear(prev, width, rng))
            if spec.normalize[i] == "batch_norm":
                self.layers.append(BatchNorm(width))
            if spec.activation[i] == "relu":
                self.layers.append(ReLU())
            elif spec.activation[i] == "sigmoid":
                self.layers.append(Sigmoid())
            prev = width

    @property
    def out_width(self) -> int:
        return self.spec.out_width

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        out = np.asarray(x, dtype=np.float64)
        if out.ndim != 2:
            raise ValueError("MLP.forward: expected a 2-D batch")
        for layer in self.layers:
            out = layer.forward(out, train)
        return out

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.gradients()]

    def sgd_step(self, lr: float):
        for p, g in zip(self.parameters(), self.gradients()):
            p -= lr * g

    def state_arrays(self) -> list[np.ndarray]:
        """Every array needed to reproduce eval behaviour, in a fixed order."""
        return [a for layer in self.layers for a in layer.state_arrays()]

    def load_state_arrays(self, arrays: list[np.ndarray]):
        own = self.state_arrays()
        if len(own) != len(arrays):
            raise ValueError(
                f"MLP.load_state_arrays: expected {len(own)} arrays, got {len(arrays)}"
            )
        for dst, src in zip(own, arrays):
            src = np.asarray(src, dtype=np.float64)
            if dst.shape != src.shape:
                raise ValueError(
                    f"MLP.load_state_arrays: shape mismatch {dst.shape} vs {src.shape}"
                )
            dst[...] = src

    def snapshot(self) -> list[np.ndarray]:
        return [a.copy() for a in self.state_arrays()]


@dataclass
class TrainState:
    """Bookkeeping from the last fit: epochs run and the best metric seen."""

    epochs_run: int = 0
    best_metric: float = float("nan")


class EncoderProjectionModel:
    """Encoder + projection network pair ("Model").

    The projection exists only to feed the contrastive loss; embed() returns
    the final encoder layer in eval mode, which is what downstream stages
    consume.
    """

    def __init__(self, input_width: int, enc_spec: MlpSpec, proj_spec: MlpSpec, seed):
        base = _seed_list(seed)
        self.encoder = MLP(input_width, enc_spec, base + [0])
        self.projection = MLP(enc_spec.out_width, proj_spec, base + [1])
        self.normalize = L2Normalize()
        self.train_state = TrainState()

    @property
    def input_width(self) -> int:
        return self.encoder.input_width

    @property
    def embedding_width(self) -> int:
        return self.encoder.out_width

    def forward(self, x: np.ndarray, train: bool = False):
        enc = self.encoder.forward(x, train)
        proj = self.normalize.forward(self.projection.forward(enc, train), train)
        return enc, proj

    def backward(self, grad_proj: np.ndarray):
        g = self.normalize.backward(grad_proj)
        g = self.projection.backward(g)
        return self.encoder.backward(g)

    def sgd_step(self, lr: float):
        self.encoder.sgd_step(lr)
        self.projection.sgd_step(lr)

    def embed(self, X: np.ndarray) -> np.ndarray:
        return self.encoder.forward(np.asarray(X, dtype=np.float64), train=False)

    def state_arrays(self) -> list[np.ndarray]:
        return self.encoder.state_arrays() + self.projection.state_arrays()

    def load_state_arrays(self, arrays: list[np.ndarray]):
        n_enc = len(self.encoder.state_arrays())
        self.encoder.load_state_arrays(arrays[:n_enc])
        self.projection.load_state_arrays(arrays[n_enc:])

    def snapshot(self) -> list[np.ndarray]:
        return [a.copy() for a in self.state_arrays()]


class AuxiliaryClassifier:
    """Two-output sigmoid head; predicted label is the argmax of the pair."""

    def __init__(self, input_width: int, seed, spec: MlpSpec | None = None):
        self.mlp = MLP(input_width, spec or auxiliary_spec(), seed)
        self.train_state = TrainState()

    @property
    def input_width(self) -> int:
        return self.mlp.input_width

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        return self.mlp.forward(x, train)

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return self.mlp.forward(np.asarray(X, dtype=np.float64), train=False)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_scores(X), axis=1).astype(np.int64)

    def state_arrays(self) -> list[np.ndarray]:
        return self.mlp.state_arrays()

    def load_state_arrays(self, arrays: list[np.ndarray]):
        self.mlp.load_state_arrays(arrays)
