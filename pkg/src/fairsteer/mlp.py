"""A small fully-connected classifier, implemented directly on numpy.

ReLU hidden layers, softmax output, mean cross-entropy loss, Adam updates.
Everything is deterministic for a given seed: He initialization and epoch
shuffling use ``numpy.random.default_rng(seed)`` streams and batches are
consumed in order.

The gradient code is written to be checkable against finite differences;
``loss_and_gradients`` is the single source of truth used by ``train``.
"""

from __future__ import annotations

import base64
import json
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyDataset,
    InvalidShape,
    LabelDimensionMismatch,
)

logger = logging.getLogger(__name__)

#: Logits are clamped to +-LOGIT_CLAMP before softmax to keep exp() finite.
LOGIT_CLAMP = 500.0

CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    """Hyperparameters for train / fine_tune.

    class_weighting switches on inverse-frequency sample weights (off by
    default). epochs == 0 is allowed and returns the model unchanged.
    """

    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    shuffle: bool = True
    class_weighting: bool = False

    def to_json(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "shuffle": self.shuffle,
            "class_weighting": self.class_weighting,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TrainConfig":
        return cls(**doc)


FINETUNE_EPOCHS = 10


def finetune_config(base: TrainConfig | None = None, **overrides) -> TrainConfig:
    """Default fine-tuning configuration: same optimizer, fewer epochs."""
    config = base if base is not None else TrainConfig()
    merged = {**config.to_json(), "epochs": FINETUNE_EPOCHS, **overrides}
    return TrainConfig(**merged)


@dataclass
class MlpModel:
    """Weights and biases of one network.

    layer_sizes includes input and output: (d_in, h1, ..., d_out).
    weights[i] has shape (layer_sizes[i], layer_sizes[i+1]).
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int = 0

    @property
    def num_classes(self) -> int:
        return self.layer_sizes[-1]

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    def copy(self) -> "MlpModel":
        return MlpModel(
            layer_sizes=self.layer_sizes,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            seed=self.seed,
        )


def init_model(layer_sizes: Sequence[int], seed: int = 0) -> MlpModel:
    """He-initialized model: W ~ N(0, 2 / fan_in), biases zero.

    Raises:
        InvalidShape: fewer than two layers or a non-positive width.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise InvalidShape(f"need at least input and output layers, got {sizes}")
    if any(s <= 0 for s in sizes):
        raise InvalidShape(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * std)
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return MlpModel(layer_sizes=sizes, weights=weights, biases=biases, seed=seed)


def _forward_batch(model: MlpModel, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """All layer pre-activations and activations plus output probabilities."""
    activations = [x]
    pre_activations = []
    out = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = out @ w + b
        pre_activations.append(z)
        if i < last:
            out = np.maximum(z, 0.0)
            activations.append(out)
    logits = np.clip(pre_activations[-1], -LOGIT_CLAMP, LOGIT_CLAMP)
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return pre_activations, activations, probs


def forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one vector (1-D in, 1-D out) or a batch.

    Rows sum to 1 within 1e-12 and all entries are finite for any finite
    input thanks to the logit clamp and max-shift.

    Raises:
        DimensionMismatch: feature width differs from the input layer.
    """
    x = np.asarray(features, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.input_dim:
        raise DimensionMismatch(
            f"model expects {model.input_dim} features, got {x.shape[1]}"
        )
    _, _, probs = _forward_batch(model, x)
    return probs[0] if single else probs


def predict(model: MlpModel, features: np.ndarray) -> np.ndarray | int:
    """Argmax class (ties go to the lowest class index)."""
    probs = forward(model, features)
    if probs.ndim == 1:
        return int(np.argmax(probs))
    return np.argmax(probs, axis=1).astype(np.int64)


def loss_and_gradients(
    model: MlpModel,
    x: np.ndarray,
    y: np.ndarray,
    sample_weights: np.ndarray | None = None,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean cross-entropy and its gradients w.r.t. every weight and bias.

    sample_weights, when given, reweight the per-sample losses (the mean
    becomes a weighted mean with weights normalized to sum to n).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    pre_activations, activations, probs = _forward_batch(model, x)

    if sample_weights is None:
        weights = np.ones(n)
    else:
        weights = np.asarray(sample_weights, dtype=np.float64)
        weights = weights * (n / weights.sum())

    eps = 1e-12
    picked = probs[np.arange(n), y]
    loss = float(np.mean(-np.log(picked + eps) * weights))

    # dL/dlogits for softmax + cross-entropy, honoring the clamp: entries
    # pinned by np.clip have zero gradient.
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits *= (weights / n)[:, None]
    clamped = np.abs(pre_activations[-1]) > LOGIT_CLAMP
    dlogits[clamped] = 0.0

    grad_w: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    grad_b: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    delta = dlogits
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ model.weights[layer].T
            delta = delta * (pre_activations[layer - 1] > 0.0)
    return loss, grad_w, grad_b


def train(
    model: MlpModel,
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    on_epoch: Callable[[int, float], None] | None = None,
) -> tuple[MlpModel, list[float]]:
    """Mini-batch Adam training; returns a new model and per-epoch losses.

    The input model is not modified. Loss history entries are the mean
    sample loss of each epoch (measured on the batches as trained).

    Raises:
        EmptyDataset: no samples.
        DimensionMismatch: feature width differs from the input layer.
        LabelDimensionMismatch: label count differs from the sample count,
            or a label is outside the output layer's range.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape[0] == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise DimensionMismatch(
            f"model expects (n, {model.input_dim}) features, got {x.shape}"
        )
    if y.shape != (x.shape[0],):
        raise LabelDimensionMismatch(
            f"expected {x.shape[0]} labels, got shape {y.shape}"
        )
    if y.min() < 0 or y.max() >= model.num_classes:
        raise LabelDimensionMismatch(
            f"labels span [{y.min()}, {y.max()}] but the model has "
            f"{model.num_classes} classes"
        )

    out = model.copy()
    history: list[float] = []
    if config.epochs == 0:
        return out, history

    n = x.shape[0]
    sample_weights = None
    if config.class_weighting:
        counts = np.bincount(y, minlength=model.num_classes).astype(np.float64)
        inverse = np.zeros_like(counts)
        inverse[counts > 0] = 1.0 / counts[counts > 0]
        sample_weights = inverse[y]

    m_w = [np.zeros_like(w) for w in out.weights]
    v_w = [np.zeros_like(w) for w in out.weights]
    m_b = [np.zeros_like(b) for b in out.biases]
    v_b = [np.zeros_like(b) for b in out.biases]
    rng = np.random.default_rng(config.seed)
    lr, b1, b2, eps = (
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.epsilon,
    )
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_weights = (
                sample_weights[batch] if sample_weights is not None else None
            )
            loss, grad_w, grad_b = loss_and_gradients(
                out, x[batch], y[batch], batch_weights
            )
            epoch_loss += loss * len(batch)
            step += 1
            correction1 = 1.0 - b1**step
            correction2 = 1.0 - b2**step
            for i in range(len(out.weights)):
                m_w[i] = b1 * m_w[i] + (1 - b1) * grad_w[i]
                v_w[i] = b2 * v_w[i] + (1 - b2) * grad_w[i] ** 2
                out.weights[i] -= lr * (m_w[i] / correction1) / (
                    np.sqrt(v_w[i] / correction2) + eps
                )
                m_b[i] = b1 * m_b[i] + (1 - b1) * grad_b[i]
                v_b[i] = b2 * v_b[i] + (1 - b2) * grad_b[i] ** 2
                out.biases[i] -= lr * (m_b[i] / correction1) / (
                    np.sqrt(v_b[i] / correction2) + eps
                )
        history.append(epoch_loss / n)
        if on_epoch is not None:
            on_epoch(epoch, history[-1])
    logger.debug(
        "trained %s for %d epochs, loss %.4f -> %.4f",
        "x".join(map(str, model.layer_sizes)),
        config.epochs,
        history[0],
        history[-1],
    )
    return out, history


def fine_tune(
    model: MlpModel,
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig | None = None,
    on_epoch: Callable[[int, float], None] | None = None,
) -> MlpModel:
    """Continue training from the current weights (warm start).

    Same optimizer as train with a shorter default schedule; optimizer
    moments start fresh.
    """
    tuned, _ = train(
        model, features, labels, config or finetune_config(), on_epoch=on_epoch
    )
    return tuned


def accuracy(model: MlpModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of samples whose argmax prediction matches the label."""
    predictions = predict(model, features)
    return float(np.mean(predictions == np.asarray(labels, dtype=np.int64)))


# -- checkpoints ---------------------------------------------------------------


def model_to_checkpoint(model: MlpModel, config: TrainConfig | None = None) -> dict:
    """JSON-safe checkpoint: layer sizes, row-major float64 weights, seed.

    Weights are embedded as base64 of the raw little-endian float64 bytes,
    which round-trips bit for bit.
    """

    def encode(a: np.ndarray) -> str:
        return base64.b64encode(
            np.ascontiguousarray(a, dtype="<f8").tobytes()
        ).decode("ascii")

    return {
        "version": CHECKPOINT_VERSION,
        "layer_sizes": list(model.layer_sizes),
        "weights": [encode(w) for w in model.weights],
        "biases": [encode(b) for b in model.biases],
        "seed": model.seed,
        "train_config": (config or TrainConfig()).to_json(),
    }


def model_from_checkpoint(doc: dict) -> tuple[MlpModel, TrainConfig]:
    version = doc.get("version")
    if version != CHECKPOINT_VERSION:
        raise InvalidShape(f"unsupported checkpoint version {version!r}")
    sizes = tuple(int(s) for s in doc["layer_sizes"])

    def decode(payload: str, shape: tuple[int, ...]) -> np.ndarray:
        raw = base64.b64decode(payload.encode("ascii"))
        return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)

    weights = [
        decode(payload, (sizes[i], sizes[i + 1]))
        for i, payload in enumerate(doc["weights"])
    ]
    biases = [
        decode(payload, (sizes[i + 1],)) for i, payload in enumerate(doc["biases"])
    ]
    model = MlpModel(
        layer_sizes=sizes, weights=weights, biases=biases, seed=int(doc["seed"])
    )
    return model, TrainConfig.from_json(doc["train_config"])


def save_checkpoint(model: MlpModel, path: str, config: TrainConfig | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_checkpoint(model, config), handle)


def load_checkpoint(path: str) -> tuple[MlpModel, TrainConfig]:
    with open(path, "r", encoding="utf-8") as handle:
        return model_from_checkpoint(json.load(handle))
