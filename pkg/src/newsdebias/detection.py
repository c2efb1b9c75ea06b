"""Binary biased / non-biased sentence classifier.

The built-in model is logistic regression over hashed, lowercased token
n-grams, trained by full-batch gradient descent on the mean binary
cross-entropy. Anything with a ``predict_proba(text) -> float`` method can
stand in for it (see :class:`Detector`).
"""

from __future__ import annotations

import enum
import logging
import struct
import zlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from scipy import sparse

from .text import tokenize

log = logging.getLogger(__name__)

DEFAULT_HASH_DIMENSION = 2**18
MAGIC = b"DBDM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIdB")

# Keeps probabilities strictly inside (0, 1) where float sigmoid saturates.
_PROB_EPS = 1e-15


class Label(str, enum.Enum):
    BIASED = "Biased"
    NON_BIASED = "NonBiased"


class Detector(Protocol):
    threshold: float

    def predict_proba(self, text: str) -> float: ...


@dataclass(frozen=True)
class DetectionResult:
    label: Label
    probability: float


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.5
    l2: float = 1e-6
    seed: int = 0
    hash_dimension: int = DEFAULT_HASH_DIMENSION
    ngram_orders: tuple[int, ...] = (1, 2)
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")


@dataclass
class DetectorModel:
    hash_dimension: int = DEFAULT_HASH_DIMENSION
    ngram_orders: tuple[int, ...] = (1, 2)
    weights: np.ndarray | None = None
    bias_term: float = 0.0
    threshold: float = 0.5
    loss_history: list[float] = field(default_factory=list, compare=False)

    def __post_init__(self) -> None:
        if self.hash_dimension < 1:
            raise ValueError("hash_dimension must be >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not self.ngram_orders or min(self.ngram_orders) < 1:
            raise ValueError("ngram_orders must be positive integers")
        self.ngram_orders = tuple(sorted(set(self.ngram_orders)))
        if self.weights is None:
            self.weights = np.zeros(self.hash_dimension)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.hash_dimension,):
            raise ValueError("weights length must equal hash_dimension")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias_term):
            raise ValueError("weights must be finite")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectorModel):
            return NotImplemented
        return (
            self.hash_dimension == other.hash_dimension
            and self.ngram_orders == other.ngram_orders
            and self.bias_term == other.bias_term
            and self.threshold == other.threshold
            and np.array_equal(self.weights, other.weights)
        )

    def featurize(self, text: str) -> dict[int, float]:
        return featurize(self, text)

    def predict_proba(self, text: str) -> float:
        return predict_proba(self, text)

    def classify(self, text: str) -> DetectionResult:
        return classify(self, text)

    def save(self, path: str | Path) -> None:
        save_model(self, path)


def ngrams(text: str, orders: Iterable[int]) -> list[str]:
    words = [t.surface.lower() for t in tokenize(text).tokens]
    grams = []
    for n in orders:
        for i in range(len(words) - n + 1):
            grams.append(" ".join(words[i : i + n]))
    return grams


def bucket(gram: str, hash_dimension: int) -> int:
    return zlib.crc32(gram.encode("utf-8")) % hash_dimension


def featurize(model: DetectorModel | TrainConfig, text: str) -> dict[int, float]:
    """Hashed n-gram counts as a sparse ``{bucket: count}`` mapping."""
    counts: dict[int, float] = {}
    for gram in ngrams(text, model.ngram_orders):
        idx = bucket(gram, model.hash_dimension)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    return counts


def design_matrix(texts: Sequence[str], config: DetectorModel | TrainConfig) -> sparse.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        feats = featurize(config, text)
        for idx in sorted(feats):
            indices.append(idx)
            data.append(feats[idx])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(texts), config.hash_dimension),
    )


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def bce_loss_and_grad(weights: np.ndarray, bias: float, X, y: np.ndarray, l2: float) -> tuple[float, np.ndarray, float]:
    """Mean binary cross-entropy plus ``l2 * ||w||^2`` and its gradient.

    Returns:
        (loss, d loss / d weights, d loss / d bias)
    """
    z = X @ weights + bias
    # -[y log s(z) + (1-y) log(1-s(z))] == logaddexp(0, z) - y z
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + l2 * weights @ weights)
    residual = (sigmoid(z) - y) / len(y)
    grad_w = X.T @ residual + 2.0 * l2 * weights
    grad_b = float(residual.sum())
    return loss, np.asarray(grad_w).ravel(), grad_b


def train_detector(records: Sequence[tuple[str, int]], config: TrainConfig = TrainConfig()) -> DetectorModel:
    """Fit the hashed n-gram logistic model by full-batch gradient descent.

    Weights start at zero, so the fit does not depend on ``config.seed``;
    the seed is kept in the config for interface parity with stochastic
    detectors. If a step would raise the loss, the step size is halved
    and the step retried, so the loss never increases between epochs.

    Raises:
        ValueError: if the labels contain only one class ("degenerate labels").
    """
    texts = [t for t, _ in records]
    y = np.array([int(label) for _, label in records], dtype=np.float64)
    if len(y) == 0 or not set(np.unique(y)) == {0.0, 1.0}:
        raise ValueError("degenerate labels: training needs both classes")

    model = DetectorModel(
        hash_dimension=config.hash_dimension,
        ngram_orders=config.ngram_orders,
        threshold=config.threshold,
    )
    X = design_matrix(texts, config)
    w = np.zeros(config.hash_dimension)
    b = 0.0
    lr = config.learning_rate
    loss, gw, gb = bce_loss_and_grad(w, b, X, y, config.l2)
    history = [loss]
    for epoch in range(config.epochs):
        for _ in range(60):
            w_new = w - lr * gw
            b_new = b - lr * gb
            new_loss, new_gw, new_gb = bce_loss_and_grad(w_new, b_new, X, y, config.l2)
            if new_loss <= loss:
                break
            lr *= 0.5
        else:
            log.info("step size underflow at epoch %d; stopping", epoch)
            break
        w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
        history.append(loss)
        log.debug("epoch %d loss %.6f", epoch + 1, loss)

    model.weights = w
    model.bias_term = float(b)
    model.loss_history = history
    return model


def predict_proba(model: DetectorModel, text: str) -> float:
    z = model.bias_term
    for idx, count in featurize(model, text).items():
        z += model.weights[idx] * count
    return float(np.clip(sigmoid(z), _PROB_EPS, 1.0 - _PROB_EPS))


def classify(model: Detector, text: str) -> DetectionResult:
    p = model.predict_proba(text)
    # Ties go to Biased.
    label = Label.BIASED if p >= model.threshold else Label.NON_BIASED
    return DetectionResult(label, p)


def classify_batch(model: Detector, texts: Iterable[str]) -> list[DetectionResult]:
    return [classify(model, t) for t in texts]


def save_model(model: DetectorModel, path: str | Path) -> None:
    orders = model.ngram_orders
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, model.hash_dimension, model.threshold, len(orders)))
        fh.write(bytes(orders))
        fh.write(np.asarray(model.weights, dtype="<f8").tobytes())
        fh.write(struct.pack("<d", model.bias_term))


def load_model(path: str | Path) -> DetectorModel:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{path}: truncated model file")
    magic, version, dim, threshold, n_orders = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a detector model (bad magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {version}")
    pos = _HEADER.size
    orders = tuple(blob[pos : pos + n_orders])
    pos += n_orders
    expected = pos + 8 * dim + 8
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(blob)}")
    weights = np.frombuffer(blob, dtype="<f8", count=dim, offset=pos).astype(np.float64)
    (bias,) = struct.unpack_from("<d", blob, pos + 8 * dim)
    return DetectorModel(hash_dimension=dim, ngram_orders=orders, weights=weights, bias_term=bias, threshold=threshold)
