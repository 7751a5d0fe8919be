"""POSITIVE/NEGATIVE sentence classifier: a one-hidden-layer sigmoid network.

With two classes the one-vs-all scheme reduces to a single POSITIVE-vs-rest
unit. Sentences are hashed (FNV-1a, 64 bit) into a fixed-width bag of
features; the last slot flags an interrogative word.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .corpus_io import ModelFile, format_float
from .errors import TrainingError
from .lang import INTERROGATIVES
from .segmenter import parse_numeral

POSITIVE, NEGATIVE = "POSITIVE", "NEGATIVE"
DIM = 4096
RESERVED = 1
NUM = "<NUM>"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(text):
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _MASK
    return h


def _pairs(sentence):
    for tok in sentence:
        if isinstance(tok, tuple):
            yield tok
        else:
            yield tok.surface, tok.tag


def feature_strings(sentence):
    feats = []
    for surface, tag in _pairs(sentence):
        if tag == "CD" or parse_numeral(surface) is not None:
            surface = NUM
        feats.append("w:" + surface)
        if tag == "VB":
            feats.append(f"v:{surface}/{tag}")
    return feats


def featurize_sentence(sentence, dim=DIM, interrogatives=INTERROGATIVES):
    """Dense count vector for a tagged sentence (TaggedToken or (surface, tag) items)."""
    vec = np.zeros(dim)
    pairs = list(_pairs(sentence))
    for f in feature_strings(pairs):
        vec[fnv1a_64(f) % (dim - RESERVED)] += 1.0
    if any(s in interrogatives or t == "QW" for s, t in pairs):
        vec[dim - 1] = 1.0
    return vec


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class PolarityLabel(NamedTuple):
    label: str
    confidence: float


@dataclass(eq=False)
class PolarityModel:
    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H,)
    b2: float
    final_loss: float | None = field(default=None, repr=False)

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        self.b2 = float(self.b2)

    @property
    def input_dim(self):
        return self.w1.shape[1]

    @property
    def hidden(self):
        return self.w1.shape[0]

    @classmethod
    def zeros(cls, input_dim=DIM, hidden=16):
        return cls(np.zeros((hidden, input_dim)), np.zeros(hidden), np.zeros(hidden), 0.0)

    def forward(self, X):
        """Output probabilities for a (N, D) batch; also returns hidden activations."""
        A = sigmoid(X @ self.w1.T + self.b1)
        return sigmoid(A @ self.w2 + self.b2), A

    def params(self):
        return [self.w1, self.b1, self.w2, np.array([self.b2])]

    def to_model_file(self):
        H, D = self.w1.shape
        return ModelFile("polarity", {
            "meta": [["input_dim", str(D)], ["hidden", str(H)], ["b2", format_float(self.b2)]],
            "w1": [[format_float(x) for x in row] for row in self.w1],
            "b1": [[format_float(x) for x in self.b1]],
            "w2": [[format_float(x) for x in self.w2]],
        })

    @classmethod
    def from_model_file(cls, mf):
        D, H = int(mf.scalar("input_dim")), int(mf.scalar("hidden"))
        w1 = np.array([[float(x) for x in row] for row in mf.section("w1")])
        if w1.shape != (H, D):
            raise ValueError(f"w1 has shape {w1.shape}, expected {(H, D)}")
        return cls(w1, np.array([float(x) for x in mf.section("b1")[0]]),
                   np.array([float(x) for x in mf.section("w2")[0]]), float(mf.scalar("b2")))

    def __eq__(self, other):
        if not isinstance(other, PolarityModel):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.params(), other.params()))


def loss_and_gradients(model, X, y):
    """Mean binary cross-entropy and its gradients w.r.t. (w1, b1, w2, b2)."""
    A = sigmoid(X @ model.w1.T + model.b1)
    z = A @ model.w2 + model.b2
    p = sigmoid(z)
    # log p = -softplus(-z), log(1 - p) = -softplus(z)
    loss = float(np.mean(y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z)))
    n = X.shape[0]
    d_out = (p - y) / n
    g_w2 = A.T @ d_out
    g_b2 = d_out.sum()
    d_hid = np.outer(d_out, model.w2) * A * (1 - A)
    g_w1 = d_hid.T @ X
    g_b1 = d_hid.sum(axis=0)
    return loss, (g_w1, g_b1, g_w2, g_b2)


@dataclass(frozen=True)
class PolarityConfig:
    hidden: int = 16
    epochs: int = 2000
    learning_rate: float = 0.05
    seed: int = 42
    input_dim: int = DIM


def train_polarity_vectors(X, y, config=PolarityConfig()):
    """Full-batch gradient descent on precomputed feature vectors (y: 1 = POSITIVE)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise TrainingError("empty polarity dataset")
    if not np.all(np.isfinite(X)):
        raise TrainingError("feature vectors must be finite")
    if y.min() == y.max():
        raise TrainingError("polarity training needs both POSITIVE and NEGATIVE examples")
    rng = np.random.default_rng(config.seed)
    D = X.shape[1]
    H = config.hidden
    model = PolarityModel(rng.uniform(-0.5, 0.5, (H, D)), rng.uniform(-0.5, 0.5, H),
                          rng.uniform(-0.5, 0.5, H), rng.uniform(-0.5, 0.5))
    lr = config.learning_rate
    history = []
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(config.epochs):
            loss, (gw1, gb1, gw2, gb2) = loss_and_gradients(model, X, y)
            if not np.isfinite(loss):
                raise TrainingError(f"polarity loss diverged at epoch {epoch}; lower the learning rate")
            history.append(loss)
            model.w1 -= lr * gw1
            model.b1 -= lr * gb1
            model.w2 -= lr * gw2
            model.b2 -= lr * gb2
    if not all(np.all(np.isfinite(p)) for p in model.params()):
        raise TrainingError("polarity weights diverged; lower the learning rate")
    model.final_loss = loss_and_gradients(model, X, y)[0]
    model.history = history
    return model


def train_polarity(dataset, config=PolarityConfig()):
    """``dataset``: iterable of (tagged sentence, "POSITIVE" | "NEGATIVE")."""
    dataset = list(dataset)
    X = np.array([featurize_sentence(s, config.input_dim) for s, _ in dataset]).reshape(len(dataset), -1)
    y = np.array([1.0 if lab == POSITIVE else 0.0 for _, lab in dataset])
    return train_polarity_vectors(X, y, config)


def classify_vector(model, x):
    p = float(model.forward(np.asarray(x, dtype=float)[None, :])[0][0])
    return PolarityLabel(POSITIVE if p >= 0.5 else NEGATIVE, max(p, 1.0 - p))


def classify_polarity(model, sentence):
    return classify_vector(model, featurize_sentence(sentence, model.input_dim))


def accuracy(model, X, y):
    p = model.forward(np.asarray(X, dtype=float))[0]
    return float(np.mean((p >= 0.5) == (np.asarray(y) >= 0.5)))

