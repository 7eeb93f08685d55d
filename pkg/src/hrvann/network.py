"""One-hidden-layer sigmoid network with two outputs, trained by backpropagation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DivergenceError, ModelFormatError, ShapeError

HIDDEN_RANGE = (2, 6)
NET_FORMAT = "hrvann-network"
NET_VERSION = 1


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class Network:
    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (2, hidden)
    b2: np.ndarray  # (2,)

    @property
    def n_in(self) -> int:
        return self.w1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w1.shape[0]

    def params(self):
        return (self.w1, self.b1, self.w2, self.b2)

    def to_dict(self) -> dict:
        return {
            "format": NET_FORMAT,
            "version": NET_VERSION,
            "n_in": self.n_in,
            "n_hidden": self.n_hidden,
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Network":
        if d.get("format") != NET_FORMAT or d.get("version") != NET_VERSION:
            raise ModelFormatError(f"unsupported network format {d.get('format')!r} v{d.get('version')!r}")
        n_in, n_h = int(d["n_in"]), int(d["n_hidden"])
        return cls(
            np.asarray(d["w1"], dtype=float).reshape(n_h, n_in),
            np.asarray(d["b1"], dtype=float).reshape(n_h),
            np.asarray(d["w2"], dtype=float).reshape(2, n_h),
            np.asarray(d["b2"], dtype=float).reshape(2),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Network":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    max_epochs: int = 1000
    target_mse: float = 1e-3
    seed: int = 0
    batch_size: int | None = None  # None: full batch

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be positive")
        if self.target_mse < 0:
            raise ConfigError("target_mse must be non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be positive")


def init_network(n_in: int, n_hidden: int, seed) -> Network:
    """Uniform weights in [-1/sqrt(n_in), 1/sqrt(n_in)], zero biases."""
    lo, hi = HIDDEN_RANGE
    if not lo <= n_hidden <= hi:
        raise ConfigError(f"hidden size {n_hidden} outside [{lo}, {hi}]")
    if n_in < 1:
        raise ConfigError("network needs at least one input")
    rng = np.random.default_rng(seed)
    a = 1.0 / np.sqrt(n_in)
    return Network(
        rng.uniform(-a, a, size=(n_hidden, n_in)),
        np.zeros(n_hidden),
        rng.uniform(-a, a, size=(2, n_hidden)),
        np.zeros(2),
    )


def _check_inputs(net, X):
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != net.n_in:
        raise ShapeError(f"network expects {net.n_in} inputs, got {X.shape[1]}")
    return X, single


def _forward(net, X):
    h = sigmoid(X @ net.w1.T + net.b1)
    y = sigmoid(h @ net.w2.T + net.b2)
    return h, y


def forward(net: Network, x) -> np.ndarray:
    """Outputs ``(y_normal, y_ihd)``; accepts one row or a batch."""
    X, single = _check_inputs(net, x)
    y = _forward(net, X)[1]
    return y[0] if single else y


def _backprop(net, X, T):
    """Mean over rows of the per-sample loss 0.5*sum((y-t)^2) and its gradients."""
    h, y = _forward(net, X)
    n = X.shape[0]
    err = y - T
    loss = 0.5 * np.sum(err * err) / n
    d2 = err * y * (1.0 - y)
    d1 = (d2 @ net.w2) * h * (1.0 - h)
    return loss, (d1.T @ X / n, d1.sum(axis=0) / n, d2.T @ h / n, d2.sum(axis=0) / n)


def gradient(net: Network, x, target):
    """Exact gradients of the mean of 0.5*sum((y-t)^2) over the given rows.

    Returns a tuple shaped like ``(w1, b1, w2, b2)``.
    """
    X, _ = _check_inputs(net, x)
    T = np.atleast_2d(np.asarray(target, dtype=float))
    if T.shape != (X.shape[0], 2):
        raise ShapeError(f"targets must have shape ({X.shape[0]}, 2), got {T.shape}")
    return _backprop(net, X, T)[1]


def loss(net: Network, x, target) -> float:
    X, _ = _check_inputs(net, x)
    T = np.atleast_2d(np.asarray(target, dtype=float))
    err = _forward(net, X)[1] - T
    return float(0.5 * np.sum(err * err) / X.shape[0])


def one_hot(labels) -> np.ndarray:
    """0 (normal) -> (1, 0); 1 (ihd) -> (0, 1)."""
    labels = np.asarray(labels, dtype=int)
    T = np.zeros((labels.size, 2))
    T[np.arange(labels.size), labels] = 1.0
    return T


def train(net: Network, X, T, cfg: TrainConfig = TrainConfig()):
    """Gradient descent with momentum on the mean squared error.

    Full-batch by default.  Stops after ``max_epochs`` or once the epoch MSE
    (mean per-sample loss at the start of the epoch) is at most
    ``target_mse``.  Returns ``(trained network, list of epoch MSE)``.
    """
    X, _ = _check_inputs(net, X)
    T = np.asarray(T, dtype=float)
    if X.shape[0] == 0:
        raise ShapeError("empty training set")
    if T.shape != (X.shape[0], 2):
        raise ShapeError(f"targets must have shape ({X.shape[0]}, 2), got {T.shape}")
    params = [p.copy() for p in net.params()]
    velocity = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(cfg.seed) if cfg.batch_size else None
    lr, mu = cfg.learning_rate, cfg.momentum
    curve = []
    cur = Network(*params)
    for _ in range(cfg.max_epochs):
        if rng is None:
            mse, grads = _backprop(cur, X, T)
            batches = [grads]
        else:
            mse = loss(cur, X, T)
            order = rng.permutation(X.shape[0])
            batches = []
        if not np.isfinite(mse):
            raise DivergenceError("training loss became non-finite; lower the learning rate")
        curve.append(float(mse))
        if mse <= cfg.target_mse:
            break
        if rng is not None:
            for start in range(0, X.shape[0], cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                grads = _backprop(cur, X[idx], T[idx])[1]
                _step(params, velocity, grads, lr, mu)
                cur = Network(*params)
        else:
            _step(params, velocity, batches[0], lr, mu)
            cur = Network(*params)
    if not all(np.all(np.isfinite(p)) for p in params):
        raise DivergenceError("weights became non-finite; lower the learning rate")
    return Network(*[p.copy() for p in params]), curve


def _step(params, velocity, grads, lr, mu):
    for p, v, g in zip(params, velocity, grads):
        v *= mu
        v -= lr * g
        p += v


def predict(net: Network, x):
    """``(class, score)`` per row: class 1 (ihd) when y_ihd > y_normal, score = y_ihd."""
    y = forward(net, x)
    if y.ndim == 1:
        return int(y[1] > y[0]), float(y[1])
    return (y[:, 1] > y[:, 0]).astype(int), y[:, 1].copy()
