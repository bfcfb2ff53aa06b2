"""Two-layer feed-forward network mapping 30 shape features to 9 category
scores, trained with mini-batch gradient descent on cross-entropy."""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import Corrupt, MissingCategory, VersionMismatch

N_FEATURES = 30
N_CATEGORIES = 9

CATEGORY_NAMES = (
    "boats", "animals", "cartoon", "automobiles", "human",
    "trees", "buildings", "computers", "trains",
)


@dataclass(frozen=True)
class Category:
    code: int
    name: str


CATEGORIES = tuple(Category(i, n) for i, n in enumerate(CATEGORY_NAMES))
_BY_NAME = {c.name: c for c in CATEGORIES}


def category_by_code(code: int) -> Category:
    if not 0 <= code < N_CATEGORIES:
        raise ValueError(f"category code {code} out of range")
    return CATEGORIES[code]


def category_by_name(name: str) -> Category:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown category name {name!r}")


@dataclass(frozen=True)
class NetworkWeights:
    w1: np.ndarray  # (30, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, 9)
    b2: np.ndarray  # (9,)
    seed: int

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    def __post_init__(self):
        h = self.w1.shape[1]
        if self.w1.shape != (N_FEATURES, h) or self.b1.shape != (h,):
            raise ValueError("inconsistent hidden-layer shapes")
        if self.w2.shape != (h, N_CATEGORIES) or self.b2.shape != (N_CATEGORIES,):
            raise ValueError("inconsistent output-layer shapes")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.isfinite(arr).all():
                raise ValueError("weights must be finite")


@dataclass(frozen=True)
class TrainConfig:
    rate: float = 0.1
    batch_size: int = 16
    max_epochs: int = 500
    target_loss: float = 0.01


def init_network(seed: int, hidden: int = 24) -> NetworkWeights:
    """Xavier-uniform weights from a seeded generator; zero biases."""
    if hidden < 1:
        raise ValueError("hidden width must be >= 1")
    rng = np.random.default_rng(seed)
    limit1 = np.sqrt(6.0 / (N_FEATURES + hidden))
    limit2 = np.sqrt(6.0 / (hidden + N_CATEGORIES))
    return NetworkWeights(
        w1=rng.uniform(-limit1, limit1, size=(N_FEATURES, hidden)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-limit2, limit2, size=(hidden, N_CATEGORIES)),
        b2=np.zeros(N_CATEGORIES),
        seed=seed,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(w: NetworkWeights, x: np.ndarray):
    hidden = _sigmoid(x @ w.w1 + w.b1)
    probs = _softmax(hidden @ w.w2 + w.b2)
    return hidden, probs


def forward(w: NetworkWeights, x: np.ndarray) -> np.ndarray:
    """Probability distribution over the nine categories."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (N_FEATURES,):
        raise ValueError(f"descriptor must have {N_FEATURES} entries")
    _, probs = _forward_batch(w, x[None, :])
    return probs[0]


def predict_category(w: NetworkWeights, x: np.ndarray) -> tuple[Category, np.ndarray]:
    """Most probable category (ties go to the smallest code) plus the full
    distribution."""
    probs = forward(w, x)
    return CATEGORIES[int(np.argmax(probs))], probs


def _loss_and_grads(w: NetworkWeights, x: np.ndarray, targets: np.ndarray):
    """Mean cross-entropy over the batch and gradients for every parameter."""
    n = x.shape[0]
    hidden, probs = _forward_batch(w, x)
    eps = np.finfo(np.float64).tiny
    loss = float(-np.log(probs[np.arange(n), targets] + eps).mean())
    dlogits = probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    dlogits /= n
    grad_w2 = hidden.T @ dlogits
    grad_b2 = dlogits.sum(axis=0)
    dhidden = dlogits @ w.w2.T
    dz1 = dhidden * hidden * (1.0 - hidden)
    grad_w1 = x.T @ dz1
    grad_b1 = dz1.sum(axis=0)
    return loss, (grad_w1, grad_b1, grad_w2, grad_b2)


def _coerce_samples(samples):
    xs, ts = [], []
    for descriptor, category in samples:
        code = category.code if isinstance(category, Category) else int(category)
        xs.append(np.asarray(descriptor, dtype=np.float64))
        ts.append(code)
    return np.stack(xs), np.array(ts, dtype=np.int64)


def train(
    w: NetworkWeights,
    samples,
    cfg: TrainConfig = TrainConfig(),
    required_categories=CATEGORIES,
) -> tuple[NetworkWeights, list[float]]:
    """Mini-batch gradient descent; shuffling is seeded by the weights' seed.

    Stops at max_epochs or once the epoch-mean loss drops below target_loss.
    `required_categories` defaults to all nine; every one of them must appear
    in the sample labels at least once.
    """
    x, targets = _coerce_samples(samples)
    present = set(targets.tolist())
    for cat in required_categories:
        if cat.code not in present:
            raise MissingCategory(f"no samples for category {cat.name!r}")
    w1, b1 = w.w1.copy(), w.b1.copy()
    w2, b2 = w.w2.copy(), w.b2.copy()
    rng = np.random.default_rng(w.seed)
    n = x.shape[0]
    history: list[float] = []
    current = replace(w, w1=w1, b1=b1, w2=w2, b2=b2)
    for _ in range(cfg.max_epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, (gw1, gb1, gw2, gb2) = _loss_and_grads(current, x[idx], targets[idx])
            batch_losses.append(loss)
            w1 -= cfg.rate * gw1
            b1 -= cfg.rate * gb1
            w2 -= cfg.rate * gw2
            b2 -= cfg.rate * gb2
            current = replace(w, w1=w1, b1=b1, w2=w2, b2=b2)
        epoch_loss = float(np.mean(batch_losses))
        history.append(epoch_loss)
        if epoch_loss < cfg.target_loss:
            break
    return current, history


def gradient_check(w: NetworkWeights, x: np.ndarray, target: int,
                   step: float = 1e-5) -> float:
    """Max relative error between analytic gradients and central finite
    differences over every parameter."""
    x = np.asarray(x, dtype=np.float64)[None, :]
    targets = np.array([target], dtype=np.int64)
    _, grads = _loss_and_grads(w, x, targets)
    params = {"w1": w.w1.copy(), "b1": w.b1.copy(),
              "w2": w.w2.copy(), "b2": w.b2.copy()}
    tiny = np.finfo(np.float64).tiny

    def loss_only() -> float:
        hidden = _sigmoid(x @ params["w1"] + params["b1"])
        probs = _softmax(hidden @ params["w2"] + params["b2"])
        return float(-np.log(probs[0, target] + tiny))

    worst = 0.0
    for name, analytic in zip(("w1", "b1", "w2", "b2"), grads):
        flat = params[name].ravel()
        numeric = np.zeros_like(analytic)
        num_flat = numeric.ravel()
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            lp = loss_only()
            flat[i] = original - step
            lm = loss_only()
            flat[i] = original
            num_flat[i] = (lp - lm) / (2.0 * step)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-4)
        worst = max(worst, float((np.abs(analytic - numeric) / denom).max()))
    return worst


_MAGIC = b"BPNW"
_VERSION = 1
_HEADER = struct.Struct("<4sBIq")


def serialize(w: NetworkWeights) -> bytes:
    """Versioned little-endian binary: magic, version, hidden width, seed,
    then w1, b1, w2, b2 as 64-bit floats."""
    header = _HEADER.pack(_MAGIC, _VERSION, w.hidden, w.seed)
    body = b"".join(
        arr.astype("<f8").tobytes() for arr in (w.w1, w.b1, w.w2, w.b2)
    )
    return header + body


def deserialize(payload: bytes) -> NetworkWeights:
    if len(payload) < _HEADER.size:
        raise Corrupt("payload shorter than the header")
    magic, version, hidden, seed = _HEADER.unpack_from(payload)
    if magic != _MAGIC:
        raise Corrupt("bad magic")
    if version != _VERSION:
        raise VersionMismatch(f"unsupported weight version {version}")
    counts = (N_FEATURES * hidden, hidden, hidden * N_CATEGORIES, N_CATEGORIES)
    expected = _HEADER.size + 8 * sum(counts)
    if len(payload) != expected:
        raise Corrupt(f"expected {expected} bytes, got {len(payload)}")
    offset = _HEADER.size
    arrays = []
    for count in counts:
        arrays.append(
            np.frombuffer(payload, dtype="<f8", count=count, offset=offset).copy()
        )
        offset += 8 * count
    w1, b1, w2, b2 = arrays
    return NetworkWeights(
        w1=w1.reshape(N_FEATURES, hidden),
        b1=b1,
        w2=w2.reshape(hidden, N_CATEGORIES),
        b2=b2,
        seed=seed,
    )
