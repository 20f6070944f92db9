"""Two-tower graph-convolutional classifier over candidate-edge splits.

Each half of a split example is encoded by two graph convolution layers with
shared weights and mean-pooled; the concatenated pair feeds a linear head.
Training is full-batch Adam on a summed sigmoid cross-entropy, so the same
code serves the single-output edge classifier and the multi-label statement
kind classifier. Everything is plain numpy float64 for reproducibility.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import N_FEATURES, SplitExample


class TrainingDiverged(RuntimeError):
    """Loss left the finite/stable regime during optimization."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch}: loss={loss!r}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 32
    out_dim: int = 1
    learning_rate: float = 1e-2
    epochs: int = 200
    l2: float = 1e-4
    seed: int = 0
    loss_ceiling: float = 1e6


@dataclass
class GcnModel:
    """Learned parameters plus the config that produced them."""

    w1: np.ndarray  # (N_FEATURES, hidden)
    w2: np.ndarray  # (hidden, hidden)
    head_w: np.ndarray  # (2 * hidden, out_dim)
    head_b: np.ndarray  # (out_dim,)
    config: TrainConfig

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.w2, self.head_w, self.head_b]


@dataclass
class TrainLog:
    losses: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def init_model(config: TrainConfig) -> GcnModel:
    """Uniform Glorot weights, zero bias, from a seeded generator."""
    rng = np.random.default_rng(config.seed)

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    return GcnModel(
        w1=glorot(N_FEATURES, config.hidden),
        w2=glorot(config.hidden, config.hidden),
        head_w=glorot(2 * config.hidden, config.out_dim),
        head_b=np.zeros(config.out_dim),
        config=config,
    )


def normalize_adjacency(adj: np.ndarray) -> np.ndarray:
    """Self-looped symmetric normalization D^-1/2 (A + I) D^-1/2."""
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ValueError("adjacency must be square")
    hat = adj + np.eye(adj.shape[0])
    inv_sqrt = 1.0 / np.sqrt(hat.sum(axis=1))
    return hat * inv_sqrt[:, None] * inv_sqrt[None, :]


@dataclass(frozen=True)
class EncodedExample:
    """Per-tower constants reused across epochs: S and S @ X."""

    s_before: np.ndarray
    sx_before: np.ndarray
    s_after: np.ndarray
    sx_after: np.ndarray


def encode_example(example: SplitExample) -> EncodedExample:
    """Symmetrize and normalize both towers, premultiplying the features."""

    def tower(adj: np.ndarray, feats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = normalize_adjacency(np.maximum(adj, adj.T))
        return s, s @ feats

    s_b, sx_b = tower(example.adj_before, example.feat_before)
    s_a, sx_a = tower(example.adj_after, example.feat_after)
    return EncodedExample(s_b, sx_b, s_a, sx_a)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _tower_forward(model: GcnModel, s: np.ndarray, sx: np.ndarray):
    z1 = sx @ model.w1
    h1 = np.maximum(z1, 0.0)
    m = s @ h1
    z2 = m @ model.w2
    h2 = np.maximum(z2, 0.0)
    pooled = h2.mean(axis=0)
    return pooled, (z1, m, z2)


def forward(model: GcnModel, encoded: EncodedExample) -> np.ndarray:
    """Head logits for one example, shape (out_dim,)."""
    pooled_b, _ = _tower_forward(model, encoded.s_before, encoded.sx_before)
    pooled_a, _ = _tower_forward(model, encoded.s_after, encoded.sx_after)
    concat = np.concatenate([pooled_b, pooled_a])
    return concat @ model.head_w + model.head_b


def predict_proba(model: GcnModel, example: SplitExample) -> np.ndarray:
    """Per-output probabilities for a raw split example."""
    return _sigmoid(forward(model, encode_example(example)))


def loss_and_gradients(
    model: GcnModel,
    batch: list[EncodedExample],
    targets: np.ndarray,
) -> tuple[float, list[np.ndarray]]:
    """Mean summed cross-entropy plus L2, with gradients for all parameters.

    targets has shape (len(batch), out_dim) with 0/1 entries.
    """
    if targets.shape != (len(batch), model.config.out_dim):
        raise ValueError("targets shape does not match batch/out_dim")
    grads = [np.zeros_like(p) for p in model.params()]
    g_w1, g_w2, g_hw, g_hb = grads
    total = 0.0

    for encoded, y in zip(batch, targets):
        towers = []
        pooled = []
        for s, sx in (
            (encoded.s_before, encoded.sx_before),
            (encoded.s_after, encoded.sx_after),
        ):
            p, cache = _tower_forward(model, s, sx)
            towers.append((s, sx, cache))
            pooled.append(p)
        concat = np.concatenate(pooled)
        z = concat @ model.head_w + model.head_b
        # softplus(z) - y*z, summed over output dims
        total += float(np.sum(np.logaddexp(0.0, z) - y * z))

        dz = _sigmoid(z) - y
        g_hw += np.outer(concat, dz)
        g_hb += dz
        dconcat = model.head_w @ dz
        h = model.config.hidden
        for (s, sx, (z1, m, z2)), dpool in zip(towers, (dconcat[:h], dconcat[h:])):
            k = s.shape[0]
            dh2 = np.repeat(dpool[None, :] / k, k, axis=0)
            dz2 = dh2 * (z2 > 0)
            g_w2 += m.T @ dz2
            dm = dz2 @ model.w2.T
            dh1 = s.T @ dm
            dz1 = dh1 * (z1 > 0)
            g_w1 += sx.T @ dz1

    n = len(batch)
    loss = total / n
    for g in grads:
        g /= n
    l2 = model.config.l2
    if l2:
        for g, p in zip(grads, model.params()):
            loss += l2 * float(np.sum(p * p))
            g += 2.0 * l2 * p
    return loss, grads


def train(
    examples: list[SplitExample],
    targets: np.ndarray,
    config: TrainConfig,
) -> tuple[GcnModel, TrainLog]:
    """Full-batch Adam for a fixed number of epochs.

    Deterministic for fixed inputs: initialization is the only random draw.
    Raises TrainingDiverged when the loss goes non-finite or above the
    configured ceiling.
    """
    if not examples:
        raise ValueError("cannot train on an empty example list")
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    model = init_model(config)
    batch = [encode_example(ex) for ex in examples]
    log = TrainLog()

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_state = [np.zeros_like(p) for p in model.params()]
    v_state = [np.zeros_like(p) for p in model.params()]

    for epoch in range(1, config.epochs + 1):
        loss, grads = loss_and_gradients(model, batch, targets)
        if not math.isfinite(loss) or loss > config.loss_ceiling:
            raise TrainingDiverged(epoch, loss)
        log.losses.append(loss)
        params = model.params()
        for i, (p, g) in enumerate(zip(params, grads)):
            m_state[i] = beta1 * m_state[i] + (1 - beta1) * g
            v_state[i] = beta2 * v_state[i] + (1 - beta2) * g * g
            m_hat = m_state[i] / (1 - beta1**epoch)
            v_hat = v_state[i] / (1 - beta2**epoch)
            p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
    return model, log


def flatten_params(params: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([p.ravel() for p in params])


def set_flat_params(model: GcnModel, flat: np.ndarray) -> None:
    offset = 0
    for p in model.params():
        p[...] = flat[offset : offset + p.size].reshape(p.shape)
        offset += p.size
    if offset != flat.size:
        raise ValueError("flat vector size does not match model")


_FORMAT = "edge-extension-gcn"
_VERSION = 1


def save_model(model: GcnModel, path: str | Path) -> None:
    """Write the model as JSON: config plus row-major weight arrays."""
    payload = {
        "format": _FORMAT,
        "version": _VERSION,
        "config": {
            "hidden": model.config.hidden,
            "out_dim": model.config.out_dim,
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "l2": model.config.l2,
            "seed": model.config.seed,
            "loss_ceiling": model.config.loss_ceiling,
        },
        "n_features": N_FEATURES,
        "weights": {
            name: {"shape": list(p.shape), "data": p.ravel().tolist()}
            for name, p in zip(("w1", "w2", "head_w", "head_b"), model.params())
        },
    }
    target = Path(path)
    tmp = target.with_suffix(target.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    tmp.replace(target)


def load_model(path: str | Path) -> GcnModel:
    """Read a model back, validating format, feature width, and shapes."""
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != _FORMAT or payload.get("version") != _VERSION:
        raise ValueError(f"not a {_FORMAT} v{_VERSION} file: {path}")
    if payload.get("n_features") != N_FEATURES:
        raise ValueError("model was built against a different feature schema")
    config = TrainConfig(**payload["config"])
    expected = {
        "w1": (N_FEATURES, config.hidden),
        "w2": (config.hidden, config.hidden),
        "head_w": (2 * config.hidden, config.out_dim),
        "head_b": (config.out_dim,),
    }
    arrays = {}
    for name, shape in expected.items():
        entry = payload["weights"][name]
        if tuple(entry["shape"]) != shape:
            raise ValueError(f"weight {name} has shape {entry['shape']}, wanted {shape}")
        arrays[name] = np.asarray(entry["data"], dtype=np.float64).reshape(shape)
    return GcnModel(config=config, **arrays)
