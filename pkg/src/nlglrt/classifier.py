"""Per-sample distortion classifier and stream editing.

Training pairs a linear scene with its compressed counterpart: each column is
labelled ``[1, 0]`` (near-linear) when ``||z(t) - f(z(t))|| <= d_T`` and
``[0, 1]`` otherwise. A dense tanh network with a two-way softmax head learns
the label from the compressed column alone; at test time flagged columns are
deleted before detection.
"""
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidConfig,
    NonFiniteLoss,
    ShapeMismatch,
)

MODEL_SCHEMA = "nlglrt.mlp/1"


def stack_sample(column):
    """``[Re z_1..Re z_M, Im z_1..Im z_M]`` for one snapshot."""
    column = np.asarray(column, dtype=np.complex128)
    return np.concatenate([column.real, column.imag])


def unstack_sample(values):
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[-1] // 2
    return values[..., :m] + 1j * values[..., m:]


def stack_columns(z):
    """Row ``t`` is ``stack_sample(z[:, t])``."""
    z = np.asarray(z, dtype=np.complex128)
    return np.concatenate([z.real, z.imag], axis=0).T.copy()


def sample_distances(z_linear, z_nonlinear):
    """Per-column Euclidean distance between a scene and its compressed copy."""
    a = np.asarray(z_linear, dtype=np.complex128)
    b = np.asarray(z_nonlinear, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} vs {b.shape}")
    return np.linalg.norm(a - b, axis=0)


def choose_threshold(distances, flagged_fraction):
    """Nearest-rank ``(1 - flagged_fraction)`` quantile of ``distances``."""
    d = np.sort(np.asarray(distances, dtype=np.float64).ravel())
    if d.size == 0:
        raise EmptyInput("no distances to threshold")
    if not 0.0 < flagged_fraction < 1.0:
        raise ValueError(f"flagged_fraction must be in (0, 1), got {flagged_fraction}")
    # small slack so (1 - 0.25) * 100 lands on rank 75, not 76
    rank = math.ceil((1.0 - flagged_fraction) * d.size - 1e-9)
    rank = min(max(rank, 1), d.size)
    return float(d[rank - 1])


def make_labels(distances, threshold):
    """One-hot rows: ``[1, 0]`` if ``d <= threshold`` else ``[0, 1]``."""
    if not threshold >= 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    flagged = np.asarray(distances, dtype=np.float64) > threshold
    labels = np.zeros((flagged.size, 2))
    labels[~flagged, 0] = 1.0
    labels[flagged, 1] = 1.0
    return labels


@dataclass(frozen=True)
class LabeledSampleSet:
    samples: np.ndarray  # (n, 2M) stacked compressed columns
    labels: np.ndarray  # (n, 2) one-hot
    distances: np.ndarray
    threshold: float

    def __post_init__(self):
        n = len(self.samples)
        if not (len(self.labels) == n == len(self.distances)):
            raise ShapeMismatch("samples, labels and distances must have equal length")

    def __len__(self):
        return len(self.samples)


def build_labeled_set(z_linear, z_nonlinear, flagged_fraction=0.5, threshold=None):
    """Label a paired scene. ``threshold`` overrides the quantile rule (held-out sets)."""
    d = sample_distances(z_linear, z_nonlinear)
    if threshold is None:
        threshold = choose_threshold(d, flagged_fraction)
    return LabeledSampleSet(
        samples=stack_columns(z_nonlinear),
        labels=make_labels(d, threshold),
        distances=d,
        threshold=float(threshold),
    )


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64
    learning_rate: float = 0.001
    max_epochs: int = 500
    patience: int = 25
    seed: int = 7
    optimizer: str = "adam"
    hidden_layers: int = 3
    hidden_units: int = 10

    def __post_init__(self):
        problems = []
        for name in ("batch_size", "max_epochs", "patience", "hidden_layers", "hidden_units"):
            if getattr(self, name) < 1:
                problems.append(f"require {name} >= 1 (got {getattr(self, name)})")
        if self.patience > self.max_epochs:
            problems.append(
                f"require patience <= max_epochs (got {self.patience} > {self.max_epochs})"
            )
        if not self.learning_rate >= 0:
            problems.append(f"require learning_rate >= 0 (got {self.learning_rate})")
        if self.optimizer not in ("adam", "sgd"):
            problems.append(f"optimizer must be 'adam' or 'sgd' (got {self.optimizer!r})")
        if problems:
            raise InvalidConfig("; ".join(problems))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown train field(s): {', '.join(unknown)}")
        return cls(**data)


@dataclass
class MlpModel:
    """Dense network: ``len(weights) - 1`` tanh layers, then a softmax layer.

    ``weights[i]`` has shape ``(fan_in, fan_out)``. Inputs are standardized
    with ``input_mean`` / ``input_std`` before the first layer.
    """

    weights: list
    biases: list
    input_mean: np.ndarray
    input_std: np.ndarray
    distance_threshold: float | None = None

    @property
    def input_dim(self):
        return self.weights[0].shape[0]

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def params(self):
        return self.weights + self.biases

    def copy(self):
        return MlpModel(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            input_mean=self.input_mean.copy(),
            input_std=self.input_std.copy(),
            distance_threshold=self.distance_threshold,
        )


def init_mlp(input_dim, hidden_layers, hidden_units, rng):
    """Uniform ``+/- 1/sqrt(fan_in)`` weights, zero biases, identity normalization."""
    sizes = [input_dim] + [hidden_units] * hidden_layers + [2]
    weights = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return MlpModel(
        weights=weights,
        biases=[np.zeros(s) for s in sizes[1:]],
        input_mean=np.zeros(input_dim),
        input_std=np.ones(input_dim),
    )


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _forward(model, x):
    """Return (activations per layer input, softmax output) for a 2-D batch."""
    h = (x - model.input_mean) / model.input_std
    acts = [h]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        pre = h @ w + b
        if i == last:
            return acts, _softmax(pre)
        h = np.tanh(pre)
        acts.append(h)


def _as_batch(model, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != model.input_dim:
        raise ShapeMismatch(f"model expects {model.input_dim} inputs, got {x.shape[1]}")
    return x, single


def mlp_forward(model, x):
    """Softmax probabilities ``[p_linear, p_distorted]`` per sample."""
    x, single = _as_batch(model, x)
    _, out = _forward(model, x)
    return out[0] if single else out


def mlp_loss(model, x, y):
    """Mean squared error between softmax output and one-hot targets."""
    x, _ = _as_batch(model, x)
    _, out = _forward(model, x)
    return float(np.mean((out - y) ** 2))


def mlp_gradient(model, x, y):
    """Gradients of ``mlp_loss`` w.r.t. ``(weights, biases)`` by backpropagation."""
    x, _ = _as_batch(model, x)
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    acts, out = _forward(model, x)
    n = x.shape[0]
    g_out = 2.0 * (out - y) / (n * out.shape[1])
    # softmax Jacobian-vector product
    g = out * (g_out - np.sum(g_out * out, axis=1, keepdims=True))
    grad_w = [None] * len(model.weights)
    grad_b = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        grad_w[i] = acts[i].T @ g
        grad_b[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ model.weights[i].T) * (1.0 - acts[i] ** 2)
    return grad_w, grad_b


@dataclass
class TrainResult:
    model: MlpModel
    losses: list = field(default_factory=list)  # full-set loss after each epoch
    best_losses: list = field(default_factory=list)
    early_stopped: bool = False

    @property
    def epochs(self):
        return len(self.losses)


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-7):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class _Sgd:
    def __init__(self, params, lr):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


def mlp_train(data, cfg=TrainConfig()):
    """Minibatch training on MSE with patience-based early stopping.

    The monitored loss is the full training-set loss after each epoch; the
    returned model holds the parameters from the best epoch.
    """
    x = np.asarray(data.samples, dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.float64)
    n = len(x)
    if n < cfg.batch_size:
        raise ShapeMismatch(f"need at least batch_size={cfg.batch_size} samples, got {n}")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    model = init_mlp(x.shape[1], cfg.hidden_layers, cfg.hidden_units, rng)
    model.input_mean = x.mean(axis=0)
    std = x.std(axis=0)
    model.input_std = np.where(std > 0, std, 1.0)
    model.distance_threshold = float(data.threshold)

    params = model.params()
    opt = _Adam(params, cfg.learning_rate) if cfg.optimizer == "adam" else _Sgd(params, cfg.learning_rate)
    result = TrainResult(model=model.copy())
    best = math.inf
    stale = 0
    for _ in range(cfg.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            gw, gb = mlp_gradient(model, x[idx], y[idx])
            opt.step(params, gw + gb)
        loss = mlp_loss(model, x, y)
        if not math.isfinite(loss):
            raise NonFiniteLoss(f"training loss became {loss} at epoch {len(result.losses) + 1}")
        result.losses.append(loss)
        if loss < best:
            best = loss
            stale = 0
            result.model = model.copy()
        else:
            stale += 1
        result.best_losses.append(best)
        if stale >= cfg.patience:
            result.early_stopped = True
            break
    return result


@dataclass(frozen=True)
class EditResult:
    edited: np.ndarray  # (M, L') kept columns in original order
    kept_indices: np.ndarray
    flagged_count: int


def classify_columns(z, model):
    """Boolean per column: True where the network calls it distorted."""
    z = np.asarray(z, dtype=np.complex128)
    if 2 * z.shape[0] != model.input_dim:
        raise ShapeMismatch(
            f"model expects {model.input_dim // 2} antennas, matrix has {z.shape[0]}"
        )
    probs = mlp_forward(model, stack_columns(z))
    # ties count as linear
    return probs[:, 0] < probs[:, 1]


def classify_and_edit(z_nonlinear, model):
    """Delete columns flagged as distorted; keep the rest untouched and in order."""
    z = np.asarray(z_nonlinear, dtype=np.complex128)
    flagged = classify_columns(z, model)
    kept = np.flatnonzero(~flagged)
    return EditResult(edited=z[:, kept], kept_indices=kept, flagged_count=int(flagged.sum()))


def model_to_json(model, train_cfg=None):
    """Serialize to a stable JSON document (floats in shortest round-trip form)."""
    doc = {
        "schema": MODEL_SCHEMA,
        "layer_sizes": model.layer_sizes,
        "weights": [w.ravel().tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "input_mean": model.input_mean.tolist(),
        "input_std": model.input_std.tolist(),
        "distance_threshold": model.distance_threshold,
        "train_config": train_cfg.to_dict() if train_cfg is not None else None,
    }
    return json.dumps(doc, indent=1) + "\n"


def model_from_json(text):
    """Inverse of ``model_to_json``; returns ``(model, train_config or None)``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"model file is not valid JSON: {exc}") from exc
    if doc.get("schema") != MODEL_SCHEMA:
        raise InvalidConfig(f"unsupported model schema {doc.get('schema')!r}")
    sizes = doc["layer_sizes"]
    weights = [
        np.asarray(flat, dtype=np.float64).reshape(a, b)
        for flat, a, b in zip(doc["weights"], sizes[:-1], sizes[1:])
    ]
    model = MlpModel(
        weights=weights,
        biases=[np.asarray(b, dtype=np.float64) for b in doc["biases"]],
        input_mean=np.asarray(doc["input_mean"], dtype=np.float64),
        input_std=np.asarray(doc["input_std"], dtype=np.float64),
        distance_threshold=doc.get("distance_threshold"),
    )
    cfg = doc.get("train_config")
    return model, (TrainConfig.from_dict(cfg) if cfg is not None else None)
