"""One-vs-rest L2-regularized logistic regression.

Per class c the objective is

    J_c(w, b) = C * sum_i log(1 + exp(-z_i (w.x_i + b))) + 0.5 ||w||^2

with z_i = +1 on class c and -1 otherwise; the bias is unregularized.
Optimization is deterministic full-batch gradient descent with Armijo
backtracking (initial step 1.0, shrink 0.5), so the objective trace is
non-increasing and results are bitwise reproducible.  Warm starting from an
existing model realizes sequential train-on-G-then-T training.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .vectorizer import SparseVector, stack

FORMAT_VERSION = 1

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


@dataclass
class TrainConfig:
    max_iter: int = 2500
    tol: float = 1e-6
    C: float = 1.0
    seed: int = 0
    warm_start: "LinearModel | None" = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class LinearModel:
    classes: tuple[str, ...]
    weights: np.ndarray          # shape (n_classes, dim)
    biases: np.ndarray           # shape (n_classes,)
    vectorizer_fingerprint: str | None = None
    iterations: tuple[int, ...] = ()
    final_objectives: tuple[float, ...] = ()
    objective_traces: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_classes(self) -> int:
        return len(self.classes)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _objective(X, z, w, b, C):
    margins = z * (X @ w + b)
    return C * float(np.sum(np.logaddexp(0.0, -margins))) + 0.5 * float(w @ w)


def _gradient(X, z, w, b, C):
    margins = z * (X @ w + b)
    s = _sigmoid(-margins)
    r = -C * z * s
    grad_w = X.T @ r + w
    grad_b = float(np.sum(r))
    return grad_w, grad_b


def _optimize(X, z, w0, b0, config: TrainConfig):
    """Gradient descent with backtracking line search; returns (w, b, trace)."""
    w = w0.copy()
    b = float(b0)
    obj = _objective(X, z, w, b, config.C)
    trace = [obj]
    for _ in range(config.max_iter):
        grad_w, grad_b = _gradient(X, z, w, b, config.C)
        g_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if g_sq == 0.0:
            break
        step = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            obj_new = _objective(X, z, w_new, b_new, config.C)
            if obj_new <= obj - _ARMIJO_C1 * step * g_sq:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        w, b = w_new, b_new
        decrease = obj - obj_new
        obj = obj_new
        trace.append(obj)
        if decrease <= config.tol * max(abs(obj), 1e-300):
            break
    return w, b, trace


def train(X: list[SparseVector], y, config: TrainConfig | None = None,
          classes=None) -> LinearModel:
    """Train a one-vs-rest model on sparse vectors and class indices.

    ``classes`` names the class order (labels); when omitted, indices
    0..max(y) become string labels.  Every class must appear in ``y``.
    """
    config = config or TrainConfig()
    if len(X) == 0 or len(X) != len(y):
        raise ValueError(f"need equally many vectors and labels, got {len(X)} and {len(y)}")
    y = np.asarray(y, dtype=np.int64)
    mat = stack(X).astype(np.float64)
    if mat.nnz and not np.all(np.isfinite(mat.data)):
        raise ValueError("non-finite feature values")

    if classes is None:
        classes = tuple(str(i) for i in range(int(y.max()) + 1))
    classes = tuple(classes)
    n_classes = len(classes)
    if np.any(y < 0) or np.any(y >= n_classes):
        raise ValueError("class index out of range")
    present = np.unique(y)
    if present.size < 2:
        raise ValueError("need at least 2 distinct classes in the training labels")
    missing = sorted(set(range(n_classes)) - set(int(i) for i in present))
    if missing:
        raise ValueError(f"classes absent from training labels: {[classes[i] for i in missing]}")

    warm = config.warm_start
    if warm is not None:
        if warm.dim != mat.shape[1]:
            raise ValueError(f"warm-start dimension {warm.dim} != data dimension {mat.shape[1]}")
        if warm.n_classes != n_classes:
            raise ValueError(f"warm-start has {warm.n_classes} classes, expected {n_classes}")

    dim = mat.shape[1]
    weights = np.zeros((n_classes, dim))
    biases = np.zeros(n_classes)
    iters = []
    finals = []
    traces = []
    for c in range(n_classes):
        z = np.where(y == c, 1.0, -1.0)
        w0 = warm.weights[c] if warm is not None else np.zeros(dim)
        b0 = warm.biases[c] if warm is not None else 0.0
        w, b, trace = _optimize(mat, z, w0, b0, config)
        weights[c] = w
        biases[c] = b
        iters.append(len(trace) - 1)
        finals.append(trace[-1])
        traces.append(trace)

    return LinearModel(
        classes=classes,
        weights=weights,
        biases=biases,
        vectorizer_fingerprint=None,
        iterations=tuple(iters),
        final_objectives=tuple(finals),
        objective_traces=traces,
    )


def _check_dim(model: LinearModel, dim: int):
    if dim != model.dim:
        raise ValueError(f"vector dimension {dim} != model dimension {model.dim}")


def predict_scores(model: LinearModel, x: SparseVector) -> np.ndarray:
    """Raw decision scores w_c.x + b_c in class order."""
    _check_dim(model, x.dim)
    if x.nnz == 0:
        return model.biases.copy()
    return model.weights[:, x.indices] @ x.values + model.biases


def predict(model: LinearModel, x: SparseVector) -> int:
    """Argmax class index; ties go to the lowest index."""
    return int(np.argmax(predict_scores(model, x)))


def predict_many(model: LinearModel, X: list[SparseVector]) -> np.ndarray:
    if not X:
        return np.zeros(0, dtype=np.int64)
    mat = stack(X)
    _check_dim(model, mat.shape[1])
    scores = mat @ model.weights.T + model.biases
    return np.argmax(scores, axis=1).astype(np.int64)


# -- persistence -------------------------------------------------------


def model_to_json(model: LinearModel) -> str:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "linear-model",
        "classes": list(model.classes),
        "weights": [[float(v) for v in row] for row in model.weights],
        "biases": [float(v) for v in model.biases],
        "vectorizer_fingerprint": model.vectorizer_fingerprint,
        "iterations": list(model.iterations),
        "final_objectives": [float(v) for v in model.final_objectives],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def save_model(model: LinearModel, path) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(model))
    os.replace(tmp, path)


def model_from_json(payload: str) -> LinearModel:
    d = json.loads(payload)
    if d.get("kind") != "linear-model":
        raise ValueError("not a serialized linear model")
    if d.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('format_version')}")
    return LinearModel(
        classes=tuple(d["classes"]),
        weights=np.array(d["weights"], dtype=np.float64),
        biases=np.array(d["biases"], dtype=np.float64),
        vectorizer_fingerprint=d.get("vectorizer_fingerprint"),
        iterations=tuple(d.get("iterations", ())),
        final_objectives=tuple(d.get("final_objectives", ())),
    )


def load_model(path, expected_fingerprint: str | None = None) -> LinearModel:
    """Load a model; refuses a vectorizer fingerprint mismatch."""
    with open(path, encoding="utf-8") as fh:
        model = model_from_json(fh.read())
    if expected_fingerprint is not None and model.vectorizer_fingerprint != expected_fingerprint:
        raise ValueError(
            "model was trained against a different vectorizer "
            f"(fingerprint {model.vectorizer_fingerprint!r} != {expected_fingerprint!r})"
        )
    return model


def fingerprint_of(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
