"""Linear attribute models over latent vectors.

Binary attributes get a logistic classifier, multi-valued attributes a single
softmax classifier, continuous attributes a ridge regression line. All
training is full batch, zero initialized, and bit-deterministic for a given
config: the only randomness is the train/test split permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    BundleIncompleteError,
    DimensionMismatchError,
    DivergenceError,
    UnlearnableAttributeError,
)
from .geometry import Hyperplane

__all__ = [
    "AttributeSchema",
    "TrainingConfig",
    "TrainingMeta",
    "BinaryLatentClassifier",
    "MultiClassLatentClassifier",
    "LatentRegressor",
    "ModelBundle",
    "BundleProvenance",
    "LatentModel",
    "fit_binary",
    "fit_multiclass",
    "fit_regressor",
    "predict_discrete",
    "predict_value",
    "logistic_loss_and_grad",
    "softmax_loss_and_grad",
]

BINARY = "binary"
MULTICLASS = "multiclass"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class AttributeSchema:
    """Declares one attribute: its name, kind, and legal values.

    Discrete kinds carry class names; continuous carries an inclusive value
    range (lo, hi).
    """

    name: str
    kind: str
    classes: tuple[str, ...] = ()
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("attribute name must be non-empty")
        if self.kind not in (BINARY, MULTICLASS, CONTINUOUS):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        object.__setattr__(self, "classes", tuple(self.classes))
        if self.kind == BINARY and len(self.classes) != 2:
            raise ValueError(f"binary attribute {self.name!r} needs exactly 2 classes")
        if self.kind == MULTICLASS and len(self.classes) < 3:
            raise ValueError(f"multiclass attribute {self.name!r} needs at least 3 classes")
        if self.kind in (BINARY, MULTICLASS):
            if len(set(self.classes)) != len(self.classes):
                raise ValueError(f"attribute {self.name!r} has duplicate class names")
        else:
            lo, hi = float(self.lo), float(self.hi)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError(f"continuous attribute {self.name!r} needs lo < hi")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)

    @classmethod
    def binary(cls, name: str, negative: str, positive: str) -> "AttributeSchema":
        return cls(name, BINARY, (negative, positive))

    @classmethod
    def multiclass(cls, name: str, classes: Sequence[str]) -> "AttributeSchema":
        return cls(name, MULTICLASS, tuple(classes))

    @classmethod
    def continuous(cls, name: str, lo: float, hi: float) -> "AttributeSchema":
        return cls(name, CONTINUOUS, (), lo, hi)

    @property
    def is_discrete(self) -> bool:
        return self.kind in (BINARY, MULTICLASS)


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters for fitting latent-attribute models.

    momentum is the heavy-ball coefficient of the full-batch descent. Plain
    descent (momentum=0) stalls long before the margin converges on
    separable latent data; the default 0.9 reaches the same optimum far
    faster without giving up zero-init determinism.
    """

    learning_rate: float = 0.1
    epochs: int = 500
    l2_penalty: float = 1e-4
    split_fraction: float = 0.8
    seed: int = 0
    momentum: float = 0.9

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be non-negative")
        if not (0.0 < self.split_fraction < 1.0):
            raise ValueError("split_fraction must lie in (0, 1)")
        if not (0.0 <= self.momentum < 1.0):
            raise ValueError("momentum must lie in [0, 1)")


@dataclass(frozen=True)
class TrainingMeta:
    """Held-out metrics recorded at fit time."""

    epochs_run: int = 0
    final_loss: float = float("nan")
    test_accuracy: float | None = None
    test_rmse: float | None = None


@dataclass(frozen=True)
class BinaryLatentClassifier:
    """sign(direction . z + intercept) mapped to {negative_class, positive_class}.

    A score of exactly zero classifies as the positive class.
    """

    hyperplane: Hyperplane
    positive_class: str
    negative_class: str
    training_meta: TrainingMeta = TrainingMeta()

    @property
    def dim(self) -> int:
        return self.hyperplane.dim

    def predict(self, z) -> str:
        return self.positive_class if self.hyperplane.score(z) >= 0.0 else self.negative_class


@dataclass(frozen=True)
class MultiClassLatentClassifier:
    """argmax over per-class affine scores; ties break to the lowest class index."""

    class_weights: np.ndarray
    class_intercepts: np.ndarray
    class_names: tuple[str, ...]
    training_meta: TrainingMeta = TrainingMeta()

    def __post_init__(self):
        w = np.array(self.class_weights, dtype=np.float64, copy=True)
        b = np.array(self.class_intercepts, dtype=np.float64, copy=True)
        names = tuple(self.class_names)
        if w.ndim != 2 or w.shape[0] != len(names) or b.shape != (len(names),):
            raise ValueError("class_weights must be (k, dim) with k intercepts and k names")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "class_weights", w)
        object.__setattr__(self, "class_intercepts", b)
        object.__setattr__(self, "class_names", names)

    @property
    def dim(self) -> int:
        return self.class_weights.shape[1]

    def scores(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.dim,):
            raise DimensionMismatchError(self.dim, z.size, what="latent vector")
        return self.class_weights @ z + self.class_intercepts

    def predict(self, z) -> str:
        return self.class_names[int(np.argmax(self.scores(z)))]

    def one_vs_rest_direction(self, class_name: str) -> np.ndarray:
        """Weights of one class contrasted against the mean of the others."""
        j = self.class_names.index(class_name)
        others = [i for i in range(len(self.class_names)) if i != j]
        d = self.class_weights[j] - self.class_weights[others].mean(axis=0)
        d.flags.writeable = False
        return d

    def pairwise_hyperplane(self, winner: str, loser: str) -> Hyperplane:
        """Boundary where `winner` and `loser` scores are equal, positive on the winner side."""
        i = self.class_names.index(winner)
        j = self.class_names.index(loser)
        return Hyperplane(
            self.class_weights[i] - self.class_weights[j],
            float(self.class_intercepts[i] - self.class_intercepts[j]),
        )


@dataclass(frozen=True)
class LatentRegressor:
    """Regression line: predict(z) = direction . z + intercept."""

    line: Hyperplane
    training_meta: TrainingMeta = TrainingMeta()

    @property
    def dim(self) -> int:
        return self.line.dim

    def predict(self, z) -> float:
        return self.line.score(z)


LatentModel = Union[BinaryLatentClassifier, MultiClassLatentClassifier, LatentRegressor]


# --------------------------------------------------------------------------
# losses and gradients (analytic, checked against finite differences in tests)
# --------------------------------------------------------------------------

def logistic_loss_and_grad(w: np.ndarray, b: float, X: np.ndarray, t: np.ndarray,
                           l2: float) -> tuple[float, np.ndarray, float]:
    """Mean L2-regularized logistic loss and its gradient.

    t holds 0/1 targets; the intercept is not penalized.
    """
    s = X @ w + b
    # log(1 + exp(-|s|)) + max(s, 0) - s*t is the overflow-safe cross entropy
    loss = float(np.mean(np.logaddexp(0.0, -np.abs(s)) + np.maximum(s, 0.0) - s * t))
    loss += 0.5 * l2 * float(w @ w)
    p = _sigmoid(s)
    resid = p - t
    grad_w = X.T @ resid / X.shape[0] + l2 * w
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def softmax_loss_and_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray, Y: np.ndarray,
                          l2: float) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean L2-regularized softmax cross-entropy and its gradient.

    Y is one-hot (n, k); intercepts are not penalized.
    """
    logits = X @ W.T + b
    logits -= logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(logits).sum(axis=1))
    loss = float(np.mean(logz - (logits * Y).sum(axis=1)))
    loss += 0.5 * l2 * float((W * W).sum())
    P = np.exp(logits - logz[:, None])
    resid = P - Y
    grad_W = resid.T @ X / X.shape[0] + l2 * W
    grad_b = resid.mean(axis=0)
    return loss, grad_W, grad_b


def _sigmoid(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# --------------------------------------------------------------------------
# fitting
# --------------------------------------------------------------------------

def _as_matrix(latents) -> np.ndarray:
    X = np.asarray(latents, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"latents must be a (n, dim) array, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("latents contain NaN or Inf entries")
    return X


def _split(n: int, cfg: TrainingConfig) -> tuple[np.ndarray, np.ndarray]:
    n_train = int(np.floor(n * cfg.split_fraction))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(cfg.seed).permutation(n)
    return perm[:n_train], perm[n_train:]


def fit_binary(latents, labels: Sequence[str], cfg: TrainingConfig = TrainingConfig(),
               positive_class: str | None = None) -> BinaryLatentClassifier:
    """Fit a binary logistic classifier by full-batch gradient descent.

    Args:
        latents: (n, dim) latent vectors.
        labels: n class-name strings covering exactly two classes.
        cfg: hyperparameters; cfg.seed fixes the 80/20 split.
        positive_class: which class maps to the positive score side. Defaults
            to the lexicographically larger of the two labels.

    Returns:
        Classifier with held-out accuracy recorded in training_meta.
    """
    X = _as_matrix(latents)
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} latents but {len(labels)} labels")
    present = sorted(set(labels))
    if len(present) != 2:
        raise UnlearnableAttributeError(
            f"binary fit needs exactly 2 classes, got {present}"
        )
    if positive_class is None:
        negative, positive = present
    else:
        if positive_class not in present:
            raise UnlearnableAttributeError(
                f"positive class {positive_class!r} absent from labels {present}"
            )
        positive = positive_class
        negative = present[0] if present[1] == positive else present[1]
    t = np.array([1.0 if y == positive else 0.0 for y in labels])
    if t.sum() < 2 or (len(t) - t.sum()) < 2:
        raise UnlearnableAttributeError("each class needs at least 2 samples")

    tr, te = _split(X.shape[0], cfg)
    Xtr, ttr = X[tr], t[tr]
    w = np.zeros(X.shape[1])
    b = 0.0
    vw = np.zeros_like(w)
    vb = 0.0
    loss = float("nan")
    for epoch in range(cfg.epochs):
        loss, gw, gb = logistic_loss_and_grad(w, b, Xtr, ttr, cfg.l2_penalty)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        vw = cfg.momentum * vw - cfg.learning_rate * gw
        vb = cfg.momentum * vb - cfg.learning_rate * gb
        w += vw
        b += vb
    loss = logistic_loss_and_grad(w, b, Xtr, ttr, cfg.l2_penalty)[0]
    if not np.isfinite(loss):
        raise DivergenceError(cfg.epochs)

    pred_pos = (X[te] @ w + b) >= 0.0
    accuracy = float(np.mean(pred_pos == (t[te] == 1.0)))
    meta = TrainingMeta(epochs_run=cfg.epochs, final_loss=loss, test_accuracy=accuracy)
    return BinaryLatentClassifier(Hyperplane(w, b), positive, negative, meta)


def fit_multiclass(latents, labels: Sequence[str], cfg: TrainingConfig = TrainingConfig(),
                   class_names: Sequence[str] | None = None) -> MultiClassLatentClassifier:
    """Fit one softmax classifier over k classes by full-batch gradient descent.

    class_names fixes the class order (default: sorted unique labels); every
    named class must appear at least twice in the labels.
    """
    X = _as_matrix(latents)
    labels = list(labels)
    if len(labels) != X.shape[0]:
        raise ValueError(f"{X.shape[0]} latents but {len(labels)} labels")
    names = tuple(class_names) if class_names is not None else tuple(sorted(set(labels)))
    if len(names) < 2:
        raise UnlearnableAttributeError(f"need at least 2 classes, got {list(names)}")
    index = {c: i for i, c in enumerate(names)}
    unknown = sorted(set(labels) - set(names))
    if unknown:
        raise UnlearnableAttributeError(f"labels outside the class set: {unknown}")
    counts = {c: labels.count(c) for c in names}
    missing = [c for c, n in counts.items() if n < 2]
    if missing:
        raise UnlearnableAttributeError(
            f"classes with fewer than 2 samples: {missing}"
        )

    k = len(names)
    Y = np.zeros((X.shape[0], k))
    Y[np.arange(X.shape[0]), [index[y] for y in labels]] = 1.0

    tr, te = _split(X.shape[0], cfg)
    Xtr, Ytr = X[tr], Y[tr]
    W = np.zeros((k, X.shape[1]))
    b = np.zeros(k)
    vW = np.zeros_like(W)
    vb = np.zeros_like(b)
    loss = float("nan")
    for epoch in range(cfg.epochs):
        loss, gW, gb = softmax_loss_and_grad(W, b, Xtr, Ytr, cfg.l2_penalty)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        vW = cfg.momentum * vW - cfg.learning_rate * gW
        vb = cfg.momentum * vb - cfg.learning_rate * gb
        W += vW
        b += vb
    loss = softmax_loss_and_grad(W, b, Xtr, Ytr, cfg.l2_penalty)[0]
    if not np.isfinite(loss):
        raise DivergenceError(cfg.epochs)

    pred = np.argmax(X[te] @ W.T + b, axis=1)
    accuracy = float(np.mean(pred == np.argmax(Y[te], axis=1)))
    meta = TrainingMeta(epochs_run=cfg.epochs, final_loss=loss, test_accuracy=accuracy)
    return MultiClassLatentClassifier(W, b, names, meta)


def fit_regressor(latents, targets, cfg: TrainingConfig = TrainingConfig()) -> LatentRegressor:
    """Fit a regression line by ridge-regularized normal equations.

    The ridge term is a fixed 1e-6 on the Gram matrix, just enough to keep it
    solvable; held-out RMSE is recorded on the split's test fold.
    """
    X = _as_matrix(latents)
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError(f"{X.shape[0]} latents but targets have shape {y.shape}")
    if X.shape[0] < 2:
        raise UnlearnableAttributeError("regression needs at least 2 samples")

    tr, te = _split(X.shape[0], cfg)
    A = np.hstack([X[tr], np.ones((len(tr), 1))])
    gram = A.T @ A + 1e-6 * np.eye(A.shape[1])
    beta = np.linalg.solve(gram, A.T @ y[tr])
    slope, intercept = beta[:-1], float(beta[-1])

    resid = X[te] @ slope + intercept - y[te]
    rmse = float(np.sqrt(np.mean(resid**2)))
    meta = TrainingMeta(test_rmse=rmse)
    return LatentRegressor(Hyperplane(slope, intercept), meta)


# --------------------------------------------------------------------------
# prediction and bundling
# --------------------------------------------------------------------------

def predict_discrete(model: BinaryLatentClassifier | MultiClassLatentClassifier, z) -> str:
    """Class name of z under a discrete latent model."""
    return model.predict(z)


def predict_value(model: LatentRegressor, z) -> float:
    """Predicted real value of z under a latent regressor."""
    return model.predict(z)


@dataclass(frozen=True)
class BundleProvenance:
    """How a bundle was produced: seeds, sample count, config, held-out metrics."""

    world_seed: int
    n_samples: int
    train_config: TrainingConfig
    metrics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "metrics", dict(self.metrics))


@dataclass(frozen=True)
class ModelBundle:
    """One fitted latent model per schema attribute, all sharing one latent dim."""

    schema: tuple[AttributeSchema, ...]
    models: Mapping[str, LatentModel]
    provenance: BundleProvenance | None = None

    def __post_init__(self):
        object.__setattr__(self, "schema", tuple(self.schema))
        object.__setattr__(self, "models", dict(self.models))
        dims = set()
        for attr in self.schema:
            model = self.models.get(attr.name)
            if model is None:
                raise BundleIncompleteError(f"no model for attribute {attr.name!r}")
            if attr.kind == BINARY and not isinstance(model, BinaryLatentClassifier):
                raise BundleIncompleteError(f"attribute {attr.name!r} needs a binary classifier")
            if attr.kind == MULTICLASS and not isinstance(model, MultiClassLatentClassifier):
                raise BundleIncompleteError(f"attribute {attr.name!r} needs a multiclass classifier")
            if attr.kind == CONTINUOUS and not isinstance(model, LatentRegressor):
                raise BundleIncompleteError(f"attribute {attr.name!r} needs a regressor")
            if attr.kind == BINARY:
                if {model.positive_class, model.negative_class} != set(attr.classes):
                    raise BundleIncompleteError(
                        f"attribute {attr.name!r}: classifier classes do not match the schema"
                    )
            if attr.kind == MULTICLASS and set(model.class_names) != set(attr.classes):
                raise BundleIncompleteError(
                    f"attribute {attr.name!r}: classifier classes do not match the schema"
                )
            dims.add(model.dim)
        if len(dims) > 1:
            raise BundleIncompleteError(f"models disagree on latent dim: {sorted(dims)}")

    @property
    def latent_dim(self) -> int:
        if not self.models:
            raise BundleIncompleteError("empty bundle has no latent dimension")
        return next(iter(self.models.values())).dim

    def model_for(self, name: str) -> LatentModel:
        try:
            return self.models[name]
        except KeyError:
            raise BundleIncompleteError(f"no model for attribute {name!r}") from None

    def attribute(self, name: str) -> AttributeSchema:
        for attr in self.schema:
            if attr.name == name:
                return attr
        raise BundleIncompleteError(f"no attribute named {name!r} in the schema")
