"""L2-regularized logistic regression trained by full-batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..errors import DataFormatError, SchemaMismatchError
from ..features.assemble import check_schema
from ..utils import fmt_float

FORMAT_VERSION = "1"


def logistic_objective(w, b, X, y, l2):
    """Mean logistic loss plus ``l2/2 * ||w||^2`` and its gradient.

    The intercept is not penalized.  Returns ``(loss, grad_w, grad_b)``.
    """
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    r = expit(z) - y
    n = len(y)
    return loss, X.T @ r / n + l2 * w, r.sum() / n


class LogisticRegressionGD(ClassifierMixin, BaseEstimator):
    """Binary logistic regression with a relaxed decision threshold.

    Training starts from zero weights and takes full-batch gradient steps;
    a step that would raise the loss is rejected and the step size halved,
    so ``loss_curve_`` never increases.  With ``standardize`` the problem is
    solved on z-scored columns and the solution mapped back, so
    ``coef_`` and ``intercept_`` always apply to raw features.

    ``predict`` labels a sample positive when its probability is ``>= tau``.
    """

    def __init__(self, l2=1e-3, epochs=300, learning_rate=1.0, tau=0.5, standardize=True,
                 random_state=0):
        self.l2 = l2
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.tau = tau
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        y = y.astype(float)
        if not np.isin(y, (0.0, 1.0)).all():
            raise ValueError("labels must be binary (0/1)")
        if len(np.unique(y)) < 2:
            raise ValueError("training set contains a single class")
        self.classes_ = np.array([0, 1])
        n, d = X.shape
        if self.standardize:
            mean = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale == 0] = 1.0
        else:
            mean, scale = np.zeros(d), np.ones(d)
        Z = (X - mean) / scale
        w, b = np.zeros(d), 0.0
        loss, gw, gb = logistic_objective(w, b, Z, y, self.l2)
        step = float(self.learning_rate)
        curve = [loss]
        for _ in range(self.epochs):
            for _ in range(60):
                w_new, b_new = w - step * gw, b - step * gb
                new_loss, new_gw, new_gb = logistic_objective(w_new, b_new, Z, y, self.l2)
                if new_loss <= loss:
                    break
                step /= 2
            else:
                break
            w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
            curve.append(loss)
        self.coef_ = w / scale
        self.intercept_ = float(b - self.coef_ @ mean)
        self.loss_curve_ = curve
        self.n_features_in_ = d
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.tau).astype(int)


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2: float
    schema_id: str
    feature_names: tuple[str, ...] = field(default=())
    tau: float = 0.5

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.feature_names and len(self.feature_names) != len(self.weights):
            raise ValueError("weight length does not match the feature schema")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("non-finite model parameters")

    def probabilities(self, X):
        return expit(np.asarray(X, dtype=float) @ self.weights + self.bias)

    def save(self, path):
        names = self.feature_names or tuple(f"f{i}" for i in range(len(self.weights)))
        lines = [
            f"propdetect-logreg\t{FORMAT_VERSION}",
            f"schema_id\t{self.schema_id}",
            f"l2\t{fmt_float(self.l2)}",
            f"tau\t{fmt_float(self.tau)}",
            f"bias\t{fmt_float(self.bias)}",
            f"n_weights\t{len(self.weights)}",
            *(f"{n}\t{fmt_float(v)}" for n, v in zip(names, self.weights)),
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        lines = path.read_text(encoding="utf-8").rstrip("\n").split("\n")
        if lines[0] != f"propdetect-logreg\t{FORMAT_VERSION}":
            raise DataFormatError("not a logistic regression model file", path, 1)
        try:
            head = dict(line.split("\t", 1) for line in lines[1:6])
            rows = [line.split("\t") for line in lines[6:]]
            if len(rows) != int(head["n_weights"]) or any(len(r) != 2 for r in rows):
                raise ValueError("weight rows do not match n_weights")
            return cls(np.array([float(v) for _, v in rows]), float(head["bias"]),
                       float(head["l2"]), head["schema_id"], tuple(n for n, _ in rows),
                       float(head["tau"]))
        except (KeyError, ValueError) as e:
            raise DataFormatError(f"malformed model file: {e}", path) from None


def train_logreg(features_by_sentence, labels, l2=1e-3, epochs=300, learning_rate=1.0, seed=0,
                 standardize=True):
    """Fit on a list of FeatureVectors sharing one schema and a parallel label list."""
    vecs = list(features_by_sentence)
    if not vecs:
        raise ValueError("no training examples")
    schema = vecs[0].schema_id
    check_schema(schema, vecs)
    X = np.vstack([v.values for v in vecs])
    y = np.asarray([int(bool(v)) for v in labels])
    est = LogisticRegressionGD(l2=l2, epochs=epochs, learning_rate=learning_rate,
                               standardize=standardize, random_state=seed).fit(X, y)
    model = LogRegModel(est.coef_, est.intercept_, l2, schema, vecs[0].names)
    model.loss_curve = est.loss_curve_
    return model


def predict_proba(model, feature_vector):
    if feature_vector.schema_id != model.schema_id:
        raise SchemaMismatchError(
            f"feature schema {feature_vector.schema_id!r} does not match model {model.schema_id!r}")
    return float(expit(feature_vector.values @ model.weights + model.bias))
