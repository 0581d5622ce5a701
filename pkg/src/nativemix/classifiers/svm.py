"""Linear SVM trained by seeded stochastic subgradient descent on
L2-regularized hinge loss (Pegasos-style step size 1/(lambda*t)).

The epoch-end state with the lowest measured training objective is the
model that gets returned, so more epochs can never hurt the reported fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..corpus import Label
from ..errors import SingleClassTrainingSet
from ..features import SparseVector


@dataclass
class SVMModel:
    weights: np.ndarray
    bias: float
    lam: float
    epochs: int
    seed: int
    objective_history: list[float] = field(default_factory=list)
    best_epoch: int = 0


def _signed(y: list[Label]) -> np.ndarray:
    return np.array([1.0 if label == Label.HATE else -1.0 for label in y])


def _dot(weights: np.ndarray, x: SparseVector) -> float:
    total = 0.0
    for idx, value in x.entries:
        total += weights[idx] * value
    return total


def svm_objective(
    weights: np.ndarray,
    bias: float,
    X: list[SparseVector],
    y_signed: np.ndarray,
    lam: float,
) -> float:
    """Mean hinge loss plus (lam/2)*||w||^2 over the whole training set."""
    hinge = 0.0
    for x, y in zip(X, y_signed):
        hinge += max(0.0, 1.0 - y * (_dot(weights, x) + bias))
    return hinge / len(X) + 0.5 * lam * float(weights @ weights)


def svm_train(
    X: list[SparseVector],
    y: list[Label],
    num_features: int,
    lam: float = 1e-4,
    epochs: int = 10,
    seed: int = 0,
) -> SVMModel:
    if len(X) != len(y) or not X:
        raise ValueError("X and y must be non-empty and the same length")
    if len(set(y)) < 2:
        raise SingleClassTrainingSet("training data must contain both labels")

    y_signed = _signed(y)
    rng = np.random.default_rng(seed)
    n = len(X)

    # w is kept as scale * u so the per-step shrink stays O(nnz)
    u = np.zeros(num_features)
    scale = 1.0
    bias = 0.0
    t = 1

    best_obj = None
    best_weights = None
    best_bias = 0.0
    best_epoch = 0
    history = []

    for epoch in range(1, epochs + 1):
        for i in rng.permutation(n):
            eta = 1.0 / (lam * t)
            margin = y_signed[i] * (scale * _dot(u, X[i]) + bias)
            shrink = 1.0 - eta * lam  # exactly 0 on the very first step
            if shrink == 0.0:
                u[:] = 0.0
                scale = 1.0
            else:
                scale *= shrink
            if margin < 1.0:
                coef = eta * y_signed[i] / scale
                for idx, value in X[i].entries:
                    u[idx] += coef * value
                bias += eta * y_signed[i]
            t += 1

        weights = scale * u
        obj = svm_objective(weights, bias, X, y_signed, lam)
        history.append(obj)
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_weights = weights.copy()
            best_bias = bias
            best_epoch = epoch

    return SVMModel(
        weights=best_weights,
        bias=best_bias,
        lam=lam,
        epochs=epochs,
        seed=seed,
        objective_history=history,
        best_epoch=best_epoch,
    )


def svm_predict(model: SVMModel, x: SparseVector) -> Label:
    score = _dot(model.weights, x) + model.bias
    return Label.HATE if score > 0.0 else Label.NON_HATE
