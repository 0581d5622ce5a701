"""Multinomial Naive Bayes over sparse count vectors, from scratch."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import Label
from ..errors import SingleClassTrainingSet
from ..features import SparseVector

# Scores this close (relative) are treated as ties and break toward non-hate.
_TIE_REL_TOL = 1e-9


@dataclass
class NBModel:
    class_log_priors: dict[Label, float]
    feature_log_likelihoods: dict[Label, np.ndarray]
    alpha: float

    @property
    def num_features(self) -> int:
        return len(next(iter(self.feature_log_likelihoods.values())))


def nb_train(
    X: list[SparseVector],
    y: list[Label],
    num_features: int,
    alpha: float = 1.0,
) -> NBModel:
    """Fit priors from class frequencies and Lidstone-smoothed token
    likelihoods: (count(w, c) + alpha) / (total(c) + alpha * |V|).
    """
    if len(X) != len(y) or not X:
        raise ValueError("X and y must be non-empty and the same length")
    if len(set(y)) < 2:
        raise SingleClassTrainingSet("training data must contain both labels")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    priors = {}
    likelihoods = {}
    for label in Label:
        docs = [x for x, lab in zip(X, y) if lab == label]
        priors[label] = math.log(len(docs) / len(y))
        counts = np.zeros(num_features)
        for x in docs:
            for idx, value in x.entries:
                counts[idx] += value
        total = counts.sum()
        likelihoods[label] = np.log(
            (counts + alpha) / (total + alpha * num_features)
        )
    return NBModel(class_log_priors=priors,
                   feature_log_likelihoods=likelihoods,
                   alpha=alpha)


def nb_predict(model: NBModel, x: SparseVector) -> tuple[Label, dict[Label, float]]:
    """Argmax of log prior + sum(count * log likelihood).

    A zero vector falls back to the prior argmax. Ties (within a small
    relative tolerance, absorbing float summation noise) break toward
    non-hate.
    """
    scores = {}
    for label in Label:
        loglik = model.feature_log_likelihoods[label]
        score = model.class_log_priors[label]
        for idx, value in x.entries:
            score += value * loglik[idx]
        scores[label] = score

    s_hate = scores[Label.HATE]
    s_non = scores[Label.NON_HATE]
    if math.isclose(s_hate, s_non, rel_tol=_TIE_REL_TOL, abs_tol=1e-12):
        return Label.NON_HATE, scores
    return (Label.HATE if s_hate > s_non else Label.NON_HATE), scores
