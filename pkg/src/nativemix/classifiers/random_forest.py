"""Random forest with Gini-impurity decision trees, from scratch.

Trees grow on bootstrap resamples with a fresh random feature subset at
every node, to unlimited depth and single-sample leaves. Tree k draws from
a generator seeded seed+k, so the forest is reproducible and trees could
be grown in parallel without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import Label
from ..errors import SingleClassTrainingSet
from ..features import SparseVector

_LABELS = (Label.HATE, Label.NON_HATE)


@dataclass
class TreeNode:
    # internal node: feature/threshold/left/right set, votes None
    # leaf: votes set (training label counts), the rest None
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    votes: dict[Label, int] | None = None


@dataclass
class RFModel:
    trees: list[TreeNode]
    num_trees: int
    max_features: int
    seed: int


def _to_dense(X: list[SparseVector], num_features: int) -> np.ndarray:
    dense = np.zeros((len(X), num_features))
    for row, x in enumerate(X):
        for idx, value in x.entries:
            dense[row, idx] = value
    return dense


def _leaf(labels: np.ndarray) -> TreeNode:
    votes = {label: int(np.sum(labels == i)) for i, label in enumerate(_LABELS)}
    return TreeNode(votes=votes)


def _best_split(values: np.ndarray, labels: np.ndarray):
    """Scan split points of one feature, returning (gini, threshold) or None.

    Splits test "value > threshold"; candidates sit on the distinct sorted
    values, skipping the maximum (which would leave the right side empty).
    """
    order = np.argsort(values, kind="stable")
    v = values[order]
    lab = labels[order]
    n = len(v)
    # prefix[i] = hate count among the first i sorted samples
    prefix = np.concatenate(([0], np.cumsum(lab == 0)))
    total_hate = prefix[-1]

    best = None
    i = 0
    while i < n:
        j = i
        while j + 1 < n and v[j + 1] == v[i]:
            j += 1
        if j + 1 >= n:
            break  # threshold at the max value is trivial
        n_left = j + 1
        n_right = n - n_left
        hate_left = prefix[n_left]
        hate_right = total_hate - hate_left
        p_l = hate_left / n_left
        p_r = hate_right / n_right
        gini = (n_left / n) * 2 * p_l * (1 - p_l) \
            + (n_right / n) * 2 * p_r * (1 - p_r)
        if best is None or gini < best[0]:
            best = (gini, float(v[j]))
        i = j + 1
    return best


def _grow_tree(
    dense: np.ndarray,
    labels: np.ndarray,
    rows: np.ndarray,
    max_features: int,
    rng: np.random.Generator,
) -> TreeNode:
    num_features = dense.shape[1]
    root = TreeNode()
    stack = [(root, rows)]
    while stack:
        node, idx = stack.pop()
        node_labels = labels[idx]
        if np.all(node_labels == node_labels[0]):
            leaf = _leaf(node_labels)
            node.votes = leaf.votes
            continue

        candidates = rng.choice(num_features, size=max_features, replace=False)
        best = None
        for feature in candidates:
            split = _best_split(dense[idx, feature], node_labels)
            if split is not None and (best is None or split[0] < best[0]):
                best = (split[0], int(feature), split[1])
        if best is None:
            # every sampled feature is constant on this subset
            leaf = _leaf(node_labels)
            node.votes = leaf.votes
            continue

        _, feature, threshold = best
        mask = dense[idx, feature] > threshold
        node.feature = feature
        node.threshold = threshold
        node.left = TreeNode()
        node.right = TreeNode()
        stack.append((node.left, idx[~mask]))
        stack.append((node.right, idx[mask]))
    return root


def rf_train(
    X: list[SparseVector],
    y: list[Label],
    num_features: int,
    num_trees: int = 100,
    max_features: int | None = None,
    seed: int = 0,
) -> RFModel:
    if len(X) != len(y) or not X:
        raise ValueError("X and y must be non-empty and the same length")
    if len(set(y)) < 2:
        raise SingleClassTrainingSet("training data must contain both labels")
    if max_features is None:
        max_features = max(1, math.ceil(math.sqrt(num_features)))
    if max_features > num_features:
        raise ValueError("max_features exceeds the feature count")

    dense = _to_dense(X, num_features)
    labels = np.array([_LABELS.index(label) for label in y])
    n = len(X)

    trees = []
    for k in range(num_trees):
        rng = np.random.default_rng(seed + k)
        bootstrap = rng.choice(n, size=n, replace=True)
        trees.append(_grow_tree(dense, labels, bootstrap, max_features, rng))

    return RFModel(trees=trees, num_trees=num_trees,
                   max_features=max_features, seed=seed)


def _tree_vote(node: TreeNode, values: dict[int, float]) -> Label:
    while node.votes is None:
        value = values.get(node.feature, 0.0)
        node = node.right if value > node.threshold else node.left
    hate = node.votes[Label.HATE]
    nonhate = node.votes[Label.NON_HATE]
    return Label.HATE if hate > nonhate else Label.NON_HATE


def rf_predict(model: RFModel, x: SparseVector) -> Label:
    """Majority vote across trees; ties go to non-hate."""
    values = dict(x.entries)
    hate_votes = sum(
        1 for tree in model.trees if _tree_vote(tree, values) == Label.HATE
    )
    return Label.HATE if 2 * hate_votes > len(model.trees) else Label.NON_HATE
