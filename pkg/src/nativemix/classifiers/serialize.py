"""Versioned JSON persistence for trained models."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..corpus import Label
from .naive_bayes import NBModel
from .random_forest import RFModel, TreeNode
from .svm import SVMModel

MODEL_FORMAT_VERSION = 1


def _tree_to_dict(node: TreeNode) -> dict:
    if node.votes is not None:
        return {"votes": {label.value: count for label, count in node.votes.items()}}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(data: dict) -> TreeNode:
    if "votes" in data:
        return TreeNode(votes={Label(k): v for k, v in data["votes"].items()})
    return TreeNode(
        feature=data["feature"],
        threshold=data["threshold"],
        left=_tree_from_dict(data["left"]),
        right=_tree_from_dict(data["right"]),
    )


def save_model(model, path: str | Path) -> None:
    if isinstance(model, NBModel):
        payload = {
            "kind": "nb",
            "alpha": model.alpha,
            "class_log_priors": {
                label.value: value for label, value in model.class_log_priors.items()
            },
            "feature_log_likelihoods": {
                label.value: arr.tolist()
                for label, arr in model.feature_log_likelihoods.items()
            },
        }
    elif isinstance(model, SVMModel):
        payload = {
            "kind": "svm",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "lam": model.lam,
            "epochs": model.epochs,
            "seed": model.seed,
            "objective_history": model.objective_history,
            "best_epoch": model.best_epoch,
        }
    elif isinstance(model, RFModel):
        payload = {
            "kind": "rf",
            "num_trees": model.num_trees,
            "max_features": model.max_features,
            "seed": model.seed,
            "trees": [_tree_to_dict(tree) for tree in model.trees],
        }
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")

    payload["version"] = MODEL_FORMAT_VERSION
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version: {payload.get('version')}")
    kind = payload["kind"]
    if kind == "nb":
        return NBModel(
            class_log_priors={
                Label(k): v for k, v in payload["class_log_priors"].items()
            },
            feature_log_likelihoods={
                Label(k): np.array(v)
                for k, v in payload["feature_log_likelihoods"].items()
            },
            alpha=payload["alpha"],
        )
    if kind == "svm":
        return SVMModel(
            weights=np.array(payload["weights"]),
            bias=payload["bias"],
            lam=payload["lam"],
            epochs=payload["epochs"],
            seed=payload["seed"],
            objective_history=payload["objective_history"],
            best_epoch=payload["best_epoch"],
        )
    if kind == "rf":
        return RFModel(
            trees=[_tree_from_dict(t) for t in payload["trees"]],
            num_trees=payload["num_trees"],
            max_features=payload["max_features"],
            seed=payload["seed"],
        )
    raise ValueError(f"unknown model kind: {kind!r}")
