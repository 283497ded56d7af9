"""Deterministic random-forest classifier.

Implemented from first principles rather than delegated to a library so
that identical (data, seed) yields byte-identical model files on any
platform, and so the train/predict/save/load seam stays pluggable for
other model families.

Determinism contract: each tree draws its bootstrap sample and per-node
feature subsets from a PCG64 generator seeded by SeedSequence([seed,
tree_index]); nodes are grown in preorder (left before right); split ties
are broken by lowest feature index, then lowest threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, field

import numpy as np

MODEL_FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """Raised for unreadable, corrupt, or version-mismatched model files."""


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 32
    min_samples_split: int = 2
    features_per_split: str | int = "sqrt"  # "sqrt" | "all" | fixed int
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_samples_split < 1:
            raise ValueError("forest counts must be >= 1")
        if isinstance(self.features_per_split, str):
            if self.features_per_split not in ("sqrt", "all"):
                raise ValueError(
                    f"features_per_split must be 'sqrt', 'all', or an int, "
                    f"got {self.features_per_split!r}")
        elif self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")

    def subset_size(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return min(n_features, math.ceil(math.sqrt(n_features)))
        if self.features_per_split == "all":
            return n_features
        return min(n_features, int(self.features_per_split))


@dataclass
class TrainedModel:
    trees: list  # nested dict nodes
    label_table: list
    config: ForestConfig
    feature_dim: int
    format_version: int = MODEL_FORMAT_VERSION
    meta: dict = field(default_factory=dict)


def _gini(counts, n):
    return 1.0 - np.sum((counts / n) ** 2)


def _best_split(X, y, idx, feature_subset, n_labels):
    """Best (feature, threshold, gain) by Gini-impurity decrease over the
    given candidate features, or None when no candidate separates rows.

    Thresholds are midpoints of adjacent sorted distinct values. Ties keep
    the earliest candidate scanned: features ascending, thresholds
    ascending within a feature.
    """
    y_sub = y[idx]
    n = len(idx)
    parent = _gini(np.bincount(y_sub, minlength=n_labels), n)
    best = None
    best_gain = 0.0
    for f in sorted(feature_subset):
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        vals = col[order]
        onehot = np.zeros((n, n_labels))
        onehot[np.arange(n), y_sub[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        cuts = np.nonzero(vals[1:] != vals[:-1])[0] + 1  # split before index i
        if len(cuts) == 0:
            continue
        n_left = cuts.astype(np.float64)
        left_counts = cum[cuts - 1]
        right_counts = cum[-1] - left_counts
        n_right = n - n_left
        gini_left = 1.0 - np.sum(left_counts ** 2, axis=1) / n_left ** 2
        gini_right = 1.0 - np.sum(right_counts ** 2, axis=1) / n_right ** 2
        gains = parent - (n_left * gini_left + n_right * gini_right) / n
        k = int(np.argmax(gains))  # first max = lowest threshold
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            thr = (vals[cuts[k] - 1] + vals[cuts[k]]) / 2.0
            best = (f, float(thr), best_gain)
    return best


def _grow_tree(X, y, idx, rng, config, n_labels, depth=0):
    """Recursively grow one tree over the rows in idx (preorder)."""
    y_sub = y[idx]
    counts = np.bincount(y_sub, minlength=n_labels)
    if (depth >= config.max_depth or len(idx) < config.min_samples_split
            or np.count_nonzero(counts) <= 1):
        return {"counts": counts.tolist()}
    k = config.subset_size(X.shape[1])
    subset = rng.choice(X.shape[1], size=k, replace=False)
    split = _best_split(X, y, idx, subset, n_labels)
    if split is None:
        return {"counts": counts.tolist()}
    f, thr, _ = split
    mask = X[idx, f] <= thr
    # midpoint rounding can in principle swallow a side; degrade to a leaf
    if mask.all() or not mask.any():
        return {"counts": counts.tolist()}
    left = _grow_tree(X, y, idx[mask], rng, config, n_labels, depth + 1)
    right = _grow_tree(X, y, idx[~mask], rng, config, n_labels, depth + 1)
    return {"feature": int(f), "threshold": thr, "left": left, "right": right}


def _tree_rng(seed, tree_index):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, tree_index])))


def train(rows, labels, config: ForestConfig, meta=None) -> TrainedModel:
    """Grow the forest: one bootstrap sample (with replacement, input
    size) per tree, Gini-optimal splits over random feature subsets."""
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("rows must form a 2-D matrix of equal-length rows")
    if X.shape[0] != len(labels):
        raise ValueError(f"{X.shape[0]} rows but {len(labels)} labels")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows to train")
    label_table = sorted(set(labels))
    if len(label_table) < 2:
        raise ValueError("degenerate label set: need >= 2 distinct labels")
    label_index = {lbl: i for i, lbl in enumerate(label_table)}
    y = np.array([label_index[lbl] for lbl in labels])
    n, n_labels = X.shape[0], len(label_table)
    trees = []
    for t in range(config.n_trees):
        rng = _tree_rng(config.seed, t)
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X, y, boot, rng, config, n_labels))
    return TrainedModel(trees=trees, label_table=label_table, config=config,
                        feature_dim=X.shape[1], meta=dict(meta or {}))


def _route(node, row):
    while "feature" in node:
        node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
    return node["counts"]


def predict_votes(model: TrainedModel, rows) -> np.ndarray:
    """Per-row vote fractions over model.label_table: leaf histograms
    summed across trees, then normalized so each row sums to 1."""
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != model.feature_dim:
        raise ValueError(f"row dimension {X.shape[1]} does not match "
                         f"model feature_dim {model.feature_dim}")
    votes = np.zeros((X.shape[0], len(model.label_table)))
    for i, row in enumerate(X):
        for tree in model.trees:
            votes[i] += np.asarray(_route(tree, row), dtype=np.float64)
    return votes / votes.sum(axis=1, keepdims=True)


def predict(model: TrainedModel, rows) -> list:
    """Majority-vote labels; argmax ties break toward the earliest entry
    of label_table."""
    votes = predict_votes(model, rows)
    return [model.label_table[i] for i in np.argmax(votes, axis=1)]


def save_model(model: TrainedModel, path):
    doc = {
        "format_version": model.format_version,
        "config": asdict(model.config),
        "label_table": model.label_table,
        "feature_dim": model.feature_dim,
        "meta": model.meta,
        "trees": model.trees,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> TrainedModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        version = doc["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: model format_version {version} unsupported "
                f"(expected {MODEL_FORMAT_VERSION})")
        return TrainedModel(
            trees=doc["trees"],
            label_table=doc["label_table"],
            config=ForestConfig(**doc["config"]),
            feature_dim=doc["feature_dim"],
            format_version=version,
            meta=doc.get("meta", {}))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"{path}: corrupt model file ({exc})") from exc
