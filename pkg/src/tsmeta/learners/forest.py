"""Random forest of Gini CART trees for picking the best model label."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..models import ModelId

CLASSES: tuple[ModelId, ...] = tuple(ModelId.ordered())
N_CLASSES = len(CLASSES)
LEAF = -1


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat node arrays; ``feature[i] == LEAF`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    def leaf_of(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] != LEAF:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def leaves(self, X: np.ndarray) -> np.ndarray:
        nodes = np.zeros(len(X), dtype=np.int64)
        active = self.feature[nodes] != LEAF
        while np.any(active):
            idx = np.flatnonzero(active)
            cur = nodes[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            nodes[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[nodes] != LEAF
        return nodes

    def predict_index(self, X: np.ndarray) -> np.ndarray:
        # argmax keeps the first maximum, i.e. the lexicographically smaller label
        return np.argmax(self.counts[self.leaves(X)], axis=1)

    def to_json(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "counts": self.counts.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> Tree:
        return cls(np.array(obj["feature"], dtype=np.int64), np.array(obj["threshold"], dtype=float),
                   np.array(obj["left"], dtype=np.int64), np.array(obj["right"], dtype=np.int64),
                   np.array(obj["counts"], dtype=np.int64).reshape(-1, N_CLASSES))


@dataclass(frozen=True, eq=False)
class RandomForest:
    trees: tuple[Tree, ...]
    n_trees: int
    max_depth: int
    seed: int
    single_class: bool = False

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        tally = np.zeros((len(X), N_CLASSES), dtype=np.int64)
        for tree in self.trees:
            tally[np.arange(len(X)), tree.predict_index(X)] += 1
        return tally

    def predict_many(self, X: np.ndarray) -> list[ModelId]:
        return [CLASSES[i] for i in np.argmax(self.votes(X), axis=1)]

    def to_json(self) -> dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth, "seed": self.seed,
                "single_class": self.single_class, "classes": [c.value for c in CLASSES],
                "trees": [t.to_json() for t in self.trees]}

    @classmethod
    def from_json(cls, obj: dict) -> RandomForest:
        if obj["classes"] != [c.value for c in CLASSES]:
            raise ValidationError("forest class list does not match the model set")
        return cls(tuple(Tree.from_json(t) for t in obj["trees"]), int(obj["n_trees"]),
                   int(obj["max_depth"]), int(obj["seed"]), bool(obj["single_class"]))


def predict_model(forest: RandomForest, z: np.ndarray) -> ModelId:
    """Majority vote over trees; ties go to the lexicographically smaller model."""
    return forest.predict_many(np.asarray(z, dtype=float)[None, :])[0]


def _gini(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = counts / totals[..., None]
    return 1.0 - np.nansum(p ** 2, axis=-1)


def _best_split(X: np.ndarray, y: np.ndarray, feature: int) -> tuple[float, float] | None:
    """(weighted child impurity, threshold) of the best cut on one feature."""
    order = np.argsort(X[:, feature], kind="mergesort")
    xs = X[order, feature]
    onehot = np.zeros((len(y), N_CLASSES))
    onehot[np.arange(len(y)), y[order]] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    right = left[-1] + onehot[-1] - left
    cuts = np.flatnonzero(xs[1:] > xs[:-1])
    if cuts.size == 0:
        return None
    nl = (cuts + 1).astype(float)
    nr = len(y) - nl
    score = (nl * _gini(left[cuts]) + nr * _gini(right[cuts])) / len(y)
    best = int(np.argmin(score))
    i = cuts[best]
    return float(score[best]), float(0.5 * (xs[i] + xs[i + 1]))


def _grow(X: np.ndarray, y: np.ndarray, max_depth: int, mtry: int,
          rng: np.random.Generator) -> Tree:
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.bincount(y[idx], minlength=N_CLASSES))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) <= 1 or np.count_nonzero(counts[node]) <= 1:
            continue
        best = None
        tried = 0
        # keep drawing features until mtry usable ones have been scored
        for f in rng.permutation(X.shape[1]):
            cand = _best_split(X[idx], y[idx], int(f))
            if cand is None:
                continue
            tried += 1
            if best is None or cand[0] < best[0]:
                best = (cand[0], cand[1], int(f))
            if tried >= mtry:
                break
        if best is None:
            continue
        _, thr, f = best
        go_left = X[idx, f] <= thr
        feature[node], threshold[node] = f, thr
        li, ri = idx[go_left], idx[~go_left]
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(counts, dtype=np.int64).reshape(-1, N_CLASSES))


def _constant_tree(label: int) -> Tree:
    counts = np.zeros((1, N_CLASSES), dtype=np.int64)
    counts[0, label] = 1
    return Tree(np.array([LEAF]), np.array([0.0]), np.array([LEAF]), np.array([LEAF]), counts)


def train_forest(X: np.ndarray, labels, n_trees: int = 100, max_depth: int = 12,
                 seed: int = 0) -> RandomForest:
    """Bootstrap-aggregated CART trees with ceil(sqrt(d)) features tried per node.

    With a single class present the result is a constant classifier flagged
    ``single_class``.
    """
    X = np.asarray(X, dtype=float)
    y = np.array([CLASSES.index(ModelId(lab)) for lab in labels], dtype=np.int64)
    if len(y) == 0:
        raise ValidationError("cannot train a forest on zero records")
    if len(y) != len(X):
        raise ValidationError("features and labels differ in length")
    present = np.unique(y)
    if len(present) == 1:
        return RandomForest((_constant_tree(int(present[0])),), n_trees, max_depth, seed, True)
    mtry = math.ceil(math.sqrt(X.shape[1]))
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xF0257]))
    trees = []
    for _ in range(n_trees):
        boot = rng.integers(0, len(y), len(y))
        trees.append(_grow(X[boot], y[boot], max_depth, mtry, rng))
    return RandomForest(tuple(trees), n_trees, max_depth, seed)
