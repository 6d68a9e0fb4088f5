"""k-nearest-neighbour and nearest-centroid classifiers on standardized vectors.

These stand in for heavier ML/DL baselines: if they separate the classes the
encodings carry the signal, and their cross-sensor drop shows the domain gap.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyClass, InvalidParameter


class Kind(str, enum.Enum):
    KNN = "knn"
    CENTROID = "centroid"


@dataclass(frozen=True, eq=False)
class FittedClassifier:
    kind: Kind
    k: int
    train: np.ndarray          # standardized rows
    train_labels: np.ndarray   # class indices into ``classes``
    classes: tuple
    mean: np.ndarray
    std: np.ndarray
    centroids: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def raw_centroids(self) -> Optional[np.ndarray]:
        """Class means in the original (unstandardized) units."""
        return None if self.centroids is None else self.centroids * self.std + self.mean

    def standardize(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim} features, got {x.shape[-1]}")
        return (x - self.mean) / self.std


def _class_order(labels):
    try:
        return tuple(sorted(set(labels)))
    except TypeError:
        return tuple(dict.fromkeys(labels))


def fit(vectors, labels: Sequence, kind=Kind.KNN, k: int = 5) -> FittedClassifier:
    kind = Kind(kind)
    labels = list(labels)
    if not labels:
        raise EmptyClass("no training examples")
    try:
        x = np.asarray(vectors, dtype=np.float64)
    except ValueError:
        raise DimensionMismatch("training vectors differ in length") from None
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] != len(labels):
        raise DimensionMismatch(f"{x.shape[0]} vectors for {len(labels)} labels")
    if kind is Kind.KNN and not 1 <= k <= len(labels):
        raise InvalidParameter(f"k must lie in 1..{len(labels)}, got {k}")

    classes = _class_order(labels)
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in labels], dtype=np.int64)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0] = 1.0
    z = (x - mean) / std
    centroids = None
    if kind is Kind.CENTROID:
        centroids = np.stack([z[y == i].mean(axis=0) for i in range(len(classes))])
    return FittedClassifier(kind, int(k), z, y, classes, mean, std, centroids)


def _sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum((a ** 2).sum(1)[:, None] - 2 * a @ b.T + (b ** 2).sum(1)[None, :], 0.0)


def _vote(dist_row: np.ndarray, labels: np.ndarray, k: int) -> int:
    nearest = np.argsort(dist_row, kind="stable")[:k]
    votes = Counter(labels[nearest].tolist())
    top = max(votes.values())
    tied = [c for c, v in votes.items() if v == top]
    if len(tied) == 1:
        return tied[0]
    # fewest-distance class wins, then lowest class index
    dist = np.sqrt(dist_row[nearest])
    summed = {c: dist[labels[nearest] == c].sum() for c in tied}
    return min(tied, key=lambda c: (summed[c], c))


def predict_many(model: FittedClassifier, vectors, chunk: int = 256) -> list:
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if model.dim == 1 else x[None, :]
    z = model.standardize(x)
    out = []
    for lo in range(0, z.shape[0], chunk):
        block = z[lo:lo + chunk]
        if model.kind is Kind.CENTROID:
            idx = np.argmin(_sq_dist(block, model.centroids), axis=1)
        else:
            d = _sq_dist(block, model.train)
            idx = [_vote(row, model.train_labels, model.k) for row in d]
        out.extend(model.classes[i] for i in idx)
    return out


def predict(model: FittedClassifier, vector):
    v = np.asarray(vector, dtype=np.float64).reshape(1, -1)
    return predict_many(model, v)[0]


def accuracy(model: FittedClassifier, vectors, labels) -> float:
    preds = predict_many(model, vectors)
    return float(np.mean([p == t for p, t in zip(preds, labels)]))
