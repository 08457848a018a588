"""k-nearest-neighbors classifier with Manhattan (L1) distance.

Tie rules are part of the contract: neighbors at equal distance are ranked by
lower training index, and tied votes resolve to the lowest class index.
"""

from __future__ import annotations

import numpy as np

from ..dataset import N_CLASSES
from ..errors import DimensionMismatch, EmptyTrainingSet, InvalidArgument

_CHUNK = 1024


class KnnClassifier:
    def __init__(self, k: int = 2):
        if k < 1:
            raise InvalidArgument(f"k must be >= 1, got {k}")
        self.k = k
        self._X = None
        self._y = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KnnClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrainingSet("knn needs at least one training sample")
        if self.k > len(X):
            raise InvalidArgument(f"k={self.k} exceeds {len(X)} stored samples")
        self._X = X
        self._y = y
        return self

    @property
    def is_fitted(self) -> bool:
        return self._X is not None

    def _check_dim(self, d: int) -> None:
        if d != self._X.shape[1]:
            raise DimensionMismatch(f"expected {self._X.shape[1]} features, got {d}")

    def _distances(self, queries: np.ndarray) -> np.ndarray:
        # (m, n) L1 distances, accumulated one feature at a time to bound memory.
        out = np.zeros((queries.shape[0], self._X.shape[0]))
        buf = np.empty_like(out)
        for d in range(self._X.shape[1]):
            np.subtract(queries[:, d, None], self._X[None, :, d], out=buf)
            np.abs(buf, out=buf)
            out += buf
        return out

    def _select(self, dists: np.ndarray, k: int) -> np.ndarray:
        """Indices of the k nearest rows; equal distances rank by lower index."""
        n = dists.shape[0]
        if k >= n:
            return np.argsort(dists, kind="stable")
        kth = np.partition(dists, k - 1)[k - 1]
        candidates = np.flatnonzero(dists <= kth)
        order = candidates[np.argsort(dists[candidates], kind="stable")]
        return order[:k]

    def neighbor_labels(self, queries: np.ndarray, max_k: int) -> np.ndarray:
        """(m, max_k) labels of each query's nearest neighbors, nearest first."""
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        self._check_dim(queries.shape[1])
        max_k = min(max_k, len(self._X))
        out = np.empty((queries.shape[0], max_k), dtype=np.int64)
        for start in range(0, queries.shape[0], _CHUNK):
            chunk = queries[start : start + _CHUNK]
            dists = self._distances(chunk)
            for i, row in enumerate(dists):
                out[start + i] = self._y[self._select(row, max_k)]
        return out

    def predict(self, queries: np.ndarray) -> np.ndarray:
        """Majority label of the k nearest stored samples, per query row."""
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        self._check_dim(queries.shape[1])
        n = len(self._X)
        k = min(self.k, n)
        out = np.empty(len(queries), dtype=np.int64)
        for start in range(0, len(queries), _CHUNK):
            dists = self._distances(queries[start : start + _CHUNK])
            m = dists.shape[0]
            if k >= n:
                chosen = np.broadcast_to(np.arange(n), (m, n))
                kth = dists.max(axis=1)
            else:
                chosen = np.argpartition(dists, k - 1, axis=1)[:, :k]
                kth = dists[np.arange(m)[:, None], chosen].max(axis=1)
            votes = np.zeros((m, N_CLASSES), dtype=np.int64)
            np.add.at(votes, (np.arange(m)[:, None], self._y[chosen]), 1)
            # Boundary ties (several rows at the kth distance) fall back to the
            # exact index-ordered rule; with continuous features this is rare.
            tied = np.flatnonzero((dists <= kth[:, None]).sum(axis=1) > k)
            for r in tied:
                idx = self._select(dists[r], k)
                votes[r] = np.bincount(self._y[idx], minlength=N_CLASSES)
            out[start : start + m] = votes.argmax(axis=1)
        return out

    def predict_one(self, query: np.ndarray) -> int:
        query = np.asarray(query, dtype=float)
        self._check_dim(query.shape[0])
        dists = np.abs(self._X - query).sum(axis=1)
        idx = self._select(dists, min(self.k, len(dists)))
        counts = np.bincount(self._y[idx], minlength=N_CLASSES)
        return int(counts.argmax())
