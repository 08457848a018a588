"""Soft-margin RBF support vector machine trained by sequential minimal optimization.

The dual problem (minimize 0.5*a'Qa - e'a subject to y'a = 0, 0 <= a <= C,
with Q_ij = y_i y_j K_ij) is solved two variables at a time. The working set
is the maximal violating pair: the most violated index from the "up" set
paired against the most violated from the "down" set; optimization stops when
the violation gap falls below the tolerance. Kernel rows are computed on
demand and kept in a bounded most-recently-used cache keyed by sample index.

Multi-class decisions use one-vs-one voting over all 36 class pairs; vote
ties resolve to the lowest class index.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from ..dataset import N_CLASSES
from ..errors import DimensionMismatch, EmptyTrainingSet, InvalidArgument


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every row pair of A (m,d) and B (n,d)."""
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _KernelRowCache:
    """Most-recently-used cache of full kernel rows, keyed by training index."""

    def __init__(self, X: np.ndarray, gamma: float, max_rows: int):
        self._X = X
        self._sq = np.sum(X * X, axis=1)
        self._gamma = gamma
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._max_rows = max(2, max_rows)

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        sq = self._sq + self._sq[i] - 2.0 * (self._X @ self._X[i])
        np.maximum(sq, 0.0, out=sq)
        row = np.exp(-self._gamma * sq)
        self._rows[i] = row
        if len(self._rows) > self._max_rows:
            self._rows.popitem(last=False)
        return row


@dataclass
class BinarySvm:
    """One trained binary machine: dual coefficients over its support vectors."""

    support_idx: np.ndarray  # indices into the training set this machine saw
    coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    dual_objective: float
    alphas: np.ndarray  # full alpha vector (diagnostics / oracle checks)
    n_iter: int

    def decision(self, kernel_cols: np.ndarray) -> np.ndarray:
        """Decision values given kernel columns (n_queries, n_support)."""
        return kernel_cols @ self.coef + self.bias


def smo_train(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    gamma: float,
    tol: float = 1e-3,
    max_iter: int = 10_000_000,
    cache_rows: int = 4096,
) -> BinarySvm:
    """Train one binary machine on labels y in {-1, +1}.

    Coefficients are clipped into [0, C] exactly after every update, and the
    returned model records the achieved dual objective e'a - 0.5*a'Qa.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(X)
    if n == 0:
        raise EmptyTrainingSet("svm needs at least one training sample")
    if C <= 0 or gamma <= 0:
        raise InvalidArgument(f"C and gamma must be positive, got C={C} gamma={gamma}")

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the minimization objective at alpha = 0
    cache = _KernelRowCache(X, gamma, cache_rows)
    pos = y > 0

    it = 0
    while it < max_iter:
        it += 1
        neg_yg = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            break
        up_vals = np.where(up, neg_yg, -np.inf)
        low_vals = np.where(low, neg_yg, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        gap = up_vals[i] - low_vals[j]
        if gap <= tol:
            break

        Ki = cache.row(i)
        Kj = cache.row(j)
        eta = Ki[i] + Kj[j] - 2.0 * Ki[j]
        if eta <= 1e-12:
            eta = 1e-12
        step = gap / eta
        room_i = (C - alpha[i]) if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else (C - alpha[j])
        step = min(step, room_i, room_j)
        if step <= 0:
            break

        alpha[i] = np.clip(alpha[i] + y[i] * step, 0.0, C)
        alpha[j] = np.clip(alpha[j] - y[j] * step, 0.0, C)
        grad += y * step * (Ki - Kj)

    neg_yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(neg_yg[free].mean())
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        hi = neg_yg[up].max() if up.any() else 0.0
        lo = neg_yg[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)

    # e'a - 0.5*a'Qa, using grad = Qa - e  =>  a'Qa = a'(grad + e).
    dual = float(alpha.sum() - 0.5 * alpha @ (grad + 1.0))
    support = np.flatnonzero(alpha > 0)
    return BinarySvm(
        support_idx=support,
        coef=(alpha * y)[support],
        bias=bias,
        dual_objective=dual,
        alphas=alpha,
        n_iter=it,
    )


@dataclass
class _Machine:
    class_pos: int  # voted when the decision is >= 0
    class_neg: int
    constant: Optional[int] = None  # degenerate pair: always vote this class
    svm: Optional[BinarySvm] = None
    union_idx: Optional[np.ndarray] = None  # support rows within the union matrix


class SvmClassifier:
    """One-vs-one multi-class SVM over the nine posture classes."""

    def __init__(self, C: float = 1.0, gamma: float = 0.1, tol: float = 1e-3, cache_rows: int = 4096):
        if C <= 0 or gamma <= 0:
            raise InvalidArgument(f"C and gamma must be positive, got C={C} gamma={gamma}")
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.cache_rows = cache_rows
        self._machines: list[_Machine] = []
        self._sv_matrix: Optional[np.ndarray] = None
        self._dim: Optional[int] = None

    @property
    def machines(self) -> list[_Machine]:
        return self._machines

    def fit(self, X: np.ndarray, y: np.ndarray) -> "SvmClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) == 0:
            raise EmptyTrainingSet("svm needs at least one training sample")
        self._dim = X.shape[1]
        self._machines = []
        sv_rows: list[np.ndarray] = []  # training indices feeding the union matrix
        for a, b in combinations(range(N_CLASSES), 2):
            mask = (y == a) | (y == b)
            present = np.unique(y[mask])
            if len(present) < 2:
                constant = int(present[0]) if len(present) == 1 else a
                self._machines.append(_Machine(class_pos=a, class_neg=b, constant=constant))
                continue
            rows = np.flatnonzero(mask)
            labels = np.where(y[rows] == a, 1.0, -1.0)
            svm = smo_train(
                X[rows], labels, self.C, self.gamma, tol=self.tol, cache_rows=self.cache_rows
            )
            self._machines.append(
                _Machine(class_pos=a, class_neg=b, svm=svm, union_idx=rows[svm.support_idx])
            )
            sv_rows.append(rows[svm.support_idx])

        if sv_rows:
            union = np.unique(np.concatenate(sv_rows))
            lookup = {int(t): i for i, t in enumerate(union)}
            self._sv_matrix = X[union]
            for m in self._machines:
                if m.svm is not None:
                    m.union_idx = np.array([lookup[int(t)] for t in m.union_idx], dtype=np.intp)
        else:
            self._sv_matrix = np.empty((0, self._dim))
        return self

    @property
    def is_fitted(self) -> bool:
        return self._dim is not None

    def _check_dim(self, d: int) -> None:
        if d != self._dim:
            raise DimensionMismatch(f"expected {self._dim} features, got {d}")

    def decision_votes(self, queries: np.ndarray) -> np.ndarray:
        """(n_queries, 9) one-vs-one vote counts."""
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        self._check_dim(queries.shape[1])
        votes = np.zeros((len(queries), N_CLASSES), dtype=np.int64)
        kernel = (
            rbf_kernel(queries, self._sv_matrix, self.gamma)
            if len(self._sv_matrix)
            else np.empty((len(queries), 0))
        )
        for m in self._machines:
            if m.svm is None:
                votes[:, m.constant] += 1
                continue
            dec = m.svm.decision(kernel[:, m.union_idx])
            votes[np.arange(len(queries)), np.where(dec >= 0, m.class_pos, m.class_neg)] += 1
        return votes

    def predict(self, queries: np.ndarray) -> np.ndarray:
        return self.decision_votes(queries).argmax(axis=1)

    def predict_one(self, query: np.ndarray) -> int:
        return int(self.predict(np.asarray(query, dtype=float)[None, :])[0])
