"""Hyperparameter selection by subject-wise validation on the training subjects.

Both selectors run a nested leave-one-subject-out loop over the training
dataset: noise is applied to nested-train and nested-validation features
according to the scenario (validation plays the "test" role), a scaler is
fitted on nested-train only, and the mean validation accuracy decides.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..dataset import Dataset, N_CLASSES, loocv_split, to_arrays
from ..errors import EmptyInput, NeedMultipleSubjects
from ..ranging import NodeId, NoiseSpec, inject_noise_rows
from .knn import KnnClassifier
from .scaling import Scaler
from .svm import SvmClassifier

# Test-role features use stream positions disjoint from train-role features.
TEST_STREAM_OFFSET = 1 << 40

DEFAULT_K_CANDIDATES = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)


@dataclass(frozen=True)
class GridSearchSpec:
    c_candidates: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)
    gamma_candidates: tuple[float, ...] = (0.01, 0.1, 1.0)

    def __post_init__(self):
        if not self.c_candidates or not self.gamma_candidates:
            raise EmptyInput("candidate lists must be non-empty")


def _nested_folds(train: Dataset, noise: NoiseSpec, retained_nodes: Optional[Iterable[NodeId]]):
    if len(train.subjects) < 2:
        raise NeedMultipleSubjects(
            f"selection needs >= 2 training subjects, got {len(train.subjects)}"
        )
    retained = tuple(retained_nodes) if retained_nodes is not None else None
    for subject in train.subject_ids:
        tr, va = loocv_split(train, subject)
        Xtr, ytr = to_arrays(tr, retained)
        Xva, yva = to_arrays(va, retained)
        if noise.applies_to_train:
            Xtr = inject_noise_rows(Xtr, noise, 0)
        if noise.applies_to_test:
            Xva = inject_noise_rows(Xva, noise, TEST_STREAM_OFFSET)
        scaler = Scaler.fit(Xtr)
        yield scaler.transform(Xtr), ytr, scaler.transform(Xva), yva


def select_k_elbow(
    train: Dataset,
    k_candidates: Sequence[int] = DEFAULT_K_CANDIDATES,
    noise: NoiseSpec = NoiseSpec(),
    retained_nodes: Optional[Iterable[NodeId]] = None,
) -> int:
    """The k with the best mean validation accuracy; smallest k on ties."""
    if not k_candidates:
        raise EmptyInput("k_candidates must be non-empty")
    candidates = sorted(set(int(k) for k in k_candidates))
    fold_acc = {k: [] for k in candidates}
    for Xtr, ytr, Xva, yva in _nested_folds(train, noise, retained_nodes):
        max_k = min(max(candidates), len(Xtr))
        labels = KnnClassifier(k=1).fit(Xtr, ytr).neighbor_labels(Xva, max_k)
        for k in candidates:
            votes = np.zeros((len(yva), N_CLASSES), dtype=np.int64)
            kk = min(k, max_k)
            np.add.at(votes, (np.arange(len(yva))[:, None], labels[:, :kk]), 1)
            fold_acc[k].append(float((votes.argmax(axis=1) == yva).mean()))
    best_k, best_acc = candidates[0], -1.0
    for k in candidates:
        acc = float(np.mean(fold_acc[k]))
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k


def svm_grid_search(
    train: Dataset,
    spec: GridSearchSpec = GridSearchSpec(),
    noise: NoiseSpec = NoiseSpec(),
    retained_nodes: Optional[Iterable[NodeId]] = None,
) -> tuple[float, float]:
    """The (C, gamma) with the best mean validation accuracy.

    Ties resolve to the smaller C, then the smaller gamma.
    """
    cs = sorted(set(float(c) for c in spec.c_candidates))
    gammas = sorted(set(float(g) for g in spec.gamma_candidates))
    fold_acc = {(c, g): [] for c in cs for g in gammas}
    for Xtr, ytr, Xva, yva in _nested_folds(train, noise, retained_nodes):
        for c in cs:
            for g in gammas:
                model = SvmClassifier(C=c, gamma=g).fit(Xtr, ytr)
                fold_acc[(c, g)].append(float((model.predict(Xva) == yva).mean()))
    best, best_acc = (cs[0], gammas[0]), -1.0
    for c in cs:
        for g in gammas:
            acc = float(np.mean(fold_acc[(c, g)]))
            if acc > best_acc:
                best, best_acc = (c, g), acc
    return best
