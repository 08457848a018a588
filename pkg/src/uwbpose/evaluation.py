"""Confusion-matrix metrics and the leave-one-subject-out evaluation harness.

Per-class balanced accuracy is (sensitivity + specificity) / 2, which
reproduces the reference per-class bar values from the reference confusion
matrices to high precision and is therefore the canonical definition here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .classifiers import (
    DEFAULT_K_CANDIDATES,
    GridSearchSpec,
    KnnClassifier,
    MlpClassifier,
    MlpConfig,
    Scaler,
    SvmClassifier,
    select_k_elbow,
    svm_grid_search,
)
from .classifiers.selection import TEST_STREAM_OFFSET
from .dataset import Dataset, N_CLASSES, loocv_split, to_arrays
from .errors import (
    EmptyInput,
    EmptyMatrix,
    InvalidArgument,
    InvalidLabel,
    LengthMismatch,
    NeedMultipleSubjects,
)
from .ranging import ALL_NODES, NodeId, NoiseScenario, NoiseSpec, inject_noise_rows


@dataclass(frozen=True)
class ConfusionMatrix:
    """9x9 counts; entry (t, p) counts samples of true class t predicted as p."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise InvalidArgument(f"expected {N_CLASSES}x{N_CLASSES} counts, got {counts.shape}")
        if np.any(counts < 0):
            raise InvalidArgument("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


@dataclass(frozen=True)
class ClassMetrics:
    recall: float
    precision: float
    specificity: float
    balanced_accuracy: float
    f1: float


def confusion(truth: Sequence[int], pred: Sequence[int]) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape:
        raise LengthMismatch(f"truth has {truth.shape} labels, pred has {pred.shape}")
    for name, arr in (("truth", truth), ("pred", pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= N_CLASSES):
            raise InvalidLabel(f"{name} labels must be in 0..{N_CLASSES - 1}")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (truth, pred), 1)
    return ConfusionMatrix(counts)


def class_metrics(cm: ConfusionMatrix, c: int) -> ClassMetrics:
    if cm.total == 0:
        raise EmptyMatrix("metrics are undefined on an empty matrix")
    c = int(c)
    if not 0 <= c < N_CLASSES:
        raise InvalidLabel(f"class must be in 0..{N_CLASSES - 1}, got {c}")
    counts = cm.counts
    tp = float(counts[c, c])
    row = float(counts[c, :].sum())
    col = float(counts[:, c].sum())
    negatives = float(cm.total) - row
    fp = col - tp
    recall = tp / row if row > 0 else 0.0
    precision = tp / col if col > 0 else 0.0
    specificity = (negatives - fp) / negatives if negatives > 0 else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return ClassMetrics(
        recall=recall,
        precision=precision,
        specificity=specificity,
        balanced_accuracy=(recall + specificity) / 2,
        f1=f1,
    )


def overall_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("accuracy is undefined on an empty matrix")
    return float(np.trace(cm.counts)) / cm.total


def mean_balanced_accuracy(cm: ConfusionMatrix) -> float:
    return float(np.mean([class_metrics(cm, c).balanced_accuracy for c in range(N_CLASSES)]))


@dataclass(frozen=True)
class ModelSpec:
    """Which classifier to train, with its hyperparameters."""

    kind: str  # "knn" | "svm" | "mlp"
    k: int = 2
    C: float = 1.0
    gamma: float = 0.1
    mlp: MlpConfig = field(default_factory=MlpConfig)

    def __post_init__(self):
        if self.kind not in ("knn", "svm", "mlp"):
            raise InvalidArgument(f"unknown model kind {self.kind!r}")

    def build(self, seed: int = 0):
        if self.kind == "knn":
            return KnnClassifier(k=self.k)
        if self.kind == "svm":
            return SvmClassifier(C=self.C, gamma=self.gamma)
        return MlpClassifier(replace(self.mlp, seed=seed))

    def describe(self) -> dict:
        if self.kind == "knn":
            return {"kind": "knn", "k": self.k}
        if self.kind == "svm":
            return {"kind": "svm", "C": self.C, "gamma": self.gamma}
        cfg = self.mlp
        return {
            "kind": "mlp",
            "hidden": list(cfg.hidden),
            "learning_rate": cfg.learning_rate,
            "epochs": cfg.epochs,
            "batch_size": cfg.batch_size,
            "momentum": cfg.momentum,
        }


@dataclass(frozen=True)
class LatencyStats:
    mean_s: float
    p95_s: float
    max_s: float
    n: int

    def to_dict(self) -> dict:
        return {"mean_s": self.mean_s, "p95_s": self.p95_s, "max_s": self.max_s, "n": self.n}


@dataclass(frozen=True)
class EvaluationReport:
    model: dict
    noise: dict
    retained_nodes: tuple[int, ...]
    matrix: ConfusionMatrix
    per_class: tuple[ClassMetrics, ...]
    overall_accuracy: float
    mean_balanced_accuracy: float
    latency: LatencyStats
    seed: int
    selected_per_fold: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {
            "model": self.model,
            "noise": self.noise,
            "retained_nodes": list(self.retained_nodes),
            "confusion": self.matrix.counts.tolist(),
            "per_class": [
                {
                    "class": c,
                    "recall": m.recall,
                    "precision": m.precision,
                    "specificity": m.specificity,
                    "balanced_accuracy": m.balanced_accuracy,
                    "f1": m.f1,
                }
                for c, m in enumerate(self.per_class)
            ],
            "overall_accuracy": self.overall_accuracy,
            "mean_balanced_accuracy": self.mean_balanced_accuracy,
            "seed": self.seed,
            "meta": {"latency": self.latency.to_dict()},
        }
        if self.selected_per_fold is not None:
            d["selected_per_fold"] = self.selected_per_fold
        return d


def _noise_dict(noise: NoiseSpec) -> dict:
    return {
        "scenario": noise.scenario.value,
        "max_magnitude": noise.max_magnitude,
        "seed": noise.seed,
    }


def train_fold(
    dataset: Dataset,
    held_out: str,
    spec: ModelSpec,
    noise: NoiseSpec = NoiseSpec(),
    retained_nodes: Optional[Iterable[NodeId]] = None,
    seed: int = 0,
):
    """Fit the per-fold pipeline and return (model, scaler, Xtest, ytest).

    Test features are returned already noised (per scenario) but unscaled.
    """
    retained = tuple(retained_nodes) if retained_nodes is not None else None
    train, test = loocv_split(dataset, held_out)
    Xtr, ytr = to_arrays(train, retained)
    Xte, yte = to_arrays(test, retained)
    if noise.applies_to_train:
        Xtr = inject_noise_rows(Xtr, noise, 0)
    if noise.applies_to_test:
        Xte = inject_noise_rows(Xte, noise, TEST_STREAM_OFFSET)
    scaler = Scaler.fit(Xtr)
    model = spec.build(seed=seed)
    model.fit(scaler.transform(Xtr), ytr)
    return model, scaler, Xte, yte


def run_loocv(
    dataset: Dataset,
    spec: ModelSpec,
    noise: NoiseSpec = NoiseSpec(),
    retained_nodes: Optional[Iterable[NodeId]] = None,
    seed: int = 0,
) -> EvaluationReport:
    """Aggregate confusion counts over one fold per subject."""
    if len(dataset.subjects) < 2:
        raise NeedMultipleSubjects(f"LOOCV needs >= 2 subjects, got {len(dataset.subjects)}")
    retained = tuple(retained_nodes) if retained_nodes is not None else tuple(ALL_NODES[: dataset.node_count])
    cm = ConfusionMatrix(np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64))
    predict_time = 0.0
    n_queries = 0
    for fold, subject in enumerate(dataset.subject_ids):
        model, scaler, Xte, yte = train_fold(
            dataset, subject, spec, noise, retained, seed=seed + fold
        )
        t0 = time.perf_counter()
        pred = model.predict(scaler.transform(Xte))
        predict_time += time.perf_counter() - t0
        n_queries += len(yte)
        cm = cm + confusion(yte, pred)
    per_prediction = predict_time / max(n_queries, 1)
    latency = LatencyStats(mean_s=per_prediction, p95_s=per_prediction, max_s=per_prediction, n=n_queries)
    return EvaluationReport(
        model=spec.describe(),
        noise=_noise_dict(noise),
        retained_nodes=tuple(int(n) for n in retained),
        matrix=cm,
        per_class=tuple(class_metrics(cm, c) for c in range(N_CLASSES)),
        overall_accuracy=overall_accuracy(cm),
        mean_balanced_accuracy=mean_balanced_accuracy(cm),
        latency=latency,
        seed=seed,
    )


def noise_sweep(
    dataset: Dataset,
    specs: Sequence[ModelSpec],
    noise_magnitude: float = 0.30,
    noise_seed: int = 0,
    seed: int = 0,
    k_candidates: Sequence[int] = DEFAULT_K_CANDIDATES,
    grid: GridSearchSpec = GridSearchSpec(),
    reselect: bool = True,
) -> dict[tuple[str, str], EvaluationReport]:
    """Evaluate every model under the four noise scenarios.

    With ``reselect`` (the default), KNN's k and the SVM's (C, gamma) are
    re-selected inside every fold by nested subject-wise validation on that
    fold's training subjects, so the held-out subject never influences
    hyperparameters. The per-fold choices are recorded in the report.
    """
    if len(dataset.subjects) < 2:
        raise NeedMultipleSubjects(f"LOOCV needs >= 2 subjects, got {len(dataset.subjects)}")
    results: dict[tuple[str, str], EvaluationReport] = {}
    for scenario in NoiseScenario:
        noise = NoiseSpec(scenario=scenario, max_magnitude=noise_magnitude, seed=noise_seed)
        for spec in specs:
            if not reselect or spec.kind == "mlp":
                results[(spec.kind, scenario.value)] = run_loocv(
                    dataset, spec, noise, seed=seed
                )
                continue
            cm = ConfusionMatrix(np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64))
            selected: dict[str, object] = {}
            n_queries = 0
            predict_time = 0.0
            for fold, subject in enumerate(dataset.subject_ids):
                train, _ = loocv_split(dataset, subject)
                if spec.kind == "knn":
                    k = select_k_elbow(train, k_candidates, noise)
                    fold_spec = replace(spec, k=k)
                    selected[subject] = k
                else:
                    C, gamma = svm_grid_search(train, grid, noise)
                    fold_spec = replace(spec, C=C, gamma=gamma)
                    selected[subject] = [C, gamma]
                model, scaler, Xte, yte = train_fold(
                    dataset, subject, fold_spec, noise, seed=seed + fold
                )
                t0 = time.perf_counter()
                pred = model.predict(scaler.transform(Xte))
                predict_time += time.perf_counter() - t0
                n_queries += len(yte)
                cm = cm + confusion(yte, pred)
            per_prediction = predict_time / max(n_queries, 1)
            results[(spec.kind, scenario.value)] = EvaluationReport(
                model=spec.describe(),
                noise=_noise_dict(noise),
                retained_nodes=tuple(range(dataset.node_count)),
                matrix=cm,
                per_class=tuple(class_metrics(cm, c) for c in range(N_CLASSES)),
                overall_accuracy=overall_accuracy(cm),
                mean_balanced_accuracy=mean_balanced_accuracy(cm),
                latency=LatencyStats(per_prediction, per_prediction, per_prediction, n_queries),
                seed=seed,
                selected_per_fold=selected,
            )
    return results


class AblationPolicy(Enum):
    FIXED_ORDER = "fixed"
    ALL_SUBSETS = "all-subsets"


# Fixed drop order: right ankle first, then left ankle, then right wrist,
# leaving the belly + left wrist pair at the two-node stage.
FIXED_DROP_ORDER = (NodeId.RIGHT_ANKLE, NodeId.LEFT_ANKLE, NodeId.RIGHT_WRIST)


def fixed_order_nodes(node_count: int) -> tuple[NodeId, ...]:
    """The retained node set for ``node_count`` under the fixed drop order."""
    if not 2 <= node_count <= len(ALL_NODES):
        raise InvalidArgument(f"node_count must be in 2..{len(ALL_NODES)}")
    dropped = set(FIXED_DROP_ORDER[: len(ALL_NODES) - node_count])
    return tuple(n for n in ALL_NODES if n not in dropped)


def node_ablation(
    dataset: Dataset,
    specs: Sequence[ModelSpec],
    policy: AblationPolicy = AblationPolicy.FIXED_ORDER,
    noise: NoiseSpec = NoiseSpec(),
    seed: int = 0,
) -> dict[tuple[int, str], float]:
    """Mean balanced accuracy per (node_count, model kind) for 5..2 nodes."""
    if dataset.node_count != len(ALL_NODES):
        raise InvalidArgument("node ablation expects a full five-node dataset")
    table: dict[tuple[int, str], float] = {}
    for node_count in (5, 4, 3, 2):
        if policy is AblationPolicy.FIXED_ORDER:
            subsets = [fixed_order_nodes(node_count)]
        else:
            subsets = [tuple(s) for s in combinations(ALL_NODES, node_count)]
        for spec in specs:
            scores = [
                run_loocv(dataset, spec, noise, retained_nodes=subset, seed=seed).mean_balanced_accuracy
                for subset in subsets
            ]
            table[(node_count, spec.kind)] = float(np.mean(scores))
    return table


def latency_profile(model, queries: np.ndarray) -> LatencyStats:
    """Single-query prediction latency; the first 10 calls are warmup and discarded."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if len(queries) == 0:
        raise EmptyInput("latency profile needs at least one query")
    for q in queries[:10]:
        model.predict_one(q)
    times = np.empty(len(queries))
    for i, q in enumerate(queries):
        t0 = time.perf_counter()
        model.predict_one(q)
        times[i] = time.perf_counter() - t0
    return LatencyStats(
        mean_s=float(times.mean()),
        p95_s=float(np.percentile(times, 95)),
        max_s=float(times.max()),
        n=len(times),
    )
