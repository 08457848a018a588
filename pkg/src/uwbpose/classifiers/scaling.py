"""Per-feature z-score standardization fitted on training data only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, EmptyTrainingSet


@dataclass(frozen=True)
class Scaler:
    """Stores train-set mean and standard deviation per feature.

    Constant features are guarded with std = 1 so they map to zero instead of
    dividing by zero.
    """

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Scaler":
        features = np.asarray(features, dtype=float)
        if features.ndim != 2 or features.shape[0] == 0:
            raise EmptyTrainingSet("scaler needs at least one training sample")
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        return cls(mean=mean, std=std)

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} features, got {features.shape[-1]}"
            )
        return (features - self.mean) / self.std


def fit_scaler(features: np.ndarray) -> Scaler:
    return Scaler.fit(features)


def apply_scaler(scaler: Scaler, features: np.ndarray) -> np.ndarray:
    return scaler.transform(features)
