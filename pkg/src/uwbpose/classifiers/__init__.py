"""From-scratch posture classifiers and their supporting machinery."""

from .io import load_model, save_model
from .knn import KnnClassifier
from .mlp import MlpClassifier, MlpConfig
from .scaling import Scaler, apply_scaler, fit_scaler
from .selection import (
    DEFAULT_K_CANDIDATES,
    GridSearchSpec,
    select_k_elbow,
    svm_grid_search,
)
from .svm import BinarySvm, SvmClassifier, rbf_kernel, smo_train

__all__ = [
    "BinarySvm",
    "DEFAULT_K_CANDIDATES",
    "GridSearchSpec",
    "KnnClassifier",
    "MlpClassifier",
    "MlpConfig",
    "Scaler",
    "SvmClassifier",
    "apply_scaler",
    "fit_scaler",
    "load_model",
    "rbf_kernel",
    "save_model",
    "select_k_elbow",
    "smo_train",
    "svm_grid_search",
]
