"""Model persistence: versioned .npz dumps that round-trip predictions exactly."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..errors import InvalidArgument
from .knn import KnnClassifier
from .mlp import MlpClassifier, MlpConfig
from .scaling import Scaler
from .svm import SvmClassifier, BinarySvm, _Machine

FORMAT_VERSION = 1


def save_model(model, path: Union[str, Path], scaler: Optional[Scaler] = None) -> None:
    """Serialize a fitted classifier (plus optional feature scaler) to ``path``."""
    arrays: dict[str, np.ndarray] = {"format_version": np.array(FORMAT_VERSION)}
    if scaler is not None:
        arrays["scaler_mean"] = scaler.mean
        arrays["scaler_std"] = scaler.std

    if isinstance(model, KnnClassifier):
        arrays["kind"] = np.array("knn")
        arrays["k"] = np.array(model.k)
        arrays["X"] = model._X
        arrays["y"] = model._y
    elif isinstance(model, SvmClassifier):
        arrays["kind"] = np.array("svm")
        arrays["C"] = np.array(model.C)
        arrays["gamma"] = np.array(model.gamma)
        arrays["dim"] = np.array(model._dim)
        arrays["sv_matrix"] = model._sv_matrix
        for i, m in enumerate(model.machines):
            arrays[f"m{i}_pair"] = np.array([m.class_pos, m.class_neg])
            if m.svm is None:
                arrays[f"m{i}_constant"] = np.array(m.constant)
            else:
                arrays[f"m{i}_coef"] = m.svm.coef
                arrays[f"m{i}_bias"] = np.array(m.svm.bias)
                arrays[f"m{i}_union_idx"] = m.union_idx
        arrays["n_machines"] = np.array(len(model.machines))
    elif isinstance(model, MlpClassifier):
        arrays["kind"] = np.array("mlp")
        cfg = model.config
        arrays["hidden"] = np.array(cfg.hidden, dtype=np.int64)
        arrays["train_config"] = np.array(
            [cfg.learning_rate, cfg.epochs, cfg.batch_size, cfg.momentum, cfg.seed]
        )
        arrays["n_layers"] = np.array(len(model.weights))
        for i, (W, b) in enumerate(zip(model.weights, model.biases)):
            arrays[f"W{i}"] = W
            arrays[f"b{i}"] = b
    else:
        raise InvalidArgument(f"cannot serialize model of type {type(model).__name__}")

    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_model(path: Union[str, Path]):
    """Inverse of :func:`save_model`; returns ``(model, scaler_or_None)``."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != FORMAT_VERSION:
            raise InvalidArgument(f"unsupported model format version {version}")
        scaler = None
        if "scaler_mean" in data:
            scaler = Scaler(mean=data["scaler_mean"], std=data["scaler_std"])
        kind = str(data["kind"])

        if kind == "knn":
            model = KnnClassifier(k=int(data["k"]))
            model.fit(data["X"], data["y"])
            return model, scaler
        if kind == "svm":
            model = SvmClassifier(C=float(data["C"]), gamma=float(data["gamma"]))
            model._dim = int(data["dim"])
            model._sv_matrix = data["sv_matrix"]
            machines = []
            for i in range(int(data["n_machines"])):
                pos, neg = (int(v) for v in data[f"m{i}_pair"])
                if f"m{i}_constant" in data:
                    machines.append(_Machine(class_pos=pos, class_neg=neg, constant=int(data[f"m{i}_constant"])))
                else:
                    svm = BinarySvm(
                        support_idx=data[f"m{i}_union_idx"],
                        coef=data[f"m{i}_coef"],
                        bias=float(data[f"m{i}_bias"]),
                        dual_objective=float("nan"),
                        alphas=np.array([]),
                        n_iter=0,
                    )
                    machines.append(
                        _Machine(
                            class_pos=pos,
                            class_neg=neg,
                            svm=svm,
                            union_idx=data[f"m{i}_union_idx"],
                        )
                    )
            model._machines = machines
            return model, scaler
        if kind == "mlp":
            tc = data["train_config"]
            cfg = MlpConfig(
                hidden=tuple(int(h) for h in data["hidden"]),
                learning_rate=float(tc[0]),
                epochs=int(tc[1]),
                batch_size=int(tc[2]),
                momentum=float(tc[3]),
                seed=int(tc[4]),
            )
            model = MlpClassifier(cfg)
            n_layers = int(data["n_layers"])
            model.weights = [data[f"W{i}"] for i in range(n_layers)]
            model.biases = [data[f"b{i}"] for i in range(n_layers)]
            model._dim = model.weights[0].shape[0]
            return model, scaler
        raise InvalidArgument(f"unknown model kind {kind!r}")
