"""Command-line entry point: data generation, training, evaluation, sweeps, replay.

Every output embeds the fully resolved configuration (including defaulted
values), the seed, and the tool version. Wall-clock quantities (creation time,
latency measurements) live under a ``meta`` key so that primary outputs are
byte-identical across reruns with the same arguments and inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import MlpConfig, Scaler, load_model, save_model
from .commander import (
    RobotKind,
    SmootherConfig,
    SpeedConfig,
    read_stream,
    replay,
    write_session_log,
)
from .dataset import (
    Dataset,
    PostureClass,
    SkeletonParams,
    generate_synthetic,
    load_csv,
    save_csv,
    to_arrays,
)
from .errors import UwbPoseError
from .evaluation import (
    AblationPolicy,
    ConfusionMatrix,
    ModelSpec,
    class_metrics,
    mean_balanced_accuracy,
    node_ablation,
    noise_sweep,
    overall_accuracy,
    run_loocv,
)
from .ranging import NodeId, NoiseScenario, NoiseSpec, RangingErrorModel

SEED_ENV_VAR = "UWBPOSE_SEED"

_SCENARIOS = {s.value: s for s in NoiseScenario}


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _meta() -> dict:
    return {"created_at": datetime.now(timezone.utc).isoformat()}


def _json_dump(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _model_spec(args: argparse.Namespace) -> ModelSpec:
    mlp = MlpConfig(
        hidden=tuple(int(h) for h in args.hidden.split(",")),
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    return ModelSpec(kind=args.model, k=args.k, C=args.C, gamma=args.gamma, mlp=mlp)


def _noise_spec(args: argparse.Namespace) -> NoiseSpec:
    return NoiseSpec(
        scenario=_SCENARIOS[args.noise_scenario],
        max_magnitude=args.noise_magnitude,
        seed=args.seed,
    )


def _nodes(arg: str) -> tuple[NodeId, ...]:
    return tuple(NodeId(int(v)) for v in arg.split(","))


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=("knn", "svm", "mlp"), required=True)
    p.add_argument("--k", type=int, default=2, help="KNN neighbor count")
    p.add_argument("--C", type=float, default=1.0, help="SVM box constraint")
    p.add_argument("--gamma", type=float, default=0.1, help="SVM RBF width")
    p.add_argument("--hidden", default="64,64", help="MLP hidden layer sizes")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise-scenario", choices=sorted(_SCENARIOS), default="none")
    p.add_argument("--noise-magnitude", type=float, default=0.30)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwbpose",
        description="Posture classification from UWB inter-node ranges",
    )
    parser.add_argument("--version", action="version", version=f"uwbpose {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic posture dataset CSV")
    p.add_argument("--subjects", type=int, default=5)
    p.add_argument("--per-posture", type=int, default=400)
    p.add_argument("--sigma", type=float, default=0.05, help="ranging error std (m)")
    p.add_argument("--height", type=float, default=1.75)
    p.add_argument("--arm-span", type=float, default=1.75)
    p.add_argument("--stance", type=float, default=0.30)
    p.add_argument("--scale-jitter", type=float, default=0.08)
    p.add_argument("--pose-jitter", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("train", help="fit a classifier on a dataset and serialize it")
    p.add_argument("--data", required=True)
    _add_model_args(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("evaluate", help="leave-one-subject-out evaluation report")
    p.add_argument("--data", required=True)
    _add_model_args(p)
    _add_noise_args(p)
    p.add_argument("--nodes", default="0,1,2,3,4", help="retained node ids, comma separated")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--matrix-csv", help="also dump the confusion matrix as CSV")

    p = sub.add_parser("sweep-noise", help="evaluate all four noise scenarios")
    p.add_argument("--data", required=True)
    p.add_argument("--models", default="knn,svm,mlp")
    p.add_argument("--noise-magnitude", type=float, default=0.30)
    p.add_argument("--no-reselect", action="store_true", help="keep fixed hyperparameters")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("ablate-nodes", help="node-count ablation table")
    p.add_argument("--data", required=True)
    p.add_argument("--models", default="knn,svm,mlp")
    p.add_argument("--policy", choices=("fixed", "all-subsets"), default="fixed")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("replay", help="replay a range stream into robot trajectories")
    p.add_argument("--stream", required=True, help="NDJSON stream path, or - for stdin")
    p.add_argument("--model", required=True, help="serialized model from `train`")
    p.add_argument("--robots", default="aerial,ground")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--v-lin", type=float, default=0.2)
    p.add_argument("--v-yaw", type=float, default=0.5)
    p.add_argument("--v-z", type=float, default=0.2)
    p.add_argument("--no-latency", action="store_true", help="write 0.0 latencies (byte-stable logs)")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("metrics", help="recompute metrics from a confusion-matrix CSV")
    p.add_argument("--matrix", required=True)
    p.add_argument("--class", dest="class_index", type=int, default=None)
    p.add_argument("-o", "--output", help="write JSON instead of printing")

    return parser


def _resolved_config(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "command"}
    return {k.replace("_", "-"): v for k, v in sorted(config.items())}


def _cmd_gen_data(args) -> int:
    params = SkeletonParams(
        body_height=args.height,
        arm_span=args.arm_span,
        stance_width=args.stance,
        per_subject_scale_jitter=args.scale_jitter,
        per_frame_pose_jitter=args.pose_jitter,
        seed=args.seed,
    )
    error = RangingErrorModel(sigma=args.sigma, seed=args.seed)
    dataset = generate_synthetic(args.subjects, args.per_posture, params, error)
    header = json.dumps(
        {"config": _resolved_config(args), "seed": args.seed, "version": __version__},
        sort_keys=True,
    )
    with open(args.output, "w", encoding="utf-8", newline="") as f:
        f.write(f"# {header}\n")
        from .dataset import _write_csv

        _write_csv(dataset, f)
    print(f"wrote {len(dataset)} samples to {args.output}")
    return 0


def _cmd_train(args) -> int:
    dataset = load_csv(args.data)
    X, y = to_arrays(dataset)
    scaler = Scaler.fit(X)
    model = _model_spec(args).build(seed=args.seed)
    model.fit(scaler.transform(X), y)
    save_model(model, args.output, scaler=scaler)
    print(f"trained {args.model} on {len(y)} samples -> {args.output}")
    return 0


def _report_payload(args, report) -> dict:
    payload = report.to_dict()
    payload["config"] = _resolved_config(args)
    payload["version"] = __version__
    payload["meta"].update(_meta())
    return payload


def _cmd_evaluate(args) -> int:
    dataset = load_csv(args.data)
    report = run_loocv(
        dataset,
        _model_spec(args),
        _noise_spec(args),
        retained_nodes=_nodes(args.nodes),
        seed=args.seed,
    )
    _json_dump(_report_payload(args, report), args.output)
    if args.matrix_csv:
        np.savetxt(args.matrix_csv, report.matrix.counts, fmt="%d", delimiter=",")
    print(
        f"{args.model}: accuracy {report.overall_accuracy:.4f}, "
        f"mean balanced accuracy {report.mean_balanced_accuracy:.4f}"
    )
    return 0


def _specs(arg: str, args) -> list[ModelSpec]:
    kinds = [k.strip() for k in arg.split(",") if k.strip()]
    return [ModelSpec(kind=k, mlp=MlpConfig(seed=args.seed)) for k in kinds]


def _cmd_sweep_noise(args) -> int:
    dataset = load_csv(args.data)
    results = noise_sweep(
        dataset,
        _specs(args.models, args),
        noise_magnitude=args.noise_magnitude,
        noise_seed=args.seed,
        seed=args.seed,
        reselect=not args.no_reselect,
    )
    rows = [
        {"model": kind, "scenario": scenario, **_report_payload(args, report)}
        for (kind, scenario), report in sorted(results.items())
    ]
    if args.format == "csv":
        lines = ["model,scenario,overall_accuracy,mean_balanced_accuracy"]
        for r in rows:
            lines.append(
                f"{r['model']},{r['scenario']},{r['overall_accuracy']:.6f},{r['mean_balanced_accuracy']:.6f}"
            )
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        _json_dump(
            {
                "config": _resolved_config(args),
                "seed": args.seed,
                "version": __version__,
                "results": rows,
                "meta": _meta(),
            },
            args.output,
        )
    for r in rows:
        print(f"{r['model']:>4} {r['scenario']:>5}: accuracy {r['overall_accuracy']:.4f}")
    return 0


def _cmd_ablate_nodes(args) -> int:
    dataset = load_csv(args.data)
    policy = AblationPolicy.FIXED_ORDER if args.policy == "fixed" else AblationPolicy.ALL_SUBSETS
    table = node_ablation(dataset, _specs(args.models, args), policy=policy, seed=args.seed)
    rows = [
        {"node_count": n, "model": kind, "mean_balanced_accuracy": score}
        for (n, kind), score in sorted(table.items(), reverse=True)
    ]
    if args.format == "csv":
        lines = ["node_count,model,mean_balanced_accuracy"]
        lines += [f"{r['node_count']},{r['model']},{r['mean_balanced_accuracy']:.6f}" for r in rows]
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        _json_dump(
            {
                "config": _resolved_config(args),
                "seed": args.seed,
                "version": __version__,
                "results": rows,
                "meta": _meta(),
            },
            args.output,
        )
    for r in rows:
        print(f"{r['node_count']} nodes {r['model']:>4}: {r['mean_balanced_accuracy']:.4f}")
    return 0


def _cmd_replay(args) -> int:
    model, scaler = load_model(args.model)
    robots = tuple(RobotKind(r.strip()) for r in args.robots.split(",") if r.strip())
    source = sys.stdin if args.stream == "-" else args.stream
    logs = replay(
        read_stream(source),
        model,
        scaler=scaler,
        robots=robots,
        smoother=SmootherConfig(window=args.window),
        speeds=SpeedConfig(v_lin=args.v_lin, v_yaw=args.v_yaw, v_z=args.v_z),
        measure_latency=not args.no_latency,
    )
    write_session_log(logs, args.output)
    print(f"replayed {len(logs)} frames -> {args.output}")
    return 0


def _cmd_metrics(args) -> int:
    counts = np.loadtxt(args.matrix, delimiter=",", comments="#", dtype=np.int64)
    cm = ConfusionMatrix(counts)
    classes = [args.class_index] if args.class_index is not None else list(range(len(PostureClass)))
    per_class = {c: class_metrics(cm, c) for c in classes}
    payload = {
        "config": _resolved_config(args),
        "version": __version__,
        "overall_accuracy": overall_accuracy(cm),
        "mean_balanced_accuracy": mean_balanced_accuracy(cm),
        "per_class": {
            str(c): {
                "recall": m.recall,
                "precision": m.precision,
                "specificity": m.specificity,
                "balanced_accuracy": m.balanced_accuracy,
                "f1": m.f1,
            }
            for c, m in per_class.items()
        },
    }
    if args.output:
        _json_dump(payload, args.output)
    for c, m in per_class.items():
        print(f"class {c}: balanced_accuracy {m.balanced_accuracy:.4f}, f1 {m.f1:.4f}")
    print(f"overall accuracy {payload['overall_accuracy']:.4f}")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "sweep-noise": _cmd_sweep_noise,
    "ablate-nodes": _cmd_ablate_nodes,
    "replay": _cmd_replay,
    "metrics": _cmd_metrics,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _default_seed()
    try:
        return _COMMANDS[args.command](args)
    except UwbPoseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
