"""Command-line entry point.

Subcommands mirror the protocol stages: train-base, calibrate, split,
guided-retrain, classic-retrain, run, evaluate, predict, synth. All
configuration comes from a JSON file (--config); --seed and --out override
the corresponding config fields. Exit code 0 on success, 1 on failure with a
stage-tagged message on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..metrics import evaluate
from ..persistence import load as load_pipeline
from ..pipeline import ROUTE_AUXILIARY, ROUTE_BASE, pipeline_predict
from ..thresholding import curve_to_csv
from .config import ExperimentConfig, load_config
from .experiment import StageError, metrics_to_csv, prepare, run_experiment
from .io import load_dense_csv, load_sparse, write_dense_csv


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON experiment config")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="override the config output directory")

    parser = argparse.ArgumentParser(
        prog="guidedboost",
        description="Two-stage boosting of binary classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train-base", parents=[common],
                   help="train the base classifier and report per-split metrics")
    sub.add_parser("calibrate", parents=[common],
                   help="derive routing thresholds from the validation split")
    sub.add_parser("split", parents=[common],
                   help="partition each split into easy and difficult subsets")
    sub.add_parser("guided-retrain", parents=[common],
                   help="run the protocol with the guided retraining stage only")
    sub.add_parser("classic-retrain", parents=[common],
                   help="run the protocol with the classic retraining stage only")
    sub.add_parser("run", parents=[common],
                   help="run the full protocol with both retraining variants")
    sub.add_parser("synth", parents=[common],
                   help="generate the configured synthetic dataset as dense CSV")

    for name in ("evaluate", "predict"):
        p = sub.add_parser(
            name, parents=[common],
            help=f"{name} a saved pipeline on a labeled dataset",
        )
        p.add_argument("--pipeline", required=True, help="path to a saved pipeline archive")
        p.add_argument("--data", required=True, help="path to the dataset file")
        p.add_argument("--format", choices=("dense", "sparse"), default="dense")
    return parser


def _load_cfg(args) -> ExperimentConfig:
    if not args.config:
        raise ValueError(f"{args.command} requires --config")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _load_any(path: str, fmt: str):
    return load_dense_csv(path) if fmt == "dense" else load_sparse(path)


def _print_report(label: str, rep) -> None:
    print(
        f"{label}: n={rep.n} accuracy={rep.accuracy:.6f} f1={rep.f1:.6f} "
        f"errors={rep.total_errors} (fp={rep.fp} fn={rep.fn})"
    )


def _cmd_train_base(args) -> int:
    cfg = _load_cfg(args)
    prep = prepare(cfg)
    lines = ["split,n,accuracy,f1,fp,fn"]
    for name, part in (("train", prep.train), ("validation", prep.val), ("test", prep.test)):
        rep = evaluate(prep.reports[name].predictions, part.labels)
        _print_report(name, rep)
        lines.append(
            f"{name},{rep.n},{rep.accuracy:.6f},{rep.f1:.6f},{rep.fp},{rep.fn}"
        )
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "base_metrics.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _load_cfg(args)
    prep = prepare(cfg)
    print(f"th_n={prep.thresholds.th_n:.6g} th_p={prep.thresholds.th_p:.6g}")
    if prep.tolerated is not None:
        print(
            f"tolerated_fps={prep.tolerated.tolerated_fps} "
            f"tolerated_fns={prep.tolerated.tolerated_fns}"
        )
    else:
        print("thresholds fixed by the base classifier")
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        payload = {
            "th_n": prep.thresholds.th_n,
            "th_p": prep.thresholds.th_p,
            "tolerated": None if prep.tolerated is None else {
                "fps": prep.tolerated.tolerated_fps,
                "fns": prep.tolerated.tolerated_fns,
            },
        }
        (out / "thresholds.json").write_text(json.dumps(payload, indent=2) + "\n")
        (out / "curve_validation.csv").write_text(curve_to_csv(prep.curves["validation"]))
    return 0


def _cmd_split(args) -> int:
    cfg = _load_cfg(args)
    prep = prepare(cfg)
    lines = ["split,id,subset"]
    for name in ("train", "validation", "test"):
        a = prep.assignments[name]
        print(f"{name}: easy={len(a.easy_ids)} difficult={len(a.difficult_ids)}")
        for i in sorted(a.easy_ids):
            lines.append(f"{name},{i},easy")
        for i in sorted(a.difficult_ids):
            lines.append(f"{name},{i},difficult")
    if cfg.out_dir:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "assignments.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_run(args, variants: tuple[str, ...]) -> int:
    cfg = _load_cfg(args)
    result = run_experiment(cfg, variants=variants)
    print(f"th_n={result.thresholds.th_n:.6g} th_p={result.thresholds.th_p:.6g}")
    if result.skipped:
        print(f"warning: retraining skipped: {result.skipped}", file=sys.stderr)
    print(metrics_to_csv(result.rows), end="")
    if cfg.out_dir:
        print(f"artifacts written to {cfg.out_dir}")
    return 0


def _cmd_synth(args) -> int:
    cfg = _load_cfg(args)
    if cfg.synthetic is None:
        raise ValueError("synth requires a config with a synthetic data section")
    if not cfg.out_dir:
        raise ValueError("synth requires an output directory (--out or out_dir)")
    from .experiment import load_data

    data = load_data(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "synthetic.csv"
    write_dense_csv(data, path)
    print(f"wrote {data.n_samples} samples x {data.n_features} features to {path}")
    return 0


def _cmd_evaluate(args) -> int:
    pipeline = load_pipeline(args.pipeline)
    data = _load_any(args.data, args.format)
    preds, routes = pipeline_predict(pipeline, data)
    _print_report("whole", evaluate(preds, data.labels))
    for label, route in (("easy", ROUTE_BASE), ("difficult", ROUTE_AUXILIARY)):
        mask = routes == route
        if mask.any():
            _print_report(label, evaluate(preds[mask], data.labels[mask], scope=label))
        else:
            print(f"{label}: n=0")
    return 0


def _cmd_predict(args) -> int:
    pipeline = load_pipeline(args.pipeline)
    data = _load_any(args.data, args.format)
    preds, routes = pipeline_predict(pipeline, data)
    lines = ["id,prediction,route"]
    lines += [
        f"{int(i)},{int(p)},{r}"
        for i, p, r in zip(data.ids, preds, routes)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "predictions.csv").write_text(text)
        print(f"wrote {len(preds)} predictions to {out / 'predictions.csv'}")
    else:
        print(text, end="")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    np.seterr(over="ignore")  # stable sigmoid clips anyway; keep CLI output clean
    handlers = {
        "train-base": _cmd_train_base,
        "calibrate": _cmd_calibrate,
        "split": _cmd_split,
        "guided-retrain": lambda a: _cmd_run(a, ("guided",)),
        "classic-retrain": lambda a: _cmd_run(a, ("classic",)),
        "run": lambda a: _cmd_run(a, ("guided", "classic")),
        "synth": _cmd_synth,
        "evaluate": _cmd_evaluate,
        "predict": _cmd_predict,
    }
    try:
        return handlers[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
