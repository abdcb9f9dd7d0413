"""End-to-end experiment driver.

Runs the full protocol: base training, probability calibration, easy/difficult
splitting, guided + classic retraining, evaluation, and artifact emission.
prepare() covers the shared front half (load through splitting and curves) so
partial CLI commands and the full run use identical logic. Every stage failure
is re-raised as a StageError naming the stage.
"""
from __future__ import annotations

import io
import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..classifiers.adapters import ForestAdapter, KnnAdapter, LogisticAdapter, SvmAdapter
from ..classifiers.forest import ForestConfig, train_random_forest
from ..classifiers.knn import NearestNeighborModel
from ..classifiers.linear import LinearConfig, SvmConfig, train_linear_svm, train_logistic
from ..data import (
    ConfusionPartition,
    FeatureMatrix,
    PredictionReport,
    SplitAssignment,
    ThresholdPair,
    confusion_partition,
    prediction_report,
)
from ..metrics import EvaluationReport, delta_errors, errors_reduction, evaluate
from ..pipeline import (
    ClassicPipeline,
    GuidedPipeline,
    classic_fit,
    guided_fit,
    pipeline_predict,
    save,
)
from ..thresholding import (
    CurvePoint,
    ToleratedCounts,
    accumulated_error_curve,
    curve_to_csv,
    select_thresholds,
    split_dataset,
    tolerated_counts,
)
from .config import ExperimentConfig, config_to_dict
from .features import feature_select_topk
from .io import load_dense_csv, load_sparse
from .splits import split_80_10_10
from .synth import generate_synthetic

CURVE_GRID = np.linspace(0.0, 1.0, 101)


class StageError(RuntimeError):
    """An experiment stage failed; carries the stage name for diagnostics."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"stage {stage}: {original}")
        self.stage = stage
        self.original = original


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class MetricsRow:
    """One Table-style report line."""

    predictor: str
    scope: str
    n: int
    accuracy: float
    f1: float
    errors: int
    delta_errors: int | None = None
    errors_reduction_pct: float | None = None


def _row(
    predictor: str, report: EvaluationReport, delta: int | None = None,
    reduction: float | None = None,
) -> MetricsRow:
    return MetricsRow(
        predictor=predictor,
        scope=report.scope,
        n=report.n,
        accuracy=report.accuracy,
        f1=report.f1,
        errors=report.total_errors,
        delta_errors=delta,
        errors_reduction_pct=reduction,
    )


def metrics_to_csv(rows: list[MetricsRow]) -> str:
    buf = io.StringIO()
    buf.write("predictor,scope,n,accuracy,f1,errors,delta_errors,errors_reduction_pct\n")
    for r in rows:
        delta = "" if r.delta_errors is None else r.delta_errors
        red = "" if r.errors_reduction_pct is None else f"{r.errors_reduction_pct:.2f}"
        buf.write(
            f"{r.predictor},{r.scope},{r.n},{r.accuracy:.6f},{r.f1:.6f},{r.errors},{delta},{red}\n"
        )
    return buf.getvalue()


def load_data(cfg: ExperimentConfig) -> FeatureMatrix:
    if cfg.synthetic is not None:
        return generate_synthetic(cfg.synthetic)
    if cfg.data_format == "dense":
        return load_dense_csv(cfg.data_path)
    return load_sparse(cfg.data_path)


def fit_base(kind: str, params: dict, train: FeatureMatrix, val: FeatureMatrix,
             test: FeatureMatrix, seed: int):
    """Train the configured base classifier and wrap it in its adapter."""
    params = dict(params)
    params.setdefault("seed", seed)
    if kind == "logistic":
        return LogisticAdapter(train_logistic(train, LinearConfig(**params)))
    if kind == "svm":
        model = train_linear_svm(train, SvmConfig(**params))
        return SvmAdapter.fit(model, train, val, test)
    if kind == "forest":
        return ForestAdapter(train_random_forest(train, ForestConfig(**params)))
    if kind == "knn":
        return KnnAdapter.fit(NearestNeighborModel.fit(train), train, ForestConfig(**params))
    raise ValueError(f"unknown base classifier kind {kind!r}")


@dataclass
class Prepared:
    """State after the front half of the protocol (everything before retraining)."""

    data: FeatureMatrix
    kept: np.ndarray | None
    train: FeatureMatrix
    val: FeatureMatrix
    test: FeatureMatrix
    adapter: object
    reports: dict[str, PredictionReport]
    routing: dict[str, np.ndarray]
    val_confusion: ConfusionPartition
    test_confusion: ConfusionPartition
    tolerated: ToleratedCounts | None
    thresholds: ThresholdPair
    assignments: dict[str, SplitAssignment]
    difficult_train: FeatureMatrix
    difficult_val: FeatureMatrix
    difficult_test: FeatureMatrix
    curves: dict[str, list[CurvePoint]]


def _report_for(adapter, data: FeatureMatrix) -> PredictionReport:
    return prediction_report(adapter.predict_probabilities(data.values), data.labels, data.ids)


def prepare(cfg: ExperimentConfig) -> Prepared:
    """Load, split, select features, train the base, calibrate, and partition."""
    with _stage("load"):
        data = load_data(cfg)
    with _stage("split"):
        train, val, test = split_80_10_10(data, cfg.fractions, cfg.seed)

    kept = None
    if cfg.feature_top_k:
        with _stage("features"):
            kept, (train, val, test) = feature_select_topk(
                train, cfg.feature_top_k, val, test
            )

    with _stage("train-base"):
        adapter = fit_base(cfg.base, cfg.base_params, train, val, test, cfg.seed)
        reports = {
            "train": _report_for(adapter, train),
            "validation": _report_for(adapter, val),
            "test": _report_for(adapter, test),
        }
        routing = {
            "train": adapter.routing_probabilities(train.values),
            "validation": adapter.routing_probabilities(val.values),
            "test": adapter.routing_probabilities(test.values),
        }

    with _stage("calibrate"):
        val_confusion = confusion_partition(reports["validation"], val.labels)
        if adapter.fixed_thresholds is not None:
            thresholds = adapter.fixed_thresholds
            tolerated = None
        else:
            tolerated = tolerated_counts(
                cfg.tolerance.X,
                cfg.tolerance.Y,
                len(val_confusion.fp_ids),
                len(val_confusion.fn_ids),
            )
            thresholds = select_thresholds(
                routing["validation"],
                val.ids,
                val_confusion.fp_ids,
                val_confusion.fn_ids,
                tolerated,
            )

    with _stage("split-sets"):
        assignments = {
            name: split_dataset(routing[name], thresholds, part.ids)
            for name, part in (("train", train), ("validation", val), ("test", test))
        }
        difficult_train = train.subset_by_ids(assignments["train"].difficult_ids)
        difficult_val = val.subset_by_ids(assignments["validation"].difficult_ids)
        difficult_test = test.subset_by_ids(assignments["test"].difficult_ids)

    with _stage("curve"):
        test_confusion = confusion_partition(reports["test"], test.labels)
        curves = {
            "validation": accumulated_error_curve(
                routing["validation"], val.ids, val_confusion, CURVE_GRID
            ),
            "test": accumulated_error_curve(
                routing["test"], test.ids, test_confusion, CURVE_GRID
            ),
        }

    return Prepared(
        data=data, kept=kept, train=train, val=val, test=test, adapter=adapter,
        reports=reports, routing=routing, val_confusion=val_confusion,
        test_confusion=test_confusion, tolerated=tolerated, thresholds=thresholds,
        assignments=assignments, difficult_train=difficult_train,
        difficult_val=difficult_val, difficult_test=difficult_test, curves=curves,
    )


@dataclass
class ExperimentResult:
    """Everything a run produced, kept in memory; files mirror it when out_dir is set."""

    config: ExperimentConfig
    thresholds: ThresholdPair
    rows: list[MetricsRow]
    curves: dict[str, list[CurvePoint]]
    assignments: dict[str, SplitAssignment]
    reports: dict[str, PredictionReport]
    guided: GuidedPipeline | None
    classic: ClassicPipeline | None
    skipped: str | None
    summary: dict = field(default_factory=dict)


def _subset_eval(report: PredictionReport, data: FeatureMatrix, ids, scope: str):
    wanted = np.array(sorted(ids), dtype=np.int64)
    pos = data.positions_of(wanted)
    return evaluate(report.predictions[pos], data.labels[pos], scope=scope)


def _order_to(have: np.ndarray, want: np.ndarray) -> np.ndarray:
    """Positions that reorder rows keyed by `have` ids into `want` id order."""
    lookup = {int(i): k for k, i in enumerate(have)}
    return np.array([lookup[int(i)] for i in want], dtype=np.int64)


def _metadata(cfg: ExperimentConfig) -> dict:
    return {
        "seed": cfg.seed,
        "config": config_to_dict(cfg),
        "package_version": __version__,
    }


def run_experiment(
    cfg: ExperimentConfig, variants: tuple[str, ...] = ("guided", "classic")
) -> ExperimentResult:
    """Execute the full protocol; see the module docstring.

    variants picks which retraining stages to fit; the default runs both so
    their reports can be compared.
    """
    unknown = set(variants) - {"guided", "classic"}
    if unknown:
        raise ValueError(f"run_experiment: unknown variants {sorted(unknown)}")
    prep = prepare(cfg)
    test, val = prep.test, prep.val
    assignments, reports = prep.assignments, prep.reports
    difficult_train, difficult_val, difficult_test = (
        prep.difficult_train, prep.difficult_val, prep.difficult_test,
    )

    with _stage("evaluate"):
        rows: list[MetricsRow] = []
        base_whole = evaluate(reports["test"].predictions, test.labels, scope="whole")
        rows.append(_row("base", base_whole))
        base_easy = base_difficult = None
        if assignments["test"].easy_ids:
            base_easy = _subset_eval(reports["test"], test, assignments["test"].easy_ids, "easy")
            rows.append(_row("base", base_easy))
        if assignments["test"].difficult_ids:
            base_difficult = _subset_eval(
                reports["test"], test, assignments["test"].difficult_ids, "difficult"
            )
            rows.append(_row("base", base_difficult))

    skipped = None
    guided_pipeline = classic_pipeline = None
    if difficult_train.n_samples == 0:
        skipped = "difficult training set is empty"
    elif len(np.unique(difficult_train.labels)) < 2:
        skipped = "difficult training set contains a single class"
    else:
        if "guided" in variants:
            with _stage("guided-retrain"):
                train_report = _report_for(prep.adapter, difficult_train)
                val_report = (
                    _report_for(prep.adapter, difficult_val) if difficult_val.n_samples else None
                )
                stage_g = guided_fit(
                    difficult_train, train_report, difficult_val, cfg.retrain,
                    val_report=val_report, seed=cfg.seed,
                )
                guided_pipeline = GuidedPipeline(
                    base=prep.adapter,
                    thresholds=prep.thresholds,
                    models_1_to_4=stage_g.models_1_to_4,
                    model_5=stage_g.model_5,
                    auxiliary=stage_g.auxiliary,
                    n_raw_features=prep.data.n_features,
                    feature_selection=prep.kept,
                    metadata=_metadata(cfg),
                )
        if "classic" in variants:
            with _stage("classic-retrain"):
                stage_c = classic_fit(difficult_train, difficult_val, cfg.retrain, seed=cfg.seed)
                classic_pipeline = ClassicPipeline(
                    base=prep.adapter,
                    thresholds=prep.thresholds,
                    model=stage_c.model,
                    auxiliary=stage_c.auxiliary,
                    n_raw_features=prep.data.n_features,
                    feature_selection=prep.kept,
                    metadata=_metadata(cfg),
                )

    summary: dict = {
        "n_samples": prep.data.n_samples,
        "n_features": prep.data.n_features,
        "kept_features": None if prep.kept is None else [int(i) for i in prep.kept],
        "split_sizes": {
            "train": prep.train.n_samples, "validation": val.n_samples, "test": test.n_samples,
        },
        "difficult_sizes": {
            "train": difficult_train.n_samples,
            "validation": difficult_val.n_samples,
            "test": difficult_test.n_samples,
        },
        "thresholds": {"th_n": prep.thresholds.th_n, "th_p": prep.thresholds.th_p},
        "tolerated": None if prep.tolerated is None else {
            "fps": prep.tolerated.tolerated_fps, "fns": prep.tolerated.tolerated_fns,
        },
        "base_test_errors": base_whole.total_errors,
        "base_difficult_test_errors": (
            None if base_difficult is None else base_difficult.total_errors
        ),
        "error_capture_pct": None,
        "skipped": skipped,
    }
    if base_whole.total_errors and base_difficult is not None:
        summary["error_capture_pct"] = round(
            base_difficult.total_errors / base_whole.total_errors * 100.0, 2
        )

    if skipped is None and difficult_test.n_samples:
        with _stage("evaluate"):
            easy_pos = test.positions_of(
                np.array(sorted(assignments["test"].easy_ids), dtype=np.int64)
            )
            diff_pos = test.positions_of(
                np.array(sorted(assignments["test"].difficult_ids), dtype=np.int64)
            )
            for name, pipe in (("classic", classic_pipeline), ("guided", guided_pipeline)):
                if pipe is None:
                    continue
                aux_preds = pipe.auxiliary.predict(
                    pipe.difficult_embeddings(difficult_test.values)
                )
                diff_report = evaluate(aux_preds, difficult_test.labels, scope="difficult")
                delta = delta_errors(base_difficult, diff_report)
                reduction = errors_reduction(delta, base_difficult.total_errors)
                rows.append(_row(name, diff_report, delta, reduction))

                # difficult_test rows keep test order; realign defensively by id
                merged_preds = np.concatenate(
                    [reports["test"].predictions[easy_pos],
                     aux_preds[_order_to(difficult_test.ids, test.ids[diff_pos])]]
                )
                merged_labels = np.concatenate(
                    [test.labels[easy_pos], test.labels[diff_pos]]
                )
                comb_report = evaluate(merged_preds, merged_labels, scope="combined")
                comb_delta = delta_errors(base_whole, comb_report)
                comb_red = errors_reduction(comb_delta, base_whole.total_errors)
                rows.append(_row(name, comb_report, comb_delta, comb_red))
                summary[f"{name}_difficult_delta_errors"] = delta
                summary[f"{name}_difficult_errors_reduction_pct"] = reduction
                summary[f"{name}_combined_errors"] = comb_report.total_errors

    result = ExperimentResult(
        config=cfg,
        thresholds=prep.thresholds,
        rows=rows,
        curves=prep.curves,
        assignments=assignments,
        reports=reports,
        guided=guided_pipeline,
        classic=classic_pipeline,
        skipped=skipped,
        summary=summary,
    )
    if cfg.out_dir:
        with _stage("persist"):
            _write_bundle(result)
    return result


def _write_bundle(result: ExperimentResult) -> None:
    out = Path(result.config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(metrics_to_csv(result.rows))
    for name, points in result.curves.items():
        (out / f"curve_{name}.csv").write_text(curve_to_csv(points))
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2) + "\n")
    (out / "config.json").write_text(
        json.dumps(config_to_dict(result.config), indent=2) + "\n"
    )
    if result.guided is not None:
        save(result.guided, out / "pipeline_guided.zip")
    if result.classic is not None:
        save(result.classic, out / "pipeline_classic.zip")


def predict_with_pipeline(pipeline, data: FeatureMatrix):
    """Convenience wrapper kept next to the driver for CLI use."""
    return pipeline_predict(pipeline, data)
