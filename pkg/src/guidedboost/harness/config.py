"""Experiment configuration: dataclasses plus the JSON file format the CLI reads."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..nn.network import (
    DESK_ENCODER_WIDTHS,
    DESK_PROJECTION_WIDTHS,
    encoder_spec,
    projection_spec,
)
from ..nn.training import TrainConfig
from ..pipeline import RetrainConfig
from ..thresholding import ToleranceConfig

BASE_KINDS = ("logistic", "svm", "forest", "knn")
DATA_FORMATS = ("dense", "sparse")


@dataclass(frozen=True)
class SyntheticSpec:
    """Two-Gaussian binary dataset, optionally with a planted overlap band.

    With ``planted`` set, ``band_fraction`` of each class sits in a band
    around the midpoint of the class means where the primary feature carries
    no signal and the label is the XOR of the signs of two auxiliary
    features: a structure a linear base cannot exploit but an embedding model
    can.
    """

    n_per_class: int = 2000
    n_features: int = 12
    mean_negative: float = -2.0
    mean_positive: float = 2.0
    cov_scale: float = 1.0
    planted: bool = True
    band_fraction: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class < 1:
            raise ValueError("SyntheticSpec: n_per_class must be positive")
        if self.n_features < 2:
            raise ValueError("SyntheticSpec: need at least 2 features")
        if self.planted and self.n_features < 3:
            raise ValueError("SyntheticSpec: planted structure needs at least 3 features")
        if self.cov_scale < 0.0:
            raise ValueError("SyntheticSpec: cov_scale must be non-negative")
        if not (0.0 <= self.band_fraction <= 1.0):
            raise ValueError("SyntheticSpec: band_fraction must lie in [0, 1]")
        if self.mean_negative >= self.mean_positive:
            raise ValueError("SyntheticSpec: mean_negative must be below mean_positive")


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs; exactly one data source must be set."""

    data_path: str | None = None
    data_format: str = "dense"
    synthetic: SyntheticSpec | None = None
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    base: str = "svm"
    base_params: dict = field(default_factory=dict)
    feature_top_k: int = 0
    retrain: RetrainConfig = field(default_factory=RetrainConfig)
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self):
        if (self.data_path is None) == (self.synthetic is None):
            raise ValueError("ExperimentConfig: set exactly one of data_path / synthetic")
        if self.data_format not in DATA_FORMATS:
            raise ValueError(f"ExperimentConfig: data_format must be one of {DATA_FORMATS}")
        if self.base not in BASE_KINDS:
            raise ValueError(f"ExperimentConfig: base must be one of {BASE_KINDS}")
        f = tuple(float(x) for x in self.fractions)
        if len(f) != 3 or min(f) <= 0.0 or abs(sum(f) - 1.0) > 1e-9:
            raise ValueError("ExperimentConfig: fractions must be three positives summing to 1")
        self.fractions = f
        if self.feature_top_k < 0:
            raise ValueError("ExperimentConfig: feature_top_k must be >= 0 (0 disables)")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d: dict = {
        "fractions": list(cfg.fractions),
        "tolerance": {"X": cfg.tolerance.X, "Y": cfg.tolerance.Y},
        "base": {"kind": cfg.base, "params": dict(cfg.base_params)},
        "feature_top_k": cfg.feature_top_k,
        "encoder_widths": list(cfg.retrain.encoder.layer_widths),
        "projection_widths": list(cfg.retrain.projection.layer_widths),
        "train": asdict(cfg.retrain.train),
        "seed": cfg.seed,
        "out_dir": cfg.out_dir,
    }
    if cfg.synthetic is not None:
        d["data"] = {"synthetic": asdict(cfg.synthetic)}
    else:
        d["data"] = {"path": cfg.data_path, "format": cfg.data_format}
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    data = d.get("data", {})
    synthetic = None
    data_path = None
    data_format = "dense"
    if "synthetic" in data:
        synthetic = SyntheticSpec(**data["synthetic"])
    else:
        data_path = data.get("path")
        data_format = data.get("format", "dense")
    retrain = RetrainConfig(
        encoder=encoder_spec(tuple(d.get("encoder_widths", DESK_ENCODER_WIDTHS))),
        projection=projection_spec(tuple(d.get("projection_widths", DESK_PROJECTION_WIDTHS))),
        train=TrainConfig(**d.get("train", {})),
    )
    tol = d.get("tolerance", {})
    base = d.get("base", {})
    return ExperimentConfig(
        data_path=data_path,
        data_format=data_format,
        synthetic=synthetic,
        fractions=tuple(d.get("fractions", (0.8, 0.1, 0.1))),
        tolerance=ToleranceConfig(X=tol.get("X", 5.0), Y=tol.get("Y", 5.0)),
        base=base.get("kind", "svm"),
        base_params=dict(base.get("params", {})),
        feature_top_k=int(d.get("feature_top_k", 0)),
        retrain=retrain,
        seed=int(d.get("seed", 0)),
        out_dir=d.get("out_dir"),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            return config_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {path} is not valid JSON: {exc}") from None


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2)
        fh.write("\n")
