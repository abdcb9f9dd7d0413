"""Pipeline container format: one zip archive, self-describing and versioned.

Layout: ``manifest.json`` describes every component (kinds, widths, seeds,
thresholds, feature indices) and an ``arrays`` table mapping logical names to
raw little-endian blobs under ``arrays/``. Parameters are ``<f8``, integer
tables ``<i8``. Loading validates the format tag, the version, and every
blob's byte length, so truncation and foreign files fail with a diagnostic
instead of garbage predictions.
"""
from __future__ import annotations

import json
import zipfile

import numpy as np

from .classifiers.adapters import (
    ForestAdapter,
    KnnAdapter,
    LogisticAdapter,
    ScoreRange,
    SvmAdapter,
)
from .classifiers.forest import ForestModel, forest_from_arrays, forest_to_arrays
from .classifiers.knn import NearestNeighborModel
from .classifiers.linear import LinearModel
from .data import ThresholdPair
from .nn.network import AuxiliaryClassifier, EncoderProjectionModel, MlpSpec

FORMAT_TAG = "guidedboost-pipeline"
FORMAT_VERSION = 1

_FLOAT = "<f8"
_INT = "<i8"


class _ArrayStore:
    def __init__(self):
        self.entries: dict[str, dict] = {}
        self.blobs: dict[str, bytes] = {}

    def add(self, name: str, arr: np.ndarray, dtype: str = _FLOAT):
        if dtype not in (_FLOAT, _INT):
            raise ValueError(f"unsupported blob dtype {dtype}")
        if name in self.entries:
            raise ValueError(f"duplicate array name {name}")
        arr = np.ascontiguousarray(np.asarray(arr).astype(dtype))
        self.entries[name] = {
            "file": f"arrays/{name}.bin",
            "dtype": dtype,
            "shape": list(arr.shape),
        }
        self.blobs[name] = arr.tobytes()


def _spec_to_json(spec: MlpSpec) -> dict:
    return {
        "layer_widths": list(spec.layer_widths),
        "normalize": list(spec.normalize),
        "activation": list(spec.activation),
    }


def _spec_from_json(d: dict) -> MlpSpec:
    return MlpSpec(
        layer_widths=tuple(d["layer_widths"]),
        normalize=tuple(d["normalize"]),
        activation=tuple(d["activation"]),
    )


def _store_model(store: _ArrayStore, prefix: str, model: EncoderProjectionModel) -> dict:
    arrays = model.state_arrays()
    for i, a in enumerate(arrays):
        store.add(f"{prefix}_a{i}", a)
    return {
        "present": True,
        "input_width": model.input_width,
        "seed": model.encoder.seed[:-1],  # the [0]/[1] suffix is re-added on rebuild
        "encoder": _spec_to_json(model.encoder.spec),
        "projection": _spec_to_json(model.projection.spec),
        "n_arrays": len(arrays),
    }


def _load_model(meta: dict, arrays: dict[str, np.ndarray], prefix: str) -> EncoderProjectionModel:
    model = EncoderProjectionModel(
        int(meta["input_width"]),
        _spec_from_json(meta["encoder"]),
        _spec_from_json(meta["projection"]),
        [int(s) for s in meta["seed"]],
    )
    model.load_state_arrays([arrays[f"{prefix}_a{i}"] for i in range(int(meta["n_arrays"]))])
    return model


def _store_auxiliary(store: _ArrayStore, head: AuxiliaryClassifier) -> dict:
    arrays = head.state_arrays()
    for i, a in enumerate(arrays):
        store.add(f"aux_a{i}", a)
    return {
        "input_width": head.input_width,
        "seed": head.mlp.seed,
        "spec": _spec_to_json(head.mlp.spec),
        "n_arrays": len(arrays),
    }


def _load_auxiliary(meta: dict, arrays: dict[str, np.ndarray]) -> AuxiliaryClassifier:
    head = AuxiliaryClassifier(
        int(meta["input_width"]),
        [int(s) for s in meta["seed"]],
        spec=_spec_from_json(meta["spec"]),
    )
    head.load_state_arrays([arrays[f"aux_a{i}"] for i in range(int(meta["n_arrays"]))])
    return head


def _store_forest(store: _ArrayStore, prefix: str, forest: ForestModel):
    for name, arr in forest_to_arrays(forest).items():
        dtype = _FLOAT if arr.dtype.kind == "f" else _INT
        store.add(f"{prefix}_{name}", arr, dtype)


def _load_forest(arrays: dict[str, np.ndarray], prefix: str) -> ForestModel:
    keys = ("feature", "threshold", "left", "right", "p1", "roots")
    return forest_from_arrays({k: arrays[f"{prefix}_{k}"] for k in keys})


def _store_base(store: _ArrayStore, base) -> dict:
    if isinstance(base, LogisticAdapter):
        store.add("base_weights", base.model.weights)
        return {"type": "logistic", "bias": base.model.bias}
    if isinstance(base, SvmAdapter):
        store.add("base_weights", base.model.weights)
        r = base.score_range
        return {
            "type": "svm",
            "bias": base.model.bias,
            "score_range": {"f_min": r.f_min, "f_max": r.f_max, "p_min": r.p_min, "p_max": r.p_max},
        }
    if isinstance(base, ForestAdapter):
        _store_forest(store, "base_forest", base.model)
        return {"type": "forest"}
    if isinstance(base, KnnAdapter):
        store.add("knn_values", base.model.values)
        store.add("knn_labels", base.model.labels, _INT)
        store.add("knn_ids", base.model.ids, _INT)
        _store_forest(store, "proxy_forest", base.proxy)
        return {"type": "knn"}
    raise ValueError(f"cannot serialize base adapter of type {type(base).__name__}")


def _load_base(meta: dict, arrays: dict[str, np.ndarray]):
    kind = meta["type"]
    if kind == "logistic":
        return LogisticAdapter(
            LinearModel(weights=arrays["base_weights"], bias=float(meta["bias"]), kind="logistic")
        )
    if kind == "svm":
        r = meta["score_range"]
        return SvmAdapter(
            LinearModel(weights=arrays["base_weights"], bias=float(meta["bias"]), kind="svm"),
            ScoreRange(
                f_min=float(r["f_min"]),
                f_max=float(r["f_max"]),
                p_min=float(r["p_min"]),
                p_max=float(r["p_max"]),
            ),
        )
    if kind == "forest":
        return ForestAdapter(_load_forest(arrays, "base_forest"))
    if kind == "knn":
        model = NearestNeighborModel(
            values=arrays["knn_values"],
            labels=arrays["knn_labels"],
            ids=arrays["knn_ids"],
        )
        return KnnAdapter(model, _load_forest(arrays, "proxy_forest"))
    raise ValueError(f"unknown base type {kind!r} in manifest")


def save(pipeline, path) -> None:
    """Write the pipeline container; see the module docstring for the layout."""
    from .pipeline import ClassicPipeline, GuidedPipeline  # deferred, circular import

    store = _ArrayStore()
    manifest: dict = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "thresholds": {"th_n": pipeline.thresholds.th_n, "th_p": pipeline.thresholds.th_p},
        "n_raw_features": int(pipeline.n_raw_features),
        "metadata": pipeline.metadata,
        "base": _store_base(store, pipeline.base),
    }
    if pipeline.feature_selection is not None:
        store.add("feature_selection", pipeline.feature_selection, _INT)
        manifest["feature_selection"] = True
    else:
        manifest["feature_selection"] = False

    if isinstance(pipeline, GuidedPipeline):
        manifest["kind"] = "guided"
        models_meta = []
        for k, model in enumerate(pipeline.models_1_to_4, start=1):
            if model is None:
                models_meta.append({"present": False})
            else:
                models_meta.append(_store_model(store, f"model{k}", model))
        manifest["models_1_to_4"] = models_meta
        manifest["model_5"] = _store_model(store, "model5", pipeline.model_5)
    elif isinstance(pipeline, ClassicPipeline):
        manifest["kind"] = "classic"
        manifest["model"] = _store_model(store, "model", pipeline.model)
    else:
        raise ValueError(f"cannot serialize pipeline of type {type(pipeline).__name__}")
    manifest["auxiliary"] = _store_auxiliary(store, pipeline.auxiliary)
    manifest["arrays"] = store.entries

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("manifest.json", json.dumps(manifest, indent=2))
        for name, entry in store.entries.items():
            zf.writestr(entry["file"], store.blobs[name])


def _read_arrays(zf: zipfile.ZipFile, table: dict) -> dict[str, np.ndarray]:
    out = {}
    for name, entry in table.items():
        try:
            raw = zf.read(entry["file"])
        except KeyError:
            raise ValueError(f"pipeline container is missing blob {entry['file']}") from None
        shape = tuple(int(s) for s in entry["shape"])
        expected = int(np.prod(shape, dtype=np.int64)) * 8
        if len(raw) != expected:
            raise ValueError(
                f"pipeline container blob {name} is corrupt: "
                f"expected {expected} bytes, found {len(raw)}"
            )
        out[name] = np.frombuffer(raw, dtype=entry["dtype"]).reshape(shape).copy()
    return out


def load(path):
    """Read a pipeline container written by save()."""
    from .pipeline import ClassicPipeline, GuidedPipeline  # deferred, circular import

    try:
        zf = zipfile.ZipFile(path, "r")
    except (zipfile.BadZipFile, OSError) as exc:
        raise ValueError(f"not a readable pipeline container: {exc}") from None
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except KeyError:
            raise ValueError("pipeline container has no manifest.json") from None
        except json.JSONDecodeError as exc:
            raise ValueError(f"pipeline manifest is corrupt: {exc}") from None
        if manifest.get("format") != FORMAT_TAG:
            raise ValueError(
                f"not a pipeline container (format tag {manifest.get('format')!r})"
            )
        if manifest.get("version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported pipeline container version {manifest.get('version')!r}; "
                f"this build reads version {FORMAT_VERSION}"
            )
        arrays = _read_arrays(zf, manifest["arrays"])

    thresholds = ThresholdPair(
        th_n=float(manifest["thresholds"]["th_n"]), th_p=float(manifest["thresholds"]["th_p"])
    )
    feature_selection = arrays["feature_selection"] if manifest["feature_selection"] else None
    base = _load_base(manifest["base"], arrays)
    auxiliary = _load_auxiliary(manifest["auxiliary"], arrays)
    common = dict(
        base=base,
        thresholds=thresholds,
        auxiliary=auxiliary,
        n_raw_features=int(manifest["n_raw_features"]),
        feature_selection=feature_selection,
        metadata=manifest.get("metadata", {}),
    )
    if manifest["kind"] == "guided":
        models = []
        for k, meta in enumerate(manifest["models_1_to_4"], start=1):
            models.append(_load_model(meta, arrays, f"model{k}") if meta["present"] else None)
        model_5 = _load_model(manifest["model_5"], arrays, "model5")
        return GuidedPipeline(models_1_to_4=tuple(models), model_5=model_5, **common)
    if manifest["kind"] == "classic":
        return ClassicPipeline(model=_load_model(manifest["model"], arrays, "model"), **common)
    raise ValueError(f"unknown pipeline kind {manifest['kind']!r} in manifest")
