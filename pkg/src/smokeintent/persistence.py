"""Versioned, checksummed text format for trained models (``.imodel``).

Layout (byte-exact, documented in docs/FORMATS.md):

    IMODEL <version>\\n
    <canonical JSON payload, sorted keys, compact separators>\\n
    CHECKSUM sha256=<hex of everything above>\\n

All real numbers are stored as hex-float strings (``float.hex()``), so a
round-trip reproduces every bit. Saving the same model twice yields
byte-identical files; the checksum doubles as the model id.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .models import (
    MODEL_KINDS,
    ForestModel,
    GaussianNbModel,
    GbmModel,
    GbmStage,
    Leaf,
    ModelMeta,
    Split,
    TrainedModel,
    TreeNode,
)

MAGIC = "IMODEL"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)
_CHECKSUM_PREFIX = b"CHECKSUM sha256="
_HEX_TAG = "hex:"


class PersistenceError(ValueError):
    pass


class ChecksumError(PersistenceError):
    pass


class VersionError(PersistenceError):
    pass


class FormatError(PersistenceError):
    """Payload structure does not match the declared model kind."""


# --- encoding ----------------------------------------------------------------


def _enc_float(x: float) -> str:
    return float(x).hex()


def _enc_floats(values) -> list:
    return [_enc_float(v) for v in np.asarray(values, dtype=float).ravel()]


def _enc_matrix(values) -> list:
    return [[_enc_float(v) for v in row] for row in np.asarray(values, dtype=float)]


def _enc_tree(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        if isinstance(node.value, (int, np.integer)) and not isinstance(node.value, bool):
            return {"type": "leaf", "label": int(node.value)}
        return {"type": "leaf", "value": _enc_float(node.value)}
    return {
        "type": "split",
        "feature": int(node.feature),
        "children": {str(code): _enc_tree(child) for code, child in node.children.items()},
        "fallback": _enc_tree(node.fallback),
    }


def _enc_mixed(value):
    """Hyperparameter values: floats become tagged hex strings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        if isinstance(value, str) and value.startswith(_HEX_TAG):
            raise PersistenceError(f"string value may not start with {_HEX_TAG!r}: {value!r}")
        return value
    if isinstance(value, float):
        return _HEX_TAG + _enc_float(value)
    if isinstance(value, (list, tuple)):
        return [_enc_mixed(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _enc_mixed(v) for k, v in value.items()}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return _HEX_TAG + _enc_float(float(value))
    raise PersistenceError(f"unsupported hyperparameter value of type {type(value).__name__}")


def _encode_params(model: TrainedModel) -> dict:
    kind, params = model.kind, model.params
    if kind in ("linear-threshold", "logistic"):
        return {"weights": _enc_floats(params)}
    if kind == "gaussian-nb":
        nb: GaussianNbModel = params
        return {
            "classes": [int(c) for c in nb.classes],
            "priors": _enc_floats(nb.priors),
            "means": _enc_matrix(nb.means),
            "variances": _enc_matrix(nb.variances),
            "var_floor": _enc_float(nb.var_floor),
        }
    if kind == "decision-tree":
        return {"tree": _enc_tree(params)}
    if kind == "random-forest":
        forest: ForestModel = params
        return {
            "trees": [_enc_tree(t) for t in forest.trees],
            "tree_seeds": [int(s) for s in forest.tree_seeds],
            "feature_subsets": [[int(f) for f in sub] for sub in forest.feature_subsets],
            "m": int(forest.m),
            "bootstrap": bool(forest.bootstrap),
        }
    if kind == "gradient-boosting":
        gbm: GbmModel = params
        return {
            "initial_score": _enc_float(gbm.initial_score),
            "stages": [
                {"shrinkage": _enc_float(s.shrinkage), "tree": _enc_tree(s.tree)} for s in gbm.stages
            ],
            "train_log_loss": _enc_floats(gbm.train_log_loss),
        }
    raise PersistenceError(f"unknown model kind {kind!r}")


def model_bytes(model: TrainedModel) -> bytes:
    """Serialize to the documented byte-exact layout."""
    payload = {
        "kind": model.kind,
        "feature_names": list(model.meta.feature_names),
        "hyperparameters": _enc_mixed(model.meta.hyperparameters),
        "seed": model.meta.seed,
        "catalog_version": model.meta.catalog_version,
        "feature_domains": None
        if model.meta.feature_domains is None
        else [[int(c) for c in d] for d in model.meta.feature_domains],
        "created": model.meta.created,
    }
    payload["params"] = _encode_params(model)
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    prefix = f"{MAGIC} {FORMAT_VERSION}\n{body}\n".encode("utf-8")
    digest = hashlib.sha256(prefix).hexdigest()
    return prefix + _CHECKSUM_PREFIX + digest.encode("ascii") + b"\n"


def model_id(data: bytes) -> str:
    """The checksum recorded in a serialized model file."""
    marker = data.rfind(b"\n" + _CHECKSUM_PREFIX)
    if marker == -1:
        raise ChecksumError("checksum line missing or corrupted")
    return data[marker + 1 + len(_CHECKSUM_PREFIX):].strip().decode("ascii", "replace")


def save_model(model: TrainedModel, path) -> str:
    """Write atomically (temp file + rename); returns the model id."""
    data = model_bytes(model)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return model_id(data)


# --- decoding ----------------------------------------------------------------


def _dec_float(value, where: str) -> float:
    try:
        return float.fromhex(value)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: expected a hex-float string, got {value!r}") from None


def _dec_floats(values, where: str) -> np.ndarray:
    return np.array([_dec_float(v, where) for v in values], dtype=float)


def _dec_matrix(values, where: str) -> np.ndarray:
    rows = [[_dec_float(v, where) for v in row] for row in values]
    return np.array(rows, dtype=float) if rows else np.zeros((0, 0))


def _dec_tree(node: dict, n_features: int, where: str) -> TreeNode:
    if not isinstance(node, dict) or "type" not in node:
        raise FormatError(f"{where}: malformed tree node")
    if node["type"] == "leaf":
        if "label" in node:
            return Leaf(int(node["label"]))
        if "value" in node:
            return Leaf(_dec_float(node["value"], where))
        raise FormatError(f"{where}: leaf has neither label nor value")
    if node["type"] != "split":
        raise FormatError(f"{where}: unknown node type {node['type']!r}")
    feature = node.get("feature")
    if not isinstance(feature, int) or not 0 <= feature < n_features:
        raise FormatError(f"{where}: split feature {feature!r} out of range for {n_features} features")
    children = {
        int(code): _dec_tree(child, n_features, where) for code, child in node.get("children", {}).items()
    }
    if len(children) < 1:
        raise FormatError(f"{where}: split node has no children")
    if "fallback" not in node:
        raise FormatError(f"{where}: split node missing fallback")
    return Split(feature=feature, children=children, fallback=_dec_tree(node["fallback"], n_features, where))


def _dec_mixed(value):
    if isinstance(value, str) and value.startswith(_HEX_TAG):
        return float.fromhex(value[len(_HEX_TAG):])
    if isinstance(value, list):
        return [_dec_mixed(v) for v in value]
    if isinstance(value, dict):
        return {k: _dec_mixed(v) for k, v in value.items()}
    return value


def _decode_params(kind: str, raw: dict, n_features: int):
    if kind in ("linear-threshold", "logistic"):
        weights = _dec_floats(_require(raw, "weights", kind), "params.weights")
        if len(weights) != n_features + 1:
            raise FormatError(f"params.weights: expected {n_features + 1} entries, got {len(weights)}")
        return weights
    if kind == "gaussian-nb":
        classes = np.array([int(c) for c in _require(raw, "classes", kind)], dtype=np.int64)
        means = _dec_matrix(_require(raw, "means", kind), "params.means")
        variances = _dec_matrix(_require(raw, "variances", kind), "params.variances")
        priors = _dec_floats(_require(raw, "priors", kind), "params.priors")
        for name, mat in (("means", means), ("variances", variances)):
            if mat.shape != (len(classes), n_features):
                raise FormatError(f"params.{name}: shape {mat.shape} does not match "
                                  f"{len(classes)} classes x {n_features} features")
        return GaussianNbModel(
            classes=classes,
            priors=priors,
            means=means,
            variances=variances,
            var_floor=_dec_float(_require(raw, "var_floor", kind), "params.var_floor"),
        )
    if kind == "decision-tree":
        return _dec_tree(_require(raw, "tree", kind), n_features, "params.tree")
    if kind == "random-forest":
        trees = [_dec_tree(t, n_features, f"params.trees[{i}]") for i, t in enumerate(_require(raw, "trees", kind))]
        if not trees:
            raise FormatError("params.trees: forest needs at least one tree")
        return ForestModel(
            trees=trees,
            tree_seeds=[int(s) for s in _require(raw, "tree_seeds", kind)],
            feature_subsets=[tuple(int(f) for f in sub) for sub in _require(raw, "feature_subsets", kind)],
            m=int(_require(raw, "m", kind)),
            bootstrap=bool(_require(raw, "bootstrap", kind)),
        )
    if kind == "gradient-boosting":
        stages = [
            GbmStage(
                tree=_dec_tree(_require(s, "tree", kind), n_features, f"params.stages[{i}].tree"),
                shrinkage=_dec_float(_require(s, "shrinkage", kind), f"params.stages[{i}].shrinkage"),
            )
            for i, s in enumerate(_require(raw, "stages", kind))
        ]
        if not stages:
            raise FormatError("params.stages: boosting needs at least one stage")
        return GbmModel(
            initial_score=_dec_float(_require(raw, "initial_score", kind), "params.initial_score"),
            stages=stages,
            train_log_loss=list(_dec_floats(raw.get("train_log_loss", []), "params.train_log_loss")),
        )
    raise FormatError(f"unknown model kind {kind!r} (expected one of {MODEL_KINDS})")


def _require(mapping: dict, key: str, kind: str):
    if key not in mapping:
        raise FormatError(f"params.{key}: missing for model kind {kind!r}")
    return mapping[key]


def loads_model(data: bytes) -> TrainedModel:
    """Validate checksum, version, and structure, then rebuild the model."""
    marker = data.rfind(b"\n" + _CHECKSUM_PREFIX)
    if marker == -1:
        raise ChecksumError("checksum line missing or corrupted")
    prefix = data[: marker + 1]
    tail = data[marker + 1 + len(_CHECKSUM_PREFIX):]
    # the layout is byte-exact: 64 hex digits and a trailing newline, nothing else
    if len(tail) != 65 or not tail.endswith(b"\n"):
        raise ChecksumError("malformed checksum line")
    recorded = tail[:64].decode("ascii", "replace")
    actual = hashlib.sha256(prefix).hexdigest()
    if recorded != actual:
        raise ChecksumError(f"checksum mismatch: recorded {recorded}, computed {actual}")

    header, _, body = prefix.partition(b"\n")
    parts = header.decode("utf-8", "replace").split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise FormatError(f"bad header {header!r}; expected '{MAGIC} <version>'")
    try:
        version = int(parts[1])
    except ValueError:
        raise FormatError(f"bad version field {parts[1]!r}") from None
    if version not in SUPPORTED_VERSIONS:
        raise VersionError(f"format version {version} unsupported; supported versions: {list(SUPPORTED_VERSIONS)}")

    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"payload is not valid JSON: {exc}") from None
    for key in ("kind", "feature_names", "params"):
        if key not in payload:
            raise FormatError(f"payload field {key!r} missing")
    kind = payload["kind"]
    feature_names = [str(n) for n in payload["feature_names"]]
    domains = payload.get("feature_domains")
    if domains is not None:
        if len(domains) != len(feature_names):
            raise FormatError("feature_domains: length does not match feature_names")
        domains = [tuple(int(c) for c in d) for d in domains]
    meta = ModelMeta(
        feature_names=feature_names,
        hyperparameters=_dec_mixed(payload.get("hyperparameters", {})),
        seed=payload.get("seed"),
        catalog_version=payload.get("catalog_version", ""),
        feature_domains=domains,
        created=payload.get("created", ""),
    )
    params = _decode_params(kind, payload["params"], len(feature_names))
    return TrainedModel(kind=kind, params=params, meta=meta)


def load_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        return loads_model(fh.read())


def file_model_id(path) -> str:
    with open(path, "rb") as fh:
        return model_id(fh.read())
