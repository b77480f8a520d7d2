"""Command-line pipeline: prepare, train, evaluate, compare, synth, serve.

Every command writes a run manifest (resolved configuration, seeds, and
input/output checksums) next to its primary output, so a run can be
reproduced exactly. Flags override environment variables
(``SMOKEINTENT_<COMMAND>_<FLAG>``), which override defaults.

Exit codes: 0 success, 2 input/usage error, 3 internal error.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .ingest import (
    CohortConfig,
    IngestError,
    SignalConfig,
    SplitSpec,
    generate_synthetic,
    prepare as prepare_pipeline,
    prepared_csv_bytes,
    raw_csv_bytes,
    read_csv,
    read_prepared_csv,
    train_test_split,
)
from .metrics import MetricsError, ModelSpec, compare_models, render_report, report
from .models import (
    ForestConfig,
    GbmConfig,
    GdConfig,
    TreeConfig,
    fit_classifier,
    predict_labels,
)
from .persistence import PersistenceError, file_model_id, load_model, save_model
from .schema import SchemaError, load_builtin_catalog, load_catalog

EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3

_INPUT_ERRORS = (IngestError, SchemaError, PersistenceError, MetricsError, FileNotFoundError)

KIND_BY_CLI = {
    "linear": "linear-threshold",
    "logistic": "logistic",
    "nb": "gaussian-nb",
    "tree": "decision-tree",
    "forest": "random-forest",
    "gb": "gradient-boosting",
}
COMPARE_ORDER = ("tree", "nb", "logistic", "forest", "gb")
COMPARE_NAMES = {
    "tree": "Decision Tree",
    "nb": "Gaussian NB",
    "logistic": "Logistic Regression",
    "forest": "Random Forest",
    "gb": "Gradient Boosting",
}


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map domain errors to exit code 2, anything unexpected to 3."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _INPUT_ERRORS as exc:
            _fail(str(exc), EXIT_INPUT_ERROR)
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001 - report, then distinct exit code
            _fail(f"internal error: {exc!r}", EXIT_INTERNAL_ERROR)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _resolve_catalog(value: str):
    """A schema file path, or the name of a catalog shipped in the package."""
    path = Path(value)
    if path.exists():
        return load_catalog(path)
    if value == "nyts2018":
        return load_builtin_catalog(value)
    raise IngestError(f"catalog {value!r}: no such file or builtin catalog")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path: Path, command: str, config: dict, inputs: list[Path],
                    outputs: list[Path], started: float):
    manifest = {
        "command": command,
        "config": config,
        "package_version": __version__,
        "inputs": {str(p): _sha256(Path(p)) for p in inputs},
        "outputs": {str(p): _sha256(Path(p)) for p in outputs},
        "elapsed_seconds": round(time.time() - started, 3),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _default_created() -> str:
    """Model files stay byte-reproducible: the timestamp is empty unless
    SOURCE_DATE_EPOCH pins one explicitly."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if not epoch:
        return ""
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat(timespec="seconds")


@click.group(context_settings={"auto_envvar_prefix": "SMOKEINTENT"})
@click.version_option(__version__)
def main():
    """Smoking-intention modeling pipeline over coded survey answers."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--catalog", "catalog_ref", required=True, help="Schema file path or builtin name.")
@click.option("--target-policy", type=click.Choice(["q16-only", "any-of-six"]), default="q16-only",
              show_default=True)
@click.option("--cohort-q59", is_flag=True, help="Also filter on the refused-sale question.")
@click.option("--cohort-q28", is_flag=True, help="Also exclude ever e-cigarette users.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@_guarded
def prepare(input_path: Path, catalog_ref: str, target_policy: str, cohort_q59: bool,
            cohort_q28: bool, out_path: Path):
    """Raw survey CSV -> prepared dataset CSV plus a preparation report."""
    started = time.time()
    catalog = _resolve_catalog(catalog_ref)
    raw = read_csv(input_path, catalog)
    disabled = () if cohort_q59 else ("Q59",)
    cohort = CohortConfig(disabled=disabled, include_non_esmoker=cohort_q28)
    ds, rep = prepare_pipeline(raw, catalog, policy=target_policy, cohort=cohort)

    out_path.write_bytes(prepared_csv_bytes(ds))
    report_path = Path(str(out_path) + ".report.json")
    report_path.write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    config = {
        "input": str(input_path), "catalog": catalog.identity, "target_policy": target_policy,
        "cohort_q59": cohort_q59, "cohort_q28": cohort_q28, "out": str(out_path),
    }
    _write_manifest(out_path, "prepare", config, [input_path], [out_path, report_path], started)
    click.echo(f"rows in: {rep.rows_in}  cohort: {rep.cohort_rows}  out: {rep.rows_out} "
               f"(yes={rep.n_yes}, no={rep.n_no}, target-dropped={rep.target_dropped})")
    click.echo(f"wrote {out_path} and {report_path}")


def _build_config(model: str, seed: int, opts: dict):
    if model in ("linear", "logistic"):
        return GdConfig(
            learning_rate=opts["learning_rate"], convergence_threshold=opts["threshold"],
            max_iters=opts["max_iters"], l2=opts["l2"],
        )
    if model == "nb":
        return opts["var_smoothing"]
    if model == "tree":
        return TreeConfig(max_depth=opts["max_depth"], min_samples=opts["min_samples"])
    if model == "forest":
        return ForestConfig(
            n_trees=opts["n_trees"], m=opts["m_features"], seed=seed,
            bootstrap=not opts["no_bootstrap"], max_depth=opts["max_depth"],
            min_samples=opts["min_samples"],
        )
    if model == "gb":
        return GbmConfig(
            n_stages=opts["n_stages"], shrinkage=opts["shrinkage"],
            max_depth=opts["max_depth"] if opts["max_depth"] is not None else 3,
            min_samples=opts["min_samples"], seed=seed,
        )
    raise IngestError(f"unknown model {model!r}")


_train_options = [
    click.option("--test-fraction", type=float, default=0.2, show_default=True),
    click.option("--no-stratify", is_flag=True),
    click.option("--learning-rate", type=float, default=0.01, show_default=True),
    click.option("--threshold", type=float, default=1e-6, show_default=True,
                 help="Convergence threshold on the weight-change norm."),
    click.option("--max-iters", type=int, default=10_000, show_default=True),
    click.option("--l2", type=float, default=0.0, show_default=True),
    click.option("--var-smoothing", type=float, default=1e-9, show_default=True),
    click.option("--max-depth", type=int, default=None),
    click.option("--min-samples", type=int, default=2, show_default=True),
    click.option("--n-trees", type=int, default=100, show_default=True),
    click.option("--m-features", type=int, default=None),
    click.option("--no-bootstrap", is_flag=True),
    click.option("--n-stages", type=int, default=100, show_default=True),
    click.option("--shrinkage", type=float, default=0.1, show_default=True),
]


def _with_train_options(fn):
    for opt in reversed(_train_options):
        fn = opt(fn)
    return fn


@main.command()
@click.option("--model", "model_name", required=True, type=click.Choice(sorted(KIND_BY_CLI)))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--catalog", "catalog_ref", default=None,
              help="Optional schema to stamp catalog identity and answer domains on the model.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--save-test", "save_test", type=click.Path(path_type=Path), default=None,
              help="Also write the held-out test rows as a prepared CSV.")
@_with_train_options
@_guarded
def train(model_name: str, data_path: Path, seed: int, catalog_ref: str | None, out_path: Path,
          save_test: Path | None, test_fraction: float, no_stratify: bool, **opts):
    """Split a prepared dataset, fit one model, and save it as .imodel."""
    started = time.time()
    ds = read_prepared_csv(data_path)
    split = SplitSpec(test_fraction=test_fraction, seed=seed, stratified=not no_stratify)
    train_ds, test_ds = train_test_split(ds, split)

    catalog_version = ""
    feature_domains = None
    if catalog_ref:
        catalog = _resolve_catalog(catalog_ref)
        cols = catalog.feature_columns()
        expected = [c.column_id for c in cols]
        if expected != ds.feature_names:
            raise IngestError("prepared data columns do not match the catalog's predictor columns")
        catalog_version = catalog.identity
        feature_domains = [c.codes for c in cols]

    config = _build_config(model_name, seed, opts)
    trained = fit_classifier(
        KIND_BY_CLI[model_name], train_ds.X, train_ds.y, config,
        feature_names=ds.feature_names, seed=seed, catalog_version=catalog_version,
        feature_domains=feature_domains, created=_default_created(),
    )
    mid = save_model(trained, out_path)

    train_acc = float(np.mean(predict_labels(trained, train_ds.X) == train_ds.y))
    test_acc = float(np.mean(predict_labels(trained, test_ds.X) == test_ds.y))
    outputs = [out_path]
    if save_test is not None:
        save_test.write_bytes(prepared_csv_bytes(test_ds))
        outputs.append(save_test)
    flags = {"model": model_name, "data": str(data_path), "seed": seed,
             "test_fraction": test_fraction, "stratified": not no_stratify, **opts}
    _write_manifest(out_path, "train", flags, [data_path], outputs, started)
    click.echo(f"model {mid[:12]}… kind={KIND_BY_CLI[model_name]} "
               f"train accuracy={train_acc:.4f} test accuracy={test_acc:.4f}")


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None,
              help="Write the full-precision report as JSON.")
@_guarded
def evaluate(model_path: Path, data_path: Path, out_path: Path | None):
    """Score a saved model on a prepared dataset and print the class report."""
    model = load_model(model_path)
    ds = read_prepared_csv(data_path)
    if ds.feature_names != model.meta.feature_names:
        raise IngestError("data columns do not match the model's feature names")
    predicted = predict_labels(model, ds.X)
    rep = report(ds.y, predicted, labels=[1, 0])
    click.echo(render_report(rep, class_names={1: "Yes", 0: "No"}))
    if out_path is not None:
        payload = {
            "accuracy": rep.accuracy,
            "total": rep.total,
            "per_class": {
                str(cls): {"precision": m.precision, "recall": m.recall, "f1": m.f1,
                           "support": m.support, "zero_division": m.zero_division}
                for cls, m in rep.per_class.items()
            },
            "macro": list(rep.macro),
            "weighted": list(rep.weighted),
        }
        out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--test-fraction", type=float, default=0.2, show_default=True)
@click.option("--no-stratify", is_flag=True)
@click.option("--k", "k_folds", type=int, default=5, show_default=True)
@click.option("--plot", "plot_path", type=click.Path(path_type=Path), default=None,
              help="Write grouped-bar plot data as JSON.")
@click.option("--chart", "chart_path", type=click.Path(path_type=Path), default=None,
              help="Render the comparison as a PNG (requires matplotlib).")
@_guarded
def compare(data_path: Path, seed: int, test_fraction: float, no_stratify: bool, k_folds: int,
            plot_path: Path | None, chart_path: Path | None):
    """Train the five classifiers and print training (CV) and test scores."""
    started = time.time()
    ds = read_prepared_csv(data_path)
    split = SplitSpec(test_fraction=test_fraction, seed=seed, stratified=not no_stratify)

    def make_fit(cli_name: str):
        kind = KIND_BY_CLI[cli_name]
        cfg = _default_compare_config(cli_name, seed)
        return lambda X, y: fit_classifier(kind, X, y, cfg, seed=seed)

    specs = [ModelSpec(COMPARE_NAMES[name], make_fit(name)) for name in COMPARE_ORDER]
    table = compare_models(ds, split, specs, k=k_folds)
    click.echo(table.render())

    outputs = []
    if plot_path is not None:
        plot_path.write_text(json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
        outputs.append(plot_path)
        click.echo(f"wrote {plot_path}")
    if chart_path is not None:
        _render_chart(table, chart_path)
        outputs.append(chart_path)
        click.echo(f"wrote {chart_path}")
    if outputs:
        config = {"data": str(data_path), "seed": seed, "test_fraction": test_fraction,
                  "stratified": not no_stratify, "k": k_folds}
        _write_manifest(outputs[0], "compare", config, [data_path], outputs, started)


def _default_compare_config(cli_name: str, seed: int):
    if cli_name == "logistic":
        return GdConfig()
    if cli_name == "nb":
        return 1e-9
    if cli_name == "tree":
        return TreeConfig()
    if cli_name == "forest":
        return ForestConfig(seed=seed)
    if cli_name == "gb":
        return GbmConfig(seed=seed)
    raise AssertionError(cli_name)


def _render_chart(table, chart_path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = table.to_dict()
    x = np.arange(len(data["models"]))
    width = 0.38
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.bar(x - width / 2, data["training_score"], width, label="Training Score")
    ax.bar(x + width / 2, data["test_score"], width, label="Test Score")
    ax.set_xticks(x, data["models"], rotation=15)
    ax.set_ylim(0, 1)
    ax.set_ylabel("Accuracy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(chart_path, dpi=120)
    plt.close(fig)


@main.command()
@click.option("--catalog", "catalog_ref", required=True)
@click.option("--rows", type=int, required=True)
@click.option("--signal", "signal_json", default="{}", show_default=True,
              help="JSON signal config, or @path to a JSON file.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@_guarded
def synth(catalog_ref: str, rows: int, signal_json: str, seed: int, out_path: Path):
    """Generate a synthetic raw survey CSV with a planted intention signal."""
    started = time.time()
    catalog = _resolve_catalog(catalog_ref)
    if signal_json.startswith("@"):
        signal_json = Path(signal_json[1:]).read_text(encoding="utf-8")
    try:
        raw_cfg = json.loads(signal_json)
    except json.JSONDecodeError as exc:
        raise IngestError(f"--signal is not valid JSON: {exc}") from None
    try:
        signal = SignalConfig(**raw_cfg)
    except TypeError as exc:
        raise IngestError(f"bad signal config: {exc}") from None
    table = generate_synthetic(rows, catalog, signal, seed)
    out_path.write_bytes(raw_csv_bytes(table))
    config = {"catalog": catalog.identity, "rows": rows, "signal": raw_cfg, "seed": seed}
    _write_manifest(out_path, "synth", config, [], [out_path], started)
    click.echo(f"wrote {out_path} ({rows} rows)")


@main.command()
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=None)
@click.option("--no-model", is_flag=True, help="Start without a model (health reports degraded).")
@click.option("--catalog", "catalog_ref", required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cors-origin", "cors_origins", multiple=True, default=("*",), show_default=True)
@_guarded
def serve(model_path: Path | None, no_model: bool, catalog_ref: str, host: str, port: int,
          cors_origins: tuple[str, ...]):
    """Run the HTTP questionnaire service until interrupted."""
    import uvicorn

    from .service import create_app

    if model_path is None and not no_model:
        raise IngestError("either --model or --no-model is required")
    catalog = _resolve_catalog(catalog_ref)
    model = None
    mid = ""
    if model_path is not None:
        model = load_model(model_path)
        mid = file_model_id(model_path)
    app = create_app(model=model, model_id=mid, catalog=catalog, cors_origins=tuple(cors_origins))
    click.echo(f"serving on http://{host}:{port} (model: {mid[:12] or 'none'})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
