"""End-to-end pipeline: data, screening, models, committee, report bundle.

A single YAML config drives every stage. The bundle directory holds
the feature report, per-model summaries and confusion matrices, ROC
and gain point files per class (with SVG and PNG charts), and an
accuracy table is printed shaped like the one-row-per-model-plus-Voted
layout of the source data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .chisquare import ChiSquareReport, select_features
from .data import Dataset, load_csv
from .ensembles import (
    BoostParams,
    EnsembleModel,
    ForestParams,
    bag,
    committee,
    model_dist,
    model_predict,
    train_boosted,
    train_random_forest,
)
from .errors import (
    AucUndefinedError,
    ConfigError,
    DataLoadError,
    DegenerateDataError,
    OutputWriteError,
)
from .figures import GAIN, ROC, curves_png, render_svg
from .metrics import (
    ConfusionMatrix,
    EvalSummary,
    GainCurve,
    RocCurve,
    accuracy,
    confusion,
    curve_csv,
    error_rate,
    frequency_csv,
    frequency_report,
    gain,
    roc_auc,
    std_error,
)
from .numformat import format_fixed, percent_str
from .rng import SeededRng, derive_seed
from .sampling import stratified_split
from .serialize import (
    dump_yaml,
    load_yaml,
    schema_from_yaml,
    summary_to_dict,
)
from .synth import generate_workers
from .trees import (
    CART,
    CHAID,
    EXHAUSTIVE_CHAID,
    TreeParams,
    train_cart,
    train_chaid,
    train_exhaustive_chaid,
)

RESUBSTITUTION = "resubstitution"
SPLIT = "split"

TREE_KINDS = (CART, CHAID, EXHAUSTIVE_CHAID)
MODEL_KINDS = TREE_KINDS + ("boosted", "random_forest", "bagged")

_NAME_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_CALL_RE = re.compile(r"^\s*(\w+)\s*\(\s*(.*?)\s*\)\s*$")

_DEFAULT_MODELS = (
    {"name": "random_forest", "kind": "random_forest"},
    {"name": "boosted", "kind": "boosted"},
    {"name": "cart", "kind": "cart"},
    {"name": "chaid", "kind": "chaid"},
)


def parse_call(text: str) -> tuple[str, dict[str, str]]:
    """Parse ``name(key=value,...)`` strings used for input and evaluation."""
    match = _CALL_RE.match(text)
    if not match:
        raise ConfigError(f"cannot parse {text!r} as name(key=value,...)")
    name, body = match.group(1), match.group(2)
    args: dict[str, str] = {}
    if body:
        for part in body.split(","):
            if "=" not in part:
                raise ConfigError(f"{text!r}: argument {part.strip()!r} needs key=value")
            key, value = part.split("=", 1)
            args[key.strip()] = value.strip()
    return name, args


def _call_int(args: dict[str, str], key: str, context: str) -> int:
    if key not in args:
        raise ConfigError(f"{context}: missing argument {key!r}")
    try:
        return int(args[key])
    except ValueError:
        raise ConfigError(f"{context}: {key} must be an integer") from None


def _call_float(args: dict[str, str], key: str, context: str) -> float:
    if key not in args:
        raise ConfigError(f"{context}: missing argument {key!r}")
    try:
        return float(args[key])
    except ValueError:
        raise ConfigError(f"{context}: {key} must be a number") from None


@dataclass(frozen=True)
class ModelSpec:
    name: str
    kind: str
    params: dict


@dataclass(frozen=True)
class PipelineConfig:
    input: str
    schema: str | None
    alpha: float
    evaluation: str
    models: tuple[ModelSpec, ...]
    committee_members: tuple[str, ...]
    output_dir: str
    master_seed: int
    workers: int = 1
    svg: bool = True
    figures: bool = True
    base_dir: Path = Path(".")


def _parse_model_entry(entry, position: int) -> ModelSpec:
    if isinstance(entry, str):
        entry = {"kind": entry}
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"models[{position}]: need a kind")
    kind = str(entry["kind"])
    if kind not in MODEL_KINDS:
        raise ConfigError(f"models[{position}]: unknown kind {kind!r}")
    name = str(entry.get("name", kind))
    if not _NAME_RE.match(name):
        raise ConfigError(f"models[{position}]: bad name {name!r}")
    if name == "voted":
        raise ConfigError(f"models[{position}]: the name 'voted' is reserved")
    params = entry.get("params", {})
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise ConfigError(f"models[{position}]: params must be a mapping")
    return ModelSpec(name=name, kind=kind, params=dict(params))


def parse_config(payload, base_dir: Path | str = ".") -> PipelineConfig:
    """Validate a loaded YAML mapping into a PipelineConfig."""
    if not isinstance(payload, dict):
        raise ConfigError("config must be a mapping")
    if "input" not in payload:
        raise ConfigError("config: missing field 'input'")
    input_str = str(payload["input"])

    alpha = payload.get("alpha", 0.05)
    if not isinstance(alpha, (int, float)) or not 0.0 < float(alpha) < 1.0:
        raise ConfigError(f"config: alpha must be in (0, 1), got {alpha!r}")

    evaluation = str(payload.get("evaluation", RESUBSTITUTION))
    if evaluation != RESUBSTITUTION:
        name, args = parse_call(evaluation)
        if name != SPLIT:
            raise ConfigError(f"config: unknown evaluation {evaluation!r}")
        _call_float(args, "test_fraction", "evaluation split")
        _call_int(args, "seed", "evaluation split")

    raw_models = payload.get("models", list(_DEFAULT_MODELS))
    if not isinstance(raw_models, list) or not raw_models:
        raise ConfigError("config: models must be a nonempty list")
    models = tuple(_parse_model_entry(m, i) for i, m in enumerate(raw_models))
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ConfigError("config: duplicate model names")

    members = payload.get("committee_members", names)
    if not isinstance(members, list) or not members:
        raise ConfigError("config: committee_members must be a nonempty list")
    for member in members:
        if member not in names:
            raise ConfigError(f"config: committee references unknown model {member!r}")

    master_seed = payload.get("master_seed", 0)
    if (
        not isinstance(master_seed, int)
        or isinstance(master_seed, bool)
        or not 0 <= master_seed < 2**64
    ):
        raise ConfigError("config: master_seed must be a 64-bit unsigned integer")
    workers = payload.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("config: workers must be a positive integer")

    schema = payload.get("schema")
    if input_str.startswith("synthetic"):
        name, args = parse_call(input_str)
        if name != "synthetic":
            raise ConfigError(f"config: unknown input {input_str!r}")
        _call_int(args, "seed", "synthetic input")
        _call_int(args, "n", "synthetic input")
    elif schema is None:
        raise ConfigError("config: file input needs a schema path")

    return PipelineConfig(
        input=input_str,
        schema=str(schema) if schema is not None else None,
        alpha=float(alpha),
        evaluation=evaluation,
        models=models,
        committee_members=tuple(str(m) for m in members),
        output_dir=str(payload.get("output_dir", "report")),
        master_seed=master_seed,
        workers=workers,
        svg=bool(payload.get("svg", True)),
        figures=bool(payload.get("figures", True)),
        base_dir=Path(base_dir),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(load_yaml(text), base_dir=path.parent)


def load_input(config: PipelineConfig) -> Dataset:
    """Generate or read the configured dataset."""
    if config.input.startswith("synthetic"):
        _, args = parse_call(config.input)
        seed = _call_int(args, "seed", "synthetic input")
        n = _call_int(args, "n", "synthetic input")
        return generate_workers(seed, n)
    data_path = config.base_dir / config.input
    schema_path = config.base_dir / config.schema
    try:
        schema_text = schema_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read schema {schema_path}: {exc}") from exc
    try:
        schema = schema_from_yaml(schema_text)
    except ConfigError as exc:
        raise DataLoadError(f"schema {schema_path}: {exc}") from exc
    try:
        text = data_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read data {data_path}: {exc}") from exc
    return load_csv(text, schema)


def train_model(spec: ModelSpec, train: Dataset, seed: int, workers: int = 1):
    """Train one configured model with its stage-derived seed."""
    params = dict(spec.params)

    def tree_params(defaults: TreeParams) -> TreeParams:
        known = (
            "max_depth",
            "min_samples_split",
            "min_samples_leaf",
            "alpha_merge",
            "alpha_split",
            "numeric_bins",
        )
        bad = set(params) - set(known)
        if bad:
            raise ConfigError(f"model {spec.name}: unknown params {sorted(bad)}")
        merged = {k: params.get(k, getattr(defaults, k)) for k in known}
        try:
            return TreeParams(**merged)
        except ValueError as exc:
            raise ConfigError(f"model {spec.name}: {exc}") from exc

    try:
        if spec.kind == CART:
            return train_cart(train, tree_params(TreeParams()))
        if spec.kind == CHAID:
            return train_chaid(train, tree_params(TreeParams(max_depth=5)))
        if spec.kind == EXHAUSTIVE_CHAID:
            return train_exhaustive_chaid(train, tree_params(TreeParams(max_depth=5)))
        if spec.kind == "boosted":
            boost = BoostParams(
                rounds=params.pop("rounds", 50),
                base_max_depth=params.pop("base_max_depth", 3),
                learning_rate=params.pop("learning_rate", 1.0),
            )
            if params:
                raise ConfigError(f"model {spec.name}: unknown params {sorted(params)}")
            return train_boosted(train, boost, SeededRng(seed))
        if spec.kind == "random_forest":
            forest = ForestParams(
                n_trees=params.pop("n_trees", 100), mtry=params.pop("mtry", None)
            )
            if params:
                raise ConfigError(f"model {spec.name}: unknown params {sorted(params)}")
            return train_random_forest(
                train, forest, SeededRng(seed), workers=workers
            )
        if spec.kind == "bagged":
            base_kind = params.pop("base", CART)
            if base_kind not in TREE_KINDS:
                raise ConfigError(f"model {spec.name}: unknown base {base_kind!r}")
            m = params.pop("m", 25)
            if params:
                raise ConfigError(f"model {spec.name}: unknown params {sorted(params)}")
            return bag(base_kind, train, m, SeededRng(seed), workers=workers)
    except ValueError as exc:
        raise ConfigError(f"model {spec.name}: {exc}") from exc
    raise ConfigError(f"model {spec.name}: unknown kind {spec.kind!r}")


@dataclass(frozen=True)
class ModelResult:
    """One evaluated model with its metrics and curves."""

    name: str
    kind: str
    model: object
    cm: ConfusionMatrix
    summary: EvalSummary
    roc_curves: tuple[RocCurve | None, ...]
    gain_curves: tuple[GainCurve | None, ...]


@dataclass(frozen=True)
class ReportBundle:
    output_dir: Path
    feature_report: ChiSquareReport
    results: tuple[ModelResult, ...]
    voted: ModelResult
    files: tuple[str, ...]
    table: str


def evaluate_model(name: str, kind: str, model, eval_data: Dataset) -> ModelResult:
    """Score a trained model on a dataset: confusion, rates, curves."""
    classes = eval_data.schema.classes
    records = [eval_data.row_record(i) for i in range(eval_data.n_rows)]
    actual = eval_data.target_values()
    predicted = [model_predict(model, rec) for rec in records]
    cm = confusion(actual, predicted, classes)
    acc = accuracy(cm)
    err = error_rate(cm)
    dists = [model_dist(model, rec) for rec in records]
    roc_curves: list[RocCurve | None] = []
    gain_curves: list[GainCurve | None] = []
    aucs: list[float | None] = []
    for k, label in enumerate(classes):
        scores = [d[k] for d in dists]
        try:
            curve = roc_auc(scores, actual, label)
            roc_curves.append(curve)
            aucs.append(curve.auc)
        except AucUndefinedError:
            roc_curves.append(None)
            aucs.append(None)
        try:
            gain_curves.append(gain(scores, actual, label))
        except AucUndefinedError:
            gain_curves.append(None)
    summary = EvalSummary(
        accuracy=acc,
        error_rate=err,
        std_error=std_error(err, cm.total),
        per_class_auc=tuple(aucs),
    )
    return ModelResult(
        name=name,
        kind=kind,
        model=model,
        cm=cm,
        summary=summary,
        roc_curves=tuple(roc_curves),
        gain_curves=tuple(gain_curves),
    )


def accuracy_table(results) -> str:
    """Fixed-width accuracy table, one row per model."""
    header = ["Model", "Accuracy", "Error rate", "Std error"]
    rows = [header]
    for res in results:
        correct = sum(res.cm.counts[k][k] for k in range(len(res.cm.classes)))
        rows.append(
            [
                res.name if res.kind != "committee" else "Voted",
                percent_str(correct, res.cm.total),
                format_fixed(res.summary.error_rate, 6),
                format_fixed(res.summary.std_error, 6),
            ]
        )
    widths = [max(len(r[k]) for r in rows) for k in range(4)]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells.extend(cell.rjust(w) for cell, w in zip(row[1:], widths[1:]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _confusion_csv(cm: ConfusionMatrix) -> str:
    lines = ["actual," + ",".join(cm.classes)]
    for label, row in zip(cm.classes, cm.counts):
        lines.append(label + "," + ",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def _summary_yaml(res: ModelResult, classes) -> str:
    payload = {"name": res.name if res.kind != "committee" else "voted", "kind": res.kind}
    payload["n_evaluated"] = res.cm.total
    payload.update(summary_to_dict(res.summary, classes))
    return dump_yaml(payload)


def curve_files(
    res: ModelResult, classes, svg: bool = True, figures: bool = True
) -> dict[str, str | bytes]:
    """File name -> content for one model's ROC and gain charts.

    One CSV per class per chart kind, always, header-only when the
    curve is undefined; SVG only for defined curves; one PNG overlay
    per chart kind when any curve is defined.
    """
    name = "voted" if res.kind == "committee" else res.name
    files: dict[str, str | bytes] = {}
    for chart, curves in ((ROC, res.roc_curves), (GAIN, res.gain_curves)):
        drawn = []
        for label, curve in zip(classes, curves):
            stem = f"{chart}_{name}_{label}"
            points = curve.points if curve is not None else ()
            files[f"{stem}.csv"] = curve_csv(points)
            if curve is not None:
                drawn.append((label, curve.points))
                if svg:
                    files[f"{stem}.svg"] = render_svg(curve.points, chart, baseline=True)
        if figures and drawn:
            files[f"{chart}_{name}.png"] = curves_png(
                drawn, chart, f"{chart} by class ({name})"
            )
    return files


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    """Execute every stage and write the report bundle.

    Stages: load or generate data, chi-square screening at alpha, drop
    rejected features, train the configured models, evaluate per the
    evaluation mode, vote the committee, then write all artifacts and
    print the accuracy table.
    """
    data = load_input(config)
    if len(set(data.target_values())) < 2:
        raise DegenerateDataError("data stage: only one target class present")

    report = select_features(data, config.alpha)
    retained = report.retained_features()
    if not retained:
        raise DegenerateDataError("feature selection: no features retained")
    screened = data.drop_columns(report.dropped_features())

    if config.evaluation == RESUBSTITUTION:
        train_data = eval_data = screened
    else:
        _, args = parse_call(config.evaluation)
        fraction = _call_float(args, "test_fraction", "evaluation split")
        split_seed = _call_int(args, "seed", "evaluation split")
        train_data, eval_data = stratified_split(
            screened, fraction, SeededRng(split_seed)
        )

    trained: dict[str, object] = {}
    results = []
    for i, spec in enumerate(config.models, start=1):
        seed = derive_seed(config.master_seed, i)
        model = train_model(spec, train_data, seed, workers=config.workers)
        trained[spec.name] = model
        results.append(evaluate_model(spec.name, spec.kind, model, eval_data))

    voted_model = committee([trained[name] for name in config.committee_members])
    voted = evaluate_model("voted", "committee", voted_model, eval_data)

    classes = eval_data.schema.classes
    files: dict[str, str | bytes] = {"features.csv": report.to_csv()}
    table_rows = []
    for res in results + [voted]:
        name = "voted" if res.kind == "committee" else res.name
        files[f"{name}_summary.yaml"] = _summary_yaml(res, classes)
        files[f"{name}_confusion.csv"] = _confusion_csv(res.cm)
        files.update(curve_files(res, classes, config.svg, config.figures))
        correct = sum(res.cm.counts[k][k] for k in range(len(classes)))
        table_rows.append(
            [
                "Voted" if res.kind == "committee" else res.name,
                percent_str(correct, res.cm.total),
                format_fixed(res.summary.error_rate, 6),
                format_fixed(res.summary.std_error, 6),
            ]
        )
    files["voted_frequency.txt"] = frequency_report(voted.cm)
    files["voted_frequency.csv"] = frequency_csv(voted.cm)

    accuracy_rows = ["model,accuracy,error_rate,std_error"]
    for row in table_rows:
        accuracy_rows.append(",".join(row))
    files["accuracy.csv"] = "\n".join(accuracy_rows) + "\n"

    out_dir = config.base_dir / config.output_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputWriteError(f"cannot create output dir {out_dir}: {exc}") from exc
    for rel, content in sorted(files.items()):
        target = out_dir / rel
        try:
            if isinstance(content, bytes):
                target.write_bytes(content)
            else:
                target.write_text(content, encoding="utf-8")
        except OSError as exc:
            raise OutputWriteError(f"cannot write {target}: {exc}") from exc

    table = accuracy_table(results + [voted])
    print(f"retained features: {', '.join(retained)}")
    print(table, end="")
    return ReportBundle(
        output_dir=out_dir,
        feature_report=report,
        results=tuple(results),
        voted=voted,
        files=tuple(sorted(files)),
        table=table,
    )
