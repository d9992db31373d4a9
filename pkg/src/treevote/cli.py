"""Command-line interface.

Usage: ``treevote <subcommand> --config <path> [--out <dir>] [--seed <u64>]``

Subcommands run the full pipeline or any stage standalone on
serialized intermediates:

- ``gen``       write a synthetic worker CSV and its schema
- ``select``    chi-square feature screening report
- ``train``     train configured models, serialize each to YAML
- ``evaluate``  score one serialized model on a dataset
- ``pipeline``  run every stage and write the report bundle
- ``render``    turn a 2-column point CSV into an SVG chart

All configuration is explicit YAML; no environment variables are
consulted. Exit codes: 0 success, 1 config parse, 2 data load,
3 degenerate data, 4 output write failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .data import write_csv
from .errors import (
    ConfigError,
    DataLoadError,
    SchemaMismatchError,
    TreevoteError,
)
from .figures import GAIN, ROC, render_svg
from .pipeline import (
    curve_files,
    evaluate_model,
    load_input,
    parse_config,
    run_pipeline,
    train_model,
)
from .rng import derive_seed
from .serialize import (
    dump_yaml,
    load_yaml,
    model_from_yaml,
    model_to_yaml,
    schema_to_yaml,
)
from .synth import generate_workers

_SUBCOMMANDS = ("gen", "select", "train", "evaluate", "pipeline", "render")


class _Parser(argparse.ArgumentParser):
    """Argument errors surface as config errors (exit code 1)."""

    def error(self, message: str):
        raise ConfigError(f"argument error: {message}")


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treevote", description=__doc__.split("\n")[0])
    parser.add_argument(
        "--version", action="version", version=f"treevote {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    helps = {
        "gen": "generate a synthetic worker dataset",
        "select": "run chi-square feature screening",
        "train": "train the configured models",
        "evaluate": "evaluate a serialized model on a dataset",
        "pipeline": "run the full pipeline and write the report bundle",
        "render": "render a point CSV as an SVG chart",
    }
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, help="YAML config path")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=_u64, help="seed override")
    return parser


def _load_payload(path: str) -> tuple[dict, Path]:
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    payload = load_yaml(text)
    if not isinstance(payload, dict):
        raise ConfigError(f"config {config_path}: must be a mapping")
    return payload, config_path.parent


def _out_dir(out_arg: str | None, payload: dict, base_dir: Path) -> Path:
    if out_arg is not None:
        return Path(out_arg)
    return base_dir / str(payload.get("output_dir", "report"))


def _write_files(out_dir: Path, files: dict) -> None:
    from .errors import OutputWriteError

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


def _require_int(payload: dict, key: str, default=None) -> int:
    if key not in payload:
        if default is None:
            raise ConfigError(f"config: missing field {key!r}")
        return default
    value = payload[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"config: {key} must be an integer")
    return value


def _cmd_gen(payload: dict, base_dir: Path, out, seed) -> int:
    gen_seed = seed if seed is not None else _require_int(payload, "seed", 0)
    n = _require_int(payload, "n", 121)
    data = generate_workers(gen_seed, n)
    out_dir = _out_dir(out, payload, base_dir)
    _write_files(
        out_dir,
        {"workers.csv": write_csv(data), "schema.yaml": schema_to_yaml(data.schema)},
    )
    print(f"wrote {data.n_rows} rows to {out_dir / 'workers.csv'}")
    return 0


def _cmd_select(payload: dict, base_dir: Path, out, seed) -> int:
    from .chisquare import select_features

    config = parse_config(payload, base_dir)
    data = load_input(config)
    report = select_features(data, config.alpha)
    out_dir = _out_dir(out, payload, base_dir)
    _write_files(out_dir, {"features.csv": report.to_csv()})
    retained = report.retained_features()
    dropped = report.dropped_features()
    print(f"retained ({len(retained)}): {', '.join(retained) or '-'}")
    print(f"dropped ({len(dropped)}): {', '.join(dropped) or '-'}")
    return 0


def _cmd_train(payload: dict, base_dir: Path, out, seed) -> int:
    config = parse_config(payload, base_dir)
    if seed is not None:
        config = replace(config, master_seed=seed)
    data = load_input(config)
    files: dict[str, str] = {}
    for i, spec in enumerate(config.models, start=1):
        model = train_model(
            spec, data, derive_seed(config.master_seed, i), workers=config.workers
        )
        files[f"{spec.name}_model.yaml"] = model_to_yaml(model)
    out_dir = _out_dir(out, payload, base_dir)
    _write_files(out_dir, files)
    for spec in config.models:
        print(f"trained {spec.name} ({spec.kind})")
    return 0


def _cmd_evaluate(payload: dict, base_dir: Path, out, seed) -> int:
    from .metrics import frequency_report
    from .serialize import summary_to_dict

    config = parse_config(payload, base_dir)
    if "model" not in payload:
        raise ConfigError("config: missing field 'model'")
    model_path = base_dir / str(payload["model"])
    try:
        model_text = model_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read model {model_path}: {exc}") from exc
    model = model_from_yaml(model_text)
    data = load_input(config)

    model_classes = (
        model.class_order
        if hasattr(model, "class_order")
        else tuple(model.schema.classes)
    )
    if tuple(data.schema.classes) != tuple(model_classes):
        raise SchemaMismatchError(
            f"model classes {list(model_classes)} do not match data classes "
            f"{list(data.schema.classes)}"
        )

    name = str(payload.get("name", model_path.stem.removesuffix("_model")))
    result = evaluate_model(name, getattr(model, "kind", "model"), model, data)
    classes = data.schema.classes
    files: dict[str, str | bytes] = {
        f"{name}_summary.yaml": dump_yaml(
            {"name": name, "kind": result.kind, "n_evaluated": result.cm.total}
            | summary_to_dict(result.summary, classes)
        ),
        f"{name}_confusion.csv": _confusion_csv_text(result.cm),
        f"{name}_frequency.txt": frequency_report(result.cm),
    }
    files.update(
        curve_files(
            result,
            classes,
            bool(payload.get("svg", True)),
            bool(payload.get("figures", True)),
        )
    )
    _write_files(_out_dir(out, payload, base_dir), files)
    correct = sum(result.cm.counts[k][k] for k in range(len(classes)))
    print(f"{name}: accuracy {correct}/{result.cm.total}")
    return 0


def _confusion_csv_text(cm) -> str:
    lines = ["actual," + ",".join(cm.classes)]
    for label, row in zip(cm.classes, cm.counts):
        lines.append(label + "," + ",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def _cmd_pipeline(payload: dict, base_dir: Path, out, seed) -> int:
    config = parse_config(payload, base_dir)
    if seed is not None:
        config = replace(config, master_seed=seed)
    if out is not None:
        config = replace(config, output_dir=str(Path(out).resolve()))
    run_pipeline(config)
    return 0


def _read_points(path: Path) -> list[tuple[float, float]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read points {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or [cell.strip() for cell in rows[0]] != ["x", "y"]:
        raise DataLoadError(f"points {path}: expected header 'x,y'")
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise DataLoadError(f"points {path} line {lineno}: expected 2 columns")
        try:
            points.append((float(row[0]), float(row[1])))
        except ValueError:
            raise DataLoadError(
                f"points {path} line {lineno}: cannot parse coordinates"
            ) from None
    return points


def _cmd_render(payload: dict, base_dir: Path, out, seed) -> int:
    if "points" not in payload:
        raise ConfigError("config: missing field 'points'")
    kind = str(payload.get("kind", ROC))
    if kind not in (ROC, GAIN):
        raise ConfigError(f"config: kind must be '{ROC}' or '{GAIN}', got {kind!r}")
    baseline = bool(payload.get("baseline", False))
    points = _read_points(base_dir / str(payload["points"]))
    try:
        svg = render_svg(points, kind, baseline=baseline)
    except ValueError as exc:
        raise DataLoadError(f"render: {exc}") from exc
    name = str(payload.get("output", f"{kind}.svg"))
    _write_files(_out_dir(out, payload, base_dir), {name: svg})
    print(f"rendered {len(points)} points ({kind})")
    return 0


_HANDLERS = {
    "gen": _cmd_gen,
    "select": _cmd_select,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "pipeline": _cmd_pipeline,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        payload, base_dir = _load_payload(args.config)
        return _HANDLERS[args.command](payload, base_dir, args.out, args.seed)
    except TreevoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
