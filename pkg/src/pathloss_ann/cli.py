"""Command-line interface: generate, train, predict, evaluate, sweep.

Settings come from an optional TOML/JSON file (``--config``) and are
overridden by flags. Exit codes: 0 success, 2 configuration error, 3 I/O
error (including unreadable data or model files), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import data, experiment, mlp, model_io, optimizer, reports
from .numeric import Rng, derive_seed

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

# sub-seed streams owned by the CLI (experiment uses 1-3)
STREAM_DATA = 0
STREAM_TRAIN = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _config_error(msg: str) -> CliError:
    return CliError(msg, EXIT_CONFIG)


# configuration

DEFAULTS = {
    "seed": 0,
    "out_dir": "out",
    "jobs": 1,
    "data": {
        "csv": None,
        "preset": "area-b-analog",
        "samples_per_frequency": None,
        "noise_sigma": None,
        "generator": None,
    },
    "network": mlp.NetworkConfig().to_dict(),
    "optimizer": {**optimizer.OptimizerConfig().to_dict(), "method": "lbfgs"},
    "experiment": {
        "baseline_variant": "joint",
        "baseline_protocol": "test",
        "axis": "layers",
        "grid": None,
        "activations": list(experiment.ACTIVATIONS),
    },
}

# flag dest -> (section, key); section None means top level
FLAG_MAP = {
    "seed": (None, "seed"),
    "out_dir": (None, "out_dir"),
    "jobs": (None, "jobs"),
    "csv": ("data", "csv"),
    "preset": ("data", "preset"),
    "samples_per_frequency": ("data", "samples_per_frequency"),
    "noise_sigma": ("data", "noise_sigma"),
    "activation": ("network", "activation"),
    "hidden_layers": ("network", "hidden_layers"),
    "hidden_nodes": ("network", "hidden_nodes"),
    "alpha": ("network", "l2_alpha"),
    "method": ("optimizer", "method"),
    "memory": ("optimizer", "memory"),
    "max_iterations": ("optimizer", "max_iterations"),
    "tolerance": ("optimizer", "tolerance"),
    "learning_rate": ("optimizer", "learning_rate"),
    "wolfe_c1": ("optimizer", "wolfe_c1"),
    "wolfe_c2": ("optimizer", "wolfe_c2"),
    "max_line_search_steps": ("optimizer", "max_line_search_steps"),
    "baseline_variant": ("experiment", "baseline_variant"),
    "baseline_protocol": ("experiment", "baseline_protocol"),
    "axis": ("experiment", "axis"),
    "grid": ("experiment", "grid"),
    "activations": ("experiment", "activations"),
}


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc.strerror or exc}", EXIT_IO) from exc
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(raw.decode("utf-8"))
        else:
            doc = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise _config_error(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise _config_error(f"config file {path} must contain a table/object")
    return doc


def resolve_config(file_doc: dict | None, flags: dict) -> dict:
    """Defaults, then the config file, then flags."""
    resolved = json.loads(json.dumps(DEFAULTS))
    for key, value in (file_doc or {}).items():
        if key not in resolved:
            raise _config_error(f"unknown config key {key!r}")
        if isinstance(resolved[key], dict):
            if not isinstance(value, dict):
                raise _config_error(f"config section {key!r} must be a table")
            unknown = set(value) - set(resolved[key])
            if unknown:
                raise _config_error(f"unknown keys in [{key}]: {sorted(unknown)}")
            resolved[key].update(value)
        else:
            resolved[key] = value
    for dest, value in flags.items():
        if dest not in FLAG_MAP:
            continue
        section, key = FLAG_MAP[dest]
        if section is None:
            resolved[key] = value
        else:
            resolved[section][key] = value
    if flags.get("csv") is not None and "preset" not in flags:
        resolved["data"]["preset"] = None
    if flags.get("preset") is not None and "csv" not in flags:
        resolved["data"]["csv"] = None
    return resolved


def network_config(resolved: dict) -> mlp.NetworkConfig:
    try:
        return mlp.NetworkConfig.from_dict(resolved["network"])
    except (KeyError, TypeError, ValueError) as exc:
        raise _config_error(f"invalid network settings: {exc}") from exc


def optimizer_config(resolved: dict) -> tuple[optimizer.OptimizerConfig, str]:
    settings = dict(resolved["optimizer"])
    method = settings.pop("method", "lbfgs")
    if method not in ("lbfgs", "gd"):
        raise _config_error(f"unknown method {method!r}; expected lbfgs or gd")
    try:
        return optimizer.OptimizerConfig.from_dict(settings), method
    except (TypeError, ValueError) as exc:
        raise _config_error(f"invalid optimizer settings: {exc}") from exc


def generator_config(resolved: dict) -> data.GeneratorConfig:
    d = resolved["data"]
    overrides = {}
    if d.get("generator"):
        overrides.update(d["generator"])
    for key in ("samples_per_frequency", "noise_sigma"):
        if d.get(key) is not None:
            overrides[key] = d[key]
    overrides["seed"] = derive_seed(int(resolved["seed"]), STREAM_DATA)
    try:
        if d.get("preset"):
            return data.preset(d["preset"], **overrides)
        return data.GeneratorConfig.from_dict(overrides)
    except (TypeError, ValueError) as exc:
        raise _config_error(f"invalid generator settings: {exc}") from exc


def load_dataset(resolved: dict) -> data.Dataset:
    d = resolved["data"]
    if d.get("csv"):
        try:
            return data.load_csv(d["csv"])
        except OSError as exc:
            raise CliError(f"cannot read {d['csv']}: {exc.strerror or exc}", EXIT_IO) from exc
        except data.DataError as exc:
            raise CliError(str(exc), EXIT_IO) from exc
    if d.get("preset") or d.get("generator"):
        return data.generate(generator_config(resolved))
    raise _config_error("no data source: give --csv or --preset")


def split_dataset(resolved: dict, ds: data.Dataset) -> data.SplitDataset:
    try:
        return data.split(ds, derive_seed(int(resolved["seed"]), experiment.STREAM_SPLIT))
    except data.DataError as exc:
        raise _config_error(str(exc)) from exc


def _parse_list(text, cast):
    if text is None or isinstance(text, list):
        return text
    return [cast(v) for v in str(text).split(",") if v.strip()]


def _out_dir(resolved: dict) -> Path:
    out = Path(resolved["out_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out}: {exc.strerror or exc}", EXIT_IO) from exc
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc


# commands


def cmd_generate(args, resolved) -> int:
    cfg = generator_config(resolved)
    if not resolved["data"].get("preset") and not resolved["data"].get("generator"):
        raise _config_error("generate needs --preset or a [data.generator] table")
    ds = data.generate(cfg)
    name = resolved["data"].get("preset") or "generated"
    path = Path(args.output) if getattr(args, "output", None) else _out_dir(resolved) / f"{name}.csv"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        data.write_csv(ds, path)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc
    print(f"wrote {len(ds)} rows to {path}")
    return EXIT_OK


def cmd_train(args, resolved) -> int:
    net_cfg = network_config(resolved)
    opt, method = optimizer_config(resolved)
    ds = load_dataset(resolved)
    sp = split_dataset(resolved, ds)
    try:
        transform = data.fit_transform(sp.learn)
    except data.DataError as exc:
        raise _config_error(str(exc)) from exc
    seed = derive_seed(int(resolved["seed"]), STREAM_TRAIN)
    net = mlp.init_weights(net_cfg, Rng(seed))
    x, y = transform.apply(sp.learn), sp.learn.targets()
    trained, result = optimizer.train(net, x, y, opt, method)
    summary = {**result.summary(), "method": method}
    for name, part in (("validation", sp.validation), ("test", sp.test)):
        if len(part):
            summary[f"rmse_{name}"] = experiment.rmse(mlp.predict(trained, transform.apply(part)), part.targets())
    saved = model_io.SavedModel(trained, transform, seed, summary, resolved)
    if getattr(args, "model_out", None):
        model_path = Path(args.model_out)
    else:
        model_path = _out_dir(resolved) / "model.json"
    _write(model_path, model_io.dumps(saved))
    log = "iteration,loss\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(result.loss_history))
    _write(model_path.with_name(model_path.stem + "_training_log.csv"), log)
    print(
        f"trained {net_cfg.activation.value} {net_cfg.hidden_layers}x{net_cfg.hidden_nodes} "
        f"({method}): loss {result.loss:.6g} after {result.iterations} iterations ({result.reason})"
    )
    for key in ("rmse_validation", "rmse_test"):
        if key in summary:
            print(f"{key.replace('_', ' ')}: {summary[key]:.5f} dB")
    print(f"model written to {model_path}")
    return EXIT_OK


def cmd_predict(args, resolved) -> int:
    if not (args.distance > 0 and args.frequency > 0):
        raise _config_error("distance and frequency must be > 0")
    try:
        model = model_io.load(args.model)
    except OSError as exc:
        raise CliError(f"cannot read model {args.model}: {exc.strerror or exc}", EXIT_IO) from exc
    except model_io.ModelFormatError as exc:
        raise CliError(f"{args.model}: {exc}", EXIT_IO) from exc
    print(repr(model.predict(args.distance, args.frequency)))
    return EXIT_OK


def _variants(resolved: dict) -> dict[str, mlp.NetworkConfig]:
    alpha = network_config(resolved).l2_alpha
    variants = experiment.default_variants(alpha)
    wanted = _parse_list(resolved["experiment"].get("activations"), str) or list(variants)
    unknown = set(wanted) - set(variants)
    if unknown:
        raise _config_error(f"unknown activations {sorted(unknown)}")
    return {k: variants[k] for k in wanted}


def cmd_evaluate(args, resolved) -> int:
    opt, method = optimizer_config(resolved)
    exp = resolved["experiment"]
    variants = _variants(resolved)
    sp = split_dataset(resolved, load_dataset(resolved))
    try:
        report = experiment.evaluate(
            sp, variants, opt, seed=int(resolved["seed"]), method=method,
            baseline_variant=exp["baseline_variant"], baseline_protocol=exp["baseline_protocol"],
        )
    except data.DataError as exc:
        raise _config_error(str(exc)) from exc
    try:
        paths = reports.emit_report(report, _out_dir(resolved), run_config=resolved)
    except OSError as exc:
        raise CliError(f"cannot write report: {exc}", EXIT_IO) from exc
    header = f"{'area':>5} {'freq':>8} {'baseline':>9} " + " ".join(f"{v:>9}" for v in report.variants)
    print(header)
    for r in report.rows:
        freq = "overall" if r.frequency is None else f"{r.frequency:g}"
        print(f"{r.area:>5} {freq:>8} {r.rmse_baseline:9.4f} "
              + " ".join(f"{r.rmse[v]:9.4f}" for v in report.variants))
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_sweep(args, resolved) -> int:
    opt, method = optimizer_config(resolved)
    exp = resolved["experiment"]
    axis = exp["axis"]
    if axis not in ("layers", "nodes"):
        raise _config_error(f"unknown sweep axis {axis!r}; expected layers or nodes")
    grid = _parse_list(exp.get("grid"), int)
    if grid is None:
        grid = list(experiment.DEFAULT_LAYER_GRID if axis == "layers" else experiment.DEFAULT_NODE_GRID)
    activations = _parse_list(exp.get("activations"), str) or list(experiment.ACTIVATIONS)
    base = network_config(resolved)
    if axis == "nodes":
        base = replace(base, hidden_layers=1)
    sp = split_dataset(resolved, load_dataset(resolved))
    jobs = int(resolved["jobs"])
    if jobs < 1:
        raise _config_error("--jobs must be >= 1")
    try:
        sweep = experiment.layer_sweep if axis == "layers" else experiment.node_sweep
        report = sweep(sp, activations, grid, base, opt, seed=int(resolved["seed"]),
                       method=method, jobs=jobs)
    except ValueError as exc:
        raise _config_error(str(exc)) from exc
    try:
        paths = reports.emit_report(report, _out_dir(resolved), run_config=resolved)
    except OSError as exc:
        raise CliError(f"cannot write report: {exc}", EXIT_IO) from exc
    table = report.rmse_table()
    print(f"{axis:>6} " + " ".join(f"{a:>9}" for a in report.activations))
    for i, v in enumerate(report.grid):
        cells = ["failed" if table[a][i] is None else f"{table[a][i]:.4f}" for a in report.activations]
        print(f"{v:>6} " + " ".join(f"{c:>9}" for c in cells))
    print("chosen: " + ", ".join(f"{a}={v}" for a, v in report.chosen.items()))
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


# argument parsing


def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="TOML or JSON settings file")
    g.add_argument("--seed", type=int, help="master seed; all other seeds derive from it")
    g.add_argument("--out-dir", dest="out_dir", help="directory for output files")
    g.add_argument("--jobs", type=int, help="parallel sweep points")
    return p


def _data_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("data")
    g.add_argument("--csv", help="measurement CSV (distance_m,frequency_mhz,path_loss_db,area)")
    g.add_argument("--preset", help=f"synthetic data preset: {', '.join(sorted(data.PRESETS))}")
    g.add_argument("--samples-per-frequency", dest="samples_per_frequency", type=int)
    g.add_argument("--noise-sigma", dest="noise_sigma", type=float, help="shadowing std (dB)")
    return p


def _model_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("network and optimizer")
    g.add_argument("--activation", choices=[a.value for a in mlp.Activation])
    g.add_argument("--hidden-layers", dest="hidden_layers", type=int)
    g.add_argument("--hidden-nodes", dest="hidden_nodes", type=int)
    g.add_argument("--alpha", type=float, help="L2 penalty strength")
    g.add_argument("--method", choices=["lbfgs", "gd"])
    g.add_argument("--memory", type=int, help="L-BFGS history pairs")
    g.add_argument("--max-iterations", dest="max_iterations", type=int)
    g.add_argument("--tolerance", type=float)
    g.add_argument("--learning-rate", dest="learning_rate", type=float, help="gradient descent step")
    g.add_argument("--wolfe-c1", dest="wolfe_c1", type=float)
    g.add_argument("--wolfe-c2", dest="wolfe_c2", type=float)
    g.add_argument("--max-line-search-steps", dest="max_line_search_steps", type=int)
    return p


def build_parser() -> argparse.ArgumentParser:
    glob = _global_options()
    dat = _data_options()
    mod = _model_options()
    parser = argparse.ArgumentParser(
        prog="pathloss-ann",
        description="Neural-network path loss regression against a log-distance baseline.",
        parents=[glob],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[glob, dat], help="write a synthetic measurement CSV",
                       argument_default=argparse.SUPPRESS)
    g.add_argument("--output", help="CSV path (default: OUT_DIR/PRESET.csv)")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", parents=[glob, dat, mod], help="train one network and save it",
                       argument_default=argparse.SUPPRESS)
    t.add_argument("--model-out", dest="model_out", help="model path (default: OUT_DIR/model.json)")
    t.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[glob], help="predict path loss (dB) from a saved model",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("model", help="model JSON written by `train`")
    p.add_argument("--distance", type=float, required=True, help="metres")
    p.add_argument("--frequency", type=float, required=True, help="MHz")
    p.set_defaults(func=cmd_predict)

    e = sub.add_parser("evaluate", parents=[glob, dat, mod], help="test-split RMSE table",
                       argument_default=argparse.SUPPRESS)
    e.add_argument("--activations", help="comma-separated variants (default relu,sigmoid,tanh)")
    e.add_argument("--baseline-variant", dest="baseline_variant", choices=["joint", "per-frequency"])
    e.add_argument("--baseline-protocol", dest="baseline_protocol", choices=["test", "all"])
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", parents=[glob, dat, mod], help="validation RMSE over layers or nodes",
                       argument_default=argparse.SUPPRESS)
    s.add_argument("--axis", choices=["layers", "nodes"])
    s.add_argument("--grid", help="comma-separated grid values")
    s.add_argument("--activations", help="comma-separated activations")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (argparse exits 2) and --help (0)
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command", "config")}
    try:
        file_doc = read_config_file(args.config) if getattr(args, "config", None) else None
        resolved = resolve_config(file_doc, flags)
        return args.func(args, resolved)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except optimizer.NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except optimizer.NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except data.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
