"""Writing experiment reports as JSON, CSV and whitespace-separated plot data."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional, Sequence, Union

from .experiment import ACTIVATIONS, SCHEMA_VERSION, EvalReport, SweepReport

Report = Union[EvalReport, SweepReport]
FORMATS = ("json", "csv", "plot-data")


def dumps_json(obj) -> str:
    """Canonical JSON: sorted keys, full-precision floats, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def report_json(report: Report, run_config: Optional[dict] = None) -> str:
    d = report.to_dict()
    if run_config is not None:
        d["run_config"] = run_config
    return dumps_json(d)


def load_report(path) -> Report:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported report schema {d.get('schema_version')}")
    d.pop("run_config", None)
    if d.get("kind") == "sweep":
        return SweepReport.from_dict(d)
    return EvalReport.from_dict(d)


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(report, SweepReport):
        table = report.rmse_table()
        w.writerow(["grid_value"] + [f"rmse_{a}" for a in report.activations])
        for i, v in enumerate(report.grid):
            w.writerow([v] + [_num(table[a][i]) for a in report.activations])
        return buf.getvalue()
    vs = report.variants
    w.writerow(
        ["area", "frequency_mhz", "n_test", "n_baseline", "rmse_baseline"]
        + [f"rmse_{v}" for v in vs]
        + [f"improvement_pct_{v}" for v in vs]
    )
    for r in report.rows:
        w.writerow(
            [r.area, "overall" if r.frequency is None else _num(r.frequency), r.n_test,
             r.n_baseline, _num(r.rmse_baseline)]
            + [_num(r.rmse[v]) for v in vs]
            + [_num(r.improvement[v]) for v in vs]
        )
    return buf.getvalue()


def _plot_num(v) -> str:
    return "nan" if v is None or not math.isfinite(v) else repr(float(v))


def report_plot_data(report: Report, run_config: Optional[dict] = None) -> str:
    lines = [f"# schema_version {SCHEMA_VERSION}"]
    if run_config is not None:
        lines.append("# run_config " + json.dumps(run_config, sort_keys=True, separators=(",", ":")))
    if isinstance(report, SweepReport):
        table = report.rmse_table()
        lines.append(f"# validation RMSE (dB) against number of hidden {report.axis}")
        lines.append("# grid_value rmse_relu rmse_sigmoid rmse_tanh")
        for i, v in enumerate(report.grid):
            cols = [table[a][i] if a in table else None for a in ACTIVATIONS]
            lines.append(" ".join([str(v)] + [_plot_num(c) for c in cols]))
        return "\n".join(lines) + "\n"
    vs = report.variants
    lines.append("# test RMSE (dB) per area and frequency; frequency 0 is the pooled row")
    lines.append("# " + " ".join(["area", "frequency_mhz", "rmse_baseline"] + [f"rmse_{v}" for v in vs]))
    for r in report.rows:
        lines.append(" ".join(
            [r.area or "-", _plot_num(0.0 if r.frequency is None else r.frequency), _plot_num(r.rmse_baseline)]
            + [_plot_num(r.rmse[v]) for v in vs]
        ))
    return "\n".join(lines) + "\n"


def emit_report(
    report: Report,
    out_dir,
    formats: Sequence[str] = FORMATS,
    stem: Optional[str] = None,
    run_config: Optional[dict] = None,
) -> list[Path]:
    """Write the report in each requested format; returns the paths written."""
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f"unknown report formats {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if stem is None:
        stem = f"sweep_{report.axis}" if isinstance(report, SweepReport) else "evaluation"
    written = []
    renderers = {
        "json": (".json", lambda: report_json(report, run_config)),
        "csv": (".csv", lambda: report_csv(report)),
        "plot-data": (".dat", lambda: report_plot_data(report, run_config)),
    }
    for fmt in FORMATS:
        if fmt not in formats:
            continue
        suffix, render = renderers[fmt]
        path = out_dir / f"{stem}{suffix}"
        path.write_text(render(), encoding="utf-8")
        written.append(path)
    return written
