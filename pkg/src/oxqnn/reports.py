"""Result tables and plot-ready series files.

Floats are written with ``repr`` so a table re-parses to the exact values
it was written from, and rows are emitted in a fixed order so repeated runs
produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .errors import InvalidArgumentError
from .expressibility import ExpressibilityReport
from .harness import CvResult, config_from_dict

CV_COLUMNS = ("label", "model", "n_parameters", "train_rmse_c", "test_rmse_c", "train_rmse", "test_rmse",
              "fold_seed", "fold_seeds", "status", "config")
FOLD_COLUMNS = ("label", "fold", "n_train", "n_test", "seed", "train_rmse_c", "test_rmse_c", "train_rmse",
                "test_rmse", "final_cost", "iterations", "trace_monotone")
SERIES_COLUMNS = ("series", "n_parameters", "train_rmse_c", "test_rmse_c")
EXPRESS_COLUMNS = ("ansatz",) + tuple(ExpressibilityReport.__dataclass_fields__)
KL_SERIES_COLUMNS = ("ansatz", "depth", "kl_divergence")
ENTROPY_SERIES_COLUMNS = ("ansatz", "depth", "mean_entanglement_entropy")
FORMATS = ("csv", "json")


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def parse_cell(text: str):
    """Inverse of the cell formatting: ints, floats and booleans come back typed."""
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def cell_label(config: dict) -> str:
    return config_from_dict(config).label


def series_label(config: dict) -> str:
    """Curve a cell belongs to: its label with the size axis (depth or architecture) removed."""
    kind = config.get("model", "qnn")
    if kind == "qnn":
        return f"qnn-{config['layout']}-{config['angle_map']}-{config['entangler']}-{config['gate']}"
    if kind == "mlp":
        return f"mlp-l2={config['l2_weight']!r}"
    return kind


def cv_rows(results: Sequence[CvResult]) -> list[dict]:
    rows = []
    for r in results:
        rows.append({
            "label": cell_label(r.config),
            "model": r.config.get("model", "qnn"),
            "n_parameters": r.n_parameters,
            "train_rmse_c": r.mean_train_rmse_c,
            "test_rmse_c": r.mean_test_rmse_c,
            "train_rmse": r.mean_train_rmse,
            "test_rmse": r.mean_test_rmse,
            "fold_seed": r.config.get("fold_seed", 0),
            "fold_seeds": ";".join(str(f.seed) for f in r.folds),
            "status": "ok" if r.ok else f"failed: {r.error}",
            "config": r.config,
        })
    return rows


def fold_rows(results: Sequence[CvResult]) -> list[dict]:
    rows = []
    for r in results:
        label = cell_label(r.config)
        for f in r.folds:
            rows.append({
                "label": label, "fold": f.fold, "n_train": f.n_train, "n_test": f.n_test, "seed": f.seed,
                "train_rmse_c": f.train_rmse_c, "test_rmse_c": f.test_rmse_c, "train_rmse": f.train_rmse,
                "test_rmse": f.test_rmse, "final_cost": f.final_cost, "iterations": f.iterations,
                "trace_monotone": f.trace_monotone,
            })
    return rows


def series_rows(results: Sequence[CvResult]) -> list[dict]:
    """Parameter count against mean RMSE, one curve per series, sorted for plotting."""
    rows = [{"series": series_label(r.config), "n_parameters": r.n_parameters,
             "train_rmse_c": r.mean_train_rmse_c, "test_rmse_c": r.mean_test_rmse_c}
            for r in results if r.ok]
    return sorted(rows, key=lambda row: (row["series"], row["n_parameters"]))


def express_rows(reports: Sequence[ExpressibilityReport]) -> list[dict]:
    return [{"ansatz": f"{r.entangler}-{r.gate}", **r.to_row()} for r in reports]


def format_table(rows: Sequence[dict], columns: Sequence[str], fmt: str = "csv") -> str:
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
        return out.getvalue()
    if fmt == "json":
        return "".join(json.dumps({c: row[c] for c in columns}, sort_keys=False) + "\n" for row in rows)
    raise InvalidArgumentError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")


def read_table(path) -> list[dict]:
    """Read a table written by :func:`emit_report` (either format)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".jsonl":
        return [json.loads(line) for line in text.splitlines() if line]
    rows = list(csv.DictReader(io.StringIO(text)))
    return [{k: (json.loads(v) if k == "config" else parse_cell(v)) for k, v in row.items()} for row in rows]


def _write(out_dir: Path, stem: str, rows, columns, fmt: str) -> Path:
    path = out_dir / f"{stem}.{'csv' if fmt == 'csv' else 'jsonl'}"
    path.write_text(format_table(rows, columns, fmt), encoding="utf-8")
    return path


def emit_report(items: Sequence[CvResult] | Sequence[ExpressibilityReport], out_dir, fmt: str = "csv") -> list[Path]:
    """Write result tables plus series files for plotting; returns the written paths.

    Cross-validation results give ``results``, ``folds`` and
    ``series_params_rmse`` (parameter count against train/test RMSE).
    Expressibility reports give ``expressibility``, ``series_kl`` and
    ``series_entropy`` (ansatz and depth against each metric).
    """
    items = list(items)
    if not items:
        raise InvalidArgumentError("nothing to report")
    if fmt not in FORMATS:
        raise InvalidArgumentError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if all(isinstance(i, CvResult) for i in items):
        return [
            _write(out_dir, "results", cv_rows(items), CV_COLUMNS, fmt),
            _write(out_dir, "folds", fold_rows(items), FOLD_COLUMNS, fmt),
            _write(out_dir, "series_params_rmse", series_rows(items), SERIES_COLUMNS, fmt),
        ]
    if all(isinstance(i, ExpressibilityReport) for i in items):
        rows = express_rows(items)
        ordered = sorted(rows, key=lambda r: (r["ansatz"], r["depth"]))
        return [
            _write(out_dir, "expressibility", rows, EXPRESS_COLUMNS, fmt),
            _write(out_dir, "series_kl", ordered, KL_SERIES_COLUMNS, fmt),
            _write(out_dir, "series_entropy", ordered, ENTROPY_SERIES_COLUMNS, fmt),
        ]
    raise InvalidArgumentError("cannot mix cross-validation results and expressibility reports")


def write_config_echo(config: dict, path) -> Path:
    """Canonical JSON of everything needed to repeat a run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
