"""CSV and JSON writers for trajectories, manifold traces and curves.

CSV files carry a header row, ``#``-prefixed metadata lines (the run
configuration before the header, the outcome after the data), and floats in
shortest round-trip form, so ``write_table(read_table(text))`` reproduces
the file byte for byte.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

__all__ = [
    "Table",
    "fmt",
    "write_table",
    "read_table",
    "to_json",
    "trajectory_table",
    "trajectory_json",
    "manifold_table",
    "curve_table",
]


def fmt(v: Any) -> str:
    """Shortest decimal that round-trips; ints and strings pass through."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


@dataclass
class Table:
    columns: list[str]
    rows: list[list[str]]
    header_meta: list[str] = field(default_factory=list)
    footer_meta: list[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([float(r[j]) for r in self.rows])


def make_table(columns: Sequence[str], data: Sequence[Sequence[Any]], *, header=(), footer=()) -> Table:
    return Table(list(columns), [[fmt(v) for v in row] for row in data], list(header), list(footer))


def write_table(table: Table) -> str:
    lines = [f"# {m}" for m in table.header_meta]
    lines.append(",".join(table.columns))
    lines.extend(",".join(r) for r in table.rows)
    lines.extend(f"# {m}" for m in table.footer_meta)
    return "\n".join(lines) + "\n"


def read_table(text: str) -> Table:
    header_meta: list[str] = []
    footer_meta: list[str] = []
    columns: list[str] | None = None
    rows: list[list[str]] = []
    for line in text.splitlines():
        if line.startswith("# ") or line == "#":
            (header_meta if columns is None else footer_meta).append(line[2:])
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    if columns is None:
        raise ValueError("no header row")
    return Table(columns, rows, header_meta, footer_meta)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def to_json(config: dict, results: Any, stats: dict) -> str:
    return json.dumps(
        {"config": _jsonable(config), "results": _jsonable(results), "stats": _jsonable(stats)},
        indent=2,
    ) + "\n"


def _meta_line(key: str, payload: dict) -> str:
    return f"{key}: " + json.dumps(_jsonable(payload), sort_keys=True)


def trajectory_table(traj, config: dict | None = None) -> Table:
    from .dynamics import outcome_to_dict

    e = traj.energy()
    data = zip(traj.t, traj.x, traj.y, e)
    header = [_meta_line("config", config)] if config else []
    footer = [
        _meta_line("outcome", outcome_to_dict(traj.outcome)),
        _meta_line("stats", {
            "steps": traj.stats.steps,
            "rejected_steps": traj.stats.rejected_steps,
            "min_gap": traj.stats.min_gap,
        }),
    ]
    return make_table(["t", "x", "y", "E"], list(data), header=header, footer=footer)


def trajectory_json(traj) -> dict:
    from .dynamics import outcome_to_dict

    return {
        "params": {"lambda": traj.params.lam, "alpha": traj.params.alpha},
        "samples": {"t": traj.t, "x": traj.x, "y": traj.y, "E": traj.energy()},
        "outcome": outcome_to_dict(traj.outcome),
        "stats": {
            "steps": traj.stats.steps,
            "rejected_steps": traj.stats.rejected_steps,
            "min_gap": traj.stats.min_gap,
        },
    }


def manifold_table(trace, config: dict | None = None) -> Table:
    header = [_meta_line("config", config)] if config else []
    footer = [_meta_line("crossing", {"u_bar": trace.crossing, "x_bar": trace.x_bar,
                                      "horizon": trace.horizon, "mu_plus": trace.mu_plus})]
    return make_table(["u", "phi"], list(zip(trace.u_samples, trace.phi_samples)),
                      header=header, footer=footer)


def curve_table(curve, config: dict | None = None) -> Table:
    header = [_meta_line("config", config)] if config else []
    rows = [(p.alpha, p.lambda_d, p.half_width, p.method.value) for p in curve.points]
    footer = [_meta_line("failure", {"alpha": p.alpha, "error": p.error}) for p in curve.failures]
    return make_table(["alpha", "lambda_d", "half_width", "method"], rows, header=header, footer=footer)
