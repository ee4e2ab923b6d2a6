"""Side-by-side model comparison on one instance.

One row per model: objective, served count, service rate, trip count, travel
distance, and the waiting-time figures. Rows for models whose prerequisites
the instance lacks carry the error text while the remaining rows still
compute. Numbers print with six decimals; the CSV column order is fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ConfigError, Instance, validate_instance
from .plans import MetricsReport, compute_metrics
from .solvers import SolveReport, SolverConfig, solve_f1, solve_f2, solve_f2_lex, solve_f3, solve_f4

MODELS = ("F1", "F2", "F2LEX", "F3", "F4")
_SOLVERS = {
    "F1": solve_f1,
    "F2": solve_f2,
    "F2LEX": solve_f2_lex,
    "F3": solve_f3,
    "F4": solve_f4,
}

CSV_COLUMNS = (
    "model",
    "objective",
    "served",
    "service_rate",
    "trips",
    "distance",
    "avg_wait",
    "max_wait",
    "wait_variability",
)


@dataclass(frozen=True)
class ModelRow:
    model: str
    error: str | None = None
    report: SolveReport | None = None
    metrics: MetricsReport | None = None


def compare_models(inst: Instance, cfg: SolverConfig | None = None) -> list[ModelRow]:
    inst = validate_instance(inst)
    cfg = cfg or SolverConfig()
    rows: list[ModelRow] = []
    for model in MODELS:
        try:
            report = _SOLVERS[model](inst, cfg)
        except ConfigError as exc:
            rows.append(ModelRow(model=model, error=str(exc)))
            continue
        rows.append(ModelRow(model=model, report=report, metrics=compute_metrics(inst, report.plan)))
    return rows


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6f}"


def _row_cells(row: ModelRow) -> list[str]:
    if row.error is not None:
        return [row.model, f"error: {row.error}"] + [""] * (len(CSV_COLUMNS) - 2)
    m = row.metrics
    return [
        row.model,
        _fmt(row.report.objective),
        str(m.served),
        _fmt(m.service_rate),
        str(m.trips),
        _fmt(m.distance),
        _fmt(m.avg_wait),
        _fmt(m.max_wait),
        _fmt(m.wait_variability),
    ]


def rows_to_csv(rows: list[ModelRow]) -> str:
    out = [",".join(CSV_COLUMNS)]
    for row in rows:
        out.append(",".join(_row_cells(row)))
    return "\n".join(out) + "\n"


def rows_to_text(rows: list[ModelRow]) -> str:
    cells = [list(CSV_COLUMNS)] + [_row_cells(r) for r in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(CSV_COLUMNS))]
    lines = []
    for line in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    return "\n".join(lines) + "\n"


def rows_to_dict(rows: list[ModelRow]) -> list[dict]:
    out = []
    for row in rows:
        if row.error is not None:
            out.append({"model": row.model, "error": row.error})
            continue
        m = row.metrics
        out.append(
            {
                "model": row.model,
                "objective": row.report.objective,
                "optimal": row.report.optimal,
                "served": m.served,
                "service_rate": m.service_rate,
                "trips": m.trips,
                "distance": m.distance,
                "avg_wait": m.avg_wait,
                "max_wait": m.max_wait,
                "min_wait": m.min_wait,
                "wait_variability": m.wait_variability,
            }
        )
    return out
