"""Shared solver plumbing: configuration, reports, and search budgets."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from ..core import Instance
from ..plans import Plan, plan_to_dict


@dataclass(frozen=True)
class SolverConfig:
    """Search limits. ``max_trips`` falls back to the instance default."""

    max_trips: int | None = None
    time_limit: float | None = None
    node_limit: int | None = None

    def trips_cap(self, inst: Instance) -> int:
        cap = self.max_trips if self.max_trips is not None else inst.max_trips
        if cap is None:
            cap = max(1, len(inst.orders))
        if cap < 1:
            raise ValueError("max_trips must be >= 1")
        return cap


@dataclass(frozen=True)
class SolveReport:
    objective: float
    plan: Plan
    optimal: bool
    nodes_explored: int
    runtime: float
    bound_gap: float


@dataclass(frozen=True)
class SlotSolution(SolveReport):
    """Solve report for the deadline-option models, with charged prices.

    The charged price of a served order equals its willingness-to-pay for the
    chosen option, so ``prices`` maps order id to that amount.
    """

    prices: dict[int, float] = field(default_factory=dict)


class BudgetExhausted(Exception):
    """Internal signal: node or time limit hit; best incumbent stands."""


class Budget:
    """Node counter plus a coarse wall-clock check every 256 nodes."""

    def __init__(self, cfg: SolverConfig):
        self.node_limit = cfg.node_limit
        self.deadline = None if cfg.time_limit is None else time.perf_counter() + cfg.time_limit
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise BudgetExhausted
        if self.deadline is not None and self.nodes % 256 == 0 and time.perf_counter() > self.deadline:
            raise BudgetExhausted


def report_to_dict(report: SolveReport) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "objective": report.objective,
        "optimal": report.optimal,
        "nodes_explored": report.nodes_explored,
        "runtime": report.runtime,
        "bound_gap": report.bound_gap,
        "plan": plan_to_dict(report.plan),
    }
    if isinstance(report, SlotSolution):
        doc["prices"] = {str(k): v for k, v in sorted(report.prices.items())}
        doc["options"] = {
            str(oid): a.option_index for oid, a in sorted(report.plan.assignments.items())
        }
    if report.plan.model_kind in ("F3", "F4"):
        doc["stations"] = {
            str(oid): {"station": a.station_id, "pickup_time": a.delivery_time}
            for oid, a in sorted(report.plan.assignments.items())
        }
    return doc
