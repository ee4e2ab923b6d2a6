"""Matplotlib rendering for the comparison and simulation reports.

Figures are written to files next to the delimited output; nothing here is
interactive, so the Agg backend is forced before pyplot loads.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .compare import ModelRow
from .core import Instance
from .dynamics import SimReport
from .plans import Plan

_TRIP_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown")


def _route_points(inst: Instance, plan: Plan, route: tuple[int, ...]) -> tuple[list[float], list[float]]:
    xs, ys = [], []
    station_kind = plan.model_kind in ("F3", "F4")
    for node in route:
        if node == 0:
            loc = inst.depot
        elif station_kind:
            loc = inst.station_by_id(node).loc
        else:
            loc = inst.order_by_id(node).loc
        xs.append(loc.x)
        ys.append(loc.y)
    return xs, ys


def plot_routes(inst: Instance, plan: Plan, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter([o.loc.x for o in inst.orders], [o.loc.y for o in inst.orders], c="black", s=28, label="orders", zorder=3)
    for o in inst.orders:
        ax.annotate(str(o.id), (o.loc.x, o.loc.y), textcoords="offset points", xytext=(4, 4), fontsize=8)
    if inst.stations:
        ax.scatter(
            [s.loc.x for s in inst.stations], [s.loc.y for s in inst.stations],
            c="tab:gray", s=70, marker="s", label="stations", zorder=3,
        )
        for s in inst.stations:
            ax.annotate(f"S{s.id}", (s.loc.x, s.loc.y), textcoords="offset points", xytext=(4, -10), fontsize=8)
    ax.scatter([inst.depot.x], [inst.depot.y], c="tab:red", s=90, marker="*", label="depot", zorder=4)
    for i, trip in enumerate(plan.trips):
        xs, ys = _route_points(inst, plan, trip.route)
        color = _TRIP_COLORS[i % len(_TRIP_COLORS)]
        ax.plot(xs, ys, "-", color=color, alpha=0.8, label=f"trip {i} (t={trip.start:.0f})")
    ax.set_title(title)
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_compare_figures(inst: Instance, rows: list[ModelRow], outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    solved = [r for r in rows if r.error is None]

    if solved:
        fig, axes = plt.subplots(2, 2, figsize=(10, 7))
        names = [r.model for r in solved]
        axes[0][0].bar(names, [r.metrics.served for r in solved], color="tab:blue")
        axes[0][0].set_title("orders served")
        axes[0][1].bar(names, [r.metrics.distance for r in solved], color="tab:orange")
        axes[0][1].set_title("travel distance")
        axes[1][0].bar(names, [r.metrics.avg_wait or 0.0 for r in solved], color="tab:green")
        axes[1][0].set_title("average waiting time")
        axes[1][1].bar(names, [r.metrics.wait_variability or 0.0 for r in solved], color="tab:red")
        axes[1][1].set_title("waiting-time variability")
        fig.tight_layout()
        path = outdir / "compare_metrics.png"
        fig.savefig(path, dpi=130)
        plt.close(fig)
        written.append(path)

    for row in solved:
        path = outdir / f"routes_{row.model.lower()}.png"
        plot_routes(inst, row.report.plan, f"{row.model}: objective {row.report.objective:.2f}", path)
        written.append(path)
    return written


def render_simulation_figures(report: SimReport, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    policies = sorted({r.policy for r in report.rows})

    fig, ax = plt.subplots(figsize=(7, 4.5))
    names = policies + ["perfect info"]
    means = [report.mean_served[p] for p in policies] + [report.mean_pi]
    colors = ["tab:blue"] * len(policies) + ["tab:gray"]
    ax.bar(names, means, color=colors)
    ax.set_ylabel("mean orders served")
    ax.set_title("policy performance vs perfect information")
    fig.tight_layout()
    mean_path = outdir / "simulate_means.png"
    fig.savefig(mean_path, dpi=130)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    data = [[r.served for r in report.rows if r.policy == p] for p in policies]
    max_served = max((max(d) for d in data if d), default=1)
    bins = [x - 0.5 for x in range(max_served + 2)]
    ax.hist(data, bins=bins, label=policies)
    ax.set_xlabel("orders served per replication")
    ax.set_ylabel("replications")
    ax.legend(fontsize=8)
    fig.tight_layout()
    hist_path = outdir / "simulate_histogram.png"
    fig.savefig(hist_path, dpi=130)
    plt.close(fig)
    return [mean_path, hist_path]
