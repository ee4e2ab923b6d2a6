"""Plan representation, constraint-level validation, objectives, and metrics.

Violation tags mirror the four formulations (``F1-release``, ``F3-capacity``,
...) and carry the measured slack so property tests can be precise. Empty
trips are implicit: a plan stores only nonempty trips, and trip chaining is
checked over the stored sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .core import EPS, Geometry, Instance, MalformedInputError, SddError

MODEL_KINDS = ("F1", "F2", "F2LEX", "F3", "F4")
STATION_MODELS = ("F3", "F4")
OPTION_MODELS = ("F2", "F2LEX")


class PlanError(SddError):
    """Plan cannot be evaluated against this instance (bad model/data pairing
    or failed validation where a valid plan is a precondition)."""

    def __init__(self, message: str, violations: list["Violation"] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Trip:
    """Closed depot route with its schedule; ``end`` is derived, never trusted."""

    route: tuple[int, ...]
    start: float
    end: float


@dataclass(frozen=True)
class OrderAssignment:
    trip_index: int
    delivery_time: float
    option_index: int | None = None
    station_id: int | None = None


@dataclass(frozen=True)
class Plan:
    model_kind: str
    trips: tuple[Trip, ...]
    assignments: dict[int, OrderAssignment]
    unserved: frozenset[int]

    @property
    def served_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.assignments))


@dataclass(frozen=True)
class Violation:
    tag: str
    detail: str
    slack: float | None = None

    def __str__(self) -> str:
        return f"{self.tag}: {self.detail}"


@dataclass(frozen=True)
class MetricsReport:
    distance: float
    trips: int
    served: int
    service_rate: float
    avg_wait: float | None = None
    max_wait: float | None = None
    min_wait: float | None = None
    wait_variability: float | None = None


def empty_plan(model_kind: str, inst: Instance) -> Plan:
    return Plan(
        model_kind=model_kind,
        trips=(),
        assignments={},
        unserved=frozenset(o.id for o in inst.orders),
    )


def _check_model_data(inst: Instance, kind: str) -> None:
    if kind not in MODEL_KINDS:
        raise PlanError(f"unknown model kind {kind!r}")
    if kind in OPTION_MODELS:
        if inst.options is None:
            raise PlanError(f"{kind} plan needs an instance with delivery options")
        if any(o.wtp is None for o in inst.orders):
            raise PlanError(f"{kind} plan needs a wtp vector on every order")
    if kind in STATION_MODELS:
        if not inst.stations:
            raise PlanError(f"{kind} plan needs an instance with stations")
        if any(o.feasible_stations is None for o in inst.orders):
            raise PlanError(f"{kind} plan needs feasible stations per order (validate with a radius)")


def validate_plan(
    inst: Instance,
    plan: Plan,
    relaxed_chaining: bool = False,
    geo: Geometry | None = None,
) -> list[Violation]:
    """Check every modeled constraint; an empty list means the plan is valid.

    ``relaxed_chaining`` only affects F1 plans: chaining is then checked as an
    inequality and the last trip may end before the horizon, which matches the
    schedule an online dispatcher actually executes.
    """
    kind = plan.model_kind
    _check_model_data(inst, kind)
    geo = geo or Geometry(inst)
    bad: list[Violation] = []
    node_kind = "stations" if kind in STATION_MODELS else "orders"
    known = set(geo.station_ids) if kind in STATION_MODELS else set(geo.order_ids)
    order_ids = set(geo.order_ids)

    served = set(plan.assignments)
    if served | set(plan.unserved) != order_ids or served & set(plan.unserved):
        bad.append(
            Violation("structure", "served and unserved sets must partition the orders")
        )

    route_ok: list[bool] = []
    for t_i, trip in enumerate(plan.trips):
        ok = True
        r = trip.route
        if len(r) < 3 or r[0] != 0 or r[-1] != 0:
            bad.append(Violation("structure", f"trip {t_i} route must be a closed depot walk with interior nodes"))
            ok = False
        interior = r[1:-1]
        if any(v == 0 or v not in known for v in interior):
            bad.append(Violation("structure", f"trip {t_i} route visits unknown node"))
            ok = False
        if len(set(interior)) != len(interior):
            bad.append(Violation("structure", f"trip {t_i} route repeats a node"))
            ok = False
        if ok:
            length = geo.route_length(r, node_kind)
            if abs(trip.end - (trip.start + length)) > EPS:
                bad.append(
                    Violation(
                        f"{kind}-trip-duration",
                        f"trip {t_i} end {trip.end} != start + length {trip.start + length}",
                        slack=abs(trip.end - (trip.start + length)),
                    )
                )
        if trip.start < -EPS:
            bad.append(Violation(f"{kind}-horizon", f"trip {t_i} starts before time 0", slack=-trip.start))
        route_ok.append(ok)

    # order-to-trip bookkeeping
    for oid, a in plan.assignments.items():
        if oid not in order_ids:
            bad.append(Violation("structure", f"assignment references unknown order {oid}"))
            continue
        if not 0 <= a.trip_index < len(plan.trips):
            bad.append(Violation("structure", f"order {oid} assigned to missing trip {a.trip_index}"))
            continue
        if (a.option_index is not None) != (kind in OPTION_MODELS):
            bad.append(Violation("structure", f"order {oid} option field does not match model {kind}"))
        if (a.station_id is not None) != (kind in STATION_MODELS):
            bad.append(Violation("structure", f"order {oid} station field does not match model {kind}"))

    if kind in ("F1",) + OPTION_MODELS:
        # visited customers and served customers must coincide, once each
        seen: dict[int, int] = {}
        for t_i, trip in enumerate(plan.trips):
            if not route_ok[t_i]:
                continue
            for v in trip.route[1:-1]:
                if v in seen:
                    bad.append(Violation("structure", f"order {v} visited in trips {seen[v]} and {t_i}"))
                seen[v] = t_i
        for oid, a in plan.assignments.items():
            if oid in seen and seen[oid] != a.trip_index:
                bad.append(Violation("structure", f"order {oid} assigned to trip {a.trip_index} but visited in {seen[oid]}"))
            if oid not in seen:
                bad.append(Violation("structure", f"served order {oid} appears in no route"))
        for v in seen:
            if v not in plan.assignments:
                bad.append(Violation("structure", f"visited order {v} has no assignment"))
    else:
        for oid, a in plan.assignments.items():
            if a.station_id is None or not (0 <= a.trip_index < len(plan.trips)):
                continue
            if route_ok[a.trip_index] and a.station_id not in plan.trips[a.trip_index].route[1:-1]:
                bad.append(
                    Violation("structure", f"order {oid} assigned to station {a.station_id} absent from its trip route")
                )

    if bad:
        # timing semantics are unreliable on malformed plans
        return bad

    by_id = {o.id: o for o in inst.orders}

    # release feasibility: a trip starts no earlier than its parcels' releases
    for oid, a in plan.assignments.items():
        trip = plan.trips[a.trip_index]
        r = by_id[oid].release
        if trip.start < r - EPS:
            bad.append(
                Violation(f"{kind}-release", f"trip {a.trip_index} starts {trip.start} before release {r} of order {oid}", slack=r - trip.start)
            )

    # chaining and horizon
    for t_i in range(1, len(plan.trips)):
        prev_end, start = plan.trips[t_i - 1].end, plan.trips[t_i].start
        if kind == "F1" and not relaxed_chaining:
            if abs(start - prev_end) > EPS:
                bad.append(Violation("F1-chaining", f"trip {t_i} must start exactly when trip {t_i - 1} ends", slack=abs(start - prev_end)))
        elif start < prev_end - EPS:
            bad.append(Violation(f"{kind}-chaining", f"trip {t_i} starts before trip {t_i - 1} ends", slack=prev_end - start))
    if plan.trips:
        last_end = plan.trips[-1].end
        if kind == "F1" and not relaxed_chaining:
            if abs(last_end - inst.horizon) > EPS:
                bad.append(Violation("F1-horizon", f"last trip ends at {last_end}, not at the horizon {inst.horizon}", slack=abs(last_end - inst.horizon)))
        elif last_end > inst.horizon + EPS:
            bad.append(Violation(f"{kind}-horizon", f"last trip ends at {last_end} after the horizon {inst.horizon}", slack=last_end - inst.horizon))

    if kind in ("F1",) + OPTION_MODELS:
        for t_i, trip in enumerate(plan.trips):
            arr = geo.arrivals(trip.route, trip.start, "orders")
            for oid, at in arr.items():
                a = plan.assignments[oid]
                if abs(a.delivery_time - at) > EPS:
                    bad.append(
                        Violation(f"{kind}-arrival", f"order {oid} delivery time {a.delivery_time} != route arrival {at}", slack=abs(a.delivery_time - at))
                    )

    if kind in OPTION_MODELS:
        deadlines = inst.options.deadlines
        for oid, a in plan.assignments.items():
            if a.option_index is None or not 0 <= a.option_index < len(deadlines):
                bad.append(Violation("structure", f"order {oid} has no valid option index"))
                continue
            due = by_id[oid].release + deadlines[a.option_index]
            if a.delivery_time > due + EPS:
                bad.append(
                    Violation("F2-deadline", f"order {oid} delivered at {a.delivery_time} after promised deadline {due}", slack=a.delivery_time - due)
                )

    if kind in STATION_MODELS:
        # radius feasibility and capacity over the whole horizon
        load: dict[int, int] = {}
        for oid, a in plan.assignments.items():
            load[a.station_id] = load.get(a.station_id, 0) + 1
            feas = by_id[oid].feasible_stations or ()
            if a.station_id not in feas:
                bad.append(Violation(f"{kind}-radius", f"order {oid} assigned to station {a.station_id} outside its radius", slack=None))
        for sid, n in sorted(load.items()):
            cap = inst.station_by_id(sid).capacity
            if n > cap:
                bad.append(Violation(f"{kind}-capacity", f"station {sid} assigned {n} parcels with capacity {cap}", slack=float(n - cap)))
        # a station is visited in a trip only when a parcel is delivered there
        for t_i, trip in enumerate(plan.trips):
            delivered_here = {a.station_id for a in plan.assignments.values() if a.trip_index == t_i}
            for sid in trip.route[1:-1]:
                if sid not in delivered_here:
                    bad.append(Violation(f"{kind}-no-empty-visit", f"trip {t_i} visits station {sid} without delivering a parcel"))
        if kind == "F3":
            for t_i, trip in enumerate(plan.trips):
                if len(trip.route) != 3:
                    bad.append(Violation("F3-single-station", f"trip {t_i} visits {len(trip.route) - 2} stations; direct trips visit one"))
            for oid, a in plan.assignments.items():
                trip = plan.trips[a.trip_index]
                if len(trip.route) == 3:
                    expect = trip.start + geo.smat[0][geo.station_idx[a.station_id]]
                    if abs(a.delivery_time - expect) > EPS:
                        bad.append(
                            Violation("F3-pickup-time", f"order {oid} pickup {a.delivery_time} != trip start + station distance {expect}", slack=abs(a.delivery_time - expect))
                        )
        else:
            for t_i, trip in enumerate(plan.trips):
                arr = geo.arrivals(trip.route, trip.start, "stations")
                for oid, a in plan.assignments.items():
                    if a.trip_index != t_i:
                        continue
                    at = arr.get(a.station_id)
                    if at is not None and a.delivery_time < at - EPS:
                        bad.append(
                            Violation("F4-pickup-time", f"order {oid} pickup {a.delivery_time} precedes station arrival {at}", slack=at - a.delivery_time)
                        )
    return bad


def _require_valid(inst: Instance, plan: Plan, geo: Geometry | None) -> Geometry:
    geo = geo or Geometry(inst)
    bad = validate_plan(inst, plan, geo=geo)
    if bad:
        raise PlanError("plan invalid: " + "; ".join(v.tag for v in bad), violations=bad)
    return geo


def eval_objective(inst: Instance, plan: Plan, geo: Geometry | None = None) -> float:
    """Objective value of a valid plan under its own model.

    F1 counts served customers; F2/F2LEX sums the charged willingness-to-pay;
    F3/F4 sums pickup-minus-release over all orders with ``big_m`` standing in
    for the pickup time of unserved orders.
    """
    geo = _require_valid(inst, plan, geo)
    kind = plan.model_kind
    if kind == "F1":
        return float(len(plan.assignments))
    if kind in OPTION_MODELS:
        by_id = {o.id: o for o in inst.orders}
        return float(sum(by_id[oid].wtp[a.option_index] for oid, a in plan.assignments.items()))
    by_id = {o.id: o for o in inst.orders}
    big_m = inst.big_m if inst.big_m is not None else inst.horizon
    total = sum(a.delivery_time - by_id[oid].release for oid, a in plan.assignments.items())
    total += sum(big_m - by_id[oid].release for oid in plan.unserved)
    return float(total)


def compute_metrics(inst: Instance, plan: Plan, geo: Geometry | None = None) -> MetricsReport:
    """Distance, trip count, service rate, and waiting-time figures.

    Waiting times cover served orders only; with nobody served the wait fields
    stay absent and the service rate is zero.
    """
    geo = _require_valid(inst, plan, geo)
    node_kind = "stations" if plan.model_kind in STATION_MODELS else "orders"
    distance = sum(geo.route_length(t.route, node_kind) for t in plan.trips)
    served = len(plan.assignments)
    n = len(inst.orders)
    by_id = {o.id: o for o in inst.orders}
    waits = [a.delivery_time - by_id[oid].release for oid, a in plan.assignments.items()]
    if served == 0:
        return MetricsReport(distance=distance, trips=len(plan.trips), served=0, service_rate=0.0)
    return MetricsReport(
        distance=distance,
        trips=len(plan.trips),
        served=served,
        service_rate=served / n,
        avg_wait=sum(waits) / served,
        max_wait=max(waits),
        min_wait=min(waits),
        wait_variability=max(waits) - min(waits),
    )


def solution_key(
    primary: tuple,
    n_trips: int,
    distance: float,
    served_ids: Iterable[int],
    trip_seq: tuple,
) -> tuple:
    """Deterministic comparison key; smaller is better.

    ``primary`` already encodes the objective direction (negate terms that are
    maximized). Ties fall through trip count, total distance, the sorted
    served-id list, then the sequence of per-trip contents.
    """
    return primary + (n_trips, distance, tuple(sorted(served_ids)), trip_seq)


# ---------------------------------------------------------------------------
# Plan file format (JSON); trip ends are recomputed, never trusted

_PLAN_KEYS = {"model_kind", "trips", "assignments", "unserved"}
_TRIP_KEYS = {"route", "start"}
_ASSIGN_KEYS = {"order", "trip", "option", "station", "delivery_time"}


def plan_to_dict(plan: Plan) -> dict:
    doc: dict[str, Any] = {
        "model_kind": plan.model_kind,
        "trips": [{"route": list(t.route), "start": t.start} for t in plan.trips],
        "assignments": [],
        "unserved": sorted(plan.unserved),
    }
    for oid in sorted(plan.assignments):
        a = plan.assignments[oid]
        entry: dict[str, Any] = {"order": oid, "trip": a.trip_index, "delivery_time": a.delivery_time}
        if a.option_index is not None:
            entry["option"] = a.option_index
        if a.station_id is not None:
            entry["station"] = a.station_id
        doc["assignments"].append(entry)
    return doc


def plan_from_dict(doc: dict, inst: Instance) -> Plan:
    from .core import _reject_unknown  # shared strict-key helper

    if not isinstance(doc, dict):
        raise MalformedInputError("plan document must be a JSON object")
    _reject_unknown(doc, _PLAN_KEYS, "plan")
    kind = doc.get("model_kind")
    if kind not in MODEL_KINDS:
        raise MalformedInputError(f"plan model_kind must be one of {MODEL_KINDS}")
    geo = Geometry(inst)
    node_kind = "stations" if kind in STATION_MODELS else "orders"
    trips = []
    for i, td in enumerate(doc.get("trips", [])):
        _reject_unknown(td, _TRIP_KEYS, f"trips[{i}]")
        route = tuple(int(v) for v in td["route"])
        start = float(td["start"])
        try:
            length = geo.route_length(route, node_kind)
        except KeyError as exc:
            raise MalformedInputError(f"trips[{i}] references unknown node {exc}") from exc
        trips.append(Trip(route=route, start=start, end=start + length))
    assignments: dict[int, OrderAssignment] = {}
    for i, ad in enumerate(doc.get("assignments", [])):
        _reject_unknown(ad, _ASSIGN_KEYS, f"assignments[{i}]")
        oid = int(ad["order"])
        if oid in assignments:
            raise MalformedInputError(f"assignments[{i}]: duplicate order {oid}")
        assignments[oid] = OrderAssignment(
            trip_index=int(ad["trip"]),
            delivery_time=float(ad["delivery_time"]),
            option_index=int(ad["option"]) if ad.get("option") is not None else None,
            station_id=int(ad["station"]) if ad.get("station") is not None else None,
        )
    return Plan(
        model_kind=kind,
        trips=tuple(trips),
        assignments=assignments,
        unserved=frozenset(int(v) for v in doc.get("unserved", [])),
    )


def load_plan(path: str | Path, inst: Instance) -> Plan:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
    return plan_from_dict(doc, inst)


def save_plan(plan: Plan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2, sort_keys=True) + "\n", encoding="utf-8")
