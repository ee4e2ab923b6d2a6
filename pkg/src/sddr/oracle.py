"""Exhaustive reference solvers for small instances.

These enumerate complete candidate spaces with feasibility filtering only (no
bounding), so they stay dumb on purpose: their value is being a semantic
ground truth for the branch-and-bound solvers. Each incumbent improvement is
additionally pushed through ``validate_plan`` and re-evaluated, so a
disagreement between the enumeration math and the plan semantics raises
immediately instead of silently corrupting the reference value.

Ordered partitions (not unordered) are enumerated throughout because the trip
sequence interacts with release dates and chaining.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import permutations, product

from .core import ConfigError, Geometry, Instance, SizeGuardError, validate_instance
from .plans import (
    OrderAssignment,
    Plan,
    Trip,
    empty_plan,
    eval_objective,
    solution_key,
    validate_plan,
)
from .solvers.base import SolveReport

MODEL_KINDS = ("F1", "F2", "F2LEX", "F3", "F4")


@dataclass(frozen=True)
class OracleGuard:
    max_orders: int = 6
    max_stations: int = 3
    max_options: int = 3


def _ordered_partitions(items: tuple):
    """Every ordered partition of ``items`` into nonempty blocks, once each."""
    if not items:
        yield ()
        return
    n = len(items)
    for mask in range(1, 1 << n):
        block = tuple(items[i] for i in range(n) if mask & (1 << i))
        rest = tuple(items[i] for i in range(n) if not mask & (1 << i))
        for tail in _ordered_partitions(rest):
            yield (block,) + tail


def _subsets(items: tuple):
    n = len(items)
    for mask in range(1 << n):
        yield tuple(items[i] for i in range(n) if mask & (1 << i))


class _Incumbent:
    """Keeps the best candidate and insists each one survives validation."""

    def __init__(self, inst: Instance, geo: Geometry):
        self.inst = inst
        self.geo = geo
        self.key: tuple | None = None
        self.plan: Plan | None = None
        self.objective: float = 0.0

    def offer(self, key: tuple, objective: float, make_plan) -> None:
        if self.key is not None and key >= self.key:
            return
        plan = make_plan()
        bad = validate_plan(self.inst, plan, geo=self.geo)
        if bad:
            raise RuntimeError(f"oracle produced an invalid candidate: {[str(v) for v in bad]}")
        check = eval_objective(self.inst, plan, geo=self.geo)
        if abs(check - objective) > 1e-6:
            raise RuntimeError(f"oracle objective {objective} disagrees with evaluation {check}")
        self.key = key
        self.plan = plan
        self.objective = objective


def _report(inc: _Incumbent, t0: float) -> SolveReport:
    return SolveReport(
        objective=float(inc.objective),
        plan=inc.plan,
        optimal=True,
        nodes_explored=0,
        runtime=time.perf_counter() - t0,
        bound_gap=0.0,
    )


def _min_tour(geo: Geometry, members: tuple[int, ...], memo: dict) -> tuple[float, tuple[int, ...]]:
    """Shortest closed depot tour over order ids, by brute-force permutations."""
    key = frozenset(members)
    hit = memo.get(key)
    if hit is not None:
        return hit
    d = geo.omat
    idx = geo.order_idx
    best_len = float("inf")
    best_perm: tuple[int, ...] = ()
    for perm in permutations(sorted(members)):
        ln = 0.0
        prev = 0
        for oid in perm:
            ln += d[prev][idx[oid]]
            prev = idx[oid]
        ln += d[prev][0]
        if ln < best_len:
            best_len = ln
            best_perm = perm
    memo[key] = (best_len, best_perm)
    return best_len, best_perm


def _oracle_f1(inst: Instance, geo: Geometry, t0: float) -> SolveReport:
    ids = geo.order_ids
    rel = geo.release
    memo: dict = {}
    inc = _Incumbent(inst, geo)
    inc.offer(solution_key((0,), 0, 0.0, (), ()), 0.0, lambda: empty_plan("F1", inst))
    horizon = inst.horizon
    max_trips = inst.max_trips
    for served in _subsets(ids):
        if not served:
            continue
        for part in _ordered_partitions(served):
            if len(part) > max_trips:
                continue
            tours = [_min_tour(geo, block, memo) for block in part]
            total = sum(ln for ln, _ in tours)
            start = horizon - total
            if start < -1e-9:
                continue
            ok = True
            s = start
            for block, (ln, _) in zip(part, tours):
                if s < max(rel[oid] for oid in block) - 1e-9:
                    ok = False
                    break
                s += ln
            if not ok:
                continue
            key = solution_key((-len(served),), len(part), total, served, part)

            def make_plan(part=part, tours=tours, start=start) -> Plan:
                trips = []
                assignments = {}
                s = start
                for t_i, (block, (ln, perm)) in enumerate(zip(part, tours)):
                    trips.append(Trip(route=(0, *perm, 0), start=s, end=s + ln))
                    at = s
                    prev = 0
                    for oid in perm:
                        at += geo.omat[prev][geo.order_idx[oid]]
                        assignments[oid] = OrderAssignment(trip_index=t_i, delivery_time=at)
                        prev = geo.order_idx[oid]
                    s += ln
                return Plan(
                    model_kind="F1",
                    trips=tuple(trips),
                    assignments=assignments,
                    unserved=frozenset(set(ids) - set(served)),
                )

            inc.offer(key, float(len(served)), make_plan)
    return _report(inc, t0)


def _oracle_f2(inst: Instance, geo: Geometry, lex: bool, t0: float) -> SolveReport:
    ids = geo.order_ids
    rel = geo.release
    d = geo.omat
    idx = geo.order_idx
    deadlines = inst.options.deadlines
    by_id = {o.id: o for o in inst.orders}
    kind = "F2LEX" if lex else "F2"
    inc = _Incumbent(inst, geo)
    empty_primary = (0, 0) if lex else (0,)
    inc.offer(solution_key(empty_primary, 0, 0.0, (), ()), 0.0, lambda: empty_plan(kind, inst))
    horizon = inst.horizon
    max_trips = inst.max_trips

    for served in _subsets(ids):
        if not served:
            continue
        k = len(served)
        for perm in permutations(served):
            for brk in range(1 << (k - 1)):
                # breakpoint bits split the visiting sequence into trips
                segs: list[tuple[int, ...]] = []
                cur = [perm[0]]
                for i in range(1, k):
                    if brk & (1 << (i - 1)):
                        segs.append(tuple(cur))
                        cur = [perm[i]]
                    else:
                        cur.append(perm[i])
                segs.append(tuple(cur))
                if len(segs) > max_trips:
                    continue
                t = 0.0
                revenue = 0.0
                total_dist = 0.0
                details = []  # (members, start, arrivals, options, length)
                feasible = True
                for seg in segs:
                    s = max(t, max(rel[oid] for oid in seg))
                    prev = 0
                    ln = 0.0
                    arrivals = []
                    options = []
                    for oid in seg:
                        ln += d[prev][idx[oid]]
                        prev = idx[oid]
                        arr = s + ln
                        wait = arr - rel[oid]
                        best = None
                        for di, dl in enumerate(deadlines):
                            if wait <= dl + 1e-9:
                                u = by_id[oid].wtp[di]
                                if best is None or u > best[1]:
                                    best = (di, u)
                        if best is None:
                            feasible = False
                            break
                        arrivals.append(arr)
                        options.append(best[0])
                        revenue += best[1]
                    if not feasible:
                        break
                    ln += d[prev][0]
                    end = s + ln
                    if end > horizon + 1e-9:
                        feasible = False
                        break
                    details.append((seg, s, tuple(arrivals), tuple(options), ln))
                    total_dist += ln
                    t = end
                if not feasible:
                    continue
                primary = (-k, -revenue) if lex else (-revenue,)
                key = solution_key(primary, len(segs), total_dist, served, tuple(segs))

                def make_plan(details=details) -> Plan:
                    trips = []
                    assignments = {}
                    for t_i, (seg, s, arrivals, options, ln) in enumerate(details):
                        trips.append(Trip(route=(0, *seg, 0), start=s, end=s + ln))
                        for oid, arr, opt in zip(seg, arrivals, options):
                            assignments[oid] = OrderAssignment(
                                trip_index=t_i, delivery_time=arr, option_index=opt
                            )
                    return Plan(
                        model_kind=kind,
                        trips=tuple(trips),
                        assignments=assignments,
                        unserved=frozenset(set(ids) - set(served)),
                    )

                inc.offer(key, revenue, make_plan)
    return _report(inc, t0)


def _station_schedule(inst, geo, trips):
    """Earliest forward schedule for station trips given as (route, members)."""
    t = 0.0
    out = []
    for route, members in trips:
        rmax = max(geo.release[oid] for oid, _ in members)
        s = max(t, rmax)
        prev = 0
        ln = 0.0
        arrival = {}
        for sid in route:
            ln += geo.smat[prev][geo.station_idx[sid]]
            arrival[sid] = s + ln
            prev = geo.station_idx[sid]
        ln += geo.smat[prev][0]
        end = s + ln
        if end > inst.horizon + 1e-9:
            return None
        out.append((s, end, ln, arrival))
        t = end
    return out


def _oracle_stations(inst: Instance, geo: Geometry, routed: bool, t0: float) -> SolveReport:
    ids = geo.order_ids
    rel = geo.release
    big_m = float(inst.big_m)
    kind = "F4" if routed else "F3"
    by_id = {o.id: o for o in inst.orders}
    feas = {oid: tuple(by_id[oid].feasible_stations or ()) for oid in ids}
    caps = {s.id: s.capacity for s in inst.stations}
    inc = _Incumbent(inst, geo)
    all_pen = sum(big_m - rel[oid] for oid in ids)
    inc.offer(solution_key((all_pen, 0), 0, 0.0, (), ()), all_pen, lambda: empty_plan(kind, inst))
    max_trips = inst.max_trips

    # every order -> station-or-unserved assignment, capacity-filtered
    choice_sets = [(oid, (None,) + feas[oid]) for oid in ids]
    for combo in product(*(cs for _, cs in choice_sets)):
        assign = {oid: sid for (oid, _), sid in zip(choice_sets, combo) if sid is not None}
        if not assign:
            continue
        load: dict[int, int] = {}
        for sid in assign.values():
            load[sid] = load.get(sid, 0) + 1
        if any(n > caps[sid] for sid, n in load.items()):
            continue
        served = tuple(sorted(assign))
        pen = sum(big_m - rel[oid] for oid in ids if oid not in assign)
        for part in _ordered_partitions(served):
            if len(part) > max_trips:
                continue
            if not routed and any(len({assign[oid] for oid in block}) != 1 for block in part):
                continue
            block_stations = [tuple(sorted({assign[oid] for oid in block})) for block in part]
            route_choices = [
                list(permutations(sts)) if routed else [sts] for sts in block_stations
            ]
            for routes in product(*route_choices):
                trips = [
                    (route, tuple((oid, assign[oid]) for oid in block))
                    for route, block in zip(routes, part)
                ]
                sched = _station_schedule(inst, geo, trips)
                if sched is None:
                    continue
                obj = pen
                for (route, members), (s, end, ln, arrival) in zip(trips, sched):
                    obj += sum(arrival[sid] - rel[oid] for oid, sid in members)
                total_dist = sum(ln for _, _, ln, _ in sched)
                key = solution_key(
                    (obj, -len(served)), len(part), total_dist, served,
                    tuple((route, tuple(sorted(b))) for (route, m), b in zip(trips, part)),
                )

                def make_plan(trips=trips, sched=sched) -> Plan:
                    ptrips = []
                    assignments = {}
                    for t_i, ((route, members), (s, end, ln, arrival)) in enumerate(zip(trips, sched)):
                        ptrips.append(Trip(route=(0, *route, 0), start=s, end=end))
                        for oid, sid in members:
                            assignments[oid] = OrderAssignment(
                                trip_index=t_i, delivery_time=arrival[sid], station_id=sid
                            )
                    return Plan(
                        model_kind=kind,
                        trips=tuple(ptrips),
                        assignments=assignments,
                        unserved=frozenset(set(ids) - set(served)),
                    )

                inc.offer(key, obj, make_plan)
    return _report(inc, t0)


def oracle_solve(inst: Instance, model_kind: str, guard: OracleGuard | None = None) -> SolveReport:
    """Exact optimum by complete enumeration; refuses beyond the size guard."""
    guard = guard or OracleGuard()
    inst = validate_instance(inst)
    kind = model_kind.upper()
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    if len(inst.orders) > guard.max_orders:
        raise SizeGuardError(f"{len(inst.orders)} orders exceed the oracle guard {guard.max_orders}")
    if len(inst.stations) > guard.max_stations:
        raise SizeGuardError(f"{len(inst.stations)} stations exceed the oracle guard {guard.max_stations}")
    if inst.options is not None and len(inst.options) > guard.max_options:
        raise SizeGuardError(f"{len(inst.options)} options exceed the oracle guard {guard.max_options}")
    t0 = time.perf_counter()
    geo = Geometry(inst)
    if not inst.orders:
        empty = empty_plan(kind, inst)
        if kind in ("F2", "F2LEX") and inst.options is None:
            raise ConfigError("instance has no delivery options")
        if kind in ("F3", "F4") and not inst.stations:
            raise ConfigError("instance has no pickup stations")
        return SolveReport(0.0, empty, True, 0, time.perf_counter() - t0, 0.0)
    if kind == "F1":
        return _oracle_f1(inst, geo, t0)
    if kind in ("F2", "F2LEX"):
        if inst.options is None or any(o.wtp is None for o in inst.orders):
            raise ConfigError("F2 models need options and per-order wtp vectors")
        return _oracle_f2(inst, geo, kind == "F2LEX", t0)
    if not inst.stations:
        raise ConfigError("instance has no pickup stations")
    if any(o.feasible_stations is None for o in inst.orders):
        raise ConfigError("orders lack feasible-station sets; set a radius or explicit lists")
    if inst.big_m < inst.horizon - 1e-9:
        raise ConfigError("big_m must be at least the horizon")
    return _oracle_stations(inst, geo, kind == "F4", t0)
