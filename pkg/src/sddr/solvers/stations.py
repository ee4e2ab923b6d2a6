"""Exact solvers for pickup-station delivery.

``solve_f3`` restricts every trip to a single station (direct shuttle);
``solve_f4`` routes through several stations per trip. Both minimize the sum
of earliest-pickup minus release over all orders, with ``big_m`` standing in
for the pickup time of unserved orders. Requiring ``big_m >= horizon`` keeps
the penalty dominant, so serving an order is never worse for that order than
leaving it behind.

Trips are scheduled at their earliest feasible start; since the objective sums
pickup times and chaining is an inequality, the earliest schedule is optimal
for any fixed trip sequence. Orders whose feasible-station set is empty are
unservable and enter the objective as fixed penalties.
"""

from __future__ import annotations

import time
from itertools import combinations, permutations

from ..core import ConfigError, Geometry, Instance, validate_instance
from ..plans import OrderAssignment, Plan, Trip, empty_plan, solution_key
from .base import Budget, BudgetExhausted, SolveReport, SolverConfig

__all__ = ["solve_f3", "solve_f4"]


class _StationSearch:
    def __init__(self, inst: Instance, cfg: SolverConfig, routed: bool):
        self.inst = inst
        self.routed = routed
        self.geo = Geometry(inst)
        self.horizon = inst.horizon
        self.big_m = float(inst.big_m)
        self.max_trips = cfg.trips_cap(inst)
        self.budget = Budget(cfg)
        by_id = {o.id: o for o in inst.orders}
        self.rel = dict(self.geo.release)
        self.pen = {oid: self.big_m - self.rel[oid] for oid in self.geo.order_ids}
        self.feas = {oid: tuple(by_id[oid].feasible_stations or ()) for oid in self.geo.order_ids}
        self.sidx = self.geo.station_idx
        self.sd = self.geo.smat
        self.d0s = {sid: self.sd[0][self.sidx[sid]] for sid in self.geo.station_ids}
        self.servable = tuple(oid for oid in self.geo.order_ids if self.feas[oid])
        self.base = sum(self.pen[oid] for oid in self.geo.order_ids if not self.feas[oid])
        self.caps0 = {s.id: s.capacity for s in inst.stations}
        self.menus = self._build_menus() if routed else None
        self.best_key: tuple | None = None
        self.best_trips: tuple = ()

    def _build_menus(self):
        menus = []
        sids = self.geo.station_ids
        for size in range(1, len(sids) + 1):
            for combo in combinations(sids, size):
                for perm in permutations(combo):
                    prefix: dict[int, float] = {}
                    ln = 0.0
                    prev = 0
                    for sid in perm:
                        ln += self.sd[prev][self.sidx[sid]]
                        prefix[sid] = ln
                        prev = self.sidx[sid]
                    loop = ln + self.sd[prev][0]
                    menus.append((perm, prefix, loop))
        menus.sort(key=lambda m: (len(m[0]), m[0]))
        return menus

    def _best_serve_now(self, oid: int, t: float, caps: dict[int, int]) -> float:
        """Cheapest conceivable contribution of ``oid`` from time ``t`` on."""
        s = max(t, self.rel[oid])
        best = self.pen[oid]
        for sid in self.feas[oid]:
            if caps[sid] < 1:
                continue
            d = self.d0s[sid]
            if s + 2.0 * d > self.horizon + 1e-9:
                continue
            c = s + d - self.rel[oid]
            if c < best:
                best = c
        return best

    def _emit(self, trips, obj: float, dist: float) -> None:
        served_ids = [oid for tr in trips for oid, _ in tr[1]]
        rem_pen = sum(self.pen[oid] for oid in self.geo.order_ids if oid not in set(served_ids))
        # orders outside the servable set are already in rem_pen
        total = obj + rem_pen
        key = solution_key(
            (total, -len(served_ids)), len(trips), dist,
            served_ids, tuple((tr[0], tuple(sorted(oid for oid, _ in tr[1]))) for tr in trips),
        )
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_trips = trips

    def run(self) -> None:
        caps = dict(self.caps0)
        self._dfs(0.0, self.servable, caps, (), 0.0, 0.0)

    def _dfs(self, t: float, rem, caps, trips, obj: float, dist: float) -> None:
        self.budget.tick()
        self._emit(trips, obj, dist)
        if not rem or len(trips) >= self.max_trips:
            return
        lb = obj + self.base + sum(self._best_serve_now(oid, t, caps) for oid in rem)
        if lb > self.best_key[0] + 1e-9:
            return
        if self.routed:
            self._routed_children(t, rem, caps, trips, obj, dist)
        else:
            self._direct_children(t, rem, caps, trips, obj, dist)

    def _direct_children(self, t, rem, caps, trips, obj, dist) -> None:
        for sid in self.geo.station_ids:
            if caps[sid] < 1:
                continue
            d = self.d0s[sid]
            eligible = [oid for oid in rem if sid in self.feas[oid]]
            if not eligible:
                continue
            chosen: list[int] = []

            def close(rmax: float, sid=sid, d=d) -> None:
                s = max(t, rmax)
                e = s + 2.0 * d
                members = tuple((oid, sid) for oid in chosen)
                contrib = sum(s + d - self.rel[oid] for oid in chosen)
                ncaps = dict(caps)
                ncaps[sid] -= len(chosen)
                chosen_set = set(chosen)
                self._dfs(
                    e, tuple(o for o in rem if o not in chosen_set), ncaps,
                    trips + (((sid,), members, s, 2.0 * d),), obj + contrib, dist + 2.0 * d,
                )

            def pick(i: int, rmax: float, sid=sid, d=d, eligible=eligible, close=close) -> None:
                if chosen:
                    close(rmax)
                if len(chosen) >= caps[sid]:
                    return
                for j in range(i, len(eligible)):
                    oid = eligible[j]
                    nr = max(rmax, self.rel[oid])
                    if max(t, nr) + 2.0 * d > self.horizon + 1e-9:
                        continue
                    chosen.append(oid)
                    pick(j + 1, nr)
                    chosen.pop()

            pick(0, 0.0)

    def _routed_children(self, t, rem, caps, trips, obj, dist) -> None:
        for perm, prefix, loop in self.menus:
            if any(caps[sid] < 1 for sid in perm):
                continue
            if max(t, 0.0) + loop > self.horizon + 1e-9:
                # even the earliest possible start busts the horizon
                continue
            members: list[tuple[int, int]] = []
            cnt = {sid: 0 for sid in perm}
            perm_set = set(perm)

            def assign(i: int, rmax: float, perm=perm, prefix=prefix, loop=loop, cnt=cnt, perm_set=perm_set) -> None:
                if max(t, rmax) + loop > self.horizon + 1e-9:
                    return
                uncovered = sum(1 for sid in perm if cnt[sid] == 0)
                if len(rem) - i < uncovered:
                    return
                if i == len(rem):
                    if uncovered or not members:
                        return
                    s = max(t, rmax)
                    contrib = sum(s + prefix[sid] - self.rel[oid] for oid, sid in members)
                    ncaps = dict(caps)
                    for oid, sid in members:
                        ncaps[sid] -= 1
                    taken = {oid for oid, _ in members}
                    self._dfs(
                        s + loop, tuple(o for o in rem if o not in taken), ncaps,
                        trips + ((perm, tuple(members), s, loop),), obj + contrib, dist + loop,
                    )
                    return
                oid = rem[i]
                # leave the order for a later trip (or unserved)
                assign(i + 1, rmax)
                for sid in self.feas[oid]:
                    if sid not in perm_set:
                        continue
                    if cnt[sid] >= caps[sid]:
                        continue
                    cnt[sid] += 1
                    members.append((oid, sid))
                    assign(i + 1, max(rmax, self.rel[oid]))
                    members.pop()
                    cnt[sid] -= 1

            assign(0, 0.0)

    def build(self) -> tuple[Plan, float]:
        kind = "F4" if self.routed else "F3"
        plan_trips: list[Trip] = []
        assignments: dict[int, OrderAssignment] = {}
        for t_i, (route_sids, members, start, loop) in enumerate(self.best_trips):
            plan_trips.append(Trip(route=(0, *route_sids, 0), start=start, end=start + loop))
            for oid, sid in members:
                if self.routed:
                    prev = 0
                    at = start
                    for rs in route_sids:
                        at += self.sd[prev][self.sidx[rs]]
                        prev = self.sidx[rs]
                        if rs == sid:
                            break
                    pickup = at
                else:
                    pickup = start + self.d0s[sid]
                assignments[oid] = OrderAssignment(trip_index=t_i, delivery_time=pickup, station_id=sid)
        served = set(assignments)
        plan = Plan(
            model_kind=kind,
            trips=tuple(plan_trips),
            assignments=assignments,
            unserved=frozenset(oid for oid in self.geo.order_ids if oid not in served),
        )
        return plan, float(self.best_key[0])


def _solve(inst: Instance, cfg: SolverConfig | None, routed: bool) -> SolveReport:
    cfg = cfg or SolverConfig()
    inst = validate_instance(inst)
    if not inst.stations:
        raise ConfigError("instance has no pickup stations")
    if any(o.feasible_stations is None for o in inst.orders):
        raise ConfigError("orders lack feasible-station sets; set a radius or explicit lists")
    if inst.big_m < inst.horizon - 1e-9:
        raise ConfigError(
            f"big_m {inst.big_m} must be at least the horizon {inst.horizon} so the penalty dominates"
        )
    t0 = time.perf_counter()
    kind = "F4" if routed else "F3"
    if not inst.orders:
        return SolveReport(
            objective=0.0, plan=empty_plan(kind, inst), optimal=True,
            nodes_explored=0, runtime=time.perf_counter() - t0, bound_gap=0.0,
        )
    search = _StationSearch(inst, cfg, routed)
    root_lb = search.base + sum(
        search._best_serve_now(oid, 0.0, search.caps0) for oid in search.servable
    )
    optimal = True
    try:
        search.run()
    except BudgetExhausted:
        optimal = False
    plan, obj = search.build()
    gap = 0.0 if optimal else max(0.0, obj - root_lb)
    return SolveReport(
        objective=obj,
        plan=plan,
        optimal=optimal,
        nodes_explored=search.budget.nodes,
        runtime=time.perf_counter() - t0,
        bound_gap=gap,
    )


def solve_f3(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Minimize total pickup service time using direct depot-station trips."""
    return _solve(inst, cfg, routed=False)


def solve_f4(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Minimize total pickup service time, routing between stations per trip.

    Every direct-trip plan is also feasible here, so the optimum never
    exceeds the direct-trip optimum.
    """
    return _solve(inst, cfg, routed=True)
