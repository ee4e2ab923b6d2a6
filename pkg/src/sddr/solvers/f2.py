"""Exact solvers for delivery-deadline option selection.

``solve_f2`` maximizes revenue from the chosen options; ``solve_f2_lex``
maximizes served customers first and revenue second. Trips are built
forward with earliest feasible starts, which is optimal here because trips
may idle between each other and earlier arrivals only enlarge the set of
feasible deadline options. Arrival times are computed directly on explicit
routes, so no big-M constant enters the search.
"""

from __future__ import annotations

import time

from ..core import ConfigError, Geometry, Instance, validate_instance
from ..plans import OrderAssignment, Plan, Trip, empty_plan, solution_key
from .base import Budget, BudgetExhausted, SlotSolution, SolverConfig

__all__ = ["solve_f2", "solve_f2_lex", "SlotSolution"]


class _F2Search:
    def __init__(self, inst: Instance, cfg: SolverConfig, lex: bool):
        self.inst = inst
        self.lex = lex
        self.geo = Geometry(inst)
        self.horizon = inst.horizon
        self.max_trips = cfg.trips_cap(inst)
        self.budget = Budget(cfg)
        self.deadlines = inst.options.deadlines
        by_id = {o.id: o for o in inst.orders}
        self.rel = dict(self.geo.release)
        self.wtp = {oid: by_id[oid].wtp for oid in self.geo.order_ids}
        self.max_u = {oid: max(self.wtp[oid]) for oid in self.geo.order_ids}
        self.due_last = {oid: self.rel[oid] + self.deadlines[-1] for oid in self.geo.order_ids}
        self.idx = self.geo.order_idx
        self.d = self.geo.omat
        self.d0 = {oid: self.d[0][self.idx[oid]] for oid in self.geo.order_ids}
        self.best_key: tuple | None = None
        # per trip: (members in visit order, start, arrivals, options, length)
        self.best_trips: tuple = ()

    def run(self) -> None:
        self._dfs(0.0, tuple(self.geo.order_ids), (), 0, 0.0, 0.0)

    def _primary(self, served: int, rev: float) -> tuple:
        return (-served, -rev) if self.lex else (-rev,)

    def _emit(self, trips, served: int, rev: float, dist: float) -> None:
        served_ids = [oid for tr in trips for oid in tr[0]]
        key = solution_key(
            self._primary(served, rev), len(trips), dist, served_ids, tuple(tr[0] for tr in trips)
        )
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_trips = trips

    def _best_option(self, oid: int, wait: float) -> tuple[int, float] | None:
        best: tuple[int, float] | None = None
        for di, deadline in enumerate(self.deadlines):
            if wait <= deadline + 1e-9:
                u = self.wtp[oid][di]
                if best is None or u > best[1]:
                    best = (di, u)
        return best

    def _dfs(self, t: float, rem, trips, served: int, rev: float, dist: float) -> None:
        self.budget.tick()
        self._emit(trips, served, rev, dist)
        if not rem or len(trips) >= self.max_trips:
            return
        servable = []
        extra = 0.0
        for oid in rem:
            s = max(t, self.rel[oid])
            if s + 2.0 * self.d0[oid] > self.horizon + 1e-9:
                continue
            if s + self.d0[oid] > self.due_last[oid] + 1e-9:
                continue
            servable.append(oid)
            extra += self.max_u[oid]
        if not servable:
            return

        n_off = 2 if self.lex else 1  # index of the trip count inside the key
        if self.lex:
            ub_served = served + len(servable)
            inc_served, inc_rev = -self.best_key[0], -self.best_key[1]
            if ub_served < inc_served:
                return
            if ub_served == inc_served and rev + extra < inc_rev - 1e-9:
                return
            tie = ub_served == inc_served and rev + extra <= inc_rev + 1e-9
        else:
            inc_rev = -self.best_key[0]
            if rev + extra < inc_rev - 1e-9:
                return
            tie = rev + extra <= inc_rev + 1e-9
        if tie:
            if len(trips) + 1 > self.best_key[n_off]:
                return
            if len(trips) + 1 == self.best_key[n_off] and dist > self.best_key[n_off + 1] + 1e-9:
                return

        chosen: list[int] = []

        def close_trip(rmax: float) -> None:
            members = chosen[:]
            start = max(t, rmax)
            k = len(members)
            route: list[int] = []
            arrivals: list[float] = []
            options: list[int] = []
            used = [False] * k
            revs: list[float] = []

            def perm(prev: int, arr_len: float) -> None:
                if len(route) == k:
                    length = arr_len + self.d[prev][0]
                    end = start + length
                    if end <= self.horizon + 1e-9:
                        trip = (tuple(route), start, tuple(arrivals), tuple(options), length)
                        rest = tuple(o for o in rem if o not in set(route))
                        self._dfs(
                            end, rest, trips + (trip,), served + k,
                            rev + sum(revs), dist + length,
                        )
                    return
                for j in range(k):
                    if used[j]:
                        continue
                    oid = members[j]
                    mi = self.idx[oid]
                    nl = arr_len + self.d[prev][mi]
                    arr = start + nl
                    if arr + self.d[mi][0] > self.horizon + 1e-9:
                        continue
                    pick = self._best_option(oid, arr - self.rel[oid])
                    if pick is None:
                        continue
                    used[j] = True
                    route.append(oid)
                    arrivals.append(arr)
                    options.append(pick[0])
                    revs.append(pick[1])
                    perm(mi, nl)
                    revs.pop()
                    options.pop()
                    arrivals.pop()
                    route.pop()
                    used[j] = False

            perm(0, 0.0)

        def pick(i: int, rmax: float, dmax: float) -> None:
            if chosen:
                close_trip(rmax)
            for j in range(i, len(servable)):
                oid = servable[j]
                nr = max(rmax, self.rel[oid])
                nd = max(dmax, self.d0[oid])
                s_lb = max(t, nr)
                if s_lb + 2.0 * nd > self.horizon + 1e-9:
                    continue
                # a later-releasing companion can push every arrival past a deadline
                if any(s_lb + self.d0[m] > self.due_last[m] + 1e-9 for m in chosen) or (
                    s_lb + self.d0[oid] > self.due_last[oid] + 1e-9
                ):
                    continue
                chosen.append(oid)
                pick(j + 1, nr, nd)
                chosen.pop()

        pick(0, 0.0, 0.0)

    def build(self) -> tuple[Plan, dict[int, float], float, int]:
        plan_trips: list[Trip] = []
        assignments: dict[int, OrderAssignment] = {}
        prices: dict[int, float] = {}
        rev = 0.0
        for t_i, (members, start, arrivals, options, length) in enumerate(self.best_trips):
            plan_trips.append(Trip(route=(0, *members, 0), start=start, end=start + length))
            for oid, arr, opt in zip(members, arrivals, options):
                assignments[oid] = OrderAssignment(trip_index=t_i, delivery_time=arr, option_index=opt)
                prices[oid] = self.wtp[oid][opt]
                rev += prices[oid]
        served = set(assignments)
        plan = Plan(
            model_kind="F2LEX" if self.lex else "F2",
            trips=tuple(plan_trips),
            assignments=assignments,
            unserved=frozenset(oid for oid in self.geo.order_ids if oid not in served),
        )
        return plan, prices, rev, len(served)


def _solve(inst: Instance, cfg: SolverConfig | None, lex: bool) -> SlotSolution:
    cfg = cfg or SolverConfig()
    inst = validate_instance(inst)
    if inst.options is None:
        raise ConfigError("instance has no delivery options")
    missing = [o.id for o in inst.orders if o.wtp is None]
    if missing:
        raise ConfigError(f"orders {missing} have no willingness-to-pay vector")
    t0 = time.perf_counter()
    kind = "F2LEX" if lex else "F2"
    if not inst.orders:
        return SlotSolution(
            objective=0.0, plan=empty_plan(kind, inst), optimal=True,
            nodes_explored=0, runtime=time.perf_counter() - t0, bound_gap=0.0, prices={},
        )
    search = _F2Search(inst, cfg, lex)
    optimal = True
    try:
        search.run()
    except BudgetExhausted:
        optimal = False
    plan, prices, rev, served = search.build()
    root_ub = sum(search.max_u.values())
    gap = 0.0 if optimal else max(0.0, root_ub - rev)
    return SlotSolution(
        objective=float(rev),
        plan=plan,
        optimal=optimal,
        nodes_explored=search.budget.nodes,
        runtime=time.perf_counter() - t0,
        bound_gap=gap,
        prices=prices,
    )


def solve_f2(inst: Instance, cfg: SolverConfig | None = None) -> SlotSolution:
    """Maximize revenue over deadline-option assignments and trip schedules.

    Served orders are charged their willingness-to-pay for the chosen option.
    Orders for which every option is infeasible fall back to next-day
    delivery, i.e. they end up unserved.
    """
    return _solve(inst, cfg, lex=False)


def solve_f2_lex(inst: Instance, cfg: SolverConfig | None = None) -> SlotSolution:
    """Hierarchical variant: maximize served customers first, then revenue.

    The reported objective is the revenue of the lexicographically optimal
    plan.
    """
    return _solve(inst, cfg, lex=True)
