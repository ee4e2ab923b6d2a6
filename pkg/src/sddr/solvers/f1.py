"""Exact solver for the orienteering problem with release dates.

Single uncapacitated vehicle, back-to-back trips, maximize the number of
customers served by the end of the horizon. Search is a depth-first branch
and bound that builds trips from the last one backwards: with equality
chaining and the final trip pinned to the horizon, the whole schedule is
rigid once the ordered trips are chosen, and the canonical latest-start
schedule is optimal because releases only lower-bound trip starts.
"""

from __future__ import annotations

import time

from ..core import Geometry, Instance, validate_instance
from ..plans import OrderAssignment, Plan, Trip, empty_plan, solution_key
from ..tsp import TourCache, tsp_exact  # re-exported: tsp_exact is part of this module's surface
from .base import Budget, BudgetExhausted, SolveReport, SolverConfig

__all__ = ["solve_f1", "tsp_exact", "SolveReport", "SolverConfig"]


class _F1Search:
    def __init__(self, inst: Instance, cfg: SolverConfig):
        self.inst = inst
        self.geo = Geometry(inst)
        self.cache = TourCache(self.geo.omat)
        self.horizon = inst.horizon
        self.max_trips = cfg.trips_cap(inst)
        self.budget = Budget(cfg)
        self.release = {oid: self.geo.release[oid] for oid in self.geo.order_ids}
        self.d0 = {oid: self.geo.omat[0][self.geo.order_idx[oid]] for oid in self.geo.order_ids}
        self.best_key: tuple | None = None
        self.best_trips: tuple[tuple[tuple[int, ...], float, tuple[int, ...]], ...] = ()

    def run(self) -> None:
        self._dfs(tuple(self.geo.order_ids), 0.0, (), 0, 0.0)

    def _emit(self, trips_rev, served: int, dist: float) -> None:
        forward = tuple(reversed(trips_rev))
        served_ids = [oid for members, _, _ in forward for oid in members]
        key = solution_key(
            (-served,), len(forward), dist, served_ids, tuple(m for m, _, _ in forward)
        )
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_trips = forward

    def _dfs(self, rem: tuple[int, ...], lam: float, trips_rev, served: int, dist: float) -> None:
        self.budget.tick()
        self._emit(trips_rev, served, dist)
        if not rem or len(trips_rev) >= self.max_trips:
            return
        window = self.horizon - lam
        servable = [
            oid for oid in rem if self.release[oid] + 2.0 * self.d0[oid] <= window + 1e-9
        ]
        if not servable:
            return
        ub = served + len(servable)
        inc_served = -self.best_key[0]
        if ub < inc_served:
            return
        if ub == inc_served:
            # reaching the tie needs at least one more trip; tie-break prunes
            if len(trips_rev) + 1 > self.best_key[1]:
                return
            if len(trips_rev) + 1 == self.best_key[1] and dist > self.best_key[2] + 1e-9:
                return

        end = window
        chosen: list[int] = []

        def extend(i: int, rmax: float, dmax: float) -> None:
            if chosen:
                # close the trip here
                members = tuple(chosen)
                length, tour = self.cache.tour([self.geo.order_idx[oid] for oid in members])
                start = end - length
                if start >= rmax - 1e-9 and start >= -1e-9:
                    self._dfs(
                        tuple(oid for oid in rem if oid not in set(members)),
                        lam + length,
                        trips_rev + ((members, length, tour),),
                        served + len(members),
                        dist + length,
                    )
            for j in range(i, len(servable)):
                oid = servable[j]
                nr = max(rmax, self.release[oid])
                nd = max(dmax, self.d0[oid])
                # any superset trip is at least twice the farthest spoke long
                if end - 2.0 * nd < nr - 1e-9:
                    continue
                chosen.append(oid)
                extend(j + 1, nr, nd)
                chosen.pop()

        # emits every nonempty subset of servable orders exactly once, closing
        # the current trip before trying to grow it further
        extend(0, 0.0, 0.0)

    def build_plan(self) -> Plan:
        trips = self.best_trips
        total = sum(length for _, length, _ in trips)
        start = self.horizon - total
        plan_trips: list[Trip] = []
        assignments: dict[int, OrderAssignment] = {}
        idx_to_id = {v: k for k, v in self.geo.order_idx.items()}
        for t_i, (members, length, tour) in enumerate(trips):
            route = tuple(0 if v == 0 else idx_to_id[v] for v in tour)
            trip = Trip(route=route, start=start, end=start + length)
            plan_trips.append(trip)
            at = start
            prev = 0
            for v in tour[1:-1]:
                at += self.geo.omat[prev][v]
                assignments[idx_to_id[v]] = OrderAssignment(trip_index=t_i, delivery_time=at)
                prev = v
            start += length
        served = set(assignments)
        return Plan(
            model_kind="F1",
            trips=tuple(plan_trips),
            assignments=assignments,
            unserved=frozenset(oid for oid in self.geo.order_ids if oid not in served),
        )


def solve_f1(inst: Instance, cfg: SolverConfig | None = None) -> SolveReport:
    """Maximize served orders under release dates and the horizon deadline.

    Returns a proven optimum unless a time or node limit interrupts the
    search, in which case the best incumbent is reported with a positive
    bound gap. Ties between optimal plans are broken by fewer trips, then
    total distance, then the sorted served-id list.
    """
    cfg = cfg or SolverConfig()
    inst = validate_instance(inst)
    t0 = time.perf_counter()
    if not inst.orders:
        return SolveReport(
            objective=0.0,
            plan=empty_plan("F1", inst),
            optimal=True,
            nodes_explored=0,
            runtime=time.perf_counter() - t0,
            bound_gap=0.0,
        )
    search = _F1Search(inst, cfg)
    root_ub = sum(
        1
        for oid in search.geo.order_ids
        if search.release[oid] + 2.0 * search.d0[oid] <= inst.horizon + 1e-9
    )
    optimal = True
    try:
        search.run()
    except BudgetExhausted:
        optimal = False
    served = -search.best_key[0]
    plan = search.build_plan()
    gap = 0.0 if optimal else max(0.0, float(root_ub - served))
    return SolveReport(
        objective=float(served),
        plan=plan,
        optimal=optimal,
        nodes_explored=search.budget.nodes,
        runtime=time.perf_counter() - t0,
        bound_gap=gap,
    )
