"""Rolling-horizon dispatch simulation under stochastic release dates.

Decision epochs sit on a fixed time grid; the policy is consulted only when
the vehicle is idle at the depot, and an in-flight trip can never be
cancelled. Policies see realized releases of the past and only distributional
information about the future, resampled conditionally on "not released yet".
The perfect-information bound solves the deterministic model on the realized
releases of a whole replication and therefore upper-bounds every policy.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .core import ConfigError, Geometry, Instance, Order, SddError, SizeGuardError, validate_instance
from .oracle import OracleGuard
from .plans import OrderAssignment, Plan, Trip, validate_plan
from .solvers import SolverConfig, solve_f1
from .tsp import tsp_exact


class ProtocolViolationError(SddError):
    """A policy proposed an action the episode protocol forbids."""


@dataclass(frozen=True)
class Scenario:
    releases: dict[int, float]


@dataclass(frozen=True)
class Policy:
    kind: str
    theta: int = 1
    samples: int = 1

    @classmethod
    def myopic(cls) -> "Policy":
        return cls(kind="myopic")

    @classmethod
    def threshold(cls, theta: int) -> "Policy":
        if theta < 1:
            raise ValueError("theta must be >= 1")
        return cls(kind="threshold", theta=theta)

    @classmethod
    def expected_value(cls) -> "Policy":
        return cls(kind="expected")

    @classmethod
    def consensus(cls, samples: int) -> "Policy":
        if samples < 1:
            raise ValueError("samples must be >= 1")
        return cls(kind="consensus", samples=samples)

    @property
    def name(self) -> str:
        if self.kind == "threshold":
            return f"threshold({self.theta})"
        if self.kind == "consensus":
            return f"consensus({self.samples})"
        return self.kind


@dataclass(frozen=True)
class SimConfig:
    grid_step: float = 1.0
    replications: int = 1
    master_seed: int = 0
    guard: OracleGuard = field(default_factory=lambda: OracleGuard(max_orders=8))

    def __post_init__(self):
        if self.grid_step <= 0:
            raise ValueError("grid_step must be > 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class Action:
    kind: str  # "wait" or "dispatch"
    orders: tuple[int, ...] = ()

    @classmethod
    def wait(cls) -> "Action":
        return cls(kind="wait")

    @classmethod
    def dispatch(cls, orders) -> "Action":
        return cls(kind="dispatch", orders=tuple(sorted(orders)))


@dataclass(frozen=True)
class DecisionState:
    t: float
    released: tuple[int, ...]
    pending: tuple[int, ...]
    inst: Instance
    rng: np.random.Generator
    grid_step: float = 1.0


@dataclass(frozen=True)
class EpisodeResult:
    served: int
    plan: Plan
    trace: tuple[tuple[float, Action], ...]


@dataclass(frozen=True)
class SimRow:
    replication: int
    policy: str
    served: int
    pi_bound: int


@dataclass(frozen=True)
class SimReport:
    rows: tuple[SimRow, ...]
    mean_served: dict[str, float]
    mean_pi: float


def sample_scenario(inst: Instance, rng: np.random.Generator) -> Scenario:
    """Draw one realized release time per order from its distribution."""
    missing = [o.id for o in inst.orders if o.release_dist is None]
    if missing:
        raise ConfigError(f"orders {missing} have no release distribution")
    return Scenario(releases={o.id: o.release_dist.sample(rng) for o in inst.orders})


def with_releases(inst: Instance, releases: dict[int, float]) -> Instance:
    """Deterministic copy of the instance with the given release dates."""
    orders = tuple(replace(o, release=float(releases[o.id])) for o in inst.orders)
    return validate_instance(replace(inst, orders=orders))


def _subproblem(inst: Instance, t: float, releases: dict[int, float]) -> Instance | None:
    """Deterministic residual instance on [t, horizon], shifted to start at 0.

    Returns None when no horizon remains. Only the release-date data survives;
    options and stations play no role in the dispatch model.
    """
    remaining = inst.horizon - t
    if remaining <= 1e-9:
        return None
    by_id = {o.id: o for o in inst.orders}
    orders = tuple(
        Order(id=oid, loc=by_id[oid].loc, release=max(0.0, releases[oid] - t))
        for oid in sorted(releases)
    )
    return validate_instance(Instance(depot=inst.depot, orders=orders, horizon=remaining))


def _first_action(report) -> tuple[str, tuple[int, ...]]:
    """First action of a deterministic plan: dispatch its first trip or wait."""
    if not report.plan.trips:
        return "wait", ()
    first = report.plan.trips[0]
    return "dispatch", tuple(sorted(first.route[1:-1]))


def _plan_first_dispatch(inst: Instance, t: float, released: dict[int, float], estimated: dict[int, float]) -> Action:
    """Solve the residual deterministic model and emit its first action.

    The first trip is dispatched only when every parcel in it is actually
    released; a trip built around estimated future arrivals cannot legally
    launch yet, so the policy waits and re-decides at the next epoch.
    """
    sub = _subproblem(inst, t, {**released, **estimated})
    if sub is None:
        return Action.wait()
    report = solve_f1(sub)
    kind, orders = _first_action(report)
    if kind == "dispatch" and orders and all(oid in released for oid in orders):
        return Action.dispatch(orders)
    return Action.wait()


def policy_decide(policy: Policy, state: DecisionState) -> Action:
    """Wait-or-dispatch decision for the current epoch."""
    inst = state.inst
    t = state.t
    released = {oid: 0.0 for oid in state.released}
    by_id = {o.id: o for o in inst.orders}

    if policy.kind == "myopic":
        if not released:
            return Action.wait()
        return _plan_first_dispatch(inst, t, released, {})

    if policy.kind == "threshold":
        if not released:
            return Action.wait()
        if len(released) < policy.theta:
            step = None
            for oid in state.released:
                o = by_id[oid]
                out = 2.0 * inst.depot.distance_to(o.loc)
                ok_now = t + out <= inst.horizon + 1e-9
                ok_next = t + state.grid_step + out <= inst.horizon + 1e-9
                if ok_now and not ok_next:
                    step = oid
                    break
            if step is None:
                return Action.wait()
        return _plan_first_dispatch(inst, t, released, {})

    if policy.kind == "expected":
        estimated = {
            oid: by_id[oid].release_dist.conditional_mean_after(t) for oid in state.pending
        }
        if not released and not estimated:
            return Action.wait()
        return _plan_first_dispatch(inst, t, released, estimated)

    if policy.kind == "consensus":
        votes: dict[str, list[float]] = {}
        sub_cache: dict[tuple, tuple[str, float]] = {}
        for _ in range(policy.samples):
            sampled = {
                oid: by_id[oid].release_dist.sample_after(t, state.rng) for oid in state.pending
            }
            sig = tuple(sorted(sampled.items()))
            hit = sub_cache.get(sig)
            if hit is None:
                sub = _subproblem(inst, t, {**released, **{k: v - t for k, v in sampled.items()}})
                if sub is None:
                    hit = ("wait", 0.0)
                else:
                    report = solve_f1(sub)
                    kind, orders = _first_action(report)
                    if kind == "dispatch" and orders and all(o in released for o in orders):
                        key = ",".join(str(o) for o in orders)
                    else:
                        key = "wait"
                    hit = (key, report.objective)
                sub_cache[sig] = hit
            votes.setdefault(hit[0], []).append(hit[1])
        ranked = sorted(
            votes.items(), key=lambda kv: (-len(kv[1]), -(sum(kv[1]) / len(kv[1])), kv[0])
        )
        key = ranked[0][0]
        if key == "wait":
            return Action.wait()
        return Action.dispatch(int(x) for x in key.split(","))

    raise ValueError(f"unknown policy kind {policy.kind!r}")


def run_episode(
    inst: Instance,
    scenario: Scenario,
    policy: Policy,
    cfg: SimConfig,
    policy_rng: np.random.Generator | None = None,
) -> EpisodeResult:
    """Execute one replication of the epoch loop and return what was served.

    The executed plan chains trips at their actual dispatch times and passes
    the relaxed release-date validation (inequality chaining, end before the
    horizon).
    """
    inst = validate_instance(inst)
    if len(inst.orders) > cfg.guard.max_orders:
        raise SizeGuardError(
            f"{len(inst.orders)} orders exceed the simulation guard {cfg.guard.max_orders}"
        )
    rng = policy_rng if policy_rng is not None else np.random.default_rng(cfg.master_seed)
    geo = Geometry(inst)
    realized = dict(scenario.releases)
    delivered: dict[int, OrderAssignment] = {}
    trips: list[Trip] = []
    trace: list[tuple[float, Action]] = []
    free_at = 0.0
    k = 0
    while True:
        t = k * cfg.grid_step
        if t > inst.horizon + 1e-9:
            break
        k += 1
        if t < free_at - 1e-9:
            continue
        released = tuple(
            sorted(oid for oid, r in realized.items() if r <= t + 1e-9 and oid not in delivered)
        )
        pending = tuple(sorted(oid for oid in realized if realized[oid] > t + 1e-9 and oid not in delivered))
        state = DecisionState(
            t=t, released=released, pending=pending, inst=inst, rng=rng, grid_step=cfg.grid_step
        )
        action = policy_decide(policy, state)
        trace.append((t, action))
        if action.kind == "wait":
            continue
        if not action.orders:
            raise ProtocolViolationError("dispatch with no orders")
        bad = [oid for oid in action.orders if oid not in released]
        if bad:
            raise ProtocolViolationError(f"dispatch of unreleased or already-served orders {bad}")
        length, tour = tsp_exact(geo.omat, [geo.order_idx[oid] for oid in action.orders])
        if t + length > inst.horizon + 1e-9:
            raise ProtocolViolationError(
                f"dispatch at {t} of tour length {length} would end past the horizon"
            )
        idx_to_id = {v: kk for kk, v in geo.order_idx.items()}
        route = tuple(0 if v == 0 else idx_to_id[v] for v in tour)
        trips.append(Trip(route=route, start=t, end=t + length))
        at = t
        prev = 0
        for v in tour[1:-1]:
            at += geo.omat[prev][v]
            delivered[idx_to_id[v]] = OrderAssignment(trip_index=len(trips) - 1, delivery_time=at)
            prev = v
        free_at = t + length
    plan = Plan(
        model_kind="F1",
        trips=tuple(trips),
        assignments=delivered,
        unserved=frozenset(oid for oid in realized if oid not in delivered),
    )
    exec_inst = with_releases(inst, realized)
    bad = validate_plan(exec_inst, plan, relaxed_chaining=True)
    if bad:  # pragma: no cover - the loop construction keeps this impossible
        raise ProtocolViolationError("executed plan failed validation: " + "; ".join(str(v) for v in bad))
    return EpisodeResult(served=len(delivered), plan=plan, trace=tuple(trace))


def _stream(master_seed: int, *key: int) -> np.random.Generator:
    ms = master_seed % (2**32)
    return np.random.default_rng(np.random.SeedSequence([ms, *key]))


def simulate(inst: Instance, policies: list[Policy], cfg: SimConfig) -> SimReport:
    """Run every policy against shared per-replication scenarios.

    Streams derive from (master seed, replication) for scenarios and
    (master seed, replication, policy-name hash) for policy sampling, so the
    report is independent of execution order.
    """
    inst = validate_instance(inst)
    if len(inst.orders) > cfg.guard.max_orders:
        raise SizeGuardError(
            f"{len(inst.orders)} orders exceed the simulation guard {cfg.guard.max_orders}"
        )
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise ValueError("policies must have distinct names")
    rows: list[SimRow] = []
    pi_total = 0.0
    served_totals = {p.name: 0.0 for p in policies}
    for rep in range(cfg.replications):
        scenario = sample_scenario(inst, _stream(cfg.master_seed, rep))
        pi_report = solve_f1(with_releases(inst, scenario.releases), SolverConfig())
        pi = int(round(pi_report.objective))
        pi_total += pi
        for policy in policies:
            prng = _stream(cfg.master_seed, rep, zlib.crc32(policy.name.encode()))
            result = run_episode(inst, scenario, policy, cfg, prng)
            rows.append(SimRow(replication=rep, policy=policy.name, served=result.served, pi_bound=pi))
            served_totals[policy.name] += result.served
    n = cfg.replications
    return SimReport(
        rows=tuple(rows),
        mean_served={name: total / n for name, total in served_totals.items()},
        mean_pi=pi_total / n,
    )


def sim_report_to_dict(report: SimReport) -> dict:
    return {
        "rows": [
            {"replication": r.replication, "policy": r.policy, "served": r.served, "pi_bound": r.pi_bound}
            for r in report.rows
        ],
        "mean_served": dict(sorted(report.mean_served.items())),
        "mean_pi": report.mean_pi,
    }


def sim_report_to_csv(report: SimReport) -> str:
    lines = ["replication,policy,served,pi_bound"]
    for r in report.rows:
        lines.append(f"{r.replication},{r.policy},{r.served},{r.pi_bound}")
    return "\n".join(lines) + "\n"
