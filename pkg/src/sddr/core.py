"""Domain types, instance validation, and geometry shared by all solvers.

Time and distance share one unit throughout: travel time between two nodes
equals their Euclidean distance. All reals are double-precision; general
comparisons use ``EPS`` and boundary inclusion uses ``BOUNDARY_EPS`` slack.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

EPS = 1e-6
BOUNDARY_EPS = 1e-9


class SddError(Exception):
    """Base class for all package errors."""


class InvalidInstanceError(SddError):
    """Instance failed validation; carries the full violation list."""

    def __init__(self, violations: list[str]):
        super().__init__("invalid instance: " + "; ".join(violations))
        self.violations = violations


class SizeGuardError(SddError):
    """An exhaustive routine was asked to exceed its size guard."""


class ConfigError(SddError):
    """Solver or simulation configuration is unusable for the given instance."""


@dataclass(frozen=True)
class Location:
    x: float
    y: float

    def distance_to(self, other: "Location") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class ReleaseDist:
    """Release-date distribution: point mass, uniform interval, or finite discrete.

    ``outcomes`` holds (time, probability) pairs for the discrete kind.
    """

    kind: str
    t: float | None = None
    lo: float | None = None
    hi: float | None = None
    outcomes: tuple[tuple[float, float], ...] | None = None

    @classmethod
    def point(cls, t: float) -> "ReleaseDist":
        return cls(kind="point", t=float(t))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ReleaseDist":
        return cls(kind="uniform", lo=float(lo), hi=float(hi))

    @classmethod
    def discrete(cls, outcomes: Iterable[tuple[float, float]]) -> "ReleaseDist":
        return cls(kind="discrete", outcomes=tuple((float(t), float(p)) for t, p in outcomes))

    def check(self) -> list[str]:
        errs: list[str] = []
        if self.kind == "point":
            if self.t is None or not math.isfinite(self.t) or self.t < 0:
                errs.append("point release distribution needs t >= 0")
        elif self.kind == "uniform":
            if self.lo is None or self.hi is None or not (0 <= self.lo <= self.hi):
                errs.append("uniform release distribution needs 0 <= lo <= hi")
        elif self.kind == "discrete":
            if not self.outcomes:
                errs.append("discrete release distribution needs outcomes")
            else:
                total = sum(p for _, p in self.outcomes)
                if any(p <= 0 for _, p in self.outcomes):
                    errs.append("discrete probabilities must be > 0")
                if any(t < 0 for t, _ in self.outcomes):
                    errs.append("discrete outcome times must be >= 0")
                if abs(total - 1.0) > 1e-9:
                    errs.append(f"discrete probabilities sum to {total}, not 1")
        else:
            errs.append(f"unknown release distribution kind {self.kind!r}")
        return errs

    def mean(self) -> float:
        if self.kind == "point":
            return float(self.t)
        if self.kind == "uniform":
            return (self.lo + self.hi) / 2.0
        return sum(t * p for t, p in self.outcomes)

    def support_contains(self, x: float) -> bool:
        if self.kind == "point":
            return abs(x - self.t) <= BOUNDARY_EPS
        if self.kind == "uniform":
            return self.lo - BOUNDARY_EPS <= x <= self.hi + BOUNDARY_EPS
        return any(abs(x - t) <= BOUNDARY_EPS for t, _ in self.outcomes)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "point":
            return float(self.t)
        if self.kind == "uniform":
            if self.hi == self.lo:
                return float(self.lo)
            return float(rng.uniform(self.lo, self.hi))
        times = [t for t, _ in self.outcomes]
        probs = [p for _, p in self.outcomes]
        total = sum(probs)
        idx = rng.choice(len(times), p=[p / total for p in probs])
        return float(times[idx])

    def conditional_mean_after(self, now: float) -> float:
        """Mean release time conditioned on releasing strictly after ``now``.

        A distribution whose support is entirely at or before ``now`` is
        treated as releasing at ``now`` (boundary convention).
        """
        if self.kind == "point":
            return float(self.t) if self.t > now else float(now)
        if self.kind == "uniform":
            if now < self.lo:
                return self.mean()
            if now >= self.hi:
                return float(now)
            return (now + self.hi) / 2.0
        tail = [(t, p) for t, p in self.outcomes if t > now]
        if not tail:
            return float(now)
        mass = sum(p for _, p in tail)
        return sum(t * p for t, p in tail) / mass

    def sample_after(self, now: float, rng: np.random.Generator) -> float:
        """Draw a release time conditioned on releasing strictly after ``now``."""
        if self.kind == "point":
            return float(self.t) if self.t > now else float(now)
        if self.kind == "uniform":
            lo = max(self.lo, now)
            if lo >= self.hi:
                return float(max(now, self.hi))
            return float(rng.uniform(lo, self.hi))
        tail = [(t, p) for t, p in self.outcomes if t > now]
        if not tail:
            return float(now)
        mass = sum(p for _, p in tail)
        idx = rng.choice(len(tail), p=[p / mass for _, p in tail])
        return float(tail[idx][0])


@dataclass(frozen=True)
class Order:
    id: int
    loc: Location
    release: float
    wtp: tuple[float, ...] | None = None
    feasible_stations: tuple[int, ...] | None = None
    release_dist: ReleaseDist | None = None


@dataclass(frozen=True)
class Station:
    id: int
    loc: Location
    capacity: int


@dataclass(frozen=True)
class OptionSet:
    """Delivery deadline options, strictly increasing, relative to order time."""

    deadlines: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.deadlines)


@dataclass(frozen=True)
class Instance:
    depot: Location
    orders: tuple[Order, ...]
    stations: tuple[Station, ...] = ()
    options: OptionSet | None = None
    horizon: float = 0.0
    radius: float | None = None
    big_m: float | None = None
    max_trips: int | None = None

    def order_by_id(self, oid: int) -> Order:
        for o in self.orders:
            if o.id == oid:
                return o
        raise KeyError(f"no order {oid}")

    def station_by_id(self, sid: int) -> Station:
        for s in self.stations:
            if s.id == sid:
                return s
        raise KeyError(f"no station {sid}")


def instance_violations(inst: Instance) -> list[str]:
    """Collect every validation violation without raising."""
    errs: list[str] = []
    if not (math.isfinite(inst.horizon) and inst.horizon > 0):
        errs.append("horizon must be > 0")
    for loc in [inst.depot] + [o.loc for o in inst.orders] + [s.loc for s in inst.stations]:
        if not (math.isfinite(loc.x) and math.isfinite(loc.y)):
            errs.append(f"non-finite coordinate ({loc.x}, {loc.y})")

    seen: set[int] = set()
    for o in inst.orders:
        if o.id <= 0:
            errs.append(f"order id {o.id} must be positive")
        if o.id in seen:
            errs.append(f"duplicate order id {o.id}")
        seen.add(o.id)
        if not (math.isfinite(o.release) and o.release >= 0):
            errs.append(f"order {o.id}: negative release")
        if o.wtp is not None:
            if inst.options is None:
                errs.append(f"order {o.id}: wtp given but instance has no options")
            elif len(o.wtp) != len(inst.options):
                errs.append(
                    f"order {o.id}: wtp length {len(o.wtp)} != {len(inst.options)} options"
                )
            if o.wtp is not None and any(u < 0 or not math.isfinite(u) for u in o.wtp):
                errs.append(f"order {o.id}: wtp values must be finite and >= 0")
        if o.release_dist is not None:
            errs.extend(f"order {o.id}: {e}" for e in o.release_dist.check())

    station_ids: set[int] = set()
    for s in inst.stations:
        if s.id <= 0:
            errs.append(f"station id {s.id} must be positive")
        if s.id in station_ids:
            errs.append(f"duplicate station id {s.id}")
        station_ids.add(s.id)
        if s.capacity < 0:
            errs.append(f"station {s.id}: capacity must be >= 0")

    for o in inst.orders:
        if o.feasible_stations is not None:
            for sid in o.feasible_stations:
                if sid not in station_ids:
                    errs.append(f"order {o.id}: unknown station {sid}")

    if inst.options is not None:
        ds = inst.options.deadlines
        if not ds or any(d <= 0 for d in ds) or any(b <= a for a, b in zip(ds, ds[1:])):
            errs.append("option deadlines must be strictly increasing and > 0")
    if inst.radius is not None and inst.radius < 0:
        errs.append("radius must be >= 0")
    if inst.big_m is not None and not math.isfinite(inst.big_m):
        errs.append("big_m must be finite")
    if inst.max_trips is not None and inst.max_trips < 1:
        errs.append("max_trips must be >= 1")
    return errs


def validate_instance(inst: Instance) -> Instance:
    """Validate and normalize an instance.

    Normalization materializes ``feasible_stations`` from the radius where an
    order has none (an explicit list always overrides radius derivation) and
    fills defaults: ``big_m`` = horizon, ``max_trips`` = number of orders.
    Raises :class:`InvalidInstanceError` listing every violation otherwise.
    Idempotent: validating a validated instance returns an equal one.
    """
    errs = instance_violations(inst)
    if errs:
        raise InvalidInstanceError(errs)
    orders = inst.orders
    if inst.radius is not None and inst.stations:
        orders = tuple(
            o
            if o.feasible_stations is not None
            else replace(o, feasible_stations=tuple(feasible_stations(o, inst.stations, inst.radius)))
            for o in orders
        )
    return replace(
        inst,
        orders=orders,
        big_m=inst.big_m if inst.big_m is not None else float(inst.horizon),
        max_trips=inst.max_trips if inst.max_trips is not None else max(1, len(inst.orders)),
    )


def distance_matrix(points: Sequence[Location]) -> np.ndarray:
    """Pairwise Euclidean distances; symmetric with a zero diagonal."""
    if len(points) < 1:
        raise ValueError("need at least one point")
    for p in points:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise ValueError(f"non-finite coordinate ({p.x}, {p.y})")
    xy = np.array([[p.x, p.y] for p in points], dtype=float)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def feasible_stations(order: Order, stations: Sequence[Station], radius: float) -> list[int]:
    """Station ids within ``radius`` of the order's location, sorted ascending.

    Boundary inclusion uses the package-wide ``BOUNDARY_EPS`` slack.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    out = [s.id for s in stations if order.loc.distance_to(s.loc) <= radius + BOUNDARY_EPS]
    return sorted(out)


class Geometry:
    """Node-index mappings and travel-time matrices for one instance.

    Index 0 is the depot in both matrices; orders and stations are mapped to
    indices 1.. in ascending id order. Matrices are plain float lists, which
    keeps the solvers' inner loops off numpy scalar overhead.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.order_ids: tuple[int, ...] = tuple(sorted(o.id for o in inst.orders))
        by_id = {o.id: o for o in inst.orders}
        self.order_idx = {oid: i + 1 for i, oid in enumerate(self.order_ids)}
        pts = [inst.depot] + [by_id[oid].loc for oid in self.order_ids]
        self.omat: list[list[float]] = distance_matrix(pts).tolist()
        self.release = {o.id: o.release for o in inst.orders}

        self.station_ids: tuple[int, ...] = tuple(sorted(s.id for s in inst.stations))
        s_by_id = {s.id: s for s in inst.stations}
        self.station_idx = {sid: i + 1 for i, sid in enumerate(self.station_ids)}
        if self.station_ids:
            spts = [inst.depot] + [s_by_id[sid].loc for sid in self.station_ids]
            self.smat: list[list[float]] = distance_matrix(spts).tolist()
        else:
            self.smat = [[0.0]]

    def _mat_idx(self, kind: str):
        if kind == "orders":
            return self.omat, self.order_idx
        return self.smat, self.station_idx

    def route_length(self, route: Sequence[int], kind: str = "orders") -> float:
        """Length of a closed depot route given as node ids (0 = depot)."""
        mat, idx = self._mat_idx(kind)
        total = 0.0
        prev = 0
        for node in route[1:]:
            cur = 0 if node == 0 else idx[node]
            total += mat[prev][cur]
            prev = cur
        return total

    def arrivals(self, route: Sequence[int], start: float, kind: str = "orders") -> dict[int, float]:
        """Arrival time at each interior node of a closed route started at ``start``."""
        mat, idx = self._mat_idx(kind)
        out: dict[int, float] = {}
        t = start
        prev = 0
        for node in route[1:-1]:
            cur = idx[node]
            t += mat[prev][cur]
            out[node] = t
            prev = cur
        return out


# ---------------------------------------------------------------------------
# Instance file format (JSON)

_TOP_KEYS = {"horizon", "depot", "options", "radius", "big_m", "max_trips", "orders", "stations"}
_ORDER_KEYS = {"id", "x", "y", "release", "wtp", "stations", "release_dist"}
_STATION_KEYS = {"id", "x", "y", "capacity"}
_DIST_KEYS = {"point": {"kind", "t"}, "uniform": {"kind", "lo", "hi"}, "discrete": {"kind", "values"}}


class MalformedInputError(SddError):
    """Input document does not match the documented schema."""


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise MalformedInputError(f"unknown keys in {where}: {sorted(unknown)}")


def _release_dist_from_dict(obj: dict, where: str) -> ReleaseDist:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise MalformedInputError(f"{where}: release_dist must be an object with a kind")
    kind = obj["kind"]
    if kind not in _DIST_KEYS:
        raise MalformedInputError(f"{where}: unknown release_dist kind {kind!r}")
    _reject_unknown(obj, _DIST_KEYS[kind], where + ".release_dist")
    if kind == "point":
        return ReleaseDist.point(obj["t"])
    if kind == "uniform":
        return ReleaseDist.uniform(obj["lo"], obj["hi"])
    return ReleaseDist.discrete((t, p) for t, p in obj["values"])


def _release_dist_to_dict(d: ReleaseDist) -> dict:
    if d.kind == "point":
        return {"kind": "point", "t": d.t}
    if d.kind == "uniform":
        return {"kind": "uniform", "lo": d.lo, "hi": d.hi}
    return {"kind": "discrete", "values": [[t, p] for t, p in d.outcomes]}


def instance_from_dict(doc: dict) -> Instance:
    """Parse the documented instance schema; unknown keys are rejected."""
    if not isinstance(doc, dict):
        raise MalformedInputError("instance document must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "instance")
    for key in ("horizon", "depot", "orders", "stations"):
        if key not in doc:
            raise MalformedInputError(f"instance missing required key {key!r}")
    depot = doc["depot"]
    _reject_unknown(depot, {"x", "y"}, "depot")
    options = None
    if doc.get("options") is not None:
        _reject_unknown(doc["options"], {"deadlines"}, "options")
        options = OptionSet(deadlines=tuple(float(d) for d in doc["options"]["deadlines"]))
    orders = []
    for i, od in enumerate(doc["orders"]):
        _reject_unknown(od, _ORDER_KEYS, f"orders[{i}]")
        orders.append(
            Order(
                id=int(od["id"]),
                loc=Location(float(od["x"]), float(od["y"])),
                release=float(od["release"]),
                wtp=tuple(float(u) for u in od["wtp"]) if od.get("wtp") is not None else None,
                feasible_stations=tuple(int(s) for s in od["stations"])
                if od.get("stations") is not None
                else None,
                release_dist=_release_dist_from_dict(od["release_dist"], f"orders[{i}]")
                if od.get("release_dist") is not None
                else None,
            )
        )
    stations = []
    for i, sd in enumerate(doc["stations"]):
        _reject_unknown(sd, _STATION_KEYS, f"stations[{i}]")
        stations.append(
            Station(id=int(sd["id"]), loc=Location(float(sd["x"]), float(sd["y"])), capacity=int(sd["capacity"]))
        )
    return Instance(
        depot=Location(float(depot["x"]), float(depot["y"])),
        orders=tuple(orders),
        stations=tuple(stations),
        options=options,
        horizon=float(doc["horizon"]),
        radius=float(doc["radius"]) if doc.get("radius") is not None else None,
        big_m=float(doc["big_m"]) if doc.get("big_m") is not None else None,
        max_trips=int(doc["max_trips"]) if doc.get("max_trips") is not None else None,
    )


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {
        "horizon": inst.horizon,
        "depot": {"x": inst.depot.x, "y": inst.depot.y},
        "orders": [],
        "stations": [
            {"id": s.id, "x": s.loc.x, "y": s.loc.y, "capacity": s.capacity} for s in inst.stations
        ],
    }
    if inst.options is not None:
        doc["options"] = {"deadlines": list(inst.options.deadlines)}
    if inst.radius is not None:
        doc["radius"] = inst.radius
    if inst.big_m is not None:
        doc["big_m"] = inst.big_m
    if inst.max_trips is not None:
        doc["max_trips"] = inst.max_trips
    for o in inst.orders:
        od: dict[str, Any] = {"id": o.id, "x": o.loc.x, "y": o.loc.y, "release": o.release}
        if o.wtp is not None:
            od["wtp"] = list(o.wtp)
        if o.feasible_stations is not None:
            od["stations"] = list(o.feasible_stations)
        if o.release_dist is not None:
            od["release_dist"] = _release_dist_to_dict(o.release_dist)
        doc["orders"].append(od)
    return doc


def load_instance(path: str | Path) -> Instance:
    """Read, parse, and validate an instance file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: {exc}") from exc
    return validate_instance(instance_from_dict(doc))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2, sort_keys=True) + "\n", encoding="utf-8")
