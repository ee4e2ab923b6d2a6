"""Seeded instance generation.

``gen_instance`` draws uniform geometry in a square: releases land in
``[0, alpha * horizon]``, willingness-to-pay vectors are sampled per order and
sorted nonincreasing across options (longer promised deadlines never cost
more), and stations share one capacity. Determinism holds per seed within
this implementation; bit-exactness across implementations is not a goal.

The module also builds the structured benchmark families used by the test
suite: a radius-sensitivity family where widening the customer travel radius
unlocks extra stations, an extreme-willingness-to-pay family where revenue
maximization abandons most customers, and a two-cluster stochastic family for
the dispatch simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Instance, Location, OptionSet, Order, ReleaseDist, Station, validate_instance


@dataclass(frozen=True)
class GeneratorProfile:
    orders: int
    stations: int = 0
    side: float = 100.0
    alpha: float = 0.5
    horizon: float = 250.0
    radius: float | None = None
    deadlines: tuple[float, ...] | None = None
    wtp_lo: float = 5.0
    wtp_hi: float = 50.0
    capacity: int = 3
    seed: int = 0
    release_spread: float = 0.0

    def __post_init__(self):
        if self.orders < 0 or self.stations < 0:
            raise ValueError("counts must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        if self.wtp_hi < self.wtp_lo:
            raise ValueError("wtp range inverted")
        if self.release_spread < 0:
            raise ValueError("release_spread must be >= 0")


def gen_instance(profile: GeneratorProfile) -> Instance:
    """Sample an instance from the profile; identical seeds give identical output."""
    rng = np.random.default_rng(profile.seed)
    depot = Location(profile.side / 2.0, profile.side / 2.0)
    orders = []
    n_opts = len(profile.deadlines) if profile.deadlines else 0
    for i in range(profile.orders):
        loc = Location(float(rng.uniform(0, profile.side)), float(rng.uniform(0, profile.side)))
        release = float(rng.uniform(0, profile.alpha * profile.horizon))
        wtp = None
        if n_opts:
            vals = sorted((float(rng.uniform(profile.wtp_lo, profile.wtp_hi)) for _ in range(n_opts)), reverse=True)
            wtp = tuple(vals)
        dist = None
        if profile.release_spread > 0:
            hi = min(release + profile.release_spread, profile.horizon)
            dist = ReleaseDist.uniform(release, hi)
        else:
            dist = ReleaseDist.point(release)
        orders.append(Order(id=i + 1, loc=loc, release=release, wtp=wtp, release_dist=dist))
    stations = [
        Station(
            id=j + 1,
            loc=Location(float(rng.uniform(0, profile.side)), float(rng.uniform(0, profile.side))),
            capacity=profile.capacity,
        )
        for j in range(profile.stations)
    ]
    return validate_instance(
        Instance(
            depot=depot,
            orders=tuple(orders),
            stations=tuple(stations),
            options=OptionSet(deadlines=tuple(profile.deadlines)) if profile.deadlines else None,
            horizon=profile.horizon,
            radius=profile.radius,
        )
    )


def radius_family_instance(seed: int, radius: float) -> Instance:
    """Five orders, three capacity-2 stations, radius-controlled feasibility.

    At radius 30 every customer reaches exactly one station but four of them
    share the capacity-2 station near the depot, so at most three can be
    served. At radius 40 two customers gain a second station each and all
    five become servable. Seeded jitter stays inside the geometric margins.
    """
    rng = np.random.default_rng(seed)

    def jitter(x: float, y: float, amount: float = 0.7) -> Location:
        return Location(x + float(rng.uniform(-amount, amount)), y + float(rng.uniform(-amount, amount)))

    depot = Location(0.0, 0.0)
    s1 = Station(id=1, loc=jitter(12.0, 0.0), capacity=2)
    s2 = Station(id=2, loc=jitter(16.0, 44.0), capacity=2)
    s3 = Station(id=3, loc=jitter(16.0, -44.0), capacity=2)
    orders = (
        Order(id=1, loc=jitter(8.0, -1.0), release=float(rng.uniform(0, 10))),
        Order(id=2, loc=jitter(17.0, 0.0), release=float(rng.uniform(0, 10))),
        # near station 1; reaches station 2 only once the radius hits 40
        Order(id=3, loc=jitter(14.0, 9.0), release=float(rng.uniform(20, 40))),
        # near station 1; reaches station 3 only once the radius hits 40
        Order(id=4, loc=jitter(14.0, -9.0), release=float(rng.uniform(40, 80))),
        Order(id=5, loc=jitter(18.0, 50.0), release=float(rng.uniform(20, 40))),
    )
    return validate_instance(
        Instance(
            depot=depot,
            orders=orders,
            stations=(s1, s2, s3),
            horizon=250.0,
            radius=radius,
            big_m=250.0,
        )
    )


def extreme_wtp_instance(seed: int) -> Instance:
    """Six cheap late-ish nearby orders plus two distant high-value ones.

    Revenue maximization serves only the expensive pair; the hierarchical
    variant serves the crowd. Deadlines follow the sixty/one-twenty/two-forty
    pattern over a 250-unit horizon.
    """
    rng = np.random.default_rng(seed)
    depot = Location(0.0, 0.0)

    def near(i: int) -> Order:
        # the near crowd sits in the half-plane away from the expensive pair,
        # so tacking one onto a far trip costs a long detour
        ang = np.deg2rad(100.0 + 32.0 * i)
        r = 8.0 + float(rng.uniform(0, 4))
        loc = Location(r * float(np.cos(ang)), r * float(np.sin(ang)))
        return Order(
            id=i + 1,
            loc=loc,
            release=160.0 + float(rng.uniform(0, 8)),
            wtp=(8.0, 6.0, 4.0),
        )

    far1 = Order(id=7, loc=Location(40.0 + float(rng.uniform(-1, 1)), 0.0), release=60.0, wtp=(250.0, 150.0, 80.0))
    far2 = Order(id=8, loc=Location(44.0 + float(rng.uniform(-1, 1)), 3.0), release=150.0, wtp=(250.0, 150.0, 80.0))
    return validate_instance(
        Instance(
            depot=depot,
            orders=tuple(near(i) for i in range(6)) + (far1, far2),
            options=OptionSet(deadlines=(60.0, 120.0, 240.0)),
            horizon=250.0,
        )
    )


def two_cluster_instance(near_releases: str = "early") -> Instance:
    """Stochastic benchmark: a near cluster releasing early, a far one late."""
    depot = Location(0.0, 0.0)
    near = [(8.0, 4.0), (10.0, -3.0), (6.0, -6.0)]
    far = [(60.0, 10.0), (65.0, 0.0), (58.0, -8.0)]
    orders = []
    for i, (x, y) in enumerate(near):
        orders.append(
            Order(
                id=i + 1,
                loc=Location(x, y),
                release=20.0,
                release_dist=ReleaseDist.uniform(0.0, 60.0),
            )
        )
    for i, (x, y) in enumerate(far):
        orders.append(
            Order(
                id=i + 4,
                loc=Location(x, y),
                release=120.0,
                release_dist=ReleaseDist.uniform(60.0, 170.0),
            )
        )
    return validate_instance(Instance(depot=depot, orders=tuple(orders), horizon=250.0))
