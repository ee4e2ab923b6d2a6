import pytest

from sddr import Instance, Location, OptionSet, Order, Station, validate_instance


@pytest.fixture
def options():
    return OptionSet(deadlines=(60.0, 120.0, 240.0))


def build_instance(
    orders,
    stations=(),
    options=None,
    horizon=250.0,
    radius=None,
    big_m=None,
    max_trips=None,
    depot=(0.0, 0.0),
    validate=True,
):
    """Compact instance builder.

    ``orders`` entries are (id, x, y, release) or (id, x, y, release, wtp) or
    (id, x, y, release, wtp, stations); ``stations`` entries are
    (id, x, y, capacity).
    """
    built_orders = []
    for entry in orders:
        oid, x, y, release = entry[:4]
        wtp = tuple(entry[4]) if len(entry) > 4 and entry[4] is not None else None
        feas = tuple(entry[5]) if len(entry) > 5 and entry[5] is not None else None
        built_orders.append(
            Order(id=oid, loc=Location(float(x), float(y)), release=float(release), wtp=wtp, feasible_stations=feas)
        )
    built_stations = tuple(Station(id=s, loc=Location(float(x), float(y)), capacity=int(c)) for s, x, y, c in stations)
    inst = Instance(
        depot=Location(*depot),
        orders=tuple(built_orders),
        stations=built_stations,
        options=options,
        horizon=horizon,
        radius=radius,
        big_m=big_m,
        max_trips=max_trips,
    )
    return validate_instance(inst) if validate else inst
