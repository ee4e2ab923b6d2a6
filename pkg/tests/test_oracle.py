import math
from dataclasses import replace

import pytest

from sddr import (
    Instance,
    Location,
    Order,
    SizeGuardError,
    eval_objective,
    oracle_solve,
    validate_instance,
    validate_plan,
)
from sddr.oracle import OracleGuard
from sddr.generator import GeneratorProfile, gen_instance
from conftest import build_instance

ALL_MODELS = ("F1", "F2", "F2LEX", "F3", "F4")


def full_instance(seed, orders=4):
    return gen_instance(
        GeneratorProfile(
            orders=orders, stations=3, radius=40.0, deadlines=(60.0, 120.0, 240.0), capacity=2, seed=seed
        )
    )


def test_guard_refuses_large_instances():
    inst = gen_instance(GeneratorProfile(orders=7, seed=0))
    with pytest.raises(SizeGuardError):
        oracle_solve(inst, "F1")
    # a custom guard admits it
    assert oracle_solve(inst, "F1", OracleGuard(max_orders=7)).optimal


def test_empty_instance_all_models():
    inst = full_instance(seed=1, orders=4)
    empty = validate_instance(replace(inst, orders=(), max_trips=1))
    for model in ALL_MODELS:
        assert oracle_solve(empty, model).objective == 0.0


def test_oracle_plans_validate_and_reevaluate():
    inst = full_instance(seed=3)
    for model in ALL_MODELS:
        report = oracle_solve(inst, model)
        assert validate_plan(inst, report.plan) == []
        assert eval_objective(inst, report.plan) == pytest.approx(report.objective, abs=1e-9)
        assert report.optimal and report.bound_gap == 0.0


def _transform(inst: Instance, angle: float, dx: float, dy: float) -> Instance:
    c, s = math.cos(angle), math.sin(angle)

    def move(loc: Location) -> Location:
        return Location(c * loc.x - s * loc.y + dx, s * loc.x + c * loc.y + dy)

    return validate_instance(
        replace(
            inst,
            depot=move(inst.depot),
            orders=tuple(replace(o, loc=move(o.loc)) for o in inst.orders),
            stations=tuple(replace(st, loc=move(st.loc)) for st in inst.stations),
        )
    )


def test_euclidean_congruence_invariance():
    inst = full_instance(seed=5)
    moved = _transform(inst, angle=0.61, dx=-40.0, dy=17.5)
    for model in ALL_MODELS:
        a = oracle_solve(inst, model).objective
        b = oracle_solve(moved, model).objective
        assert a == pytest.approx(b, abs=1e-6), model


def test_order_relabeling_invariance():
    inst = full_instance(seed=8)
    relabeled = validate_instance(
        replace(
            inst,
            orders=tuple(replace(o, id=o.id + 100) for o in inst.orders),
        )
    )
    for model in ALL_MODELS:
        assert oracle_solve(inst, model).objective == pytest.approx(
            oracle_solve(relabeled, model).objective, abs=1e-9
        ), model


def test_two_order_release_example_matches_solver_module_example():
    tight = build_instance(orders=[(1, 3, 4, 0), (2, -3, 4, 25)], horizon=30.0)
    loose = build_instance(orders=[(1, 3, 4, 0), (2, -3, 4, 20)], horizon=30.0)
    assert oracle_solve(tight, "F1").objective == 1.0
    assert oracle_solve(loose, "F1").objective == 2.0
