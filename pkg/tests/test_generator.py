import json

import pytest

from sddr import instance_to_dict, validate_instance
from sddr.generator import (
    GeneratorProfile,
    extreme_wtp_instance,
    gen_instance,
    radius_family_instance,
    two_cluster_instance,
)

PROFILE = GeneratorProfile(
    orders=8, stations=3, radius=30.0, deadlines=(60.0, 120.0, 240.0), capacity=3, seed=7
)


def test_matches_reference_parameterization():
    inst = gen_instance(PROFILE)
    assert len(inst.orders) == 8
    assert len(inst.stations) == 3
    assert inst.horizon == 250.0
    assert inst.options.deadlines == (60.0, 120.0, 240.0)
    assert all(s.capacity == 3 for s in inst.stations)
    assert inst.big_m == 250.0


def test_empty_profile_is_valid():
    inst = gen_instance(GeneratorProfile(orders=0))
    assert inst.orders == ()


def test_same_seed_is_byte_identical():
    a = json.dumps(instance_to_dict(gen_instance(PROFILE)), sort_keys=True)
    b = json.dumps(instance_to_dict(gen_instance(PROFILE)), sort_keys=True)
    assert a == b


def test_different_seed_differs():
    other = GeneratorProfile(
        orders=8, stations=3, radius=30.0, deadlines=(60.0, 120.0, 240.0), capacity=3, seed=8
    )
    assert gen_instance(PROFILE) != gen_instance(other)


def test_wtp_nonincreasing_across_options():
    inst = gen_instance(PROFILE)
    for o in inst.orders:
        assert all(a >= b for a, b in zip(o.wtp, o.wtp[1:]))


def test_releases_respect_alpha_window():
    profile = GeneratorProfile(orders=30, alpha=0.4, horizon=200.0, seed=3)
    inst = gen_instance(profile)
    assert all(0.0 <= o.release <= 80.0 for o in inst.orders)


def test_locations_inside_square():
    inst = gen_instance(GeneratorProfile(orders=20, stations=4, side=50.0, seed=1))
    for loc in [o.loc for o in inst.orders] + [s.loc for s in inst.stations]:
        assert 0.0 <= loc.x <= 50.0 and 0.0 <= loc.y <= 50.0


def test_release_spread_attaches_uniform_windows():
    inst = gen_instance(GeneratorProfile(orders=5, release_spread=30.0, seed=2))
    for o in inst.orders:
        assert o.release_dist.kind == "uniform"
        assert o.release_dist.lo == o.release
        assert o.release_dist.hi <= inst.horizon


def test_generated_instances_validate():
    for seed in range(5):
        inst = gen_instance(
            GeneratorProfile(orders=6, stations=3, radius=35.0, deadlines=(60.0, 120.0, 240.0), seed=seed)
        )
        assert validate_instance(inst) == inst


def test_families_are_valid_and_deterministic():
    assert radius_family_instance(3, 30.0) == radius_family_instance(3, 30.0)
    assert extreme_wtp_instance(3) == extreme_wtp_instance(3)
    inst = two_cluster_instance()
    assert all(o.release_dist is not None for o in inst.orders)
