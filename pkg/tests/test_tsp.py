from itertools import permutations

import numpy as np
import pytest

from sddr import Location, SizeGuardError, distance_matrix, tsp_exact
from sddr.tsp import TourCache


def brute_force_tour(dist, nodes):
    """Permutation oracle: minimum closed depot tour, lexicographic ties."""
    best_len, best_tour = float("inf"), None
    for perm in permutations(sorted(nodes)):
        ln = dist[0][perm[0]] + sum(dist[a][b] for a, b in zip(perm, perm[1:])) + dist[perm[-1]][0]
        if ln < best_len:
            best_len, best_tour = ln, (0, *perm, 0)
    return best_len, best_tour


def test_single_node():
    d = distance_matrix([Location(0, 0), Location(3, 4)])
    length, tour = tsp_exact(d, [1])
    assert length == pytest.approx(10.0)
    assert tour == (0, 1, 0)


def test_collinear_pair():
    d = distance_matrix([Location(0, 0), Location(10, 0), Location(20, 0)])
    length, tour = tsp_exact(d, [1, 2])
    assert length == pytest.approx(40.0)
    assert tour == (0, 1, 2, 0)


def test_empty_subset_stays_home():
    d = distance_matrix([Location(0, 0)])
    assert tsp_exact(d, []) == (0.0, (0, 0))


def test_matches_permutation_oracle_on_random_points():
    rng = np.random.default_rng(7)
    for trial in range(12):
        pts = [Location(0, 0)] + [Location(float(x), float(y)) for x, y in rng.uniform(0, 50, size=(6, 2))]
        d = distance_matrix(pts)
        got_len, got_tour = tsp_exact(d, range(1, 7))
        want_len, _ = brute_force_tour(d, range(1, 7))
        assert got_len == pytest.approx(want_len, abs=1e-9)
        # the reported tour must actually have the reported length
        walk = sum(d[a][b] for a, b in zip(got_tour, got_tour[1:]))
        assert walk == pytest.approx(got_len, abs=1e-9)


def test_lexicographic_tie_break_on_symmetric_square():
    pts = [Location(0, 0), Location(1, 0), Location(1, 1), Location(0, 1)]
    d = distance_matrix(pts)
    _, tour = tsp_exact(d, [1, 2, 3])
    # both orientations are optimal; the smaller sequence wins
    assert tour == (0, 1, 2, 3, 0)


def test_size_guard():
    pts = [Location(float(i), 0.0) for i in range(17)]
    d = distance_matrix(pts)
    with pytest.raises(SizeGuardError):
        tsp_exact(d, range(1, 17))


def test_depot_in_subset_rejected():
    d = distance_matrix([Location(0, 0), Location(1, 1)])
    with pytest.raises(ValueError):
        tsp_exact(d, [0, 1])


def test_cache_returns_same_object():
    d = distance_matrix([Location(0, 0), Location(3, 4), Location(6, 0)])
    cache = TourCache(d)
    assert cache.tour([1, 2]) is cache.tour([2, 1])
    assert cache.length([1]) == pytest.approx(10.0)
