"""Exact depot-rooted tours by Held-Karp dynamic programming.

Node 0 is the depot by convention; tours are closed walks ``0 -> ... -> 0``
over a subset of matrix indices. Ties between optimal tours are broken by
the lexicographically smallest node sequence, which makes results
deterministic across runs.
"""

from __future__ import annotations

from typing import Sequence

from .core import SizeGuardError

HELD_KARP_LIMIT = 14


def tsp_exact(dist, nodes: Sequence[int], limit: int = HELD_KARP_LIMIT) -> tuple[float, tuple[int, ...]]:
    """Minimum-length closed tour from the depot through ``nodes``.

    ``dist`` is any ``dist[u][v]`` indexable matrix with depot at index 0.
    Returns ``(length, tour)`` with ``tour = (0, ..., 0)``. The empty subset
    yields the zero-length stay-at-depot tour.
    """
    order = sorted(set(nodes))
    if 0 in order:
        raise ValueError("subset must not contain the depot")
    n = len(order)
    if n > limit:
        raise SizeGuardError(f"tsp subset of {n} exceeds limit {limit}")
    if n == 0:
        return 0.0, (0, 0)
    if n == 1:
        a = order[0]
        return float(dist[0][a]) + float(dist[a][0]), (0, a, 0)

    d = [[float(dist[u][v]) for v in order] for u in order]
    d0 = [float(dist[0][v]) for v in order]
    dh = [float(dist[v][0]) for v in order]

    # cost_to_go[mask][j]: leave node j, visit every node in mask, return to depot
    full = (1 << n) - 1
    cost_to_go = [[0.0] * n for _ in range(full + 1)]
    for j in range(n):
        cost_to_go[0][j] = dh[j]
    for mask in range(1, full + 1):
        row = cost_to_go[mask]
        for j in range(n):
            if mask & (1 << j):
                continue
            best = float("inf")
            m = mask
            while m:
                k = (m & -m).bit_length() - 1
                m &= m - 1
                c = d[j][k] + cost_to_go[mask ^ (1 << k)][k]
                if c < best:
                    best = c
            row[j] = best

    total = min(d0[k] + cost_to_go[full ^ (1 << k)][k] for k in range(n))

    # greedy reconstruction keeps only choices that preserve optimality,
    # taking the smallest node id first
    tour = [0]
    mask = full
    last = -1  # -1 marks the depot
    remaining = total
    while mask:
        for k in range(n):
            if not mask & (1 << k):
                continue
            step = d0[k] if last < 0 else d[last][k]
            if step + cost_to_go[mask ^ (1 << k)][k] <= remaining + 1e-9:
                tour.append(order[k])
                mask ^= 1 << k
                remaining = cost_to_go[mask][k]
                last = k
                break
        else:  # pragma: no cover - defensive, unreachable for consistent tables
            raise RuntimeError("tour reconstruction failed")
    tour.append(0)
    return total, tuple(tour)


class TourCache:
    """Memoizes exact tours per distance matrix, keyed by node subset."""

    def __init__(self, dist, limit: int = HELD_KARP_LIMIT):
        self.dist = dist
        self.limit = limit
        self._memo: dict[frozenset[int], tuple[float, tuple[int, ...]]] = {}

    def tour(self, nodes: Sequence[int]) -> tuple[float, tuple[int, ...]]:
        key = frozenset(nodes)
        hit = self._memo.get(key)
        if hit is None:
            hit = tsp_exact(self.dist, sorted(key), limit=self.limit)
            self._memo[key] = hit
        return hit

    def length(self, nodes: Sequence[int]) -> float:
        return self.tour(nodes)[0]
