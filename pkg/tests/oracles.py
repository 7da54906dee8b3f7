"""Independent reference computations used only by the tests.

Nothing here imports the package's graph or statistics code.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations


def bfs_component_count(n: int, edges) -> int:
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, count = set(), 0
    for s in range(n):
        if s in seen:
            continue
        count += 1
        stack = [s]
        seen.add(s)
        while stack:
            v = stack.pop()
            for w in adj[v] - seen:
                seen.add(w)
                stack.append(w)
    return count


def cycle_space_dimension(n: int, edges) -> int:
    """log2 of the number of edge subsets in which every vertex has even degree."""
    edges = list(edges)
    even = 0
    for r in range(len(edges) + 1):
        for subset in combinations(edges, r):
            deg = [0] * n
            for a, b in subset:
                deg[a] += 1
                deg[b] += 1
            if all(d % 2 == 0 for d in deg):
                even += 1
    return int(round(math.log2(even)))


def exact_rank(rows) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    rank, cols = 0, len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def chi2_1_sf_erfc(x: float) -> float:
    return math.erfc(math.sqrt(x / 2.0))


def chi2_1_sf_quadrature(x: float, steps: int = 200_000) -> float:
    """1 - CDF by integrating the chi-square(1) density after t = u^2 (Simpson)."""
    # P(X <= x) = 2 * integral_0^sqrt(x) phi(u) du
    b = math.sqrt(x)
    h = b / steps
    phi = lambda u: math.exp(-u * u / 2) / math.sqrt(2 * math.pi)  # noqa: E731
    s = phi(0) + phi(b) + sum((4 if k % 2 else 2) * phi(k * h) for k in range(1, steps))
    return 1.0 - 2.0 * s * h / 3.0


def random_edges(rng, n: int, p: float):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
