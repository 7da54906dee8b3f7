"""Laplacian construction, component counting, rank and cycle number."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EigensolveFailure, InconsistentComponentCount
from .graph import PropertyGraph

DEFAULT_EPS = 1e-8
RANK_PIVOT_THRESHOLD = 1e-10


class UnionFind:
    """Disjoint-set forest with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.sets = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.sets -= 1
        return True


@dataclass(frozen=True)
class LaplacianMatrix:
    node_order: tuple[int, ...]
    entries: np.ndarray

    @property
    def order(self) -> int:
        return len(self.node_order)

    def adjacency(self) -> np.ndarray:
        a = -self.entries.copy()
        np.fill_diagonal(a, 0.0)
        return a

    def degrees(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def quadratic_form(self, x: np.ndarray) -> float:
        return float(x @ self.entries @ x)


@dataclass(frozen=True)
class ComponentPartition:
    count: int
    assignment: dict[int, int]

    def members(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.count)]
        for node_id, comp in self.assignment.items():
            groups[comp].append(node_id)
        return [sorted(g) for g in groups]


def laplacian(g: PropertyGraph) -> LaplacianMatrix:
    order = tuple(n.id for n in g.nodes)
    index = {nid: i for i, nid in enumerate(order)}
    n = len(order)
    adj = np.zeros((n, n))
    for a, b in g.simple_edges():
        i, j = index[a], index[b]
        adj[i, j] = adj[j, i] = 1.0
    lap = np.diag(adj.sum(axis=1)) - adj
    return LaplacianMatrix(order, lap)


def eigenvalues(lap: LaplacianMatrix) -> np.ndarray:
    if lap.order == 0:
        return np.zeros(0)
    try:
        return np.linalg.eigvalsh(lap.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc


def component_count_spectral(lap: LaplacianMatrix, eps: float = DEFAULT_EPS) -> int:
    """Multiplicity of the (numerically) zero eigenvalue."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    lam = eigenvalues(lap)
    if lam.size == 0:
        return 0
    threshold = eps * max(1.0, float(lam.max()))
    return int(np.count_nonzero(lam < threshold))


def matrix_rank(m: np.ndarray, threshold: float = RANK_PIVOT_THRESHOLD) -> int:
    """Rank by Gaussian elimination with full pivoting."""
    a = np.array(m, dtype=float, copy=True)
    rows, cols = a.shape if a.ndim == 2 else (0, 0)
    rank = 0
    for step in range(min(rows, cols)):
        sub = np.abs(a[step:, step:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= threshold:
            break
        i += step
        j += step
        a[[step, i], :] = a[[i, step], :]
        a[:, [step, j]] = a[:, [j, step]]
        pivot = a[step, step]
        factors = a[step + 1 :, step] / pivot
        a[step + 1 :, step:] -= np.outer(factors, a[step, step:])
        rank += 1
    return rank


def component_count_unionfind(g: PropertyGraph) -> ComponentPartition:
    ids = [n.id for n in g.nodes]
    index = {nid: i for i, nid in enumerate(ids)}
    uf = UnionFind(len(ids))
    for e in g.edges:
        uf.union(index[e.a], index[e.b])
    # dense component indices in order of first appearance
    comp_of_root: dict[int, int] = {}
    assignment = {}
    for nid in ids:
        root = uf.find(index[nid])
        assignment[nid] = comp_of_root.setdefault(root, len(comp_of_root))
    return ComponentPartition(len(comp_of_root), assignment)


def components(g: PropertyGraph, cross_check: bool = True, eps: float = DEFAULT_EPS) -> ComponentPartition:
    """Union-find partition, verified against the zero-eigenvalue count."""
    part = component_count_unionfind(g)
    if cross_check:
        spectral = component_count_spectral(laplacian(g), eps)
        if spectral != part.count:
            raise InconsistentComponentCount(spectral, part.count)
    return part


def cycle_number(g: PropertyGraph) -> int:
    """Dimension of the cycle space, |E| - |V| + c, on the simple graph."""
    c = component_count_unionfind(g).count
    return len(g.simple_edges()) - len(g.nodes) + c


def induced_subgraph(g: PropertyGraph, keep: Callable[[int], bool]) -> PropertyGraph:
    nodes = tuple(n for n in g.nodes if keep(n.id))
    kept = {n.id for n in nodes}
    edges = tuple(e for e in g.edges if e.a in kept and e.b in kept)
    return PropertyGraph(nodes, edges)


def spanning_forest(g: PropertyGraph) -> tuple[dict[int, int | None], list[tuple[int, int]]]:
    """BFS forest: (parent map, non-tree edges). Roots are visited in node order."""
    parent: dict[int, int | None] = {}
    tree = set()
    for n in g.nodes:
        if n.id in parent:
            continue
        parent[n.id] = None
        queue = deque([n.id])
        while queue:
            u = queue.popleft()
            for v in sorted(g.neighbors(u)):
                if v not in parent:
                    parent[v] = u
                    tree.add((min(u, v), max(u, v)))
                    queue.append(v)
    back = [e for e in g.simple_edges() if e not in tree]
    return parent, back


def fundamental_cycles(g: PropertyGraph) -> list[list[int]]:
    """One cycle (as a node sequence) per non-tree edge of the BFS forest."""
    parent, back = spanning_forest(g)

    def path_to_root(v: int) -> list[int]:
        out = [v]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    cycles = []
    for u, v in back:
        pu, pv = path_to_root(u), path_to_root(v)
        on_pv = set(pv)
        lca = next(x for x in pu if x in on_pv)
        up = pu[: pu.index(lca) + 1]
        down = pv[: pv.index(lca)]
        cycles.append(up + list(reversed(down)))
    return cycles


def shortest_path(g: PropertyGraph, source: int, target: int) -> list[int] | None:
    prev: dict[int, int | None] = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == target:
            path = [u]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for v in sorted(g.neighbors(u)):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    return None


def bfs_distances(g: PropertyGraph, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist
