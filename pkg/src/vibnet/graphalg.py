"""Pure graph algorithms on the digraph view of a network system."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .errors import EdgeNotFound, NotADag
from .netcore import Edge, NetworkSystem, Permutation


class Situation(Enum):
    """Shape of a length-3 trail from j to i (no self-loop edges).

    PATH:            j, p, q, i all distinct
    HEAD_TWO_CYCLE:  p = i, the trail closes a 2-cycle at the head node
    TAIL_TWO_CYCLE:  q = j, the trail closes a 2-cycle at the tail node
    """

    PATH = "S1"
    HEAD_TWO_CYCLE = "S2"
    TAIL_TWO_CYCLE = "S3"


class TrailWitness(NamedTuple):
    edges: tuple[Edge, Edge, Edge]
    situation: Situation
    p: int
    q: int

    @property
    def nodes(self) -> tuple[int, int, int, int]:
        e1, e2, e3 = self.edges
        return (e1.source, e1.target, e2.target, e3.target)


def trails_of_length3(sys: NetworkSystem, j: int, i: int) -> list[TrailWitness]:
    """All trails {(j,p),(p,q),(q,i)} without self-loop edges, tagged by shape.

    The target pair (j, i) itself need not be an edge (creation witnesses
    search the same structure).  Requires i != j; ordered by (p, q).
    """
    if i == j:
        return []
    out = []
    for p in sys.out_neighbors(j):
        if p == j:
            continue
        for q in sys.out_neighbors(p):
            if q == p or q == i:
                continue
            if not sys.has_edge(q, i):
                continue
            e1 = Edge(j, p, sys.weight(j, p))
            e2 = Edge(p, q, sys.weight(p, q))
            e3 = Edge(q, i, sys.weight(q, i))
            pairs = {(j, p), (p, q), (q, i)}
            if len(pairs) < 3:
                continue  # repeated edge, not a trail
            if p == i:
                sit = Situation.HEAD_TWO_CYCLE
            elif q == j:
                sit = Situation.TAIL_TWO_CYCLE
            elif len({j, p, q, i}) == 4:
                sit = Situation.PATH
            else:
                continue
            out.append(TrailWitness((e1, e2, e3), sit, p, q))
    out.sort(key=lambda w: (w.p, w.q))
    return out


def in_two_cycle(sys: NetworkSystem, source: int, target: int) -> bool:
    """True iff edge (source, target) exists together with its opposite."""
    if not sys.has_edge(source, target):
        raise EdgeNotFound(f"({source},{target}) is not an edge")
    if source == target:
        return False
    return sys.has_edge(target, source)


def _off_diagonal_adjacency(sys: NetworkSystem):
    adj = {v: [] for v in range(1, sys.n + 1)}
    has_loop = False
    for e in _edge_pairs(sys):
        if e[0] == e[1]:
            has_loop = True
            continue
        adj[e[0]].append(e[1])
    return adj, has_loop


def _edge_pairs(sys: NetworkSystem):
    for i in range(sys.n):
        for j in range(sys.n):
            if sys.a[i, j] != 0.0:
                yield (j + 1, i + 1)


def _kahn_order(n: int, adj: dict[int, list[int]]) -> list[int] | None:
    indeg = {v: 0 for v in range(1, n + 1)}
    for v, outs in adj.items():
        for w in outs:
            indeg[w] += 1
    ready = sorted(v for v in indeg if indeg[v] == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                # keep determinism: insert sorted
                lo = 0
                while lo < len(ready) and ready[lo] < w:
                    lo += 1
                ready.insert(lo, w)
    return order if len(order) == n else None


def is_dag(sys: NetworkSystem, ignore_self_loops: bool = True) -> bool:
    adj, has_loop = _off_diagonal_adjacency(sys)
    if has_loop and not ignore_self_loops:
        return False
    return _kahn_order(sys.n, adj) is not None


def topological_order(sys: NetworkSystem) -> Permutation:
    """Permutation sending node v to its topological position, so that
    P A P^{-1} is lower-triangular off the diagonal.  Self-loops ignored."""
    adj, _ = _off_diagonal_adjacency(sys)
    order = _kahn_order(sys.n, adj)
    if order is None:
        raise NotADag("graph has a directed cycle")
    mapping = [0] * sys.n
    for pos, v in enumerate(order, start=1):
        mapping[v - 1] = pos
    return Permutation(tuple(mapping))


@dataclass(frozen=True)
class ComponentPartition:
    assignment: dict[int, int]

    @property
    def n_components(self) -> int:
        return len(set(self.assignment.values()))

    def component_edges(self, edges: Sequence[tuple[int, int]]) -> list[list[tuple[int, int]]]:
        groups: dict[int, list[tuple[int, int]]] = {}
        for (s, t) in edges:
            groups.setdefault(self.assignment[s], []).append((s, t))
        return [groups[k] for k in sorted(groups)]


def weak_components(edges: Sequence[tuple[int, int]], n: int) -> ComponentPartition:
    """Partition of the nodes touched by `edges` under undirected reachability."""
    parent: dict[int, int] = {}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (s, t) in edges:
        parent.setdefault(s, s)
        parent.setdefault(t, t)
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[max(rs, rt)] = min(rs, rt)

    roots = sorted({find(v) for v in parent})
    index = {r: k for k, r in enumerate(roots)}
    return ComponentPartition({v: index[find(v)] for v in parent})


def longest_trail_at_most_1(edges: Sequence[tuple[int, int]]) -> bool:
    """True iff no two distinct edges chain head-to-tail (every touched node
    is a pure source or a pure sink)."""
    pairs = list(edges)
    for k, a in enumerate(pairs):
        for m, b in enumerate(pairs):
            if k == m:
                continue
            if a[1] == b[0]:
                return False
    return True
