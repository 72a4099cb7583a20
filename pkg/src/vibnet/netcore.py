"""Linear network system data model.

A system dx/dt = A x is viewed as a weighted digraph: the edge (j, i)
runs from node j to node i and carries the coupling a_ij = A[i][j]
(row = head, column = tail).  Node ids are 1-based everywhere in the
public API; the matrix is stored 0-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidPermutation, ParseError, ValidationError


class Edge(NamedTuple):
    source: int
    target: int
    weight: float


@dataclass(frozen=True)
class NetworkSystem:
    """Immutable dense system matrix with its digraph view."""

    n: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.n, self.n):
            raise ValidationError(f"matrix shape {a.shape} does not match n={self.n}")
        if self.n < 1:
            raise ValidationError("need at least one node")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix entries must be finite")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "a", a)

    @classmethod
    def from_matrix(cls, a) -> "NetworkSystem":
        a = np.asarray(a, dtype=float)
        return cls(n=a.shape[0], a=a)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "NetworkSystem":
        a = np.zeros((n, n))
        for e in edges:
            a[e.target - 1, e.source - 1] = e.weight
        return cls(n=n, a=a)

    def weight(self, source: int, target: int) -> float:
        """Weight of edge (source, target); 0.0 means the edge is absent."""
        return float(self.a[target - 1, source - 1])

    def has_edge(self, source: int, target: int) -> bool:
        return self.a[target - 1, source - 1] != 0.0

    def out_neighbors(self, v: int) -> list[int]:
        return [int(i) + 1 for i in np.nonzero(self.a[:, v - 1])[0]]

    def in_neighbors(self, v: int) -> list[int]:
        return [int(j) + 1 for j in np.nonzero(self.a[v - 1, :])[0]]


def edges_of(sys: NetworkSystem) -> list[Edge]:
    """All edges in deterministic row-major order over matrix entries (i, j)."""
    out = []
    for i in range(sys.n):
        for j in range(sys.n):
            w = sys.a[i, j]
            if w != 0.0:
                out.append(Edge(source=j + 1, target=i + 1, weight=float(w)))
    return out


@dataclass(frozen=True)
class SignGraph:
    n: int
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=int)
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    def subgraph_of(self, other: "SignGraph") -> bool:
        """Entrywise: every nonzero entry here matches the sign there."""
        mine = self.s != 0
        return bool(np.all(~mine | (self.s == other.s)))


def sign_graph(sys_or_matrix) -> SignGraph:
    a = sys_or_matrix.a if isinstance(sys_or_matrix, NetworkSystem) else np.asarray(sys_or_matrix)
    return SignGraph(n=a.shape[0], s=np.sign(a).astype(int))


@dataclass(frozen=True)
class Permutation:
    """Bijection on {1..n}; mapping[k] is the image of node k+1."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(1, n + 1)):
            raise InvalidPermutation(f"not a bijection on 1..{n}: {self.mapping}")

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, v: int) -> int:
        return self.mapping[v - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for k, image in enumerate(self.mapping):
            inv[image - 1] = k + 1
        return Permutation(tuple(inv))

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.n, self.n))
        for k, image in enumerate(self.mapping):
            p[image - 1, k] = 1.0
        return p

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def swap(cls, n: int, u: int, v: int) -> "Permutation":
        m = list(range(1, n + 1))
        m[u - 1], m[v - 1] = v, u
        return cls(tuple(m))


def permute(sys: NetworkSystem, p: Permutation) -> NetworkSystem:
    """Relabel nodes: A' = P A P^{-1}.  Spectrum is preserved."""
    if p.n != sys.n:
        raise InvalidPermutation(f"permutation on {p.n} nodes, system has {sys.n}")
    pm = p.matrix()
    return NetworkSystem(n=sys.n, a=pm @ sys.a @ pm.T)


# --- JSON serialization ------------------------------------------------------
#
# Schema: {"n": <int>, "edges": [{"from": <int>, "to": <int>, "weight": <float>}]}
# Weights round-trip at full binary precision (shortest exact decimal).

def network_from_dict(doc: dict) -> NetworkSystem:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    try:
        n = doc["n"]
        raw_edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing key: {exc}") from exc
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError("'n' must be an integer")
    if n < 1:
        raise ValidationError("'n' must be >= 1")
    if not isinstance(raw_edges, list):
        raise ParseError("'edges' must be a list")
    a = np.zeros((n, n))
    seen = set()
    for rec in raw_edges:
        try:
            src, dst, w = rec["from"], rec["to"], rec["weight"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad edge record {rec!r}") from exc
        if not isinstance(src, int) or not isinstance(dst, int):
            raise ParseError(f"edge endpoints must be integers: {rec!r}")
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise ParseError(f"edge weight must be a number: {rec!r}")
        if not (1 <= src <= n and 1 <= dst <= n):
            raise ValidationError(f"edge ({src},{dst}) out of range 1..{n}")
        if (src, dst) in seen:
            raise ValidationError(f"duplicate edge ({src},{dst})")
        if w == 0:
            raise ValidationError(f"edge ({src},{dst}) has zero weight; drop it instead")
        if not math.isfinite(w):
            raise ValidationError(f"edge ({src},{dst}) has non-finite weight")
        seen.add((src, dst))
        a[dst - 1, src - 1] = float(w)
    return NetworkSystem(n=n, a=a)


def network_to_dict(sys: NetworkSystem) -> dict:
    return {
        "n": sys.n,
        "edges": [
            {"from": e.source, "to": e.target, "weight": e.weight}
            for e in edges_of(sys)
        ],
    }


def load_network(path) -> NetworkSystem:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return network_from_dict(doc)


def save_network(sys: NetworkSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(sys), fh, indent=2)
        fh.write("\n")
