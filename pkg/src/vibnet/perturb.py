"""Realizability of weight perturbations and stabilizing-plan search.

A perturbation matrix holds desired entry changes delta_ij.  Realizable
perturbations decompose into clusters, each drivable by one of three
mechanisms without touching anything else:

  single_direct  one entry, vibration on the edge itself
  single_joint   one entry, same-frequency pair on an all-distinct trail
                 whose drivers have no opposite edges (no side effects)
  multi_direct   several directly modifiable entries, no head-to-tail
                 chaining, one incommensurable frequency each
  multi_joint    a fan into or out of one node, anchored at the unique
                 member sitting in a 2-cycle, one shared frequency

Removable edge sets relax exactness: other edges may change weight as long
as the functioning graph's support is exactly the original minus the set.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    AssumptionViolated,
    NotFound,
    NotSingleEdge,
    ParseError,
    Unrealizable,
    ValidationError,
)
from .graphalg import (
    Situation,
    in_two_cycle,
    is_dag,
    longest_trail_at_most_1,
    trails_of_length3,
    weak_components,
)
from .modanalysis import driver_edges_of
from .netcore import NetworkSystem
from .numerics import spectral_abscissa


@dataclass(frozen=True)
class PerturbationMatrix:
    n: int
    delta: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=float)
        if d.shape != (self.n, self.n):
            raise ValidationError(f"delta shape {d.shape} does not match n={self.n}")
        if not np.all(np.isfinite(d)):
            raise ValidationError("delta entries must be finite")
        if np.any(np.diag(d) != 0.0):
            raise ValidationError("diagonal perturbations are not edges")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "delta", d)

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[int, int, float]]):
        d = np.zeros((n, n))
        for (i, j, v) in entries:
            d[i - 1, j - 1] = v
        return cls(n=n, delta=d)

    def support(self) -> list[tuple[int, int, float]]:
        """Nonzero entries (i, j, delta_ij) in row-major order, 1-based."""
        out = []
        for i in range(self.n):
            for j in range(self.n):
                if self.delta[i, j] != 0.0:
                    out.append((i + 1, j + 1, float(self.delta[i, j])))
        return out


def perturbation_from_dict(doc: dict, n: int) -> PerturbationMatrix:
    try:
        recs = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad perturbation document: {exc}") from exc
    entries = []
    for rec in recs:
        try:
            entries.append((int(rec["i"]), int(rec["j"]), float(rec["delta"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad perturbation entry {rec!r}") from exc
        i, j, _ = entries[-1]
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValidationError(f"entry ({i},{j}) out of range 1..{n}")
        if i == j:
            raise ValidationError("diagonal perturbations are not edges")
    return PerturbationMatrix.from_entries(n, entries)


def load_perturbation(path, n: int) -> PerturbationMatrix:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return perturbation_from_dict(doc, n)


@dataclass(frozen=True)
class Cluster:
    """One independently drivable piece of a perturbation."""

    kind: str                                    # single_direct | single_joint | multi_direct | multi_joint
    targets: tuple[tuple[int, int, float], ...]  # entries (i, j, delta)
    driver_set: tuple[tuple[int, int], ...]      # edges (source, target)
    frequency_class: str                         # shared | per_edge
    anchor: Optional[tuple[int, int]] = None
    witness: Optional[object] = None             # TrailWitness for single_joint
    anchor_delta: Optional[float] = None         # weight nudge for an outside anchor

    def target_positions(self) -> set[tuple[int, int]]:
        return {(i, j) for (i, j, _) in self.targets}


@dataclass(frozen=True)
class StabilizationPlan:
    delta: PerturbationMatrix
    clusters: tuple[Cluster, ...]
    certificate: float                          # spectral abscissa of A + delta


def cluster_to_dict(c: Cluster) -> dict:
    doc = {
        "kind": c.kind,
        "targets": [list(t) for t in c.targets],
        "drivers": [list(e) for e in c.driver_set],
        "anchor": list(c.anchor) if c.anchor else None,
        "frequency_class": c.frequency_class,
    }
    if c.witness is not None:
        doc["witness"] = {"p": c.witness.p, "q": c.witness.q}
    if c.anchor_delta is not None:
        doc["anchor_delta"] = c.anchor_delta
    return doc


def cluster_from_dict(sys: NetworkSystem, doc: dict) -> Cluster:
    try:
        kind = doc["kind"]
        targets = tuple((int(i), int(j), float(d)) for (i, j, d) in doc["targets"])
        drivers = tuple((int(s), int(t)) for (s, t) in doc["drivers"])
        freq = doc["frequency_class"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad cluster record: {exc}") from exc
    anchor = tuple(doc["anchor"]) if doc.get("anchor") else None
    witness = None
    if "witness" in doc:
        (i, j, _) = targets[0]
        p, q = int(doc["witness"]["p"]), int(doc["witness"]["q"])
        for w in trails_of_length3(sys, j, i):
            if (w.p, w.q) == (p, q):
                witness = w
                break
        if witness is None:
            raise ValidationError(
                f"witness trail via ({p},{q}) not found in the network")
    return Cluster(kind=kind, targets=targets, driver_set=drivers,
                   frequency_class=freq, anchor=anchor, witness=witness,
                   anchor_delta=doc.get("anchor_delta"))


def plan_summary_dict(plan: StabilizationPlan) -> dict:
    return {
        "certificate": plan.certificate,
        "entries": [
            {"i": i, "j": j, "delta": d}
            for (i, j, d) in plan.delta.support()
        ],
        "clusters": [cluster_to_dict(c) for c in plan.clusters],
    }


def stabilization_plan_from_dict(sys: NetworkSystem, doc: dict) -> StabilizationPlan:
    try:
        entries = [(int(r["i"]), int(r["j"]), float(r["delta"]))
                   for r in doc["entries"]]
        clusters = tuple(cluster_from_dict(sys, c) for c in doc["clusters"])
        cert = float(doc["certificate"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad stabilization plan: {exc}") from exc
    return StabilizationPlan(
        delta=PerturbationMatrix.from_entries(sys.n, entries),
        clusters=clusters, certificate=cert)


# --- single-entry realizability ------------------------------------------------

def _uni_sign(sys: NetworkSystem, j: int, i: int) -> int:
    """c_uni entry for the pair (j, i): sign of the allowed direct change."""
    if sys.weight(j, i) == 0.0:
        return 0
    a_ji = sys.weight(i, j)
    if a_ji < 0:
        return 1
    if a_ji > 0:
        return -1
    return 0


def _clean_joint_witnesses(sys: NetworkSystem, j: int, i: int) -> list:
    """All-distinct trail witnesses whose two driver edges have no opposite
    edges; with a_ji = 0 this kills every averaged side effect."""
    out = []
    for w in trails_of_length3(sys, j, i):
        if w.situation is not Situation.PATH:
            continue
        p, q = w.p, w.q
        if sys.weight(p, j) == 0.0 and sys.weight(i, q) == 0.0:
            out.append(w)
    return out


def _single_cluster_options(sys: NetworkSystem, i: int, j: int, d: float,
                            mode: str = "auto") -> list[Cluster]:
    """Realization options for the single entry delta_ij = d, best first."""
    src, dst = j, i
    options = []
    if mode in ("auto", "direct"):
        cu = _uni_sign(sys, src, dst)
        if cu != 0 and (d > 0) == (cu > 0):
            options.append(Cluster(
                kind="single_direct", targets=((i, j, d),),
                driver_set=((src, dst),), frequency_class="shared"))
    if mode in ("auto", "joint"):
        if sys.weight(dst, src) == 0.0:  # no opposite edge
            for w in _clean_joint_witnesses(sys, src, dst):
                options.append(Cluster(
                    kind="single_joint", targets=((i, j, d),),
                    driver_set=tuple(sorted(driver_edges_of(w))),
                    frequency_class="shared", witness=w))
    return options


def check_single(sys: NetworkSystem, pm: PerturbationMatrix,
                 mode: str = "auto") -> Cluster:
    """Realizability of a one-edge perturbation.

    Accepts either a direct vibration in the allowed direction, or a clean
    joint pair (target's opposite edge absent, both drivers with no opposite
    edges).  `mode` can force the joint route.
    """
    sup = pm.support()
    if len(sup) != 1:
        raise NotSingleEdge(f"support has {len(sup)} entries")
    (i, j, d) = sup[0]
    options = _single_cluster_options(sys, i, j, d, mode=mode)
    if options:
        return options[0]
    # build a reason
    cu = _uni_sign(sys, j, i)
    if mode == "joint" and sys.weight(i, j) != 0.0:
        raise Unrealizable(
            f"entry ({i},{j}): opposite edge exists (a_ji != 0), joint pair "
            "would leak onto it", entry=(i, j))
    if cu != 0 and (d > 0) != (cu > 0):
        raise Unrealizable(
            f"entry ({i},{j}): direct change only allowed in direction {cu:+d}",
            entry=(i, j))
    raise Unrealizable(
        f"entry ({i},{j}): no direct route and no side-effect-free driver pair",
        entry=(i, j))


def check_multi_direct(sys: NetworkSystem, pm: PerturbationMatrix) -> Cluster:
    """Several directly modifiable entries at once; needs sign compatibility
    with c_uni on every entry and no head-to-tail chaining among targets."""
    sup = pm.support()
    if len(sup) < 2:
        raise Unrealizable("multi-edge check needs at least 2 entries")
    edges = []
    for (i, j, d) in sup:
        cu = _uni_sign(sys, j, i)
        if cu == 0:
            raise Unrealizable(f"entry ({i},{j}): not directly modifiable",
                               entry=(i, j))
        if (d > 0) != (cu > 0):
            raise Unrealizable(f"entry ({i},{j}): sign {d:+g} against allowed "
                               f"direction {cu:+d}", entry=(i, j))
        edges.append((j, i))
    if not longest_trail_at_most_1(edges):
        raise Unrealizable("target edges chain head-to-tail (trail longer than 1)")
    return Cluster(kind="multi_direct", targets=tuple(sup),
                   driver_set=tuple(sorted(edges)), frequency_class="per_edge")


def check_multi_joint(sys: NetworkSystem, pm: PerturbationMatrix) -> Cluster:
    """Shared-frequency fan: exactly one target edge in a 2-cycle (the anchor,
    whose change must follow its direct direction), all targets entering the
    anchor's head or leaving its tail."""
    sup = pm.support()
    if len(sup) < 2:
        raise Unrealizable("multi-edge check needs at least 2 entries")
    anchors = []
    for (i, j, d) in sup:
        if sys.weight(j, i) == 0.0:
            raise Unrealizable(f"entry ({i},{j}): target edge does not exist",
                               entry=(i, j))
        if i != j and sys.weight(i, j) != 0.0:
            anchors.append((i, j, d))
    if len(anchors) != 1:
        raise Unrealizable(
            f"need exactly one target in a 2-cycle, found {len(anchors)}")
    (i0, j0, d0) = anchors[0]
    cu = _uni_sign(sys, j0, i0)
    if (d0 > 0) != (cu > 0):
        raise Unrealizable(
            f"anchor ({i0},{j0}): delta {d0:+g} against allowed direction {cu:+d}",
            entry=(i0, j0))
    fan_in = all(i == i0 for (i, j, d) in sup)
    fan_out = all(j == j0 for (i, j, d) in sup)
    if not (fan_in or fan_out):
        raise Unrealizable(
            f"targets must all enter node {i0} or all leave node {j0}")
    edges = tuple(sorted((j, i) for (i, j, _) in sup))
    return Cluster(kind="multi_joint", targets=tuple(sup), driver_set=edges,
                   frequency_class="shared", anchor=(j0, i0))


# --- decomposition ----------------------------------------------------------------

_EXHAUSTIVE_SUPPORT = 10


def _try_multi(sys: NetworkSystem, entries: Sequence[tuple[int, int, float]]):
    pm = PerturbationMatrix.from_entries(sys.n, entries)
    try:
        return check_multi_direct(sys, pm)
    except Unrealizable:
        pass
    try:
        return check_multi_joint(sys, pm)
    except Unrealizable:
        return None


def _candidate_blocks(sys: NetworkSystem, remaining: list, exhaustive: bool):
    """Clusters covering remaining[0], largest blocks first."""
    pivot = remaining[0]
    rest = remaining[1:]
    blocks = []
    max_extra = len(rest) if exhaustive else len(rest)
    for size in range(max_extra, 0, -1):
        for combo in itertools.combinations(rest, size):
            c = _try_multi(sys, (pivot,) + combo)
            if c is not None:
                blocks.append(c)
        if blocks and not exhaustive:
            break
    (i, j, d) = pivot
    blocks.extend(_single_cluster_options(sys, i, j, d))
    return blocks


def decompose(sys: NetworkSystem, pm: PerturbationMatrix) -> list[Cluster]:
    """Partition the support of a perturbation into realizable clusters with
    mutually disjoint driver sets.

    Backtracking over candidate blocks (largest first) below 11 entries;
    first-fit greedy above.  Raises Unrealizable naming the first entry that
    no block can cover.
    """
    support = pm.support()
    if not support:
        return []
    exhaustive = len(support) <= _EXHAUSTIVE_SUPPORT

    def cover(remaining: list, used_drivers: frozenset):
        if not remaining:
            return []
        for block in _candidate_blocks(sys, remaining, exhaustive):
            drv = set(block.driver_set)
            if drv & used_drivers:
                continue
            covered = block.target_positions()
            rest = [e for e in remaining if (e[0], e[1]) not in covered]
            tail = cover(rest, used_drivers | frozenset(drv))
            if tail is not None:
                return [block] + tail
            if not exhaustive:
                return None
        return None

    result = cover(support, frozenset())
    if result is None:
        (i, j, d) = support[0]
        raise Unrealizable(
            f"no driver-disjoint cluster cover found starting from entry "
            f"({i},{j})", entry=(i, j))
    return result


# --- removable edge sets ------------------------------------------------------------

def _removal_entry(sys: NetworkSystem, edge: tuple[int, int]) -> tuple[int, int, float]:
    (s, t) = edge
    w = sys.weight(s, t)
    if w == 0.0:
        raise Unrealizable(f"({s},{t}) is not an edge")
    return (t, s, -w)


def _single_removal_options(sys: NetworkSystem, edge: tuple[int, int]) -> list[Cluster]:
    """Corollary-style acceptance ladder for removing one edge; cases that
    cannot create new edges come first."""
    (s, t) = edge
    target = _removal_entry(sys, edge)
    a_ij = sys.weight(s, t)
    a_ji = sys.weight(t, s)
    options = []
    # (a) direct removal: opposite edge of the same sign
    if a_ji != 0.0 and (a_ij > 0) == (a_ji > 0):
        options.append(Cluster(kind="single_direct", targets=(target,),
                               driver_set=((s, t),), frequency_class="shared"))
    witnesses = trails_of_length3(sys, s, t)
    paths = [w for w in witnesses if w.situation is Situation.PATH]
    cycles = [w for w in witnesses if w.situation is not Situation.PATH]
    if a_ji == 0.0:
        # (b) path-enabled, not directly modifiable: no leak positions at all
        for w in paths:
            options.append(Cluster(kind="single_joint", targets=(target,),
                                   driver_set=tuple(sorted(driver_edges_of(w))),
                                   frequency_class="shared", witness=w))
    else:
        # (c) path-enabled and directly modifiable: the pair leaks onto the
        # reverse of the trail's middle edge, so that entry must be occupied
        for w in paths:
            if sys.a[w.p - 1, w.q - 1] != 0.0:
                options.append(Cluster(kind="single_joint", targets=(target,),
                                       driver_set=tuple(sorted(driver_edges_of(w))),
                                       frequency_class="shared", witness=w))
    # (d) 2-cycle-enabled: leaks only onto the co-driver edge's own weight
    for w in cycles:
        options.append(Cluster(kind="single_joint", targets=(target,),
                               driver_set=tuple(sorted(driver_edges_of(w))),
                               frequency_class="shared", witness=w))
    return options


def check_removable_set(sys: NetworkSystem, edges: Sequence[tuple[int, int]]) -> Cluster:
    """Accept an edge set for functional removal (weight changes elsewhere are
    fine, created edges are not).  Returns the realizing cluster."""
    edges = [tuple(e) for e in edges]
    if not edges:
        raise Unrealizable("empty removal set")
    for e in edges:
        if sys.weight(*e) == 0.0:
            raise Unrealizable(f"({e[0]},{e[1]}) is not an edge")
    if len(edges) == 1:
        options = _single_removal_options(sys, edges[0])
        if not options:
            raise Unrealizable(
                f"edge {edges[0]} is not removable by any single-edge route")
        return options[0]

    targets = tuple(_removal_entry(sys, e) for e in sorted(edges))
    in_cycle = [e for e in edges if in_two_cycle(sys, *e)]

    # all directly removable with no chaining: independent direct cancellations
    all_direct = all(
        sys.weight(t, s) != 0.0 and (sys.weight(s, t) > 0) == (sys.weight(t, s) > 0)
        for (s, t) in edges)
    if all_direct and longest_trail_at_most_1(edges):
        return Cluster(kind="multi_direct", targets=targets,
                       driver_set=tuple(sorted(edges)), frequency_class="per_edge")

    if len(in_cycle) == 1:
        # anchored fan: the unique 2-cycle member must itself be directly
        # removable and every other edge must share its head or its tail
        (s0, t0) = in_cycle[0]
        a_ij = sys.weight(s0, t0)
        a_ji = sys.weight(t0, s0)
        if (a_ij > 0) == (a_ji > 0):
            fan_in = all(t == t0 for (s, t) in edges)
            fan_out = all(s == s0 for (s, t) in edges)
            if fan_in or fan_out:
                return Cluster(kind="multi_joint", targets=targets,
                               driver_set=tuple(sorted(edges)),
                               frequency_class="shared", anchor=(s0, t0))

    if not in_cycle:
        # outside anchor: borrow a 2-cycle edge not being removed whose head
        # (or tail) every removed edge shares; its weight takes a nudge
        heads = {t for (s, t) in edges}
        tails = {s for (s, t) in edges}
        candidates = []
        if len(heads) == 1:
            t0 = next(iter(heads))
            for s0 in sorted(sys.in_neighbors(t0)):
                if s0 != t0 and (s0, t0) not in edges and sys.weight(t0, s0) != 0.0:
                    candidates.append((s0, t0))
        if len(tails) == 1 and not candidates:
            s0 = next(iter(tails))
            for t0 in sorted(sys.out_neighbors(s0)):
                if t0 != s0 and (s0, t0) not in edges and sys.weight(t0, s0) != 0.0:
                    candidates.append((s0, t0))
        for (s0, t0) in candidates:
            a_rev = sys.weight(t0, s0)
            w0 = sys.weight(s0, t0)
            nudge = -math.copysign(0.5 * abs(w0), a_rev)
            return Cluster(kind="multi_joint", targets=targets,
                           driver_set=tuple(sorted(edges + [(s0, t0)])),
                           frequency_class="shared", anchor=(s0, t0),
                           anchor_delta=nudge)

    raise Unrealizable(
        f"removal set {sorted(edges)} fits no accepted pattern")


# --- structural stabilizability -----------------------------------------------------

def _off_diagonal_edges(sys: NetworkSystem) -> list[tuple[int, int]]:
    return [(j + 1, i + 1)
            for i in range(sys.n) for j in range(sys.n)
            if i != j and sys.a[i, j] != 0.0]


def _cycle_edges(sys: NetworkSystem) -> list[tuple[int, int]]:
    """Off-diagonal edges lying on some directed cycle (within an SCC)."""
    adj = {v: set() for v in range(1, sys.n + 1)}
    for (s, t) in _off_diagonal_edges(sys):
        adj[s].add(t)

    index = {}
    low = {}
    on_stack = {}
    stack = []
    comp = {}
    counter = itertools.count()
    ncomp = itertools.count()

    def strongconnect(v):
        work = [(v, iter(sorted(adj[v])))]
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack[v] = True
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(adj[w]))))
                    advanced = True
                    break
                elif on_stack.get(w):
                    low[node] = min(low[node], index[w])
            if not advanced:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    c = next(ncomp)
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp[w] = c
                        if w == node:
                            break

    for v in sorted(adj):
        if v not in index:
            strongconnect(v)

    out = []
    for (s, t) in _off_diagonal_edges(sys):
        if comp[s] == comp[t]:
            out.append((s, t))
    return out


def _entry_key(edge: tuple[int, int]) -> tuple[int, int]:
    # matrix-entry (row, col) order: edge (s, t) lives at entry (t, s)
    return (edge[1], edge[0])


def _removal_makes_dag(sys: NetworkSystem, removal: Sequence[tuple[int, int]]) -> bool:
    a = sys.a.copy()
    for (s, t) in removal:
        a[t - 1, s - 1] = 0.0
    return is_dag(NetworkSystem(n=sys.n, a=a), ignore_self_loops=True)


_EXHAUSTIVE_CYCLE_EDGES = 12


def structural_stabilizable(sys: NetworkSystem) -> StabilizationPlan:
    """Stabilization by functional edge removal.

    Needs every self-coupling negative.  Searches removal sets that leave a
    directed acyclic off-diagonal graph, grouped into weakly connected pieces
    that each pass the removable-set check, with disjoint drivers.
    """
    diag = np.diag(sys.a)
    if np.any(diag >= 0.0):
        bad = int(np.argmax(diag >= 0.0)) + 1
        raise AssumptionViolated(f"self-coupling of node {bad} is not negative")

    if is_dag(sys, ignore_self_loops=True):
        cert = spectral_abscissa(sys.a).abscissa
        return StabilizationPlan(
            delta=PerturbationMatrix.from_entries(sys.n, []),
            clusters=(), certificate=cert)

    cycle_edges = sorted(_cycle_edges(sys), key=_entry_key)

    def candidates():
        if len(cycle_edges) <= _EXHAUSTIVE_CYCLE_EDGES:
            for size in range(1, len(cycle_edges) + 1):
                for combo in itertools.combinations(cycle_edges, size):
                    yield list(combo)
        else:
            # greedy: break every 2-cycle at its first removable member, then
            # strip remaining cycle edges one at a time
            removal = []
            remaining = list(cycle_edges)
            while remaining and not _removal_makes_dag(sys, removal):
                e = remaining.pop(0)
                removal.append(e)
                if _removal_makes_dag(sys, removal):
                    break
            yield removal

    for removal in candidates():
        if not _removal_makes_dag(sys, removal):
            continue
        parts = weak_components(removal, sys.n)
        groups = parts.component_edges(removal)
        clusters = []
        drivers: set = set()
        ok = True
        for group in groups:
            try:
                c = check_removable_set(sys, group)
            except Unrealizable:
                ok = False
                break
            if set(c.driver_set) & drivers:
                ok = False
                break
            drivers |= set(c.driver_set)
            clusters.append(c)
        if not ok:
            continue
        entries = [t for c in clusters for t in c.targets]
        delta = PerturbationMatrix.from_entries(sys.n, entries)
        cert = spectral_abscissa(sys.a + delta.delta).abscissa
        return StabilizationPlan(delta=delta, clusters=tuple(clusters),
                                 certificate=cert)

    raise NotFound("no removable edge set leaves a directed acyclic graph")


# --- general stabilizing search ------------------------------------------------------

def _golden_min(f, lo: float, hi: float, evals: int = 40,
                coarse: int = 16) -> tuple[float, float]:
    """Coarse scan then golden-section refinement of a scalar function."""
    xs = np.linspace(lo, hi, coarse)
    ys = [f(x) for x in xs]
    k = int(np.argmin(ys))
    a = xs[max(0, k - 1)]
    b = xs[min(coarse - 1, k + 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(evals):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def search_stabilizing_delta(sys: NetworkSystem, budget: int = 20000,
                             margin: float = 1e-6) -> StabilizationPlan:
    """Look for a realizable perturbation making A + delta Hurwitz.

    Tries the structural (removal) route first when every self-coupling is
    negative, then a line search over each single-entry candidate, then a
    greedy multi-entry extension.  The first plan whose spectral abscissa
    clears the margin wins.
    """
    evals = [0]

    def absc(m) -> float:
        evals[0] += 1
        if evals[0] > budget:
            raise NotFound(f"search budget of {budget} evaluations exhausted")
        return spectral_abscissa(m).abscissa

    base = absc(sys.a)
    if base < 0.0:
        return StabilizationPlan(
            delta=PerturbationMatrix.from_entries(sys.n, []),
            clusters=(), certificate=base)

    if np.all(np.diag(sys.a) < 0.0):
        try:
            plan = structural_stabilizable(sys)
            if plan.certificate < -margin:
                return plan
        except (NotFound, Unrealizable):
            pass

    bound = 10.0 * float(np.abs(sys.a).max())

    def line_search(entries_base, i, j, sign):
        def f(d):
            m = sys.a.copy()
            for (ii, jj, dd) in entries_base:
                m[ii - 1, jj - 1] += dd
            m[i - 1, j - 1] += sign * d
            return absc(m)
        d, val = _golden_min(f, 0.0, bound)
        return sign * d, val

    # single-entry candidates in matrix-entry order
    candidates: list[tuple[int, int, list[int]]] = []
    for i in range(1, sys.n + 1):
        for j in range(1, sys.n + 1):
            if i == j:
                continue
            cu = _uni_sign(sys, j, i)
            if cu != 0:
                candidates.append((i, j, [cu]))
            elif sys.weight(i, j) == 0.0 and _clean_joint_witnesses(sys, j, i):
                candidates.append((i, j, [1, -1]))

    best: Optional[tuple[float, tuple[int, int, float]]] = None
    try:
        for (i, j, signs) in candidates:
            for sign in signs:
                d, val = line_search([], i, j, sign)
                if best is None or val < best[0]:
                    best = (val, (i, j, d))
                if val < -margin:
                    pm = PerturbationMatrix.from_entries(sys.n, [(i, j, d)])
                    clusters = decompose(sys, pm)
                    return StabilizationPlan(delta=pm, clusters=tuple(clusters),
                                             certificate=val)

        # greedy extension from the best single entry
        if best is not None:
            committed = [best[1]]
            current = best[0]
            for _ in range(min(sys.n, 4)):
                improved = None
                for (i, j, signs) in candidates:
                    if any((i, j) == (ci, cj) for (ci, cj, _) in committed):
                        continue
                    for sign in signs:
                        d, val = line_search(committed, i, j, sign)
                        if val < current - 1e-9:
                            trial = committed + [(i, j, d)]
                            try:
                                pm = PerturbationMatrix.from_entries(sys.n, trial)
                                clusters = decompose(sys, pm)
                            except (Unrealizable, ValidationError):
                                continue
                            if improved is None or val < improved[0]:
                                improved = (val, (i, j, d), clusters, pm)
                if improved is None:
                    break
                current = improved[0]
                committed.append(improved[1])
                if current < -margin:
                    return StabilizationPlan(delta=improved[3],
                                             clusters=tuple(improved[2]),
                                             certificate=current)
    except NotFound:
        raise NotFound(f"search budget of {budget} evaluations exhausted")

    raise NotFound("no realizable stabilizing perturbation found")
