"""Per-edge modifiability classification and the two modifiability graphs.

An ordered pair (j, i) of distinct nodes is classified by what vibrations
can do to the coupling a_ij: direct changes ride on the opposite edge's
sign, joint changes need a length-3 trail, creations need an all-distinct
path.  The sign matrix c_uni records direct one-way modifiability; the
0/1 matrix c_bid records two-way (controllable or creatable) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotModifiable
from .graphalg import Situation, TrailWitness, trails_of_length3
from .netcore import NetworkSystem


@dataclass(frozen=True)
class EdgeClassification:
    source: int
    target: int
    exists: bool
    direct_increasable: bool
    direct_decreasable: bool
    joint_controllable: bool
    witnesses: tuple[TrailWitness, ...]
    removable_classes: frozenset[str]   # subset of {direct, path_enabled, two_cycle_enabled}
    creatable: bool

    @property
    def creation_witnesses(self) -> tuple[TrailWitness, ...]:
        return tuple(w for w in self.witnesses if w.situation is Situation.PATH)


def classify_edge(sys: NetworkSystem, j: int, i: int) -> EdgeClassification:
    """Classification of the ordered pair (j, i), i != j.

    Existing edges get the direct/joint/removable flags; non-existing pairs
    only report creatability (with their path witnesses).
    """
    if i == j:
        raise ValueError("self-loops are not classified")
    a_ij = sys.weight(j, i)
    a_ji = sys.weight(i, j)
    witnesses = tuple(trails_of_length3(sys, j, i))
    if a_ij == 0.0:
        creatable = any(w.situation is Situation.PATH for w in witnesses)
        return EdgeClassification(
            source=j, target=i, exists=False,
            direct_increasable=False, direct_decreasable=False,
            joint_controllable=False,
            witnesses=tuple(w for w in witnesses if w.situation is Situation.PATH),
            removable_classes=frozenset(), creatable=creatable)
    removable = set()
    if a_ji != 0.0 and (a_ij > 0) == (a_ji > 0):
        removable.add("direct")
    if any(w.situation is Situation.PATH for w in witnesses):
        removable.add("path_enabled")
    if any(w.situation in (Situation.HEAD_TWO_CYCLE, Situation.TAIL_TWO_CYCLE)
           for w in witnesses):
        removable.add("two_cycle_enabled")
    return EdgeClassification(
        source=j, target=i, exists=True,
        direct_increasable=a_ji < 0.0,
        direct_decreasable=a_ji > 0.0,
        joint_controllable=bool(witnesses),
        witnesses=witnesses,
        removable_classes=frozenset(removable),
        creatable=False)


@dataclass(frozen=True)
class ModifiabilityReport:
    n: int
    classifications: dict
    c_uni: np.ndarray
    c_bid: np.ndarray
    e_inc: tuple
    e_dec: tuple
    e_ctr: tuple
    e_cre: tuple
    e_rmv_dir: tuple
    e_rmv_pat: tuple
    e_rmv_cyc: tuple


def build_report(sys: NetworkSystem) -> ModifiabilityReport:
    """Classify every ordered pair of distinct nodes and build c_uni / c_bid.

    c_uni[i][j] = +1 when (j, i) is directly increasable, -1 when directly
    decreasable; c_bid[i][j] = 1 when (j, i) is jointly controllable or
    creatable.
    """
    n = sys.n
    c_uni = np.zeros((n, n), dtype=int)
    c_bid = np.zeros((n, n), dtype=int)
    cls = {}
    e_inc, e_dec, e_ctr, e_cre = [], [], [], []
    e_rmv_dir, e_rmv_pat, e_rmv_cyc = [], [], []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            c = classify_edge(sys, j, i)
            cls[(j, i)] = c
            if c.direct_increasable:
                c_uni[i - 1, j - 1] = 1
                e_inc.append((j, i))
            elif c.direct_decreasable:
                c_uni[i - 1, j - 1] = -1
                e_dec.append((j, i))
            if c.joint_controllable or c.creatable:
                c_bid[i - 1, j - 1] = 1
            if c.joint_controllable:
                e_ctr.append((j, i))
            if c.creatable:
                e_cre.append((j, i))
            if "direct" in c.removable_classes:
                e_rmv_dir.append((j, i))
            if "path_enabled" in c.removable_classes:
                e_rmv_pat.append((j, i))
            if "two_cycle_enabled" in c.removable_classes:
                e_rmv_cyc.append((j, i))
    return ModifiabilityReport(
        n=n, classifications=cls, c_uni=c_uni, c_bid=c_bid,
        e_inc=tuple(e_inc), e_dec=tuple(e_dec), e_ctr=tuple(e_ctr),
        e_cre=tuple(e_cre), e_rmv_dir=tuple(e_rmv_dir),
        e_rmv_pat=tuple(e_rmv_pat), e_rmv_cyc=tuple(e_rmv_cyc))


def driver_edges_of(witness: TrailWitness) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two edges that receive vibrations for a trail witness: the first
    and last trail edges (for the 2-cycle shapes one of them is the target)."""
    e1, _, e3 = witness.edges
    return ((e1.source, e1.target), (e3.source, e3.target))


def driver_sets_for(sys: NetworkSystem, source: int, target: int,
                    mode: str) -> list[tuple[tuple[int, int], ...]]:
    """Driver edge-sets able to modify (source, target) in the given mode.

    direct -> the edge itself; joint / create -> one set per witness trail,
    deduplicated, in witness order.
    """
    c = classify_edge(sys, source, target)
    if mode == "direct":
        if not (c.direct_increasable or c.direct_decreasable):
            raise NotModifiable(f"({source},{target}) is not directly modifiable")
        return [((source, target),)]
    if mode == "joint":
        if not c.joint_controllable:
            raise NotModifiable(f"({source},{target}) is not jointly controllable")
        witnesses = c.witnesses
    elif mode == "create":
        if not c.creatable:
            raise NotModifiable(f"({source},{target}) is not creatable")
        witnesses = c.creation_witnesses
    else:
        raise ValueError(f"unknown mode {mode!r}")
    seen = set()
    out = []
    for w in witnesses:
        drivers = tuple(sorted(driver_edges_of(w)))
        if drivers not in seen:
            seen.add(drivers)
            out.append(drivers)
    return out


def report_to_dict(rep: ModifiabilityReport) -> dict:
    return {
        "n": rep.n,
        "directly_increasable": [list(e) for e in rep.e_inc],
        "directly_decreasable": [list(e) for e in rep.e_dec],
        "jointly_controllable": [list(e) for e in rep.e_ctr],
        "creatable": [list(e) for e in rep.e_cre],
        "removable_direct": [list(e) for e in rep.e_rmv_dir],
        "removable_path_enabled": [list(e) for e in rep.e_rmv_pat],
        "removable_two_cycle_enabled": [list(e) for e in rep.e_rmv_cyc],
        "c_uni": rep.c_uni.tolist(),
        "c_bid": rep.c_bid.tolist(),
    }
