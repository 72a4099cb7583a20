"""Sinusoidal vibration design.

Every design routine returns entries v_ij(t) = u sin(beta t) placed at
matrix positions that carry an existing coupling (vibrations ride on
edges, never on empty entries).  Joint designs put the same frequency on
both driver edges; independent targets get pairwise incommensurable
frequencies drawn from square roots of distinct primes, so their averaged
cross effects vanish.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    DriverConflict,
    EdgeAlreadyExists,
    InvalidWitness,
    NegativeRadicand,
    NoRealSolution,
    NotDirect,
    NotDirectlyRemovable,
    ParseError,
    ValidationError,
    WrongDirection,
    ZeroAnchorDelta,
)
from .graphalg import Situation, TrailWitness
from .netcore import NetworkSystem


@dataclass(frozen=True)
class VibrationEntry:
    """One sinusoid u sin(beta t + phase) at matrix position (i, j), 1-based.

    beta2 is the exact value of beta**2 when the frequency came from the
    allocator (1 or a prime); it makes equal-frequency detection exact.
    """

    i: int
    j: int
    u: float
    beta: float
    phase: float = 0.0
    cluster: int = 0
    beta2: Optional[Fraction] = None

    @property
    def ratio(self) -> float:
        """Amplitude over frequency, the quantity the averaging sees."""
        return self.u / self.beta


def same_frequency(e1: VibrationEntry, e2: VibrationEntry) -> bool:
    if e1.beta2 is not None and e2.beta2 is not None:
        return e1.beta2 == e2.beta2
    return e1.beta == e2.beta


@dataclass(frozen=True)
class VibrationPlan:
    entries: tuple[VibrationEntry, ...]
    epsilon: float
    targets: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")

    @property
    def beta_max(self) -> float:
        return max((e.beta for e in self.entries), default=1.0)

    @property
    def beta_min(self) -> float:
        return min((e.beta for e in self.entries), default=1.0)

    def positions(self) -> list[tuple[int, int]]:
        return [(e.i, e.j) for e in self.entries]


def validate_plan_sparsity(sys: NetworkSystem, plan: VibrationPlan) -> None:
    """Vibrations may only sit on nonzero entries of A."""
    for e in plan.entries:
        if e.u != 0.0 and sys.a[e.i - 1, e.j - 1] == 0.0:
            raise ValidationError(
                f"vibration at ({e.i},{e.j}) but a[{e.i}][{e.j}] = 0"
            )


_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61]


class FrequencyAllocator:
    """Hands out pairwise incommensurable frequencies: 1, sqrt(2), sqrt(3), ...

    Shared-frequency clusters take the lowest unused rung (1 first);
    per-edge independent designs take square roots of primes only.
    """

    def __init__(self):
        self._one_used = False
        self._next_prime = 0

    def _sqrt_prime(self):
        if self._next_prime >= len(_PRIMES):
            raise ValidationError("frequency ladder exhausted")
        p = _PRIMES[self._next_prime]
        self._next_prime += 1
        return math.sqrt(p), Fraction(p)

    def next_shared(self) -> tuple[float, Fraction]:
        if not self._one_used:
            self._one_used = True
            return 1.0, Fraction(1)
        return self._sqrt_prime()

    def next_prime(self) -> tuple[float, Fraction]:
        return self._sqrt_prime()


# --- single-edge designs ------------------------------------------------------

def design_direct(sys: NetworkSystem, source: int, target: int, delta: float,
                  beta: float = 1.0, beta2: Optional[Fraction] = Fraction(1),
                  cluster: int = 0) -> VibrationEntry:
    """Direct vibration on edge (source, target) changing its weight by delta.

    Needs the opposite edge: negative for increases, positive for decreases;
    amplitude solves u/beta = sqrt(2|delta| / |a_ji|).
    """
    a_ij = sys.weight(source, target)
    a_ji = sys.weight(target, source)
    if a_ij == 0.0:
        raise NotDirect(f"({source},{target}) is not an edge")
    if a_ji == 0.0:
        raise NotDirect(f"({source},{target}) has no opposite edge")
    if delta == 0.0:
        return VibrationEntry(i=target, j=source, u=0.0, beta=beta, beta2=beta2,
                              cluster=cluster)
    if delta > 0 and a_ji >= 0:
        raise WrongDirection("increase needs a negatively weighted opposite edge")
    if delta < 0 and a_ji <= 0:
        raise WrongDirection("decrease needs a positively weighted opposite edge")
    u = beta * math.sqrt(2.0 * abs(delta) / abs(a_ji))
    return VibrationEntry(i=target, j=source, u=u, beta=beta, beta2=beta2,
                          cluster=cluster)


def design_direct_removal(sys: NetworkSystem, source: int, target: int,
                          beta: float = 1.0, beta2: Optional[Fraction] = Fraction(1),
                          cluster: int = 0) -> VibrationEntry:
    """Cancel edge (source, target): u/beta = sqrt(2 a_ij / a_ji), which is
    real exactly when both directions carry the same sign."""
    a_ij = sys.weight(source, target)
    a_ji = sys.weight(target, source)
    if a_ij == 0.0 or a_ji == 0.0 or (a_ij > 0) != (a_ji > 0):
        raise NotDirectlyRemovable(
            f"({source},{target}) needs an opposite edge of the same sign"
        )
    u = beta * math.sqrt(2.0 * a_ij / a_ji)
    return VibrationEntry(i=target, j=source, u=u, beta=beta, beta2=beta2,
                          cluster=cluster)


def _check_witness(sys: NetworkSystem, source: int, target: int,
                   witness: TrailWitness) -> None:
    e1, e2, e3 = witness.edges
    if e1.source != source or e3.target != target:
        raise InvalidWitness(f"trail does not run from {source} to {target}")
    for e in witness.edges:
        if sys.weight(e.source, e.target) == 0.0:
            raise InvalidWitness(f"trail edge ({e.source},{e.target}) not in graph")


def _small_root(a2: float, a1: float, a0: float) -> float:
    """Root of a2 x^2 + a1 x + a0 with the smaller magnitude; ties positive."""
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0:
        raise NoRealSolution(f"discriminant {disc:.3g} < 0")
    r = math.sqrt(disc)
    x1 = (-a1 + r) / (2.0 * a2)
    x2 = (-a1 - r) / (2.0 * a2)
    if abs(x1) < abs(x2):
        return x1
    if abs(x2) < abs(x1):
        return x2
    return max(x1, x2)


def design_joint(sys: NetworkSystem, source: int, target: int,
                 witness: TrailWitness, delta: float, beta: float = 1.0,
                 beta2: Optional[Fraction] = Fraction(1), cluster: int = 0,
                 u_first: Optional[float] = None) -> tuple[VibrationEntry, VibrationEntry]:
    """Same-frequency pair on the first and last trail edges changing the
    weight of (source, target) by delta.

    For the all-distinct shape the product of the two amplitudes is fixed;
    `u_first` picks the free factor (the vibration on the first trail edge).
    The 2-cycle shapes solve a quadratic for the amplitude sitting on the
    target edge itself; the smaller-magnitude real root is chosen.
    """
    _check_witness(sys, source, target, witness)
    j, i, p, q = source, target, witness.p, witness.q
    a_ji = sys.weight(target, source)  # opposite of the target edge
    bb2 = 2.0 * beta * beta

    if witness.situation is Situation.PATH:
        a_qp = sys.weight(p, q)
        if delta == 0.0:
            u_pj = 0.0 if u_first is None else u_first
            u_iq = 0.0
        else:
            u_pj = u_first if u_first is not None else 2.0 * beta * math.sqrt(abs(delta / a_qp))
            if u_pj == 0.0:
                raise NoRealSolution("zero free amplitude with nonzero delta")
            u_iq = -bb2 * delta / (a_qp * u_pj)
        first = VibrationEntry(i=p, j=j, u=u_pj, beta=beta, beta2=beta2, cluster=cluster)
        second = VibrationEntry(i=i, j=q, u=u_iq, beta=beta, beta2=beta2, cluster=cluster)
        return first, second

    if witness.situation is Situation.HEAD_TWO_CYCLE:
        # trail {(j,i),(i,q),(q,i)}; unknowns u_ij (on the target) and u_iq
        a_qi = sys.weight(i, q)
        if delta == 0.0:
            z = VibrationEntry(i=i, j=j, u=0.0, beta=beta, beta2=beta2, cluster=cluster)
            return z, replace(z, j=q)
        if a_ji == 0.0:
            u_ij = u_first if u_first is not None else 2.0 * beta * math.sqrt(abs(delta / a_qi))
            u_iq = -bb2 * delta / (a_qi * u_ij)
        else:
            u_iq = u_first if u_first is not None else _joint_free_amplitude(
                delta, a_qi, a_ji, beta)
            u_ij = _small_root(a_ji, u_iq * a_qi, bb2 * delta)
        first = VibrationEntry(i=i, j=j, u=u_ij, beta=beta, beta2=beta2, cluster=cluster)
        second = VibrationEntry(i=i, j=q, u=u_iq, beta=beta, beta2=beta2, cluster=cluster)
        return first, second

    # TAIL_TWO_CYCLE: trail {(j,p),(p,j),(j,i)}; unknowns u_pj and u_ij
    a_jp = sys.weight(p, j)
    if delta == 0.0:
        z = VibrationEntry(i=p, j=j, u=0.0, beta=beta, beta2=beta2, cluster=cluster)
        return z, VibrationEntry(i=i, j=j, u=0.0, beta=beta, beta2=beta2, cluster=cluster)
    if a_ji == 0.0:
        u_ij = u_first if u_first is not None else 2.0 * beta * math.sqrt(abs(delta / a_jp))
        u_pj = -bb2 * delta / (a_jp * u_ij)
    else:
        u_pj = u_first if u_first is not None else _joint_free_amplitude(
            delta, a_jp, a_ji, beta)
        u_ij = _small_root(a_ji, u_pj * a_jp, bb2 * delta)
    first = VibrationEntry(i=p, j=j, u=u_pj, beta=beta, beta2=beta2, cluster=cluster)
    second = VibrationEntry(i=i, j=j, u=u_ij, beta=beta, beta2=beta2, cluster=cluster)
    return first, second


def _joint_free_amplitude(delta: float, a_mid: float, a_ji: float, beta: float) -> float:
    """Free amplitude for the 2-cycle shapes, bumped so the quadratic in the
    target-edge amplitude always has a real root."""
    c = 2.0 * beta * math.sqrt(abs(delta / a_mid))
    if delta * a_ji > 0:
        c_min = math.sqrt(8.0 * beta * beta * delta * a_ji) / abs(a_mid)
        c = max(c, 1.1 * c_min)
    return c


def design_creation(sys: NetworkSystem, source: int, target: int,
                    witness: TrailWitness, delta: float, beta: float = 1.0,
                    beta2: Optional[Fraction] = Fraction(1), cluster: int = 0,
                    u_first: Optional[float] = None) -> tuple[VibrationEntry, VibrationEntry]:
    """Create edge (source, target) with weight delta via an all-distinct path."""
    if sys.weight(source, target) != 0.0:
        raise EdgeAlreadyExists(f"({source},{target}) already exists")
    if witness.situation is not Situation.PATH:
        raise InvalidWitness("creation needs an all-distinct path witness")
    return design_joint(sys, source, target, witness, delta, beta=beta,
                        beta2=beta2, cluster=cluster, u_first=u_first)


# --- multi-edge designs --------------------------------------------------------

def design_multi_direct(sys: NetworkSystem, targets: Sequence[tuple[int, int, float]],
                        freqs: Optional[Sequence[tuple[float, Optional[Fraction]]]] = None,
                        cluster: int = 0) -> list[VibrationEntry]:
    """One direct vibration per target entry (i, j, delta), each at its own
    incommensurable frequency; u/beta = sqrt(-2 delta / a_ji)."""
    if freqs is None:
        alloc = FrequencyAllocator()
        freqs = [alloc.next_prime() for _ in targets]
    if len(freqs) != len(targets):
        raise ValidationError("need one frequency per target")
    out = []
    for (i, j, delta), (beta, beta2) in zip(targets, freqs):
        a_ji = sys.weight(target=j, source=i)  # reverse edge weight a_ji
        if delta == 0.0:
            out.append(VibrationEntry(i=i, j=j, u=0.0, beta=beta, beta2=beta2,
                                      cluster=cluster))
            continue
        rad = -2.0 * delta / a_ji if a_ji != 0.0 else -1.0
        if rad <= 0.0:
            raise NegativeRadicand(
                f"entry ({i},{j}): delta {delta:+g} not reachable directly"
            )
        out.append(VibrationEntry(i=i, j=j, u=beta * math.sqrt(rad), beta=beta,
                                  beta2=beta2, cluster=cluster))
    return out


def design_multi_joint(sys: NetworkSystem, targets: Sequence[tuple[int, int, float]],
                       anchor: tuple[int, int], anchor_delta: Optional[float] = None,
                       beta: float = math.sqrt(2.0),
                       beta2: Optional[Fraction] = Fraction(2),
                       cluster: int = 0) -> list[VibrationEntry]:
    """Shared-frequency fan design: the anchor edge sits in a 2-cycle and the
    coupling through its opposite edge drives every other target.

    `targets` are entries (i, j, delta); `anchor` is the edge (j0, i0).  When
    the anchor is not itself a target (removal sets with an outside anchor),
    `anchor_delta` gives the weight nudge applied to it.
    """
    j0, i0 = anchor
    a_rev = sys.weight(target=j0, source=i0)  # a_{j0 i0}: opposite of the anchor
    if a_rev == 0.0:
        raise InvalidWitness(f"anchor ({j0},{i0}) is not in a 2-cycle")
    d0 = anchor_delta
    entries = []
    anchor_pos = (i0, j0)
    target_map = {(i, j): d for (i, j, d) in targets}
    if d0 is None:
        d0 = target_map.get(anchor_pos)
        if d0 is None:
            raise InvalidWitness("anchor entry missing from targets and no "
                                 "anchor_delta given")
    if d0 == 0.0:
        raise ZeroAnchorDelta("anchor change must be nonzero")
    rad = -2.0 * d0 / a_rev
    if rad <= 0.0:
        raise NegativeRadicand(
            f"anchor delta {d0:+g} incompatible with opposite weight {a_rev:+g}"
        )
    u0 = beta * math.sqrt(rad)
    entries.append(VibrationEntry(i=i0, j=j0, u=u0, beta=beta, beta2=beta2,
                                  cluster=cluster))
    scale = math.sqrt(-2.0 * a_rev / d0)
    for (i, j), d in target_map.items():
        if (i, j) == anchor_pos:
            continue
        u = -beta * (d / a_rev) * scale
        entries.append(VibrationEntry(i=i, j=j, u=u, beta=beta, beta2=beta2,
                                      cluster=cluster))
    return entries


# --- plan composition -----------------------------------------------------------

def compose_plan(sys: NetworkSystem, clusters: Sequence, epsilon: float) -> VibrationPlan:
    """Merge per-cluster designs into one plan.

    Shared-frequency clusters take rungs 1, sqrt(p), ... in cluster order;
    per-edge clusters burn one sqrt(prime) rung per target.  Driver sets must
    be disjoint across clusters.
    """
    seen_drivers: set[tuple[int, int]] = set()
    for c in clusters:
        drv = set(c.driver_set)
        clash = drv & seen_drivers
        if clash:
            raise DriverConflict(f"driver edges reused across clusters: {sorted(clash)}")
        seen_drivers |= drv

    alloc = FrequencyAllocator()
    entries: list[VibrationEntry] = []
    targets: list[tuple[int, int]] = []
    for cid, c in enumerate(clusters):
        targets.extend((i, j) for (i, j, _) in c.targets)
        if c.kind == "multi_direct":
            freqs = [alloc.next_prime() for _ in c.targets]
            entries.extend(design_multi_direct(sys, c.targets, freqs, cluster=cid))
            continue
        beta, beta2 = alloc.next_shared()
        if c.kind == "single_direct":
            (i, j, d) = c.targets[0]
            entries.append(design_direct(sys, j, i, d, beta=beta, beta2=beta2,
                                         cluster=cid))
        elif c.kind == "single_joint":
            (i, j, d) = c.targets[0]
            if sys.weight(j, i) != 0.0:
                pair = design_joint(sys, j, i, c.witness, d, beta=beta,
                                    beta2=beta2, cluster=cid)
            else:
                pair = design_creation(sys, j, i, c.witness, d, beta=beta,
                                       beta2=beta2, cluster=cid)
            entries.extend(pair)
        elif c.kind == "multi_joint":
            entries.extend(design_multi_joint(
                sys, c.targets, c.anchor, anchor_delta=c.anchor_delta,
                beta=beta, beta2=beta2, cluster=cid))
        else:
            raise ValidationError(f"unknown cluster kind {c.kind!r}")

    plan = VibrationPlan(entries=tuple(entries), epsilon=float(epsilon),
                         targets=tuple(targets))
    validate_plan_sparsity(sys, plan)
    return plan


# --- JSON ------------------------------------------------------------------------
#
# {"epsilon": <float>, "entries": [{"i":, "j":, "u":, "beta":, "phase": 0.0,
#  "cluster": <id>}], "targets": [[i, j], ...]}
# beta_squared ([num, den]) is attached when the frequency token is exact.

def plan_to_dict(plan: VibrationPlan) -> dict:
    recs = []
    for e in plan.entries:
        rec = {"i": e.i, "j": e.j, "u": e.u, "beta": e.beta, "phase": e.phase,
               "cluster": e.cluster}
        if e.beta2 is not None:
            rec["beta_squared"] = [e.beta2.numerator, e.beta2.denominator]
        recs.append(rec)
    return {"epsilon": plan.epsilon, "entries": recs,
            "targets": [list(t) for t in plan.targets]}


def plan_from_dict(doc: dict) -> VibrationPlan:
    try:
        eps = float(doc["epsilon"])
        recs = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad plan document: {exc}") from exc
    entries = []
    for rec in recs:
        try:
            beta2 = None
            if "beta_squared" in rec:
                num, den = rec["beta_squared"]
                beta2 = Fraction(num, den)
            entries.append(VibrationEntry(
                i=int(rec["i"]), j=int(rec["j"]), u=float(rec["u"]),
                beta=float(rec["beta"]), phase=float(rec.get("phase", 0.0)),
                cluster=int(rec.get("cluster", 0)), beta2=beta2))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad plan entry {rec!r}") from exc
        if entries[-1].beta <= 0:
            raise ValidationError(f"frequency must be positive: {rec!r}")
    targets = tuple((int(i), int(j)) for i, j in doc.get("targets", []))
    return VibrationPlan(entries=tuple(entries), epsilon=eps, targets=targets)


def save_plan(plan: VibrationPlan, path) -> None:
    with open(path, "w") as fh:
        json.dump(plan_to_dict(plan), fh, indent=2)
        fh.write("\n")


def load_plan(path) -> VibrationPlan:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return plan_from_dict(doc)
