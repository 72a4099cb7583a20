import math
from fractions import Fraction

import numpy as np
import pytest

from vibnet.avg import averaged_closed_form, averaged_numeric
from vibnet.errors import (
    DriverConflict,
    EdgeAlreadyExists,
    NotDirect,
    NotDirectlyRemovable,
    ValidationError,
    WrongDirection,
    ZeroAnchorDelta,
)
from vibnet.graphalg import Situation, trails_of_length3
from vibnet.netcore import NetworkSystem
from vibnet.perturb import Cluster
from vibnet.synth import (
    FrequencyAllocator,
    VibrationEntry,
    VibrationPlan,
    compose_plan,
    design_creation,
    design_direct,
    design_direct_removal,
    design_joint,
    design_multi_direct,
    design_multi_joint,
    load_plan,
    plan_from_dict,
    plan_to_dict,
    save_plan,
    validate_plan_sparsity,
)


def achieved_delta(sys, entries, target):
    """Closed-form change on the target entry induced by the entries."""
    plan = VibrationPlan(entries=tuple(entries), epsilon=0.04)
    res = averaged_closed_form(sys, plan)
    (i, j) = target
    return res.a_bar[i - 1, j - 1] - sys.a[i - 1, j - 1]


def witness_with(sys, j, i, situation):
    for w in trails_of_length3(sys, j, i):
        if w.situation is situation:
            return w
    raise AssertionError(f"no {situation} witness for ({j},{i})")


def test_design_direct_example1(example1):
    e = design_direct(example1, 1, 4, 8.0)
    assert (e.i, e.j) == (4, 1)
    assert e.u == pytest.approx(4.0) and e.beta == 1.0
    assert achieved_delta(example1, [e], (4, 1)) == pytest.approx(8.0, abs=1e-12)


def test_design_direct_zero_delta(example1):
    assert design_direct(example1, 1, 4, 0.0).u == 0.0


def test_design_direct_generic_ratio():
    a = np.zeros((2, 2))
    a[1, 0] = 1.0    # edge (1,2)
    a[0, 1] = -0.5   # opposite, negative: increasable
    net = NetworkSystem.from_matrix(a)
    e = design_direct(net, 1, 2, 1.0)
    assert e.u / e.beta == pytest.approx(2.0)
    assert achieved_delta(net, [e], (2, 1)) == pytest.approx(1.0, abs=1e-12)
    res = averaged_numeric(net, VibrationPlan((e,), 0.04), tol=1e-7)
    assert res.a_bar[1, 0] - net.a[1, 0] == pytest.approx(1.0, abs=1e-6)


def test_design_direct_wrong_direction(example1):
    with pytest.raises(WrongDirection):
        design_direct(example1, 1, 4, -1.0)   # opposite is negative: only increases
    with pytest.raises(NotDirect):
        design_direct(example1, 1, 2, 1.0)    # no opposite edge


def test_design_direct_removal_ratio():
    a = np.zeros((2, 2))
    a[1, 0] = 2.0
    a[0, 1] = 1.0
    net = NetworkSystem.from_matrix(a)
    e = design_direct_removal(net, 1, 2)
    assert e.u / e.beta == pytest.approx(2.0)
    assert achieved_delta(net, [e], (2, 1)) == pytest.approx(-2.0, abs=1e-12)


def test_design_direct_removal_fig9(removal5):
    e = design_direct_removal(removal5, 2, 1)
    assert e.u == pytest.approx(math.sqrt(2.0))
    assert achieved_delta(removal5, [e], (1, 2)) == pytest.approx(-1.0, abs=1e-12)


def test_design_direct_removal_sign_mismatch():
    a = np.zeros((2, 2))
    a[1, 0] = 1.0
    a[0, 1] = -1.0
    with pytest.raises(NotDirectlyRemovable):
        design_direct_removal(NetworkSystem.from_matrix(a), 1, 2)


def test_design_joint_example1_matches_printed(example1):
    w = witness_with(example1, 1, 4, Situation.PATH)
    first, second = design_joint(example1, 1, 4, w, 8.0, beta=1.0, u_first=4.0)
    assert (first.i, first.j, first.u) == (2, 1, 4.0)
    assert (second.i, second.j) == (4, 3)
    assert second.u == pytest.approx(-4.0)
    assert achieved_delta(example1, [first, second], (4, 1)) == pytest.approx(8.0, abs=1e-12)


def test_design_joint_zero_delta(example1):
    w = witness_with(example1, 1, 4, Situation.PATH)
    first, second = design_joint(example1, 1, 4, w, 0.0)
    assert first.u == 0.0 and second.u == 0.0


def test_design_joint_s2_linear_when_no_opposite():
    # trail {(1,3),(3,2),(2,3)}: head 2-cycle between 3 and 2, a_31 target
    a = np.zeros((3, 3))
    a[2, 0] = 1.0   # target edge (1,3)
    a[1, 2] = 0.8   # edge (3,2)
    a[2, 1] = -0.6  # edge (2,3)
    net = NetworkSystem.from_matrix(a)
    w = witness_with(net, 1, 3, Situation.HEAD_TWO_CYCLE)
    first, second = design_joint(net, 1, 3, w, 1.2, beta=1.0)
    # a_ji = a_13 = 0, so the solve is linear and exact
    assert achieved_delta(net, [first, second], (3, 1)) == pytest.approx(1.2, abs=1e-12)


def test_design_joint_s2_quadratic(example1):
    # (3,4) has the head-2-cycle witness {(3,4),(4,1),(1,4)} in example1
    w = witness_with(example1, 3, 4, Situation.HEAD_TWO_CYCLE)
    for delta in (0.7, -0.9):
        pair = design_joint(example1, 3, 4, w, delta, beta=1.0)
        assert achieved_delta(example1, list(pair), (4, 3)) == pytest.approx(delta, abs=1e-10)


def test_design_joint_s3_quadratic(example1):
    # (1,2) has the tail-2-cycle witness {(1,4),(4,1),(1,2)}
    w = witness_with(example1, 1, 2, Situation.TAIL_TWO_CYCLE)
    for delta in (0.5, -1.1):
        pair = design_joint(example1, 1, 2, w, delta, beta=1.0)
        assert achieved_delta(example1, list(pair), (2, 1)) == pytest.approx(delta, abs=1e-10)


def test_design_creation(example1):
    w = witness_with(example1, 3, 2, Situation.PATH)
    pair = design_creation(example1, 3, 2, w, -1.0, beta=1.0)
    assert achieved_delta(example1, list(pair), (2, 3)) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(EdgeAlreadyExists):
        design_creation(example1, 1, 4, w, 1.0)


def test_design_creation_unit_case():
    # a_qp = 1, beta = 1, u_pj = 2, delta = -1  ->  u_iq = 1
    a = np.zeros((4, 4))
    a[1, 0] = 0.5   # (1,2)
    a[2, 1] = 1.0   # (2,3) middle
    a[3, 2] = 0.7   # (3,4)
    net = NetworkSystem.from_matrix(a)
    w = witness_with(net, 1, 4, Situation.PATH)
    first, second = design_creation(net, 1, 4, w, -1.0, beta=1.0, u_first=2.0)
    assert second.u == pytest.approx(1.0)
    assert achieved_delta(net, [first, second], (4, 1)) == pytest.approx(-1.0, abs=1e-12)


def test_design_multi_direct_two_targets():
    a = np.zeros((4, 4))
    a[2, 0] = 1.0; a[0, 2] = -1.2   # (1,3) increasable
    a[3, 1] = 1.0; a[1, 3] = 0.8    # (2,4) decreasable
    net = NetworkSystem.from_matrix(a)
    targets = [(3, 1, 0.9), (4, 2, -0.7)]
    entries = design_multi_direct(net, targets)
    assert sorted(e.beta2 for e in entries) == [Fraction(2), Fraction(3)]
    plan = VibrationPlan(tuple(entries), 0.04)
    res = averaged_closed_form(net, plan)
    assert res.a_bar[2, 0] - a[2, 0] == pytest.approx(0.9, abs=1e-12)
    assert res.a_bar[3, 1] - a[3, 1] == pytest.approx(-0.7, abs=1e-12)
    # nothing leaks onto other entries
    mask = np.ones_like(a, dtype=bool)
    mask[2, 0] = mask[3, 1] = False
    assert np.abs((res.a_bar - a)[mask]).max() == 0.0
    resn = averaged_numeric(net, plan, tol=2e-5)
    assert np.abs(resn.a_bar - res.a_bar).max() < 1e-4


def test_design_multi_direct_fig8_printed_amplitudes(fanout12):
    targets = [(4, 3, 0.8), (4, 8, -1.0), (7, 8, 3.0)]
    entries = design_multi_direct(fanout12, targets)
    by_pos = {(e.i, e.j): e for e in entries}
    assert by_pos[(4, 3)].u == pytest.approx(math.sqrt(3.2))
    assert by_pos[(4, 3)].beta == pytest.approx(math.sqrt(2))
    assert by_pos[(4, 8)].u == pytest.approx(math.sqrt(3))
    assert by_pos[(4, 8)].beta == pytest.approx(math.sqrt(3))
    assert by_pos[(7, 8)].u == pytest.approx(math.sqrt(15))
    assert by_pos[(7, 8)].beta == pytest.approx(math.sqrt(5))


def test_design_multi_joint_fig9(removal5):
    targets = [(4, 3, -1.0), (5, 3, -1.0)]
    entries = design_multi_joint(removal5, targets, anchor=(3, 4))
    by_pos = {(e.i, e.j): e for e in entries}
    assert by_pos[(4, 3)].u == pytest.approx(2.0)
    assert by_pos[(5, 3)].u == pytest.approx(2.0)
    assert all(e.beta == pytest.approx(math.sqrt(2)) for e in entries)
    plan = VibrationPlan(tuple(entries), 0.04)
    res = averaged_closed_form(removal5, plan)
    assert res.a_bar[3, 2] == pytest.approx(0.0, abs=1e-14)
    assert res.a_bar[4, 2] == pytest.approx(0.0, abs=1e-14)


def test_design_multi_joint_anchor_only_reduces_to_direct(example1):
    entries = design_multi_joint(example1, [(4, 1, 8.0)], anchor=(1, 4),
                                 beta=1.0, beta2=Fraction(1))
    direct = design_direct(example1, 1, 4, 8.0)
    assert len(entries) == 1
    assert entries[0].u == pytest.approx(direct.u)


def test_design_multi_joint_zero_anchor_delta(removal5):
    with pytest.raises(ZeroAnchorDelta):
        design_multi_joint(removal5, [(4, 3, 0.0), (5, 3, -1.0)], anchor=(3, 4))


def test_compose_plan_fig8_frequencies(fanout12, fanout12_delta):
    from vibnet.perturb import PerturbationMatrix, decompose

    pm = PerturbationMatrix.from_entries(12, fanout12_delta)
    clusters = decompose(fanout12, pm)
    plan = compose_plan(fanout12, clusters, epsilon=0.05)
    freqs = sorted({round(e.beta, 12) for e in plan.entries})
    expect = sorted([1.0] + [round(math.sqrt(p), 12) for p in (2, 3, 5, 7)])
    assert freqs == expect
    # joint pair shares one frequency, fan shares another
    by_cluster = {}
    for e in plan.entries:
        by_cluster.setdefault(e.cluster, set()).add(e.beta2)
    kinds = {cid: clusters[cid].kind for cid in by_cluster}
    for cid, betas in by_cluster.items():
        if kinds[cid] == "multi_direct":
            assert len(betas) == len(clusters[cid].targets)
        else:
            assert len(betas) == 1


def test_compose_plan_single_cluster(example1):
    c = Cluster(kind="single_direct", targets=((4, 1, 8.0),),
                driver_set=((1, 4),), frequency_class="shared")
    plan = compose_plan(example1, [c], epsilon=0.04)
    assert len(plan.entries) == 1
    assert plan.entries[0].beta == 1.0
    assert plan.targets == ((4, 1),)


def test_compose_plan_driver_conflict(example1):
    c1 = Cluster(kind="single_direct", targets=((4, 1, 8.0),),
                 driver_set=((1, 4),), frequency_class="shared")
    c2 = Cluster(kind="single_direct", targets=((4, 1, -1.0),),
                 driver_set=((1, 4),), frequency_class="shared")
    with pytest.raises(DriverConflict):
        compose_plan(example1, [c1, c2], epsilon=0.04)


def test_allocator_ladder():
    alloc = FrequencyAllocator()
    assert alloc.next_shared() == (1.0, Fraction(1))
    beta, tok = alloc.next_prime()
    assert (beta, tok) == (math.sqrt(2), Fraction(2))
    beta, tok = alloc.next_shared()
    assert tok == Fraction(3)


def test_sparsity_enforced(example1):
    bad = VibrationPlan((VibrationEntry(i=1, j=2, u=1.0, beta=1.0),), 0.04)
    with pytest.raises(ValidationError):
        validate_plan_sparsity(example1, bad)


def test_zero_mean_waveforms(example1):
    e = design_direct(example1, 1, 4, 8.0)
    t = np.linspace(0, 2 * math.pi / e.beta * 57, 200001)
    avg = np.trapezoid(e.u * np.sin(e.beta * t), t) / t[-1]
    assert abs(avg) < 1e-3


def test_plan_json_roundtrip(tmp_path, example1):
    e = design_direct(example1, 1, 4, 8.0)
    plan = VibrationPlan((e,), epsilon=0.04, targets=((4, 1),))
    path = tmp_path / "vib.json"
    save_plan(plan, path)
    back = load_plan(path)
    assert back == plan
    doc = plan_to_dict(plan)
    assert doc["entries"][0]["phase"] == 0.0
    assert plan_from_dict(doc) == plan
