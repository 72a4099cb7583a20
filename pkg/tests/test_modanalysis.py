import numpy as np
import pytest

from vibnet.errors import NotModifiable
from vibnet.graphalg import Situation, trails_of_length3
from vibnet.modanalysis import build_report, classify_edge, driver_sets_for
from vibnet.netcore import NetworkSystem

from conftest import random_system


def test_classify_example1_edge_14(example1):
    c = classify_edge(example1, 1, 4)
    assert c.exists and c.direct_increasable and not c.direct_decreasable
    assert c.joint_controllable
    assert any(w.situation is Situation.PATH and (w.p, w.q) == (2, 3)
               for w in c.witnesses)
    assert "direct" in c.removable_classes  # a_41 and a_14 share the sign


def test_classify_example1_creation(example1):
    c = classify_edge(example1, 3, 2)
    assert not c.exists and c.creatable
    assert any((w.p, w.q) == (4, 1) for w in c.creation_witnesses)


def test_classify_empty_graph():
    net = NetworkSystem.from_matrix(np.zeros((3, 3)))
    c = classify_edge(net, 1, 2)
    assert not (c.exists or c.creatable or c.joint_controllable)
    assert not c.removable_classes


def test_report_modmap5(modmap5):
    rep = build_report(modmap5)
    c_uni = np.zeros((5, 5), dtype=int)
    c_uni[1, 2] = -1
    c_uni[2, 1] = 1
    assert np.array_equal(rep.c_uni, c_uni)
    c_bid = np.zeros((5, 5), dtype=int)
    for (i, j) in [(3, 1), (4, 1), (4, 2), (5, 3)]:
        c_bid[i - 1, j - 1] = 1
    assert np.array_equal(rep.c_bid, c_bid)
    assert rep.e_cre == ((1, 4),)


def test_report_diagonal_only():
    rep = build_report(NetworkSystem.from_matrix(np.diag([-1.0, -2.0, 3.0])))
    assert not (rep.e_inc or rep.e_dec or rep.e_ctr or rep.e_cre)
    assert not rep.c_uni.any() and not rep.c_bid.any()


def brute_classification(net, j, i):
    """Re-derive every flag straight from the defining conditions."""
    a_ij = net.a[i - 1, j - 1]
    a_ji = net.a[j - 1, i - 1]
    trails = trails_of_length3(net, j, i)
    sits = {w.situation for w in trails}
    if a_ij == 0.0:
        return {
            "inc": False, "dec": False, "ctr": False,
            "cre": Situation.PATH in sits,
            "rmv": frozenset(),
        }
    rmv = set()
    if a_ji != 0.0 and np.sign(a_ij) == np.sign(a_ji):
        rmv.add("direct")
    if Situation.PATH in sits:
        rmv.add("path_enabled")
    if sits & {Situation.HEAD_TWO_CYCLE, Situation.TAIL_TWO_CYCLE}:
        rmv.add("two_cycle_enabled")
    return {
        "inc": a_ji < 0, "dec": a_ji > 0, "ctr": bool(trails), "cre": False,
        "rmv": frozenset(rmv),
    }


def test_random_reports_match_brute_force():
    rng = np.random.default_rng(17)
    for _ in range(12):
        net = random_system(rng, int(rng.integers(3, 8)), density=0.45)
        rep = build_report(net)
        for i in range(1, net.n + 1):
            for j in range(1, net.n + 1):
                if i == j:
                    continue
                ref = brute_classification(net, j, i)
                c = rep.classifications[(j, i)]
                assert c.direct_increasable == ref["inc"], (j, i)
                assert c.direct_decreasable == ref["dec"]
                assert c.joint_controllable == ref["ctr"]
                assert c.creatable == ref["cre"]
                assert c.removable_classes == ref["rmv"]
                assert rep.c_bid[i - 1, j - 1] == int(ref["ctr"] or ref["cre"])
                expected_uni = 1 if ref["inc"] else (-1 if ref["dec"] else 0)
                assert rep.c_uni[i - 1, j - 1] == expected_uni


def test_classification_sets_are_consistent():
    rng = np.random.default_rng(23)
    net = random_system(rng, 6, density=0.5)
    rep = build_report(net)
    assert not (set(rep.e_inc) & set(rep.e_dec))
    for (j, i) in rep.e_rmv_dir:
        assert (i, j) in rep.e_rmv_dir  # directly removable edges pair up


def test_classify_is_pure(example1):
    a = classify_edge(example1, 1, 4)
    classify_edge(example1, 2, 3)
    b = classify_edge(example1, 1, 4)
    assert a == b


def test_driver_sets_two_options(twotrail6):
    sets = driver_sets_for(twotrail6, 1, 2, "joint")
    assert sets == [((1, 4), (3, 2)), ((1, 5), (6, 2))]


def test_driver_sets_example1(example1):
    sets = driver_sets_for(example1, 1, 4, "joint")
    assert ((1, 2), (3, 4)) in sets
    assert driver_sets_for(example1, 1, 4, "direct") == [((1, 4),)]


def test_driver_sets_rejects_unmodifiable(example1):
    with pytest.raises(NotModifiable):
        driver_sets_for(example1, 2, 1, "direct")   # no opposite edge
    with pytest.raises(NotModifiable):
        driver_sets_for(example1, 2, 3, "create")   # (2,3) exists already
