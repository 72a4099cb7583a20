import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibnet.errors import InvalidPermutation, ParseError, ValidationError
from vibnet.netcore import (
    Edge,
    NetworkSystem,
    Permutation,
    edges_of,
    load_network,
    network_from_dict,
    network_to_dict,
    permute,
    save_network,
    sign_graph,
)

from conftest import random_system


def test_load_example1_network(tmp_path, example1):
    doc = {"n": 4, "edges": [
        {"from": 1, "to": 1, "weight": 0.1},
        {"from": 4, "to": 1, "weight": -1.0},
        {"from": 1, "to": 2, "weight": 1.0},
        {"from": 2, "to": 2, "weight": -1.0},
        {"from": 2, "to": 3, "weight": 1.0},
        {"from": 3, "to": 3, "weight": -0.3},
        {"from": 1, "to": 4, "weight": -1.0},
        {"from": 3, "to": 4, "weight": 1.0},
        {"from": 4, "to": 4, "weight": -0.2},
    ]}
    path = tmp_path / "net.json"
    path.write_text(json.dumps(doc))
    net = load_network(path)
    assert np.array_equal(net.a, example1.a)


def test_load_singleton_empty(tmp_path):
    path = tmp_path / "net.json"
    path.write_text('{"n": 1, "edges": []}')
    net = load_network(path)
    assert net.n == 1
    assert net.a.shape == (1, 1)
    assert net.a[0, 0] == 0.0


def test_load_rejects_duplicate_edge():
    doc = {"n": 2, "edges": [
        {"from": 1, "to": 2, "weight": 1.0},
        {"from": 1, "to": 2, "weight": 2.0},
    ]}
    with pytest.raises(ValidationError):
        network_from_dict(doc)


def test_load_rejects_zero_weight_and_bad_index():
    with pytest.raises(ValidationError):
        network_from_dict({"n": 2, "edges": [{"from": 1, "to": 2, "weight": 0.0}]})
    with pytest.raises(ValidationError):
        network_from_dict({"n": 2, "edges": [{"from": 3, "to": 1, "weight": 1.0}]})


def test_malformed_files_raise_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_network(path)
    with pytest.raises(ParseError):
        network_from_dict({"edges": []})
    with pytest.raises(ParseError):
        network_from_dict({"n": 2, "edges": [{"from": 1, "weight": 1.0}]})


def test_roundtrip_binary_exact(tmp_path):
    rng = np.random.default_rng(7)
    net = random_system(rng, 6, density=0.5, diag=(-1.5, -0.2))
    path = tmp_path / "net.json"
    save_network(net, path)
    back = load_network(path)
    assert np.array_equal(back.a, net.a)  # bit-exact through decimal text


def test_edges_of_example1(example1):
    edges = edges_of(example1)
    assert len(edges) == 9
    assert Edge(4, 1, -1.0) in edges
    assert Edge(1, 4, -1.0) in edges
    # row-major over matrix entries
    positions = [(e.target, e.source) for e in edges]
    assert positions == sorted(positions)


def test_edges_of_trivial_cases():
    assert edges_of(NetworkSystem.from_matrix(np.zeros((3, 3)))) == []
    diag = NetworkSystem.from_matrix(np.diag([-1.0, -2.0]))
    assert edges_of(diag) == [Edge(1, 1, -1.0), Edge(2, 2, -2.0)]


def test_edges_reconstruct_matrix(example1):
    rebuilt = NetworkSystem.from_edges(example1.n, edges_of(example1))
    assert np.array_equal(rebuilt.a, example1.a)


def test_sign_graph(example1):
    s = sign_graph(example1)
    assert s.s[3].tolist() == [-1, 0, 1, -1]
    assert np.array_equal(sign_graph(NetworkSystem.from_matrix(2.0 * example1.a)).s, s.s)
    zero = sign_graph(NetworkSystem.from_matrix(np.zeros((2, 2))))
    assert not zero.s.any()


def test_sign_subgraph_ordering():
    g1 = sign_graph(np.array([[0.0, 2.0], [0.0, 0.0]]))
    g2 = sign_graph(np.array([[-1.0, 5.0], [0.0, 0.0]]))
    g3 = sign_graph(np.array([[0.0, -2.0], [0.0, 0.0]]))
    assert g1.subgraph_of(g2)
    assert not g2.subgraph_of(g1)
    assert not g1.subgraph_of(g3)


def test_permute_identity_and_swap(example1):
    ident = Permutation.identity(4)
    assert np.array_equal(permute(example1, ident).a, example1.a)
    swap = Permutation.swap(4, 1, 2)
    twice = permute(permute(example1, swap), swap)
    assert np.array_equal(twice.a, example1.a)


def test_permute_entry_algebra(example1):
    # after swapping nodes 1 and 4, entry (1,4) holds the old entry (4,1)
    swapped = permute(example1, Permutation.swap(4, 1, 4))
    assert swapped.a[0, 3] == example1.a[3, 0] == -1.0


def test_permute_preserves_weights_and_spectrum():
    rng = np.random.default_rng(11)
    for _ in range(8):
        net = random_system(rng, 5, density=0.6, diag=(-1.0, 1.0))
        order = rng.permutation(5) + 1
        p = Permutation(tuple(int(v) for v in order))
        pnet = permute(net, p)
        assert sorted(np.round(net.a.flatten(), 12)) == sorted(np.round(pnet.a.flatten(), 12))
        e1 = np.sort_complex(np.linalg.eigvals(net.a))
        e2 = np.sort_complex(np.linalg.eigvals(pnet.a))
        assert np.allclose(e1, e2, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.permutations(list(range(1, 7))))
def test_permutation_roundtrip_bitexact(order):
    rng = np.random.default_rng(3)
    net = random_system(rng, 6, density=0.5, diag=(-1.0, 1.0))
    p = Permutation(tuple(order))
    back = permute(permute(net, p), p.inverse())
    assert np.array_equal(back.a, net.a)


def test_invalid_permutation_rejected():
    with pytest.raises(InvalidPermutation):
        Permutation((1, 1, 3))
    with pytest.raises(InvalidPermutation):
        permute(NetworkSystem.from_matrix(np.zeros((2, 2))), Permutation((1, 2, 3)))


def test_system_is_immutable(example1):
    with pytest.raises(ValueError):
        example1.a[0, 0] = 5.0


def test_network_dict_shape(example1):
    doc = network_to_dict(example1)
    assert doc["n"] == 4
    assert {"from", "to", "weight"} == set(doc["edges"][0])
