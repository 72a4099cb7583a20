"""Shared fixtures: the worked networks used across the suite."""

import numpy as np
import pytest

from vibnet.netcore import NetworkSystem


@pytest.fixture(scope="session")
def example1():
    """4-node unstable system with a 2-cycle between nodes 1 and 4."""
    a = np.array([
        [0.1, 0.0, 0.0, -1.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, -0.3, 0.0],
        [-1.0, 0.0, 1.0, -0.2],
    ])
    return NetworkSystem.from_matrix(a)


@pytest.fixture(scope="session")
def schematic_pair():
    """5-node (A, A_bar) pair exercising all four diff kinds: removal at
    entry (3,1), increase at (3,4), creation at (3,5), decrease at (5,1)."""
    a = np.array([
        [-1.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -0.5],
        [2.0, 2.0, 0.0, -0.2, 0.0],
        [0.0, 0.0, 0.0, 1.0, 3.0],
        [2.0, 0.0, -1.0, 0.0, -2.0],
    ])
    a_bar = a.copy()
    a_bar[2, 0] = 0.0
    a_bar[2, 3] = 1.0
    a_bar[2, 4] = 2.0
    a_bar[4, 0] = 1.2
    return a, a_bar


@pytest.fixture(scope="session")
def modmap5():
    """5-node graph whose modifiability matrices have exactly one +1/-1
    c_uni pair (the 2-cycle between 2 and 3) and c_bid ones at entries
    (3,1), (4,1), (4,2), (5,3); the pair (1,4) is the creatable one."""
    a = np.zeros((5, 5))
    a[2, 1] = 1.0    # edge (2,3)
    a[1, 2] = -1.0   # edge (3,2)
    a[2, 0] = 1.0    # edge (1,3)
    a[3, 1] = 1.0    # edge (2,4)
    a[4, 2] = 1.0    # edge (3,5)
    return NetworkSystem.from_matrix(a)


@pytest.fixture(scope="session")
def twotrail6():
    """6-node graph where the edge (1,2) has exactly two driver sets,
    {(1,4),(3,2)} and {(1,5),(6,2)}."""
    a = np.zeros((6, 6))
    for (s, t) in [(1, 2), (1, 4), (4, 3), (3, 2), (1, 5), (5, 6), (6, 2)]:
        a[t - 1, s - 1] = 1.0
    return NetworkSystem.from_matrix(a)


@pytest.fixture(scope="session")
def removal5():
    """5-node unstable system with stable nodes; removing edges (2,1),
    (3,4), (3,5) is the first valid cut that leaves a directed acyclic
    off-diagonal graph."""
    a = np.diag([-0.5] * 5)
    for (s, t, w) in [(1, 2, 1.0), (2, 1, 1.0), (3, 4, 1.0), (4, 3, 1.0),
                      (3, 5, 1.0), (5, 2, 0.7), (2, 3, 0.8)]:
        a[t - 1, s - 1] = w
    return NetworkSystem.from_matrix(a)


@pytest.fixture(scope="session")
def fanout12():
    """12-node system whose stabilizing perturbation splits into a
    three-edge independent cluster, a clean joint pair, and a shared-
    frequency fan out of node 11."""
    a = np.zeros((12, 12))

    def edge(s, t, w):
        a[t - 1, s - 1] = w

    edge(1, 2, 1.0); edge(2, 6, 2.0); edge(6, 5, 1.0); edge(1, 5, 1.0)
    edge(3, 4, 1.0); edge(4, 3, -1.0)
    edge(8, 4, 1.0); edge(4, 8, 2.0)
    edge(8, 7, 1.0); edge(7, 8, -2.0)
    edge(11, 9, 1.0); edge(9, 11, -2.0); edge(11, 10, 1.0); edge(11, 12, 1.0)
    return NetworkSystem.from_matrix(a)


@pytest.fixture(scope="session")
def fanout12_delta():
    return [
        (5, 1, -3.0),
        (4, 3, 0.8), (4, 8, -1.0), (7, 8, 3.0),
        (9, 11, 0.25), (10, 11, 0.5), (12, 11, 1.0),
    ]


def random_system(rng, n, density=0.35, wmin=0.1, wmax=2.0, diag=None):
    """Random network: off-diagonal weights uniform in +-[wmin, wmax]."""
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if rng.random() < density:
                mag = rng.uniform(wmin, wmax)
                a[i, j] = mag if rng.random() < 0.5 else -mag
    if diag is not None:
        lo, hi = diag
        for i in range(n):
            a[i, i] = rng.uniform(lo, hi)
    return NetworkSystem.from_matrix(a)
