"""Vibrational control of linear network systems.

Analyze which edges of dx/dt = A x can be functionally modified by
zero-mean high-frequency dithers, synthesize explicit sinusoidal plans,
compute the averaged (functioning) network, and verify stabilization.
"""

from ._backend import backend_name
from .netcore import Edge, NetworkSystem, Permutation, SignGraph, edges_of, load_network, save_network, sign_graph, permute

__all__ = [
    "Edge",
    "NetworkSystem",
    "Permutation",
    "SignGraph",
    "backend_name",
    "edges_of",
    "load_network",
    "permute",
    "save_network",
    "sign_graph",
]

__version__ = "0.1.0"
