"""Erdos-Renyi graphs with planted dense subgraphs, and the spectral baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from ripforge.rng import make_rng

SEED_KINDS = ("clique", "random-dense", "explicit")
MAX_REDRAWS = 1000


@dataclass(frozen=True, eq=False)
class Graph:
    adjacency: np.ndarray

    def __post_init__(self):
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.dtype != bool:
            raise ValueError("adjacency must be a square boolean matrix")
        if np.any(np.diag(a)):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")

    @property
    def m(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self.adjacency)) // 2

    @classmethod
    def complete(cls, m: int) -> "Graph":
        return cls(~np.eye(m, dtype=bool))

    @classmethod
    def empty(cls, m: int) -> "Graph":
        return cls(np.zeros((m, m), dtype=bool))


def required_edges(kappa: int, epsilon: float) -> float:
    return (0.5 + epsilon) * kappa * (kappa - 1) / 2.0


@dataclass(frozen=True)
class DenseSeed:
    """A kappa-vertex graph with at least ``(1/2 + eps) C(kappa, 2)`` edges.

    ``random-dense`` seeds are realised at planting time: edges appear with
    probability ``min(1, 1/2 + 2 eps)`` and the draw is repeated until the
    edge-count requirement holds.
    """

    kind: str
    kappa: int
    epsilon: float
    edges: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SEED_KINDS:
            raise ValueError(f"unknown seed kind {self.kind!r}; choose from {SEED_KINDS}")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if not 0.0 < self.epsilon <= 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2], got {self.epsilon}")
        if self.kind == "explicit":
            if self.edges is None:
                raise ValueError("explicit seeds need an edge list")
            adj = self._explicit_adjacency()
            count = int(np.count_nonzero(adj)) // 2
            if count < required_edges(self.kappa, self.epsilon):
                raise ValueError(
                    f"seed has {count} edges, needs >= {required_edges(self.kappa, self.epsilon):g} "
                    f"for kappa={self.kappa}, epsilon={self.epsilon}"
                )

    def _explicit_adjacency(self) -> np.ndarray:
        adj = np.zeros((self.kappa, self.kappa), dtype=bool)
        for u, v in self.edges:
            if u == v or not (0 <= u < self.kappa and 0 <= v < self.kappa):
                raise ValueError(f"invalid seed edge ({u}, {v})")
            adj[u, v] = adj[v, u] = True
        return adj

    def realize(self, rng) -> np.ndarray:
        if self.kind == "clique":
            return ~np.eye(self.kappa, dtype=bool)
        if self.kind == "explicit":
            return self._explicit_adjacency()
        rng = make_rng(rng)
        q = min(1.0, 0.5 + 2.0 * self.epsilon)
        need = required_edges(self.kappa, self.epsilon)
        for _ in range(MAX_REDRAWS):
            upper = np.triu(rng.random((self.kappa, self.kappa)) < q, 1)
            if np.count_nonzero(upper) >= need:
                return upper | upper.T
        raise RuntimeError("random-dense seed failed to meet its edge count")


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    graph: Graph
    planted_set: Optional[np.ndarray] = None
    seed_graph: Optional[DenseSeed] = None
    labeling: Optional[np.ndarray] = field(default=None, repr=False)


def _er_adjacency(m: int, rng: np.random.Generator) -> np.ndarray:
    coins = rng.integers(0, 2, size=(m, m), dtype=np.uint8).astype(bool)
    upper = np.triu(coins, 1)
    return upper | upper.T


def er_generate(m: int, rng) -> PlantedInstance:
    """G(m, 1/2): every pair joined independently with probability 1/2."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return PlantedInstance(Graph(_er_adjacency(m, make_rng(rng))))


def plant(m: int, H: DenseSeed, rng) -> PlantedInstance:
    """G(m, 1/2, H): H on a uniform random kappa-subset under a uniform labeling."""
    if H.kappa > m:
        raise ValueError(f"kappa={H.kappa} exceeds m={m}")
    rng = make_rng(rng)
    adj = _er_adjacency(m, rng)
    labeling = rng.choice(m, size=H.kappa, replace=False)  # seed vertex i -> labeling[i]
    seed_adj = H.realize(rng)
    adj[np.ix_(labeling, labeling)] = seed_adj
    return PlantedInstance(Graph(adj), np.sort(labeling), H, labeling)


def edge_density(G: Graph, K) -> float:
    K = np.unique(np.asarray(K, dtype=np.intp))
    if K.size < 2:
        raise ValueError("edge density needs at least two vertices")
    inside = int(np.count_nonzero(G.adjacency[np.ix_(K, K)])) // 2
    return inside / math.comb(K.size, 2)


def spectral_statistic(G: Graph) -> float:
    """Largest eigenvalue of ``A - 11^T/2``."""
    m = G.m
    M = G.adjacency.astype(np.float64) - 0.5
    if m == 1:
        return float(M[0, 0])
    w = linalg.eigh(M, eigvals_only=True, subset_by_index=[m - 1, m - 1])
    return float(w[0])


def spectral_detect(G: Graph, tau: float) -> int:
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return int(spectral_statistic(G) > tau)


def rayleigh_lower_bound(G: Graph, K) -> float:
    """Rayleigh quotient of ``A - 11^T/2`` at the normalised indicator of K."""
    K = np.unique(np.asarray(K, dtype=np.intp))
    inside = int(np.count_nonzero(G.adjacency[np.ix_(K, K)])) // 2
    return (2.0 * inside - K.size**2 / 2.0) / K.size
