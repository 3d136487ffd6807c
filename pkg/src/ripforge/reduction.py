"""Graph-to-design-matrix reduction and its diagnostics.

``reduce`` maps a graph on m vertices to an n-by-p matrix:

1. draw 2N distinct vertices (N = m // L), split them into rows U and columns
   W, and record the bipartite adjacency as a +-1 matrix A;
2. put an upper-half draw where A is +1 and a lower-half draw where it is -1;
3. fold the ell-by-ell grid of n-by-n blocks into one block, scaled by
   1/ell, and append p - n fresh columns.

On an Erdos-Renyi input A is a matrix of fair signs and the fold is a scaled
sum of independent entries. On a planted input the rows and columns hitting
the dense set line up, which ``witness_quadratic_form`` exposes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np

from ripforge.certifiers import get_certifier
from ripforge.distributions import SubGaussianDist, get_distribution
from ripforge.graphs import Graph
from ripforge.ripcore import RipParams
from ripforge.rng import make_rng


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionConfig:
    m: int
    kappa: int
    L: int = 10
    beta: float = 0.0
    p: Optional[int] = None  # None: p = n
    distribution: str = "rademacher"
    epsilon: Optional[float] = None  # diagnostics only; reduce never reads it

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.L < 2:
            raise ConfigError("block factor L must be >= 2")
        if not 1 <= self.kappa <= self.m:
            raise ConfigError(f"need 1 <= kappa <= m, got kappa={self.kappa}, m={self.m}")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        get_distribution(self.distribution)

    @property
    def dist(self) -> SubGaussianDist:
        return get_distribution(self.distribution)

    def to_json(self) -> dict:
        out = {
            "m": self.m,
            "kappa": self.kappa,
            "L": self.L,
            "beta": self.beta,
            "p_rule": "equal-n" if self.p is None else {"explicit": self.p},
            "distribution": self.distribution,
        }
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ReductionConfig":
        allowed = {"m", "kappa", "L", "beta", "p_rule", "distribution", "epsilon"}
        unknown = set(obj) - allowed
        if unknown:
            raise ConfigError(f"unknown reduction config fields: {sorted(unknown)}")
        rule = obj.get("p_rule", "equal-n")
        if rule == "equal-n":
            p = None
        elif isinstance(rule, dict) and set(rule) == {"explicit"}:
            p = int(rule["explicit"])
        else:
            raise ConfigError(f"bad p_rule {rule!r}")
        return cls(
            m=int(obj["m"]),
            kappa=int(obj["kappa"]),
            L=int(obj.get("L", 10)),
            beta=float(obj.get("beta", 0.0)),
            p=p,
            distribution=obj.get("distribution", "rademacher"),
            epsilon=obj.get("epsilon"),
        )


class DerivedDims(NamedTuple):
    N: int
    ell: int
    n: int
    k: int
    p: int


def floor_power(k: int, beta: float) -> int:
    x = k**beta
    r = round(x)
    if math.isclose(x, r, rel_tol=1e-12):
        return int(r)
    return math.floor(x)


def derive_dims(cfg: ReductionConfig) -> DerivedDims:
    k = cfg.kappa // cfg.L
    if k < 1:
        raise ConfigError(f"k = floor(kappa/L) = 0 for kappa={cfg.kappa}, L={cfg.L}")
    ell = floor_power(k, cfg.beta)
    N = cfg.m // cfg.L
    n = N // ell
    if n < 1:
        raise ConfigError(f"n = floor(N/ell) = 0 for m={cfg.m}, L={cfg.L}, ell={ell}")
    p = n if cfg.p is None else cfg.p
    if p < n:
        raise ConfigError(f"p={p} must be >= n={n}")
    return DerivedDims(N, ell, n, k, p)


@dataclass(frozen=True, eq=False)
class ReductionTrace:
    dims: DerivedDims
    U: np.ndarray
    W: np.ndarray
    A: np.ndarray
    Z: np.ndarray
    Xtilde: np.ndarray
    X: np.ndarray

    def block(self, a: int, b: int) -> np.ndarray:
        n = self.dims.n
        return self.Z[a * n:(a + 1) * n, b * n:(b + 1) * n]

    @property
    def block_map(self) -> list[tuple[int, int, int, int]]:
        """``(a, b, row offset, column offset)`` of every folded block of Z."""
        n, ell = self.dims.n, self.dims.ell
        return [(a, b, a * n, b * n) for a in range(ell) for b in range(ell)]


def fold_blocks(Z: np.ndarray, n: int, ell: int) -> np.ndarray:
    acc = np.zeros((n, n))
    for a in range(ell):
        for b in range(ell):
            acc += Z[a * n:(a + 1) * n, b * n:(b + 1) * n]
    return acc / ell


def reduce(G: Graph, cfg: ReductionConfig, rng) -> tuple[np.ndarray, ReductionTrace]:
    dims = derive_dims(cfg)
    if G.m != cfg.m:
        raise ConfigError(f"graph has {G.m} vertices, config expects m={cfg.m}")
    N, ell, n, _, p = dims
    rng = make_rng(rng)
    Q = cfg.dist

    order = rng.permutation(cfg.m)
    U, W = order[:N], order[N:2 * N]
    A = np.where(G.adjacency[np.ix_(U, W)], 1, -1).astype(np.int8)

    upper = Q.half("upper", n).sample(rng, (N, N))
    lower = Q.half("lower", n).sample(rng, (N, N))
    Z = np.where(A == 1, upper, lower)

    Xtilde = fold_blocks(Z, n, ell)
    fresh = Q.sample_normalized(n, rng, (n, p - n))
    X = np.hstack([Xtilde, fresh])
    return X, ReductionTrace(dims, U, W, A, Z, Xtilde, X)


def run_distinguisher(G: Graph, cfg: ReductionConfig, certifier, theta: float, rng, sigma: float = 1.0) -> int:
    """1 when the reduced matrix is *not* certified (evidence of a planted set)."""
    if isinstance(certifier, str):
        certifier = get_certifier(certifier, sigma)
    X, trace = reduce(G, cfg, rng)
    outcome = certifier(X, RipParams(trace.dims.k, theta))
    return 1 - int(outcome.certified)


class Witness(NamedTuple):
    vector: np.ndarray
    value: float
    rows: np.ndarray  # S
    columns: np.ndarray  # T
    scores: np.ndarray  # s_j
    k1: int


def witness_k1(k: int, epsilon: float) -> int:
    return math.ceil(round((1.0 - epsilon / 8.0) * k, 9))


def witness_quadratic_form(trace: ReductionTrace, K, epsilon: float) -> Witness:
    """``||Xtilde v||^2`` for the folded top-score unit vector.

    Rows S are the sampled row vertices inside K, column scores are
    ``s_j = sum_{i in S} A_ij``, and v is uniform on the k1 best-scoring
    columns (lowest index wins ties), folded across the ell column blocks.
    """
    if not 0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    N, ell, n, k, _ = trace.dims
    used = ell * n
    inK = np.isin(trace.U[:used], np.asarray(K))
    S = np.flatnonzero(inK)
    if S.size == 0:
        warnings.warn("no planted vertex among the sampled rows; witness is uninformative", RuntimeWarning)
    scores = trace.A[S, :used].sum(axis=0, dtype=np.int64)
    k1 = min(witness_k1(k, epsilon), used)
    T = np.sort(np.argsort(-scores, kind="stable")[:k1])
    v = np.zeros(used)
    v[T] = 1.0 / math.sqrt(k1)
    folded = v.reshape(ell, n).sum(axis=0)
    folded /= np.linalg.norm(folded)
    value = float(np.sum((trace.Xtilde @ folded) ** 2))
    return Witness(folded, value, S, T, scores, k1)


def score_identity(G: Graph, trace: ReductionTrace, K) -> tuple[int, int]:
    """Both sides of ``sum_{w_j in K} s_j = 2 N_{U,W;K} - #(U^K) #(W^K)``.

    The left side is read off the +-1 matrix A, the right side off the graph.
    """
    K = np.asarray(K)
    rows = np.flatnonzero(np.isin(trace.U, K))
    cols = np.flatnonzero(np.isin(trace.W, K))
    lhs = int(trace.A[np.ix_(rows, cols)].sum(dtype=np.int64))
    edges = int(np.count_nonzero(G.adjacency[np.ix_(trace.U[rows], trace.W[cols])]))
    rhs = 2 * edges - rows.size * cols.size
    return lhs, rhs


@dataclass(frozen=True)
class HardSequence:
    n: int
    p: int
    k: int
    ell: int
    theta: float
    theta_floor: float
    theta_ceiling: float
    k_low: float
    k_high: float

    @property
    def asymptotic_order(self) -> bool:
        """Whether the floor lies below the ceiling at this (finite) n."""
        return self.theta_floor < self.theta_ceiling

    def to_json(self) -> dict:
        out = asdict(self)
        out["asymptotic_order"] = self.asymptotic_order
        return out


def _k_window(n: int, alpha: float, beta: float, delta: float) -> tuple[float, float]:
    lo = n ** (1.0 / (3.0 - alpha - 4.0 * beta))
    hi = n ** (1.0 / (2.0 - beta) - delta)
    return lo, hi


def _pick_k(lo: float, hi: float) -> Optional[int]:
    k = round(math.sqrt(lo * hi))
    if k <= lo:
        k = math.floor(lo) + 1
    if k >= hi:
        k = math.ceil(hi) - 1
    return k if lo < k < hi and k >= 1 else None


def hard_sequence(n: int, alpha: float, beta: float, delta: float) -> HardSequence:
    """A (p, k, theta) point on a hard sequence at sample size n, with p = n.

    k is the rounded geometric mean of the sparsity window
    ``(n^{1/(3-alpha-4beta)}, n^{1/(2-beta)-delta})`` and theta the geometric
    mean of ``sqrt(k^{1+alpha} log p / n)`` and ``k^2 / (n ell^2)``.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    if not 0 <= beta < (1 - alpha) / 3:
        raise ValueError("beta must lie in [0, (1 - alpha)/3)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n < 2:
        raise ValueError("n must be >= 2")
    gap = (1.0 / (2.0 - beta) - delta) - 1.0 / (3.0 - alpha - 4.0 * beta)
    if gap <= 0:
        raise ValueError(
            f"sparsity window is empty for every n (exponent gap {gap:.4f} <= 0); decrease alpha, beta or delta"
        )
    lo, hi = _k_window(n, alpha, beta, delta)
    k = _pick_k(lo, hi)
    if k is None:
        m = n + 1
        while _pick_k(*_k_window(m, alpha, beta, delta)) is None:
            m = m + 1 if m < n + 10**6 else int(m * 1.01)
        raise ValueError(f"no integer k in ({lo:.3f}, {hi:.3f}) at n={n}; minimal feasible n is {m}")
    p = n
    ell = floor_power(k, beta)
    floor_ = math.sqrt(k ** (1.0 + alpha) * math.log(p) / n)
    ceiling = k**2 / (n * ell**2)
    return HardSequence(n, p, k, ell, math.sqrt(floor_ * ceiling), floor_, ceiling, lo, hi)
