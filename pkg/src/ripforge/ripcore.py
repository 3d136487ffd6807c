"""Dense-matrix primitives for restricted isometry margins.

A design matrix is held as a plain 2-D float ``ndarray``; ``as_design`` is the
single validation gate. The canonical RIP margin of ``X`` at sparsity ``k`` is

    max over k-column subsets S of  || X_S^T X_S - I_k ||_op

computed exactly by enumerating subsets, with eigenvalues from a batched
cyclic Jacobi solver so that thousands of small Gram blocks are processed in
one vectorised sweep.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ripforge.rng import make_rng

DEFAULT_ENUMERATION_CAP = 10**7
JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100


class EnumerationError(RuntimeError):
    """Raised when exact subset enumeration exceeds the configured cap."""


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi iteration does not converge within the sweep cap."""


@dataclass(frozen=True)
class RipParams:
    k: int
    theta: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"sparsity k must be a positive integer, got {self.k}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"distortion theta must lie in (0, 1), got {self.theta}")

    def check(self, p: int) -> None:
        if self.k > p:
            raise ValueError(f"sparsity k={self.k} exceeds column count p={p}")


def as_design(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"design matrix must be 2-D, got shape {X.shape}")
    n, p = X.shape
    if n < 1 or p < 1:
        raise ValueError(f"design matrix needs n, p >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix has non-finite entries")
    return X


def _mirror_upper(M: np.ndarray) -> np.ndarray:
    return np.triu(M) + np.triu(M, 1).T


def gram_deviation(X) -> np.ndarray:
    """Return ``X^T X - I_p`` with bitwise-exact symmetry."""
    X = as_design(X)
    G = X.T @ X
    G[np.diag_indices_from(G)] -= 1.0
    return _mirror_upper(G)


@lru_cache(maxsize=None)
def _round_robin(d: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    # circle-method tournament: each round is a set of disjoint (p, q) pairs
    # and every pair appears exactly once per sweep
    players = d + (d % 2)
    ring = list(range(1, players))
    rounds = []
    for _ in range(players - 1):
        order = [0] + ring
        P, Q = [], []
        for i in range(players // 2):
            a, b = order[i], order[players - 1 - i]
            if a >= d or b >= d:
                continue
            P.append(min(a, b))
            Q.append(max(a, b))
        rounds.append((np.array(P, dtype=np.intp), np.array(Q, dtype=np.intp)))
        ring = ring[-1:] + ring[:-1]
    return tuple(rounds)


def jacobi_eigenvalues(M, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues (ascending) of a symmetric matrix or a stack of them.

    ``M`` has shape ``(d, d)`` or ``(B, d, d)``. Each round applies a set of
    disjoint Givens rotations to every matrix of the stack at once.
    """
    A = np.array(M, dtype=np.float64, copy=True)
    single = A.ndim == 2
    if single:
        A = A[None]
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError(f"expected square matrices, got shape {np.shape(M)}")
    d = A.shape[-1]
    if d == 1 or A.shape[0] == 0:
        w = np.sort(np.diagonal(A, axis1=1, axis2=2), axis=1)
        return w[0] if single else w

    # the eigenvalue error is bounded by the off-diagonal Frobenius norm
    scale = np.sqrt(np.sum(A * A, axis=(1, 2)))
    target = np.maximum(tol * 1e-2, 16 * np.finfo(float).eps * scale)
    offmask = ~np.eye(d, dtype=bool)
    schedule = _round_robin(d)
    for _ in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.where(offmask, A * A, 0.0), axis=(1, 2)))
        if np.all(off <= target):
            w = np.sort(np.diagonal(A, axis1=1, axis2=2), axis=1)
            return w[0] if single else w
        for P, Q in schedule:
            app = A[:, P, P]
            aqq = A[:, Q, Q]
            apq = A[:, P, Q]
            nz = apq != 0.0
            safe = np.where(nz, apq, 1.0)
            with np.errstate(over="ignore"):
                # tiny apq overflows tau to inf, which yields t = 0 (no rotation)
                tau = (aqq - app) / (2.0 * safe)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.hypot(1.0, t)
            s = t * c
            c = np.where(nz, c, 1.0)
            s = np.where(nz, s, 0.0)
            cc, sc = c[:, None, :], s[:, None, :]
            AP, AQ = A[:, :, P], A[:, :, Q]
            A[:, :, P] = cc * AP - sc * AQ
            A[:, :, Q] = sc * AP + cc * AQ
            cr, sr = c[:, :, None], s[:, :, None]
            AP, AQ = A[:, P, :], A[:, Q, :]
            A[:, P, :] = cr * AP - sr * AQ
            A[:, Q, :] = sr * AP + cr * AQ
        A = 0.5 * (A + np.swapaxes(A, 1, 2))
    raise ConvergenceError(f"Jacobi did not converge within {max_sweeps} sweeps")


def symmetric_eigen_range(M) -> tuple[float, float]:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError("matrix is not symmetric")
    w = jacobi_eigenvalues(_mirror_upper(M))
    return float(w[0]), float(w[-1])


def _subset_chunks(p: int, k: int, chunk: int):
    combos = itertools.combinations(range(p), k)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def rip_margin_exact(X, k: int, max_subsets: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Exact RIP margin: worst Gram-deviation operator norm over all k-subsets."""
    G = gram_deviation(X)
    p = G.shape[0]
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    count = math.comb(p, k)
    if count > max_subsets:
        raise EnumerationError(
            f"C({p},{k}) = {count} subsets exceeds the enumeration cap {max_subsets}; "
            "use rip_margin_sampled for a lower bound"
        )
    if k == 1:
        return float(np.max(np.abs(np.diag(G))))
    chunk = max(1, 2**17 // (k * k))
    worst = 0.0
    for idx in _subset_chunks(p, k, chunk):
        blocks = G[idx[:, :, None], idx[:, None, :]]
        w = jacobi_eigenvalues(blocks)
        worst = max(worst, float(np.max(np.maximum(-w[:, 0], w[:, -1]))))
    return worst


def rip_margin_sampled(X, k: int, trials: int, rng, batch: int = 8192) -> float:
    """Lower bound on the RIP margin from random k-sparse unit vectors.

    Half of each batch uses Gaussian directions on a random support, the other
    half sign vectors ``±1/sqrt(k)``, which hit equicorrelated worst cases.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    G = gram_deviation(X)
    p = G.shape[0]
    if not 1 <= k <= p:
        raise ValueError(f"need 1 <= k <= p, got k={k}, p={p}")
    rng = make_rng(rng)
    worst = 0.0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        support = np.argsort(rng.random((b, p)), axis=1)[:, :k]
        u = rng.standard_normal((b, k))
        half = b // 2
        u[half:] = np.where(rng.random((b - half, k)) < 0.5, -1.0, 1.0)
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        blocks = G[support[:, :, None], support[:, None, :]]
        q = np.einsum("bi,bij,bj->b", u, blocks, u)
        worst = max(worst, float(np.max(np.abs(q))))
        done += b
    return worst


def is_rip(X, params: RipParams, max_subsets: int = DEFAULT_ENUMERATION_CAP) -> bool:
    X = as_design(X)
    params.check(X.shape[1])
    return rip_margin_exact(X, params.k, max_subsets) <= params.theta


def max_incoherence(X) -> float:
    """Largest absolute entry of ``X^T X - I``, diagonal included."""
    return float(np.max(np.abs(gram_deviation(X))))
