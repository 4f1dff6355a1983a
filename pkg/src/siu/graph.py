"""Communication graphs: generation, connectivity, Laplacian and its spectrum.

Vertices are indexed ``0..n-1``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``n`` vertices.

    ``edges`` is stored as a sorted tuple of ``(u, v)`` pairs with ``u < v``.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one vertex, got n={self.n}")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(x)) for x in nbrs)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(x) for x in self.neighbors], dtype=np.int64)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        if self.edges:
            e = np.asarray(self.edges)
            A[e[:, 0], e[:, 1]] = 1.0
            A[e[:, 1], e[:, 0]] = 1.0
        return A

    @cached_property
    def laplacian_csr(self) -> sp.csr_matrix:
        """Sparse ``L = D - A``; used for the per-step neighbor sums."""
        return sp.csr_matrix(laplacian(self))


def random_geometric(n: int, radius: float, seed: int) -> Graph:
    """Random geometric graph on ``n`` uniform points in the unit square.

    Two vertices are joined iff their Euclidean distance is at most ``radius``.
    The output may be disconnected.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < radius <= np.sqrt(2):
        raise ValueError(f"radius must lie in (0, sqrt(2)], got {radius}")
    pts = np.random.default_rng(seed).random((n, 2))
    if n == 1:
        return Graph(1)
    close = pdist(pts) <= radius
    iu, ju = np.triu_indices(n, k=1)
    return Graph(n, tuple(zip(iu[close].tolist(), ju[close].tolist())))


def is_connected(g: Graph) -> bool:
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in g.neighbors[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return bool(seen.all())


def laplacian(g: Graph) -> np.ndarray:
    A = g.adjacency
    return np.diag(A.sum(axis=1)) - A


@dataclass(frozen=True)
class SpectralSummary:
    lambda2: float
    lambdaN: float
    residual: float


def spectral_bounds(L: np.ndarray, tol: float = 1e-9) -> SpectralSummary:
    """Second-smallest and largest eigenvalues of a graph Laplacian.

    ``tol`` is relative to ``||L||_2``: it bounds both the allowed asymmetry
    and the reported eigenpair residual. Eigenvalues within ``tol * ||L||_2``
    of zero are reported as exactly zero.
    """
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {L.shape}")
    if L.shape[0] < 2:
        raise ValueError("lambda2 is undefined for fewer than two vertices")
    asym = float(np.max(np.abs(L - L.T)))
    if asym > tol:
        raise ValueError(f"matrix is not symmetric: max |L - L^T| = {asym:.3e} > tol={tol:.1e}")

    w, V = np.linalg.eigh(L)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if w[0] < -tol * scale:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {w[0]:.3e}")

    residual = 0.0
    for k in (1, len(w) - 1):
        v = V[:, k]
        residual = max(residual, float(np.linalg.norm(L @ v - w[k] * v)))
    if residual > tol * scale:
        raise ArithmeticError(f"eigensolver residual {residual:.3e} exceeds {tol * scale:.3e}")

    lam2 = float(w[1])
    if abs(lam2) <= tol * scale:
        lam2 = 0.0
    lamN = max(float(w[-1]), 0.0)
    return SpectralSummary(lambda2=lam2, lambdaN=lamN, residual=residual)


def write_edgelist(g: Graph, path: str | Path) -> None:
    lines = [f"n {g.n}"] + [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_edgelist(path: str | Path) -> Graph:
    rows = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not rows or rows[0][0] != "n" or len(rows[0]) != 2:
        raise ValueError(f"{path}: first line must be 'n <count>'")
    n = int(rows[0][1])
    edges = []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != 2:
            raise ValueError(f"{path}:{i}: expected 'u v', got {' '.join(r)!r}")
        edges.append((int(r[0]), int(r[1])))
    return Graph(n, tuple(edges))
