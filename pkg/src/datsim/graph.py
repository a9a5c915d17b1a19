"""Undirected interaction topologies and their spectral quantities.

Graphs are node-count plus edge-list structures with unit weights. The
Laplacian, incidence matrix, and algebraic connectivity computed here feed
the coupling terms, conservation checks, and gain bounds used by the rest
of the package.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "build_graph",
    "family_graph",
    "laplacian",
    "incidence",
    "algebraic_connectivity",
    "is_connected",
    "symmetric_eigenvalues",
]

# Eigenvalues below this are treated as the zero eigenvalue of a Laplacian.
CONNECTIVITY_EIGENVALUE_TOL = 1e-8


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 1..n with unit edge weights.

    Edges are stored canonically: each pair sorted ascending, the list
    sorted lexicographically. The weight field exists for forward
    compatibility; only unit weights are accepted.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.weights:
            object.__setattr__(self, "weights", tuple(1.0 for _ in self.edges))
        if len(self.weights) != len(self.edges):
            raise ValueError("weights must match edges one-to-one")
        for w, e in zip(self.weights, self.edges):
            if w != 1.0:
                raise ValueError(f"edge {e} has weight {w}; only unit weights are supported")

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Symmetric 0/1 adjacency matrix with zero diagonal (row k is node k+1)."""
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i - 1, j - 1] = 1.0
            a[j - 1, i - 1] = 1.0
        return a

    def neighbor_lists(self) -> list[np.ndarray]:
        """0-based neighbor index arrays, one per node."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i - 1].append(j - 1)
            nbrs[j - 1].append(i - 1)
        return [np.array(sorted(lst), dtype=int) for lst in nbrs]


def build_graph(n: int, edges) -> Graph:
    """Validate an edge list and return a canonical Graph.

    Node labels are 1-based. Self-loops, duplicate unordered pairs, and
    out-of-range labels are rejected with the offending pair named.
    """
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    canonical = []
    seen = set()
    for pair in edges:
        i, j = int(pair[0]), int(pair[1])
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) is not allowed")
        if not (1 <= i <= n) or not (1 <= j <= n):
            raise ValueError(f"edge ({i}, {j}) references a node outside 1..{n}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge ({i}, {j})")
        seen.add(key)
        canonical.append(key)
    canonical.sort()
    return Graph(n=n, edges=tuple(canonical))


def family_graph(family: str, n: int) -> Graph:
    """Build a named topology: path, ring, complete, or star (center = node 1)."""
    if family == "path":
        return build_graph(n, [(k, k + 1) for k in range(1, n)])
    if family == "ring":
        if n < 3:
            raise ValueError(f"ring requires n >= 3, got {n}")
        return build_graph(n, [(k, k + 1) for k in range(1, n)] + [(1, n)])
    if family == "complete":
        return build_graph(n, [(i, j) for i in range(1, n) for j in range(i + 1, n + 1)])
    if family == "star":
        if n < 2:
            raise ValueError(f"star requires n >= 2, got {n}")
        return build_graph(n, [(1, k) for k in range(2, n + 1)])
    raise ValueError(f"unknown graph family '{family}'")


def laplacian(g: Graph) -> np.ndarray:
    """Graph Laplacian: diagonal carries degrees, off-diagonal -a_ij.

    Row sums are zero exactly and the matrix is symmetric PSD.
    """
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


def incidence(g: Graph) -> np.ndarray:
    """Node-by-edge incidence matrix under the fixed orientation low -> high.

    Each column has -1 at the lower-index endpoint and +1 at the higher,
    so D @ D.T reproduces the Laplacian exactly.
    """
    d = np.zeros((g.n, g.m))
    for col, (i, j) in enumerate(g.edges):
        d[i - 1, col] = -1.0
        d[j - 1, col] = 1.0
    return d


def symmetric_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm drops below tol.
    Adequate for dense desk-scale matrices (n up to a few hundred).
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = math.sqrt(float((a[off_mask] ** 2).sum()))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a).copy())


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest Laplacian eigenvalue; positive iff the graph is connected."""
    if g.n < 2:
        raise ValueError("algebraic connectivity needs at least 2 nodes")
    eigs = symmetric_eigenvalues(laplacian(g))
    return max(float(eigs[1]), 0.0)


def is_connected(g: Graph) -> bool:
    """Breadth-first reachability of every node from node 1."""
    if g.n == 1:
        return True
    nbrs = g.neighbor_lists()
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == g.n
