"""Event graphs: local density, knee-point radius, and weighted neighbour graphs.

Note on units: the local density ``d_n`` is a mean of *squared* distances, so
the knee value it yields is squared too. Graph builders take a plain
(unsquared) radius; the pipeline passes ``sqrt(knee)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .events import ScaledEvents
from .spatial import KdIndex, sq_dist


class DegenerateKneeWarning(RuntimeWarning):
    pass


def _coords(coords) -> np.ndarray:
    if isinstance(coords, ScaledEvents):
        return coords.coords
    return np.asarray(coords, dtype=np.float64)


@dataclass(frozen=True)
class DensityProfile:
    d: np.ndarray
    knn_k: int
    sorted_desc: np.ndarray

    @property
    def sorted_values(self) -> np.ndarray:
        return self.d[self.sorted_desc]


def local_density(coords, knn_k: int = 10, index: KdIndex | None = None) -> DensityProfile:
    """Mean squared distance from each event to its ``knn_k`` nearest neighbours."""
    pts = _coords(coords)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("local density needs at least two events")
    if not 1 <= knn_k <= n - 1:
        raise ValueError(f"knn_k must satisfy 1 <= k <= N-1 = {n - 1}, got {knn_k}")
    index = index or KdIndex(pts)
    _, d2 = index.knn_all(knn_k)
    d = d2.mean(axis=1)
    order = np.argsort(-d, kind="stable")
    return DensityProfile(d, knn_k, order)


def knee_gaps(values_desc: np.ndarray) -> np.ndarray:
    """Vertical gap between the chord from the first to the last value and each value."""
    d = np.asarray(values_desc, dtype=np.float64)
    n = d.shape[0]
    pos = np.arange(n, dtype=np.float64)  # n - 1 in one-based terms
    line = ((d[-1] - d[0]) / (n - 1)) * pos + d[0]
    return line - d


def knee_epsilon(profile) -> float:
    """Knee of the non-increasing density curve (value furthest below its chord).

    Accepts a :class:`DensityProfile` or an already-sorted, non-increasing
    sequence. Ties go to the smallest position, i.e. the largest value.
    The result is in the profile's (squared) units.
    """
    if isinstance(profile, DensityProfile):
        d = profile.sorted_values
    else:
        d = np.asarray(profile, dtype=np.float64)
        if np.any(np.diff(d) > 0):
            raise ValueError("density values must be sorted non-increasing")
    if d.shape[0] < 2:
        raise ValueError("knee estimation needs at least two values")
    if d[0] == d[-1]:
        warnings.warn("constant density profile; knee is degenerate", DegenerateKneeWarning,
                      stacklevel=2)
        return float(d[0])
    gaps = knee_gaps(d)
    return float(d[int(np.argmax(gaps))])


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Undirected weighted graph held as a symmetric CSR weight matrix."""

    weights: sp.csr_matrix

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_edges(self) -> int:
        return self.weights.nnz // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()

    def neighbors(self, i: int) -> np.ndarray:
        w = self.weights
        return w.indices[w.indptr[i]:w.indptr[i + 1]]

    def edges(self):
        """Upper-triangular edges ``(i, j, w)`` with ``i < j``, sorted by ``(i, j)``."""
        coo = sp.triu(self.weights, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def edge_set(self) -> set:
        i, j, _ = self.edges()
        return set(zip(i.tolist(), j.tolist()))

    def edge_list_text(self) -> str:
        """``i j weight`` lines, lexicographic, for diffing against oracles."""
        i, j, w = self.edges()
        return "".join(f"{a} {b} {c!r}\n" for a, b, c in zip(i.tolist(), j.tolist(), w.tolist()))

    def subgraph(self, nodes) -> "SparseGraph":
        nodes = np.asarray(nodes, dtype=np.int64)
        return SparseGraph(self.weights[nodes][:, nodes].tocsr())


def graph_from_pairs(n: int, i, j, w) -> SparseGraph:
    """Symmetric graph from unique upper-triangular pairs ``i < j``."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    if np.any(i == j):
        raise ValueError("self loops are not allowed")
    rows = np.concatenate([i, j])
    cols = np.concatenate([j, i])
    data = np.concatenate([w, w])
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    mat.sort_indices()
    return SparseGraph(mat)


def rbf_weights(d2: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * d2)


def build_eng(coords, eps: float, gamma: float, index: KdIndex | None = None,
              brute_force: bool = False) -> SparseGraph:
    """epsilon-neighbour graph: edge iff distance <= ``eps``, RBF weights."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    pts = _coords(coords)
    n = pts.shape[0]
    if brute_force:
        i, j, d2 = _eng_pairs_brute(pts, eps)
    else:
        index = index or KdIndex(pts)
        i, j, d2 = index.pairs_within(eps)
    return graph_from_pairs(n, i, j, rbf_weights(d2, gamma))


def _eng_pairs_brute(pts, eps):
    n = pts.shape[0]
    ii, jj, dd = [], [], []
    for a in range(n - 1):
        d2 = sq_dist(pts[a + 1:], pts[a])
        hit = np.flatnonzero(np.sqrt(d2) <= eps)
        ii.append(np.full(hit.shape[0], a))
        jj.append(hit + a + 1)
        dd.append(d2[hit])
    if not ii:
        z = np.zeros(0, dtype=np.int64)
        return z, z, np.zeros(0)
    return np.concatenate(ii), np.concatenate(jj), np.concatenate(dd)


def _symmetrize_union(n, src, dst, pts, gamma) -> SparseGraph:
    a = np.minimum(src, dst)
    b = np.maximum(src, dst)
    key = np.unique(a * n + b)
    i, j = key // n, key % n
    d2 = sq_dist(pts[i], pts[j])
    return graph_from_pairs(n, i, j, rbf_weights(d2, gamma))


def build_knng(coords, k: int, gamma: float, index: KdIndex | None = None) -> SparseGraph:
    """k-nearest-neighbour graph, symmetrised by union."""
    pts = _coords(coords)
    n = pts.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    index = index or KdIndex(pts)
    nbr, _ = index.knn_all(k)
    src = np.repeat(np.arange(n), k)
    return _symmetrize_union(n, src, nbr.ravel(), pts, gamma)


def vknng_neighbors(coords, chunk: int = 256):
    """Per-node admitted neighbour lists of the varied-k NN graph (before symmetrising).

    Node ``i`` takes others in order of increasing distance (ties by index)
    while the running distance sum stays within ``sum_j dist(i, j) / N``.
    """
    pts = _coords(coords)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("vkNNG needs at least two nodes")
    out = []
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]
        dist = np.sqrt(sq_dist(block[:, None, :], pts[None, :, :]))
        budget = dist.sum(axis=1) / n
        rows = np.arange(block.shape[0])
        dist[rows, rows + start] = np.inf  # exclude self from the candidate order
        order = np.argsort(dist, axis=1, kind="stable")
        csum = np.cumsum(np.take_along_axis(dist, order, axis=1), axis=1)
        counts = (csum <= budget[:, None]).sum(axis=1)
        out.extend(order[r, :counts[r]] for r in rows)
    return out


def build_vknng(coords, gamma: float) -> SparseGraph:
    """Varied-k nearest-neighbour graph, symmetrised by union, RBF weights."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    pts = _coords(coords)
    n = pts.shape[0]
    lists = vknng_neighbors(pts)
    src = np.concatenate([np.full(len(l), i) for i, l in enumerate(lists)]).astype(np.int64)
    dst = np.concatenate(lists).astype(np.int64) if src.size else np.zeros(0, dtype=np.int64)
    return _symmetrize_union(n, src, dst, pts, gamma)


def laplacian(graph: SparseGraph) -> sp.csr_matrix:
    """Combinatorial Laplacian ``D - W``."""
    w = graph.weights
    lap = sp.diags(graph.degrees, format="csr") - w
    lap = lap.tocsr()
    lap.sort_indices()
    return lap


def normalized_laplacian(graph: SparseGraph):
    """Symmetric normalised Laplacian on the nodes with non-zero degree.

    Returns ``(matrix, isolated)``: the matrix is indexed by the remaining
    nodes in increasing order; ``isolated`` lists the degree-zero nodes.
    """
    deg = graph.degrees
    isolated = np.flatnonzero(deg <= 0)
    keep = np.flatnonzero(deg > 0)
    w = graph.weights[keep][:, keep].tocsr()
    inv_sqrt = 1.0 / np.sqrt(deg[keep])
    scaled = sp.diags(inv_sqrt) @ w @ sp.diags(inv_sqrt)
    lap = (sp.identity(len(keep), format="csr") - scaled).tocsr()
    lap.sort_indices()
    return lap, isolated

