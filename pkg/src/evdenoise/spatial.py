"""Exact nearest-neighbour and fixed-radius queries on scaled event coordinates.

The tree is scipy's ``cKDTree``; candidate sets it returns are always
re-checked with :func:`sq_dist` so that boundary and tie decisions are made
by one deterministic formula, identical to a brute-force scan.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

# slack on radii handed to the tree; candidates are filtered exactly afterwards
_RADIUS_SLACK = 1e-9


def sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance between rows of ``a`` and ``b`` (broadcasting)."""
    d = a[..., 0] - b[..., 0]
    out = d * d
    d = a[..., 1] - b[..., 1]
    out = out + d * d
    d = a[..., 2] - b[..., 2]
    return out + d * d


def _ordered(idx: np.ndarray, d2: np.ndarray):
    order = np.lexsort((idx, d2))
    return idx[order], d2[order]


class KdIndex:
    """Immutable 3-D index over an N x 3 point matrix (an owned copy)."""

    def __init__(self, points):
        pts = np.array(points, dtype=np.float64, copy=True)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"expected an N x 3 matrix, got shape {pts.shape}")
        pts.setflags(write=False)
        self.points = pts
        self.tree = cKDTree(pts)

    def __len__(self):
        return self.points.shape[0]

    def _check_row(self, row):
        if not 0 <= row < len(self):
            raise IndexError(f"query row {row} out of range for {len(self)} points")

    def knn(self, query_row: int, k: int):
        """The ``k`` nearest other points as ``[(index, squared distance), ...]``.

        Sorted by squared distance, ties broken by lower index.
        """
        self._check_row(query_row)
        n = len(self)
        if not 1 <= k <= n - 1:
            raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
        idx, d2 = self._knn_row(query_row, k)
        return [(int(i), float(d)) for i, d in zip(idx, d2)]

    def _knn_row(self, row: int, k: int):
        p = self.points[row]
        kq = min(k + 2, len(self))
        _, cand = self.tree.query(p, k=kq)
        cand = np.atleast_1d(cand)
        cand = cand[cand != row]
        d2 = sq_dist(self.points[cand], p)
        cand, d2 = _ordered(cand, d2)
        if len(cand) > k and d2[k] > d2[k - 1] * (1 + 1e-9):
            return cand[:k], d2[:k]
        if len(cand) == k:
            return cand, d2
        # possible tie straddling the cut: enumerate the whole ball
        r = np.sqrt(d2[k - 1]) * (1 + _RADIUS_SLACK) + 1e-300
        ball = np.asarray(self.tree.query_ball_point(p, r), dtype=np.int64)
        ball = ball[ball != row]
        bd2 = sq_dist(self.points[ball], p)
        ball, bd2 = _ordered(ball, bd2)
        return ball[:k], bd2[:k]

    def knn_all(self, k: int):
        """kNN for every row at once: ``(indices, squared distances)``, each N x k."""
        n = len(self)
        if not 1 <= k <= n - 1:
            raise ValueError(f"k must satisfy 1 <= k <= N-1 = {n - 1}, got {k}")
        kq = min(k + 2, n)
        _, cand = self.tree.query(self.points, k=kq)
        cand = cand.reshape(n, kq)
        rows = np.arange(n)
        d2 = sq_dist(self.points[cand], self.points[:, None, :])
        self_hit = cand == rows[:, None]
        d2 = np.where(self_hit, np.inf, d2)
        # sort each row by (d2, index); self entries go to the back
        order = np.lexsort((cand, d2), axis=1)
        cand = np.take_along_axis(cand, order, axis=1)
        d2 = np.take_along_axis(d2, order, axis=1)

        idx_out = cand[:, :k].copy()
        d2_out = d2[:, :k].copy()
        if kq > k:
            nxt = d2[:, k]
            suspicious = ~(nxt > d2[:, k - 1] * (1 + 1e-9))
            # rows whose full candidate list was all other points are already exact
            suspicious &= np.isfinite(nxt)
        else:
            suspicious = np.zeros(n, dtype=bool)
        for row in np.flatnonzero(suspicious):
            i, dd = self._knn_row(int(row), k)
            idx_out[row], d2_out[row] = i, dd
        return idx_out, d2_out

    def radius(self, query_row: int, eps: float):
        """Indices ``j != query_row`` with distance <= ``eps``, ascending."""
        self._check_row(query_row)
        if eps < 0:
            raise ValueError("eps must be non-negative")
        p = self.points[query_row]
        ball = np.asarray(self.tree.query_ball_point(p, eps * (1 + _RADIUS_SLACK) + 1e-300),
                          dtype=np.int64)
        ball = ball[ball != query_row]
        keep = np.sqrt(sq_dist(self.points[ball], p)) <= eps
        return sorted(int(j) for j in ball[keep])

    def pairs_within(self, eps: float):
        """All pairs ``i < j`` within distance ``eps``: ``(i, j, squared distance)``.

        Sorted lexicographically by ``(i, j)``.
        """
        if eps < 0:
            raise ValueError("eps must be non-negative")
        pairs = self.tree.query_pairs(eps * (1 + _RADIUS_SLACK) + 1e-300, output_type="ndarray")
        if len(pairs) == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), np.zeros(0)
        i = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
        j = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
        d2 = sq_dist(self.points[i], self.points[j])
        keep = np.sqrt(d2) <= eps
        i, j, d2 = i[keep], j[keep], d2[keep]
        order = np.lexsort((j, i))
        return i[order], j[order], d2[order]
