import numpy as np


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def component_labels(n, rows, cols):
    """Component id per node for the edge list ``(rows[k], cols[k])``.

    Ids are numbered in order of each component's smallest member.
    """
    uf = UnionFind(n)
    for a, b in zip(np.asarray(rows).tolist(), np.asarray(cols).tolist()):
        uf.union(a, b)
    labels = np.empty(n, dtype=np.int64)
    remap = {}
    for i in range(n):
        root = uf.find(i)
        if root not in remap:
            remap[root] = len(remap)
        labels[i] = remap[root]
    return labels


def matrix_components(mat):
    """Components of the off-diagonal sparsity pattern of a square sparse matrix."""
    coo = mat.tocoo()
    off = (coo.row != coo.col) & (coo.data != 0)
    return component_labels(mat.shape[0], coo.row[off], coo.col[off])
