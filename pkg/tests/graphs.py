"""Random graph generators for spectral tests."""
import numpy as np
import scipy.sparse as sp

from evdenoise.graph import SparseGraph


def random_weighted_graph(rng, n, p=0.3, connected=True):
    """Erdos-Renyi graph with U(0.5, 1) weights; a random spanning path keeps it connected."""
    upper = np.triu(rng.random((n, n)) < p, k=1)
    if connected:
        perm = rng.permutation(n)
        a, b = np.minimum(perm[:-1], perm[1:]), np.maximum(perm[:-1], perm[1:])
        upper[a, b] = True
    w = np.where(upper, rng.uniform(0.5, 1.0, (n, n)), 0.0)
    return SparseGraph(sp.csr_matrix(w + w.T))


def planted_two_cluster(rng, n):
    """Two dense blocks with a sparser weighted cut; connected."""
    n1 = int(rng.integers(n // 3, 2 * n // 3 + 1))
    block = np.arange(n) < n1
    same = block[:, None] == block[None, :]
    p_in = rng.uniform(0.4, 0.9)
    p_out = p_in * rng.uniform(0.05, 0.3)
    prob = np.where(same, p_in, p_out)
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    upper[0, n - 1] = True  # at least one cut edge
    perm = rng.permutation(n1)
    upper[np.minimum(perm[:-1], perm[1:]), np.maximum(perm[:-1], perm[1:])] = True
    perm = n1 + rng.permutation(n - n1)
    upper[np.minimum(perm[:-1], perm[1:]), np.maximum(perm[:-1], perm[1:])] = True
    w = np.where(upper, rng.uniform(0.5, 1.0, (n, n)), 0.0)
    return SparseGraph(sp.csr_matrix(w + w.T))


def s_gap(lam, f):
    """Relative margin by which the first non-zero eigenvalue's image under S dominates.

    ``lam`` ascending with a single zero eigenvalue. Negative when another
    eigenvalue's image is at least as large in magnitude.
    """
    top = f[1]
    rest = np.abs(np.delete(f, 1)).max()
    return (top - rest) / abs(top) if top > 0 else -1.0
