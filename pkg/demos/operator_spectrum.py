"""
What the power-method operator does to a Laplacian spectrum
===========================================================

S = M (I - M^w) with M = I - (2/rho) L shares eigenvectors with L and maps
each eigenvalue lam to f(lam) = mu (1 - mu^w), mu = 1 - 2 lam / rho.
"""

# %%
import numpy as np

from evdenoise.graph import laplacian, normalized_laplacian
from evdenoise.spectral import (SpectralOperator, rho_max_bound, spectrum_map,
                                topk_small_eigvecs)
from evdenoise.synthetic import complete_graph, disjoint_union, path_graph

lam = np.linspace(0, 2, 9)
for w in (5, 30, 100):
    print(f"w={w:<4}", np.round(spectrum_map(lam, 2.0, w), 3))

# %% [markdown]
# f vanishes at lam = 0, peaks near mu ~ 0.89 for w = 30, and is odd in mu:
# lam and rho - lam map to values of equal magnitude and opposite sign.

# %%
lap = laplacian(path_graph(3))
op = SpectralOperator.build(lap)
print("P3 rho_max =", op.rho_max)
print("dense S eigenvalues:", np.round(np.linalg.eigvalsh(op.to_dense()), 6))
print("f(eig L)          :", np.round(np.sort(spectrum_map(np.linalg.eigvalsh(lap.toarray()), op.rho_max, 30)), 6))
(pair,) = topk_small_eigvecs(lap, 1, max_iters=200, tol=1e-12)
print("power iteration:", pair, np.round(pair.vector, 6))

# %% [markdown]
# Bipartite blocks (paths, grids) have a normalised spectrum symmetric about
# 1, so S carries exact +/- pairs and plain power iteration oscillates
# between them instead of converging.

# %%
g = disjoint_union(path_graph(50), path_graph(50), complete_graph(4))
nl, _ = normalized_laplacian(g)
ev = np.linalg.eigvalsh(nl.toarray())
f = spectrum_map(ev, rho_max_bound(nl), 30)
top = np.argsort(-np.abs(f))[:6]
print("most dominant lam:", np.round(ev[top], 4))
print("their f          :", np.round(f[top], 4))
print("K4 eigenvalue 4/3 maps to", round(float(spectrum_map(4 / 3, rho_max_bound(nl), 30)), 4))
