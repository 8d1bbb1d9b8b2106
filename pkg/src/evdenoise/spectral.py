"""Eigenvectors for the small non-zero eigenvalues of a graph Laplacian.

The power method finds the *largest* eigenpair, so it is run on the
polynomial operator

    S = M (I - M^omega),    M = I - (2 / rho_max) L,

where ``rho_max`` strictly bounds the spectrum of ``L``. ``S`` shares
eigenvectors with ``L`` and maps an eigenvalue ``lam`` to
``f(lam) = mu (1 - mu^omega)`` with ``mu = 1 - 2 lam / rho_max``: the null
space goes to exactly 0 and small non-zero eigenvalues become the dominant
ones. More eigenpairs come from repeated rank-one deflation.

Caveat: for finite ``omega`` the map is not monotone near ``mu = 1``, so the
dominant pair of ``S`` need not be the literal smallest non-zero eigenvalue
when the spectral gap is tiny. Every pair therefore carries its Rayleigh
quotient and residual against ``L``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .components import matrix_components

RHO_MARGIN = 1e-9
DEFAULT_OMEGA = 30
DEFAULT_MAX_ITERS = 50
DEFAULT_TOL = 1e-8
DENSE_CAP = 3000

# ||S x|| below this (for unit x) means the operator has nothing left to give
_EXHAUSTED = 1e-12


class SpectralError(ArithmeticError):
    """Numerical failure in an eigensolver."""


class OperatorExhausted(SpectralError):
    """``S x`` vanished for every start vector tried."""


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float
    s_value: Optional[float] = None
    iterations: int = 0
    converged: bool = True

    def __repr__(self):
        return (f"EigenPair(value={self.value:.6g}, residual={self.residual:.2e}, "
                f"n={self.vector.shape[0]})")


def _as_csr(base) -> sp.csr_matrix:
    mat = sp.csr_matrix(base, dtype=np.float64)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got {mat.shape}")
    return mat


def make_pair(base, vector, **extra) -> EigenPair:
    """Normalise ``vector`` and attach its Rayleigh quotient and residual against ``base``."""
    v = np.asarray(vector, dtype=np.float64)
    v = v / np.linalg.norm(v)
    bv = base @ v
    value = float(v @ bv)
    return EigenPair(value, v, float(np.linalg.norm(bv - value * v)), **extra)


def rho_max_bound(base, normalized: Optional[bool] = None) -> float:
    """Strict upper bound on the largest eigenvalue of a Laplacian.

    Combinatorial: ``min(max over edges of d_u + d_v, 2 max d)``. Normalised
    (detected by a unit diagonal unless ``normalized`` is given): 2. Both are
    inflated by ``1 + 1e-9`` so the bound is never attained.
    """
    mat = _as_csr(base)
    coo = mat.tocoo()
    off = (coo.row != coo.col) & (coo.data != 0)
    if not off.any():
        return 1.0
    diag = mat.diagonal()
    if normalized is None:
        normalized = bool(np.allclose(diag, 1.0, rtol=0, atol=1e-12))
    if normalized:
        return 2.0 * (1 + RHO_MARGIN)
    edge_bound = float(np.max(diag[coo.row[off]] + diag[coo.col[off]]))
    return min(edge_bound, 2.0 * float(diag.max())) * (1 + RHO_MARGIN)


def spectrum_map(lam, rho_max: float, omega: int):
    """Eigenvalue of ``S`` for a Laplacian eigenvalue ``lam``."""
    mu = 1.0 - 2.0 * np.asarray(lam, dtype=np.float64) / rho_max
    return mu * (1.0 - mu ** omega)


@dataclass(frozen=True, eq=False)
class ComponentNullSpace:
    """Orthonormal null-space basis with one vector per connected component.

    Stored sparsely: ``labels[i]`` is node i's component and ``weights[i]``
    its entry in that component's unit vector.
    """

    labels: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_components(cls, labels, node_weights=None) -> "ComponentNullSpace":
        labels = np.asarray(labels, dtype=np.int64)
        w = np.ones(labels.shape[0]) if node_weights is None else np.asarray(node_weights, float)
        norms = np.sqrt(np.bincount(labels, weights=w * w))
        return cls(labels, w / norms[labels])

    @classmethod
    def of_laplacian(cls, base, degrees=None) -> "ComponentNullSpace":
        """Null space of ``base`` from its sparsity pattern.

        Pass the graph ``degrees`` when ``base`` is a normalised Laplacian
        (its null vectors are proportional to ``sqrt(degree)``).
        """
        labels = matrix_components(_as_csr(base))
        w = None if degrees is None else np.sqrt(np.asarray(degrees, dtype=np.float64))
        return cls.from_components(labels, w)

    def __len__(self):
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def project_out(self, y: np.ndarray) -> np.ndarray:
        coef = np.bincount(self.labels, weights=self.weights * y, minlength=len(self))
        return y - self.weights * coef[self.labels]

    def vectors(self) -> np.ndarray:
        basis = np.zeros((len(self), self.labels.shape[0]))
        basis[self.labels, np.arange(self.labels.shape[0])] = self.weights
        return basis


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Matrix-free ``S`` for a Laplacian ``base``, minus any deflated rank-one terms."""

    base: sp.csr_matrix
    rho_max: float
    omega: int = DEFAULT_OMEGA
    deflated_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    deflated_vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    _m: Optional[sp.csr_matrix] = field(default=None, repr=False)

    @classmethod
    def build(cls, base, rho_max: Optional[float] = None, omega: int = DEFAULT_OMEGA,
              normalized: Optional[bool] = None) -> "SpectralOperator":
        base = _as_csr(base)
        if omega < 2:
            raise ValueError(f"omega must be at least 2, got {omega}")
        if rho_max is None:
            rho_max = rho_max_bound(base, normalized)
        if not rho_max > 0:
            raise ValueError("rho_max must be positive")
        n = base.shape[0]
        m = (sp.identity(n, format="csr") - (2.0 / rho_max) * base).tocsr()
        m.sort_indices()
        return cls(base, float(rho_max), int(omega), np.zeros(0), np.zeros((0, n)), m)

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @property
    def deflated(self):
        return list(zip(self.deflated_values.tolist(), self.deflated_vectors))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``S x`` with omega + 1 sparse mat-vecs; deflation acts on the input ``x``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError(f"vector of shape {x.shape} does not match operator size {self.n}")
        m = self._m
        mx = m @ x
        w = mx
        for _ in range(self.omega):
            w = m @ w
        y = mx - w  # M x - M^(omega+1) x
        if self.deflated_values.size:
            y -= self.deflated_vectors.T @ (self.deflated_values * (self.deflated_vectors @ x))
        return y

    def deflate(self, value: float, vector: np.ndarray) -> "SpectralOperator":
        """New operator with ``value * v v^T`` removed (``v`` is normalised here)."""
        v = np.asarray(vector, dtype=np.float64)
        v = v / np.linalg.norm(v)
        return SpectralOperator(self.base, self.rho_max, self.omega,
                                np.append(self.deflated_values, float(value)),
                                np.vstack([self.deflated_vectors, v[None, :]]), self._m)

    def to_dense(self) -> np.ndarray:
        """Materialise ``S`` column by column through :meth:`apply` (small N only)."""
        eye = np.eye(self.n)
        return np.column_stack([self.apply(eye[:, j]) for j in range(self.n)])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed)))


def power_iteration(op: SpectralOperator, max_iters: int = DEFAULT_MAX_ITERS,
                    tol: float = DEFAULT_TOL, seed=0,
                    null_space: Optional[ComponentNullSpace] = None) -> EigenPair:
    """Normalised iteration ``x <- S x / ||S x||`` from a seeded random start.

    Stops once successive (sign-aligned) iterates differ by less than ``tol``
    or after ``max_iters`` steps. If ``null_space`` is given it is projected
    out of every iterate. The returned ``value`` is the Rayleigh quotient with
    respect to the Laplacian, ``s_value`` the one with respect to ``S``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    rng = _rng(seed)

    def start():
        x = rng.standard_normal(op.n)
        if null_space is not None:
            x = null_space.project_out(x)
        return x / np.linalg.norm(x)

    def step(x):
        y = op.apply(x)
        if null_space is not None:
            y = null_space.project_out(y)
        norm = float(np.linalg.norm(y))
        if not np.isfinite(norm):
            raise SpectralError("non-finite value while applying S")
        return y, norm

    x = start()
    y, norm = step(x)
    if not norm > _EXHAUSTED:
        x = start()
        y, norm = step(x)
        if not norm > _EXHAUSTED:
            raise OperatorExhausted("S x vanished for two independent start vectors")

    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if not norm > _EXHAUSTED:
            raise OperatorExhausted(f"S x vanished at step {it}")
        x_new = y / norm
        aligned = x if x_new @ x >= 0 else -x
        delta = float(np.linalg.norm(x_new - aligned))
        x = x_new
        if delta < tol:
            converged = True
            break
        if it < max_iters:
            y, norm = step(x)

    sx = op.apply(x)
    if null_space is not None:
        sx = null_space.project_out(sx)
    return make_pair(op.base, x, s_value=float(x @ sx), iterations=it, converged=converged)


def _fill_null_pairs(base, count, taken, null_space, rng):
    """Unit vectors spanning what S annihilates, orthogonal to ``taken``."""
    basis = [p.vector for p in taken]
    out = []
    candidates = list(null_space.vectors()) if null_space is not None else []
    while len(out) < count:
        if candidates:
            v = candidates.pop(0)
        else:
            v = rng.standard_normal(base.shape[0])
        for b in basis:
            v = v - (b @ v) * b
        nrm = np.linalg.norm(v)
        if nrm < 1e-8:
            if not candidates and len(basis) >= base.shape[0]:
                break
            continue
        v = v / nrm
        basis.append(v)
        out.append(make_pair(base, v, iterations=0, converged=True))
    return out


def topk_small_eigvecs(base, k: int, omega: int = DEFAULT_OMEGA,
                       max_iters: int = DEFAULT_MAX_ITERS, tol: float = DEFAULT_TOL,
                       seed: int = 0, null_space: Optional[ComponentNullSpace] = None,
                       rho_max: Optional[float] = None,
                       normalized: Optional[bool] = None) -> list:
    """``k`` eigenpairs from power iteration with deflation, sorted by eigenvalue.

    Each extraction deflates ``S`` by its own eigenvalue (the ``S``-Rayleigh
    quotient). Once ``S`` has nothing non-zero left, the remaining slots are
    filled with null-space directions (eigenvalue ~ 0).
    """
    base = _as_csr(base)
    n = base.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= N = {n}, got {k}")
    rng = _rng(seed)
    op = SpectralOperator.build(base, rho_max=rho_max, omega=omega, normalized=normalized)
    pairs = []
    for i in range(k):
        try:
            pair = power_iteration(op, max_iters=max_iters, tol=tol, seed=rng,
                                   null_space=null_space)
        except OperatorExhausted:
            pairs.extend(_fill_null_pairs(base, k - i, pairs, null_space, rng))
            break
        except SpectralError as exc:
            raise SpectralError(f"eigenpair extraction {i} failed: {exc}") from exc
        pairs.append(pair)
        op = op.deflate(pair.s_value, pair.vector)
    return sorted(pairs, key=lambda p: p.value)


def dense_evd(base, cap: int = DENSE_CAP) -> list:
    """Full eigendecomposition (ascending) with per-pair residuals."""
    n = base.shape[0]
    if n > cap:
        raise ValueError(f"dense eigendecomposition refused for N={n} > cap={cap}; "
                         "use the power solver or raise the cap")
    if sp.issparse(base):
        dense = base.toarray()
    else:
        dense = np.asarray(base, dtype=np.float64)
    if n == 0:
        return []
    vals, vecs = np.linalg.eigh(dense)
    res = np.linalg.norm(base @ vecs - vecs * vals, axis=0)
    return [EigenPair(float(vals[i]), vecs[:, i], float(res[i])) for i in range(n)]
