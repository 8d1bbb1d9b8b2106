"""Label events real/noise from eigenvector support.

Real events are those lying on large connected components of the event graph.
Small noise fragments only carry eigenvalues >= 1 of the normalised
Laplacian, so support of eigenvectors below the cutoff marks real events.
Thresholds are relative to each vector's largest magnitude, which makes the
labels independent of vector scaling and of N.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .components import component_labels
from .graph import SparseGraph

# eigenvalues at or below this are treated as the null space
ZERO_EIGENVALUE_FLOOR = 1e-8


class DegenerateDetectionWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DetectionConfig:
    mode: str = "multi"
    support_threshold_rel: float = 1e-3
    eig_cutoff: float = 1.0
    num_eigvecs: int = 20

    def __post_init__(self):
        if self.mode not in ("single", "multi"):
            raise ValueError(f"mode must be 'single' or 'multi', got {self.mode!r}")
        if not 0 < self.support_threshold_rel < 1:
            raise ValueError("support_threshold_rel must lie in (0, 1)")
        if not 0 < self.eig_cutoff <= 2:
            raise ValueError("eig_cutoff must lie in (0, 2]")
        if self.num_eigvecs < 1:
            raise ValueError("num_eigvecs must be positive")


def _support(v, rel):
    v = np.abs(np.asarray(v, dtype=np.float64))
    peak = v.max() if v.size else 0.0
    if not peak > 0:
        return None
    return v >= rel * peak


def _scatter(n_total, isolated, sub_labels):
    """Place labels computed on the non-isolated nodes back into a length-N vector."""
    y = np.zeros(n_total, dtype=np.int8)
    keep = np.setdiff1d(np.arange(n_total), np.asarray(isolated, dtype=np.int64))
    if sub_labels is not None:
        if len(sub_labels) != len(keep):
            raise ValueError(f"vector has {len(sub_labels)} entries, expected {len(keep)} "
                             "non-isolated nodes")
        y[keep] = sub_labels
    return y


def detect_single(fiedler, n_total: int, isolated=(), cfg: DetectionConfig = DetectionConfig()):
    """Real iff the Fiedler-vector entry reaches the relative threshold."""
    vec = getattr(fiedler, "vector", fiedler)
    keep_count = n_total - len(isolated)
    if keep_count == 0:
        return np.zeros(n_total, dtype=np.int8)
    sup = _support(vec, cfg.support_threshold_rel)
    if sup is None:
        warnings.warn("eigenvector is identically zero; labelling everything noise",
                      DegenerateDetectionWarning, stacklevel=2)
        return _scatter(n_total, isolated, np.zeros(keep_count, dtype=np.int8))
    return _scatter(n_total, isolated, sup.astype(np.int8))


def detect_multi(pairs, n_total: int, isolated=(), cfg: DetectionConfig = DetectionConfig()):
    """Real iff some eigenvector with eigenvalue in (0, cutoff) is supported there."""
    keep_count = n_total - len(isolated)
    pairs = list(pairs)
    if keep_count == 0:
        return np.zeros(n_total, dtype=np.int8)
    if not pairs:
        warnings.warn("no eigenpairs supplied; labelling everything noise",
                      DegenerateDetectionWarning, stacklevel=2)
        return _scatter(n_total, isolated, None)
    real = np.zeros(keep_count, dtype=bool)
    for p in pairs:
        if not ZERO_EIGENVALUE_FLOOR < p.value < cfg.eig_cutoff:
            continue
        sup = _support(p.vector, cfg.support_threshold_rel)
        if sup is None:
            continue
        if sup.shape[0] != keep_count:
            raise ValueError(f"eigenvector has {sup.shape[0]} entries, expected {keep_count}")
        real |= sup
    return _scatter(n_total, isolated, real.astype(np.int8))


def connected_components(graph: SparseGraph) -> np.ndarray:
    """Component id per node (union-find), ids ordered by smallest member."""
    i, j, _ = graph.edges()
    return component_labels(graph.n_nodes, i, j)


def oracle_labels(graph: SparseGraph, min_component_size: int) -> np.ndarray:
    """Ground-truth realisation of the density prior: real iff on a big component."""
    if min_component_size < 1:
        raise ValueError("min_component_size must be at least 1")
    comp = connected_components(graph)
    sizes = np.bincount(comp)
    return (sizes[comp] >= min_component_size).astype(np.int8)
