"""End-to-end denoising: scale, density, knee radius, graph, eigenvectors, labels."""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import detect as det
from .events import EventStream, scale_time
from .graph import (build_eng, build_knng, build_vknng, knee_epsilon, laplacian,
                    local_density, normalized_laplacian)
from .noise import RNG_ALGORITHM
from .spatial import KdIndex
from .spectral import ComponentNullSpace, DENSE_CAP, dense_evd, topk_small_eigvecs

GRAPHS = ("eng", "knng", "vknng")
SOLVERS = ("evd", "power")
MODES = ("single", "multi")
GAMMA_MODES = ("half_eps_lin", "half_eps_sq", "fixed")


@dataclass(frozen=True)
class PipelineConfig:
    beta: float = 50.0
    density_k: int = 10
    omega: int = 30
    power_iters: int = 50
    power_tol: float = 1e-8
    num_eigvecs: int = 20
    support_threshold_rel: float = 1e-3
    eig_cutoff: float = 1.0
    graph: str = "eng"
    knng_k: int = 10
    solver: str = "power"
    mode: str = "multi"
    gamma_mode: str = "half_eps_lin"
    gamma: float | None = None
    seed: int = 0
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        for name in ("beta", "power_tol", "support_threshold_rel", "eig_cutoff"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("density_k", "power_iters", "num_eigvecs", "knng_k", "dense_cap"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.omega < 2:
            raise ValueError("omega must be at least 2")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        for name, allowed in (("graph", GRAPHS), ("solver", SOLVERS), ("mode", MODES),
                              ("gamma_mode", GAMMA_MODES)):
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.gamma_mode == "fixed" and not (self.gamma or 0) > 0:
            raise ValueError("gamma_mode='fixed' needs a positive gamma")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng_algorithm"] = RNG_ALGORITHM
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"rng_algorithm"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in d.items() if k in known})

    def detection(self) -> det.DetectionConfig:
        return det.DetectionConfig(self.mode, self.support_threshold_rel, self.eig_cutoff,
                                   self.num_eigvecs)


@dataclass
class DenoiseResult:
    labels: np.ndarray
    eps_star: float
    eps_lin: float
    gamma: float
    n_edges: int
    n_isolated: int
    pairs: list
    ct_seconds: float
    stage_seconds: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def diagnostics(self) -> dict:
        return {
            "eps_star": self.eps_star,
            "eps_lin": self.eps_lin,
            "gamma": self.gamma,
            "n_events": int(self.labels.shape[0]),
            "n_real": int(self.labels.sum()),
            "n_edges": self.n_edges,
            "n_isolated": self.n_isolated,
            "eigenpairs": [{"value": p.value, "residual": p.residual} for p in self.pairs],
            "ct_seconds": self.ct_seconds,
            "stage_seconds": dict(self.stage_seconds),
            "warnings": list(self.warnings),
        }


def _gamma(cfg: PipelineConfig, eps_star: float, eps_lin: float) -> float:
    if cfg.gamma_mode == "fixed":
        return float(cfg.gamma)
    g = eps_lin / 2 if cfg.gamma_mode == "half_eps_lin" else eps_star / 2
    # all neighbours coincide: any decay gives weight 1 at distance 0
    return g if g > 0 else 1.0


def _solve(base, cfg: PipelineConfig, degrees):
    n = base.shape[0]
    if cfg.solver == "evd":
        return dense_evd(base, cap=cfg.dense_cap)
    null = ComponentNullSpace.of_laplacian(
        base, degrees if cfg.mode == "multi" else None)
    k = 1 if cfg.mode == "single" else min(cfg.num_eigvecs, n)
    return topk_small_eigvecs(base, k, omega=cfg.omega, max_iters=cfg.power_iters,
                              tol=cfg.power_tol, seed=cfg.seed, null_space=null,
                              normalized=cfg.mode == "multi")


def denoise(stream, cfg: PipelineConfig = PipelineConfig()) -> DenoiseResult:
    """Label every event 1 (real) or 0 (noise).

    ``stream`` is an :class:`EventStream` or a raw N x 3 ``(x, y, t)`` array.
    Timing covers everything after the events are in memory.
    """
    stages = {}
    caught = []
    t_start = time.perf_counter()
    mark = t_start

    def tick(name):
        nonlocal mark
        now = time.perf_counter()
        stages[name] = now - mark
        mark = now

    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        if isinstance(stream, EventStream):
            scaled = scale_time(stream, cfg.beta).coords
        else:
            scaled = np.array(stream, dtype=np.float64)
            scaled[:, 2] *= cfg.beta
        n = scaled.shape[0]
        if n < 2:
            raise ValueError("denoising needs at least two events")
        tick("scale")

        index = KdIndex(scaled)
        k = min(cfg.density_k, n - 1)
        if k != cfg.density_k:
            caught.append(f"density_k reduced to {k} for {n} events")
        profile = local_density(scaled, k, index=index)
        tick("density")

        eps_star = knee_epsilon(profile)
        eps_lin = math.sqrt(eps_star)
        gamma = _gamma(cfg, eps_star, eps_lin)
        tick("knee")

        if cfg.graph == "eng":
            graph = build_eng(scaled, eps_lin, gamma, index=index)
        elif cfg.graph == "knng":
            graph = build_knng(scaled, min(cfg.knng_k, n - 1), gamma, index=index)
        else:
            graph = build_vknng(scaled, gamma)
        tick("graph")

        if cfg.mode == "multi":
            base, isolated = normalized_laplacian(graph)
        else:
            deg = graph.degrees
            isolated = np.flatnonzero(deg <= 0)
            base = laplacian(graph.subgraph(np.flatnonzero(deg > 0)))
        degrees = graph.degrees[graph.degrees > 0]
        tick("laplacian")

        if base.shape[0] == 0:
            pairs = []
        else:
            pairs = _solve(base, cfg, degrees)
        tick("solve")

        dcfg = cfg.detection()
        if base.shape[0] == 0:
            labels = np.zeros(n, dtype=np.int8)
        elif cfg.mode == "multi":
            labels = det.detect_multi(pairs, n, isolated, dcfg)
        else:
            nonzero = [p for p in pairs if p.value > det.ZERO_EIGENVALUE_FLOOR]
            if nonzero:
                labels = det.detect_single(nonzero[0], n, isolated, dcfg)
            else:
                caught.append("no non-zero eigenpair found; labelling everything noise")
                labels = np.zeros(n, dtype=np.int8)
        tick("detect")

    ct = time.perf_counter() - t_start
    caught.extend(str(w.message) for w in wlist)
    if cfg.solver == "evd":
        shown = [p for p in pairs if p.value > det.ZERO_EIGENVALUE_FLOOR][: cfg.num_eigvecs]
    else:
        shown = pairs
    return DenoiseResult(labels, eps_star, eps_lin, gamma, graph.n_edges, int(len(isolated)),
                         shown, ct, stages, caught)
