"""Synthetic inputs: moving-shape event streams and block-structured graphs."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .events import REAL, EventStream
from .graph import SparseGraph, graph_from_pairs
from .noise import make_rng


def _outline(shape, u, size):
    """Points on a unit-parameter outline, ``u`` in [0, 1)."""
    if shape == "ring":
        a = 2 * np.pi * u
        return size * np.cos(a), size * np.sin(a)
    if shape == "square":
        side = np.floor(u * 4).astype(int)
        s = (u * 4 - side) * 2 - 1
        x = np.select([side == 0, side == 1, side == 2], [s, np.ones_like(s), -s], -np.ones_like(s))
        y = np.select([side == 0, side == 1, side == 2], [-np.ones_like(s), s, np.ones_like(s)], -s)
        return size * x, size * y
    raise ValueError(f"unknown shape {shape!r}")


def moving_shape_stream(n_events=5000, width=128, height=128, duration=1.0,
                        shapes=(("ring", (32.0, 64.0), (60.0, 0.0), 14.0),),
                        jitter=0.5, seed=0) -> EventStream:
    """Events fired by the outline of shapes translating across the sensor.

    Each entry of ``shapes`` is ``(kind, start_xy, velocity_xy_per_s, size)``
    with kind ``"ring"`` or ``"square"``. Events are split evenly across
    shapes, timestamps uniform over ``[0, duration]``, positions on the moving
    outline plus Gaussian jitter, rounded to pixels. All events are labelled
    real.
    """
    rng = make_rng(seed)
    per = np.full(len(shapes), n_events // len(shapes))
    per[: n_events % len(shapes)] += 1
    xs, ys, ts = [], [], []
    for (kind, start, vel, size), m in zip(shapes, per):
        t = rng.uniform(0.0, duration, size=m)
        ox, oy = _outline(kind, rng.uniform(0.0, 1.0, size=m), size)
        x = start[0] + vel[0] * t + ox + rng.normal(0.0, jitter, size=m)
        y = start[1] + vel[1] * t + oy + rng.normal(0.0, jitter, size=m)
        xs.append(np.clip(np.rint(x), 0, width - 1).astype(np.int64))
        ys.append(np.clip(np.rint(y), 0, height - 1).astype(np.int64))
        ts.append(t)
    x, y, t = np.concatenate(xs), np.concatenate(ys), np.concatenate(ts)
    return EventStream.from_arrays(x, y, t, np.full(len(t), REAL), width=width, height=height)


def path_graph(n, weight=1.0):
    i = np.arange(n - 1)
    return graph_from_pairs(n, i, i + 1, np.full(n - 1, weight))


def grid_graph(rows, cols, weight=1.0):
    idx = np.arange(rows * cols).reshape(rows, cols)
    i = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    j = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return graph_from_pairs(rows * cols, i, j, np.full(i.shape[0], weight))


def complete_graph(m, weight=1.0):
    i, j = np.triu_indices(m, k=1)
    return graph_from_pairs(m, i, j, np.full(i.shape[0], weight))


def star_graph(leaves, weight=1.0):
    return graph_from_pairs(leaves + 1, np.zeros(leaves, dtype=int), np.arange(1, leaves + 1),
                            np.full(leaves, weight))


def disjoint_union(*graphs, isolated=0):
    blocks = [g.weights for g in graphs]
    if isolated:
        blocks.append(sp.csr_matrix((isolated, isolated)))
    return SparseGraph(sp.block_diag(blocks, format="csr"))


def block_fixture(rng, permute=True):
    """Random graph of large path/grid blocks, small cliques and isolated nodes.

    Returns ``(graph, truth)`` where ``truth`` is 1 on the large blocks.
    Sizes: 1-3 large blocks of 50-500 nodes, 5-30 cliques of 2-5 nodes and
    0-20 isolated nodes.
    """
    blocks, truth = [], []
    for _ in range(rng.integers(1, 4)):
        if rng.random() < 0.5:
            g = path_graph(int(rng.integers(50, 501)))
        else:
            r = int(rng.integers(5, 23))
            c = int(rng.integers(max(2, -(-50 // r)), 500 // r + 1))
            g = grid_graph(r, c)
        blocks.append(g)
        truth.append(np.ones(g.n_nodes, dtype=np.int8))
    for _ in range(rng.integers(5, 31)):
        g = complete_graph(int(rng.integers(2, 6)))
        blocks.append(g)
        truth.append(np.zeros(g.n_nodes, dtype=np.int8))
    n_iso = int(rng.integers(0, 21))
    graph = disjoint_union(*blocks, isolated=n_iso)
    truth = np.concatenate(truth + [np.zeros(n_iso, dtype=np.int8)])
    if permute:
        perm = rng.permutation(graph.n_nodes)
        graph = SparseGraph(graph.weights[perm][:, perm].tocsr())
        truth = truth[perm]
    return graph, truth
