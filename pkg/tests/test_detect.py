import numpy as np
import pytest
from hypothesis import given, strategies as st

from evdenoise.components import UnionFind, component_labels
from evdenoise.detect import (DegenerateDetectionWarning, DetectionConfig, connected_components,
                              detect_multi, detect_single, oracle_labels)
from evdenoise.graph import build_eng, laplacian, normalized_laplacian
from evdenoise.spectral import EigenPair, dense_evd
from evdenoise.synthetic import block_fixture, complete_graph, disjoint_union, path_graph

import oracles


def pair(value, vec):
    return EigenPair(value, np.asarray(vec, float), 0.0)


def test_union_find_basics():
    uf = UnionFind(5)
    uf.union(0, 3)
    uf.union(3, 4)
    assert uf.find(4) == uf.find(0) and uf.find(1) != uf.find(0)
    assert component_labels(5, [3, 1], [4, 2]).tolist() == [0, 1, 1, 2, 2]


def test_components_examples():
    g = disjoint_union(path_graph(100), complete_graph(3))
    comp = connected_components(g)
    assert sorted(np.bincount(comp).tolist()) == [3, 100]
    empty = disjoint_union(isolated=4)
    assert connected_components(empty).tolist() == [0, 1, 2, 3]


def test_components_match_bfs_on_random_eng():
    rng = np.random.default_rng(11)
    for _ in range(10):
        pts = rng.random((250, 3)) * 8
        g = build_eng(pts, 0.7, 1.0)
        comp = connected_components(g)
        ref = oracles.bfs_components(250, g.edge_set())
        assert comp.tolist() == ref  # same ids: both ordered by smallest member


def test_oracle_labels_examples():
    g = disjoint_union(path_graph(100), complete_graph(3))
    assert oracle_labels(g, 1).tolist() == [1] * 103
    assert oracle_labels(g, 10).tolist() == [1] * 100 + [0] * 3
    with pytest.raises(ValueError):
        oracle_labels(g, 0)


def test_detect_single_path_plus_triangle():
    g = disjoint_union(path_graph(100), complete_graph(3))
    lap = laplacian(g)
    pairs = dense_evd(lap)
    # the smallest non-zero eigenvalue lives on the path
    fiedler = next(p for p in pairs if p.value > 1e-8)
    y = detect_single(fiedler, 103)
    assert y.tolist() == oracle_labels(g, 10).tolist()


def test_detect_single_uniform_and_isolated():
    assert detect_single(np.ones(4), 6, isolated=[1, 4]).tolist() == [1, 0, 1, 1, 0, 1]
    assert detect_single(np.zeros(0), 3, isolated=[0, 1, 2]).tolist() == [0, 0, 0]
    with pytest.warns(DegenerateDetectionWarning):
        assert detect_single(np.zeros(3), 3).tolist() == [0, 0, 0]


def test_detect_multi_two_paths_k4_isolated():
    g = disjoint_union(path_graph(50), path_graph(50), complete_graph(4), isolated=10)
    nl, iso = normalized_laplacian(g)
    y = detect_multi(dense_evd(nl), g.n_nodes, iso)
    assert y.tolist() == [1] * 100 + [0] * 14


def test_detect_multi_single_component_and_cutoff():
    nl, iso = normalized_laplacian(path_graph(60))
    pairs = dense_evd(nl)[:3]
    assert detect_multi(pairs, 60, iso).tolist() == [1] * 60
    high = [pair(1.2, np.ones(5)), pair(1.0, np.ones(5))]
    assert detect_multi(high, 5).tolist() == [0] * 5
    with pytest.warns(DegenerateDetectionWarning):
        assert detect_multi([], 4).tolist() == [0, 0, 0, 0]


def test_detect_multi_ignores_zero_eigenvalue_pairs():
    assert detect_multi([pair(0.0, np.ones(3)), pair(1e-9, np.ones(3))], 3).tolist() == [0, 0, 0]
    assert detect_multi([pair(2e-8, [0, 0, 1])], 3).tolist() == [0, 0, 1]


def test_detection_config_validation():
    for kwargs in ({"mode": "x"}, {"support_threshold_rel": 0}, {"eig_cutoff": 2.5},
                   {"num_eigvecs": 0}):
        with pytest.raises(ValueError):
            DetectionConfig(**kwargs)


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=30),
       st.floats(0.01, 100) | st.floats(-100, -0.01), st.floats(0.01, 0.99))
def test_detection_is_scale_invariant(vec, c, val):
    v = np.array(vec)
    n = len(v)
    cfg = DetectionConfig(support_threshold_rel=1e-3)
    if np.abs(v).max() == 0:
        return
    assert np.array_equal(detect_single(v, n, cfg=cfg), detect_single(c * v, n, cfg=cfg))
    assert np.array_equal(detect_multi([pair(val, v)], n, cfg=cfg),
                          detect_multi([pair(val, c * v)], n, cfg=cfg))


def _assumption_fixture(rng):
    """Paths of length >= 20 as real blocks, cliques of size <= 5 as noise."""
    blocks, truth = [], []
    for _ in range(rng.integers(1, 4)):
        m = int(rng.integers(20, 120))
        blocks.append(path_graph(m))
        truth += [1] * m
    for _ in range(rng.integers(1, 10)):
        m = int(rng.integers(2, 6))
        blocks.append(complete_graph(m))
        truth += [0] * m
    return disjoint_union(*blocks), np.array(truth)


def test_corollary_eigenvectors_below_one_live_on_single_path():
    rng = np.random.default_rng(21)
    for _ in range(8):
        g, truth = _assumption_fixture(rng)
        nl, iso = normalized_laplacian(g)
        comp = connected_components(g)
        for p in dense_evd(nl):
            if 1e-8 < p.value < 1:
                v = np.abs(p.vector)
                sup = v >= 1e-6 * v.max()
                assert len(set(comp[sup].tolist())) == 1
                assert truth[sup].all()
        assert np.array_equal(detect_multi(dense_evd(nl), g.n_nodes, iso), oracle_labels(g, 6))


def test_isolated_nodes_never_real():
    rng = np.random.default_rng(4)
    for _ in range(5):
        g, _ = block_fixture(rng)
        nl, iso = normalized_laplacian(g)
        y = detect_multi(dense_evd(nl), g.n_nodes, iso)
        assert not y[iso].any()
