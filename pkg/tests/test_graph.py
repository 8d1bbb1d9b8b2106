import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from evdenoise.graph import (DegenerateKneeWarning, build_eng, build_knng, build_vknng,
                             knee_epsilon, knee_gaps, laplacian, local_density,
                             normalized_laplacian, vknng_neighbors)
from evdenoise.synthetic import complete_graph, disjoint_union, path_graph

import oracles


def on_line(*xs):
    return np.array([[x, 0.0, 0.0] for x in xs])


def test_density_examples():
    assert local_density(on_line(0, 1), 1).d.tolist() == [1.0, 1.0]
    assert local_density(on_line(0, 1, 3), 1).d.tolist() == [1.0, 1.0, 4.0]
    assert local_density(on_line(0, 1, 3), 2).d.tolist() == [5.0, 2.5, 6.5]


def test_density_profile_order_and_errors():
    p = local_density(on_line(0, 1, 3), 2)
    assert p.sorted_values.tolist() == [6.5, 5.0, 2.5]
    with pytest.raises(ValueError):
        local_density(on_line(0), 1)
    with pytest.raises(ValueError):
        local_density(on_line(0, 1), 2)


def test_density_zero_only_with_duplicates():
    d = local_density(on_line(0, 0, 0, 5), 2).d
    assert d[:3].tolist() == [0.0, 0.0, 0.0] and d[3] > 0


def test_knee_examples():
    d = [10, 9, 1, 0.9, 0.8]
    assert np.allclose(knee_gaps(np.array(d)), [0, -1.3, 4.4, 2.2, 0])
    assert knee_epsilon(d) == 1.0
    assert knee_epsilon([5.0, 4.0, 3.0, 2.0, 1.0]) == 5.0
    assert knee_epsilon([3.0, 1.0]) == 3.0


def test_knee_constant_profile_warns():
    with pytest.warns(DegenerateKneeWarning):
        assert knee_epsilon([2.0, 2.0, 2.0]) == 2.0


def test_knee_rejects_unsorted():
    with pytest.raises(ValueError):
        knee_epsilon([1.0, 2.0])


@given(st.lists(st.integers(0, 20), min_size=2, max_size=40))
def test_knee_matches_brute_force_with_ties(vals):
    d = sorted((float(v) for v in vals), reverse=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateKneeWarning)
        assert knee_epsilon(d) == oracles.knee(d)


def test_eng_examples():
    g = build_eng(on_line(0, 1), 1.0, 0.5)
    assert g.n_edges == 1
    assert g.weights[0, 1] == pytest.approx(np.exp(-0.5)) and g.weights[0, 1] == g.weights[1, 0]
    empty = build_eng(on_line(0, 2, 5), 1.5, 1.0)
    assert empty.n_edges == 0 and empty.degrees.tolist() == [0, 0, 0]


def test_eng_200_points_against_brute_force():
    pts = np.random.default_rng(1).random((200, 3)) * 6
    g = build_eng(pts, 1.0, 0.5)
    assert g.edge_set() == oracles.eng_edges(pts, 1.0)
    assert build_eng(pts, 1.0, 0.5, brute_force=True).edge_list_text() == g.edge_list_text()


def test_eng_monotone_in_eps():
    pts = np.random.default_rng(2).random((150, 3)) * 5
    sets = [build_eng(pts, e, 1.0).edge_set() for e in (0.3, 0.6, 0.9, 1.2)]
    assert all(a <= b for a, b in zip(sets, sets[1:]))


def test_knng_examples():
    pts = on_line(0, 1, 3)
    assert build_knng(pts, 1, 1.0).edge_set() == {(0, 1), (1, 2)}
    assert build_knng(pts, 2, 1.0).edge_set() == {(0, 1), (0, 2), (1, 2)}
    pts = np.random.default_rng(3).random((40, 3))
    g = build_knng(pts, 5, 1.0)
    assert g.edge_set() == oracles.knng_edges(pts, 5)
    assert (np.diff(g.weights.indptr) >= 5).all()


def test_vknng_examples():
    pts = on_line(0, 0.1, 2, 4, 6)
    lists = [l.tolist() for l in vknng_neighbors(pts)]
    assert lists == [[1, 2], [0, 2], [1], [2], [3]]
    assert min(len(lists[0]), len(lists[1])) >= len(lists[4])
    assert build_vknng(pts, 1.0).edge_set() == {(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)}


def test_vknng_budget_can_admit_nothing():
    # node 0: budget (0 + 10 + 10.0001) / 3 is below its nearest distance 10
    lists = vknng_neighbors(on_line(0, 10, 10.0001))
    assert lists[0].tolist() == []


def _feasible_and_maximal(pts, lists):
    n = len(pts)
    for i, lst in enumerate(lists):
        dist = np.sqrt(((pts - pts[i]) ** 2).sum(axis=1))
        budget = dist.sum() / n
        order = sorted((dist[j], j) for j in range(n) if j != i)
        taken = [j for _, j in order[:len(lst)]]
        assert list(lst) == taken
        assert dist[list(lst)].sum() <= budget
        if len(lst) < n - 1:
            assert dist[list(lst)].sum() + order[len(lst)][0] > budget


def test_vknng_feasible_and_maximal():
    pts = np.random.default_rng(4).random((120, 3)) * [10, 10, 3]
    _feasible_and_maximal(pts, vknng_neighbors(pts, chunk=17))


def test_laplacian_examples():
    tri = complete_graph(3)
    lap = laplacian(tri).toarray()
    assert np.diag(lap).tolist() == [2, 2, 2]
    assert lap[0, 1] == lap[1, 2] == -1
    empty = build_eng(on_line(0, 5), 1.0, 1.0)
    assert not laplacian(empty).toarray().any()


def test_normalized_laplacian_examples():
    for m, expected in ((3, [0, 1.5, 1.5]), (2, [0, 2])):
        lap, iso = normalized_laplacian(complete_graph(m))
        assert np.allclose(np.linalg.eigvalsh(lap.toarray()), expected, atol=1e-12)
        assert iso.size == 0
    lap, iso = normalized_laplacian(disjoint_union(complete_graph(3), isolated=1))
    assert iso.tolist() == [3] and lap.shape == (3, 3)


def test_graph_invariants_on_random_clouds():
    rng = np.random.default_rng(6)
    for _ in range(5):
        pts = rng.random((150, 3)) * 4
        for g in (build_eng(pts, 0.8, 0.4), build_knng(pts, 4, 0.4), build_vknng(pts, 0.4)):
            w = g.weights.toarray()
            assert np.array_equal(w, w.T) and not np.diag(w).any()
            assert np.all((w == 0) | ((w > 0) & (w <= 1)))
            assert np.allclose(g.degrees, w.sum(axis=1))
            lap = laplacian(g)
            assert np.abs(lap @ np.ones(150)).max() < 1e-12
            xs = rng.standard_normal((100, 150))
            xs /= np.linalg.norm(xs, axis=1, keepdims=True)
            assert np.einsum("ij,ij->i", xs @ lap.toarray(), xs).min() >= -1e-12
            nl, _ = normalized_laplacian(g)
            ev = np.linalg.eigvalsh(nl.toarray())
            assert ev.min() >= -1e-10 and ev.max() <= 2 + 1e-10


def test_edge_list_text_is_sorted():
    g = disjoint_union(path_graph(3, 0.5), complete_graph(2))
    assert g.edge_list_text() == "0 1 0.5\n1 2 0.5\n3 4 1.0\n"
