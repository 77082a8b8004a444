import numpy as np
import pytest

import pcma
from pcma.community import Community
from pcma.ego import (
    EgoConfig,
    estimate_k,
    extract_partials,
    find_all_partials,
    fit_belonging,
    merge_intra_ego,
    partials_lines,
)
from pcma.graph import EgoNetwork, ego_network, load_edge_list
from conftest import two_clique_center_graph


@pytest.mark.parametrize("size,k", [(150, 5), (12, 5), (900, 20), (1, 5), (30, 5),
                                    (31, 5), (160, 6), (599, 20)])
def test_estimate_k(size, k):
    assert estimate_k(size) == k


def test_estimate_k_rejects_empty():
    with pytest.raises(ValueError):
        estimate_k(0)


def _ego_of(graph, v=0):
    return ego_network(graph, v)


def test_fit_monotone_loglik_on_random_egos():
    rng = np.random.default_rng(1)
    for trial in range(40):
        n_leaves = int(rng.integers(5, 25))
        p = float(rng.uniform(0.1, 0.6))
        edges = [(0, i) for i in range(1, n_leaves + 1)]
        for i in range(1, n_leaves + 1):
            for j in range(i + 1, n_leaves + 1):
                if rng.random() < p:
                    edges.append((i, j))
        g = pcma.Graph.from_edges(np.array(edges))
        fit = fit_belonging(_ego_of(g), int(rng.integers(2, 8)), seed=trial)
        diffs = np.diff(fit.log_likelihood)
        floor = -1e-9 * (1.0 + np.abs(fit.log_likelihood[:-1]))
        assert (diffs >= floor).all()
        deg = _ego_of(g).local_degrees()
        sums = fit.coefficients.sum(axis=1)
        assert np.allclose(sums[deg > 0], 1.0, atol=1e-9)


def test_fit_requires_edges_and_valid_k():
    ego = EgoNetwork(center=0, vertices=np.array([0]),
                     edges_u=np.array([], dtype=np.int64),
                     edges_v=np.array([], dtype=np.int64))
    with pytest.raises(ValueError):
        fit_belonging(ego, 5)
    g = two_clique_center_graph()
    with pytest.raises(ValueError):
        fit_belonging(_ego_of(g), 0)


def test_two_clique_ego_column_support():
    # proportional splits across columns are likelihood-equivalent for a
    # clique, so the guaranteed structure is that columns never mix the
    # cliques and each clique's mass stays within its own columns
    g = two_clique_center_graph()
    ego = _ego_of(g)
    fit = fit_belonging(ego, 5, seed=1)
    b = fit.coefficients
    c1 = b[1:11].sum(axis=0)
    c2 = b[11:21].sum(axis=0)
    owned_by_1 = c1 > c2
    assert c1[owned_by_1].sum() >= 0.9 * 10
    assert c2[~owned_by_1].sum() >= 0.9 * 10
    # cross-clique leakage in owned columns stays negligible
    assert c2[owned_by_1].sum() <= 0.1 * 10
    assert c1[~owned_by_1].sum() <= 0.1 * 10


def test_two_clique_ego_extracts_both_cliques():
    g = two_clique_center_graph()
    ego = _ego_of(g)
    fit = fit_belonging(ego, 5, seed=1)
    parts = merge_intra_ego(extract_partials(ego, fit.coefficients, 0.2), 0.3)
    assert len(parts) == 2
    got = {frozenset(p.scores) for p in parts}
    want = {frozenset(range(0, 11)), frozenset([0] + list(range(11, 21)))}
    assert got == want


def test_single_clique_concentrates_in_common_column():
    edges = [(i, j) for i in range(6) for j in range(i + 1, 6)]
    g = pcma.Graph.from_edges(np.array(edges))
    # seed pinned: split ratios across columns are init-dependent
    fit = fit_belonging(_ego_of(g), 5, seed=35)
    b = fit.coefficients
    cols = set(b.argmax(axis=1).tolist())
    assert len(cols) == 1
    assert b.max(axis=1).min() >= 0.5


def test_extract_membership_threshold_row():
    # a row of belonging shares selects exactly the columns above 0.20
    vertices = np.array([9, 1, 2, 3])
    ego = EgoNetwork(center=9, vertices=vertices,
                     edges_u=np.array([0, 0, 0], dtype=np.int64),
                     edges_v=np.array([1, 2, 3], dtype=np.int64))
    coeff = np.zeros((4, 5))
    coeff[1] = [0.64, 0.29, 0.0, 0.07, 0.0]
    coeff[2] = [0.5, 0.5, 0.0, 0.0, 0.0]
    coeff[3] = [0.5, 0.0, 0.5, 0.0, 0.0]
    parts = extract_partials(ego, coeff, 0.2)
    membership = {k: set(p.scores) for k, p in enumerate(parts)}
    assert set(membership[0]) == {9, 1, 2, 3}
    assert set(membership[1]) == {9, 1, 2}
    assert len(parts) == 2  # column 2 has only {3} + center: size 2, dropped


def test_extract_boundary_is_strict():
    vertices = np.arange(5)
    ego = EgoNetwork(center=0, vertices=vertices,
                     edges_u=np.array([0] * 4, dtype=np.int64),
                     edges_v=np.array([1, 2, 3, 4], dtype=np.int64))
    coeff = np.full((5, 5), 0.20)
    assert extract_partials(ego, coeff, 0.2) == []


def test_extract_adds_center_and_drops_small():
    vertices = np.arange(6)
    ego = EgoNetwork(center=0, vertices=vertices,
                     edges_u=np.array([0] * 5, dtype=np.int64),
                     edges_v=np.arange(1, 6, dtype=np.int64))
    coeff = np.zeros((6, 2))
    coeff[1, 0] = coeff[2, 0] = 0.9
    coeff[3, 1] = 0.9
    parts = extract_partials(ego, coeff, 0.2)
    assert len(parts) == 1
    assert set(parts[0].scores) == {0, 1, 2}
    assert parts[0].origin == 0 and parts[0].parts == 1


def test_merge_intra_ego_examples():
    x = Community.from_members(set(range(1, 11)), origin=1)
    y = Community.from_members({8, 9, 10, 11}, origin=1)
    merged = merge_intra_ego([x, y], 0.3)
    assert len(merged) == 1
    assert set(merged[0].scores) == set(range(1, 12))
    assert merged[0].parts == 1

    a = Community.from_members({1, 2, 3}, origin=1)
    b = Community.from_members({7, 8, 9}, origin=1)
    kept = merge_intra_ego([a, b], 0.3)
    assert sorted((set(c.scores) for c in kept), key=min) == [{1, 2, 3}, {7, 8, 9}]


def test_merge_intra_ego_boundary_strict():
    x = Community.from_members(set(range(10)), origin=0)
    y = Community.from_members({0, 1, 2, 20, 21, 22, 23, 24, 25, 26}, origin=0)
    # overlap 3 of 10 on both sides: exactly 30%, not merged
    assert len(merge_intra_ego([x, y], 0.3)) == 2


def test_merge_intra_ego_chains_three_way():
    a = Community.from_members({1, 2, 3, 4, 5, 6}, origin=1)
    b = Community.from_members({4, 5, 6, 7, 8, 9}, origin=1)
    c = Community.from_members({7, 8, 9, 10, 11, 12}, origin=1)
    merged = merge_intra_ego([a, b, c], 0.3)
    assert len(merged) == 1
    assert set(merged[0].scores) == set(range(1, 13))


def test_find_all_partials_empty_when_low_degree():
    g, _ = load_edge_list("0 1\n1 2\n2 0".splitlines())
    assert find_all_partials(g, EgoConfig(seed=0)) == []


def test_find_all_partials_invariants_and_line_permutation():
    g, truth = pcma.gen_simple(pcma.SimpleBenchmarkParams(
        n=600, k_mean=3.0, p=0.4, s_mean=30.0, c_mean=2.0, seed=5))
    cfg = EgoConfig(seed=5)
    parts = find_all_partials(g, cfg)
    assert parts
    for c in parts:
        assert c.parts == 1
        assert c.origin in c.scores
        assert all(s == 1 for s in c.scores.values())
        assert c.weight == len(c.scores)
        assert len(c.scores) >= 3
    origins = [c.origin for c in parts]
    assert origins == sorted(origins)

    from pcma.graph import edge_lines
    lines = list(edge_lines(g))
    rng = np.random.default_rng(0)
    shuffled = [lines[i] for i in rng.permutation(len(lines))]
    g2, _ = load_edge_list(shuffled)
    parts2 = find_all_partials(g2, cfg)
    assert [(c.origin, tuple(c.members())) for c in parts] == \
           [(c.origin, tuple(c.members())) for c in parts2]


def test_find_all_partials_clustering_cap_filters():
    # a 30-clique: every ego is the full clique with clustering 1.0
    edges = [(i, j) for i in range(30) for j in range(i + 1, 30)]
    g = pcma.Graph.from_edges(np.array(edges))
    assert find_all_partials(g, EgoConfig(seed=0, min_degree=20)) == []
    parts = find_all_partials(g, EgoConfig(seed=0, min_degree=20, clustering_cap=1.0))
    assert len(parts) == 30


def test_two_block_ego_with_k10_yields_multiple_partials():
    rng = np.random.default_rng(8)
    edges = [(0, i) for i in range(1, 31)]
    for block in (range(1, 16), range(16, 31)):
        bl = list(block)
        for i in range(len(bl)):
            for j in range(i + 1, len(bl)):
                if rng.random() < 0.6:
                    edges.append((bl[i], bl[j]))
    g = pcma.Graph.from_edges(np.array(edges))
    ego = _ego_of(g)
    fit = fit_belonging(ego, 10, seed=3)
    parts = merge_intra_ego(extract_partials(ego, fit.coefficients, 0.2), 0.3)
    assert len(parts) >= 2


def test_partials_dump_format():
    c = Community.from_members({5, 2, 9}, origin=5)
    (line,) = list(partials_lines([c]))
    assert line == "5\t2 5 9"


def test_config_validation():
    with pytest.raises(ValueError):
        EgoConfig(belong_threshold=0.0).validate()
    with pytest.raises(ValueError):
        EgoConfig(intra_overlap=1.0).validate()
    with pytest.raises(ValueError):
        EgoConfig(min_degree=0).validate()
    with pytest.raises(ValueError):
        EgoConfig(em_restarts=0).validate()
