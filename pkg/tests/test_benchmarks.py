import numpy as np
import pytest
import scipy.stats

import pcma
from pcma.benchmarks import (
    InfeasibleParamsError,
    LfrParams,
    SimpleBenchmarkParams,
    applicability_score,
    gen_lfr,
    gen_simple,
)


def test_simple_cliques_when_p_one():
    params = SimpleBenchmarkParams(n=300, k_mean=0.0, p=1.0, s_mean=12.0,
                                   c_mean=0.4, seed=1)
    g, cover = gen_simple(params)
    assert len(cover) == params.community_count() == 10
    for members in cover.member_sets():
        for u in members:
            assert members - {u} <= set(map(int, g.neighbors(u)))


def test_simple_community_count_and_membership_mean():
    means = []
    for seed in range(10):
        params = SimpleBenchmarkParams(n=10_000, k_mean=3.0, p=0.3, s_mean=40.0,
                                       c_mean=2.0, seed=seed)
        _, cover = gen_simple(params)
        assert len(cover) == 500
        total = sum(e.size() for e in cover.entries)
        means.append(total / params.n)
    assert abs(float(np.mean(means)) - 2.0) < 0.04


def test_simple_size_distribution_is_poisson():
    params = SimpleBenchmarkParams(n=10_000, k_mean=0.0, p=0.0, s_mean=40.0,
                                   c_mean=4.0, seed=3)
    _, cover = gen_simple(params)
    sizes = np.array([e.size() for e in cover.entries])
    lo, hi = 25, 56
    edges = np.arange(lo, hi + 1)
    observed = np.array([(sizes == k).sum() for k in edges], dtype=float)
    observed = np.concatenate([[float((sizes < lo).sum())], observed,
                               [float((sizes > hi).sum())]])
    pmf = scipy.stats.poisson.pmf(edges, 40.0)
    expected = np.concatenate([[scipy.stats.poisson.cdf(lo - 1, 40.0)], pmf,
                               [scipy.stats.poisson.sf(hi, 40.0)]]) * sizes.size
    stat, pvalue = scipy.stats.chisquare(observed, expected)
    assert pvalue > 0.01


def test_simple_background_degree():
    g, cover = gen_simple(SimpleBenchmarkParams(n=5000, k_mean=8.0, p=0.0,
                                                s_mean=1.0, c_mean=0.0, seed=4))
    assert len(cover) == 0
    assert abs(float(g.degrees().mean()) - 8.0) < 0.4


def test_simple_homeless_vertices_allowed():
    _, cover = gen_simple(SimpleBenchmarkParams(n=1000, k_mean=2.0, p=0.3,
                                                s_mean=30.0, c_mean=0.5, seed=5))
    members = set()
    for s in cover.member_sets():
        members |= s
    assert len(members) < 1000


def test_simple_determinism():
    p = SimpleBenchmarkParams(n=800, k_mean=3.0, p=0.3, s_mean=20.0, c_mean=2.0, seed=9)
    g1, c1 = gen_simple(p)
    g2, c2 = gen_simple(p)
    assert list(pcma.graph.edge_lines(g1)) == list(pcma.graph.edge_lines(g2))
    assert [sorted(e.scores) for e in c1.entries] == [sorted(e.scores) for e in c2.entries]


def test_simple_validation():
    with pytest.raises(ValueError):
        SimpleBenchmarkParams(n=0).validate()
    with pytest.raises(ValueError):
        SimpleBenchmarkParams(n=10, p=1.5).validate()
    with pytest.raises(ValueError):
        SimpleBenchmarkParams(n=10, s_mean=0.0, c_mean=1.0).validate()


def test_simple_sizes_capped_by_n():
    params = SimpleBenchmarkParams(n=30, k_mean=0.0, p=0.5, s_mean=25.0,
                                   c_mean=5.0, seed=6)
    _, cover = gen_simple(params)
    assert all(1 <= e.size() <= 30 for e in cover.entries)


def test_applicability_values():
    assert applicability_score(40, 0.28) == pytest.approx(2.7776)
    assert round(applicability_score(40, 0.28), 2) == 2.78
    assert applicability_score(40, 0.30) == pytest.approx(3.21)
    assert applicability_score(40, 0.0) == 0.0
    with pytest.raises(ValueError):
        applicability_score(0.5, 0.3)


FIG3C = LfrParams(n=10_000, k_mean=40.0, k_max=100, mu=0.3, tau1=2.0, tau2=1.0,
                  c_min=20, c_max=100, overlap_fraction=0.5,
                  memberships_per_overlapper=2, seed=3)


@pytest.fixture(scope="module")
def lfr_fig3c():
    return gen_lfr(FIG3C)


def test_lfr_mean_degree_and_edge_count(lfr_fig3c):
    g, _ = lfr_fig3c
    assert abs(float(g.degrees().mean()) - 40.0) / 40.0 < 0.05
    assert abs(g.m - 2e5) / 2e5 < 0.05
    assert g.degrees().max() <= 100


def test_lfr_overlappers_have_exactly_two(lfr_fig3c):
    _, cover = lfr_fig3c
    counts = np.zeros(FIG3C.n, dtype=int)
    for e in cover.entries:
        for v in e.scores:
            counts[v] += 1
    dist = np.bincount(counts)
    assert dist[1] == 5000 and dist[2] == 5000


def test_lfr_realized_mixing(lfr_fig3c):
    g, cover = lfr_fig3c
    comms = [set() for _ in range(g.n)]
    for ci, s in enumerate(cover.member_sets()):
        for v in s:
            comms[v].add(ci)
    ext = tot = 0
    for v in range(g.n):
        cs = comms[v]
        for w in g.neighbors(v):
            tot += 1
            if not cs & comms[int(w)]:
                ext += 1
    assert abs(ext / tot - 0.3) < 0.03


def test_lfr_community_sizes_within_bounds(lfr_fig3c):
    _, cover = lfr_fig3c
    sizes = [e.size() for e in cover.entries]
    assert min(sizes) >= 20 and max(sizes) <= 100


def test_lfr_degree_tail_slope(lfr_fig3c):
    g, _ = lfr_fig3c
    deg = g.degrees()
    ks = np.arange(32, 101)
    counts = np.array([(deg == k).sum() for k in ks], dtype=float)
    keep = counts > 0
    slope = np.polyfit(np.log(ks[keep]), np.log(counts[keep]), 1)[0]
    assert abs(-slope - 2.0) < 0.3


def test_lfr_mu_zero_blocks():
    params = LfrParams(n=2000, k_mean=15.0, k_max=40, mu=0.0, tau1=2.0, tau2=1.0,
                       c_min=42, c_max=90, overlap_fraction=0.0, seed=1)
    g, cover = gen_lfr(params)
    comms = [set() for _ in range(g.n)]
    for ci, s in enumerate(cover.member_sets()):
        for v in s:
            comms[v].add(ci)
    inter = sum(
        1
        for v in range(g.n)
        for w in g.neighbors(v)
        if not comms[v] & comms[int(w)]
    )
    assert inter / (2 * g.m) < 0.01


def test_lfr_determinism():
    g1, c1 = gen_lfr(FIG3C)
    g2, c2 = gen_lfr(FIG3C)
    assert g1.m == g2.m
    assert (g1.indptr == g2.indptr).all() and (g1.indices == g2.indices).all()
    assert [sorted(e.scores) for e in c1.entries] == [sorted(e.scores) for e in c2.entries]


def test_lfr_infeasible_params():
    with pytest.raises(InfeasibleParamsError):
        LfrParams(n=100, c_min=50, c_max=20).validate()
    with pytest.raises(InfeasibleParamsError, match="internal degree"):
        gen_lfr(LfrParams(n=1000, k_mean=30.0, k_max=90, mu=0.0, tau1=2.0,
                          tau2=1.0, c_min=20, c_max=40, overlap_fraction=0.0,
                          seed=1))


def test_lfr_validation():
    with pytest.raises(ValueError):
        LfrParams(n=100, mu=1.5).validate()
    with pytest.raises(ValueError):
        LfrParams(n=100, k_mean=200.0).validate()
    with pytest.raises(ValueError):
        LfrParams(n=100, memberships_per_overlapper=0).validate()
