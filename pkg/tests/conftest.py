import numpy as np
import pytest

from pcma.community import Community, merge, merge_all


def make_partials(rng, n_partials, universe=60, n_cores=4, noise=3):
    """Random partial communities with core structure so merges happen."""
    cores = [
        set(rng.choice(universe, size=int(rng.integers(8, 16)), replace=False).tolist())
        for _ in range(n_cores)
    ]
    parts = []
    for _ in range(n_partials):
        core = sorted(cores[int(rng.integers(0, n_cores))])
        take = max(3, int(rng.integers(4, len(core) + 1)))
        members = set(rng.choice(core, size=take, replace=False).tolist())
        members |= set(rng.choice(universe, size=int(rng.integers(0, noise + 1)),
                                  replace=False).tolist())
        parts.append(Community.from_members(members))
    return parts


def merged_community(rng, n_partials=None, universe=60):
    """A community merged from random partials, plus its constituents."""
    if n_partials is None:
        n_partials = int(rng.integers(1, 7))
    parts = make_partials(rng, n_partials, universe=universe, n_cores=2)
    return merge_all(parts), parts


def two_clique_center_graph(clique=10):
    """Center vertex 0 joined to two disjoint cliques of the given size."""
    edges = [(0, a) for a in range(1, 2 * clique + 1)]
    for block in (range(1, clique + 1), range(clique + 1, 2 * clique + 1)):
        bl = list(block)
        for i in range(len(bl)):
            for j in range(i + 1, len(bl)):
                edges.append((bl[i], bl[j]))
    import pcma
    return pcma.Graph.from_edges(np.array(edges, dtype=np.int64))


@pytest.fixture(scope="session")
def small_pipeline_run():
    """One small planted-benchmark detection shared across tests."""
    import pcma

    params = pcma.SimpleBenchmarkParams(n=2000, k_mean=3.0, p=0.3, s_mean=40.0,
                                        c_mean=2.0, seed=7)
    g, truth = pcma.gen_simple(params)
    th = pcma.Thresholds(min_similarity=0.1, min_merge_count=10, min_score=3,
                         min_score_ratio=0.1, min_pair_mass=0.0)
    res = pcma.detect(g, ego_cfg=pcma.EgoConfig(seed=7), thresholds=th)
    return params, g, truth, th, res
