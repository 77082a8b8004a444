"""Per-ego community fitting and partial-community extraction.

Each qualifying vertex contributes the communities visible in its own
ego network.  The fit is an overlapping-group Poisson edge model solved
by EM; fuzzy group coefficients are thresholded into member sets, the
center is always a member of its own partials, and heavily overlapping
partials from the same ego are unioned before anything leaves the ego.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from ._kernels import ego_local_edges, poisson_mixture_em
from .community import Community
from .graph import EgoNetwork, Graph

EGO_STREAM = 1  # seed-sequence stream tag for per-vertex RNGs


@dataclass(frozen=True)
class EgoConfig:
    """Settings for the partials stage.

    Vertices below min_degree have too little local structure to reveal
    communities; vertices above clustering_cap are near-clique egos
    (promotional/spam-like hubs) that produce one giant useless partial.
    """

    min_degree: int = 20
    clustering_cap: float = 0.95
    belong_threshold: float = 0.20
    intra_overlap: float = 0.30
    seed: int = 0
    max_iter: int = 200
    rel_tol: float = 1e-6
    em_restarts: int = 3

    def validate(self) -> None:
        if not 0.0 < self.belong_threshold < 1.0:
            raise ValueError("belong_threshold must lie in (0, 1)")
        if not 0.0 < self.intra_overlap < 1.0:
            raise ValueError("intra_overlap must lie in (0, 1)")
        if self.min_degree < 1:
            raise ValueError("min_degree must be positive")
        if not 0.0 < self.clustering_cap <= 1.0:
            raise ValueError("clustering_cap must lie in (0, 1]")
        if self.em_restarts < 1:
            raise ValueError("em_restarts must be positive")


def estimate_k(ego_size: int) -> int:
    """Number of groups to request for an ego network of the given size.

    One per 30 vertices, clamped to [5, 20]; deliberately generous since
    surplus groups stay near-empty and true groups split across columns
    are reunited by the intra-ego merge.
    """
    if ego_size < 1:
        raise ValueError("ego_size must be positive")
    return min(20, max(5, math.ceil(ego_size / 30)))


@dataclass
class BelongingFit:
    """Row-stochastic belonging coefficients plus the EM objective trace."""

    coefficients: np.ndarray
    log_likelihood: np.ndarray


def fit_belonging(ego: EgoNetwork, k: int,
                  seed: int | np.random.Generator = 0,
                  max_iter: int = 200, rel_tol: float = 1e-6,
                  restarts: int = 1) -> BelongingFit:
    """Fit k overlapping groups to an ego network.

    Deterministic for a fixed seed; the objective trace is nondecreasing
    up to float rounding.  With restarts > 1 the fit keeps the run with
    the best final objective, which escapes local optima where two
    groups share a column.  Raises on an edgeless ego (callers filter by
    degree first).
    """
    if k < 1:
        raise ValueError("k must be positive")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    if ego.edges_u.shape[0] == 0:
        raise ValueError("ego network has no edges")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    nl = ego.n_local
    best = None
    for _ in range(restarts):
        theta = rng.random((nl, k))
        trace, mass = poisson_mixture_em(
            ego.edges_u, ego.edges_v, nl, k, theta, max_iter, rel_tol
        )
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], trace, mass)
    _, trace, mass = best
    deg = ego.local_degrees().astype(np.float64)
    coeff = mass / np.maximum(deg, 1.0)[:, None]
    return BelongingFit(coefficients=coeff, log_likelihood=trace)


def extract_partials(ego: EgoNetwork, coefficients: np.ndarray,
                     belong_threshold: float = 0.20) -> list[Community]:
    """Threshold fuzzy coefficients into partial communities.

    A vertex joins group z iff its coefficient strictly exceeds the
    threshold; the center joins every nonempty group regardless; groups
    with fewer than 3 members (center included) are dropped as unusable
    downstream.
    """
    out: list[Community] = []
    verts = ego.vertices
    for z in range(coefficients.shape[1]):
        picked = verts[coefficients[:, z] > belong_threshold]
        if picked.shape[0] == 0:
            continue
        members = {int(v) for v in picked}
        members.add(ego.center)
        if len(members) >= 3:
            out.append(Community.from_members(members, origin=ego.center))
    return out


def merge_intra_ego(partials: list[Community],
                    overlap_threshold: float = 0.30) -> list[Community]:
    """Union partials of one ego that overlap in more than the given share.

    A pair qualifies when the intersection exceeds the threshold share
    of either side.  Qualifying pairs are unioned by connected
    component, and the rounds repeat until no pair qualifies, so the
    result does not depend on scan order.
    """
    if not partials:
        return []
    origin = partials[0].origin
    sets = [set(c.scores) for c in partials]
    while True:
        k = len(sets)
        parent = list(range(k))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        changed = False
        for i in range(k):
            for j in range(i + 1, k):
                inter = len(sets[i] & sets[j])
                if inter == 0:
                    continue
                if inter > overlap_threshold * len(sets[i]) or \
                        inter > overlap_threshold * len(sets[j]):
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[rj] = ri
                        changed = True
        if not changed:
            break
        groups: dict[int, set[int]] = {}
        for i in range(k):
            groups.setdefault(find(i), set()).update(sets[i])
        sets = list(groups.values())
    sets.sort(key=lambda s: (-len(s), min(s)))
    return [Community.from_members(s, origin=origin) for s in sets]


def _vertex_partials(g: Graph, v: int, cfg: EgoConfig,
                     scratch: np.ndarray) -> list[tuple[int, ...]]:
    """Member tuples of v's partials, or [] when v does not qualify."""
    d = g.degree(v)
    if d < cfg.min_degree:
        return []
    eu, ev = ego_local_edges(g.indptr, g.indices, v, scratch)
    among = eu.shape[0] - d
    if 2.0 * among / (d * (d - 1)) > cfg.clustering_cap:
        return []
    nl = d + 1
    k = estimate_k(nl)
    rng = np.random.default_rng([cfg.seed, EGO_STREAM, v])
    best = None
    for _ in range(cfg.em_restarts):
        theta = rng.random((nl, k))
        trace, mass = poisson_mixture_em(eu, ev, nl, k, theta, cfg.max_iter, cfg.rel_tol)
        if best is None or trace[-1] > best[0]:
            best = (trace[-1], mass)
    deg_local = np.bincount(np.concatenate([eu, ev]), minlength=nl).astype(np.float64)
    coeff = best[1] / np.maximum(deg_local, 1.0)[:, None]
    verts = np.concatenate([[v], g.neighbors(v)]).astype(np.int64)
    ego = EgoNetwork(center=v, vertices=verts, edges_u=eu, edges_v=ev)
    partials = extract_partials(ego, coeff, cfg.belong_threshold)
    partials = merge_intra_ego(partials, cfg.intra_overlap)
    return [tuple(c.members()) for c in partials]


_WORK: tuple[Graph, EgoConfig] | None = None


def _chunk_worker(bounds: tuple[int, int]) -> list[tuple[int, list[tuple[int, ...]]]]:
    g, cfg = _WORK
    scratch = np.full(g.n, -1, dtype=np.int32)
    out = []
    for v in range(bounds[0], bounds[1]):
        tuples = _vertex_partials(g, v, cfg, scratch)
        if tuples:
            out.append((v, tuples))
    return out


def _warm_kernels() -> None:
    """Force JIT compilation before any worker forks."""
    indptr = np.array([0, 2, 3, 4], dtype=np.int64)
    indices = np.array([1, 2, 0, 0], dtype=np.int64)
    scratch = np.full(3, -1, dtype=np.int32)
    eu, ev = ego_local_edges(indptr, indices, 0, scratch)
    theta = np.full((3, 2), 0.5)
    poisson_mixture_em(eu, ev, 3, 2, theta, 2, 1e-6)


def find_all_partials(g: Graph, cfg: EgoConfig | None = None,
                      workers: int = 1) -> list[Community]:
    """Partial communities of every qualifying vertex, in vertex-id order.

    Per-vertex work only reads the shared graph and is seeded from
    (cfg.seed, vertex id), so results are identical for any worker
    count.
    """
    cfg = cfg or EgoConfig()
    cfg.validate()
    _warm_kernels()
    results: list[tuple[int, list[tuple[int, ...]]]] = []
    global _WORK
    _WORK = (g, cfg)
    try:
        if workers <= 1 or g.n < 4096:
            results = _chunk_worker((0, g.n))
        else:
            chunk = max(2048, g.n // (workers * 8))
            bounds = [(lo, min(lo + chunk, g.n)) for lo in range(0, g.n, chunk)]
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(workers) as pool:
                for part in pool.imap(_chunk_worker, bounds):
                    results.extend(part)
    finally:
        _WORK = None
    out: list[Community] = []
    for v, tuples in results:
        for members in tuples:
            out.append(Community.from_members(members, origin=v))
    return out


def partials_lines(partials: list[Community]):
    """Dump lines: origin, tab, space-separated members."""
    for c in partials:
        yield f"{c.origin}\t" + " ".join(map(str, c.members()))


def write_partials(path, partials: list[Community]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in partials_lines(partials):
            f.write(line + "\n")
