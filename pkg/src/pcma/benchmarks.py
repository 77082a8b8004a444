"""Benchmark graph generators with planted overlapping ground truth.

Two families: a simple planted model (ER background plus randomly
sampled communities internally wired with probability p) whose knobs map
directly onto what makes strongly overlapping communities hard, and a
desk-scale construction of the standard LFR benchmark with overlapping
vertices.  All randomness is drawn from seed-sequence streams keyed by
(seed, stage), so generation is reproducible and stages are decoupled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graph import Graph
from .postprocess import Cover


class InfeasibleParamsError(ValueError):
    """Generator parameters that cannot be realized."""


GEN_STREAM = 0  # top-level stream tag separating generators from ego RNGs


def _rng(seed: int, stage: int) -> np.random.Generator:
    return np.random.default_rng([seed, GEN_STREAM, stage])


def _sample_distinct(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct ints from range(n), uniform, cheap for k << n."""
    if k > n:
        raise ValueError(f"cannot sample {k} distinct values from {n}")
    if k > n // 2:
        return rng.permutation(n)[:k].astype(np.int64)
    picked: set[int] = set()
    out = np.empty(k, dtype=np.int64)
    filled = 0
    while filled < k:
        for x in rng.integers(0, n, size=2 * (k - filled) + 8):
            if int(x) not in picked:
                picked.add(int(x))
                out[filled] = x
                filled += 1
                if filled == k:
                    break
    return out


@lru_cache(maxsize=512)
def _triu_pairs(s: int) -> tuple[np.ndarray, np.ndarray]:
    iu, iv = np.triu_indices(s, k=1)
    return iu.astype(np.int64), iv.astype(np.int64)


def _er_edges(n: int, k_mean: float, rng: np.random.Generator) -> np.ndarray:
    """Distinct edges of G(n, p) with p chosen to hit the mean degree."""
    if n < 2 or k_mean <= 0:
        return np.empty((0, 2), dtype=np.int64)
    p = min(1.0, k_mean / (n - 1))
    m = int(rng.binomial(n * (n - 1) // 2, p))
    keys: set[int] = set()
    out = np.empty((m, 2), dtype=np.int64)
    filled = 0
    while filled < m:
        us = rng.integers(0, n, size=m - filled + 16)
        vs = rng.integers(0, n, size=us.size)
        for a, b in zip(us, vs):
            if a == b:
                continue
            lo, hi = (a, b) if a < b else (b, a)
            key = int(lo) * n + int(hi)
            if key in keys:
                continue
            keys.add(key)
            out[filled, 0] = lo
            out[filled, 1] = hi
            filled += 1
            if filled == m:
                break
    return out


@dataclass(frozen=True)
class SimpleBenchmarkParams:
    """Planted-community benchmark knobs.

    c_mean is the expected number of communities a vertex belongs to, so
    round(n * c_mean / s_mean) communities are planted.
    """

    n: int
    k_mean: float = 3.0
    p: float = 0.3
    s_mean: float = 40.0
    c_mean: float = 2.0
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.k_mean < 0 or self.s_mean < 0 or self.c_mean < 0:
            raise ValueError("k_mean, s_mean, c_mean must be nonnegative")
        if self.c_mean > 0 and self.s_mean <= 0:
            raise ValueError("c_mean > 0 requires s_mean > 0")

    def community_count(self) -> int:
        if self.c_mean <= 0 or self.s_mean <= 0:
            return 0
        return int(round(self.n * self.c_mean / self.s_mean))


def gen_simple(params: SimpleBenchmarkParams) -> tuple[Graph, Cover]:
    """ER background, then planted communities wired with probability p.

    Community sizes are Poisson(s_mean) resampled into [1, n]; members
    are sampled without replacement; community edges are unioned with
    the background.  Vertices drawn into no community stay homeless.
    """
    params.validate()
    n = params.n
    bg = _er_edges(n, params.k_mean, _rng(params.seed, 0))
    rng = _rng(params.seed, 1)
    chunks = [bg]
    sets: list[np.ndarray] = []
    for _ in range(params.community_count()):
        s = int(rng.poisson(params.s_mean))
        while s < 1 or s > n:
            s = int(rng.poisson(params.s_mean))
        members = _sample_distinct(n, s, rng)
        sets.append(members)
        if s >= 2 and params.p > 0:
            iu, iv = _triu_pairs(s)
            mask = rng.random(iu.shape[0]) < params.p
            if mask.any():
                chunks.append(np.stack([members[iu[mask]], members[iv[mask]]], axis=1))
    edges = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 2), np.int64)
    g = Graph.from_edges(edges, n=n)
    cover = Cover.from_sets([set(int(v) for v in m) for m in sets], n=n)
    return g, cover


def applicability_score(s_mean: float, p: float) -> float:
    """Expected links from a member's neighbor to the member's other neighbors.

    Inside a planted community, a member has about (s_mean - 1) * p
    neighbors, and each of those connects to about ((s_mean - 1) * p - 1) * p
    of the rest.  Partial communities emerge, and detection is reliable,
    when this reaches about 2.
    """
    if s_mean < 1:
        raise ValueError("s_mean must be at least 1")
    return ((s_mean - 1.0) * p - 1.0) * p


@dataclass(frozen=True)
class LfrParams:
    """LFR-style benchmark: power-law degrees and community sizes.

    mu is the fraction of each vertex's edges that leave its own
    community (or communities); overlap_fraction of the vertices belong
    to memberships_per_overlapper communities, the rest to one.
    """

    n: int
    k_mean: float = 40.0
    k_max: int = 100
    mu: float = 0.3
    tau1: float = 2.0
    tau2: float = 1.0
    c_min: int = 20
    c_max: int = 100
    overlap_fraction: float = 0.5
    memberships_per_overlapper: int = 2
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must lie in [0, 1]")
        if self.c_min > self.c_max:
            raise InfeasibleParamsError("c_min exceeds c_max")
        if self.c_min < 2:
            raise ValueError("c_min must be at least 2")
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ValueError("tau exponents must be positive")
        if not 1 <= self.k_mean <= self.k_max:
            raise ValueError("k_mean must lie in [1, k_max]")
        if not 0.0 <= self.overlap_fraction <= 1.0:
            raise ValueError("overlap_fraction must lie in [0, 1]")
        if self.memberships_per_overlapper < 1:
            raise ValueError("memberships_per_overlapper must be positive")


def _powerlaw_dist(tau: float, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(lo, hi + 1, dtype=np.float64)
    w = ks ** (-tau)
    return ks.astype(np.int64), w / w.sum()


def _solve_k_min(k_mean: float, tau: float, k_max: int) -> int:
    """Smallest-error lower cutoff so the power-law mean matches k_mean."""
    best_lo, best_err = 1, math.inf
    for lo in range(1, k_max + 1):
        ks, w = _powerlaw_dist(tau, lo, k_max)
        mean = float((ks * w).sum())
        err = abs(mean - k_mean)
        if err < best_err:
            best_lo, best_err = lo, err
        if mean >= k_mean:
            break
    return best_lo


def _draw_sizes(total: int, c_min: int, c_max: int, tau2: float,
                rng: np.random.Generator) -> list[int]:
    """Community sizes from the power-law, trimmed to sum exactly to total."""
    ks, w = _powerlaw_dist(tau2, c_min, c_max)
    for _ in range(100):
        sizes: list[int] = []
        acc = 0
        while acc < total:
            s = int(rng.choice(ks, p=w))
            sizes.append(s)
            acc += s
        excess = acc - total
        for i in range(len(sizes) - 1, -1, -1):
            cut = min(sizes[i] - c_min, excess)
            sizes[i] -= cut
            excess -= cut
            if excess == 0:
                break
        if excess == 0:
            return sizes
    raise InfeasibleParamsError(
        f"cannot tile {total} memberships with community sizes in [{c_min}, {c_max}]"
    )


def _assign_memberships(sizes: list[int], memberships: np.ndarray,
                        demands: np.ndarray, rng: np.random.Generator) -> list[list[int]]:
    """Place each vertex into its number of communities.

    Capacity-weighted random placement, highest internal demand first; a
    vertex only fits a community strictly larger than its per-community
    internal degree.  Retries with fresh randomness before giving up.
    """
    n = memberships.shape[0]
    n_comm = len(sizes)
    sizes_arr = np.asarray(sizes, dtype=np.int64)
    order = np.lexsort((np.arange(n), -demands))
    for _ in range(50):
        caps = sizes_arr.copy()
        placed: list[list[int]] = [[] for _ in range(n)]
        ok = True
        for v in order:
            need = int(memberships[v])
            feas = np.flatnonzero((caps > 0) & (sizes_arr - 1 >= demands[v]))
            if feas.shape[0] < need:
                ok = False
                break
            wts = caps[feas].astype(np.float64)
            chosen = rng.choice(feas, size=need, replace=False, p=wts / wts.sum())
            for q in chosen:
                caps[q] -= 1
            placed[v] = sorted(int(q) for q in chosen)
        if ok:
            return placed
    raise InfeasibleParamsError(
        "could not host all memberships: internal degrees too large for the "
        f"community sizes in [{int(sizes_arr.min())}, {int(sizes_arr.max())}]"
    )


def _match_stubs(stub_owner: np.ndarray, valid, edge_keys: set[int], n: int,
                 rng: np.random.Generator, max_rounds: int = 60) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Pair stubs at random, rejecting pairs ``valid`` refuses.

    Stubs that stall on collisions are placed by degree-preserving edge
    swaps against already accepted edges, so only genuinely unplaceable
    stubs (infeasible residual sequences) are returned unmatched.
    """
    edges: list[tuple[int, int]] = []
    stubs = stub_owner.copy()
    for _ in range(max_rounds):
        if stubs.shape[0] < 2:
            break
        rng.shuffle(stubs)
        if stubs.shape[0] % 2:
            leftover = stubs[-1:]
            stubs = stubs[:-1]
        else:
            leftover = stubs[:0]
        rejected = [int(x) for x in leftover]
        progressed = False
        for a, b in zip(stubs[0::2], stubs[1::2]):
            a, b = int(a), int(b)
            if a == b or not valid(a, b):
                rejected.extend((a, b))
                continue
            lo, hi = (a, b) if a < b else (b, a)
            key = lo * n + hi
            if key in edge_keys:
                rejected.extend((a, b))
                continue
            edge_keys.add(key)
            edges.append((lo, hi))
            progressed = True
        stubs = np.asarray(rejected, dtype=np.int64)
        if not progressed:
            break

    def try_add(a: int, b: int) -> bool:
        if a == b or not valid(a, b):
            return False
        lo, hi = (a, b) if a < b else (b, a)
        key = lo * n + hi
        if key in edge_keys:
            return False
        edge_keys.add(key)
        edges.append((lo, hi))
        return True

    hard: list[int] = []
    stubs_list = [int(x) for x in stubs]
    while len(stubs_list) >= 2:
        a = stubs_list.pop()
        b = stubs_list.pop()
        if try_add(a, b):
            continue
        placed = False
        for _ in range(200):
            if not edges:
                break
            idx = int(rng.integers(0, len(edges)))
            x, y = edges[idx]
            # replace edge (x, y) by (a, x) and (b, y), keeping degrees
            lo, hi = (a, x) if a < x else (x, a)
            lo2, hi2 = (b, y) if b < y else (y, b)
            if a == x or b == y or lo * n + hi in edge_keys or lo2 * n + hi2 in edge_keys:
                x, y = y, x
                lo, hi = (a, x) if a < x else (x, a)
                lo2, hi2 = (b, y) if b < y else (y, b)
                if a == x or b == y or lo * n + hi in edge_keys or lo2 * n + hi2 in edge_keys:
                    continue
            if lo * n + hi == lo2 * n + hi2 or not valid(a, x) or not valid(b, y):
                continue
            xy_lo, xy_hi = (x, y) if x < y else (y, x)
            edge_keys.discard(xy_lo * n + xy_hi)
            edges[idx] = edges[-1]
            edges.pop()
            edge_keys.add(lo * n + hi)
            edge_keys.add(lo2 * n + hi2)
            edges.append((lo, hi))
            edges.append((lo2, hi2))
            placed = True
            break
        if not placed:
            hard.extend((a, b))
    hard.extend(stubs_list)
    return edges, np.asarray(hard, dtype=np.int64)


def gen_lfr(params: LfrParams) -> tuple[Graph, Cover]:
    """Generate an LFR-style graph and its planted cover.

    Degrees follow a truncated power-law with the lower cutoff solved to
    hit k_mean.  Each vertex splits round((1 - mu) * k) internal stubs
    evenly over its communities (capped at community size - 1, spill
    goes external); internal stubs are configuration-matched within each
    community, external stubs globally with same-community pairs
    rejected.  Unmatchable stubs are dropped, which the realized-value
    tolerances absorb.
    """
    params.validate()
    n = params.n
    om = params.memberships_per_overlapper
    worst_single = round((1.0 - params.mu) * params.k_max)
    worst = worst_single if params.overlap_fraction < 1.0 else math.ceil(worst_single / om)
    if worst > params.c_max - 1:
        raise InfeasibleParamsError(
            f"internal degree up to {worst} cannot fit inside communities of "
            f"size at most {params.c_max}"
        )

    k_lo = _solve_k_min(params.k_mean, params.tau1, params.k_max)
    ks, w = _powerlaw_dist(params.tau1, k_lo, params.k_max)
    degrees = _rng(params.seed, 0).choice(ks, size=n, p=w)

    rng_assign = _rng(params.seed, 2)
    n_overlap = int(round(n * params.overlap_fraction))
    overlappers = _sample_distinct(n, n_overlap, rng_assign)
    memberships = np.ones(n, dtype=np.int64)
    memberships[overlappers] = om

    internal = np.rint((1.0 - params.mu) * degrees).astype(np.int64)
    demands = np.ceil(internal / memberships).astype(np.int64)
    total_memberships = int(memberships.sum())
    sizes = _draw_sizes(total_memberships, params.c_min, params.c_max,
                        params.tau2, _rng(params.seed, 1))
    if len(sizes) < om:
        raise InfeasibleParamsError(
            f"{len(sizes)} communities cannot give overlapping vertices "
            f"{om} distinct memberships"
        )
    placed = _assign_memberships(sizes, memberships, demands, rng_assign)

    comm_members: list[list[int]] = [[] for _ in sizes]
    for v, qs in enumerate(placed):
        for q in qs:
            comm_members[q].append(v)

    # Internal stub allocation: split evenly, remainder to the first
    # communities in the vertex's membership list, capped by room.
    intra_stub: list[dict[int, int]] = [dict() for _ in sizes]
    external = degrees.astype(np.int64) - internal
    for v, qs in enumerate(placed):
        if not qs:
            external[v] = int(degrees[v])
            continue
        base, rem = divmod(int(internal[v]), len(qs))
        for idx, q in enumerate(qs):
            want = base + (1 if idx < rem else 0)
            room = len(comm_members[q]) - 1
            take = min(want, room)
            if take > 0:
                intra_stub[q][v] = take
            external[v] += want - take

    edge_keys: set[int] = set()
    all_edges: list[tuple[int, int]] = []
    rng_intra = _rng(params.seed, 3)
    for q, stub_counts in enumerate(intra_stub):
        if not stub_counts:
            continue
        owners = np.repeat(
            np.fromiter(stub_counts.keys(), dtype=np.int64, count=len(stub_counts)),
            np.fromiter(stub_counts.values(), dtype=np.int64, count=len(stub_counts)),
        )
        edges, leftover = _match_stubs(owners, lambda a, b: True, edge_keys, n, rng_intra)
        all_edges.extend(edges)
        for v in leftover:
            external[int(v)] += 1

    member_sets = [frozenset(qs) for qs in placed]

    def cross_community(a: int, b: int) -> bool:
        return member_sets[a].isdisjoint(member_sets[b])

    rng_ext = _rng(params.seed, 4)
    ext_owners = np.repeat(np.arange(n, dtype=np.int64), np.maximum(external, 0))
    edges, _ = _match_stubs(ext_owners, cross_community, edge_keys, n, rng_ext)
    all_edges.extend(edges)

    arr = np.asarray(all_edges, dtype=np.int64).reshape(-1, 2)
    g = Graph.from_edges(arr, n=n)
    cover = Cover.from_sets([set(ms) for ms in comm_members if ms], n=n)
    return g, cover
