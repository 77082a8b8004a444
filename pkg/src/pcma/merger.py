"""Agglomerative merging of partial communities via mutual best candidates.

The classic approach keeps a global priority queue of pair similarities
and always merges the top pair, which costs O(P^2 log P).  Because the
symmetric similarity of a merged pair never exceeds the larger of the
two constituents' similarities to a third community, two communities
that pick each other as best candidates can be merged immediately, in
any order, without changing the final grouping.  ``run_merger`` walks
best-candidate chains until such a mutual pair appears and merges it if
it clears the threshold; candidate search never leaves the communities
sharing at least one member, found through a vertex -> community
incidence index, so total work stays proportional to the number of
partials for bounded community sizes.

``run_merger_naive`` is the quadratic priority-order oracle kept for
equivalence tests.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence

import numpy as np

from .community import Community, merge, similarity


class MergerState:
    """Live community pool, vertex incidence index, and the worklist.

    The incidence index maps each vertex to {community id: the vertex's
    score there}; communities are immutable once in the pool, so the
    cached scores stay valid until the community is merged away.

    Per community the state also caches its shared-mass map
    {candidate id: sum of score products over common members}.  Shared
    mass is additive under merging, so the map of a merger is the
    key-wise sum of its constituents' maps; ids that died in other
    merges are forwarded lazily to their merge product.  This keeps the
    candidate search proportional to the number of overlapping
    communities instead of members times incidence.
    """

    __slots__ = ("pool", "incidence", "pending", "next_id", "dots", "forward")

    def __init__(self, partials: Sequence[Community]):
        self.pool: dict[int, Community] = dict(enumerate(partials))
        self.incidence: dict[int, dict[int, int]] = {}
        for cid, c in self.pool.items():
            for v, s in c.scores.items():
                self.incidence.setdefault(v, {})[cid] = s
        self.pending: deque[int] = deque(self.pool)
        self.next_id = len(self.pool)
        self.dots: dict[int, dict[int, int]] = {}
        self.forward: dict[int, int] = {}

    def shared_masses(self, cid: int) -> dict[int, int]:
        """Repaired {other id: shared mass} map for a live community."""
        pool = self.pool
        dots = self.dots.get(cid)
        if dots is None:
            a = pool[cid]
            inc = self.incidence
            dots = {}
            dget = dots.get
            for v, s in a.scores.items():
                for oid, so in inc[v].items():
                    dots[oid] = dget(oid, 0) + s * so
            dots.pop(cid, None)
            self.dots[cid] = dots
            return dots
        dead = [k for k in dots if k not in pool]
        if dead:
            fwd = self.forward
            for k in dead:
                m = dots.pop(k)
                t = fwd[k]
                while t not in pool:
                    t = fwd[t]
                fwd[k] = t
                if t != cid:
                    dots[t] = dots.get(t, 0) + m
        return dots

    def apply_merge(self, i: int, j: int) -> int:
        """Replace communities i and j by their merger; returns its id."""
        di = dict(self.shared_masses(i))
        dj = self.shared_masses(j)
        a = self.pool.pop(i)
        b = self.pool.pop(j)
        inc = self.incidence
        for v in a.scores:
            del inc[v][i]
        for v in b.scores:
            del inc[v][j]
        c = merge(a, b)
        cid = self.next_id
        self.next_id += 1
        self.pool[cid] = c
        for v, s in c.scores.items():
            inc.setdefault(v, {})[cid] = s
        for k, m in dj.items():
            di[k] = di.get(k, 0) + m
        di.pop(i, None)
        di.pop(j, None)
        self.dots.pop(i, None)
        self.dots.pop(j, None)
        self.dots[cid] = di
        self.forward[i] = cid
        self.forward[j] = cid
        return cid


def best_merger_candidate(state: MergerState, cid: int,
                          min_pair_mass: float = 0.0) -> int | None:
    """The community most similar to ``cid``, or None if all scores are 0.

    Only communities sharing at least one member can have nonzero
    similarity, so candidates come from the cached shared-mass map.
    Ties break toward the smallest id, which both fixes determinism and
    keeps best-candidate chains acyclic.
    """
    pool = state.pool
    a = pool[cid]
    best = None
    best_f = 0.0
    a_w = a.weight
    a_p = a.parts
    for oid, d in state.shared_masses(cid).items():
        b = pool[oid]
        if min_pair_mass > 0.0 and d / max(a_p, b.parts) < min_pair_mass:
            continue
        f = 2.0 * d / (a_w * b.parts + b.weight * a_p)
        if f > best_f or (f == best_f and best is not None and oid < best):
            best_f = f
            best = oid
    return best


def run_merger(partials: Sequence[Community], min_similarity: float = 0.1,
               min_pair_mass: float = 0.0) -> list[Community]:
    """Merge until no pair of live communities clears min_similarity.

    Dispatches to the compiled array engine; the grouping and all
    community state match run_merger_reference exactly.  Surviving input
    communities are returned as the original objects (keeping their
    origins); merged products carry no origin.
    """
    if not 0.0 < min_similarity < 1.0:
        raise ValueError("min_similarity must lie in (0, 1)")
    if not partials:
        return []
    from ._merge_engine import merge_pool_arrays

    p = len(partials)
    offsets = np.zeros(p + 1, np.int64)
    for i, c in enumerate(partials):
        offsets[i + 1] = offsets[i] + len(c.scores)
    mem0 = np.empty(offsets[-1], np.int64)
    sc0 = np.empty(offsets[-1], np.int64)
    for i, c in enumerate(partials):
        members = sorted(c.scores)
        lo = offsets[i]
        for k, v in enumerate(members):
            mem0[lo + k] = v
            sc0[lo + k] = c.scores[v]
    rows = merge_pool_arrays(
        mem0, sc0, offsets,
        np.array([c.parts for c in partials], np.int64),
        np.array([c.weight for c in partials], np.int64),
        np.array([c.overlap_mass for c in partials], np.int64),
        float(min_similarity), float(min_pair_mass),
    )
    out = []
    for cid, members, scores, parts, weight, om in rows:
        if cid < p:
            out.append(partials[cid])
        else:
            out.append(Community(
                dict(zip(members.tolist(), scores.tolist())),
                parts=parts, weight=weight, overlap_mass=om, origin=None,
            ))
    return out


def run_merger_reference(partials: Sequence[Community], min_similarity: float = 0.1,
                         min_pair_mass: float = 0.0) -> list[Community]:
    """Pure-Python merger with the same worklist discipline as run_merger.

    Every popped community either triggers a merge somewhere along its
    best-candidate chain, or is proven to have no partner above the
    threshold and is dropped.  After a merge the product is enqueued,
    and the popped community is re-enqueued if it survived; every other
    community's pairwise similarities are untouched by the merge, so no
    further re-examination is needed.
    """
    if not 0.0 < min_similarity < 1.0:
        raise ValueError("min_similarity must lie in (0, 1)")
    state = MergerState(partials)
    pool = state.pool
    pending = state.pending
    while pending:
        u = pending.popleft()
        if u not in pool:
            continue
        b = best_merger_candidate(state, u, min_pair_mass)
        if b is None:
            continue
        a = u
        for _ in range(4 * len(pool) + 8):
            nxt = best_merger_candidate(state, b, min_pair_mass)
            if nxt == a:
                break
            a, b = b, nxt
        else:
            raise RuntimeError("best-candidate chain failed to settle")
        if similarity(pool[a], pool[b], min_pair_mass) > min_similarity:
            cid = state.apply_merge(a, b)
            pending.append(cid)
            if u in pool:
                pending.append(u)
    return [pool[cid] for cid in sorted(pool)]


def run_merger_naive(partials: Sequence[Community], min_similarity: float = 0.1,
                     min_pair_mass: float = 0.0) -> list[Community]:
    """Priority-order oracle: repeatedly merge the most similar live pair.

    Quadratic per round; test-only.  Ties resolve toward the smallest id
    pair so the grouping matches run_merger's tie-breaking.
    """
    pool: dict[int, Community] = dict(enumerate(partials))
    next_id = len(pool)
    while len(pool) > 1:
        best_pair = None
        best_f = 0.0
        ids = sorted(pool)
        for pos, i in enumerate(ids):
            a = pool[i]
            for j in ids[pos + 1:]:
                f = similarity(a, pool[j], min_pair_mass)
                if f > best_f:
                    best_f = f
                    best_pair = (i, j)
        if best_pair is None or best_f <= min_similarity:
            break
        i, j = best_pair
        pool[next_id] = merge(pool.pop(i), pool.pop(j))
        next_id += 1
    return [pool[cid] for cid in sorted(pool)]


def pool_lines(pool: Sequence[Community]):
    """Dump lines for a merged pool, one community per line."""
    from .community import cohesion

    for c in pool:
        members = " ".join(f"{v}:{c.scores[v]}" for v in sorted(c.scores))
        yield f"l={c.parts} w={c.weight} g={cohesion(c):.6f} members: {members}"


def write_pool(path, pool: Sequence[Community]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in pool_lines(pool):
            f.write(line + "\n")
