"""Scored member sets and the measures that drive merging decisions.

A community tracks, for every member, in how many of its constituent
partial communities the member occurred (the member's score).  Scores
let the similarity measures weight core members above peripheral or
misclassified ones, which is what makes merging robust to the noise of
the per-ego detection stage.
"""

from __future__ import annotations

from typing import Iterable


class Community:
    """A scored member set built from one or more partial communities.

    Attributes:
        scores: vertex id -> occurrence count across constituent partials;
            absence means zero.
        parts: number of partial communities merged into this one.
        weight: total score mass, sum(scores.values()).
        overlap_mass: sum_i S_i * (S_i - 1), i.e. twice the number of
            co-occurring constituent pairs summed over members; kept
            incrementally so pairwise-overlap cohesion is O(1) to read.
        origin: ego center that produced the partial; None once merged.
    """

    __slots__ = ("scores", "parts", "weight", "overlap_mass", "origin")

    def __init__(self, scores: dict[int, int], parts: int = 1,
                 weight: int | None = None, overlap_mass: int = 0,
                 origin: int | None = None):
        self.scores = scores
        self.parts = parts
        self.weight = sum(scores.values()) if weight is None else weight
        self.overlap_mass = overlap_mass
        self.origin = origin

    @classmethod
    def from_members(cls, members: Iterable[int], origin: int | None = None) -> "Community":
        """A fresh partial community: unit scores, one part."""
        scores = dict.fromkeys(members, 1)
        return cls(scores, parts=1, weight=len(scores), overlap_mass=0, origin=origin)

    def size(self) -> int:
        return len(self.scores)

    def members(self) -> list[int]:
        return sorted(self.scores)

    def canonical(self) -> tuple:
        """Order-free identity used to compare merger outputs in tests."""
        return self.parts, tuple(sorted(self.scores.items()))

    def __repr__(self) -> str:
        return f"Community(size={len(self.scores)}, parts={self.parts}, weight={self.weight})"


def shared_mass(a: Community, b: Community) -> int:
    """Sum over common members of the product of their two scores."""
    if len(b.scores) < len(a.scores):
        a, b = b, a
    bs = b.scores
    return sum(s * bs.get(v, 0) for v, s in a.scores.items())


def merge(a: Community, b: Community) -> Community:
    """Member-wise score sum; parts and weight add.

    The overlap mass gains twice the shared mass of the pair, which is
    exactly the cross term a from-scratch pairwise-overlap evaluation
    over all constituent partials would contribute.
    """
    cross = 2 * shared_mass(a, b)
    if len(a.scores) < len(b.scores):
        a, b = b, a
    scores = dict(a.scores)
    for v, s in b.scores.items():
        scores[v] = scores.get(v, 0) + s
    return Community(
        scores,
        parts=a.parts + b.parts,
        weight=a.weight + b.weight,
        overlap_mass=a.overlap_mass + b.overlap_mass + cross,
        origin=None,
    )


def overlap(a: Community, b: Community) -> float:
    """Directed overlap of a toward b.

    Large values mean a's core members are also central in b; not
    symmetric.  On two unit-score partials this reduces to the fraction
    of a's members that are also members of b.
    """
    return shared_mass(a, b) / (b.parts * a.weight)


def similarity(a: Community, b: Community, min_pair_mass: float = 0.0) -> float:
    """Symmetric merge similarity: weighted average of the two overlaps.

    With min_pair_mass > 0, pairs whose shared mass per part (relative
    to the larger side) falls below it score 0: small communities can
    otherwise clear the merge threshold on a handful of common members.
    """
    d = shared_mass(a, b)
    if min_pair_mass > 0.0 and d / max(a.parts, b.parts) < min_pair_mass:
        return 0.0
    return 2.0 * d / (a.weight * b.parts + b.weight * a.parts)


def cohesion(c: Community) -> float:
    """Average pairwise overlap among a community's constituent partials.

    Estimates the fraction of the other members that a typical member is
    connected to; 1.0 for an unmerged partial.  Only meaningful on
    communities as produced by merging (score edits invalidate it).
    """
    if c.parts <= 1:
        return 1.0
    if c.weight == 0:
        return 0.0
    return c.overlap_mass / (c.weight * (c.parts - 1))


def merge_all(parts: Iterable[Community]) -> Community:
    """Fold a collection of communities into one."""
    it = iter(parts)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("nothing to merge") from None
    for c in it:
        acc = merge(acc, c)
    return acc
