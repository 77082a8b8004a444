"""Cleaning of merged communities and the final cover representation.

Raw merger output carries two kinds of noise: sets of vertices that were
merged only a couple of times by coincidence, and members that were
misclassified into a few constituent partials.  Cleaning removes members
that occur too rarely (absolutely, and relative to the merge count) and
then discards communities merged too few times or left too small.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .community import Community, cohesion


@dataclass(frozen=True)
class Thresholds:
    """Merger and cleaning thresholds.

    min_score_ratio demands that a member occurred in more than that
    share of a community's constituent partials, i.e. that it is
    connected to at least that fraction of the other members.  The
    per-community variant replaces the uniform ratio by
    ratio_scale * cohesion(c).
    """

    min_similarity: float = 0.1
    min_merge_count: int = 10
    min_score: int = 4
    min_score_ratio: float = 0.1
    min_pair_mass: float = 4.0
    min_size: int = 3
    per_community_ratio: bool = False
    ratio_scale: float = 0.5

    def validate(self) -> None:
        if not 0.0 < self.min_similarity < 1.0:
            raise ValueError("min_similarity must lie in (0, 1)")
        if self.min_score < 3:
            raise ValueError("min_score below 3 admits coincidental members")
        if self.min_merge_count < 0 or self.min_score_ratio < 0 or \
                self.min_pair_mass < 0 or self.min_size < 0 or self.ratio_scale < 0:
            raise ValueError("thresholds must be nonnegative")


def prune_members(c: Community, min_score: int, min_score_ratio: float) -> Community:
    """Drop members with score < min_score or score/parts <= min_score_ratio.

    parts is left untouched: it describes merger history, and the ratio
    criterion is only meaningful against the original merge count.
    """
    parts = c.parts
    kept = {v: s for v, s in c.scores.items()
            if s >= min_score and s / parts > min_score_ratio}
    return Community(kept, parts=parts, weight=sum(kept.values()),
                     overlap_mass=c.overlap_mass, origin=c.origin)


@dataclass
class CoverEntry:
    """One final community: member scores plus merger metadata."""

    scores: dict[int, int]
    parts: int = 1
    weight: int = 0
    cohesion: float = 1.0

    def members(self) -> list[int]:
        return sorted(self.scores)

    def size(self) -> int:
        return len(self.scores)


@dataclass
class Cover:
    """A set of possibly overlapping communities over vertices 0..n-1.

    Vertices may appear in any number of communities, including none.
    """

    entries: list[CoverEntry] = field(default_factory=list)
    n: int = 0

    @classmethod
    def from_sets(cls, sets, n: int) -> "Cover":
        entries = [
            CoverEntry(scores=dict.fromkeys(s, 1), parts=1, weight=len(s), cohesion=1.0)
            for s in sets if len(s) > 0
        ]
        return cls(entries=entries, n=n)

    def member_sets(self) -> list[frozenset[int]]:
        return [frozenset(e.scores) for e in self.entries]

    def membership_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for e in self.entries:
            for v in e.scores:
                counts[v] = counts.get(v, 0) + 1
        return counts

    def __len__(self) -> int:
        return len(self.entries)


def filter_communities(pool: Sequence[Community], n: int,
                       min_merge_count: int = 10, min_size: int = 3,
                       cohesions: Sequence[float] | None = None) -> Cover:
    """Keep communities with enough constituent partials and members.

    ``cohesions`` supplies pre-prune cohesion values when the pool has
    already been member-pruned; otherwise cohesion is read off the
    communities directly.  Output is sorted by size descending, ties by
    smallest member id.
    """
    if cohesions is None:
        cohesions = [cohesion(c) for c in pool]
    entries = [
        CoverEntry(scores=dict(c.scores), parts=c.parts, weight=c.weight, cohesion=g)
        for c, g in zip(pool, cohesions)
        if c.parts >= min_merge_count and len(c.scores) >= min_size
    ]
    entries.sort(key=lambda e: (-len(e.scores), min(e.scores), tuple(sorted(e.scores))))
    return Cover(entries=entries, n=n)


def postprocess(pool: Sequence[Community], thresholds: Thresholds, n: int) -> Cover:
    """Prune every community's members, then filter the communities."""
    th = thresholds
    th.validate()
    cohesions = [cohesion(c) for c in pool]
    pruned = []
    for c, g in zip(pool, cohesions):
        ratio = th.ratio_scale * g if th.per_community_ratio else th.min_score_ratio
        pruned.append(prune_members(c, th.min_score, ratio))
    return filter_communities(pruned, n, th.min_merge_count, th.min_size,
                              cohesions=cohesions)


def cover_lines(cover: Cover, annotated: bool = False):
    for e in cover.entries:
        members = sorted(e.scores)
        if annotated:
            toks = " ".join(f"{v}:{e.scores[v]}" for v in members)
            yield f"{toks} | l={e.parts} w={e.weight} g={e.cohesion:.6f}"
        else:
            yield " ".join(map(str, members))


def write_cover(path: str | Path, cover: Cover, annotated: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for line in cover_lines(cover, annotated):
            f.write(line + "\n")


def read_cover(path: str | Path, n: int | None = None) -> Cover:
    """Read either cover format; n defaults to the largest id plus one."""
    entries: list[CoverEntry] = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            meta = {}
            if "|" in line:
                line, _, metapart = line.partition("|")
                line = line.strip()
                for tok in metapart.split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
            scores: dict[int, int] = {}
            for tok in line.split():
                vid, _, sc = tok.partition(":")
                try:
                    v = int(vid)
                    s = int(sc) if sc else 1
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}: bad member token {tok!r}") from None
                scores[v] = s
            if not scores:
                raise ValueError(f"{path}: line {lineno}: empty community")
            max_id = max(max_id, max(scores))
            entries.append(CoverEntry(
                scores=scores,
                parts=int(meta.get("l", 1)),
                weight=int(meta.get("w", sum(scores.values()))),
                cohesion=float(meta.get("g", 1.0)),
            ))
    return Cover(entries=entries, n=n if n is not None else max_id + 1)
