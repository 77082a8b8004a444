"""Cover scoring and community statistics.

The scorer is the normalized mutual information extended to overlapping
covers: communities are compared as binary membership indicators over
the vertex universe, each community is matched to its most informative
counterpart (mismatched comparisons are discarded), and the normalized
conditional entropies of both directions are averaged.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .postprocess import Cover


def _h(p: float) -> float:
    return -p * math.log(p) if p > 0.0 else 0.0


def _norm_conditional(xs: list[frozenset[int]], ys: list[frozenset[int]], n: int) -> float:
    """Mean over xs of H(X|Y) / H(X) with best-match Y communities."""
    index: dict[int, list[int]] = {}
    for j, s in enumerate(ys):
        for v in s:
            index.setdefault(v, []).append(j)
    hy = []
    for s in ys:
        py = len(s) / n
        hy.append(_h(py) + _h(1.0 - py))
    total = 0.0
    counted = 0
    for s in xs:
        px = len(s) / n
        hx = _h(px) + _h(1.0 - px)
        if hx <= 0.0:
            # an all- or no-vertex indicator carries no information
            continue
        best = hx
        counts: dict[int, int] = {}
        for v in s:
            for j in index.get(v, ()):
                counts[j] = counts.get(j, 0) + 1
        for j, c11 in counts.items():
            py = len(ys[j]) / n
            p11 = c11 / n
            p10 = px - p11
            p01 = py - p11
            p00 = 1.0 - p11 - p10 - p01
            # reject negatively-associated matches (e.g. complements)
            if _h(p11) + _h(p00) < _h(p10) + _h(p01):
                continue
            joint = _h(p11) + _h(p10) + _h(p01) + _h(p00)
            cond = joint - hy[j]
            if cond < best:
                best = cond
        total += min(max(best, 0.0), hx) / hx
        counted += 1
    return total / counted if counted else 0.0


def overlap_nmi(x: Cover, y: Cover, n: int | None = None) -> float:
    """Extended NMI between two overlapping covers; 1 iff identical.

    Defined as 0 when either cover is empty.  Symmetric, and always in
    [0, 1].
    """
    if n is None:
        if x.n != y.n:
            raise ValueError(f"covers disagree on universe size: {x.n} vs {y.n}")
        n = x.n
    if n < 1:
        raise ValueError("universe size must be positive")
    xs = x.member_sets()
    ys = y.member_sets()
    if not xs or not ys:
        return 0.0
    value = 1.0 - 0.5 * (_norm_conditional(xs, ys, n) + _norm_conditional(ys, xs, n))
    return min(max(value, 0.0), 1.0)


@dataclass
class CommunityRow:
    index: int
    size: int
    parts: int
    cohesion: float
    internal_endpoints: int
    external_edges: int


@dataclass
class CommunityStats:
    communities: list[CommunityRow]
    membership_counts: np.ndarray
    histogram: list[tuple[int, float, float]]

    def community_table(self):
        yield "community\tsize\tl\tg\tinternal_endpoints\texternal_edges"
        for r in self.communities:
            yield (f"{r.index}\t{r.size}\t{r.parts}\t{r.cohesion:.6f}\t"
                   f"{r.internal_endpoints}\t{r.external_edges}")

    def vertex_table(self):
        yield "vertex\tmemberships"
        for v, c in enumerate(self.membership_counts.tolist()):
            yield f"{v}\t{c}"

    def histogram_table(self):
        yield "size\tg_bin\trescaled_count"
        for size, g_lo, val in self.histogram:
            yield f"{size}\t{g_lo:.2f}\t{val:.6f}"


def community_stats(g: Graph, cover: Cover, g_bin_width: float = 0.05) -> CommunityStats:
    """Per-community size/merge/cohesion/edge counts, per-vertex membership
    counts, and a (size, cohesion-bin) histogram rescaled per size column.

    Internal connectivity is reported as endpoint count (each internal
    edge counted twice); external as the number of edges leaving the
    community.
    """
    for e in cover.entries:
        if e.scores and (min(e.scores) < 0 or max(e.scores) >= g.n):
            raise ValueError("cover refers to vertices outside the graph")
    mask = np.zeros(g.n, dtype=bool)
    rows: list[CommunityRow] = []
    for idx, e in enumerate(cover.entries):
        members = np.fromiter(e.scores.keys(), dtype=np.int64, count=len(e.scores))
        mask[members] = True
        internal = 0
        total_deg = 0
        for v in members:
            nb = g.neighbors(int(v))
            total_deg += nb.shape[0]
            internal += int(mask[nb].sum())
        mask[members] = False
        rows.append(CommunityRow(
            index=idx,
            size=len(e.scores),
            parts=e.parts,
            cohesion=e.cohesion,
            internal_endpoints=internal,
            external_edges=total_deg - internal,
        ))
    counts = np.zeros(g.n, dtype=np.int64)
    for e in cover.entries:
        for v in e.scores:
            counts[v] += 1

    n_bins = int(math.ceil(1.0 / g_bin_width))
    cells: dict[tuple[int, int], int] = {}
    for r in rows:
        b = min(int(r.cohesion / g_bin_width), n_bins - 1)
        cells[(r.size, b)] = cells.get((r.size, b), 0) + 1
    col_max: dict[int, int] = {}
    for (size, _), c in cells.items():
        col_max[size] = max(col_max.get(size, 0), c)
    histogram = sorted(
        (size, b * g_bin_width, c / col_max[size])
        for (size, b), c in cells.items()
    )
    return CommunityStats(communities=rows, membership_counts=counts, histogram=histogram)


@dataclass
class TimingRow:
    n: int
    seconds: float
    stage_seconds: dict[str, float]
    communities: int


@dataclass
class TimingResult:
    rows: list[TimingRow]
    slope: float

    def table(self):
        yield "n\tseconds\tpartials_s\tmerge_s\tpostprocess_s\tcommunities"
        for r in self.rows:
            yield (f"{r.n}\t{r.seconds:.3f}\t{r.stage_seconds['partials']:.3f}\t"
                   f"{r.stage_seconds['merge']:.3f}\t{r.stage_seconds['postprocess']:.3f}\t"
                   f"{r.communities}")


def timing_harness(sizes, template, thresholds=None, ego_cfg=None,
                   workers: int = 1, seed: int = 0) -> TimingResult:
    """End-to-end wall time per size on freshly generated benchmarks.

    Needs at least 3 sizes spanning a decade so the fitted log-log slope
    means something.  The benchmark template is reused with n swapped
    in; detection runs with the given worker count.
    """
    from dataclasses import replace

    from .benchmarks import SimpleBenchmarkParams, gen_simple
    from .pipeline import detect

    sizes = sorted(int(s) for s in sizes)
    if len(sizes) < 3:
        raise ValueError("need at least 3 sizes to fit a slope")
    if sizes[0] <= 0 or sizes[-1] / sizes[0] < 10:
        raise ValueError("sizes must span at least one decade")
    if not isinstance(template, SimpleBenchmarkParams):
        raise TypeError("timing template must be SimpleBenchmarkParams")
    rows: list[TimingRow] = []
    for i, n in enumerate(sizes):
        params = replace(template, n=n, seed=seed + i)
        g, _ = gen_simple(params)
        t0 = time.perf_counter()
        res = detect(g, ego_cfg=ego_cfg, thresholds=thresholds, workers=workers)
        dt = time.perf_counter() - t0
        rows.append(TimingRow(n=n, seconds=dt, stage_seconds=res.timings,
                              communities=len(res.cover)))
    slope = float(np.polyfit(np.log([r.n for r in rows]),
                             np.log([max(r.seconds, 1e-9) for r in rows]), 1)[0])
    return TimingResult(rows=rows, slope=slope)
