"""End-to-end detection: per-ego partials, global merging, cleaning."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .community import Community
from .ego import EgoConfig, find_all_partials
from .graph import Graph
from .merger import run_merger
from .postprocess import Cover, Thresholds, postprocess


@dataclass
class DetectResult:
    cover: Cover
    partials: list[Community]
    merged_pool: list[Community]
    timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def detect(g: Graph, ego_cfg: EgoConfig | None = None,
           thresholds: Thresholds | None = None, workers: int = 1) -> DetectResult:
    """Run the three detection stages on a loaded graph.

    Deterministic given (ego_cfg.seed, thresholds), independent of the
    worker count.
    """
    ego_cfg = ego_cfg or EgoConfig()
    th = thresholds or Thresholds()
    th.validate()

    t0 = time.perf_counter()
    partials = find_all_partials(g, ego_cfg, workers=workers)
    t1 = time.perf_counter()
    pool = run_merger(partials, th.min_similarity, th.min_pair_mass)
    t2 = time.perf_counter()
    cover = postprocess(pool, th, g.n)
    t3 = time.perf_counter()

    warnings = []
    if not partials:
        warnings.append(
            f"no partial communities: no vertex passed min_degree={ego_cfg.min_degree} "
            f"and clustering_cap={ego_cfg.clustering_cap}"
        )
    return DetectResult(
        cover=cover,
        partials=partials,
        merged_pool=pool,
        timings={
            "partials": t1 - t0,
            "merge": t2 - t1,
            "postprocess": t3 - t2,
            "total": t3 - t0,
        },
        warnings=warnings,
    )
