"""Detection of significantly overlapping communities in large networks.

Pipeline: fit overlapping groups inside every qualifying vertex's ego
network, merge the resulting partial communities with a scored
similarity measure, then clean members and communities with occurrence
thresholds.  Ships with planted benchmark generators, an extended NMI
scorer for overlapping covers, and a timing harness.
"""

from .benchmarks import (
    InfeasibleParamsError,
    LfrParams,
    SimpleBenchmarkParams,
    applicability_score,
    gen_lfr,
    gen_simple,
)
from .community import Community, cohesion, merge, merge_all, overlap, shared_mass, similarity
from .ego import (
    BelongingFit,
    EgoConfig,
    estimate_k,
    extract_partials,
    find_all_partials,
    fit_belonging,
    merge_intra_ego,
)
from .graph import (
    EdgeListStats,
    EgoNetwork,
    Graph,
    GraphFormatError,
    compact_ids,
    ego_network,
    load_edge_list,
    local_clustering,
    read_edge_list,
    write_edge_list,
)
from .merger import MergerState, best_merger_candidate, run_merger, run_merger_naive
from .metrics import CommunityStats, community_stats, overlap_nmi, timing_harness
from .pipeline import DetectResult, detect
from .postprocess import (
    Cover,
    CoverEntry,
    Thresholds,
    filter_communities,
    postprocess,
    prune_members,
    read_cover,
    write_cover,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
