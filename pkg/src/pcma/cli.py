"""Command-line front end: detect, generate, score, stats, bench-time.

Settings resolve in precedence order: explicit flags > config file
(flat key=value lines) > preset > built-in defaults.  Every command
writes a manifest next to its main output so a run can be reproduced
from the files alone; seeds are mandatory wherever randomness is
involved.

Exit codes: 0 success, 2 input or configuration error, 3 infeasible
generation parameters.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from pathlib import Path

from .benchmarks import (
    InfeasibleParamsError,
    LfrParams,
    SimpleBenchmarkParams,
    applicability_score,
    gen_lfr,
    gen_simple,
)
from .ego import EgoConfig, write_partials
from .graph import GraphFormatError, read_edge_list, write_edge_list
from .merger import write_pool
from .metrics import community_stats, overlap_nmi, timing_harness
from .pipeline import detect
from .postprocess import Thresholds, read_cover, write_cover

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3

# key -> (python type, built-in default); None defaults mean "must be given"
SETTING_TYPES = {
    "n": (int, None),
    "k_mean": (float, 3.0),
    "p": (float, 0.3),
    "s_mean": (float, 40.0),
    "c_mean": (float, 2.0),
    "k_max": (int, 100),
    "mu": (float, 0.3),
    "tau1": (float, 2.0),
    "tau2": (float, 1.0),
    "c_min": (int, 20),
    "c_max": (int, 100),
    "overlap_fraction": (float, 0.5),
    "memberships": (int, 2),
    "t_fs": (float, 0.1),
    "t_l": (int, 10),
    "t_s": (int, 4),
    "t_sl": (float, 0.1),
    "t_f0": (float, 4.0),
    "min_size": (int, 3),
    "min_degree": (int, 20),
    "clustering_cap": (float, 0.95),
    "belong_threshold": (float, 0.20),
    "intra_overlap": (float, 0.30),
    "em_restarts": (int, 3),
    "seed": (int, None),
    "workers": (int, 1),
}

_FIG_THRESHOLDS = {"t_fs": 0.1, "t_l": 10, "t_s": 3, "t_sl": 0.1, "t_f0": 0.0}

PRESETS = {
    "fig2": {
        "kind": "simple", "n": 100_000, "k_mean": 3.0, "p": 0.3,
        "s_mean": 40.0, "c_mean": 2.0, **_FIG_THRESHOLDS,
    },
    "fig3ab": {
        "kind": "simple", "n": 10_000, "k_mean": 20.0, "p": 0.3,
        "s_mean": 40.0, "c_mean": 3.0, **_FIG_THRESHOLDS,
    },
    "fig3c": {
        "kind": "lfr", "n": 10_000, "k_mean": 40.0, "k_max": 100, "mu": 0.3,
        "tau1": 2.0, "tau2": 1.0, "c_min": 20, "c_max": 100,
        "overlap_fraction": 0.5, "memberships": 2, **_FIG_THRESHOLDS,
    },
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise CliError(f"{path}: line {lineno}: expected key=value")
        key = key.strip().replace("-", "_")
        if key not in SETTING_TYPES and key != "kind":
            raise CliError(f"{path}: line {lineno}: unknown setting {key!r}")
        out[key] = val.strip()
    return out


def _resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults, preset, config file, and explicit flags."""
    settings = {k: d for k, (_, d) in SETTING_TYPES.items()}
    settings["kind"] = getattr(args, "kind", None)
    preset = getattr(args, "preset", None)
    if preset:
        settings.update(PRESETS[preset])
    config = getattr(args, "config", None)
    if config:
        for key, raw in _read_config_file(config).items():
            if key == "kind":
                settings["kind"] = raw
                continue
            typ, _ = SETTING_TYPES[key]
            try:
                settings[key] = typ(float(raw)) if typ is int else typ(raw)
            except ValueError:
                raise CliError(f"config value {key}={raw!r} is not a {typ.__name__}") from None
    for key in SETTING_TYPES:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    if getattr(args, "kind", None) is not None:
        settings["kind"] = args.kind
    return settings


def _require(settings: dict, *keys: str) -> None:
    for key in keys:
        if settings.get(key) is None:
            raise CliError(f"--{key.replace('_', '-')} is required (no silent defaults)")


def _thresholds(settings: dict) -> Thresholds:
    return Thresholds(
        min_similarity=settings["t_fs"],
        min_merge_count=settings["t_l"],
        min_score=settings["t_s"],
        min_score_ratio=settings["t_sl"],
        min_pair_mass=settings["t_f0"],
        min_size=settings["min_size"],
    )


def _ego_config(settings: dict) -> EgoConfig:
    return EgoConfig(
        min_degree=settings["min_degree"],
        clustering_cap=settings["clustering_cap"],
        belong_threshold=settings["belong_threshold"],
        intra_overlap=settings["intra_overlap"],
        em_restarts=settings["em_restarts"],
        seed=settings["seed"],
    )


def _write_manifest(path: Path, entries: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for key in sorted(entries):
            f.write(f"{key}={entries[key]}\n")


def _summary(label: str, values) -> str:
    values = list(values)
    if not values:
        return f"{label}: none"
    return (f"{label}: min={min(values):.4g} median={statistics.median(values):.4g} "
            f"mean={statistics.fmean(values):.4g} max={max(values):.4g}")


def cmd_detect(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    _require(settings, "seed")
    try:
        g, stats = read_edge_list(args.graph)
    except (OSError, GraphFormatError) as exc:
        raise CliError(f"cannot load graph: {exc}") from exc
    try:
        th = _thresholds(settings)
        th.validate()
        ego_cfg = _ego_config(settings)
        ego_cfg.validate()
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}") from exc

    result = detect(g, ego_cfg=ego_cfg, thresholds=th, workers=settings["workers"])
    out = Path(args.out)
    write_cover(out, result.cover, annotated=args.annotate)
    manifest = {k: settings[k] for k in SETTING_TYPES if k not in
                ("n", "k_mean", "p", "s_mean", "c_mean", "k_max", "mu", "tau1",
                 "tau2", "c_min", "c_max", "overlap_fraction", "memberships")}
    manifest.update({"command": "detect", "graph": args.graph, "out": str(out),
                     "annotate": args.annotate})
    _write_manifest(out.with_name(out.name + ".manifest"), manifest)
    if args.dump_partials:
        write_partials(args.dump_partials, result.partials)
    if args.dump_merged:
        write_pool(args.dump_merged, result.merged_pool)

    cover = result.cover
    lines = [
        f"graph: n={g.n} m={g.m} (dropped {stats.duplicates} duplicate, "
        f"{stats.self_loops} self-loop lines)",
        f"partial communities: {len(result.partials)}",
        f"merged pool: {len(result.merged_pool)}",
        f"final communities: {len(cover)}",
        _summary("size", (e.size() for e in cover.entries)),
        _summary("l", (e.parts for e in cover.entries)),
        _summary("g", (e.cohesion for e in cover.entries)),
        "stage seconds: " + " ".join(f"{k}={v:.3f}" for k, v in result.timings.items()),
    ]
    lines += [f"warning: {w}" for w in result.warnings]
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    with open(out.with_name(out.name + ".report"), "w", encoding="utf-8") as f:
        f.write(report)
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    _require(settings, "seed", "n")
    kind = settings.get("kind")
    if kind not in ("simple", "lfr"):
        raise CliError("generator kind must be 'simple' or 'lfr'")
    try:
        if kind == "simple":
            params = SimpleBenchmarkParams(
                n=settings["n"], k_mean=settings["k_mean"], p=settings["p"],
                s_mean=settings["s_mean"], c_mean=settings["c_mean"],
                seed=settings["seed"],
            )
            params.validate()
            g, cover = gen_simple(params)
        else:
            params = LfrParams(
                n=settings["n"], k_mean=settings["k_mean"], k_max=settings["k_max"],
                mu=settings["mu"], tau1=settings["tau1"], tau2=settings["tau2"],
                c_min=settings["c_min"], c_max=settings["c_max"],
                overlap_fraction=settings["overlap_fraction"],
                memberships_per_overlapper=settings["memberships"],
                seed=settings["seed"],
            )
            params.validate()
            g, cover = gen_lfr(params)
    except InfeasibleParamsError as exc:
        raise CliError(f"infeasible parameters: {exc}", code=EXIT_INFEASIBLE) from exc
    except ValueError as exc:
        raise CliError(f"invalid parameters: {exc}") from exc

    write_edge_list(args.out_graph, g)
    write_cover(args.out_cover, cover)
    manifest = {"command": "generate", "kind": kind,
                "out_graph": args.out_graph, "out_cover": args.out_cover}
    for key, val in params.__dict__.items():
        manifest[key] = val
    if kind == "simple":
        manifest["applicability"] = f"{applicability_score(max(params.s_mean, 1.0), params.p):.4f}"
    _write_manifest(Path(args.out_graph).with_name(Path(args.out_graph).name + ".manifest"),
                    manifest)
    sys.stdout.write(f"generated {kind}: n={g.n} m={g.m} communities={len(cover)}\n")
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    try:
        truth = read_cover(args.truth)
        detected = read_cover(args.detected)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read cover: {exc}") from exc
    n = args.n if args.n is not None else max(truth.n, detected.n, 1)
    value = overlap_nmi(truth, detected, n=n)
    sys.stdout.write(f"truth_communities\t{len(truth)}\n")
    sys.stdout.write(f"detected_communities\t{len(detected)}\n")
    sys.stdout.write(f"nmi\t{value:.4f}\n")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    try:
        g, _ = read_edge_list(args.graph)
        cover = read_cover(args.cover, n=g.n)
        stats = community_stats(g, cover)
    except (OSError, ValueError, GraphFormatError) as exc:
        raise CliError(f"{exc}") from exc
    tables = {
        "communities": stats.community_table(),
        "vertices": stats.vertex_table(),
        "histogram": stats.histogram_table(),
    }
    if args.out:
        for name, lines in tables.items():
            with open(f"{args.out}.{name}.tsv", "w", encoding="utf-8") as f:
                for line in lines:
                    f.write(line + "\n")
        sys.stdout.write(f"wrote {args.out}.{{communities,vertices,histogram}}.tsv\n")
    else:
        for name, lines in tables.items():
            sys.stdout.write(f"# {name}\n")
            for line in lines:
                sys.stdout.write(line + "\n")
    return EXIT_OK


def cmd_bench_time(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    _require(settings, "seed")
    try:
        sizes = [int(float(tok)) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        raise CliError(f"cannot parse --sizes {args.sizes!r}") from None
    template = SimpleBenchmarkParams(
        n=max(sizes) if sizes else 1, k_mean=settings["k_mean"], p=settings["p"],
        s_mean=settings["s_mean"], c_mean=settings["c_mean"], seed=settings["seed"],
    )
    try:
        result = timing_harness(
            sizes, template, thresholds=_thresholds(settings),
            ego_cfg=_ego_config(settings), workers=settings["workers"],
            seed=settings["seed"],
        )
    except (ValueError, TypeError) as exc:
        raise CliError(f"{exc}") from exc
    for line in result.table():
        sys.stdout.write(line + "\n")
    sys.stdout.write(f"slope\t{result.slope:.3f}\n")
    return EXIT_OK


def _add_threshold_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-fs", dest="t_fs", type=float, help="merge similarity threshold")
    p.add_argument("--t-l", dest="t_l", type=int, help="minimum merge count per community")
    p.add_argument("--t-s", dest="t_s", type=int, help="minimum member occurrence score")
    p.add_argument("--t-sl", dest="t_sl", type=float, help="minimum score/merge-count ratio")
    p.add_argument("--t-f0", dest="t_f0", type=float, help="shared-mass merge suppression")
    p.add_argument("--min-size", dest="min_size", type=int, help="minimum final community size")


def _add_ego_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-degree", dest="min_degree", type=int)
    p.add_argument("--clustering-cap", dest="clustering_cap", type=float)
    p.add_argument("--belong-threshold", dest="belong_threshold", type=float)
    p.add_argument("--intra-overlap", dest="intra_overlap", type=float)
    p.add_argument("--em-restarts", dest="em_restarts", type=int)


def _add_generator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int)
    p.add_argument("--k-mean", dest="k_mean", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--s-mean", dest="s_mean", type=float)
    p.add_argument("--c-mean", dest="c_mean", type=float)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--tau1", type=float)
    p.add_argument("--tau2", type=float)
    p.add_argument("--c-min", dest="c_min", type=int)
    p.add_argument("--c-max", dest="c_max", type=int)
    p.add_argument("--overlap-fraction", dest="overlap_fraction", type=float)
    p.add_argument("--memberships", type=int)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--config", help="flat key=value settings file")
    p.add_argument("--preset", choices=sorted(PRESETS))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcma",
        description="Detect significantly overlapping communities by merging "
                    "per-ego partial communities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the full detection pipeline")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--out", required=True, help="cover output file")
    p.add_argument("--annotate", action="store_true",
                   help="write member scores and community metadata")
    p.add_argument("--dump-partials", dest="dump_partials")
    p.add_argument("--dump-merged", dest="dump_merged")
    _add_threshold_flags(p)
    _add_ego_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("generate", help="write a benchmark graph and ground truth")
    p.add_argument("kind", nargs="?", choices=["simple", "lfr"])
    p.add_argument("--out-graph", dest="out_graph", required=True)
    p.add_argument("--out-cover", dest="out_cover", required=True)
    _add_generator_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("score", help="extended NMI between two covers")
    p.add_argument("--truth", required=True)
    p.add_argument("--detected", required=True)
    p.add_argument("--n", type=int, help="vertex universe size")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", help="community statistics tables")
    p.add_argument("--graph", required=True)
    p.add_argument("--cover", required=True)
    p.add_argument("--out", help="output file prefix (default: stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench-time", help="wall time vs size, with fitted slope")
    p.add_argument("--sizes", required=True, help="comma-separated sizes")
    _add_generator_flags(p)
    _add_threshold_flags(p)
    _add_ego_flags(p)
    _add_common_flags(p)
    p.set_defaults(func=cmd_bench_time)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
