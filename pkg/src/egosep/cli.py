"""Command-line batch runner.

Subcommands: synth (generate graphs), describe (ego features), pairwise
(AUC distance matrix with ordering, embedding, and importances), stats
(per-cohort statistics), regress (difference-design regression). Every run
writes a manifest with the effective config, library versions, and input
digests; outputs are written atomically and byte-identical across reruns
with the same manifest.

Exit codes: 0 success, 1 usage, 2 data error, 3 too many failed pairs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .cohorts import CohortStats, cohort_stats, write_stats_csv
from .ego import FEATURE_NAMES, featurize, sample_egos, write_features_csv
from .errors import DataError, PartialFailureError
from .forest import ForestParams
from .graph import Graph, load_graph, write_graph
from .inference import (
    auc_difference_design,
    fit_regression,
    read_covariates_csv,
    write_regress_json,
)
from .rng import derive_seed
from .separability import (
    hierarchical_order,
    mds_embed,
    pairwise_matrix,
    read_auc_matrix_csv,
    write_auc_matrix_csv,
    write_embedding_csv,
    write_order_txt,
)
from .synth import BlockPlan, SbmSpec, gen_college, gen_er, gen_sbm, gen_ws
from .textio import atomic_write_text, fmt_cell

log = logging.getLogger("egosep.cli")

_EPOCH = date(1970, 1, 1)

_CONFIG_FIELDS = ("seed", "samples", "folds", "trees", "cutoff", "workers", "out")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    samples: int = 250
    folds: int = 5
    trees: int = 100
    cutoff: Optional[int] = None
    workers: int = 1
    out: str = "."


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract reserves 2 for
    data errors, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _parse_cutoff(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return (date.fromisoformat(text) - _EPOCH).days
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad cutoff {text!r} (want integer days or ISO date)"
        ) from None


def _default_workers() -> int:
    env = os.environ.get("EGOSEP_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--samples", type=int, default=None,
                   help="ego samples per graph (default 250)")
    p.add_argument("--folds", type=int, default=None,
                   help="cross-validation folds (default 5)")
    p.add_argument("--trees", type=int, default=None,
                   help="trees per forest (default 100)")
    p.add_argument("--cutoff", type=_parse_cutoff, default=None,
                   help="edge-time snapshot cutoff (days or ISO date)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: EGOSEP_WORKERS or CPU count)")
    p.add_argument("--out", default=None, help="output directory (default .)")
    p.add_argument("--config", default=None,
                   help="JSON config file; CLI flags take precedence")
    p.add_argument("--graph", action="append", default=None, metavar="NODES,EDGES",
                   help="input graph as nodes.csv,edges.csv (repeatable)")
    p.add_argument("--graphs-dir", default=None,
                   help="directory of <id>_nodes.csv/<id>_edges.csv pairs")
    return p


def build_parser() -> _Parser:
    parser = _Parser(prog="egosep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()

    p = sub.add_parser("synth", parents=[common], help="generate synthetic graphs")
    p.add_argument("--spec", required=True, help="generator spec JSON file")

    p = sub.add_parser("describe", parents=[common],
                       help="sample egos and write features.csv")
    p.add_argument("--cohort-year", type=int, default=None,
                   help="restrict ego sampling to one cohort")

    p = sub.add_parser("pairwise", parents=[common],
                       help="pairwise AUC matrix, ordering, embedding")
    p.add_argument("--cohorts", choices=("school", "years"), default="school",
                   help="one matrix entry per school, or per (school, year)")

    sub.add_parser("stats", parents=[common], help="per-cohort statistics")

    p = sub.add_parser("regress", parents=[common],
                       help="difference-design regression on an AUC matrix")
    p.add_argument("--matrix", required=True, help="auc_matrix.csv path")
    p.add_argument("--covariates", required=True, help="covariates.csv path")
    p.add_argument("--standardize", action="store_true",
                   help="z-score non-intercept design columns")
    p.add_argument("--cluster-rule", choices=("first_school", "second_school"),
                   default="first_school")
    return parser


def _resolve_config(args, parser: _Parser) -> RunConfig:
    """CLI flag > config file > default."""
    values = {"workers": _default_workers()}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        unknown = set(loaded) - set(_CONFIG_FIELDS)
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        if isinstance(loaded.get("cutoff"), str):
            try:
                loaded["cutoff"] = _parse_cutoff(loaded["cutoff"])
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
        values.update(loaded)
    for name in _CONFIG_FIELDS:
        flagged = getattr(args, name, None)
        if flagged is not None:
            values[name] = flagged
    config = RunConfig(**{**asdict(RunConfig()), **values})
    for name in ("samples", "folds", "trees", "workers"):
        if getattr(config, name) < 1:
            parser.error(f"--{name} must be >= 1")
    if config.folds < 2:
        parser.error("--folds must be >= 2")
    return config


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, config: RunConfig,
                    inputs: list[Path], extra: Optional[dict] = None) -> None:
    payload = {
        "command": command,
        "config": asdict(config),
        "versions": {
            "egosep": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "inputs": {str(p): _sha256(p) for p in sorted(inputs)},
    }
    try:
        import numba

        payload["versions"]["numba"] = numba.__version__
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass
    if extra:
        payload.update(extra)
    atomic_write_text(
        out_dir / f"{command}_manifest.json",
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
    )


def _load_inputs(args, parser: _Parser) -> tuple[list[Graph], list[Path]]:
    """Collect graphs from --graph pairs and/or a --graphs-dir scan."""
    entries: list[tuple[Path, Path]] = []
    for item in args.graph or []:
        parts = item.split(",")
        if len(parts) != 2:
            parser.error(f"--graph wants NODES,EDGES, got {item!r}")
        entries.append((Path(parts[0]), Path(parts[1])))
    if args.graphs_dir is not None:
        root = Path(args.graphs_dir)
        if not root.is_dir():
            raise DataError(f"--graphs-dir {root} is not a directory")
        for nodes in sorted(root.glob("*_nodes.csv")):
            edges = nodes.with_name(nodes.name.replace("_nodes.csv", "_edges.csv"))
            if not edges.exists():
                raise DataError(f"missing edge file for {nodes}")
            entries.append((nodes, edges))
    if not entries:
        parser.error("no input graphs (use --graph or --graphs-dir)")
    graphs = [load_graph(edges, nodes) for nodes, edges in entries]
    paths = [p for pair in entries for p in pair]
    return graphs, paths


def _apply_cutoff(graphs: list[Graph], config: RunConfig) -> list[Graph]:
    if config.cutoff is None:
        return graphs
    return [g.snapshot(config.cutoff) for g in graphs]


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------- synth

def _plan_from_json(obj: dict) -> BlockPlan:
    def dist(pairs):
        if pairs is None:
            return None
        return tuple((str(k), float(p)) for k, p in pairs)

    return BlockPlan(
        cohort_year=obj.get("cohort_year"),
        gender_dist=dist(obj.get("gender_dist")),
        hometown_dist=dist(obj.get("hometown_dist")),
    )


def _generate(spec: dict, graph_id: str, seed: int) -> Graph:
    kind = spec.get("generator")
    try:
        if kind == "er":
            return gen_er(int(spec["n"]), float(spec["p"]), seed, graph_id=graph_id)
        if kind == "ws":
            return gen_ws(int(spec["n"]), int(spec["k"]), float(spec["beta"]),
                          seed, graph_id=graph_id)
        if kind == "college":
            kwargs = {}
            if "avg_degree" in spec:
                kwargs["avg_degree"] = float(spec["avg_degree"])
            if "hometown_count" in spec:
                kwargs["hometown_count"] = int(spec["hometown_count"])
            return gen_college(
                int(spec["n"]), int(spec["years"]), float(spec["year_mix"]),
                float(spec["gender_h"]), seed, graph_id=graph_id, **kwargs,
            )
        if kind == "sbm":
            return gen_sbm(
                SbmSpec(
                    block_sizes=tuple(int(s) for s in spec["block_sizes"]),
                    link_probs=tuple(
                        tuple(float(p) for p in row) for row in spec["link_probs"]
                    ),
                    attribute_plan=tuple(
                        _plan_from_json(b) for b in spec["attribute_plan"]
                    ),
                    seed=seed,
                    graph_id=graph_id,
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad generator spec: {exc}") from exc
    raise DataError(f"unknown generator {kind!r}")


def cmd_synth(args, config: RunConfig, parser: _Parser) -> int:
    spec_path = Path(args.spec)
    try:
        with open(spec_path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read spec {spec_path}: {exc}") from exc
    count = int(spec.get("count", 1))
    if count < 1:
        raise DataError("spec count must be >= 1")
    prefix = spec.get("id_prefix", spec.get("generator", "graph"))
    out = _out_dir(config)
    for i in range(count):
        gid = f"{prefix}{i:02d}"
        g = _generate(spec, gid, derive_seed(config.seed, "synth", i))
        write_graph(g, out / f"{gid}_edges.csv", out / f"{gid}_nodes.csv")
    _write_manifest(out, "synth", config, [spec_path],
                    extra={"graphs": count, "id_prefix": prefix})
    return 0


# -------------------------------------------------------------- describe

def cmd_describe(args, config: RunConfig, parser: _Parser) -> int:
    graphs, paths = _load_inputs(args, parser)
    graphs = _apply_cutoff(graphs, config)
    out = _out_dir(config)
    rows = []
    for g in graphs:
        egos = sample_egos(g, args.cohort_year, config.samples, config.seed)
        for idx, ego in enumerate(egos):
            rows.append((g.graph_id, idx, ego.ego_id, featurize(ego)))
    write_features_csv(out / "features.csv", rows)
    _write_manifest(out, "describe", config, paths,
                    extra={"cohort_year": args.cohort_year})
    return 0


# -------------------------------------------------------------- pairwise

def _importance_rows(m) -> list[tuple[str, str, np.ndarray]]:
    return [(a, b, m.pair_importance[(a, b)])
            for a, b in sorted(m.pair_importance)]


def _write_importances(out: Path, m) -> None:
    rows = _importance_rows(m)
    lines = ["graph_a,graph_b," + ",".join(FEATURE_NAMES)]
    for a, b, imp in rows:
        lines.append(f"{a},{b}," + ",".join(fmt_cell(float(v)) for v in imp))
    atomic_write_text(out / "importance.csv", "\n".join(lines) + "\n")

    summary = ["feature,q1,median,q3"]
    if rows:
        stacked = np.vstack([imp for _, _, imp in rows])
        q1, med, q3 = np.percentile(stacked, [25, 50, 75], axis=0)
        for f, name in enumerate(FEATURE_NAMES):
            summary.append(
                f"{name},{fmt_cell(float(q1[f]))},{fmt_cell(float(med[f]))},"
                f"{fmt_cell(float(q3[f]))}"
            )
    atomic_write_text(out / "importance_summary.csv", "\n".join(summary) + "\n")


def cmd_pairwise(args, config: RunConfig, parser: _Parser) -> int:
    graphs, paths = _load_inputs(args, parser)
    graphs = _apply_cutoff(graphs, config)
    if args.cohorts == "school":
        entries = [(g, None) for g in graphs]
    else:
        entries = [(g, y) for g in graphs for y in g.cohort_years_present()]
    if len(entries) < 2:
        raise DataError("pairwise needs at least 2 matrix entries")
    params = ForestParams(n_trees=config.trees, seed=config.seed)
    m = pairwise_matrix(entries, config.samples, params,
                        folds=config.folds, workers=config.workers)
    out = _out_dir(config)
    write_auc_matrix_csv(out / "auc_matrix.csv", m)
    write_order_txt(out / "order.txt", hierarchical_order(m))
    write_embedding_csv(out / "embedding.csv", m, mds_embed(m, dims=2))
    _write_importances(out, m)
    absent = [
        (m.ids[i], m.ids[j])
        for i in range(len(m.ids))
        for j in range(i + 1, len(m.ids))
        if np.isnan(m.values[i, j])
    ]
    if absent:
        atomic_write_text(
            out / "pairwise_errors.txt",
            "\n".join(f"{a}~{b}" for a, b in absent) + "\n",
        )
        log.warning("%d pair(s) absent; see pairwise_errors.txt", len(absent))
    _write_manifest(out, "pairwise", config, paths,
                    extra={"cohorts": args.cohorts, "entries": len(entries)})
    return 0


# ----------------------------------------------------------------- stats

def _failed_stats_row(g: Graph, year: int) -> CohortStats:
    return CohortStats(
        school_id=g.school_id, cohort_year=year,
        n_members=len(g.cohort_members(year)), log_avg_degree=None,
        gini_degree=None, avg_clustering=None, year_homophily=None,
        gender_h=None, hometown_h=None,
    )


def cmd_stats(args, config: RunConfig, parser: _Parser) -> int:
    graphs, paths = _load_inputs(args, parser)
    out = _out_dir(config)
    rows = []
    for g in graphs:
        for year in g.cohort_years_present():
            try:
                rows.append(cohort_stats(g, year, cutoff=config.cutoff))
            except Exception as exc:  # noqa: BLE001 - absent fields, not aborts
                log.warning("stats failed for %s cohort %s: %s",
                            g.school_id, year, exc)
                rows.append(_failed_stats_row(g, year))
    rows.sort(key=lambda r: (r.school_id, r.cohort_year))
    write_stats_csv(out / "stats.csv", rows)
    _write_manifest(out, "stats", config, paths, extra={"rows": len(rows)})
    return 0


# --------------------------------------------------------------- regress

def cmd_regress(args, config: RunConfig, parser: _Parser) -> int:
    matrix_path = Path(args.matrix)
    cov_path = Path(args.covariates)
    m = read_auc_matrix_csv(matrix_path)
    cov = read_covariates_csv(cov_path)
    design = auc_difference_design(m, cov, cluster_rule=args.cluster_rule)
    fit = fit_regression(design, standardize=args.standardize)
    if fit.dropped:
        log.warning("dropped all-zero design columns: %s", ", ".join(fit.dropped))
    out = _out_dir(config)
    write_regress_json(out / "regress.json", fit)
    _write_manifest(out, "regress", config, [matrix_path, cov_path],
                    extra={"standardize": args.standardize,
                           "cluster_rule": args.cluster_rule})
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "describe": cmd_describe,
    "pairwise": cmd_pairwise,
    "stats": cmd_stats,
    "regress": cmd_regress,
}


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _resolve_config(args, parser)
    try:
        return _COMMANDS[args.command](args, config, parser)
    except PartialFailureError as exc:
        sys.stderr.write(f"egosep: {exc}\n")
        return 3
    except DataError as exc:
        sys.stderr.write(f"egosep: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
