"""Command-line interface: ``neuroevo run | report | eval``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, kernels, seeding
from .archive import ArchiveError, read_archive, write_archive
from .config import ExperimentConfig, load_config
from .errors import ConfigError, InputError, NeuroevoError
from .experiment import run_campaign
from .lake import LakeMap, evaluate_members
from .stats import ALGORITHMS, CURVE_FIELDS, compare_algorithms, median_curve

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="neuroevo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a seeded campaign and write a results archive")
    run.add_argument("--config", type=Path, help="INI config file; flags below override it")
    run.add_argument("--algorithm", choices=ALGORITHMS)
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--runs", type=int)
    run.add_argument("--generations", type=int, help="generation budget per run")
    run.add_argument("--population", type=int)
    run.add_argument("--elite-frac", type=float)
    run.add_argument("--msm-steps", type=int)
    run.add_argument("--zeta", type=float)
    run.add_argument("--density", type=float)
    run.add_argument("--map", type=Path, help="lake map text file (rows of S/F/H/G)")
    run.add_argument("--out", type=Path, help="archive directory (default: $NEUROEVO_OUT)")
    run.add_argument("--jobs", type=int, default=1, help="worker processes; results do not depend on it")
    run.add_argument("--backend", choices=sorted(kernels.BACKENDS), help="rollout kernel")
    run.add_argument("--quiet", action="store_true")

    rep = sub.add_parser("report", help="median curves and significance tests across archives")
    rep.add_argument("archives", nargs="+", help="archive directories, optionally tagged as TAG=PATH")
    rep.add_argument("--baseline", help="tag of the reference archive (default: 'baseline' if present)")
    rep.add_argument("--compare", nargs="*", help="tags compared against the baseline (default: all others)")
    rep.add_argument("--at-generation", type=int, help="generation index compared (default: last)")
    rep.add_argument("--alpha", type=float, default=0.01)
    rep.add_argument("--threshold", type=float, default=78.0, help="top score counted as a solve")
    rep.add_argument("--out", type=Path, required=True, help="directory for report files")

    ev = sub.add_parser("eval", help="re-evaluate stored champions on fresh episodes")
    ev.add_argument("archive", type=Path)
    ev.add_argument("--which", choices=["champion"], default="champion")
    ev.add_argument("--run", type=int, help="run index (default: every run)")
    ev.add_argument("--episodes", type=int, default=100)
    ev.add_argument("--seed", type=int, default=0, help="seed for the fresh episodes")
    ev.add_argument("--json", action="store_true", help="print a JSON record instead of a table")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    ga_changes = {k: v for k, v in (("max_generations", args.generations),
                                    ("population_size", args.population),
                                    ("elite_fraction", args.elite_frac)) if v is not None}
    changes = {}
    if ga_changes:
        changes["ga"] = dataclasses.replace(config.ga, **ga_changes)
    if args.msm_steps is not None:
        changes["msm"] = dataclasses.replace(config.msm, extra_steps=args.msm_steps)
    dir_changes = {k: v for k, v in (("zeta", args.zeta), ("density", args.density)) if v is not None}
    if dir_changes:
        changes["directed"] = dataclasses.replace(config.directed, **dir_changes)
    if args.map is not None:
        changes["lake_rows"] = LakeMap.load(args.map).rows
    for key, value in (("algorithm", args.algorithm), ("master_seed", args.seed), ("runs", args.runs)):
        if value is not None:
            changes[key] = value
    return dataclasses.replace(config, **changes)


def cmd_run(args) -> int:
    out = args.out or (Path(os.environ["NEUROEVO_OUT"]) if os.environ.get("NEUROEVO_OUT") else None)
    if out is None:
        raise UsageFailure("no output directory: pass --out or set NEUROEVO_OUT")
    if args.jobs < 1:
        raise UsageFailure("--jobs must be at least 1")
    try:
        config = _config_from_args(args)
    except (OSError, InputError) as exc:
        raise UsageFailure(str(exc)) from None
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageFailure(f"output directory {out} is not writable: {exc}") from None

    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    results = run_campaign(config, jobs=args.jobs, backend=args.backend)
    elapsed = time.perf_counter() - t0
    stamps = {"started": started.isoformat(), "elapsed_seconds": round(elapsed, 3), "jobs": args.jobs,
              "backend": args.backend or kernels.DEFAULT_BACKEND}
    write_archive(out, config, results, stamps)
    if not args.quiet:
        threshold = config.ga.solve_threshold * config.ga.episodes_per_eval
        for i, res in enumerate(results):
            first = next((log.generation for log in res.logs if log.top_score >= threshold), None)
            print(f"run {i:3d}: {len(res.logs):4d} generations, first top >= {threshold:g} at "
                  f"{'-' if first is None else first}, final top {res.logs[-1].top_score:g}")
        print(f"wrote {out} ({elapsed:.1f}s)")
    return EXIT_OK


def _parse_tagged(items) -> dict:
    archives = {}
    for item in items:
        tag, sep, path = item.partition("=")
        if not sep:
            path, tag = item, None
        archive = read_archive(path)
        tag = tag or archive.algorithm
        if tag in archives:
            raise UsageFailure(f"duplicate tag {tag!r}; use TAG=PATH to disambiguate")
        archives[tag] = archive
    return archives


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    return buf.getvalue()


def cmd_report(args) -> int:
    archives = _parse_tagged(args.archives)
    runsets = {tag: a.runset(tag) for tag, a in archives.items()}
    horizons = {rs.horizon for rs in runsets.values()}
    if len(horizons) != 1:
        raise UsageFailure(f"archives have different generation horizons {sorted(horizons)}")
    horizon = horizons.pop()
    baseline = args.baseline or ("baseline" if "baseline" in runsets else None)
    if baseline is not None and baseline not in runsets:
        raise UsageFailure(f"baseline tag {baseline!r} not among {sorted(runsets)}")
    if args.compare is not None:
        compare = args.compare
    else:
        compare = [t for t in runsets if t != baseline] if baseline else []
    if compare and baseline is None:
        raise UsageFailure("comparisons need --baseline")
    for tag in compare:
        if tag not in runsets:
            raise UsageFailure(f"unknown comparison tag {tag!r}")

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    tags = list(runsets)
    for field in CURVE_FIELDS:
        curves = [median_curve(runsets[t], field) for t in tags]
        rows = [[g, *(float(c[g]) for c in curves)] for g in range(horizon)]
        (out / f"median_{field}.csv").write_text(_csv_text(["generation", *(f"{t}_median" for t in tags)], rows))

    solve_rows, record = [], {"horizon": horizon, "threshold": args.threshold, "first_solve": {}, "comparisons": []}
    for tag in tags:
        firsts = runsets[tag].first_solve_generations(args.threshold)
        med = float(np.median(firsts))
        record["first_solve"][tag] = {"per_run": [None if math.isinf(f) else int(f) for f in firsts],
                                      "median": None if math.isinf(med) else med,
                                      "unsolved": int(sum(math.isinf(f) for f in firsts))}
        solve_rows.append([tag, *["" if math.isinf(f) else int(f) for f in firsts]])
    width = max(len(r) for r in solve_rows) - 1
    (out / "first_solve.csv").write_text(_csv_text(["tag", *(f"run_{i}" for i in range(width))], solve_rows))

    texts = []
    for tag in compare:
        for field in CURVE_FIELDS:
            rep = compare_algorithms(runsets[tag], runsets[baseline], field, args.at_generation, args.alpha)
            record["comparisons"].append(rep.to_dict())
            texts.append(rep.to_text())
    (out / "significance.txt").write_text("\n\n".join(texts) + ("\n" if texts else ""))
    (out / "report.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    for tag in tags:
        fs = record["first_solve"][tag]
        print(f"{tag}: median first solve {fs['median']}, unsolved {fs['unsolved']}/{len(fs['per_run'])}")
    for text in texts:
        print(text)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.episodes < 1:
        raise UsageFailure("--episodes must be at least 1")
    archive = read_archive(args.archive)
    config = archive.config
    runs = [args.run] if args.run is not None else list(range(config.runs))
    lake = config.lake()
    threshold = config.ga.solve_threshold
    records = []
    for run in runs:
        if not 0 <= run < config.runs:
            raise UsageFailure(f"run {run} outside 0..{config.runs - 1}")
        weights, _ = archive.champion(run)
        rng = seeding.stream(args.seed, run, 0, 0, seeding.CHAMPION_EVAL)
        score = float(evaluate_members(weights[None], config.network, lake, [rng], args.episodes,
                                       config.ga.step_cap)[0])
        mean = score / args.episodes
        records.append({"run": run, "episodes": args.episodes, "total_reward": score,
                        "mean_score": mean, "solved": mean >= threshold})
    if args.json:
        print(json.dumps(records, indent=2))
    else:
        for r in records:
            verdict = "solved" if r["solved"] else "unsolved"
            print(f"run {r['run']:3d}: mean {r['mean_score']:.4f} over {r['episodes']} episodes -> {verdict} "
                  f"(bar {threshold:g})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "report": cmd_report, "eval": cmd_eval}[args.command]
    try:
        return handler(args)
    except (UsageFailure, ConfigError) as exc:
        print(f"neuroevo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArchiveError, NeuroevoError, OSError) as exc:
        print(f"neuroevo: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
