"""Command-line front end: generate -> pilot -> select-target -> derive-weights -> solve -> report."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, config
from .gasolve import batch_solve, read_run_table, write_run_table, write_solutions
from .goalprog import METHODS, GoalSpec, derive_weight_vector
from .instance import CUSTOMER_COUNTS, DELTAS, TW_PROFILES, GeneratorSpec, InstanceError, generate_instance, \
    read_instance, write_instance
from .pilot import PRESETS, ApproximationSet, run_pilot, select_targets
from .solution import OBJECTIVES

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_RUN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _file_ref(path) -> dict:
    path = Path(path)
    return {"file": path.name, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}


def _read_approx(path) -> ApproximationSet:
    try:
        return ApproximationSet.read(path)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def _read_goal(path) -> GoalSpec:
    try:
        return GoalSpec.read(path)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def cmd_generate(args, cfg) -> int:
    try:
        spec = GeneratorSpec(n=args.n, tw_profile=args.tw, delta=args.delta, seed=args.seed, custom=args.custom)
    except InstanceError as exc:
        raise UsageError(f"{exc}; allowed grid: n in {CUSTOMER_COUNTS}, delta in {DELTAS}, "
                         f"tw in {sorted(TW_PROFILES)}") from None
    inst = generate_instance(spec)
    write_instance(inst, args.out)
    print(f"{inst.name}: n={inst.n} Q={inst.capacity:g} tw={args.tw} -> {args.out}")
    return EXIT_OK


def cmd_pilot(args, cfg) -> int:
    inst = read_instance(args.instance)
    budget = config.pilot_budget(cfg)
    result = run_pilot(inst, budget, config.pilot_evolution(cfg), args.seed,
                       config.pilot_decomposition(cfg), cfg["delay_ref"], args.jobs)
    out = Path(args.out)
    result.approximation.write(out)
    manifest = {"instance": _file_ref(args.instance), "config": cfg, **result.manifest}
    _dump(manifest, out / "manifest.json")
    print(f"pilot archive: {len(result.approximation)} entries -> {out}")
    return EXIT_OK


def _print_table(approx: ApproximationSet, rows=None) -> None:
    _, _, norm = analysis.objective_ranges(approx.objectives)
    head = ["index", *OBJECTIVES, *(f"n{z}" for z in OBJECTIVES)]
    print("\t".join(head))
    for i in range(len(approx)) if rows is None else rows:
        raw = [f"{v:g}" for v in approx.objectives[i]]
        print("\t".join([str(i), *raw, *(f"{v:.3f}" for v in norm[i])]))


def cmd_select_target(args, cfg) -> int:
    approx = _read_approx(args.archive)
    if args.index is not None:
        if not 0 <= args.index < len(approx):
            raise UsageError(f"--index {args.index} out of range for an archive of {len(approx)} entries")
        chosen = [args.index]
    else:
        try:
            chosen = select_targets(approx, args.random, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not args.quiet:
        _print_table(approx)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(approx) - 1)))
    for i in chosen:
        goal = GoalSpec(approx.objectives[i], args.method, epsilon=cfg["goal"]["epsilon"],
                        normalize=cfg["goal"]["normalize"], target_id=f"t{i:0{width}d}")
        doc = {**goal.to_dict(), "archive": _file_ref(Path(args.archive) / "archive.csv"
                                                      if Path(args.archive).is_dir() else args.archive),
               "archive_index": i, "config": cfg}
        _dump(doc, out / f"{goal.target_id}.json")
    print(f"wrote {len(chosen)} goal file(s) to {out}")
    return EXIT_OK


def cmd_derive_weights(args, cfg) -> int:
    approx = _read_approx(args.archive)
    doc = json.loads(Path(args.goal).read_text(encoding="utf-8"))
    goal = _read_goal(args.goal)
    if goal.method != "WV":
        raise UsageError(f"{args.goal}: derive-weights needs a WV goal, got {goal.method}")
    result = derive_weight_vector(approx.objectives, goal.target, config.weight_solver(cfg, args.seed))
    goal.weights = result.weights
    doc.update(goal.to_dict())
    doc["config"] = cfg
    out = Path(args.out) if args.out else Path(args.goal)
    _dump(doc, out)
    report = {**result.report(), "target": list(goal.target), "target_id": goal.target_id, "config": cfg}
    report_path = Path(args.report) if args.report else out.with_name(out.stem + ".weights.json")
    _dump(report, report_path)
    print(f"{goal.target_id or out.stem}: effectiveness {result.effectiveness:.4f} "
          f"({int(result.satisfied.sum())}/{result.k})")
    return EXIT_OK


def _goal_id(goal: GoalSpec, path) -> str:
    return goal.target_id or Path(path).stem


def cmd_solve(args, cfg) -> int:
    instances = [(Path(p).stem, read_instance(p)) for p in args.instance]
    goals = []
    for p in args.goal:
        goal = _read_goal(p)
        if args.method:
            goal.method = args.method
            goal.__post_init__()
        goals.append((_goal_id(goal, p), goal))
    reps = args.reps or cfg["ga"]["repetitions"]
    records = batch_solve(instances, goals, config.ga_evolution(cfg, args.seed), reps, cfg["delay_ref"],
                          args.jobs, cfg["timing"])
    out = Path(args.out)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    write_run_table(records, out / "runs.csv")
    write_solutions(records, out / "solutions.txt")
    for rec in records:
        r = rec.row
        name = f"{r['instance_id']}_{r['method']}_{r['target_id']}_{r['rep']}.csv"
        lines = ["generation,best"] + [f"{g},{v!r}" for g, v in enumerate(rec.trace)]
        (out / "traces" / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest = {
        "instances": {iid: _file_ref(p) for (iid, _), p in zip(instances, args.instance)},
        "goals": {gid: {**g.to_dict(), "file": Path(p).name} for (gid, g), p in zip(goals, args.goal)},
        "seed": args.seed, "repetitions": reps, "config": cfg,
    }
    _dump(manifest, out / "manifest.json")
    failed = [r.row for r in records if r.row["error"]]
    print(f"{len(records)} runs -> {out / 'runs.csv'}" + (f"; {len(failed)} failed" if failed else ""))
    for row in failed:
        print(f"  {row['instance_id']}/{row['method']}/{row['target_id']}/{row['rep']}: {row['error']}",
              file=sys.stderr)
    return EXIT_RUN if failed else EXIT_OK


def cmd_report(args, cfg) -> int:
    targets = {}
    for p in args.goal:
        goal = _read_goal(p)
        targets[_goal_id(goal, p)] = goal.target
    groups: dict[str, tuple[list, list]] = {}
    for path in args.runs:
        for row in read_run_table(path):
            if row["error"]:
                continue
            if row["target_id"] not in targets:
                raise ValueError(f"{path}: no goal file given for target {row['target_id']!r}")
            runs, zts = groups.setdefault(f"{row['instance_id']}/{row['method']}", ([], []))
            runs.append([row[z] for z in OBJECTIVES])
            zts.append(targets[row["target_id"]])
    if not groups:
        raise ValueError("run tables contain no successful runs")
    metrics = {key: analysis.report(np.asarray(runs), np.asarray(zts)) for key, (runs, zts) in sorted(groups.items())}
    doc = {"metrics": metrics, "definitions": analysis.METRIC_DEFINITIONS,
           "inputs": [_file_ref(p) for p in args.runs], "config": cfg}
    _dump(doc, args.out)
    for key, m in metrics.items():
        print(f"{key}: achievement {np.round(m['achievement'], 3).tolist()} gap {np.round(m['gap'], 3).tolist()}")
    return EXIT_OK


def cmd_analyze(args, cfg) -> int:
    approx = _read_approx(args.archive)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tau = analysis.pairwise_correlation_matrix(approx.objectives)
    analysis.write_correlation_csv(tau, out / "tau.csv")
    lo, hi, _ = analysis.objective_ranges(approx.objectives)
    analysis.export_scatter(approx.objectives, out / "scatter.csv", split=args.split)
    _dump({"min": lo.tolist(), "max": hi.tolist(), "objectives": list(OBJECTIVES), "k": len(approx),
           "config": cfg}, out / "ranges.json")
    print(f"tau matrix and scatter data for {len(approx)} entries -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file (see README for keys)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--delay-ref", choices=("window_start", "window_end"))
    common.add_argument("--no-timing", action="store_true", help="record wall_ms as 0 for byte-stable run tables")

    parser = _Parser(prog="goalvrp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="generate a synthetic instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tw", required=True, choices=sorted(TW_PROFILES))
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--custom", action="store_true", help="allow n and delta outside the standard grid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("pilot", parents=[common], help="build the approximation set for a pilot instance")
    p.add_argument("instance")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pilot)

    p = sub.add_parser("select-target", parents=[common], help="choose target vectors from an archive")
    p.add_argument("archive", help="pilot output directory or archive.csv")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--index", type=int)
    g.add_argument("--random", type=int, metavar="K")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default="CV")
    p.add_argument("--quiet", action="store_true", help="do not print the archive table")
    p.add_argument("--out", required=True, help="directory for goal files")
    p.set_defaults(func=cmd_select_target)

    p = sub.add_parser("derive-weights", parents=[common], help="derive a weight vector for a WV goal")
    p.add_argument("archive")
    p.add_argument("goal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="updated goal file (default: overwrite the input)")
    p.add_argument("--report", help="effectiveness report (default: <goal>.weights.json)")
    p.set_defaults(func=cmd_derive_weights)

    p = sub.add_parser("solve", parents=[common], help="goal-driven GA runs")
    p.add_argument("--instance", nargs="+", required=True)
    p.add_argument("--goal", nargs="+", required=True)
    p.add_argument("--method", choices=METHODS, help="override the goal files' method")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("report", parents=[common], help="achievement, gap and overall metrics")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--goal", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("analyze", parents=[common], help="Kendall tau matrix, ranges and scatter data")
    p.add_argument("archive")
    p.add_argument("--split", action="store_true", help="one CSV per objective pair")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze)
    return parser


def _resolve_config(args) -> dict:
    overrides: dict = {}
    if args.delay_ref:
        overrides["delay_ref"] = args.delay_ref
    if args.no_timing:
        overrides["timing"] = False
    if getattr(args, "preset", None):
        overrides["pilot"] = {"preset": args.preset}
    return config.load_config(args.config, overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"goalvrp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except config.ConfigError as exc:
        print(f"goalvrp: config error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        where = f"{exc.filename}: " if exc.filename else ""
        print(f"goalvrp {args.command}: {where}{exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except (InstanceError, ValueError) as exc:
        print(f"goalvrp {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
