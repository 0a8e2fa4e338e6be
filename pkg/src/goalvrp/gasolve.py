"""Single-objective GA driven by a goal scalarizer, plus batch execution."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .goalprog import GoalSpec
from .instance import Instance
from .moea import EvolutionConfig, _vary, random_population
from .solution import ObjectiveVector, Solution, decode, evaluate, evaluate_population

RUN_COLUMNS = ("instance_id", "method", "target_id", "rep", "seed", "Z1", "Z2", "Z3", "Z4", "Z5",
               "scalar", "evals", "wall_ms", "error")


@dataclass
class GAResult:
    solution: Solution
    objectives: ObjectiveVector
    scalar: float
    trace: list[float]
    genes: np.ndarray
    evaluations: int


def solve_goal(instance: Instance, goal: GoalSpec, cfg: EvolutionConfig, delay_ref: str = "window_start") -> GAResult:
    rng = np.random.default_rng(cfg.seed)
    n = instance.n
    size = cfg.population
    elite = min(size, math.ceil(cfg.elite_fraction * size))

    genes = random_population(rng, size, n, cfg.init)
    fit = np.asarray(goal.scalarize(evaluate_population(genes, instance, delay_ref)), dtype=float)
    evals = size
    trace = [float(fit.min())]

    while evals < cfg.budget and size > elite:
        order = np.argsort(fit, kind="stable")
        m = min(size - elite, cfg.budget - evals)
        entrants = rng.integers(0, size, size=(2, m, cfg.tournament_size))
        parents = [e[np.arange(m), np.argmin(fit[e], axis=1)] for e in entrants]
        children = _vary(genes[parents[0]], genes[parents[1]], cfg, n, rng)
        child_fit = np.asarray(goal.scalarize(evaluate_population(children, instance, delay_ref)), dtype=float)
        evals += m
        # survivors beyond the elite only when the budget cuts the last generation short
        carry = order[: elite + (size - elite - m)]
        genes = np.vstack([genes[carry], children])
        fit = np.concatenate([fit[carry], child_fit])
        trace.append(float(fit.min()))

    best = int(np.argmin(fit))
    solution = decode(genes[best], instance)
    z = evaluate(solution, instance, delay_ref)
    return GAResult(solution, z, float(goal.scalarize(z)), trace, genes[best].copy(), evals)


@dataclass
class RunRecord:
    row: dict
    solution_text: str
    trace: list[float]


def _run_one(task) -> RunRecord:
    instance_id, instance, target_id, goal, cfg, rep, delay_ref, timing = task
    row = {"instance_id": instance_id, "method": goal.method, "target_id": target_id, "rep": rep,
           "seed": cfg.seed, "error": ""}
    start = time.perf_counter()
    try:
        res = solve_goal(instance, goal, cfg, delay_ref)
    except Exception as exc:  # recorded per row, batch continues
        row.update({f"Z{i}": "" for i in range(1, 6)}, scalar="", evals=0, wall_ms=0,
                   error=f"{type(exc).__name__}: {exc}")
        return RunRecord(row, "", [])
    wall = int(round((time.perf_counter() - start) * 1000)) if timing else 0
    row.update({f"Z{i}": v for i, v in enumerate(res.objectives, start=1)})
    row.update(scalar=res.scalar, evals=res.evaluations, wall_ms=wall)
    return RunRecord(row, res.solution.to_text(), res.trace)


def run_seed(base_seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([base_seed, *key]).generate_state(1, dtype=np.uint32)[0])


def batch_solve(instances, goals, cfg: EvolutionConfig, repetitions: int, delay_ref: str = "window_start",
                jobs: int = 1, timing: bool = True) -> list[RunRecord]:
    """Every (instance, goal, repetition) combination with its own derived seed.

    ``instances`` and ``goals`` are sequences of ``(id, Instance)`` and ``(id, GoalSpec)``.
    """
    instances = list(instances)
    goals = list(goals)
    if not instances:
        raise ValueError("no instances given")
    if not goals:
        raise ValueError("no goals given")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    tasks = []
    for a, (iid, inst) in enumerate(instances):
        for b, (tid, goal) in enumerate(goals):
            for rep in range(repetitions):
                run_cfg = EvolutionConfig(**{**cfg.__dict__, "seed": run_seed(cfg.seed, a, b, rep)})
                tasks.append((iid, inst, tid, goal, run_cfg, rep, delay_ref, timing))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)
    return str(v)


def write_run_table(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUN_COLUMNS)
        for rec in records:
            row = rec.row if isinstance(rec, RunRecord) else rec
            writer.writerow([_fmt(row.get(c, "")) for c in RUN_COLUMNS])


def read_run_table(path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.DictReader(fh):
            row = dict(raw)
            row["rep"] = int(row["rep"])
            row["seed"] = int(row["seed"])
            if not row.get("error"):
                for i in range(1, 6):
                    row[f"Z{i}"] = float(row[f"Z{i}"])
                row["scalar"] = float(row["scalar"])
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: run table is empty")
    return rows


def write_solutions(records, path) -> None:
    """Best solution per run: a ``# instance/method/target/rep`` header, then one route per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            r = rec.row
            fh.write(f"# {r['instance_id']}/{r['method']}/{r['target_id']}/{r['rep']}\n")
            fh.write(rec.solution_text)
            fh.write("\n")


def read_solution_blocks(path) -> dict[str, Solution]:
    blocks: dict[str, Solution] = {}
    key, lines = None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines() + [""]:
        if line.startswith("# "):
            key, lines = line[2:].strip(), []
        elif line.strip():
            lines.append(line)
        elif key is not None:
            blocks[key] = Solution.from_text("\n".join(lines))
            key = None
    return blocks
