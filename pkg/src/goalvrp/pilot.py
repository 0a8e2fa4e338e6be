"""Approximation-set construction for a pilot instance and target selection."""
from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .instance import Instance
from .moea import FULL, DecompositionConfig, EvolutionConfig, ObjectiveSubset, moead, nsga2, random_population
from .solution import OBJECTIVES, ParetoArchive, Solution, decode

ENGINES = ("nsga2", "moead")


@dataclass(frozen=True)
class PilotBudget:
    subset_evaluations: int
    final_evaluations: int
    final_repetitions: int = 4

    def __post_init__(self):
        if min(self.subset_evaluations, self.final_evaluations, self.final_repetitions) < 1:
            raise ValueError("pilot budgets must be positive")


PRESETS = {
    "desk": PilotBudget(2_000, 10_000, 4),
    "paper": PilotBudget(1_000_000, 2_000_000, 4),
}


@dataclass
class ApproximationSet:
    objectives: np.ndarray
    solutions: list[Solution]
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.objectives = np.asarray(self.objectives, dtype=float).reshape(-1, 5)
        if not self.provenance:
            self.provenance = [""] * len(self.solutions)
        if not len(self.objectives) == len(self.solutions) == len(self.provenance):
            raise ValueError("objectives, solutions and provenance must align")

    def __len__(self):
        return len(self.objectives)

    @classmethod
    def from_archive(cls, archive: ParetoArchive, instance: Instance) -> "ApproximationSet":
        sols = [decode(g, instance) for g in archive.genes]
        return cls(archive.objectives.copy(), sols, list(archive.tags))

    def genes(self) -> np.ndarray:
        return np.asarray([s.encode() for s in self.solutions], dtype=np.int64)

    def write(self, directory) -> None:
        """``archive.csv`` (Z1..Z5, solution ref, provenance) and ``solutions.txt``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "archive.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", *OBJECTIVES, "solution", "provenance"])
            for i, (z, tag) in enumerate(zip(self.objectives, self.provenance)):
                w.writerow([i, *(_fmt(v) for v in z), f"s{i:04d}", tag])
        with open(directory / "solutions.txt", "w", encoding="utf-8") as fh:
            for i, sol in enumerate(self.solutions):
                fh.write(f"# s{i:04d}\n{sol.to_text()}\n")

    @classmethod
    def read(cls, path) -> "ApproximationSet":
        """Read from a pilot output directory or its ``archive.csv``."""
        path = Path(path)
        csv_path = path / "archive.csv" if path.is_dir() else path
        sol_path = csv_path.parent / "solutions.txt"
        blocks: dict[str, Solution] = {}
        key, lines = None, []
        for line in sol_path.read_text(encoding="utf-8").splitlines() + [""]:
            if line.startswith("# "):
                key, lines = line[2:].strip(), []
            elif line.strip():
                lines.append(line)
            elif key is not None:
                blocks[key] = Solution.from_text("\n".join(lines))
                key = None
        objectives, solutions, tags = [], [], []
        with open(csv_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                objectives.append([float(row[z]) for z in OBJECTIVES])
                if row["solution"] not in blocks:
                    raise ValueError(f"{sol_path}: missing solution {row['solution']}")
                solutions.append(blocks[row["solution"]])
                tags.append(row.get("provenance", ""))
        if not objectives:
            raise ValueError(f"{csv_path}: archive is empty")
        return cls(np.asarray(objectives), solutions, tags)


def _fmt(v: float) -> str:
    v = float(v)
    return repr(int(v)) if v.is_integer() else repr(v)


def enumerate_subsets() -> list[ObjectiveSubset]:
    """All 2-, 3- and 4-objective subsets of Z1..Z5, by size then lexicographically."""
    return [ObjectiveSubset(c) for r in (2, 3, 4) for c in itertools.combinations(range(1, 6), r)]


def _job_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence([seed, *key]).generate_state(1, dtype=np.uint32)[0])


def _run_engine(job):
    engine, instance, subset, cfg, decomposition, initial, delay_ref, tag = job
    if engine == "nsga2":
        res = nsga2(instance, subset, cfg, initial=initial, delay_ref=delay_ref, tag=tag)
    else:
        res = moead(instance, subset, cfg, decomposition, initial=initial, delay_ref=delay_ref, tag=tag)
    return res.archive, res.evaluations


def _run_jobs(jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_engine, jobs))
    return [_run_engine(j) for j in jobs]


@dataclass
class PilotResult:
    approximation: ApproximationSet
    manifest: dict
    stage_archives: list[ParetoArchive]


def run_pilot(
    instance: Instance,
    budget: PilotBudget,
    cfg: EvolutionConfig,
    seed: int,
    decomposition: DecompositionConfig = DecompositionConfig(),
    delay_ref: str = "window_start",
    jobs: int = 1,
) -> PilotResult:
    """Subset runs of both engines, archive, seeded five-objective runs, final union."""
    manifest_jobs = []

    def job(engine, subset, evals, key, initial=None):
        job_cfg = replace(cfg, budget=max(evals, cfg.population), seed=_job_seed(seed, *key))
        tag = f"{engine}/{subset.label}/{job_cfg.seed}"
        manifest_jobs.append({"engine": engine, "subset": subset.label, "seed": job_cfg.seed,
                              "budget": job_cfg.budget, "stage": "subset" if initial is None else "final"})
        return (engine, instance, subset, job_cfg, decomposition, initial, delay_ref, tag)

    # steps 1-3
    subset_jobs = [job(e, s, budget.subset_evaluations, (0, k, j))
                   for k, s in enumerate(enumerate_subsets()) for j, e in enumerate(ENGINES)]
    stage = _run_jobs(subset_jobs, jobs)

    # step 4
    archive = ParetoArchive(instance.n)
    for arch, _ in stage:
        archive.merge(arch)
    step4_size = len(archive)

    # step 5: half random, half drawn from the archive
    rng = np.random.default_rng(_job_seed(seed, 1))
    half = cfg.population // 2
    draw = rng.choice(len(archive), size=cfg.population - half, replace=len(archive) < cfg.population - half)
    initial = np.vstack([random_population(rng, half, instance.n, cfg.init), archive.genes[draw]])

    # step 6
    final_jobs = [job(e, FULL, budget.final_evaluations, (2, j, r), initial)
                  for j, e in enumerate(ENGINES) for r in range(budget.final_repetitions)]
    final = _run_jobs(final_jobs, jobs)

    # step 7
    for arch, _ in final:
        archive.merge(arch)

    for entry, (arch, evals) in zip(manifest_jobs, stage + final):
        entry["evaluations"] = evals
        entry["archive_size"] = len(arch)
    manifest = {
        "seed": seed,
        "budget": {"subset_evaluations": budget.subset_evaluations,
                   "final_evaluations": budget.final_evaluations,
                   "final_repetitions": budget.final_repetitions},
        "evolution": {k: v for k, v in cfg.__dict__.items() if k != "seed"},
        "decomposition": dict(decomposition.__dict__),
        "delay_ref": delay_ref,
        "step4_archive_size": step4_size,
        "seeding_draws": draw.tolist(),
        "final_size": len(archive),
        "jobs": manifest_jobs,
    }
    return PilotResult(ApproximationSet.from_archive(archive, instance), manifest,
                       [a for a, _ in stage + final])


def select_targets(approx: ApproximationSet, k: int, seed: int) -> list[int]:
    """Indices of ``k`` distinct entries drawn uniformly without replacement."""
    if k > len(approx):
        raise ValueError(f"cannot select {k} targets from {len(approx)} entries")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.choice(len(approx), size=k, replace=False)]
