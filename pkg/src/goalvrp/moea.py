"""Variation operators, non-dominated sorting, and the NSGA-II / MOEA/D engines.

Both engines evaluate all five objectives and optimise a projection onto an
``ObjectiveSubset``; every evaluated point is offered to a 5-objective Pareto
archive so results from different subsets stay comparable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance
from .solution import ParetoArchive, evaluate_population, nondominated_mask


@dataclass(frozen=True)
class ObjectiveSubset:
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if not idx or idx[0] < 1 or idx[-1] > 5:
            raise ValueError(f"objective subset must be a non-empty subset of 1..5, got {self.indices}")
        object.__setattr__(self, "indices", idx)

    @property
    def columns(self) -> list[int]:
        return [i - 1 for i in self.indices]

    @property
    def label(self) -> str:
        return "".join(f"Z{i}" for i in self.indices)

    @classmethod
    def parse(cls, text: str) -> "ObjectiveSubset":
        return cls(tuple(int(tok) for tok in text.replace("Z", " ").split()))


FULL = ObjectiveSubset((1, 2, 3, 4, 5))


INIT_SCHEMES = ("mixed", "uniform")


def random_population(rng: np.random.Generator, size: int, n: int, scheme: str = "mixed") -> np.ndarray:
    """Random chromosomes. ``uniform`` draws every gene from [0, n); ``mixed`` gives
    each individual its own id range [0, m) with m uniform on 1..n, so the initial
    population spans few-vehicle and many-vehicle plans."""
    if scheme == "uniform":
        return rng.integers(0, n, size=(size, n))
    m = rng.integers(1, n + 1, size=(size, 1))
    return np.floor(rng.random((size, n)) * m).astype(np.int64)


@dataclass(frozen=True)
class EvolutionConfig:
    population: int = 100
    budget: int = 10_000
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None -> 1/n per gene
    seed: int = 0
    elite_fraction: float = 0.05
    tournament_size: int = 2
    init: str = "mixed"  # or "uniform"

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be >= 1")
        if self.budget < self.population:
            raise ValueError("budget must be >= population")
        for name in ("crossover_rate", "elite_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"init must be one of {INIT_SCHEMES}")

    def gene_mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.mutation_rate is None else self.mutation_rate


@dataclass(frozen=True)
class DecompositionConfig:
    neighborhood: int = 20
    min_weight: float = 1e-6


@dataclass
class EngineResult:
    genes: np.ndarray  # final population
    objectives: np.ndarray  # full 5-objective vectors of the final population
    front: np.ndarray  # indices of the final population's non-dominated set in subset space
    archive: ParetoArchive  # every non-dominated evaluated point, 5-objective space
    evaluations: int
    subset: ObjectiveSubset = field(default=FULL)


def uniform_crossover(p1, p2, rng: np.random.Generator) -> np.ndarray:
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    return np.where(rng.random(p1.shape) < 0.5, p1, p2)


def mutate(c, rate: float, rng: np.random.Generator, n_vehicles: int | None = None) -> np.ndarray:
    c = np.array(c, copy=True)
    n_vehicles = len(c) if n_vehicles is None else n_vehicles
    hit = rng.random(c.shape) < rate
    c[hit] = rng.integers(0, n_vehicles, size=int(hit.sum()))
    return c


def _vary(parents_a, parents_b, cfg: EvolutionConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    """Crossover (with probability ``crossover_rate``) then per-gene mutation, row-wise."""
    mask = rng.random(parents_a.shape) < 0.5
    do_cx = rng.random(len(parents_a)) < cfg.crossover_rate
    children = np.where(mask & do_cx[:, None], parents_a, np.where(do_cx[:, None], parents_b, parents_a))
    hit = rng.random(children.shape) < cfg.gene_mutation_rate(n)
    children[hit] = rng.integers(0, n, size=int(hit.sum()))
    return children


def dominance_matrix(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def fast_nondominated_sort(F) -> list[list[int]]:
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        return []
    D = dominance_matrix(F)
    counts = D.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while len(current):
        fronts.append(current.tolist())
        counts = counts - D[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    size, m = F.shape
    dist = np.zeros(size)
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        lo, hi = F[order[0], j], F[order[-1], j]
        if hi == lo:
            continue
        dist[order[0]] = dist[order[-1]] = np.inf
        gaps = (F[order[2:], j] - F[order[:-2], j]) / (hi - lo)
        dist[order[1:-1]] += gaps
    return dist


def _rank_and_crowding(F):
    fronts = fast_nondominated_sort(F)
    rank = np.empty(len(F), dtype=np.int64)
    crowd = np.empty(len(F))
    for r, front in enumerate(fronts):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return fronts, rank, crowd


def _environmental_selection(F, size):
    fronts, rank, crowd = _rank_and_crowding(F)
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            continue
        front = np.asarray(front)
        order = np.argsort(-crowd[front], kind="stable")
        chosen.extend(front[order[: size - len(chosen)]].tolist())
        break
    return np.asarray(chosen, dtype=np.int64)


def _initial_population(instance: Instance, cfg: EvolutionConfig, rng, initial):
    if initial is None:
        return random_population(rng, cfg.population, instance.n, cfg.init)
    initial = np.asarray(initial, dtype=np.int64)
    if initial.ndim != 2 or initial.shape[1] != instance.n:
        raise ValueError("initial population must have shape (P, n)")
    return initial.copy()


def nsga2(
    instance: Instance,
    subset: ObjectiveSubset,
    cfg: EvolutionConfig,
    initial=None,
    delay_ref: str = "window_start",
    tag: str = "",
) -> EngineResult:
    rng = np.random.default_rng(cfg.seed)
    n = instance.n
    cols = subset.columns
    genes = _initial_population(instance, cfg, rng, initial)
    if len(genes) > cfg.budget:
        genes = genes[: cfg.budget]
    full = evaluate_population(genes, instance, delay_ref)
    evals = len(genes)
    archive = ParetoArchive(n)
    archive.add_batch(full, genes, tag)

    while evals < cfg.budget:
        _, rank, crowd = _rank_and_crowding(full[:, cols])
        m = min(len(genes), cfg.budget - evals)
        contenders = rng.integers(0, len(genes), size=(2, m, 2))
        picks = []
        for k in range(2):
            a, b = contenders[k, :, 0], contenders[k, :, 1]
            a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
            picks.append(np.where(a_wins, a, b))
        children = _vary(genes[picks[0]], genes[picks[1]], cfg, n, rng)
        child_full = evaluate_population(children, instance, delay_ref)
        evals += m
        archive.add_batch(child_full, children, tag)

        pool_genes = np.vstack([genes, children])
        pool_full = np.vstack([full, child_full])
        keep = _environmental_selection(pool_full[:, cols], len(genes))
        genes, full = pool_genes[keep], pool_full[keep]

    front = np.flatnonzero(nondominated_mask(full[:, cols]))
    return EngineResult(genes, full, front, archive, evals, subset)


def simplex_lattice(m: int, h: int) -> np.ndarray:
    """All m-vectors of multiples of 1/h summing to one."""
    if h == 0:
        return np.full((1, m), 1.0 / m)
    points = []
    for bars in itertools.combinations(range(h + m - 1), m - 1):
        parts = np.diff((-1,) + bars + (h + m - 1,)) - 1
        points.append(parts / h)
    return np.asarray(points, dtype=float)


def decomposition_weights(m: int, population: int) -> np.ndarray:
    """Largest simplex lattice not exceeding ``population`` vectors."""
    if m == 1:
        return np.ones((population, 1))
    h = 0
    while math.comb(h + 1 + m - 1, m - 1) <= population:
        h += 1
    return simplex_lattice(m, h)


def _tchebycheff(F, w, ideal, scale):
    return np.max(w * np.abs(F - ideal) / scale, axis=-1)


def moead(
    instance: Instance,
    subset: ObjectiveSubset,
    cfg: EvolutionConfig,
    decomposition: DecompositionConfig = DecompositionConfig(),
    initial=None,
    delay_ref: str = "window_start",
    tag: str = "",
) -> EngineResult:
    """MOEA/D with normalised Tchebycheff aggregation and an online ideal point."""
    rng = np.random.default_rng(cfg.seed)
    n = instance.n
    cols = subset.columns
    weights = np.maximum(decomposition_weights(len(cols), cfg.population), decomposition.min_weight)
    size = len(weights)
    t = max(1, min(decomposition.neighborhood, size))
    dists = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    neighbors = np.argsort(dists, axis=1, kind="stable")[:, :t]

    if initial is None:
        genes = random_population(rng, size, n, cfg.init)
    else:
        genes = _initial_population(instance, cfg, rng, initial)
        if len(genes) < size:
            extra = random_population(rng, size - len(genes), n, cfg.init)
            genes = np.vstack([genes, extra])
        genes = genes[:size]
    full = evaluate_population(genes, instance, delay_ref)
    evals = size
    archive = ParetoArchive(n)
    archive.add_batch(full, genes, tag)
    ideal = full[:, cols].min(axis=0)

    while evals < cfg.budget:
        F = full[:, cols]
        scale = np.maximum(F.max(axis=0) - ideal, 1e-12)
        for i in rng.permutation(size):
            if evals >= cfg.budget:
                break
            hood = neighbors[i]
            k, l = rng.choice(hood, size=2, replace=len(hood) < 2)
            child = _vary(genes[k][None, :], genes[l][None, :], cfg, n, rng)
            child_full = evaluate_population(child, instance, delay_ref)[0]
            evals += 1
            archive.add(child_full, child[0], tag)
            f = child_full[cols]
            ideal = np.minimum(ideal, f)
            g_child = _tchebycheff(f, weights[hood], ideal, scale)
            g_old = _tchebycheff(full[hood][:, cols], weights[hood], ideal, scale)
            better = hood[g_child <= g_old]
            genes[better] = child[0]
            full[better] = child_full

    front = np.flatnonzero(nondominated_mask(full[:, cols]))
    return EngineResult(genes, full, front, archive, evals, subset)
