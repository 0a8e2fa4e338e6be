"""Assignment genotype, decoding, route simulation, five-objective evaluation
and Pareto-dominance utilities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .instance import Instance

OBJECTIVES = ("Z1", "Z2", "Z3", "Z4", "Z5")
DELAY_REFS = ("window_start", "window_end")


class CoverageError(ValueError):
    """A solution does not visit every customer exactly once."""


class ObjectiveVector(NamedTuple):
    """Vehicles, distance, makespan, total waiting, total delay (all minimised)."""

    Z1: float
    Z2: float
    Z3: float
    Z4: float
    Z5: float


@dataclass(frozen=True)
class Solution:
    routes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        routes = tuple(tuple(int(c) for c in r) for r in self.routes)
        if any(len(r) == 0 for r in routes):
            raise ValueError("empty routes are not stored")
        object.__setattr__(self, "routes", routes)

    def to_text(self) -> str:
        return "".join(",".join(map(str, r)) + "\n" for r in self.routes)

    @classmethod
    def from_text(cls, text: str) -> "Solution":
        routes = []
        for line in text.splitlines():
            line = line.strip()
            if line:
                routes.append(tuple(int(tok) for tok in line.split(",")))
        return cls(tuple(routes))

    def encode(self) -> np.ndarray:
        """Chromosome assigning route index as vehicle id.

        ``decode(sol.encode(), inst) == sol`` whenever ``sol`` came out of ``decode``.
        """
        n = sum(len(r) for r in self.routes)
        genes = np.empty(n, dtype=np.int64)
        for v, route in enumerate(self.routes):
            for c in route:
                genes[c - 1] = v
        return genes


@dataclass(frozen=True)
class Stop:
    customer: int
    arrival: float
    wait: float
    delay: float
    start: float
    end: float


@dataclass(frozen=True)
class RouteSchedule:
    stops: tuple[Stop, ...]
    distance: float
    return_time: float

    @property
    def total_wait(self) -> float:
        total = 0.0
        for s in self.stops:
            total += s.wait
        return total

    @property
    def total_delay(self) -> float:
        total = 0.0
        for s in self.stops:
            total += s.delay
        return total


def decode(genes: Sequence[int], instance: Instance) -> Solution:
    """Group customers by vehicle id, order each group by (window start, id),
    then split overflowing groups into consecutive capacity-feasible routes."""
    genes = np.asarray(genes)
    if genes.shape != (instance.n,):
        raise ValueError(f"chromosome length {genes.shape} does not match n={instance.n}")
    groups: dict[int, list[int]] = {}
    for cust in instance.visit_order:
        groups.setdefault(int(genes[cust - 1]), []).append(int(cust))
    routes = []
    for vehicle in sorted(groups):
        route: list[int] = []
        load = 0.0
        for cust in groups[vehicle]:
            if route and load + instance.demand[cust] > instance.capacity:
                routes.append(tuple(route))
                route, load = [], 0.0
            route.append(cust)
            load += instance.demand[cust]
        routes.append(tuple(route))
    return Solution(tuple(routes))


def simulate_route(route: Sequence[int], instance: Instance, delay_ref: str = "window_start") -> RouteSchedule:
    ref = instance.delay_reference(delay_ref)
    stops = []
    prev = 0
    t = 0.0
    dist = 0.0
    for cust in route:
        if not 1 <= cust <= instance.n:
            raise ValueError(f"unknown customer id {cust}")
        dist += instance.cost[prev, cust]
        t += instance.cost[prev, cust]
        a = instance.window_start[cust]
        wait = max(0.0, a - t)
        delay = max(0.0, t - ref[cust])
        start = max(t, a)
        end = start + instance.service[cust]
        stops.append(Stop(int(cust), float(t), float(wait), float(delay), float(start), float(end)))
        t = end
        prev = cust
    if prev == 0:
        return RouteSchedule((), 0.0, 0.0)
    dist += instance.cost[prev, 0]
    t += instance.cost[prev, 0]
    return RouteSchedule(tuple(stops), float(dist), float(t))


def _sorted_sum(values) -> float:
    total = 0.0
    for v in sorted(values):
        total += v
    return total


def evaluate(solution: Solution, instance: Instance, delay_ref: str = "window_start") -> ObjectiveVector:
    seen = np.zeros(instance.n + 1, dtype=int)
    for route in solution.routes:
        for c in route:
            if not 1 <= c <= instance.n:
                raise CoverageError(f"unknown customer id {c}")
            seen[c] += 1
    if np.any(seen[1:] != 1):
        missing = [int(i) for i in np.flatnonzero(seen == 0) if i > 0]
        dupes = [int(i) for i in np.flatnonzero(seen > 1)]
        raise CoverageError(f"coverage violated: missing={missing} duplicated={dupes}")
    schedules = [simulate_route(r, instance, delay_ref) for r in solution.routes]
    # route-order independent sums
    return ObjectiveVector(
        len(schedules),
        _sorted_sum(s.distance for s in schedules),
        max((s.return_time for s in schedules), default=0.0),
        _sorted_sum(s.total_wait for s in schedules),
        _sorted_sum(s.total_delay for s in schedules),
    )


def evaluate_population(genes: np.ndarray, instance: Instance, delay_ref: str = "window_start") -> np.ndarray:
    """Objective matrix (P, 5) for a (P, n) gene matrix; equals ``evaluate(decode(g))`` row-wise."""
    genes = np.ascontiguousarray(genes, dtype=np.int64)
    if genes.ndim != 2 or genes.shape[1] != instance.n:
        raise ValueError(f"gene matrix must have shape (P, {instance.n}), got {genes.shape}")
    return _kernels.evaluate_batch(
        genes,
        instance.visit_order.astype(np.int64),
        instance.demand,
        instance.window_start,
        instance.delay_reference(delay_ref),
        instance.service,
        instance.cost,
        float(instance.capacity),
    )


def dominates(u, v) -> bool:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("dominance needs vectors of equal dimension")
    return bool(np.all(u <= v) and np.any(u < v))


def nondominated_mask(points) -> np.ndarray:
    """True for points no other point dominates (duplicates all kept)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        pts = pts.reshape(len(pts), -1)
    keep = np.ones(len(pts), dtype=bool)
    for i in range(len(pts)):
        if not keep[i]:
            continue
        # drop everything i dominates
        dominated = np.all(pts[i] <= pts, axis=1) & np.any(pts[i] < pts, axis=1)
        keep &= ~dominated
    return keep


def pareto_filter_indices(points) -> np.ndarray:
    """Indices of non-dominated points, first occurrence of each duplicate only."""
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return np.zeros(0, dtype=np.int64)
    pts = pts.reshape(len(pts), -1)
    idx = np.flatnonzero(nondominated_mask(pts))
    _, first = np.unique(pts[idx], axis=0, return_index=True)
    return idx[np.sort(first)]


def pareto_filter(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return pts.reshape(0, pts.shape[1] if pts.ndim == 2 else 0)
    pts = pts.reshape(len(pts), -1)
    return pts[pareto_filter_indices(pts)]


class ParetoArchive:
    """Mutually non-dominated (objectives, genes, tag) entries, no duplicate vectors.

    Insertion order is preserved so archives built from the same stream are identical.
    """

    def __init__(self, n_genes: int, n_obj: int = 5):
        self.objectives = np.zeros((0, n_obj))
        self.genes = np.zeros((0, n_genes), dtype=np.int64)
        self.tags: list[str] = []

    def __len__(self):
        return len(self.objectives)

    def add(self, f, genes, tag: str = "") -> bool:
        f = np.asarray(f, dtype=float)
        F = self.objectives
        if len(F):
            if np.any(np.all(F <= f, axis=1)):
                # dominated by, or equal to, an archived vector
                return False
            beaten = np.all(f <= F, axis=1) & np.any(f < F, axis=1)
            if beaten.any():
                keep = ~beaten
                self.objectives = F[keep]
                self.genes = self.genes[keep]
                self.tags = [t for t, k in zip(self.tags, keep) if k]
        self.objectives = np.vstack([self.objectives, f[None, :]])
        self.genes = np.vstack([self.genes, np.asarray(genes, dtype=np.int64)[None, :]])
        self.tags.append(tag)
        return True

    def add_batch(self, F, G, tag: str = "") -> None:
        F = np.asarray(F, dtype=float)
        for i in pareto_filter_indices(F):
            self.add(F[i], G[i], tag)

    def merge(self, other: "ParetoArchive") -> None:
        for f, g, t in zip(other.objectives, other.genes, other.tags):
            self.add(f, g, t)
