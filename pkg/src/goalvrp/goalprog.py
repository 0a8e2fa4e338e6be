"""Goal-referenced scalarizers (Chebyshev, derived weights, Euclidean distance)
and the weight-vector search over an approximation set."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .moea import simplex_lattice

METHODS = ("CV", "WV", "ED")
ZERO_TARGET_FLOOR = 1.0


def target_denominators(Zt, floor: float = ZERO_TARGET_FLOOR) -> np.ndarray:
    """Per-objective divisor max(Zt_i, floor) used by every relative measure."""
    return np.maximum(np.asarray(Zt, dtype=float), floor)


def _rowsum(terms: np.ndarray) -> np.ndarray:
    # fixed left-to-right order over the objective axis
    total = terms[..., 0].copy()
    for i in range(1, terms.shape[-1]):
        total = total + terms[..., i]
    return total


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def chebyshev_lambda(Z, Zt, floor: float = ZERO_TARGET_FLOOR):
    """Smallest lambda with Z_i / d_i <= lambda for every objective."""
    Z = np.asarray(Z, dtype=float)
    return _scalar_or_array(np.max(Z / target_denominators(Zt, floor), axis=-1))


def weighted_objective(Z, w):
    Z = np.asarray(Z, dtype=float)
    return _scalar_or_array(_rowsum(Z * np.asarray(w, dtype=float)))


@dataclass(frozen=True)
class EDConfig:
    epsilon: float = 1e-6
    normalize: bool = False
    floor: float = ZERO_TARGET_FLOOR

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def euclidean_objective(Z, Zt, cfg: EDConfig = EDConfig()):
    """Distance over objectives worse than target; once that falls to epsilon,
    minus the distance over objectives better than target."""
    Z = np.asarray(Z, dtype=float)
    gap = Z - np.asarray(Zt, dtype=float)
    if cfg.normalize:
        gap = gap / target_denominators(Zt, cfg.floor)
    worse = np.where(gap > 0, gap, 0.0)
    better = np.where(gap < 0, -gap, 0.0)
    z = np.sqrt(_rowsum(worse * worse))
    z_better = np.sqrt(_rowsum(better * better))
    return _scalar_or_array(np.where(z > cfg.epsilon, z, -z_better))


@dataclass
class GoalSpec:
    target: tuple
    method: str = "CV"
    weights: tuple | None = None
    epsilon: float = 1e-6
    normalize: bool = False
    target_id: str = ""

    def __post_init__(self):
        self.target = tuple(float(v) for v in self.target)
        if len(self.target) != 5:
            raise ValueError("target must have five components")
        if any(v < 0 for v in self.target):
            raise ValueError("target components must be >= 0")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.weights is not None:
            self.weights = tuple(float(v) for v in self.weights)
            if len(self.weights) != 5 or not all(0 < v <= 1 for v in self.weights):
                raise ValueError("weights must be five values in (0, 1]")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    def scalarize(self, F):
        """Goal fitness (minimised) for one objective vector or a (P, 5) matrix."""
        if self.method == "CV":
            return chebyshev_lambda(F, self.target)
        if self.method == "ED":
            return euclidean_objective(F, self.target, EDConfig(self.epsilon, self.normalize))
        if self.weights is None:
            raise ValueError("WV goal has no weights; derive them first")
        return weighted_objective(F, self.weights)

    def to_dict(self) -> dict:
        doc = {"target": list(self.target), "method": self.method}
        if self.weights is not None:
            doc["weights"] = list(self.weights)
        doc["epsilon"] = self.epsilon
        doc["normalize"] = self.normalize
        if self.target_id:
            doc["target_id"] = self.target_id
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "GoalSpec":
        return cls(
            target=doc["target"],
            method=doc.get("method", "CV"),
            weights=doc.get("weights"),
            epsilon=doc.get("epsilon", 1e-6),
            normalize=doc.get("normalize", False),
            target_id=str(doc.get("target_id", "")),
        )

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path) -> "GoalSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_inequality_system(approx, Zt) -> list[tuple[tuple, tuple]]:
    """One ``w.Zt <= w.Zj`` row per archive vector, as (Zt, Zj) pairs."""
    Z = np.asarray(approx, dtype=float)
    if len(Z) == 0:
        raise ValueError("approximation set is empty")
    zt = tuple(float(v) for v in Zt)
    return [(zt, tuple(float(v) for v in row)) for row in Z]


def satisfied_mask(w, approx, Zt) -> np.ndarray:
    """Which rows of the system hold for weight vector ``w``."""
    Z = np.asarray(approx, dtype=float)
    w = np.asarray(w, dtype=float)
    return _rowsum(Z * w) >= _rowsum(np.asarray(Zt, dtype=float) * w)


@dataclass(frozen=True)
class WeightSolverConfig:
    restarts: int = 8
    grid_resolution: int = 12
    step_schedule: tuple = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.001)
    min_weight: float = 1e-6
    max_sweeps: int = 60
    big_m: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.min_weight <= 1:
            raise ValueError("min_weight must lie in (0, 1]")


@dataclass
class WeightDerivation:
    weights: tuple
    effectiveness: float
    satisfied: np.ndarray
    big_m: float
    config: WeightSolverConfig = field(default_factory=WeightSolverConfig)

    @property
    def k(self) -> int:
        return len(self.satisfied)

    def report(self) -> dict:
        return {
            "weights": list(self.weights),
            "effectiveness": self.effectiveness,
            "satisfied_count": int(self.satisfied.sum()),
            "k": self.k,
            "bitmap": "".join("1" if s else "0" for s in self.satisfied),
            "big_m": self.big_m,
            "solver": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.config).items()},
        }


class _Scorer:
    def __init__(self, Z, Zt):
        self.Z = Z
        self.Zt = Zt

    def __call__(self, W):
        """(count, slack) for each row of a (m, 5) candidate matrix."""
        count = np.empty(len(W), dtype=np.int64)
        slack = np.empty(len(W))
        chunk = max(1, 400_000 // max(1, len(self.Z)))
        for s in range(0, len(W), chunk):
            block = W[s : s + chunk]
            lhs = _rowsum(block[:, None, :] * self.Z[None, :, :])
            rhs = _rowsum(block * self.Zt)[:, None]
            count[s : s + chunk] = (lhs >= rhs).sum(axis=1)
            slack[s : s + chunk] = (lhs - rhs).sum(axis=1)
        return count, slack


def _best(W, count, slack) -> int:
    # max count, then max slack, then lexicographically smallest w
    keys = [W[:, i] for i in reversed(range(W.shape[1]))] + [-slack, -count]
    return int(np.lexsort(keys)[0])


def _line_candidates(w, i, D, lo, keep):
    """Exact 1-D search along coordinate i. The satisfied count is piecewise
    constant in w_i; every piece inside [lo, 1] is represented by a breakpoint or
    a midpoint, counted analytically. Returns the ``keep`` best candidates."""
    rest = D @ w - D[:, i] * w[i]
    di = D[:, i]
    pos, neg, flat = di > 0, di < 0, di == 0
    always = int(np.count_nonzero(rest[flat] >= 0))
    up = np.sort(-rest[pos] / di[pos])  # satisfied for x >= breakpoint
    down = np.sort(-rest[neg] / di[neg])  # satisfied for x <= breakpoint
    xs = np.concatenate([up, down])
    pts = np.unique(np.concatenate([[lo, 1.0], xs[(xs > lo) & (xs < 1.0)]]))
    cand = np.concatenate([pts, (pts[:-1] + pts[1:]) / 2])
    count = (always + np.searchsorted(up, cand, side="right")
             + len(down) - np.searchsorted(down, cand, side="left"))
    slack = cand * di.sum() + rest.sum()
    top = np.lexsort([-slack, -count])[:keep]
    W = np.repeat(w[None, :], len(top), axis=0)
    W[:, i] = cand[top]
    return W


def derive_weight_vector(approx, Zt, cfg: WeightSolverConfig = WeightSolverConfig()) -> WeightDerivation:
    """Weight vector in (0, 1]^5 satisfying as many ``w.Zt <= w.Zj`` rows as the
    search finds: simplex-grid scan, then multi-start hill climbing with
    multiplicative coordinate steps and exact coordinate line searches."""
    Z = np.asarray(approx, dtype=float)
    if len(Z) == 0:
        raise ValueError("approximation set is empty")
    Zt = np.asarray(Zt, dtype=float)
    m = Z.shape[1]
    lo = cfg.min_weight
    score = _Scorer(Z, Zt)
    D = Z - Zt
    rng = np.random.default_rng(cfg.seed)

    # grid in objective-scaled space so every objective gets comparable pull
    scale = np.maximum(np.max(np.abs(np.vstack([Z, Zt[None, :]])), axis=0), 1e-12)

    def to_box(U):
        W = U / scale
        W = W / W.max(axis=1, keepdims=True)
        return np.clip(W, lo, 1.0)

    U = simplex_lattice(m, cfg.grid_resolution)
    U = np.maximum(U, 1.0 / (4 * cfg.grid_resolution))
    grid = to_box(U)
    gcount, gslack = score(grid)
    order = np.lexsort([-gslack, -gcount])
    starts = [grid[j] for j in order[: cfg.restarts]]
    starts += list(to_box(rng.dirichlet(np.ones(m), size=cfg.restarts)))

    finals = []
    for w in starts:
        w = w.copy()
        c0, s0 = score(w[None, :])
        cur = (int(c0[0]), float(s0[0]))
        for _ in range(cfg.max_sweeps):
            cands = []
            for step in cfg.step_schedule:
                for i in range(m):
                    for factor in (1.0 + step, 1.0 / (1.0 + step)):
                        v = w.copy()
                        v[i] = min(1.0, max(lo, v[i] * factor))
                        cands.append(v)
            W = np.vstack([np.asarray(cands)] + [_line_candidates(w, i, D, lo, 4) for i in range(m)])
            count, slack = score(W)
            j = _best(W, count, slack)
            if (int(count[j]), float(slack[j])) > cur:
                w = W[j].copy()
                cur = (int(count[j]), float(slack[j]))
            else:
                break
        finals.append(w)

    F = np.asarray(finals)
    count, slack = score(F)
    w = F[_best(F, count, slack)]
    mask = satisfied_mask(w, Z, Zt)
    big_m = float(np.max(np.sum(np.maximum(Zt - Z, 0.0), axis=1)))
    return WeightDerivation(
        weights=tuple(float(v) for v in w),
        effectiveness=float(mask.sum()) / len(Z),
        satisfied=mask,
        big_m=big_m,
        config=cfg,
    )
