"""Run-table metrics against a target, weight-vector effectiveness, and
landscape-similarity summaries (Kendall tau-b, objective ranges, scatter export)."""
from __future__ import annotations

import csv
import itertools
import math
from pathlib import Path

import numpy as np

from .goalprog import ZERO_TARGET_FLOOR, satisfied_mask, target_denominators
from .solution import OBJECTIVES

METRIC_DEFINITIONS = {
    "achievement": "fraction of runs with Z_i <= Zt_i",
    "gap": "mean of (Z_i - Zt_i) / max(Zt_i, floor) over runs with Z_i > Zt_i; 0 when none",
    "overall": "mean of (Zt_i - Z_i) / max(Zt_i, floor) over all runs; positive = better than target",
}


def _runs(runs) -> np.ndarray:
    R = np.asarray(runs, dtype=float)
    if R.ndim != 2 or len(R) == 0:
        raise ValueError("need a non-empty (runs, objectives) table")
    return R


def target_achievement(runs, Zt) -> np.ndarray:
    R = _runs(runs)
    return np.mean(R <= np.asarray(Zt, dtype=float), axis=0)


def gap_to_target(runs, Zt, floor: float = ZERO_TARGET_FLOOR) -> np.ndarray:
    R = _runs(runs)
    Zt = np.asarray(Zt, dtype=float)
    rel = (R - Zt) / target_denominators(Zt, floor)
    missed = R > Zt
    out = np.zeros(R.shape[1])
    for i in range(R.shape[1]):
        if missed[:, i].any():
            out[i] = rel[missed[:, i], i].mean()
    return out


def overall_comparison(runs, Zt, floor: float = ZERO_TARGET_FLOOR) -> np.ndarray:
    R = _runs(runs)
    Zt = np.asarray(Zt, dtype=float)
    return np.mean((Zt - R) / target_denominators(Zt, floor), axis=0)


def effectiveness(w, approx, Zt) -> float:
    Z = np.asarray(approx, dtype=float)
    if len(Z) == 0:
        raise ValueError("approximation set is empty")
    return float(satisfied_mask(w, Z, Zt).sum()) / len(Z)


def kendall_tau(x, y) -> float:
    """Kendall tau-b over all pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("kendall_tau needs two 1-D sequences of equal length")
    if len(x) < 2:
        raise ValueError("kendall_tau needs at least two observations")
    iu = np.triu_indices(len(x), k=1)
    sx = np.sign(x[:, None] - x[None, :])[iu].astype(np.int64)
    sy = np.sign(y[:, None] - y[None, :])[iu].astype(np.int64)
    pairs = len(sx)
    tied_x = int(np.count_nonzero(sx == 0))
    tied_y = int(np.count_nonzero(sy == 0))
    if tied_x == pairs or tied_y == pairs:
        raise ValueError("kendall_tau is undefined when one sequence is constant")
    s = int(np.sum(sx * sy))
    return s / math.sqrt((pairs - tied_x) * (pairs - tied_y))


def objective_ranges(approx):
    """Per-objective (min, max) and min-max normalised vectors (0 where flat)."""
    Z = np.asarray(approx, dtype=float)
    if len(Z) == 0:
        raise ValueError("approximation set is empty")
    lo, hi = Z.min(axis=0), Z.max(axis=0)
    span = hi - lo
    norm = np.divide(Z - lo, span, out=np.zeros_like(Z), where=span > 0)
    return lo, hi, norm


def pairwise_correlation_matrix(approx) -> np.ndarray:
    """Symmetric tau-b matrix; NaN where an objective is constant across the set."""
    Z = np.asarray(approx, dtype=float)
    m = Z.shape[1]
    tau = np.eye(m)
    for a, b in itertools.combinations(range(m), 2):
        try:
            tau[a, b] = tau[b, a] = kendall_tau(Z[:, a], Z[:, b])
        except ValueError:
            tau[a, b] = tau[b, a] = np.nan
    return tau


def write_correlation_csv(tau, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["", *OBJECTIVES])
        for name, row in zip(OBJECTIVES, tau):
            w.writerow([name, *(repr(float(v)) for v in row)])


def export_scatter(approx, path, split: bool = False) -> list[Path]:
    """Normalised values for all ten objective pairs.

    One wide CSV at ``path`` (columns Z1..Z5), or with ``split`` one
    ``<stem>_Za_Zb.csv`` file per pair next to ``path``.
    """
    _, _, norm = objective_ranges(approx)
    path = Path(path)
    if not split:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", *OBJECTIVES])
            for i, row in enumerate(norm):
                w.writerow([i, *(repr(float(v)) for v in row)])
        return [path]
    written = []
    for a, b in itertools.combinations(range(len(OBJECTIVES)), 2):
        out = path.with_name(f"{path.stem}_{OBJECTIVES[a]}_{OBJECTIVES[b]}.csv")
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", OBJECTIVES[a], OBJECTIVES[b]])
            for i, row in enumerate(norm):
                w.writerow([i, repr(float(row[a])), repr(float(row[b]))])
        written.append(out)
    return written


def report(runs, Zt, floor: float = ZERO_TARGET_FLOOR) -> dict:
    return {
        "achievement": target_achievement(runs, Zt).tolist(),
        "gap": gap_to_target(runs, Zt, floor).tolist(),
        "overall": overall_comparison(runs, Zt, floor).tolist(),
        "n_runs": int(len(_runs(runs))),
    }
