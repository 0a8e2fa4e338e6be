import json

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from goalvrp.goalprog import (
    EDConfig, GoalSpec, WeightSolverConfig, build_inequality_system, chebyshev_lambda, derive_weight_vector,
    euclidean_objective, satisfied_mask, weighted_objective,
)
from goalvrp.solution import dominates

from oracles import best_count_two_objectives, count_satisfied, two_active_archive

ZT = (2, 100, 50, 10, 5)
positive = st.floats(0.01, 1000, allow_nan=False)
vec5 = st.tuples(*[positive] * 5)


def test_chebyshev_examples():
    assert chebyshev_lambda(ZT, ZT) == 1
    assert chebyshev_lambda((1, 50, 25, 5, 2.5), ZT) == 0.5
    assert chebyshev_lambda((4, 100, 50, 10, 5), ZT) == 2


def test_chebyshev_zero_target_uses_unit_floor():
    assert chebyshev_lambda((0.5, 1, 1, 1, 1), (0, 1, 1, 1, 1)) == 1
    assert chebyshev_lambda((3, 1, 1, 1, 1), (0, 1, 1, 1, 1)) == 3


@given(Z=vec5, Zt=vec5)
def test_chebyshev_law(Z, Zt):
    lam = chebyshev_lambda(Z, Zt)
    dens = [max(t, 1.0) for t in Zt]
    assert lam == max(z / d for z, d in zip(Z, dens))
    if all(t >= 1 for t in Zt):
        assert (lam <= 1) == all(z <= t for z, t in zip(Z, Zt))


@given(Zt=vec5, alpha=st.floats(0.1, 10))
def test_chebyshev_scale_covariance(Zt, alpha):
    assume(all(t >= 1 for t in Zt))
    Z = tuple(t * 0.7 for t in Zt)
    assert chebyshev_lambda(tuple(alpha * z for z in Z), Zt) == pytest.approx(alpha * chebyshev_lambda(Z, Zt))


def test_weighted_objective_examples():
    assert weighted_objective((1, 2, 3, 4, 5), (1, 1, 1, 1, 1)) == 15


@given(u=vec5, v=vec5, w=st.tuples(*[st.floats(1e-3, 1)] * 5), c=st.floats(0.1, 10))
def test_weighted_objective_linearity_and_dominance(u, v, w, c):
    assert weighted_objective(u, [c * x for x in w]) == pytest.approx(c * weighted_objective(u, w))
    better = tuple(min(a, b) for a, b in zip(u, v))
    if dominates(better, v):
        assert weighted_objective(better, w) < weighted_objective(v, w)


def test_ed_examples():
    cfg = EDConfig(epsilon=1e-6)
    assert euclidean_objective(ZT, ZT, cfg) == 0
    assert euclidean_objective((5, 100, 50, 10, 5), ZT, cfg) == 3
    assert euclidean_objective((2, 97, 46, 10, 5), ZT, cfg) == -5


@given(Z=vec5, Zt=vec5, eps=st.sampled_from([0.0, 1e-6, 0.5]))
def test_ed_switch(Z, Zt, eps):
    out = euclidean_objective(Z, Zt, EDConfig(epsilon=eps))
    worse = [max(z - t, 0) for z, t in zip(Z, Zt)]
    better = [max(t - z, 0) for z, t in zip(Z, Zt)]
    z = np.sqrt(sum(x * x for x in worse))
    if z > eps:
        assert out == pytest.approx(z) and out > 0
    else:
        assert out == pytest.approx(-np.sqrt(sum(x * x for x in better))) and out <= 0


@given(Zt=vec5, k=st.integers(0, 4), a=st.floats(0.1, 50), b=st.floats(0.1, 50))
def test_ed_monotone_in_worse_objective(Zt, k, a, b):
    lo, hi = sorted((a, b))
    Z1 = list(Zt); Z1[k] += lo
    Z2 = list(Zt); Z2[k] += hi
    assert euclidean_objective(Z1, Zt) <= euclidean_objective(Z2, Zt)


def test_ed_normalized():
    out = euclidean_objective((4, 100, 50, 10, 5), ZT, EDConfig(normalize=True))
    assert out == 1.0


def test_ed_rejects_negative_epsilon():
    with pytest.raises(ValueError):
        EDConfig(epsilon=-1)


def test_goalspec_validation_and_round_trip(tmp_path):
    g = GoalSpec(ZT, "WV", weights=(1, 0.5, 0.5, 0.1, 1), target_id="t0003")
    g.write(tmp_path / "g.json")
    assert GoalSpec.read(tmp_path / "g.json") == g
    assert json.loads((tmp_path / "g.json").read_text())["method"] == "WV"
    for bad in [dict(target=(1, 2)), dict(target=ZT, method="XX"), dict(target=(-1, 0, 0, 0, 0)),
                dict(target=ZT, weights=(0, 1, 1, 1, 1)), dict(target=ZT, weights=(2, 1, 1, 1, 1))]:
        with pytest.raises(ValueError):
            GoalSpec(**bad)
    with pytest.raises(ValueError, match="derive"):
        GoalSpec(ZT, "WV").scalarize(ZT)


def test_goalspec_scalarize_matches_functions():
    F = np.array([ZT, (1, 50, 25, 5, 2.5), (4, 100, 50, 10, 5)], dtype=float)
    assert GoalSpec(ZT, "CV").scalarize(F).tolist() == [1, 0.5, 2]
    assert GoalSpec(ZT, "ED").scalarize(F)[2] == 2
    w = (1, 0.1, 0.1, 0.1, 0.1)
    assert GoalSpec(ZT, "WV", w).scalarize(F).tolist() == [weighted_objective(f, w) for f in F]


def test_inequality_system_examples():
    archive = [(3, 3, 3, 3, 3), (1, 9, 9, 9, 9), ZT]
    assert len(build_inequality_system(archive, ZT)) == 3
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = rng.uniform(1e-3, 1, 5)
        assert satisfied_mask(w, [ZT], ZT).all()
        assert satisfied_mask(w, [(5, 200, 60, 11, 5)], ZT).all()


def test_weight_solver_non_convex_three_points():
    archive = [(5, 5), (0, 6), (6, 0)]
    res = derive_weight_vector(archive, (5, 5))
    assert int(res.satisfied.sum()) == 2
    assert res.effectiveness == pytest.approx(2 / 3)
    assert best_count_two_objectives(archive, (5, 5), 0, 1) == 2
    assert all(0 < w <= 1 for w in res.weights)


def test_weight_solver_target_dominating_archive():
    rng = np.random.default_rng(1)
    archive = np.asarray(ZT) + rng.uniform(0, 10, size=(30, 5))
    res = derive_weight_vector(archive, ZT)
    assert res.effectiveness == 1.0


def test_weight_solver_matches_oracle_on_random_small_archives():
    rng = np.random.default_rng(11)
    for _ in range(20):
        archive, target, i, j = two_active_archive(rng)
        res = derive_weight_vector(archive, target)
        assert int(res.satisfied.sum()) == best_count_two_objectives(archive.tolist(), target.tolist(), i, j)
        assert int(res.satisfied.sum()) == count_satisfied(res.weights, archive.tolist(), target.tolist())


def test_weight_solver_deterministic_and_reported():
    rng = np.random.default_rng(4)
    archive = rng.uniform(0, 100, size=(60, 5))
    target = archive[7]
    cfg = WeightSolverConfig(seed=3)
    a = derive_weight_vector(archive, target, cfg)
    b = derive_weight_vector(archive, target, cfg)
    assert a.weights == b.weights
    rep = a.report()
    assert rep["bitmap"].count("1") / rep["k"] == rep["effectiveness"]
    assert rep["k"] == 60 and all(0 < w <= 1 for w in rep["weights"])
    assert rep["big_m"] >= 0


def test_weight_solver_empty_archive():
    with pytest.raises(ValueError):
        derive_weight_vector(np.zeros((0, 5)), ZT)
    with pytest.raises(ValueError):
        WeightSolverConfig(restarts=0)
