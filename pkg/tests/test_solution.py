import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from goalvrp.solution import (
    CoverageError, ParetoArchive, Solution, decode, dominates, evaluate, evaluate_population,
    nondominated_mask, pareto_filter, simulate_route,
)

from conftest import make_instance, tiny_instance
from oracles import nondominated, simulate_plan


def test_hand_simulated_route(two_customer):
    sched = simulate_route([1, 2], two_customer)
    s1, s2 = sched.stops
    assert (s1.arrival, s1.wait, s1.delay, s1.start, s1.end) == (10, 0, 10, 10, 20)
    assert (s2.arrival, s2.wait, s2.delay, s2.start, s2.end) == (35, 15, 0, 50, 60)
    assert sched.return_time == 80


def test_hand_simulated_objectives(two_customer):
    assert tuple(evaluate(Solution([[1, 2]]), two_customer)) == (1, 45, 80, 15, 10)


def test_window_end_reference(two_customer):
    # both arrivals fall before b = 100, so nothing counts as late
    assert tuple(evaluate(Solution([[1, 2]]), two_customer, "window_end")) == (1, 45, 80, 15, 0)


def test_two_singleton_routes():
    cost = [[0, 10, 20], [10, 0, 25], [20, 25, 0]]
    inst = make_instance(cost, [(10, 100), (20, 100)])
    assert tuple(evaluate(Solution([[1], [2]]), inst)) == (2, 60, 50, 0, 0)
    assert tuple(evaluate(Solution([[2], [1]]), inst)) == (2, 60, 50, 0, 0)


def test_on_time_arrival_has_no_wait_or_delay(two_customer):
    stop = simulate_route([1], make_instance([[0, 10], [10, 0]], [(10, 50)])).stops[0]
    assert stop.wait == 0 and stop.delay == 0


def test_empty_route(two_customer):
    sched = simulate_route([], two_customer)
    assert sched.stops == () and sched.return_time == 0 and sched.distance == 0


def test_decode_sorts_by_window_start():
    cost = np.ones((4, 4)) - np.eye(4)
    inst = make_instance(cost, [(10, 100), (5, 100), (0, 100)])
    assert decode([0, 0, 1], inst).routes == ((2, 1), (3,))


def test_decode_single_route_when_capacity_allows(small_generated):
    sol = decode(np.zeros(small_generated.n, dtype=int), small_generated)
    total = small_generated.demand.sum()
    assert (len(sol.routes) == 1) == (total <= small_generated.capacity)


def test_decode_capacity_repair():
    cost = np.ones((4, 4)) - np.eye(4)
    inst = make_instance(cost, [(0, 100), (10, 100), (20, 100)], demand=[30, 30, 30], capacity=60)
    sol = decode([4, 4, 4], inst)
    assert sol.routes == ((1, 2), (3,))


def test_coverage_errors(two_customer):
    with pytest.raises(CoverageError):
        evaluate(Solution([[1]]), two_customer)
    with pytest.raises(CoverageError):
        evaluate(Solution([[1, 2], [2]]), two_customer)
    with pytest.raises(CoverageError):
        evaluate(Solution([[1, 2, 3]]), two_customer)


def test_solution_text_round_trip():
    sol = Solution([[3, 1], [2]])
    assert Solution.from_text(sol.to_text()) == sol
    with pytest.raises(ValueError):
        Solution([[1], []])


def test_encode_decode_round_trip(small_generated):
    rng = np.random.default_rng(0)
    sol = decode(rng.integers(0, 50, 50), small_generated)
    assert decode(sol.encode(), small_generated) == sol


@pytest.mark.parametrize("delay_ref", ["window_start", "window_end"])
def test_random_tiny_instances_against_straight_line_simulator(delay_ref):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        inst = tiny_instance(rng, n)
        perm = rng.permutation(np.arange(1, n + 1))
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(0, n)), replace=False)) if n > 1 else []
        routes = [list(map(int, r)) for r in np.split(perm, cuts) if len(r)]
        a = {c.id: c.a for c in inst.customers}
        b = {c.id: c.b for c in inst.customers}
        s = {c.id: c.service for c in inst.customers}
        expected = simulate_plan(routes, inst.cost.tolist(), a, b, s, delay_ref == "window_end")
        assert tuple(evaluate(Solution(routes), inst, delay_ref)) == expected


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12))
def test_decode_is_total_feasible_and_covering(seed, n):
    rng = np.random.default_rng(seed)
    inst = tiny_instance(rng, n)
    genes = rng.integers(0, n, n)
    sol = decode(genes, inst)
    flat = sorted(c for r in sol.routes for c in r)
    assert flat == list(range(1, n + 1))
    for r in sol.routes:
        assert sum(inst.demand[c] for c in r) <= inst.capacity
        starts = [inst.window_start[c] for c in r]
        assert starts == sorted(starts)
    for ref in ("window_start", "window_end"):
        for r in sol.routes:
            sched = simulate_route(r, inst, ref)
            times = [0.0]
            for stop in sched.stops:
                assert stop.wait >= 0 and stop.delay >= 0 and stop.wait * stop.delay == 0
                times += [stop.arrival, stop.start, stop.end]
            assert times == sorted(times) and sched.return_time >= times[-1]
        z = evaluate(sol, inst, ref)
        assert all(v >= 0 for v in z) and float(z.Z1).is_integer()


@given(seed=st.integers(0, 2**32 - 1))
def test_route_order_does_not_matter(seed):
    rng = np.random.default_rng(seed)
    inst = tiny_instance(rng, 9)
    sol = decode(rng.integers(0, 9, 9), inst)
    shuffled = Solution([sol.routes[i] for i in rng.permutation(len(sol.routes))])
    assert evaluate(shuffled, inst) == evaluate(sol, inst)


@pytest.mark.parametrize("delay_ref", ["window_start", "window_end"])
def test_batch_kernel_matches_reference_path(small_generated, delay_ref):
    rng = np.random.default_rng(7)
    inst = small_generated
    genes = np.vstack([rng.integers(0, inst.n, (40, inst.n)), rng.integers(0, 3, (10, inst.n))])
    F = evaluate_population(genes, inst, delay_ref)
    for g, f in zip(genes, F):
        assert tuple(f) == tuple(evaluate(decode(g, inst), inst, delay_ref))


def test_evaluate_population_shape_check(small_generated):
    with pytest.raises(ValueError):
        evaluate_population(np.zeros((3, 5), dtype=int), small_generated)


def test_dominance_examples():
    assert dominates((1, 2), (2, 2))
    assert not dominates((1, 2), (2, 1)) and not dominates((2, 1), (1, 2))
    assert not dominates((1, 2), (1, 2))


small_vectors = st.tuples(*[st.integers(0, 3)] * 3)


@given(u=small_vectors, v=small_vectors, w=small_vectors)
def test_dominance_is_a_strict_partial_order(u, v, w):
    assert not dominates(u, u)
    assert not (dominates(u, v) and dominates(v, u))
    if dominates(u, v) and dominates(v, w):
        assert dominates(u, w)


def test_pareto_filter_examples():
    assert pareto_filter([(1, 2), (2, 1), (2, 2)]).tolist() == [[1, 2], [2, 1]]
    assert pareto_filter([(3, 4, 5)]).tolist() == [[3, 4, 5]]


@given(hnp.arrays(np.int64, st.tuples(st.integers(1, 40), st.just(4)), elements=st.integers(0, 5)))
def test_pareto_filter_properties(points):
    kept = pareto_filter(points)
    for i in range(len(kept)):
        for j in range(len(kept)):
            assert not dominates(kept[i], kept[j])
    kept_set = {tuple(r) for r in kept}
    for p in points:
        if tuple(p) not in kept_set:
            assert any(dominates(k, p) for k in kept)
    assert kept_set == set(nondominated([tuple(p) for p in points]))
    assert len(kept_set) == len(kept)


def test_nondominated_mask_keeps_duplicates():
    assert nondominated_mask([(1, 1), (1, 1), (2, 2)]).tolist() == [True, True, False]


def test_archive_keeps_a_non_dominated_duplicate_free_set():
    rng = np.random.default_rng(3)
    arc = ParetoArchive(n_genes=2)
    pts = rng.integers(0, 6, size=(300, 5)).astype(float)
    for k, p in enumerate(pts):
        arc.add(p, [k, k], tag=f"p{k}")
    expected = set(nondominated([tuple(p) for p in pts]))
    assert {tuple(r) for r in arc.objectives} == expected
    assert len(arc) == len(expected)
    for f, g, t in zip(arc.objectives, arc.genes, arc.tags):
        assert tuple(pts[g[0]]) == tuple(f) and t == f"p{g[0]}"
    assert pareto_filter(arc.objectives).tolist() == arc.objectives.tolist()
