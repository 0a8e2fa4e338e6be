import math
import os

import numpy as np
import pytest
from hypothesis import settings

from goalvrp.instance import Customer, GeneratorSpec, Instance, generate_instance

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def make_instance(cost, windows, demand=None, service=None, capacity=None, name="hand"):
    n = len(windows)
    demand = demand or [10] * n
    service = service or [10] * n
    customers = [Customer(i + 1, demand[i], windows[i][0], windows[i][1], service[i]) for i in range(n)]
    cap = capacity if capacity is not None else float(sum(demand))
    return Instance(n=n, customers=tuple(customers), cost=np.asarray(cost, dtype=float), capacity=cap, name=name)


def tiny_instance(rng, n):
    """Integer-valued instance so every schedule sum is exact in floating point."""
    pts = rng.integers(0, 30, size=(n + 1, 2))
    cost = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=-1)  # Manhattan: symmetric, metric
    windows = []
    for _ in range(n):
        a = int(rng.integers(0, 100))
        windows.append((a, a + int(rng.integers(0, 60))))
    demand = [int(v) for v in rng.integers(1, 10, n)]
    service = [int(v) for v in rng.integers(0, 15, n)]
    return make_instance(cost, windows, demand, service, capacity=float(max(demand) + rng.integers(0, 20)))


@pytest.fixture
def two_customer():
    """Depot-1-2 example: c01=10, c12=15, c20=20, service 10, windows [0,100] and [50,100]."""
    cost = [[0, 10, 20], [10, 0, 15], [20, 15, 0]]
    return make_instance(cost, [(0, 100), (50, 100)])


def arc_instance():
    """Five customers on a circle through the depot, window starts increasing
    along the circle, so every route's shortest order is its window order.
    Demands force at least two vehicles."""
    angles = [math.pi / 2 + k * math.pi / 3 for k in range(6)]
    pts = [(50 + 40 * math.cos(t), 50 + 40 * math.sin(t)) for t in angles]
    cost = [[math.dist(p, q) for q in pts] for p in pts]
    windows = [(20 * k, 400) for k in range(1, 6)]
    return make_instance(cost, windows, demand=[10, 20, 30, 20, 10], service=[10] * 5, capacity=50, name="arc5")


@pytest.fixture(scope="session")
def arc5():
    return arc_instance()


@pytest.fixture(scope="session")
def small_generated():
    return generate_instance(GeneratorSpec(50, "tw4", 60, 1))


@pytest.fixture(scope="session")
def arc5_optima(arc5):
    """(min Z1, min Z2) over every capacity-feasible plan, by full enumeration."""
    from oracles import exhaustive_plans, simulate_plan

    a = {c.id: c.a for c in arc5.customers}
    b = {c.id: c.b for c in arc5.customers}
    s = {c.id: c.service for c in arc5.customers}
    d = {c.id: c.demand for c in arc5.customers}
    cost = arc5.cost.tolist()
    best_z1 = best_z2 = math.inf
    best_z2_vector = None
    for plan in exhaustive_plans(arc5.n, d, arc5.capacity):
        z = simulate_plan(plan, cost, a, b, s)
        best_z1 = min(best_z1, z[0])
        if z[1] < best_z2:
            best_z2, best_z2_vector = z[1], z
    return best_z1, best_z2, best_z2_vector


_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker:
        item.user_properties.append(("criterion", marker.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        number, title = props["criterion"]
        _CRITERIA[number] = (title, "PASS" if report.passed else "FAIL", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}" + (f" [{detail}]" if detail else ""))
