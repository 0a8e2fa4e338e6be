"""MOVRPTW problem instances: model, benchmark-style generator and JSON I/O."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

HORIZON = 480

TW_PROFILES: dict[str, tuple[tuple[int, int], ...]] = {
    "tw0": ((0, 480),),
    "tw1": ((0, 160), (160, 320), (320, 480)),
    "tw2": ((0, 130), (175, 305), (350, 480)),
    "tw3": ((0, 100), (190, 290), (350, 480)),
}
TW_PROFILES["tw4"] = TW_PROFILES["tw0"] + TW_PROFILES["tw1"] + TW_PROFILES["tw2"] + TW_PROFILES["tw3"]

CUSTOMER_COUNTS = (50, 150, 250)
DELTAS = (60, 20, 5)
DEMAND_CHOICES = (10, 20, 30)
SERVICE_CHOICES = (10, 20, 30)
GRID_SIZE = 100.0


class InstanceError(ValueError):
    """Raised for malformed instance data or invalid generator settings."""


@dataclass(frozen=True)
class Customer:
    id: int
    demand: float
    a: float
    b: float
    service: float


@dataclass(frozen=True, eq=False)
class Instance:
    """Depot (vertex 0) plus ``n`` customers and a symmetric cost matrix.

    Costs double as travel times: one cost unit is one minute.
    """

    n: int
    customers: tuple[Customer, ...]
    cost: np.ndarray
    capacity: float
    horizon: float = HORIZON
    name: str = ""
    # derived arrays, indexed by customer id (slot 0 is the depot)
    demand: np.ndarray = field(init=False, repr=False)
    window_start: np.ndarray = field(init=False, repr=False)
    window_end: np.ndarray = field(init=False, repr=False)
    service: np.ndarray = field(init=False, repr=False)
    visit_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cost = np.ascontiguousarray(self.cost, dtype=np.float64)
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "customers", tuple(self.customers))
        validate(self)

        def column(attr):
            arr = np.zeros(self.n + 1, dtype=np.float64)
            for c in self.customers:
                arr[c.id] = getattr(c, attr)
            arr.setflags(write=False)
            return arr

        object.__setattr__(self, "demand", column("demand"))
        object.__setattr__(self, "window_start", column("a"))
        object.__setattr__(self, "window_end", column("b"))
        object.__setattr__(self, "service", column("service"))
        # customers sorted by (window start, id): the intra-route visiting order
        ids = np.arange(1, self.n + 1)
        order = ids[np.lexsort((ids, self.window_start[1:]))]
        order.setflags(write=False)
        object.__setattr__(self, "visit_order", order)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and self.customers == other.customers
            and self.capacity == other.capacity
            and self.horizon == other.horizon
            and self.name == other.name
            and np.array_equal(self.cost, other.cost)
        )

    __hash__ = None

    def delay_reference(self, delay_ref: str = "window_start") -> np.ndarray:
        if delay_ref == "window_start":
            return self.window_start
        if delay_ref == "window_end":
            return self.window_end
        raise ValueError(f"delay_ref must be 'window_start' or 'window_end', got {delay_ref!r}")


def validate(inst: Instance) -> None:
    n = inst.n
    if n < 1:
        raise InstanceError("n: must be >= 1")
    if len(inst.customers) != n:
        raise InstanceError(f"customers: expected {n} entries, found {len(inst.customers)}")
    if inst.cost.shape != (n + 1, n + 1):
        raise InstanceError(
            f"cost: dimension error, expected {n + 1}x{n + 1}, found {'x'.join(map(str, inst.cost.shape))}"
        )
    if not np.all(np.isfinite(inst.cost)) or np.any(inst.cost < 0):
        raise InstanceError("cost: entries must be finite and non-negative")
    if np.any(np.diag(inst.cost) != 0):
        raise InstanceError("cost: diagonal must be zero")
    ids = sorted(c.id for c in inst.customers)
    if ids != list(range(1, n + 1)):
        raise InstanceError("customers: ids must be exactly 1..n")
    for k, c in enumerate(inst.customers):
        where = f"customers[{k}] (id {c.id})"
        if not c.demand > 0:
            raise InstanceError(f"{where}.demand: must be > 0")
        if c.service < 0:
            raise InstanceError(f"{where}.service: must be >= 0")
        if not 0 <= c.a <= c.b <= inst.horizon:
            raise InstanceError(f"{where}: window invariant 0 <= a <= b <= horizon violated ({c.a}, {c.b})")
    max_demand = max(c.demand for c in inst.customers)
    if inst.capacity < max_demand:
        raise InstanceError(f"capacity: {inst.capacity} is below the largest demand {max_demand}")


def compute_capacity(demands: Sequence[float], delta: float) -> float:
    """Vehicle capacity ``Q = D_max + delta/100 * (D_sum - D_max)``."""
    if len(demands) == 0:
        raise InstanceError("demands: empty list")
    if any(d <= 0 for d in demands):
        raise InstanceError("demands: all demands must be > 0")
    largest = max(demands)
    total = sum(demands)
    return largest + delta / 100 * (total - largest)


@dataclass(frozen=True)
class GeneratorSpec:
    n: int = 50
    tw_profile: str = "tw4"
    delta: float = 60
    seed: int = 0
    demand_choices: tuple = DEMAND_CHOICES
    service_choices: tuple = SERVICE_CHOICES
    custom: bool = False

    def __post_init__(self):
        if self.tw_profile not in TW_PROFILES:
            raise InstanceError(f"tw_profile: must be one of {sorted(TW_PROFILES)}, got {self.tw_profile!r}")
        if self.custom:
            if self.n < 1:
                raise InstanceError("n: must be >= 1")
            if not 0 < self.delta <= 100:
                raise InstanceError("delta: must be in (0, 100]")
            return
        if self.n not in CUSTOMER_COUNTS:
            raise InstanceError(f"n: must be one of {CUSTOMER_COUNTS} (or set custom), got {self.n}")
        if self.delta not in DELTAS:
            raise InstanceError(f"delta: must be one of {DELTAS} (or set custom), got {self.delta}")
        if tuple(self.demand_choices) != DEMAND_CHOICES or tuple(self.service_choices) != SERVICE_CHOICES:
            raise InstanceError("demand/service choices are fixed unless custom is set")

    @property
    def label(self) -> str:
        return f"{self.n}-d{self.delta:g}-{self.tw_profile}-s{self.seed}"


def generate_instance(spec: GeneratorSpec) -> Instance:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    coords = np.empty((n + 1, 2))
    coords[0] = GRID_SIZE / 2
    coords[1:] = rng.uniform(0.0, GRID_SIZE, size=(n, 2))
    diff = coords[:, None, :] - coords[None, :, :]
    cost = np.round(np.sqrt((diff**2).sum(axis=-1)), 2)
    np.fill_diagonal(cost, 0.0)

    demands = rng.choice(np.asarray(spec.demand_choices), size=n)
    services = rng.choice(np.asarray(spec.service_choices), size=n)
    windows = TW_PROFILES[spec.tw_profile]
    picks = rng.integers(0, len(windows), size=n)

    customers = tuple(
        Customer(
            id=i + 1,
            demand=float(demands[i]),
            a=float(windows[picks[i]][0]),
            b=float(windows[picks[i]][1]),
            service=float(services[i]),
        )
        for i in range(n)
    )
    capacity = compute_capacity([c.demand for c in customers], spec.delta)
    return Instance(n=n, customers=customers, cost=cost, capacity=capacity, horizon=HORIZON, name=spec.label)


def _number(x: float):
    x = float(x)
    return int(x) if x.is_integer() else x


def instance_to_dict(inst: Instance) -> dict:
    doc = {
        "n": inst.n,
        "horizon": _number(inst.horizon),
        "capacity": _number(inst.capacity),
        "customers": [
            {"id": c.id, "demand": _number(c.demand), "a": _number(c.a), "b": _number(c.b), "service": _number(c.service)}
            for c in inst.customers
        ],
        "cost": [[_number(v) for v in row] for row in inst.cost],
    }
    if inst.name:
        doc["name"] = inst.name
    return doc


def write_instance(inst: Instance, path) -> None:
    doc = instance_to_dict(inst)
    lines = ["{"]
    for key in ("name", "n", "horizon", "capacity"):
        if key in doc:
            lines.append(f"  {json.dumps(key)}: {json.dumps(doc[key])},")
    lines.append('  "customers": [')
    lines.append(",\n".join("    " + json.dumps(c) for c in doc["customers"]))
    lines.append("  ],")
    lines.append('  "cost": [')
    lines.append(",\n".join("    " + json.dumps(row) for row in doc["cost"]))
    lines.append("  ]")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceError(f"{where}.{key}: missing field")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"{where}.{key}: expected a number, got {value!r}")
    return value


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("document: expected a JSON object")
    n = _field(doc, "n", "instance")
    if not isinstance(n, int):
        raise InstanceError("instance.n: expected an integer")
    capacity = _field(doc, "capacity", "instance")
    horizon = doc.get("horizon", HORIZON)
    raw_customers = doc.get("customers")
    if not isinstance(raw_customers, list):
        raise InstanceError("instance.customers: missing or not a list")
    customers = []
    for k, c in enumerate(raw_customers):
        where = f"customers[{k}]"
        if not isinstance(c, dict):
            raise InstanceError(f"{where}: expected an object")
        cid = _field(c, "id", where)
        if not isinstance(cid, int):
            raise InstanceError(f"{where}.id: expected an integer")
        customers.append(
            Customer(
                id=cid,
                demand=float(_field(c, "demand", where)),
                a=float(_field(c, "a", where)),
                b=float(_field(c, "b", where)),
                service=float(_field(c, "service", where)),
            )
        )
    rows = doc.get("cost")
    if not isinstance(rows, list) or len(rows) != n + 1:
        found = len(rows) if isinstance(rows, list) else "none"
        raise InstanceError(f"cost: dimension error, expected {n + 1} rows, found {found}")
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n + 1:
            found = len(row) if isinstance(row, list) else "none"
            raise InstanceError(f"cost[{r}]: dimension error, expected {n + 1} columns, found {found}")
    try:
        cost = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"cost: non-numeric entry ({exc})") from None
    return Instance(
        n=n,
        customers=tuple(customers),
        cost=cost,
        capacity=float(capacity),
        horizon=float(horizon),
        name=str(doc.get("name", "")),
    )


def read_instance(path) -> Instance:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    try:
        return instance_from_dict(doc)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None
