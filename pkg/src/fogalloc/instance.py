"""MFA problem instances: data model, validation, JSON I/O and generators.

An instance is a set of users, each with an indivisible integer demand, a
budget and a required service level, and a set of fog servers, each with a
unit sending cost, an integer capacity and an independent availability
probability. ``multicast_bound`` caps how many servers one user may send to.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .scenario import (
    ExplicitBudget,
    FixedCost,
    NormalCost,
    ScenarioError,
    ScenarioSpec,
    UniformIntCost,
)


class InstanceSyntaxError(ValueError):
    """Malformed instance document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(path)
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class InstanceDomainError(ValueError):
    """Well-formed document whose values break an instance invariant."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class UserSpec:
    demand: int
    budget: float
    service_level: float


@dataclass(frozen=True)
class ServerSpec:
    unit_cost: float
    capacity: int
    availability: float


@dataclass(frozen=True)
class Violation:
    entity: str  # "instance", "server" or "user"
    index: int | None
    field: str
    bound: str
    value: Any

    def sort_key(self):
        return (self.entity, -1 if self.index is None else self.index, self.field)

    def __str__(self) -> str:
        who = self.entity if self.index is None else f"{self.entity}[{self.index}]"
        return f"{who}.{self.field}={self.value!r}: {self.bound}"

    def to_json(self) -> dict[str, Any]:
        return {"entity": self.entity, "index": self.index, "field": self.field,
                "bound": self.bound, "value": self.value}


@dataclass(frozen=True)
class Instance:
    users: tuple[UserSpec, ...]
    servers: tuple[ServerSpec, ...]
    multicast_bound: int

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "servers", tuple(self.servers))

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_servers(self) -> int:
        return len(self.servers)

    # Array views; read-only so the frozen contract holds for them too.
    @cached_property
    def demands(self) -> np.ndarray:
        return _frozen(np.array([u.demand for u in self.users], dtype=np.int64))

    @cached_property
    def budgets(self) -> np.ndarray:
        return _frozen(np.array([u.budget for u in self.users], dtype=np.float64))

    @cached_property
    def service_levels(self) -> np.ndarray:
        return _frozen(np.array([u.service_level for u in self.users], dtype=np.float64))

    @cached_property
    def unit_costs(self) -> np.ndarray:
        return _frozen(np.array([s.unit_cost for s in self.servers], dtype=np.float64))

    @cached_property
    def capacities(self) -> np.ndarray:
        return _frozen(np.array([s.capacity for s in self.servers], dtype=np.int64))

    @cached_property
    def availabilities(self) -> np.ndarray:
        return _frozen(np.array([s.availability for s in self.servers], dtype=np.float64))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def validate(inst: Instance) -> list[Violation]:
    """All invariant violations, sorted by (entity, index, field)."""
    out: list[Violation] = []
    if not inst.users:
        out.append(Violation("instance", None, "users", "at least one user required", 0))
    if not inst.servers:
        out.append(Violation("instance", None, "servers", "at least one server required", 0))
    m = inst.multicast_bound
    if not 1 <= m <= max(len(inst.servers), 1) or (not inst.servers):
        out.append(Violation("instance", None, "multicast_bound",
                             f"must lie in [1, {len(inst.servers)}] (number of servers)", m))
    for i, u in enumerate(inst.users):
        if u.demand < 1:
            out.append(Violation("user", i, "demand", "must be >= 1", u.demand))
        if not u.budget >= 0:
            out.append(Violation("user", i, "budget", "must be >= 0", u.budget))
        if not 0.0 < u.service_level < 1.0:
            out.append(Violation("user", i, "service_level",
                                 "service_level must lie strictly in (0,1)", u.service_level))
    for i, s in enumerate(inst.servers):
        if not s.unit_cost >= 0:
            out.append(Violation("server", i, "unit_cost", "must be >= 0", s.unit_cost))
        if s.capacity < 0:
            out.append(Violation("server", i, "capacity", "must be >= 0", s.capacity))
        if not 0.0 < s.availability < 1.0:
            out.append(Violation("server", i, "availability",
                                 "availability must lie strictly in (0,1)", s.availability))
    out.sort(key=Violation.sort_key)
    return out


def require_valid(inst: Instance) -> Instance:
    problems = validate(inst)
    if problems:
        raise InstanceDomainError(problems)
    return inst


# JSON ------------------------------------------------------------------------

_TOP_KEYS = ("multicast_bound", "users", "servers")
_USER_KEYS = ("demand", "budget", "service_level")
_SERVER_KEYS = ("unit_cost", "capacity", "availability")


def _int_field(obj: dict, key: str, path: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise InstanceSyntaxError(f"expected integer, got {v!r}", f"{path}.{key}")
    return v


def _real_field(obj: dict, key: str, path: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InstanceSyntaxError(f"expected number, got {v!r}", f"{path}.{key}")
    v = float(v)
    if not math.isfinite(v):
        raise InstanceSyntaxError("number must be finite", f"{path}.{key}")
    return v


def _check_keys(obj: Any, expected: Sequence[str], path: str, strict: bool,
                extra_ok: Sequence[str] = ()) -> dict:
    if not isinstance(obj, dict):
        raise InstanceSyntaxError("expected an object", path or "$")
    for key in expected:
        if key not in obj:
            raise InstanceSyntaxError(f"missing key {key!r}", path or "$")
    if strict:
        unknown = sorted(set(obj) - set(expected) - set(extra_ok))
        if unknown:
            raise InstanceSyntaxError(f"unknown key(s) {unknown}", path or "$")
    return obj


def instance_from_json(doc: Any, *, strict: bool = True, check: bool = True,
                       extra_keys: Sequence[str] = ()) -> Instance:
    doc = _check_keys(doc, _TOP_KEYS, "$", strict, extra_keys)
    users_doc, servers_doc = doc["users"], doc["servers"]
    if not isinstance(users_doc, list):
        raise InstanceSyntaxError("expected an array", "$.users")
    if not isinstance(servers_doc, list):
        raise InstanceSyntaxError("expected an array", "$.servers")
    users = []
    for i, u in enumerate(users_doc):
        p = f"$.users[{i}]"
        u = _check_keys(u, _USER_KEYS, p, strict)
        users.append(UserSpec(_int_field(u, "demand", p), _real_field(u, "budget", p),
                              _real_field(u, "service_level", p)))
    servers = []
    for i, s in enumerate(servers_doc):
        p = f"$.servers[{i}]"
        s = _check_keys(s, _SERVER_KEYS, p, strict)
        servers.append(ServerSpec(_real_field(s, "unit_cost", p), _int_field(s, "capacity", p),
                                  _real_field(s, "availability", p)))
    inst = Instance(tuple(users), tuple(servers), _int_field(doc, "multicast_bound", "$"))
    if check:
        require_valid(inst)
    return inst


def parse_instance(text: str, *, strict: bool = True, check: bool = True) -> Instance:
    """Parse the JSON instance format.

    Raises InstanceSyntaxError for malformed documents (unknown keys are
    malformed unless ``strict`` is False) and InstanceDomainError when
    ``check`` is set and an invariant fails.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(exc.msg, line=exc.lineno) from exc
    return instance_from_json(doc, strict=strict, check=check)


def instance_to_json(inst: Instance) -> dict[str, Any]:
    return {
        "multicast_bound": inst.multicast_bound,
        "users": [{"demand": u.demand, "budget": float(u.budget),
                   "service_level": float(u.service_level)} for u in inst.users],
        "servers": [{"unit_cost": float(s.unit_cost), "capacity": s.capacity,
                     "availability": float(s.availability)} for s in inst.servers],
    }


def serialize_instance(inst: Instance) -> str:
    # json renders floats with repr(), the shortest exact round-trip form.
    return json.dumps(instance_to_json(inst), indent=2) + "\n"


# Generators --------------------------------------------------------------------

def _draw_costs(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    cm, n = spec.cost_model, spec.server_count
    if isinstance(cm, FixedCost):
        return np.full(n, float(cm.value))
    if isinstance(cm, UniformIntCost):
        return rng.integers(cm.lo, cm.hi, size=n, endpoint=True).astype(np.float64)
    if isinstance(cm, NormalCost):
        w = rng.normal(cm.mean, cm.std, size=n)
        bad = w <= 0.0
        while bad.any():
            w[bad] = rng.normal(cm.mean, cm.std, size=int(bad.sum()))
            bad = w <= 0.0
        return w
    raise ScenarioError(f"unsupported cost model {cm!r}")


def generate_instance(spec: ScenarioSpec, user_count: int, seed: int | None = None) -> Instance:
    """Draw an instance from ``spec``; same inputs always give the same instance.

    Randomness comes from numpy's PCG64 bit generator seeded with ``seed``
    (``spec.seed`` when omitted). Only server costs are random; capacities,
    demands, availabilities and service levels are homogeneous.
    """
    spec.check()
    if user_count < 1:
        raise ScenarioError("user_count must be >= 1")
    seed = spec.seed if seed is None else seed
    if not 0 <= seed < 2**64:
        raise ScenarioError("seed must be a 64-bit unsigned integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    w = _draw_costs(spec, rng)
    if isinstance(spec.budget_policy, ExplicitBudget):
        budget = float(spec.budget_policy.amount)
    else:
        budget = float(spec.demand * spec.multicast_bound * w.max())
    servers = tuple(ServerSpec(float(c), spec.server_capacity, spec.availability) for c in w)
    users = tuple(UserSpec(spec.demand, budget, spec.service_level) for _ in range(user_count))
    return Instance(users, servers, spec.multicast_bound)


REDUCTION_PROBABILITY = 0.5


def reduce_from_3partition(integers: Sequence[int], bound: int) -> Instance:
    """Build an MFA instance that is feasible iff ``integers`` splits into
    triples each summing to at most ``bound``.

    One zero-cost server of capacity ``bound`` per triple, one user per
    integer, M = 1, and p_s = l_u = 0.5 so any single server meets QoS.
    When four of the integers could share one server, every demand is padded
    by ``bound`` and capacities become ``4 * bound``; that forces exactly
    three users per server without changing which triples fit.
    """
    items = [int(a) for a in integers]
    if not items or len(items) % 3:
        raise ValueError("number of integers must be a positive multiple of 3")
    if bound < 1:
        raise ValueError("bound must be positive")
    if any(a < 1 or a > bound for a in items):
        raise ValueError("integers must lie in [1, bound]")
    m = len(items) // 3
    smallest4 = sorted(items)[:4]
    pad = bound if (m > 1 and sum(smallest4) <= bound) else 0
    capacity = bound + 3 * pad
    q = REDUCTION_PROBABILITY
    users = tuple(UserSpec(a + pad, 0.0, q) for a in items)
    servers = tuple(ServerSpec(0.0, capacity, q) for _ in range(m))
    return Instance(users, servers, 1)
