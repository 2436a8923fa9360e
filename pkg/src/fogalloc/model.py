"""Objective and constraint evaluation for a fixed assignment."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .instance import Instance

EPS = 1e-9


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Assignment:
    """Binary user x server matrix; ``x[u, s] == 1`` when u sends to s."""

    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=np.uint8)
        if x.ndim != 2 or not np.all((x == 0) | (x == 1)):
            raise ValueError("assignment must be a 2-D 0/1 matrix")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @classmethod
    def zeros(cls, inst: Instance) -> "Assignment":
        return cls(np.zeros((inst.n_users, inst.n_servers), dtype=np.uint8))

    @classmethod
    def from_pairs(cls, inst: Instance, pairs: Iterable[tuple[int, int]]) -> "Assignment":
        x = np.zeros((inst.n_users, inst.n_servers), dtype=np.uint8)
        for u, s in pairs:
            x[u, s] = 1
        return cls(x)

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(u), int(s)) for u, s in zip(*np.nonzero(self.x))]

    def servers_of(self, u: int) -> list[int]:
        return [int(s) for s in np.flatnonzero(self.x[u])]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Assignment) and np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash((self.x.shape, self.x.tobytes()))


def _matrix(inst: Instance, a: Assignment | np.ndarray) -> np.ndarray:
    x = a.x if isinstance(a, Assignment) else np.asarray(a)
    if x.shape != (inst.n_users, inst.n_servers):
        raise DimensionError(f"assignment shape {x.shape} does not match instance "
                             f"({inst.n_users}, {inst.n_servers})")
    return x


def total_cost(inst: Instance, a: Assignment | np.ndarray) -> float:
    x = _matrix(inst, a).astype(np.float64)
    return float(np.sum(inst.demands[:, None] * inst.unit_costs[None, :] * x))


def failure_probability(inst: Instance, a: Assignment | np.ndarray, u: int) -> float:
    """Probability that none of the servers ``u`` sends to is available."""
    x = _matrix(inst, a)
    if not 0 <= u < inst.n_users:
        raise IndexError(f"user index {u} out of range")
    prob = 1.0
    for s in np.flatnonzero(x[u]):
        prob *= 1.0 - inst.availabilities[s]
    return prob


class ConstraintKind(enum.IntEnum):
    MulticastBound = 0
    Budget = 1
    Capacity = 2
    QoS = 3


@dataclass(frozen=True)
class ConstraintViolation:
    kind: ConstraintKind
    index: int
    lhs: float
    rhs: float

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.name, "index": self.index, "lhs": self.lhs, "rhs": self.rhs}


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[ConstraintViolation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.feasible

    def to_json(self) -> list[dict[str, Any]]:
        return [v.to_json() for v in self.violations]


def check_feasible(inst: Instance, a: Assignment | np.ndarray) -> FeasibilityReport:
    x = _matrix(inst, a)
    d = inst.demands
    found: list[ConstraintViolation] = []
    counts = x.sum(axis=1)
    for u in range(inst.n_users):
        if counts[u] > inst.multicast_bound:
            found.append(ConstraintViolation(ConstraintKind.MulticastBound, u,
                                             float(counts[u]), float(inst.multicast_bound)))
        spend = float(np.sum(d[u] * inst.unit_costs * x[u]))
        if spend > inst.budgets[u] + EPS:
            found.append(ConstraintViolation(ConstraintKind.Budget, u, spend, float(inst.budgets[u])))
        fail = failure_probability(inst, x, u)
        allowed = 1.0 - float(inst.service_levels[u])
        if fail > allowed + EPS:
            found.append(ConstraintViolation(ConstraintKind.QoS, u, fail, allowed))
    # integer loads, compared exactly
    loads = (d[:, None] * x.astype(np.int64)).sum(axis=0)
    for s in range(inst.n_servers):
        if loads[s] > inst.capacities[s]:
            found.append(ConstraintViolation(ConstraintKind.Capacity, s,
                                             float(loads[s]), float(inst.capacities[s])))
    found.sort(key=lambda v: (v.kind, v.index))
    return FeasibilityReport(tuple(found))


def log_coefficients(inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    """ln(1 - p_s) per server and ln(1 - l_u) per user: the linear QoS form."""
    return np.log1p(-inst.availabilities), np.log1p(-inst.service_levels)


def qos_satisfied(inst: Instance, a: Assignment | np.ndarray, u: int) -> bool:
    return failure_probability(inst, a, u) <= 1.0 - inst.service_levels[u] + EPS


def qos_satisfied_log(inst: Instance, a: Assignment | np.ndarray, u: int) -> bool:
    # Used for pruning only; the product form is authoritative on ties.
    x = _matrix(inst, a)
    coef, rhs = log_coefficients(inst)
    return float(np.sum(coef * x[u])) <= rhs[u] + EPS


def min_replicas(p: float, l: float) -> int:
    """Smallest k >= 1 with (1 - p)**k <= 1 - l (within EPS).

    Never unreachable for p, l inside (0, 1); callers cap k by the number of
    servers and the multicast bound themselves.
    """
    if not (0.0 < p < 1.0 and 0.0 < l < 1.0):
        raise ValueError("p and l must lie strictly in (0,1)")
    target = 1.0 - l
    k, fail = 1, 1.0 - p
    while fail > target + EPS:
        k += 1
        fail *= 1.0 - p
    return k


def replicas_or_none(p: float, l: float, limit: int) -> int | None:
    k = min_replicas(p, l)
    return k if k <= limit else None


__all__ = [
    "EPS", "Assignment", "ConstraintKind", "ConstraintViolation", "DimensionError",
    "FeasibilityReport", "check_feasible", "failure_probability", "log_coefficients",
    "min_replicas", "qos_satisfied", "qos_satisfied_log", "replicas_or_none", "total_cost",
]
