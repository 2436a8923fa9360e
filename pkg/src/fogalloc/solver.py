"""Exact, heuristic and brute-force solvers for MFA instances."""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import kernels
from ._accel import use_numba
from .instance import Instance, require_valid
from .model import EPS, Assignment, total_cost


class Status(str, enum.Enum):
    Optimal = "Optimal"
    Infeasible = "Infeasible"
    Feasible = "Feasible"
    TimedOut = "TimedOut"


class GuardExceeded(ValueError):
    """Brute force refused: too many 0/1 variables."""


@dataclass(frozen=True)
class SolveStats:
    nodes_explored: int = 0
    candidates_generated: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    status: Status
    assignment: Assignment | None = None
    objective: float | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    heuristic: bool = False

    def to_json(self) -> dict[str, Any]:
        pairs = [] if self.assignment is None else [list(p) for p in self.assignment.pairs()]
        out: dict[str, Any] = {
            "status": self.status.value,
            "objective": self.objective,
            "assignment": pairs,
            "stats": {
                "nodes_explored": self.stats.nodes_explored,
                "candidates_generated": self.stats.candidates_generated,
                "wall_time": self.stats.wall_time,
            },
        }
        if self.heuristic:
            out["heuristic"] = True
        return out


@dataclass(frozen=True)
class CandidateSubset:
    user: int
    servers: tuple[int, ...]
    cost: float


# Candidate generation ------------------------------------------------------------

@dataclass(frozen=True)
class _CandidateBlock:
    servers: np.ndarray  # (n, width) int32, padded with -1
    sizes: np.ndarray
    costs: np.ndarray


def _user_key(inst: Instance, u: int) -> tuple:
    usr = inst.users[u]
    return (usr.demand, usr.budget, usr.service_level)


def _candidate_block(inst: Instance, u: int) -> _CandidateBlock:
    usr = inst.users[u]
    fail = 1.0 - inst.availabilities
    srv, sizes, costs = kernels.enum_kernel()(
        np.ascontiguousarray(fail), np.ascontiguousarray(inst.unit_costs),
        float(usr.demand), float(usr.budget), 1.0 - float(usr.service_level),
        int(inst.multicast_bound), EPS)
    if len(costs) == 0:
        return _CandidateBlock(np.full((0, 1), -1, np.int32), sizes, costs)
    width = int(sizes.max())
    srv = srv[:, :width]
    keys = [srv[:, j] for j in range(width - 1, -1, -1)] + [costs]
    order = np.lexsort(keys)
    return _CandidateBlock(np.ascontiguousarray(srv[order]), sizes[order], costs[order])


def _blocks_by_class(inst: Instance) -> tuple[list[int], list[_CandidateBlock]]:
    """Candidate blocks shared by users with identical (demand, budget, level)."""
    class_of: dict[tuple, int] = {}
    cls = []
    blocks: list[_CandidateBlock] = []
    for u in range(inst.n_users):
        key = _user_key(inst, u)
        if key not in class_of:
            class_of[key] = len(blocks)
            blocks.append(_candidate_block(inst, u))
        cls.append(class_of[key])
    return cls, blocks


def enumerate_candidates(inst: Instance, u: int) -> list[CandidateSubset]:
    """Minimal server sets satisfying user ``u``'s QoS, budget and multicast
    bound, sorted by cost then server indices. Empty means ``u`` cannot be
    served at all."""
    if not 0 <= u < inst.n_users:
        raise IndexError(f"user index {u} out of range")
    blk = _candidate_block(inst, u)
    return [
        CandidateSubset(u, tuple(int(s) for s in blk.servers[i, : blk.sizes[i]]), float(blk.costs[i]))
        for i in range(len(blk.costs))
    ]


def branching_order(inst: Instance) -> list[int]:
    """Users by descending demand, ties by index."""
    return sorted(range(inst.n_users), key=lambda u: (-inst.users[u].demand, u))


def lower_bound(inst: Instance) -> float:
    """Sum of each user's cheapest candidate; ``math.inf`` if some user has none.

    Ignores server capacities, so it never exceeds the optimum.
    """
    cls, blocks = _blocks_by_class(inst)
    total = 0.0
    for u in range(inst.n_users):
        blk = blocks[cls[u]]
        if len(blk.costs) == 0:
            return math.inf
        total += float(blk.costs[0])
    return total


# Node expansions per kernel call between time-limit checks.
CHUNK_COMPILED = 200_000
CHUNK_PURE = 5_000


# Exact search ------------------------------------------------------------------------

@dataclass
class _SearchArrays:
    order: list[int]
    demand: np.ndarray
    cstart: np.ndarray
    cend: np.ndarray
    cand_srv: np.ndarray
    cand_size: np.ndarray
    cand_cost: np.ndarray
    same_prev: np.ndarray
    static_rest: np.ndarray
    need_suffix: np.ndarray
    reach_static: np.ndarray
    servers_by_cost: np.ndarray
    n_candidates: int


def _build_search(inst: Instance) -> _SearchArrays | None:
    """Flatten candidate blocks into kernel arrays; None if a user has no candidate."""
    cls, blocks = _blocks_by_class(inst)
    if any(len(b.costs) == 0 for b in blocks):
        return None
    order = branching_order(inst)
    n_pos, n_srv = inst.n_users, inst.n_servers
    width = max(int(b.sizes.max()) for b in blocks)
    offsets, pieces, total = [], [], 0
    for b in blocks:
        offsets.append(total)
        padded = np.full((len(b.costs), width), -1, dtype=np.int32)
        padded[:, : b.servers.shape[1]] = b.servers
        pieces.append(padded)
        total += len(b.costs)
    cand_srv = np.ascontiguousarray(np.vstack(pieces))
    cand_size = np.concatenate([b.sizes for b in blocks]).astype(np.int64)
    cand_cost = np.concatenate([b.costs for b in blocks]).astype(np.float64)

    demand = np.array([inst.users[u].demand for u in order], dtype=np.int64)
    pcls = [cls[u] for u in order]
    cstart = np.array([offsets[c] for c in pcls], dtype=np.int64)
    cend = np.array([offsets[c] + len(blocks[c].costs) for c in pcls], dtype=np.int64)
    same_prev = np.array([q > 0 and pcls[q] == pcls[q - 1] for q in range(n_pos)], dtype=np.bool_)
    cheapest = np.array([blocks[c].costs[0] for c in pcls], dtype=np.float64)
    minsize = np.array([blocks[c].sizes.min() for c in pcls], dtype=np.int64)
    static_rest = np.zeros(n_pos + 1)
    need_suffix = np.zeros(n_pos + 1, dtype=np.int64)
    for q in range(n_pos - 1, -1, -1):
        static_rest[q] = static_rest[q + 1] + cheapest[q]
        need_suffix[q] = need_suffix[q + 1] + demand[q] * minsize[q]
    class_reach = []
    for b in blocks:
        r = np.zeros(n_srv, dtype=np.bool_)
        flat = b.servers[b.servers >= 0]
        r[flat] = True
        class_reach.append(r)
    reach_static = np.array([class_reach[c] for c in pcls], dtype=np.bool_).reshape(n_pos, n_srv)
    servers_by_cost = np.argsort(inst.unit_costs, kind="stable").astype(np.int64)
    return _SearchArrays(order, demand, cstart, cend, cand_srv, cand_size, cand_cost,
                         same_prev, static_rest, need_suffix, reach_static,
                         servers_by_cost, total)


def _assignment_from_choice(inst: Instance, sa: _SearchArrays, choice: np.ndarray) -> Assignment:
    x = np.zeros((inst.n_users, inst.n_servers), dtype=np.uint8)
    for q, u in enumerate(sa.order):
        c = choice[q]
        for s in sa.cand_srv[c, : sa.cand_size[c]]:
            x[u, s] = 1
    return Assignment(x)


def solve_exact(inst: Instance, time_limit: float | None = None,
                node_limit: int | None = None) -> SolveResult:
    """Minimum-cost assignment by depth-first branch and bound.

    Users are fixed in descending-demand order; each branches over its
    minimal candidate sets in (cost, servers) order, so the first optimum met
    is returned and repeated calls give identical assignments. A time or
    node limit ends the search with status TimedOut and the best incumbent.
    """
    require_valid(inst)
    t0 = time.perf_counter()
    sa = _build_search(inst)
    if sa is None:
        n_cand = sum(len(b.costs) for b in _blocks_by_class(inst)[1])
        return SolveResult(Status.Infeasible, stats=SolveStats(0, n_cand, time.perf_counter() - t0))

    n_pos = inst.n_users
    residual = inst.capacities.astype(np.int64).copy()
    choice = np.full(n_pos, -1, dtype=np.int64)
    next_try = np.zeros(n_pos, dtype=np.int64)
    next_try[0] = sa.cstart[0]
    path_cost = np.zeros(n_pos + 1)
    best_choice = np.full(n_pos, -1, dtype=np.int64)
    istate = np.array([0, 0, 0, int(residual.sum())], dtype=np.int64)
    fstate = np.array([np.inf])
    unit_cost = np.ascontiguousarray(inst.unit_costs, dtype=np.float64)

    reach = np.zeros(inst.n_servers, dtype=np.bool_)
    root = kernels._completion_bound(-1, sa.demand, sa.cstart, sa.cend, sa.cand_srv, sa.cand_size,
                                     sa.cand_cost, sa.same_prev, choice, residual,
                                     int(residual.sum()), sa.need_suffix, sa.reach_static,
                                     sa.servers_by_cost, unit_cost, reach)
    if root < 0.0:
        return SolveResult(Status.Infeasible,
                           stats=SolveStats(0, sa.n_candidates, time.perf_counter() - t0))

    kernel = kernels.bnb_kernel()
    chunk = CHUNK_COMPILED if use_numba() else CHUNK_PURE
    timed_out = False
    while True:
        budget = chunk
        if node_limit is not None:
            left = node_limit - int(istate[kernels.I_NODES])
            if left <= 0:
                timed_out = True
                break
            budget = min(budget, left)
        rc = kernel(sa.demand, sa.cstart, sa.cend, sa.cand_srv, sa.cand_size, sa.cand_cost,
                    sa.same_prev, sa.static_rest, sa.need_suffix, sa.reach_static,
                    sa.servers_by_cost, unit_cost, residual, choice, next_try, path_cost,
                    best_choice, istate, fstate, EPS, budget)
        if rc == kernels.FINISHED:
            break
        if time_limit is not None and time.perf_counter() - t0 >= time_limit:
            timed_out = True
            break

    stats = SolveStats(int(istate[kernels.I_NODES]), sa.n_candidates, time.perf_counter() - t0)
    if istate[kernels.I_HAS_INC]:
        a = _assignment_from_choice(inst, sa, best_choice)
        status = Status.TimedOut if timed_out else Status.Optimal
        return SolveResult(status, a, total_cost(inst, a), stats)
    return SolveResult(Status.TimedOut if timed_out else Status.Infeasible, stats=stats)


def solve_greedy(inst: Instance) -> SolveResult:
    """Each user, largest demand first, takes its cheapest candidate that
    still fits. Infeasible here only means the heuristic got stuck."""
    require_valid(inst)
    t0 = time.perf_counter()
    cls, blocks = _blocks_by_class(inst)
    n_cand = sum(len(b.costs) for b in blocks)
    residual = inst.capacities.astype(np.int64).copy()
    x = np.zeros((inst.n_users, inst.n_servers), dtype=np.uint8)
    for u in branching_order(inst):
        blk = blocks[cls[u]]
        d = inst.users[u].demand
        for i in range(len(blk.costs)):
            servers = blk.servers[i, : blk.sizes[i]]
            if np.all(residual[servers] >= d):
                residual[servers] -= d
                x[u, servers] = 1
                break
        else:
            return SolveResult(Status.Infeasible, stats=SolveStats(0, n_cand, time.perf_counter() - t0),
                               heuristic=True)
    a = Assignment(x)
    return SolveResult(Status.Feasible, a, total_cost(inst, a),
                       SolveStats(0, n_cand, time.perf_counter() - t0), heuristic=True)


BRUTEFORCE_MAX_VARS = 20


def solve_bruteforce(inst: Instance, max_vars: int = BRUTEFORCE_MAX_VARS) -> SolveResult:
    """Optimum by scanning all 2**(U*S) assignments. Reference oracle only."""
    require_valid(inst)
    n = inst.n_users * inst.n_servers
    if n > max_vars:
        raise GuardExceeded(f"{n} binary variables exceed the brute-force guard of {max_vars}")
    t0 = time.perf_counter()
    mask, _ = kernels.bruteforce_kernel()(
        inst.n_users, inst.n_servers, np.ascontiguousarray(inst.demands, dtype=np.int64),
        np.ascontiguousarray(inst.budgets), 1.0 - inst.service_levels,
        np.ascontiguousarray(inst.unit_costs), np.ascontiguousarray(inst.capacities),
        np.ascontiguousarray(inst.availabilities), inst.multicast_bound, EPS)
    stats = SolveStats(1 << n, 0, time.perf_counter() - t0)
    if mask < 0:
        return SolveResult(Status.Infeasible, stats=stats)
    bits = (int(mask) >> np.arange(n)) & 1
    a = Assignment(bits.reshape(inst.n_users, inst.n_servers))
    return SolveResult(Status.Optimal, a, total_cost(inst, a), stats)


METHODS = {"exact": solve_exact, "greedy": solve_greedy, "bruteforce": solve_bruteforce}
