"""Seeded parameter sweeps over generated instances, CSV output and trend checks."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, replace
from typing import Any, Iterable, Sequence

from .instance import generate_instance
from .model import min_replicas
from .scenario import (
    FixedCost,
    ScenarioError,
    ScenarioSpec,
    load_preset_document,
    scenario_from_json,
)
from .solver import Status, solve_exact

BASE_COLUMNS = ["user_count", "status", "total_cost", "avg_cost_per_unit", "nodes", "wall_time"]


@dataclass(frozen=True)
class SweepRow:
    user_count: int
    status: Status
    total_cost: float | None
    avg_cost_per_unit: float | None
    nodes: int
    wall_time: float


@dataclass(frozen=True)
class GridRow(SweepRow):
    availability: float = 0.0
    service_level: float = 0.0


def _solve_row(spec: ScenarioSpec, user_count: int, time_limit: float | None) -> dict[str, Any]:
    inst = generate_instance(spec, user_count, spec.seed)
    res = solve_exact(inst, time_limit=time_limit)
    cost = res.objective if res.status in (Status.Optimal, Status.Feasible) else None
    avg = None if cost is None else cost / float(inst.demands.sum())
    return dict(user_count=user_count, status=res.status, total_cost=cost,
                avg_cost_per_unit=avg, nodes=res.stats.nodes_explored,
                wall_time=res.stats.wall_time)


def run_cost_sweep(spec: ScenarioSpec, time_limit: float | None = None) -> list[SweepRow]:
    """Solve one generated instance per user count in ``spec.user_range``."""
    spec.check()
    return [SweepRow(**_solve_row(spec, n, time_limit)) for n in spec.user_range.counts()]


def run_availability_sweep(base: ScenarioSpec, availabilities: Sequence[float],
                           service_levels: Sequence[float], user_count: int,
                           time_limit: float | None = None) -> list[GridRow]:
    """One solve per (availability, service level) cell, availability-major."""
    for v in itertools.chain(availabilities, service_levels):
        if not 0.0 < v < 1.0:
            raise ScenarioError(f"grid value {v} must lie strictly in (0,1)")
    rows = []
    for p, l in itertools.product(availabilities, service_levels):
        spec = replace(base, availability=float(p), service_level=float(l)).check()
        rows.append(GridRow(**_solve_row(spec, user_count, time_limit),
                            availability=float(p), service_level=float(l)))
    return rows


# Trend assertions -----------------------------------------------------------------

@dataclass(frozen=True)
class TrendSpec:
    nondecreasing_cost: bool = True
    # When set, feasible rows must cost exactly U * linear_unit_cost.
    linear_unit_cost: float | None = None
    grid_monotone: bool = False


@dataclass(frozen=True)
class TrendViolation:
    check: str
    first: Any
    second: Any
    detail: str

    def __str__(self) -> str:
        return f"{self.check}: {self.first} -> {self.second}: {self.detail}"


def trend_spec_for(spec: ScenarioSpec) -> TrendSpec:
    """Checks implied by a scenario: exact linearity for fixed unit costs."""
    if isinstance(spec.cost_model, FixedCost):
        k = min_replicas(spec.availability, spec.service_level)
        return TrendSpec(linear_unit_cost=spec.demand * spec.cost_model.value * k)
    return TrendSpec()


def _feasible(row: SweepRow) -> bool:
    return row.total_cost is not None


def assert_trends(rows: Sequence[SweepRow], trend: TrendSpec = TrendSpec()) -> list[TrendViolation]:
    out: list[TrendViolation] = []
    if trend.grid_monotone:
        return _grid_violations(rows)
    ordered = sorted(rows, key=lambda r: r.user_count)
    if trend.nondecreasing_cost:
        feas = [r for r in ordered if _feasible(r)]
        for a, b in zip(feas, feas[1:]):
            if b.total_cost < a.total_cost - 1e-9:
                out.append(TrendViolation("nondecreasing_cost", f"U={a.user_count}",
                                          f"U={b.user_count}",
                                          f"cost fell from {a.total_cost} to {b.total_cost}"))
    if trend.linear_unit_cost is not None:
        for r in ordered:
            if not _feasible(r):
                continue
            expected = r.user_count * trend.linear_unit_cost
            if abs(r.total_cost - expected) > 1e-9 * max(1.0, abs(expected)):
                out.append(TrendViolation("linearity", f"U={r.user_count}", f"U={r.user_count}",
                                          f"cost {r.total_cost} != {expected}"))
    return out


def _grid_violations(rows: Sequence[SweepRow]) -> list[TrendViolation]:
    # Infeasible cells count as infinite cost; timed-out cells are skipped.
    def cost(r: GridRow) -> float:
        return r.total_cost if r.total_cost is not None else float("inf")

    cells = [r for r in rows if isinstance(r, GridRow) and r.status != Status.TimedOut]
    out = []
    for l in sorted({r.service_level for r in cells}):
        line = sorted((r for r in cells if r.service_level == l), key=lambda r: r.availability)
        for a, b in zip(line, line[1:]):
            if cost(b) > cost(a) + 1e-9:
                out.append(TrendViolation("nonincreasing_in_availability",
                                          (a.availability, l), (b.availability, l),
                                          f"cost rose from {cost(a)} to {cost(b)}"))
    for p in sorted({r.availability for r in cells}):
        line = sorted((r for r in cells if r.availability == p), key=lambda r: r.service_level)
        for a, b in zip(line, line[1:]):
            if cost(b) < cost(a) - 1e-9:
                out.append(TrendViolation("nondecreasing_in_service_level",
                                          (p, a.service_level), (p, b.service_level),
                                          f"cost fell from {cost(a)} to {cost(b)}"))
    return out


# CSV -----------------------------------------------------------------------------------

def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, Status):
        return v.value
    if isinstance(v, float):
        return f"{v:#.6g}"
    return str(v)


def _row_cells(row: SweepRow) -> list[str]:
    return [_fmt(getattr(row, c)) for c in BASE_COLUMNS]


def emit_csv(rows: Iterable[SweepRow], prefix: Sequence[str] = (),
             prefix_values: Sequence[Sequence[Any]] | None = None) -> str:
    """CSV text for sweep rows in the given order.

    Grid rows get leading ``availability,service_level`` columns. ``prefix``
    names extra leading columns whose per-row values are in ``prefix_values``.
    Reals are printed with six significant digits; absent values are empty.
    """
    rows = list(rows)
    grid = bool(rows) and all(isinstance(r, GridRow) for r in rows)
    header = list(prefix) + (["availability", "service_level"] if grid else []) + BASE_COLUMNS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i, r in enumerate(rows):
        lead = [_fmt(v) for v in prefix_values[i]] if prefix else []
        if grid:
            lead += [_fmt(r.availability), _fmt(r.service_level)]
        writer.writerow(lead + _row_cells(r))
    return buf.getvalue()


# Experiment presets ------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentResult:
    kind: str
    csv: str
    violations: list[TrendViolation]


def run_experiment(name_or_path: str, seed: int | None = None,
                   time_limit: float | None = None) -> ExperimentResult:
    """Run a bundled preset (fig2..fig5) or a preset file.

    Cost-sweep presets list ``scenarios`` and optionally ``replicates``
    (seeds ``seed, seed+1, ...``); the CSV then leads with ``scenario,seed``.
    Grid presets give a base ``scenario`` plus ``availabilities``,
    ``service_levels`` and ``user_count``.
    """
    doc = load_preset_document(name_or_path)
    kind = doc.get("experiment")
    try:
        if kind == "cost_sweep":
            specs = [scenario_from_json(s) for s in doc["scenarios"]]
            replicates = int(doc.get("replicates", 1))
            if replicates < 1:
                raise ScenarioError("replicates must be >= 1")
            rows, labels, violations = [], [], []
            for spec in specs:
                base_seed = spec.seed if seed is None else seed
                for r in range(replicates):
                    s = spec.with_seed(base_seed + r)
                    block = run_cost_sweep(s, time_limit)
                    violations += assert_trends(block, trend_spec_for(s))
                    rows += block
                    labels += [(s.name, s.seed)] * len(block)
            return ExperimentResult(kind, emit_csv(rows, ("scenario", "seed"), labels), violations)
        if kind == "availability_grid":
            base = scenario_from_json(doc["scenario"])
            if seed is not None:
                base = base.with_seed(seed)
            rows = run_availability_sweep(base, [float(v) for v in doc["availabilities"]],
                                          [float(v) for v in doc["service_levels"]],
                                          int(doc["user_count"]), time_limit)
            return ExperimentResult(kind, emit_csv(rows),
                                    assert_trends(rows, TrendSpec(grid_monotone=True)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed experiment preset: {exc!r}") from exc
    raise ScenarioError(f"unknown experiment kind {kind!r}")
