"""Parametric scenario descriptions used by the generator and the sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Union


class ScenarioError(ValueError):
    """Invalid scenario parameters or an unreadable scenario/preset file."""


@dataclass(frozen=True)
class FixedCost:
    value: float

    def describe(self) -> str:
        return f"fixed({self.value:g})"


@dataclass(frozen=True)
class UniformIntCost:
    lo: int
    hi: int

    def describe(self) -> str:
        return f"uniform_int({self.lo},{self.hi})"


@dataclass(frozen=True)
class NormalCost:
    mean: float
    std: float

    def describe(self) -> str:
        return f"normal({self.mean:g},{self.std:g})"


CostModel = Union[FixedCost, UniformIntCost, NormalCost]


@dataclass(frozen=True)
class NonBindingBudget:
    """B_u = d_u * M * max_s w_s, large enough never to bind."""


@dataclass(frozen=True)
class ExplicitBudget:
    amount: float


BudgetPolicy = Union[NonBindingBudget, ExplicitBudget]


@dataclass(frozen=True)
class UserRange:
    start: int
    stop: int
    step: int = 1

    def counts(self) -> list[int]:
        return list(range(self.start, self.stop + 1, self.step))


@dataclass(frozen=True)
class ScenarioSpec:
    server_count: int
    server_capacity: int
    demand: int
    cost_model: CostModel
    availability: float
    service_level: float
    multicast_bound: int
    budget_policy: BudgetPolicy = field(default_factory=NonBindingBudget)
    user_range: UserRange = UserRange(1, 1, 1)
    seed: int = 42
    name: str = "scenario"

    def problems(self) -> list[str]:
        out = []
        if self.server_count < 1:
            out.append("server_count must be >= 1")
        if self.server_capacity < 0:
            out.append("server_capacity must be >= 0")
        if self.demand < 1:
            out.append("demand must be >= 1")
        if not 0.0 < self.availability < 1.0:
            out.append("availability must lie strictly in (0,1)")
        if not 0.0 < self.service_level < 1.0:
            out.append("service_level must lie strictly in (0,1)")
        if not 1 <= self.multicast_bound <= self.server_count:
            out.append("multicast_bound must lie in [1, server_count]")
        cm = self.cost_model
        if isinstance(cm, FixedCost) and cm.value < 0:
            out.append("fixed cost must be >= 0")
        if isinstance(cm, UniformIntCost) and (cm.lo > cm.hi or cm.lo < 0):
            out.append("uniform_int requires 0 <= lo <= hi")
        if isinstance(cm, NormalCost) and cm.std < 0:
            out.append("normal std must be >= 0")
        if isinstance(cm, NormalCost) and cm.std == 0 and cm.mean <= 0:
            out.append("normal with std 0 needs a positive mean")
        if isinstance(self.budget_policy, ExplicitBudget) and self.budget_policy.amount < 0:
            out.append("explicit budget must be >= 0")
        if self.user_range.step < 1:
            out.append("user_range step must be >= 1")
        if self.user_range.start < 1:
            out.append("user_range start must be >= 1")
        if not 0 <= self.seed < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        return out

    def check(self) -> "ScenarioSpec":
        problems = self.problems()
        if problems:
            raise ScenarioError("; ".join(problems))
        return self

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return replace(self, seed=seed)


# JSON dialect --------------------------------------------------------------

def _cost_from_json(obj: dict[str, Any]) -> CostModel:
    kind = obj.get("kind")
    if kind == "fixed":
        return FixedCost(float(obj["value"]))
    if kind == "uniform_int":
        return UniformIntCost(int(obj["lo"]), int(obj["hi"]))
    if kind == "normal":
        return NormalCost(float(obj["mean"]), float(obj["std"]))
    raise ScenarioError(f"unknown cost model kind {kind!r}")


def _cost_to_json(cm: CostModel) -> dict[str, Any]:
    if isinstance(cm, FixedCost):
        return {"kind": "fixed", "value": cm.value}
    if isinstance(cm, UniformIntCost):
        return {"kind": "uniform_int", "lo": cm.lo, "hi": cm.hi}
    return {"kind": "normal", "mean": cm.mean, "std": cm.std}


def scenario_from_json(obj: dict[str, Any]) -> ScenarioSpec:
    try:
        budget = obj.get("budget_policy", {"kind": "non_binding"})
        if budget.get("kind") == "explicit":
            policy: BudgetPolicy = ExplicitBudget(float(budget["amount"]))
        elif budget.get("kind") == "non_binding":
            policy = NonBindingBudget()
        else:
            raise ScenarioError(f"unknown budget policy {budget.get('kind')!r}")
        ur = obj.get("user_range", {"from": 1, "to": 1, "step": 1})
        spec = ScenarioSpec(
            server_count=int(obj["server_count"]),
            server_capacity=int(obj["server_capacity"]),
            demand=int(obj["demand"]),
            cost_model=_cost_from_json(obj["cost_model"]),
            availability=float(obj["availability"]),
            service_level=float(obj["service_level"]),
            multicast_bound=int(obj["multicast_bound"]),
            budget_policy=policy,
            user_range=UserRange(int(ur["from"]), int(ur["to"]), int(ur.get("step", 1))),
            seed=int(obj.get("seed", 42)),
            name=str(obj.get("name", "scenario")),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc
    return spec.check()


def scenario_to_json(spec: ScenarioSpec) -> dict[str, Any]:
    if isinstance(spec.budget_policy, ExplicitBudget):
        budget = {"kind": "explicit", "amount": spec.budget_policy.amount}
    else:
        budget = {"kind": "non_binding"}
    return {
        "name": spec.name,
        "server_count": spec.server_count,
        "server_capacity": spec.server_capacity,
        "demand": spec.demand,
        "cost_model": _cost_to_json(spec.cost_model),
        "availability": spec.availability,
        "service_level": spec.service_level,
        "multicast_bound": spec.multicast_bound,
        "budget_policy": budget,
        "user_range": {"from": spec.user_range.start, "to": spec.user_range.stop,
                       "step": spec.user_range.step},
        "seed": spec.seed,
    }


# Presets ---------------------------------------------------------------------

def preset_names() -> list[str]:
    root = resources.files("fogalloc") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset_document(name_or_path: str) -> dict[str, Any]:
    """Load a bundled preset by name, or any JSON file by path."""
    if name_or_path in preset_names():
        text = (resources.files("fogalloc") / "presets" / f"{name_or_path}.json").read_text("utf-8")
    else:
        path = Path(name_or_path)
        if not path.is_file():
            raise ScenarioError(f"unknown preset or missing file: {name_or_path}")
        try:
            text = path.read_text("utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{name_or_path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{name_or_path}: top level must be an object")
    return doc


def load_scenario(name_or_path: str) -> ScenarioSpec:
    doc = load_preset_document(name_or_path)
    if "scenario" not in doc:
        raise ScenarioError(f"{name_or_path}: no 'scenario' key")
    return scenario_from_json(doc["scenario"])
