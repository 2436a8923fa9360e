"""Cost-minimal multicast allocation of user demand to unreliable fog servers."""

from .instance import (
    Instance,
    InstanceDomainError,
    InstanceSyntaxError,
    ServerSpec,
    UserSpec,
    generate_instance,
    parse_instance,
    reduce_from_3partition,
    serialize_instance,
    validate,
)
from .model import (
    Assignment,
    FeasibilityReport,
    check_feasible,
    failure_probability,
    log_coefficients,
    min_replicas,
    total_cost,
)
from .scenario import ScenarioSpec
from .solver import (
    SolveResult,
    Status,
    enumerate_candidates,
    lower_bound,
    solve_bruteforce,
    solve_exact,
    solve_greedy,
)

__version__ = "0.1.0"
