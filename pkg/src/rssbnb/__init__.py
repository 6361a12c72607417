"""Optimal (R, s, S) review planning for stochastic lot sizing."""

from .demand import DEFAULT_EPSILON, DemandDistribution, PatternKind, pattern_demands, truncated_pmf
from .instance import Instance, InstanceFormatError, toy_instance
from .sdp import Policy, ResourceLimitError, StructureViolationError, extract_policy, solve_fixed_plan
from .bounds import compute_mc_bounds
from .search import DescentStrategy, bnb_solve, enumerate_baseline
from .guidance import compute_rs_plan
from .simulator import simulate_policy

__all__ = [
    "DEFAULT_EPSILON", "DemandDistribution", "PatternKind", "pattern_demands", "truncated_pmf",
    "Instance", "InstanceFormatError", "toy_instance", "Policy", "ResourceLimitError",
    "StructureViolationError", "extract_policy", "solve_fixed_plan", "compute_mc_bounds",
    "DescentStrategy", "bnb_solve", "enumerate_baseline", "compute_rs_plan", "simulate_policy",
]
