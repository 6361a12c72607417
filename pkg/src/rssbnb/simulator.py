"""Monte Carlo evaluation of an (R, s, S) policy.

Demand is drawn from the untruncated Poisson. Run ``r`` uses its own
Philox stream keyed by ``(seed, r)``, so any run can be replayed alone and
splitting runs across workers does not change the report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance
from .sdp import Policy


@dataclass(frozen=True, eq=False)
class SimulationReport:
    runs: int
    mean_cost: float
    std_error: float
    costs: np.ndarray | None = None


def run_stream(seed: int, run: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), run]))


def sample_demands(instance: Instance, runs: int, seed: int, first_run: int = 0) -> np.ndarray:
    means = np.asarray(instance.demand_means)
    return np.stack([run_stream(seed, first_run + r).poisson(means) for r in range(runs)])


def policy_costs(instance: Instance, policy: Policy, demands: np.ndarray) -> np.ndarray:
    """Realised cost of every row of ``demands`` (runs x T) under ``policy``."""
    inst = instance
    rules = {t: (s, S) for t, s, S in policy.reviews}
    position = np.full(demands.shape[0], inst.I0, dtype=np.int64)
    total = np.zeros(demands.shape[0])
    for t in range(1, inst.T + 1):
        if t in rules:
            total += inst.W
            s, S = rules[t]
            if s is not None:
                order = position <= s
                Q = np.where(order, S - position, 0)
                total += np.where(order, inst.K + inst.v * Q, 0.0)
                position = position + Q
        position = position - demands[:, t - 1]
        total += inst.h * np.maximum(position, 0) + inst.b * np.maximum(-position, 0)
    return total


def simulate_policy(instance: Instance, policy: Policy, runs: int, seed: int,
                    keep_costs: bool = False) -> SimulationReport:
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if instance.beta != 1:
        raise ValueError("simulation covers full-backlog instances only")
    periods = policy.periods
    if len(set(periods)) != len(periods) or any(not 1 <= t <= instance.T for t in periods):
        raise ValueError(f"policy reviews {periods} do not fit a horizon of {instance.T} periods")
    for t, s, S in policy.reviews:
        if (s is None) != (S is None) or (s is not None and s >= S):
            raise ValueError(f"period {t}: need s < S or no order at all, got s={s}, S={S}")
    costs = policy_costs(instance, policy, sample_demands(instance, runs, seed))
    sd = float(costs.std(ddof=1)) if runs > 1 else 0.0
    return SimulationReport(runs, float(costs.mean()), sd / np.sqrt(runs),
                            costs if keep_costs else None)
