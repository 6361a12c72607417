"""Depth-first branch-and-bound over review plans, and exhaustive enumeration.

The root stands for period T+1 with a zero cost-to-go. A node at depth
``l`` fixes the review flag of period ``T-l+1`` and computes that single
SDP stage from its parent's. Leaves carry the expected cost of a full
plan. An internal node for period t is pruned, skipping its ``2**t - 2``
descendants, when

    min_y MC_{t-1}(y) + E[C_t(y - d_{t-1})] >= incumbent

where y is the position after ordering in period t-1.
Without bounds the test is ``min_I C_t(I) >= incumbent``.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bounds import BoundTable, compute_mc_bounds, prefix_minima
from .instance import Instance
from .sdp import (Policy, ResourceLimitError, Stage, ValueFunction, extract_policy,
                  expected_next, post_order_cost, prepare, solve_fixed_plan,
                  solve_stage)

log = logging.getLogger(__name__)

BASELINE_CAP = 20
BASELINE_WARN = 14


@dataclass(frozen=True)
class DescentStrategy:
    """Order in which the two children of a node are explored.

    ``deterministic`` tries review=1 first unless ``one_first`` is false.
    ``randomized`` shuffles each branching with ``seed``. ``guided`` follows
    ``plan`` down to the first leaf and is randomized afterwards.
    """

    kind: str = "deterministic"
    one_first: bool = True
    seed: int = 0
    plan: tuple[int, ...] | None = None

    @classmethod
    def deterministic(cls, one_first: bool = True) -> "DescentStrategy":
        return cls("deterministic", one_first=one_first)

    @classmethod
    def randomized(cls, seed: int) -> "DescentStrategy":
        return cls("randomized", seed=seed)

    @classmethod
    def guided(cls, plan: Sequence[int], seed: int = 0) -> "DescentStrategy":
        return cls("guided", seed=seed, plan=tuple(int(g) for g in plan))


@dataclass
class NodeRecord:
    period: int
    suffix: tuple[int, ...]
    stage_min: float
    bound: float | None = None
    pruned: bool = False
    leaf_cost: float | None = None
    improved: bool = False


@dataclass
class SearchStats:
    T: int
    nodes_computed: int = 0
    nodes_pruned: int = 0
    pruned_children: int = 0
    incumbent_trace: list[tuple[tuple[int, ...], float]] = field(default_factory=list)
    nodes: list[NodeRecord] = field(default_factory=list)

    @property
    def total_nodes(self) -> int:
        return 2 ** (self.T + 1) - 2

    @property
    def pruning_pct_visited(self) -> float:
        """Pruned children over everything the search touched, in percent."""
        seen = self.nodes_computed + self.pruned_children
        return 100.0 * self.pruned_children / seen if seen else 0.0

    @property
    def pruning_pct_fulltree(self) -> float:
        return 100.0 * self.nodes_pruned / self.total_nodes


@dataclass
class BnBResult:
    plan: tuple[int, ...]
    cost: float
    policy: Policy | None
    stats: SearchStats
    value_function: ValueFunction | None = None


def node_bound_check(stage_cost: np.ndarray, mc_row: np.ndarray | None, incumbent: float) -> bool:
    if not np.isfinite(incumbent):
        return False
    total = stage_cost if mc_row is None else stage_cost + mc_row
    return bool(total.min() >= incumbent)


def bnb_solve(instance: Instance, strategy: DescentStrategy | None = None,
              use_mc_bounds: bool = True, record_nodes: bool = False,
              bounds: BoundTable | None = None,
              stage_solver: Callable[..., Stage] = solve_stage,
              pairing: str = "expected") -> BnBResult:
    """Branch-and-bound over review plans.

    ``pairing`` selects how a bound row meets the cost-to-go at a node for
    period t: ``"expected"`` carries C_t through period t-1's demand before
    adding MC_{t-1}; ``"closing"`` adds to C_t(I) the least MC_{t-1}(j) over
    the levels j that can carry into I (j >= I under full backlog), a
    weaker test. ``stage_solver`` exists for instrumentation.
    """
    if pairing not in ("expected", "closing"):
        raise ValueError(f"unknown pairing {pairing!r}")
    strategy = strategy or DescentStrategy()
    model = prepare(instance)
    if bounds is None and use_mc_bounds:
        bounds = compute_mc_bounds(instance, model)
    T = instance.T
    stats = SearchStats(T)
    rng = random.Random(strategy.seed)
    best = {"cost": np.inf, "plan": None, "stages": None}
    path: list[Stage] = []

    def children(t: int, on_guide: bool) -> tuple[tuple[int, bool], ...]:
        # branch on the review flag of period t
        if strategy.kind == "guided" and on_guide:
            g = strategy.plan[t - 1]
            return (g, True), (1 - g, False)
        if strategy.kind == "deterministic":
            order = (1, 0) if strategy.one_first else (0, 1)
        else:
            order = (1, 0) if rng.random() < 0.5 else (0, 1)
        return tuple((g, False) for g in order)

    def visit(t: int, review: int, post: np.ndarray, suffix: tuple[int, ...], on_guide: bool):
        stage = stage_solver(model, t, None, bool(review), post_cost=post)
        stats.nodes_computed += 1
        suffix = (review,) + suffix
        path.append(stage)
        rec = NodeRecord(t, suffix, float(stage.cost.min())) if record_nodes else None
        if rec:
            stats.nodes.append(rec)
        if t == 1:
            cost = float(stage.cost[model.i0_index])
            if rec:
                rec.leaf_cost = cost
            if cost < best["cost"]:
                best.update(cost=cost, plan=suffix, stages=tuple(reversed(path)))
                stats.incumbent_trace.append((suffix, cost))
                if rec:
                    rec.improved = True
        else:
            carried = expected_next(model, t - 1, stage.cost)
            child_post = model.period_cost[t - 2] + carried
            if use_mc_bounds and pairing == "expected":
                lhs, row = carried, bounds.row(t - 1)
            elif use_mc_bounds:
                lhs, row = stage.cost, prefix_minima(bounds.row(t - 1))[1][bounds.carry]
            else:
                lhs, row = stage.cost, None
            if rec:
                rec.bound = float(lhs.min() if row is None else (lhs + row).min())
            if node_bound_check(lhs, row, best["cost"]):
                stats.nodes_pruned += 2 ** t - 2
                stats.pruned_children += 2
                if rec:
                    rec.pruned = True
            else:
                for g, guide in children(t - 1, on_guide):
                    visit(t - 1, g, child_post, suffix, guide)
        path.pop()

    root_post = post_order_cost(model, T, np.zeros(model.grid.size))
    for g, guide in children(T, True):
        visit(T, g, root_post, (), guide)

    vf = ValueFunction(model.grid, best["plan"], best["stages"])
    policy = extract_policy(vf) if instance.beta == 1 else None
    return BnBResult(best["plan"], best["cost"], policy, stats, vf)


@dataclass
class BaselineResult:
    plan: tuple[int, ...]
    cost: float
    all_costs: dict[tuple[int, ...], float]


def enumerate_baseline(instance: Instance, cap: int = BASELINE_CAP) -> BaselineResult:
    """Solve the SDP of every one of the 2**T review plans."""
    T = instance.T
    if T > cap:
        raise ResourceLimitError(f"exhaustive search over 2**{T} plans exceeds the cap T <= {cap}")
    if T > BASELINE_WARN:
        log.warning("exhaustive search over %d plans; this will take a long time", 2**T)
    model = prepare(instance)
    costs = {}
    for plan in itertools.product((0, 1), repeat=T):
        costs[plan] = solve_fixed_plan(instance, plan, model=model)[1]
    best = min(costs, key=costs.__getitem__)
    return BaselineResult(best, costs[best], costs)
