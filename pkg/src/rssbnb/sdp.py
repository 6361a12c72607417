"""Stochastic dynamic program for a fixed review plan.

Inventory lives on an integer grid ``i_min..i_max``. A stage maps the
cost-to-go of period ``t+1`` to that of period ``t``; at a review period
the decision is the order quantity, elsewhere it is forced to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .instance import Instance

DEFAULT_GRID_CAP = 10**6


class ResourceLimitError(RuntimeError):
    pass


class StructureViolationError(RuntimeError):
    """An action table that is not of (s, S) form."""


@dataclass(frozen=True)
class InventoryGrid:
    i_min: int
    i_max: int

    @property
    def size(self) -> int:
        return self.i_max - self.i_min + 1

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1)

    def index(self, level: int) -> int:
        if not self.i_min <= level <= self.i_max:
            raise IndexError(f"level {level} outside grid [{self.i_min}, {self.i_max}]")
        return level - self.i_min


def build_grid(instance: Instance, cap: int = DEFAULT_GRID_CAP) -> InventoryGrid:
    """Grid covering every level reachable under any plan.

    Ordering above the total truncated demand of all periods never helps,
    and the lowest reachable level is ``min(0, I0)`` minus that same total.
    """
    total = sum(d.support_max for d in instance.demands)
    i_min = min(0, instance.I0) - total
    i_max = max(instance.I0, 0) + total
    grid = InventoryGrid(i_min, i_max)
    if grid.size > cap:
        raise ResourceLimitError(f"grid of {grid.size} states exceeds the cap of {cap}")
    return grid


def _expected_period_cost(grid: InventoryGrid, pmf: np.ndarray, h: float, b: float) -> np.ndarray:
    y = grid.levels[:, None]
    d = np.arange(len(pmf))[None, :]
    return (pmf * (h * np.maximum(y - d, 0) + b * np.maximum(d - y, 0))).sum(axis=1)


class Model:
    """Per-instance arrays shared by every stage solve.

    ``period_cost[t-1][k]`` is the expected holding and penalty cost of
    period ``t`` when the position after ordering is ``grid.i_min + k``.
    """

    def __init__(self, instance: Instance, grid_cap: int = DEFAULT_GRID_CAP):
        self.instance = instance
        self.grid = build_grid(instance, grid_cap)
        self.levels = self.grid.levels
        self.pmfs = [d.pmf for d in instance.demands]
        self.period_cost = [
            _expected_period_cost(self.grid, p, instance.h, instance.b) for p in self.pmfs
        ]
        self.i0_index = self.grid.index(instance.I0)


@lru_cache(maxsize=32)
def prepare(instance: Instance) -> Model:
    return Model(instance)


@dataclass(frozen=True, eq=False)
class Stage:
    """Cost-to-go ``cost`` and order quantities ``action`` of one period."""

    t: int
    review: bool
    cost: np.ndarray
    action: np.ndarray
    order_up_to: int | None = None


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Stages of periods 1..T for one plan; ``stages[t-1]`` is period t."""

    grid: InventoryGrid
    plan: tuple[int, ...]
    stages: tuple[Stage, ...]

    def cost(self, t: int) -> np.ndarray:
        if t == len(self.stages) + 1:
            return np.zeros(self.grid.size)
        return self.stages[t - 1].cost


@dataclass(frozen=True)
class Policy:
    """(R_t, s_t, S_t) triples; ``s`` and ``S`` are None when nothing is ever ordered."""

    reviews: tuple[tuple[int, int | None, int | None], ...]

    @property
    def periods(self) -> tuple[int, ...]:
        return tuple(r[0] for r in self.reviews)


def immediate_cost(instance: Instance, t: int, opening: int, Q: int, review: bool) -> float:
    if Q < 0:
        raise ValueError("order quantity must be >= 0")
    if Q > 0 and not review:
        raise ValueError(f"cannot order {Q} units in period {t} without a review")
    pmf = instance.demands[t - 1].pmf
    d = np.arange(len(pmf))
    y = opening + Q
    expected = float(np.sum(pmf * (instance.h * np.maximum(y - d, 0)
                                   + instance.b * np.maximum(d - y, 0))))
    return (instance.W if review else 0.0) + (instance.K if Q > 0 else 0.0) + instance.v * Q + expected


def _pull_back(model: Model, next_cost: np.ndarray, extra: int, partial: bool) -> np.ndarray:
    """Cost-to-go as a function of the raw level ``y - d``.

    Returned on ``i_min - extra .. i_max``; levels under the grid are
    clamped to its bottom (such levels are unreachable). With partial
    backordering a negative raw level x becomes ``beta * x``, read off by
    linear interpolation between the neighbouring grid points.
    """
    n = len(next_cost)
    padded = np.concatenate([np.full(extra, next_cost[0]), next_cost])
    if not partial:
        return padded
    beta = model.instance.beta
    raw = np.arange(model.grid.i_min - extra, model.grid.i_max + 1)
    mapped = np.where(raw < 0, beta * raw, raw).astype(float)
    pos = np.clip(mapped - model.grid.i_min, 0, n - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    w = pos - lo
    return (1.0 - w) * next_cost[lo] + w * next_cost[hi]


def expected_next(model: Model, t: int, next_cost: np.ndarray, transition: str = "auto") -> np.ndarray:
    """``E[C_{t+1}(transition(y - d_t))]`` for every post-order level y."""
    if transition == "auto":
        partial = model.instance.beta < 1
    elif transition in ("backlog", "partial"):
        partial = transition == "partial"
    else:
        raise ValueError(f"unknown transition {transition!r}")
    pmf = model.pmfs[t - 1]
    pulled = _pull_back(model, next_cost, len(pmf) - 1, partial)
    return np.convolve(pulled, pmf, mode="valid")


def _reversed_suffix_argmin(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # min over values[k:] and its smallest minimising index, for every k
    r = values[::-1]
    run = np.minimum.accumulate(r)
    hit = np.where(r == run, np.arange(len(r)), 0)
    last = np.maximum.accumulate(hit)
    return run[::-1], (len(r) - 1 - last)[::-1]


def post_order_cost(model: Model, t: int, next_cost: np.ndarray, transition: str = "auto") -> np.ndarray:
    """Expected cost from period t on as a function of the position after ordering."""
    return model.period_cost[t - 1] + expected_next(model, t, next_cost, transition)


def solve_stage(model: Model, t: int, next_cost: np.ndarray | None, review: bool,
                method: str = "auto", transition: str = "auto",
                post_cost: np.ndarray | None = None) -> Stage:
    """One backward step of the functional equation.

    ``method="kconvex"`` finds the order-up-to level as the global minimiser
    of the post-order cost and orders wherever that beats not ordering,
    which is exact when the stage cost is K-convex (full backlog).
    ``method="exact"`` minimises over every admissible order at every state.
    ``auto`` picks ``kconvex`` under full backlog and ``exact`` otherwise.
    ``post_cost`` may carry a precomputed :func:`post_order_cost`, in which
    case ``next_cost`` is ignored.
    """
    inst = model.instance
    G = post_cost if post_cost is not None else post_order_cost(model, t, next_cost, transition)
    n = len(G)
    if not review:
        return Stage(t, False, G, np.zeros(n, dtype=np.int64))
    if method == "auto":
        method = "kconvex" if inst.beta == 1 else "exact"
    Gv = G + inst.v * model.levels if inst.v else G
    idx = np.arange(n)
    if method == "kconvex":
        S = int(np.argmin(Gv))
        order = (idx < S) & (inst.K + Gv[S] < Gv)
        target = np.full(n, S)
        order_up_to = int(model.levels[S])
    elif method == "exact":
        suf, arg = _reversed_suffix_argmin(Gv)
        best = np.append(suf[1:], np.inf)
        target = np.append(arg[1:], n - 1)
        order = inst.K + best < Gv
        order_up_to = None
    else:
        raise ValueError(f"unknown stage method {method!r}")
    cost = np.where(order, inst.K + Gv[target] - (Gv - G), G) + inst.W
    action = np.where(order, target - idx, 0)
    return Stage(t, True, cost, action, order_up_to)


def solve_fixed_plan(instance: Instance, plan: Sequence[int], method: str = "auto",
                     transition: str = "auto", model: Model | None = None) -> tuple[ValueFunction, float]:
    plan = tuple(int(g) for g in plan)
    if len(plan) != instance.T:
        raise ValueError(f"plan has {len(plan)} entries, instance has T = {instance.T}")
    model = model or prepare(instance)
    stages = []
    nxt = np.zeros(model.grid.size)
    for t in range(instance.T, 0, -1):
        st = solve_stage(model, t, nxt, bool(plan[t - 1]), method, transition)
        stages.append(st)
        nxt = st.cost
    stages.reverse()
    vf = ValueFunction(model.grid, plan, tuple(stages))
    return vf, float(nxt[model.i0_index])


def extract_policy(value_function: ValueFunction, plan: Sequence[int] | None = None,
                   beta: float = 1.0, tol: int = 0) -> Policy:
    """Read (s_t, S_t) off the action tables of the review periods.

    ``s_t`` is the highest level that triggers an order and ``S_t`` the
    common order-up-to level; a spread of order-up-to levels larger than
    ``tol`` units raises :class:`StructureViolationError`.
    """
    if beta < 1:
        raise StructureViolationError("(s, S) extraction is only defined for full backlog")
    plan = tuple(plan) if plan is not None else value_function.plan
    levels = value_function.grid.levels
    reviews = []
    for t, g in enumerate(plan, start=1):
        if not g:
            continue
        action = value_function.stages[t - 1].action
        ordering = np.flatnonzero(action > 0)
        if ordering.size == 0:
            reviews.append((t, None, None))
            continue
        ups = levels[ordering] + action[ordering]
        if ups.max() - ups.min() > tol:
            raise StructureViolationError(
                f"period {t}: order-up-to levels range over [{ups.min()}, {ups.max()}]")
        reviews.append((t, int(levels[ordering[-1]]), int(ups[-1])))
    return Policy(tuple(reviews))
