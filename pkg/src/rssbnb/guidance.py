"""(R, S) review plans from replenishment-cycle costs and a shortest path.

Every review of an (R, S) policy raises inventory to a fixed level, so a
cycle covering periods i..j-1 costs

    W + K + min_y sum_{t=i}^{j-1} E[h (y - D_{i..t})^+ + b (D_{i..t} - y)^+]

with ``D_{i..t}`` the total demand of periods i..t; cycles are independent
and the cheapest plan is a shortest path from period 1 to period T+1.
The first cycle starts from the initial inventory: its level may not go
below ``I0`` and K is not charged when it stays at ``I0``. Periods before
the first review cost holding and penalty only. Unit costs are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demand import DemandDistribution, convolve
from .instance import Instance


def _holding_penalty(dist: DemandDistribution, ys: np.ndarray, h: float, b: float) -> np.ndarray:
    # E[(y - D)^+] = sum_{k < y} P(D <= k) for integer y; zero for y <= 0
    cdf = dist.cdf()
    top = int(ys.max())
    F = np.ones(max(top, 0) + 1)
    F[: min(len(cdf), len(F))] = cdf[: len(F)]
    short = np.concatenate([[0.0], np.cumsum(F)])
    over = short[np.clip(ys, 0, None)]
    under = dist.expected() - ys + over
    return h * over + b * under


@dataclass(frozen=True, eq=False)
class CycleCostCache:
    """``cost[i, j]`` and ``level[i, j]`` for 1 <= i < j <= T+1 (1-based).

    ``first`` holds the costs of cycles reviewed in period 1 with the initial
    inventory taken into account, ``idle[j]`` the cost of reaching period j
    without any review.
    """

    cost: np.ndarray
    level: np.ndarray
    first: np.ndarray
    first_level: np.ndarray
    idle: np.ndarray


def build_cycle_costs(instance: Instance) -> CycleCostCache:
    T, inst = instance.T, instance
    dists = instance.demands
    span = sum(d.support_max for d in dists)
    lo = min(inst.I0, 0)
    ys = np.arange(lo, max(span, inst.I0) + 1)
    i0 = inst.I0 - lo
    cost = np.full((T + 2, T + 2), np.inf)
    level = np.zeros((T + 2, T + 2), dtype=np.int64)
    first = np.full(T + 2, np.inf)
    first_level = np.zeros(T + 2, dtype=np.int64)
    idle = np.full(T + 2, np.inf)
    idle[1] = 0.0
    for i in range(1, T + 1):
        acc = np.zeros(len(ys))
        cum = None
        for t in range(i, T + 1):
            cum = dists[t - 1] if cum is None else convolve(cum, dists[t - 1], inst.epsilon)
            acc += _holding_penalty(cum, ys, inst.h, inst.b)
            k = int(np.argmin(acc))
            cost[i, t + 1] = inst.W + inst.K + acc[k]
            level[i, t + 1] = ys[k]
            if i == 1:
                stay = acc[i0]
                up = i0 + 1 + int(np.argmin(acc[i0 + 1:])) if i0 + 1 < len(acc) else None
                if up is None or stay <= inst.K + acc[up]:
                    first[t + 1], first_level[t + 1] = inst.W + stay, inst.I0
                else:
                    first[t + 1], first_level[t + 1] = inst.W + inst.K + acc[up], ys[up]
                idle[t + 1] = acc[i0]
    return CycleCostCache(cost, level, first, first_level, idle)


def cycle_cost(instance: Instance, i: int, j: int) -> tuple[float, int]:
    """Cost and order-up-to level of a cycle reviewed at i and ending before j."""
    T = instance.T
    if not 1 <= i < j <= T + 1:
        raise ValueError(f"need 1 <= i < j <= T+1, got i={i}, j={j}")
    cache = build_cycle_costs(instance)
    if i == 1:
        return float(cache.first[j]), int(cache.first_level[j])
    return float(cache.cost[i, j]), int(cache.level[i, j])


def plan_cost(cache: CycleCostCache, plan) -> float:
    """Cycle-decomposed cost of an arbitrary review plan."""
    T = len(plan)
    reviews = [t for t, g in enumerate(plan, start=1) if g]
    if not reviews:
        return float(cache.idle[T + 1])
    total = 0.0 if reviews[0] == 1 else float(cache.idle[reviews[0]])
    bounds = reviews + [T + 1]
    for a, b in zip(bounds, bounds[1:]):
        total += cache.first[b] if a == 1 else cache.cost[a, b]
    return float(total)


def compute_rs_plan(instance: Instance, cache: CycleCostCache | None = None) -> tuple[int, ...]:
    T = instance.T
    cache = cache or build_cycle_costs(instance)
    # best[i]: cheapest cover of periods i..T given a review at i (i >= 2)
    best = np.zeros(T + 2)
    nxt = np.zeros(T + 2, dtype=np.int64)
    for i in range(T, 1, -1):
        best[i] = np.inf
        for j in range(i + 1, T + 2):
            c = cache.cost[i, j] + best[j]
            if c <= best[i]:
                best[i], nxt[i] = c, j
    # options for the first segment: review at 1 or stay idle until j
    choice, start_value = None, np.inf
    for j in range(2, T + 2):
        c = cache.first[j] + best[j]
        if c <= start_value:
            start_value, choice = c, (1, j)
    for j in range(2, T + 2):
        c = cache.idle[j] + best[j]
        if c <= start_value:
            start_value, choice = c, (0, j)
    plan = [0] * T
    first_review, j = choice
    if first_review:
        plan[0] = 1
    while j <= T:
        plan[j - 1] = 1
        j = nxt[j]
    return tuple(plan)
