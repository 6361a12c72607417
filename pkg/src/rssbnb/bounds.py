"""Plan-independent lower bounds on the cost of the first t periods.

``mc[t-1][k]`` bounds the expected cost of periods 1..t when the position
after ordering in period t is ``i_min + k``. Demand is dropped from the
link between periods: without an order the position can only fall, with
an order it can only rise. A single order costs at least W + K and unit
costs are left out, so every entry underestimates.

Under partial backordering a shortfall x < 0 carries over as ``beta * x``,
which can sit above the previous post-order level, so the no-order branch
admits every previous level that can carry into the current one.

At a node for period t the search pairs row t-1 with the cost-to-go
carried through period t-1's demand, ``E[C_t(y - d_{t-1})]``, and prunes
when ``min_y MC_{t-1}(y) + E[C_t(y - d_{t-1})]`` reaches the incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance
from .sdp import Model, prepare


def prefix_minima(row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``below[k] = min(row[:k])`` (inf at k=0) and ``above[k] = min(row[k:])``."""
    below = np.empty_like(row, dtype=float)
    below[0] = np.inf
    below[1:] = np.minimum.accumulate(row)[:-1]
    above = np.minimum.accumulate(row[::-1])[::-1]
    return below, above


def carry_floor(levels: np.ndarray, beta: float) -> np.ndarray:
    """Lowest previous post-order level that reaches each level without an order.

    A level y >= 1 needs y - d >= y. A level y <= 0 may also come from a
    shortfall x with ``beta * x`` in (y - 1, y] once interpolation between
    grid points is allowed, i.e. from any x > (y - 1) / beta.
    """
    if beta == 1:
        return levels.copy()
    if beta == 0:
        low = np.full(len(levels), np.iinfo(np.int64).min // 2)
    else:
        low = np.floor((levels - 1) / beta).astype(np.int64) + 1
    return np.where(levels >= 1, levels, low)


@dataclass(frozen=True, eq=False)
class BoundTable:
    """``mc[t-1]`` is the row of period t; ``carry[k]`` indexes ``carry_floor`` on the grid."""

    mc: np.ndarray
    carry: np.ndarray

    def row(self, t: int) -> np.ndarray:
        return self.mc[t - 1]

    def min_by_period(self) -> np.ndarray:
        return self.mc.min(axis=1)


def compute_mc_bounds(instance: Instance, model: Model | None = None) -> BoundTable:
    model = model or prepare(instance)
    inst = instance
    fixed = inst.W + inst.K
    f = model.period_cost
    mc = np.empty((inst.T, model.grid.size))
    carry = np.clip(carry_floor(model.levels, inst.beta) - model.grid.i_min, 0, model.grid.size - 1)
    mc[0] = np.where(model.levels > inst.I0, fixed + f[0], f[0])
    for t in range(1, inst.T):
        below, above = prefix_minima(mc[t - 1])
        mc[t] = np.minimum(fixed + f[t] + below, f[t] + above[carry])
    return BoundTable(mc, carry)


def zero_bounds(instance: Instance, model: Model | None = None) -> BoundTable:
    model = model or prepare(instance)
    return BoundTable(np.zeros((instance.T, model.grid.size)), np.arange(model.grid.size))
