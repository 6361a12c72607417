import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import cycle_holding_penalty, series_pmf
from rssbnb.bench import random_instance
from rssbnb.guidance import build_cycle_costs, compute_rs_plan, cycle_cost, plan_cost
from rssbnb.instance import Instance, toy_instance
from rssbnb.sdp import solve_fixed_plan
from rssbnb.search import bnb_solve


def exhaustive_plan(inst):
    """Cheapest cycle-model cost over all plans, and the cost of the returned plan."""
    cache = build_cycle_costs(inst)
    best = min(plan_cost(cache, p) for p in itertools.product((0, 1), repeat=inst.T))
    return best, plan_cost(cache, compute_rs_plan(inst, cache))


def test_single_period_needs_a_review():
    assert compute_rs_plan(Instance((20,), K=30, W=10, h=1, b=10)) == (1,)


def test_zero_demand_never_reviews():
    z = Instance((0,) * 4, K=30, W=10, h=1, b=10)
    assert compute_rs_plan(z) == (0, 0, 0, 0)
    assert cycle_cost(z, 1, 3) == (10.0, 0)


def test_newsvendor_level():
    cdf = np.cumsum(series_pmf(20, 1e-6))
    critical = int(np.argmax(cdf >= 10 / 11))
    assert cycle_cost(Instance((20,), K=30, W=10, h=1, b=10), 1, 2)[1] == critical == 26


@pytest.mark.parametrize("i, j, means", [(1, 4, (20, 30, 40)), (2, 4, (30, 40)), (3, 4, (40,))])
def test_toy_cycles_against_untruncated_poisson_sums(i, j, means):
    cost, level = cycle_cost(toy_instance(), i, j)
    ys = range(level - 8, level + 9)
    vals = [cycle_holding_penalty(means, y, 1, 10) for y in ys]
    assert list(ys)[int(np.argmin(vals))] == level
    assert cost == pytest.approx(10 + 30 + min(vals), abs=2e-3)


def test_first_cycle_level_frozen():
    # untruncated oracle: 185.033896 at y = 96
    assert cycle_cost(toy_instance(), 1, 4)[1] == 96


def test_cycle_bounds_checked():
    with pytest.raises(ValueError):
        cycle_cost(toy_instance(), 2, 2)
    with pytest.raises(ValueError):
        cycle_cost(toy_instance(), 1, 5)


def test_toy_plan_is_cycle_optimal():
    best, got = exhaustive_plan(toy_instance())
    assert got == best


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), T=st.integers(1, 8), I0=st.integers(-10, 120))
def test_shortest_path_matches_enumeration(seed, T, I0):
    inst = random_instance(T, seed).replace(I0=I0)
    best, got = exhaustive_plan(inst)
    assert got == pytest.approx(best, rel=1e-12)
    assert compute_rs_plan(inst) == compute_rs_plan(inst)


def test_guided_first_leaf_quality():
    close = 0
    for seed in range(100):
        inst = random_instance(10, seed)
        first = solve_fixed_plan(inst, compute_rs_plan(inst))[1]
        opt = bnb_solve(inst).cost
        assert first >= opt - 1e-9
        close += first <= 1.1 * opt
    assert close >= 90
