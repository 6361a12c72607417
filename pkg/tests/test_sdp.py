import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_stage, fixed_plan_cost, series_pmf
from rssbnb.instance import Instance, toy_instance
from rssbnb.sdp import (Model, ResourceLimitError, StructureViolationError, build_grid,
                        expected_next, extract_policy, immediate_cost, post_order_cost, prepare,
                        solve_fixed_plan, solve_stage)

TOY_COSTS_1DP = {
    (0, 0, 0): 1600.0, (0, 0, 1): 751.8, (0, 1, 0): 304.7, (0, 1, 1): 302.0,
    (1, 0, 0): 185.0, (1, 0, 1): 142.7, (1, 1, 0): 153.1, (1, 1, 1): 150.4,
}
# memoised-recursion oracle, eps = 1e-6
TOY_ORACLE = {
    (0, 0, 0): 1599.998725073852, (0, 0, 1): 751.774918797397,
    (0, 1, 0): 304.736355648882, (0, 1, 1): 302.02361795630793,
    (1, 0, 0): 185.0333972716553, (1, 0, 1): 142.740594552931,
    (1, 1, 0): 153.14146131046004, (1, 1, 1): 150.428723617886,
}


def zero_demand(T=1, **kw):
    return Instance(demand_means=(0,) * T, K=kw.pop("K", 5), W=kw.pop("W", 10), h=1, b=10, **kw)


@pytest.mark.parametrize("plan", sorted(TOY_COSTS_1DP))
def test_toy_plan_costs(plan):
    cost = solve_fixed_plan(toy_instance(), plan)[1]
    assert abs(cost - TOY_COSTS_1DP[plan]) <= 0.05
    assert cost == pytest.approx(TOY_ORACLE[plan], abs=1e-9)


def test_grid_covers_reachable_levels():
    g = build_grid(toy_instance())
    total = sum(len(series_pmf(m, 1e-6)) - 1 for m in (20, 30, 40))
    assert g.i_min <= -total and g.i_max >= total
    assert build_grid(zero_demand()).size == 1
    assert 100 in build_grid(zero_demand(I0=100)).levels


def test_grid_cap():
    with pytest.raises(ResourceLimitError):
        Model(toy_instance(), grid_cap=100)


def test_immediate_cost():
    z = zero_demand()
    assert immediate_cost(z, 1, 0, 0, False) == 0
    assert immediate_cost(z, 1, 0, 0, True) == 10
    # oracle: 10 + 30 + sum_d pmf(d) [(20 - d)^+ + 10 (d - 20)^+] over the series pmf
    assert immediate_cost(toy_instance(), 1, 0, 20, True) == pytest.approx(59.543657450391905, abs=1e-9)
    with pytest.raises(ValueError):
        immediate_cost(z, 1, 0, 3, False)


def test_zero_demand_single_period():
    assert solve_fixed_plan(zero_demand(), (0,))[1] == 0


def test_plan_length_checked():
    with pytest.raises(ValueError):
        solve_fixed_plan(toy_instance(), (1, 0))


def test_stage_without_review_is_forced():
    m = prepare(toy_instance())
    nxt = solve_fixed_plan(toy_instance(), (1, 0, 1))[0].cost(3)
    st_ = solve_stage(m, 2, nxt, review=False)
    assert (st_.action == 0).all()
    assert np.array_equal(st_.cost, post_order_cost(m, 2, nxt))


def test_last_stage_is_newsvendor():
    inst = Instance((25,), K=0, W=0, h=2, b=7)
    m = prepare(inst)
    st_ = solve_stage(m, 1, np.zeros(m.grid.size), review=True)
    L = m.period_cost[0]
    expected = np.minimum.accumulate(L[::-1])[::-1]
    assert np.allclose(st_.cost, expected, atol=1e-12)


def test_value_function_rolls_back_to_plan_cost():
    vf, cost = solve_fixed_plan(toy_instance(), (1, 0, 1))
    assert vf.cost(1)[vf.grid.index(0)] == cost
    assert (vf.cost(4) == 0).all()


def test_toy_policy_matches_brute_force_scan():
    inst = toy_instance()
    m = prepare(inst)
    vf, _ = solve_fixed_plan(inst, (1, 0, 1))
    pol = extract_policy(vf)
    assert pol.reviews == ((1, 45, 56), (3, 37, 49))
    for t, s, S in pol.reviews:
        G = post_order_cost(m, t, vf.cost(t + 1))
        _, action = brute_stage(G.tolist(), m.levels.tolist(), True, inst.K, inst.W, 0.0)
        action = np.array(action)
        ordering = np.flatnonzero(action > 0)
        assert m.levels[ordering.max()] == s
        assert set(m.levels[ordering] + action[ordering]) == {S}


def test_policy_of_plan_without_reviews_is_empty():
    vf, _ = solve_fixed_plan(toy_instance(), (0, 0, 0))
    assert extract_policy(vf).reviews == ()


def test_zero_demand_orders_nothing():
    vf, _ = solve_fixed_plan(zero_demand(3), (1, 1, 1))
    assert all(s is None for _, s, _ in extract_policy(vf).reviews)


def test_policy_refuses_partial_backorders():
    vf, _ = solve_fixed_plan(toy_instance().replace(beta=0.5), (1, 0, 1))
    with pytest.raises(StructureViolationError):
        extract_policy(vf, beta=0.5)


def small_instances():
    return st.builds(
        lambda means, K, W, h, b, v, I0: Instance(tuple(means), K, W, h, b, v=v, I0=I0),
        st.lists(st.integers(0, 12), min_size=1, max_size=4),
        st.integers(0, 40), st.integers(0, 20), st.integers(1, 3), st.integers(1, 15),
        st.sampled_from([0, 0, 1, 2]), st.integers(-5, 10))


@settings(max_examples=40, deadline=None)
@given(inst=small_instances(), data=st.data())
def test_matches_recursive_oracle(inst, data):
    plan = data.draw(st.lists(st.integers(0, 1), min_size=inst.T, max_size=inst.T))
    beta = data.draw(st.sampled_from([1.0, 0.0, 0.5, 0.37]))
    inst = inst.replace(beta=beta)
    got = solve_fixed_plan(inst, plan)[1]
    want = fixed_plan_cost(inst.demand_means, inst.K, inst.W, inst.h, inst.b, plan,
                           I0=inst.I0, v=inst.v, beta=beta)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(inst=small_instances(), data=st.data())
def test_stage_minima_fall_with_period(inst, data):
    plan = data.draw(st.lists(st.integers(0, 1), min_size=inst.T, max_size=inst.T))
    vf, _ = solve_fixed_plan(inst, plan)
    minima = [vf.cost(t).min() for t in range(1, inst.T + 2)]
    assert all(a >= b - 1e-9 for a, b in zip(minima, minima[1:]))


@settings(max_examples=25, deadline=None)
@given(inst=small_instances(), data=st.data())
def test_review_stage_fast_path_matches_brute_force(inst, data):
    t = data.draw(st.integers(1, inst.T))
    suffix = data.draw(st.lists(st.integers(0, 1), min_size=inst.T, max_size=inst.T))
    m = prepare(inst)
    nxt = solve_fixed_plan(inst, suffix)[0].cost(t + 1)
    fast = solve_stage(m, t, nxt, True, method="kconvex")
    exact = solve_stage(m, t, nxt, True, method="exact")
    G = post_order_cost(m, t, nxt)
    cost, action = brute_stage(G.tolist(), m.levels.tolist(), True, inst.K, inst.W, inst.v)
    assert np.allclose(fast.cost, cost, rtol=0, atol=1e-9)
    assert np.allclose(exact.cost, cost, rtol=0, atol=1e-9)
    assert np.array_equal(exact.action, action)
    # threshold form: the levels that order are a prefix of the grid
    ordering = np.flatnonzero(fast.action > 0)
    assert np.array_equal(ordering, np.arange(len(ordering)))


@settings(max_examples=15, deadline=None)
@given(inst=small_instances(), beta=st.sampled_from([0.0, 0.25, 0.6]), data=st.data())
def test_partial_backorder_stage_matches_brute_force(inst, beta, data):
    inst = inst.replace(beta=beta)
    t = data.draw(st.integers(1, inst.T))
    m = prepare(inst)
    nxt = solve_fixed_plan(inst, (1,) * inst.T)[0].cost(t + 1)
    got = solve_stage(m, t, nxt, True)
    G = post_order_cost(m, t, nxt)
    cost, action = brute_stage(G.tolist(), m.levels.tolist(), True, inst.K, inst.W, inst.v)
    assert np.allclose(got.cost, cost, rtol=0, atol=1e-9)
    assert np.array_equal(got.action, action)


def test_full_backlog_through_partial_transition_is_identical():
    inst = toy_instance()
    m = prepare(inst)
    nxt = solve_fixed_plan(inst, (1, 1, 1))[0].cost(2)
    a = expected_next(m, 1, nxt, transition="backlog")
    b = expected_next(m, 1, nxt, transition="partial")
    assert np.array_equal(a, b)
    for plan in itertools.product((0, 1), repeat=3):
        assert (solve_fixed_plan(inst, plan, transition="partial")[1]
                == solve_fixed_plan(inst, plan, transition="backlog")[1])


def test_unknown_options_rejected():
    m = prepare(toy_instance())
    with pytest.raises(ValueError):
        solve_stage(m, 1, np.zeros(m.grid.size), True, method="fast")
    with pytest.raises(ValueError):
        expected_next(m, 1, np.zeros(m.grid.size), transition="lost")
