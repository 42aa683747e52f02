"""Branch & bound tests against enumeration oracles and hand values."""

import itertools

import numpy as np
import pytest

from dro.errors import UnboundedDecisionVariable
from dro.selfcheck import brute_force_milp, random_binary_milp
from dro.solver import (
    GE,
    LE,
    OPTIMAL,
    LinearProgram,
    MixedIntegerProgram,
    dump_program,
    lp_relaxation_value,
    solve_milp,
)


def binary_mip(c, rows, rel, rhs, sense="min"):
    n = len(c)
    lp = LinearProgram(
        np.asarray(c, float),
        np.asarray(rows, float).reshape(len(rhs), -1) if len(rhs) else np.zeros((0, n)),
        tuple(rel),
        np.asarray(rhs, float),
        np.zeros(n),
        np.ones(n),
        sense=sense,
    )
    return MixedIntegerProgram(lp, np.ones(n, dtype=bool))


def test_two_var_packing():
    mip = binary_mip([-1.0, -1.0], [[1.0, 1.0]], [LE], [1.0])
    res = solve_milp(mip)
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(-1.0, abs=1e-9)


def test_sorting_pick_two_of_five():
    # choose 2 of 5 items with costs .1..", optimum .1 + .2 = 0.3; the
    # enumeration over all C(5,2) subsets fixes the expected value
    costs = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    rows = [np.ones(5), -np.ones(5)]
    mip = binary_mip(costs, rows, [LE, LE], [2.0, -2.0])
    best = min(
        costs[list(pair)].sum() for pair in itertools.combinations(range(5), 2)
    )
    res = solve_milp(mip)
    assert best == pytest.approx(0.3)
    assert res.value == pytest.approx(best, abs=1e-9)
    assert res.node_count >= 1
    assert res.root_lp <= res.value + 1e-9


def test_random_knapsack_matches_enumeration():
    rng = np.random.default_rng(99)
    values = rng.random(6)
    weights = rng.random(6)
    cap = weights.sum() * 0.45
    mip = binary_mip(values, [weights], [LE], [cap], sense="max")
    best = max(
        (float(values @ np.array(bits)) for bits in itertools.product([0, 1], repeat=6)
         if float(weights @ np.array(bits)) <= cap + 1e-12),
    )
    res = solve_milp(mip)
    assert res.value == pytest.approx(best, abs=1e-9)


def test_relaxation_half_rounds_up():
    # min x s.t. 2x >= 1, x binary: relaxation 0.5, integer optimum 1
    mip = binary_mip([1.0], [[2.0]], [GE], [1.0])
    assert lp_relaxation_value(mip) == pytest.approx(0.5, abs=1e-9)
    assert solve_milp(mip).value == pytest.approx(1.0, abs=1e-9)


def test_relaxation_tight_on_network_rows():
    # totally unimodular row system: assignment of 2 agents to 2 tasks
    c = np.array([1.0, 3.0, 2.0, 0.5])
    rows = [
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [1, 0, 1, 0],
        [0, 1, 0, 1],
    ]
    mip = binary_mip(c, rows, ["="] * 4, [1.0, 1.0, 1.0, 1.0])
    res = solve_milp(mip)
    assert lp_relaxation_value(mip) == pytest.approx(res.value, abs=1e-9)


def test_random_suite_matches_brute_force():
    rng = np.random.default_rng(31337)
    for _ in range(60):
        mip = random_binary_milp(rng)
        res = solve_milp(mip)
        best = brute_force_milp(mip)
        if best is None:
            assert res.status == "infeasible"
        else:
            assert res.status == OPTIMAL
            assert res.value == pytest.approx(best, abs=1e-6)


def test_mixed_continuous_integer():
    # one binary gate y, one continuous x <= 2y; max x - 0.3 y
    lp = LinearProgram(
        np.array([1.0, -0.3]),
        np.array([[1.0, -2.0]]),
        (LE,),
        np.array([0.0]),
        np.zeros(2),
        np.array([np.inf, 1.0]),
        sense="max",
    )
    mip = MixedIntegerProgram(lp, np.array([False, True]))
    res = solve_milp(mip)
    assert res.value == pytest.approx(1.7, abs=1e-9)
    np.testing.assert_allclose(res.x, [2.0, 1.0], atol=1e-8)


def test_integer_variable_requires_finite_bound():
    lp = LinearProgram(
        np.array([1.0]), np.zeros((0, 1)), (), np.zeros(0), np.zeros(1), np.array([np.inf])
    )
    mip = MixedIntegerProgram(lp, np.array([True]))
    with pytest.raises(UnboundedDecisionVariable):
        solve_milp(mip)


def test_determinism_same_tree():
    rng = np.random.default_rng(4)
    mip = random_binary_milp(rng)
    r1, r2 = solve_milp(mip), solve_milp(mip)
    assert r1.node_count == r2.node_count
    assert r1.value == r2.value
    np.testing.assert_array_equal(r1.x, r2.x)


def test_dump_format_stable():
    mip = binary_mip([1.0, 2.0], [[1.0, 1.0]], [LE], [1.0])
    d1, d2 = dump_program(mip), dump_program(mip)
    assert d1 == d2
    assert d1.splitlines()[0] == "PROBLEM MILP min vars=2 rows=1"
    assert "VAR 0 lo=0 hi=1 int" in d1
    assert "ROW 0 <= 1 : 0:1 1:1" in d1
