"""Polynomial fast paths that bypass the general MILP.

Three special structures admit direct solutions: a fixed binary decision on a
box support (a capped robust sample mean), componentwise interval data (two
deterministic combinatorial problems), and total-cost histories whose
decisions never overlap (a one-dimensional enumeration over history groups).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DimensionMismatch, OverlappingDecisions
from .model import (
    Bandit,
    Exact,
    FeasibleSet,
    Interval,
    ProblemInstance,
    SemiBandit,
)
from .solver import OPTIMAL, LinearProgram, MixedIntegerProgram, ReferenceKernel


def worst_case_cost(x, data, upper, epsilon: float) -> float:
    """Worst-case expected cost of a fixed binary decision over the ball.

    Equals ``min(mean(data) @ x + epsilon, upper @ x)``: the adversary can
    raise the empirical mean by at most the transport budget, but never past
    the per-component ceilings.
    """
    x = np.asarray(x, dtype=float)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    upper = np.asarray(upper, dtype=float)
    if data.shape[1] != x.shape[0] or upper.shape != x.shape:
        raise DimensionMismatch("decision, data and ceiling dimensions must agree")
    return float(min(data.mean(axis=0) @ x + epsilon, upper @ x))


@dataclass(eq=False)
class IntervalData:
    """Per-sample boxes nested inside a global box.

    ``lower``/``upper`` are (K, n); ``support_lower``/``support_upper`` are
    the global bounds, and the nesting
    support_lower <= lower_k <= upper_k <= support_upper must hold.
    """

    lower: np.ndarray
    upper: np.ndarray
    support_lower: np.ndarray
    support_upper: np.ndarray

    def __post_init__(self):
        self.lower = np.atleast_2d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_2d(np.asarray(self.upper, dtype=float))
        self.support_lower = np.asarray(self.support_lower, dtype=float)
        self.support_upper = np.asarray(self.support_upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise DimensionMismatch("per-sample bounds must match")
        if self.support_lower.shape != (self.n,) or self.support_upper.shape != (self.n,):
            raise DimensionMismatch("global bounds must match the sample dimension")
        slack = tol.VALUE_TOL
        if (
            np.any(self.lower < self.support_lower - slack)
            or np.any(self.upper > self.support_upper + slack)
            or np.any(self.lower > self.upper + slack)
        ):
            raise ValueError("sample boxes must nest inside the global box")

    @property
    def num_samples(self) -> int:
        return self.lower.shape[0]

    @property
    def n(self) -> int:
        return self.lower.shape[1]


def milp_cop(feasible: FeasibleSet, backend=None):
    """Universal combinatorial solver: min/max costs.x over the feasible set."""
    backend = backend or ReferenceKernel()

    def solve(costs, sense="min"):
        costs = np.asarray(costs, dtype=float)
        lp = LinearProgram(
            costs,
            feasible.matrix(),
            tuple(["<="] * feasible.num_rows),
            feasible.rhs,
            np.zeros(feasible.n),
            feasible.upper,
            sense=sense,
        )
        res = backend.solve_milp(MixedIntegerProgram(lp, feasible.integer_mask()))
        if res.status != OPTIMAL:
            raise RuntimeError(f"combinatorial solve failed: {res.status}")
        x = res.x.copy()
        mask = feasible.integer_mask()
        x[mask] = np.round(x[mask])
        return float(res.value), x

    return solve


@dataclass
class IntervalSolveDetail:
    """Both candidate values behind an interval-data solve."""

    value: float
    x: np.ndarray
    robust_saa_value: float  # sample-bound costs plus the radius
    ceiling_value: float  # global-bound costs, radius-free
    winner: str  # "saa" or "ceiling"


def solve_interval_detail(
    feasible: FeasibleSet,
    interval: IntervalData,
    epsilon: float,
    nominal_cop=None,
    sense: str = "min",
) -> IntervalSolveDetail:
    """Solve the interval-data problem as the better of two deterministic COPs.

    Minimization scores decisions by the mean of the per-sample upper bounds
    plus the radius, capped by the global upper bounds; maximization is the
    mirror image on the lower bounds with the radius subtracted.  Exact ties
    go to the data-driven candidate rather than the conservative one.
    """
    cop = nominal_cop or milp_cop(feasible)
    if sense == "min":
        saa_costs = interval.upper.mean(axis=0)
        ceiling_costs = interval.support_upper
        v1, x1 = cop(saa_costs, "min")
        v1 += epsilon
        v2, x2 = cop(ceiling_costs, "min")
        if v1 <= v2 + tol.VALUE_TOL:
            return IntervalSolveDetail(v1, x1, v1, v2, "saa")
        return IntervalSolveDetail(v2, x2, v1, v2, "ceiling")
    saa_costs = interval.lower.mean(axis=0)
    floor_costs = interval.support_lower
    v1, x1 = cop(saa_costs, "max")
    v1 -= epsilon
    v2, x2 = cop(floor_costs, "max")
    if v1 >= v2 - tol.VALUE_TOL:
        return IntervalSolveDetail(v1, x1, v1, v2, "saa")
    return IntervalSolveDetail(v2, x2, v1, v2, "ceiling")


def solve_interval(feasible, interval, epsilon, nominal_cop=None, sense="min"):
    """Like :func:`solve_interval_detail` but returns only ``(value, x)``."""
    det = solve_interval_detail(feasible, interval, epsilon, nominal_cop, sense)
    return det.value, det.x


@dataclass(eq=False)
class DecisionGrouping:
    """Distinct historical decisions with observation counts and mean totals."""

    decisions: np.ndarray  # (V, n) binary rows
    counts: np.ndarray  # (V,)
    group_of: np.ndarray  # (K,) sample -> group index

    @property
    def num_groups(self) -> int:
        return self.decisions.shape[0]


@dataclass
class OverlapViolation:
    """Two distinct decisions that share a component."""

    first: int
    second: int
    component: int


def group_decisions(decisions):
    """Partition identical decisions into groups and verify disjoint supports.

    Returns a :class:`DecisionGrouping` on success or an
    :class:`OverlapViolation` naming the offending pair.
    """
    dec = np.atleast_2d(np.asarray(decisions, dtype=float))
    dec = np.round(dec)
    reps: list[np.ndarray] = []
    group_of = np.zeros(dec.shape[0], dtype=int)
    for k, row in enumerate(dec):
        for g, rep in enumerate(reps):
            if np.array_equal(rep, row):
                group_of[k] = g
                break
        else:
            reps.append(row)
            group_of[k] = len(reps) - 1
    reps_arr = np.array(reps)
    for u in range(len(reps)):
        for v in range(u + 1, len(reps)):
            both = np.flatnonzero((reps_arr[u] > 0.5) & (reps_arr[v] > 0.5))
            if both.size:
                return OverlapViolation(u, v, int(both[0]))
    counts = np.bincount(group_of, minlength=len(reps))
    return DecisionGrouping(reps_arr, counts, group_of)


@dataclass(eq=False)
class BanditHistory:
    """Total-cost observations grouped by decision.

    Built from raw (decision, total) pairs via :meth:`from_observations`;
    requires every decision to select exactly ``h`` components and distinct
    decisions to be non-overlapping.
    """

    decisions: np.ndarray  # (K, n)
    totals: np.ndarray  # (K,)
    h: int
    grouping: DecisionGrouping
    group_means: np.ndarray  # (V,)

    @classmethod
    def from_observations(cls, decisions, totals) -> "BanditHistory":
        dec = np.atleast_2d(np.asarray(decisions, dtype=float))
        tot = np.asarray(totals, dtype=float).reshape(-1)
        if dec.shape[0] != tot.shape[0]:
            raise DimensionMismatch("one total per decision required")
        weights = dec.sum(axis=1)
        h = int(round(weights[0]))
        if np.any(np.abs(weights - h) > tol.INT_TOL):
            raise ValueError("all decisions must select the same number of components")
        grouping = group_decisions(dec)
        if isinstance(grouping, OverlapViolation):
            raise OverlappingDecisions(
                f"decisions {grouping.first} and {grouping.second} share component "
                f"{grouping.component}"
            )
        means = np.zeros(grouping.num_groups)
        for v in range(grouping.num_groups):
            means[v] = tot[grouping.group_of == v].mean()
        return cls(dec, tot, h, grouping, means)

    @property
    def num_samples(self) -> int:
        return self.totals.shape[0]


def solve_disjoint_bandit(hist: BanditHistory, epsilon: float):
    """Optimal value and group index for non-overlapping total-cost histories.

    Scores each group by its observed totals plus a full-cost penalty for
    every sample outside the group, takes the best group, adds the radius and
    caps at the decision cardinality.  Ties resolve to the lowest group index.
    """
    kk = hist.num_samples
    h = hist.h
    scores = hist.grouping.counts * hist.group_means + (kk - hist.grouping.counts) * h
    v_star = int(np.argmin(scores))
    value = min(scores[v_star] / kk + epsilon, float(h))
    return float(value), v_star


# -- adapters from a full problem instance ----------------------------------


def interval_data_from_instance(inst: ProblemInstance) -> IntervalData | None:
    """Express the instance's scenarios as interval data, or None if they
    don't fit (non-box support, or any total-cost scenario)."""
    if not inst.support.is_box():
        return None
    lo, hi = inst.support.box_bounds()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return None
    lowers, uppers = [], []
    for s in inst.scenarios:
        if isinstance(s, Exact):
            lowers.append(np.clip(s.point, lo, hi))
            uppers.append(np.clip(s.point, lo, hi))
        elif isinstance(s, Interval):
            lowers.append(np.maximum(s.lower, lo))
            uppers.append(np.minimum(s.upper, hi))
        elif isinstance(s, SemiBandit):
            l = lo.copy()
            u = hi.copy()
            for i, v in s.observed:
                l[i] = u[i] = np.clip(v, lo[i], hi[i])
            lowers.append(l)
            uppers.append(u)
        else:
            return None
    return IntervalData(np.array(lowers), np.array(uppers), lo, hi)


def bandit_history_from_instance(inst: ProblemInstance) -> BanditHistory | None:
    """Express the instance's scenarios as a grouped total-cost history, or
    None if they don't fit (non-unit-box support, non-bandit scenarios,
    unequal cardinalities, or overlapping decisions)."""
    if not inst.support.is_box():
        return None
    lo, hi = inst.support.box_bounds()
    if np.any(np.abs(lo) > tol.VALUE_TOL) or np.any(np.abs(hi - 1.0) > tol.VALUE_TOL):
        return None
    masks, totals = [], []
    for s in inst.scenarios:
        if not isinstance(s, Bandit):
            return None
        masks.append(s.mask)
        totals.append(s.total)
    try:
        return BanditHistory.from_observations(np.array(masks), np.array(totals))
    except (OverlappingDecisions, ValueError):
        return None
