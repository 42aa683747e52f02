"""LP-based branch & bound for mixed-integer linear programs.

Node selection is best-first by LP bound; branching picks the most fractional
integer variable with ties broken by lowest index.  Both rules are
deterministic, so identical inputs explore identical trees.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .. import tolerances as tol
from ..errors import UnboundedDecisionVariable
from .lp import (
    INFEASIBLE,
    ITERLIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    SolveResult,
    solve_lp,
)


@dataclass(eq=False)
class MixedIntegerProgram:
    """A :class:`LinearProgram` plus a per-variable integrality mask."""

    lp: LinearProgram
    integer: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.integer, dtype=bool)
        if mask.shape != (self.lp.n,):
            raise ValueError("integrality mask must have one entry per variable")
        self.integer = mask

    @property
    def n(self) -> int:
        return self.lp.n

    def check_integer_bounds(self):
        bad = self.integer & ~np.isfinite(self.lp.upper)
        if bad.any():
            raise UnboundedDecisionVariable(
                f"integer variables {np.flatnonzero(bad).tolist()} need finite upper bounds"
            )


def _bounded_lp(base: LinearProgram, lower, upper) -> LinearProgram:
    return LinearProgram(
        base.c, base.a, base.rel, base.b, lower, upper, sense=base.sense, c0=base.c0
    )


def lp_relaxation_value(mip: MixedIntegerProgram, max_pivots=None) -> float:
    """Objective of the MILP with integrality dropped."""
    res = solve_lp(mip.lp, max_pivots=max_pivots)
    if res.status != OPTIMAL:
        raise RuntimeError(f"LP relaxation did not solve: {res.status}")
    return res.value


def _fix_and_polish(mip: MixedIntegerProgram, x_lp, lower, upper, max_pivots):
    """Round the integer block, re-solve the continuous block, and return the
    exact completed solution or None if the rounding is infeasible."""
    rounded = np.round(x_lp[mip.integer])
    lo = lower.copy()
    hi = upper.copy()
    lo[mip.integer] = rounded
    hi[mip.integer] = rounded
    if mip.integer.all():
        x = x_lp.copy()
        x[mip.integer] = rounded
        if _bounded_lp(mip.lp, lower, upper).max_violation(x) > tol.FEAS_TOL:
            return None
        value = float(mip.lp.c @ x) + mip.lp.c0
        return value, x
    res = solve_lp(_bounded_lp(mip.lp, lo, hi), max_pivots=max_pivots)
    if res.status != OPTIMAL:
        return None
    return res.value, res.x


def solve_milp(mip: MixedIntegerProgram, max_pivots=None, max_nodes=200000) -> SolveResult:
    """Solve a MILP by branch & bound over the reference LP kernel.

    The result records the number of explored nodes and the root-relaxation
    objective.  Integer variables must carry finite upper bounds.
    """
    mip.check_integer_bounds()
    base = mip.lp
    flip = -1.0 if base.sense == "max" else 1.0
    root = solve_lp(base, max_pivots=max_pivots)
    if root.status in (INFEASIBLE, UNBOUNDED, ITERLIMIT):
        return SolveResult(root.status, node_count=1, pivots=root.pivots)
    root_lp = root.value

    incumbent_val = np.inf  # minimization scale (flip applied)
    incumbent_x = None
    nodes = 1
    pivots = root.pivots
    seq = 0
    heap = []
    heapq.heappush(heap, (flip * root.value, seq, base.lower, base.upper, root.x))

    def prune_cut():
        if not np.isfinite(incumbent_val):
            return np.inf
        return incumbent_val - tol.VALUE_TOL * (1.0 + abs(incumbent_val))

    while heap:
        bound, _, lower, upper, x_lp = heapq.heappop(heap)
        if bound >= prune_cut():
            break  # best-first: every remaining node is at least as bad
        frac = np.abs(x_lp - np.round(x_lp))
        frac[~mip.integer] = 0.0
        if frac.max(initial=0.0) <= tol.INT_TOL:
            polished = _fix_and_polish(mip, x_lp, lower, upper, max_pivots)
            if polished is not None:
                val, x = polished
                if flip * val < incumbent_val:
                    incumbent_val = flip * val
                    incumbent_x = x
            continue
        # most fractional variable, distance to the nearest half
        score = np.minimum(frac, 1.0 - frac)
        score[~mip.integer] = -1.0
        j = int(np.argmax(score))
        v = x_lp[j]
        for lo_j, hi_j in ((lower[j], np.floor(v)), (np.ceil(v), upper[j])):
            if nodes >= max_nodes:
                return SolveResult(ITERLIMIT, node_count=nodes, pivots=pivots)
            lo = lower.copy()
            hi = upper.copy()
            lo[j] = max(lo[j], lo_j)
            hi[j] = min(hi[j], hi_j)
            if lo[j] > hi[j]:
                continue
            res = solve_lp(_bounded_lp(base, lo, hi), max_pivots=max_pivots)
            nodes += 1
            pivots += res.pivots
            if res.status == ITERLIMIT:
                return SolveResult(ITERLIMIT, node_count=nodes, pivots=pivots)
            if res.status != OPTIMAL:
                continue
            if flip * res.value < prune_cut():
                seq += 1
                heapq.heappush(heap, (flip * res.value, seq, lo, hi, res.x))

    if incumbent_x is None:
        return SolveResult(INFEASIBLE, node_count=nodes, pivots=pivots, root_lp=root_lp)
    return SolveResult(
        OPTIMAL,
        flip * incumbent_val,
        incumbent_x,
        node_count=nodes,
        pivots=pivots,
        root_lp=root_lp,
    )
