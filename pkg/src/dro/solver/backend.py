"""Pluggable solver backends.

Every backend honours one contract: ``solve_lp(LinearProgram)`` and
``solve_milp(MixedIntegerProgram)`` both return a :class:`SolveResult`.  The
reference kernel is always available and is the default everywhere; the scipy
backend wraps HiGHS and is useful for the larger experiment sweeps.
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .. import tolerances as tol
from .lp import EQ, GE, INFEASIBLE, ITERLIMIT, LE, OPTIMAL, UNBOUNDED
from .lp import LinearProgram, SolveResult, solve_lp
from .milp import MixedIntegerProgram, solve_milp


@runtime_checkable
class Backend(Protocol):
    def solve_lp(self, lp: LinearProgram) -> SolveResult: ...

    def solve_milp(self, mip: MixedIntegerProgram) -> SolveResult: ...


class ReferenceKernel:
    """The built-in simplex + branch & bound kernel."""

    name = "reference"

    def solve_lp(self, lp: LinearProgram) -> SolveResult:
        return solve_lp(lp)

    def solve_milp(self, mip: MixedIntegerProgram) -> SolveResult:
        return solve_milp(mip)


def _split_rows(lp: LinearProgram):
    """Rows rearranged into scipy's (A_ub, b_ub, A_eq, b_eq) form."""
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for i, r in enumerate(lp.rel):
        if r == LE:
            ub_rows.append(lp.a[i])
            ub_rhs.append(lp.b[i])
        elif r == GE:
            ub_rows.append(-lp.a[i])
            ub_rhs.append(-lp.b[i])
        else:
            eq_rows.append(lp.a[i])
            eq_rhs.append(lp.b[i])
    a_ub = np.array(ub_rows) if ub_rows else None
    a_eq = np.array(eq_rows) if eq_rows else None
    return a_ub, (np.array(ub_rhs) if ub_rows else None), a_eq, (
        np.array(eq_rhs) if eq_rows else None
    )


_STATUS_FROM_SCIPY = {0: OPTIMAL, 1: ITERLIMIT, 2: INFEASIBLE, 3: UNBOUNDED}


class ScipyBackend:
    """HiGHS-backed solves through :mod:`scipy.optimize`.

    Used for desk-scale sweeps whose MILPs are too large for a dense tableau;
    deterministic for fixed inputs (serial HiGHS).
    """

    name = "scipy"

    def solve_lp(self, lp: LinearProgram) -> SolveResult:
        from scipy.optimize import linprog

        flip = -1.0 if lp.sense == "max" else 1.0
        a_ub, b_ub, a_eq, b_eq = _split_rows(lp)
        bounds = list(zip(lp.lower, np.where(np.isfinite(lp.upper), lp.upper, None)))
        res = linprog(
            flip * lp.c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=bounds,
            method="highs",
        )
        status = _STATUS_FROM_SCIPY.get(res.status, INFEASIBLE)
        if status != OPTIMAL:
            return SolveResult(status)
        value = flip * (res.fun + flip * lp.c0)
        # reassemble per-row duals in the original row order
        dual = np.zeros(lp.m)
        iu = ie = 0
        for i, r in enumerate(lp.rel):
            if r == LE:
                dual[i] = flip * res.ineqlin.marginals[iu]
                iu += 1
            elif r == GE:
                dual[i] = -flip * res.ineqlin.marginals[iu]
                iu += 1
            else:
                dual[i] = flip * res.eqlin.marginals[ie]
                ie += 1
        return SolveResult(OPTIMAL, value, np.asarray(res.x), dual, value)

    def solve_milp(self, mip: MixedIntegerProgram) -> SolveResult:
        from scipy.optimize import Bounds, LinearConstraint
        from scipy.optimize import milp as scipy_milp

        mip.check_integer_bounds()
        lp = mip.lp
        flip = -1.0 if lp.sense == "max" else 1.0
        lb = np.full(lp.m, -np.inf)
        ub = np.full(lp.m, np.inf)
        for i, r in enumerate(lp.rel):
            if r in (LE, EQ):
                ub[i] = lp.b[i]
            if r in (GE, EQ):
                lb[i] = lp.b[i]
        constraints = LinearConstraint(lp.a, lb, ub) if lp.m else ()
        res = scipy_milp(
            c=flip * lp.c,
            constraints=constraints,
            integrality=mip.integer.astype(int),
            bounds=Bounds(lp.lower, lp.upper),
            options={"mip_rel_gap": 1e-9},
        )
        status = _STATUS_FROM_SCIPY.get(res.status, INFEASIBLE)
        if status != OPTIMAL:
            return SolveResult(status)
        x = np.asarray(res.x)
        x[mip.integer] = np.round(x[mip.integer])
        value = float(lp.c @ x) + lp.c0
        relax = self.solve_lp(lp)
        return SolveResult(
            OPTIMAL,
            value,
            x,
            node_count=int(getattr(res, "mip_node_count", 0) or 0),
            root_lp=relax.value if relax.optimal else None,
        )


_BACKENDS = {"reference": ReferenceKernel, "scipy": ScipyBackend}


def get_backend(name: str | None) -> Backend:
    """Look up a backend by name; ``None`` means the reference kernel."""
    if name is None:
        return ReferenceKernel()
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}")
