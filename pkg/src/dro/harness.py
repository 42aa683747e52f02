"""Experiment protocol: relative-loss evaluation, radius helpers, and sweeps.

A sweep runs a grid of cells; each cell solves ``instances`` independent
random instances and aggregates the nominal relative loss (mean and mean
absolute deviation), solve times, LP-relaxation quality, and which of the two
interval-mode candidates won.  Results serialize to a fixed CSV schema:

    param,mean_rho,mad_rho,mean_time_ms,mean_lp_quality,n_f1_wins,n_fail

Reproducibility: every instance derives its streams from
``SeedSequence([seed, instance])`` when the swept parameter only reweights
shared data (delta, gamma, K, and the sorting cardinality), and from
``SeedSequence([seed, cell, instance])`` when it changes the problem
structure.  Four child streams are spawned per instance, consumed in a fixed
order: structure, nominal means, data/collector, corruption.  Identical
configs and seeds therefore produce identical CSV bytes (timing columns are
written as 0 unless explicitly enabled).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .closedform import (
    IntervalData,
    milp_cop,
    solve_interval_detail,
)
from .datagen import (
    BetaNominal,
    corrupt_interval,
    cucb_collect,
    cucb_collect_mcp,
    growing_delta,
    sample_nominal,
)
from .errors import DegenerateDenominator, DimensionMismatch, EmptyInput
from .model import Bandit, FeasibleSet
from .problems import gen_layered_spp, gen_mcp, gen_sorting, sorting_cop, spp_cop
from .reformulate import solve_dro
from .solver import ScipyBackend


def wasserstein_radius(num_samples: int, gamma: float) -> float:
    """Radius shrinking with the root of the sample count: gamma / sqrt(K)."""
    if num_samples < 1:
        raise ValueError("need at least one sample")
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    return gamma / math.sqrt(num_samples)


def hoeffding_bound(num_samples: int, epsilon: float, hmax: float) -> float:
    """One-sided tail bound exp(-2 K eps^2 / hmax^2) on the probability that
    the true expected cost exceeds the robust value at a fixed decision."""
    if num_samples < 0 or epsilon < 0 or hmax <= 0:
        raise ValueError("arguments must be nonnegative (hmax positive)")
    return math.exp(-2.0 * num_samples * epsilon**2 / hmax**2)


def mad(values) -> float:
    """Mean absolute deviation around the mean."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyInput("mad of an empty collection")
    return float(np.abs(arr - arr.mean()).mean())


def nominal_relative_loss(x_tilde, dist: BetaNominal, feasible: FeasibleSet, sense="min", cop=None) -> float:
    """Expected cost of the decision over the best achievable expected cost.

    With a bilinear loss and independent components the expectation is exactly
    ``mean @ x``, so one deterministic combinatorial solve gives the
    denominator.  Components beyond the nominal dimension (selection flags)
    carry zero mean.  At least 1 for minimization, at most 1 for maximization.
    """
    x_tilde = np.asarray(x_tilde, dtype=float)
    if x_tilde.shape != (feasible.n,):
        raise DimensionMismatch("decision must match the feasible set")
    if not feasible.contains(x_tilde):
        raise ValueError("decision is not feasible")
    m = np.zeros(feasible.n)
    m[: dist.n] = dist.mean
    cop = cop or milp_cop(feasible)
    denom, _ = cop(m, sense)
    if abs(denom) < 1e-12:
        raise DegenerateDenominator("nominal optimum is zero")
    return float(m @ x_tilde) / denom


@dataclass
class SweepConfig:
    """One sweep: a family, a swept parameter with its grid, and cell recipes.

    ``epsilon_rule`` is one of ``{"kind": "fixed", "value": v}``,
    ``{"kind": "sqrt", "gamma": g}`` (radius g/sqrt(K)),
    ``{"kind": "prop_h", "coef": c}`` (radius c*h), or
    ``{"kind": "prop_n1", "coef": c}`` (radius c*n1).
    """

    family: str  # sorting | spp | mcp
    sweep: str  # delta | h | gamma | K | n1
    grid: tuple
    instances: int
    seed: int
    params: dict
    epsilon_rule: dict
    feedback: str = "interval"  # interval | semibandit | bandit
    k_samples: int = 10
    k_max: int | None = None
    delta: float = 0.0
    delta_schedule: str = "const"  # const | growing
    sigma: float = 0.125

    def __post_init__(self):
        self.grid = tuple(self.grid)
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if self.instances < 1:
            raise ValueError("need at least one instance per cell")
        if self.family not in ("sorting", "spp", "mcp"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.sweep not in ("delta", "h", "gamma", "K", "n1"):
            raise ValueError(f"unknown sweep parameter {self.sweep!r}")
        if self.k_max is None:
            self.k_max = max(self.cell_k(v) for v in self.grid)

    def cell_k(self, cell) -> int:
        return int(cell) if self.sweep == "K" else int(self.k_samples)

    def cell_epsilon(self, cell, num_samples: int, h: int, n1: int | None = None) -> float:
        rule = self.epsilon_rule
        kind = rule["kind"]
        if kind == "fixed":
            return float(rule["value"])
        if kind == "sqrt":
            gamma = float(cell) if self.sweep == "gamma" else float(rule["gamma"])
            return wasserstein_radius(num_samples, gamma)
        if kind == "prop_h":
            return float(rule["coef"]) * h
        if kind == "prop_n1":
            return float(rule["coef"]) * (n1 if n1 is not None else self.params["n1"])
        raise ValueError(f"unknown epsilon rule {kind!r}")

    def shares_instances(self) -> bool:
        """True when cells reweight the same instance data; structural sweeps
        redraw per cell."""
        if self.sweep in ("delta", "gamma", "K"):
            return True
        return self.sweep == "h" and self.family == "sorting"


@dataclass
class InstanceOutcome:
    rho: float
    time_ms: float
    lp_quality: float | None
    f1_win: bool | None


@dataclass
class SweepRecord:
    """Aggregates of one grid cell."""

    param: float
    mean_rho: float | None
    mad_rho: float | None
    mean_time_ms: float | None
    mean_lp_quality: float | None
    n_f1_wins: int | None
    n_fail: int


def _interval_outcome(feasible, idata, epsilon, cop, sense, dist) -> InstanceOutcome:
    t0 = time.perf_counter()
    detail = solve_interval_detail(feasible, idata, epsilon, cop, sense)
    dt = (time.perf_counter() - t0) * 1000.0
    rho = nominal_relative_loss(detail.x, dist, feasible, sense, cop)
    return InstanceOutcome(rho, dt, None, detail.winner == "saa")


def _bandit_outcome(skeleton, decisions, totals, epsilon, cop, dist, backend) -> InstanceOutcome:
    scenarios = [Bandit(decisions[k], float(totals[k])) for k in range(len(totals))]
    inst = skeleton.instance(scenarios, epsilon)
    value, x, diag = solve_dro(inst, backend)
    if value is None:
        raise RuntimeError(f"robust solve failed: {diag.status}")
    rho = nominal_relative_loss(x, dist, skeleton.feasible, skeleton.sense, cop)
    quality = None
    if diag.root_lp is not None and abs(diag.root_lp) > 1e-12:
        quality = value / diag.root_lp
    return InstanceOutcome(rho, diag.time_ms, quality, None)


def _semibandit_interval(observations, n, num_samples):
    lowers = np.zeros((num_samples, n))
    uppers = np.ones((num_samples, n))
    for k in range(num_samples):
        for a, v in observations[k]:
            lowers[k, a] = uppers[k, a] = min(max(v, 0.0), 1.0)
    return lowers, uppers


def _run_sorting_instance(cfg: SweepConfig, cell, ss, backend) -> InstanceOutcome:
    _, rng_means, rng_data, rng_noise = [np.random.default_rng(s) for s in ss.spawn(4)]
    n = int(cfg.params["n"])
    h = int(cell) if cfg.sweep == "h" else int(cfg.params["h"])
    num_k = cfg.cell_k(cell)
    k_total = max(cfg.cell_k(v) for v in cfg.grid) if cfg.sweep == "K" else num_k
    dist = BetaNominal.random(n, cfg.sigma, rng_means)
    p = rng_data.uniform(size=n)  # per-component corruption probability
    samples = sample_nominal(dist, k_total, rng_data)
    if cfg.delta_schedule == "growing":
        delta = growing_delta(k_total, n, cfg.k_max)
    else:
        d = float(cell) if cfg.sweep == "delta" else cfg.delta
        delta = np.full((k_total, n), d)
    scen = corrupt_interval(samples, delta, p, rng_noise)[:num_k]
    lowers = np.array([s.lower for s in scen])
    uppers = np.array([s.upper for s in scen])
    idata = IntervalData(lowers, uppers, np.zeros(n), np.ones(n))
    eps = cfg.cell_epsilon(cell, num_k, h)
    feasible = gen_sorting(n, h).feasible
    cop = sorting_cop(n, h)
    return _interval_outcome(feasible, idata, eps, cop, "min", dist)


def _run_spp_instance(cfg: SweepConfig, cell, ss, backend) -> InstanceOutcome:
    _, rng_means, rng_data, _ = [np.random.default_rng(s) for s in ss.spawn(4)]
    h = int(cell) if cfg.sweep == "h" else int(cfg.params["h"])
    r = int(cfg.params["r"])
    skeleton, graph = gen_layered_spp(h, r)
    n = graph.num_arcs
    num_k = cfg.cell_k(cell)
    k_total = max(cfg.cell_k(v) for v in cfg.grid) if cfg.sweep == "K" else num_k
    dist = BetaNominal.random(n, cfg.sigma, rng_means)
    run = cucb_collect(graph, dist, k_total, rng_data)
    eps = cfg.cell_epsilon(cell, num_k, h)
    cop = spp_cop(graph)
    if cfg.feedback == "semibandit":
        lowers, uppers = _semibandit_interval(run.observations, n, num_k)
        idata = IntervalData(lowers, uppers, np.zeros(n), np.ones(n))
        return _interval_outcome(skeleton.feasible, idata, eps, cop, "min", dist)
    totals = [sum(v for _, v in run.observations[k]) for k in range(num_k)]
    return _bandit_outcome(skeleton, run.decisions[:num_k], totals, eps, cop, dist, backend)


def _run_mcp_instance(cfg: SweepConfig, cell, ss, backend) -> InstanceOutcome:
    rng_struct, rng_means, rng_data, _ = [np.random.default_rng(s) for s in ss.spawn(4)]
    n1 = int(cell) if cfg.sweep == "n1" else int(cfg.params["n1"])
    n2 = int(cfg.params["n2"])
    subset_size = int(cfg.params["subset_size"])
    budget = int(cfg.params["budget"])
    skeleton, system = gen_mcp(n1, n2, subset_size, budget, rng_struct)
    num_k = cfg.cell_k(cell)
    k_total = max(cfg.cell_k(v) for v in cfg.grid) if cfg.sweep == "K" else num_k
    dist = BetaNominal.random(n1, cfg.sigma, rng_means)
    run = cucb_collect_mcp(system, dist, k_total, rng_data)
    eps = cfg.cell_epsilon(cell, num_k, budget, n1=n1)
    n = skeleton.feasible.n
    cop = milp_cop(skeleton.feasible, backend)
    if cfg.feedback == "semibandit":
        low_items, up_items = _semibandit_interval(run.observations, n1, num_k)
        lowers = np.hstack([low_items, np.zeros((num_k, n2))])
        uppers = np.hstack([up_items, np.zeros((num_k, n2))])
        idata = IntervalData(
            lowers,
            uppers,
            np.zeros(n),
            np.concatenate([np.ones(n1), np.zeros(n2)]),
        )
        return _interval_outcome(skeleton.feasible, idata, eps, cop, "max", dist)
    decisions = np.hstack([run.decisions[:num_k], np.zeros((num_k, n2))])
    totals = [sum(v for _, v in run.observations[k]) for k in range(num_k)]
    return _bandit_outcome(skeleton, decisions, totals, eps, cop, dist, backend)


_RUNNERS = {
    "sorting": _run_sorting_instance,
    "spp": _run_spp_instance,
    "mcp": _run_mcp_instance,
}


def run_sweep(cfg: SweepConfig, backend=None, on_cell=None) -> list[SweepRecord]:
    """Execute every cell of the sweep and aggregate per-cell records.

    Failed instances are counted in ``n_fail`` and excluded from the
    aggregates rather than imputed.  ``on_cell(record)`` is invoked after each
    cell for progress reporting.
    """
    if backend is None:
        backend = ScipyBackend()
    runner = _RUNNERS[cfg.family]
    records = []
    for ci, cell in enumerate(cfg.grid):
        outcomes = []
        failures = 0
        for i in range(cfg.instances):
            entropy = [cfg.seed, i] if cfg.shares_instances() else [cfg.seed, ci, i]
            ss = np.random.SeedSequence(entropy)
            try:
                outcomes.append(runner(cfg, cell, ss, backend))
            except Exception:
                failures += 1
        if outcomes:
            rhos = [o.rho for o in outcomes]
            qualities = [o.lp_quality for o in outcomes if o.lp_quality is not None]
            wins = [o.f1_win for o in outcomes if o.f1_win is not None]
            rec = SweepRecord(
                float(cell),
                float(np.mean(rhos)),
                mad(rhos),
                float(np.mean([o.time_ms for o in outcomes])),
                float(np.mean(qualities)) if qualities else None,
                int(sum(wins)) if wins else None,
                failures,
            )
        else:
            rec = SweepRecord(float(cell), None, None, None, None, None, failures)
        records.append(rec)
        if on_cell:
            on_cell(rec)
    return records


CSV_HEADER = "param,mean_rho,mad_rho,mean_time_ms,mean_lp_quality,n_f1_wins,n_fail"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.10g}"


def records_to_csv(records, include_timings: bool = False) -> str:
    """Serialize sweep records; timing column is zeroed unless enabled so
    that repeated runs produce identical bytes."""
    lines = [CSV_HEADER]
    for r in records:
        t = r.mean_time_ms if include_timings else (0.0 if r.mean_time_ms is not None else None)
        lines.append(
            ",".join(
                [
                    _fmt(r.param),
                    _fmt(r.mean_rho),
                    _fmt(r.mad_rho),
                    _fmt(t),
                    _fmt(r.mean_lp_quality),
                    _fmt(r.n_f1_wins),
                    _fmt(r.n_fail),
                ]
            )
        )
    return "\n".join(lines) + "\n"


# -- ready-made configurations ----------------------------------------------

_PRESETS = {
    # sorting with interval noise
    "sorting-delta": dict(
        desk=dict(n=20, K=30, h=5, M=30, grid=(0.0, 0.2, 0.4, 0.6, 0.8)),
        paper=dict(n=50, K=50, h=5, M=100, grid=tuple(np.round(np.arange(0, 1.0, 0.1), 2))),
    ),
    "sorting-h": dict(
        desk=dict(n=20, K=30, M=30, grid=tuple(range(1, 9)), delta=0.2),
        paper=dict(n=50, K=50, M=100, grid=tuple(range(1, 11)), delta=0.2),
    ),
    "sorting-gamma": dict(
        desk=dict(n=20, K=30, h=5, M=30, grid=(5, 10, 15, 20, 25, 30, 35, 40)),
        paper=dict(n=50, K=50, h=5, M=100, grid=(5, 10, 15, 20, 25, 30, 35, 40, 45, 50)),
    ),
    "sorting-k": dict(
        desk=dict(n=20, h=5, M=30, grid=(5, 10, 15, 20, 25, 30)),
        paper=dict(n=50, h=5, M=100, grid=tuple(range(5, 55, 5))),
    ),
    "spp-k": dict(
        desk=dict(h=5, r=3, M=30, grid=(5, 10, 15, 20, 25)),
        paper=dict(h=11, r=5, M=100, grid=tuple(range(10, 110, 10))),
    ),
    "mcp-k": dict(
        desk=dict(n1=20, n2=20, subset_size=5, budget=5, M=30, grid=(5, 10, 15, 20, 25)),
        paper=dict(n1=50, n2=50, subset_size=5, budget=5, M=100, grid=tuple(range(5, 55, 5))),
    ),
    "spp-h": dict(
        desk=dict(r=3, K=15, M=30, grid=(2, 3, 4, 5)),
        paper=dict(r=5, K=50, M=100, grid=(5, 7, 9, 11, 13, 15, 17)),
    ),
    "mcp-n1": dict(
        desk=dict(n2=15, subset_size=4, budget=3, K=10, M=30, grid=(12, 16, 20, 24)),
        paper=dict(n2=50, subset_size=5, budget=5, K=25, M=100, grid=(35, 40, 45, 50, 55, 60, 65)),
    ),
}


def preset_sweep(name: str, seed: int = 0, paper_scale: bool = False, feedback: str | None = None) -> SweepConfig:
    """Canned sweep configurations at desk scale, or at the published sizes
    with ``paper_scale``.  ``feedback`` selects semibandit or bandit where the
    preset supports both."""
    if name not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(_PRESETS)}")
    p = _PRESETS[name]["paper" if paper_scale else "desk"]
    if name == "sorting-delta":
        return SweepConfig(
            "sorting", "delta", p["grid"], p["M"], seed,
            {"n": p["n"], "h": p["h"]}, {"kind": "fixed", "value": 1.0},
            feedback="interval", k_samples=p["K"],
        )
    if name == "sorting-h":
        return SweepConfig(
            "sorting", "h", p["grid"], p["M"], seed,
            {"n": p["n"], "h": p["grid"][0]}, {"kind": "fixed", "value": 1.0},
            feedback="interval", k_samples=p["K"], delta=p["delta"],
        )
    if name == "sorting-gamma":
        return SweepConfig(
            "sorting", "gamma", p["grid"], p["M"], seed,
            {"n": p["n"], "h": p["h"]}, {"kind": "sqrt", "gamma": 0.0},
            feedback="interval", k_samples=p["K"],
        )
    if name == "sorting-k":
        k_max = max(p["grid"])
        return SweepConfig(
            "sorting", "K", p["grid"], p["M"], seed,
            {"n": p["n"], "h": p["h"]},
            {"kind": "sqrt", "gamma": math.sqrt(k_max)},
            feedback="interval", k_max=k_max, delta_schedule="growing",
        )
    if name == "spp-k":
        k_max = max(p["grid"])
        # radius kept proportional to the path length: matches the published
        # epsilon = sqrt(k_max / K) at the h = 11 configuration
        return SweepConfig(
            "spp", "K", p["grid"], p["M"], seed,
            {"h": p["h"], "r": p["r"]},
            {"kind": "sqrt", "gamma": math.sqrt(k_max) * p["h"] / 11.0},
            feedback=feedback or "semibandit", k_max=k_max,
        )
    if name == "mcp-k":
        k_max = max(p["grid"])
        return SweepConfig(
            "mcp", "K", p["grid"], p["M"], seed,
            {"n1": p["n1"], "n2": p["n2"], "subset_size": p["subset_size"], "budget": p["budget"]},
            {"kind": "sqrt", "gamma": math.sqrt(k_max)},
            feedback=feedback or "semibandit", k_max=k_max,
        )
    if name == "spp-h":
        return SweepConfig(
            "spp", "h", p["grid"], p["M"], seed,
            {"h": p["grid"][0], "r": p["r"]},
            {"kind": "prop_h", "coef": math.sqrt(2.0) / 11.0},
            feedback=feedback or "bandit", k_samples=p["K"],
        )
    return SweepConfig(
        "mcp", "n1", p["grid"], p["M"], seed,
        {"n1": p["grid"][0], "n2": p["n2"], "subset_size": p["subset_size"], "budget": p["budget"]},
        {"kind": "prop_n1", "coef": math.sqrt(2.0) / 50.0},
        feedback=feedback or "bandit", k_samples=p["K"],
    )
