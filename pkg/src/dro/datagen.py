"""Nominal cost model, sampling, and the three data-corruption channels.

The nominal distribution is a product of per-component beta laws on [0, 1].
Corruption turns exact samples into interval boxes, partial observations, or
total-cost records; the adaptive collector replays an optimism-driven
selection rule to produce realistic decision histories.

PRNG contract: every randomized routine consumes a ``numpy.random.Generator``
(PCG64).  Integer seeds are accepted and expanded with ``default_rng``;
derived streams and draw order are documented per routine, so runs replay
exactly for a fixed seed and numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MeanOutOfRange
from .model import Bandit, Interval, SemiBandit
from .problems import CoverageSystem, LayeredGraph, shortest_path_dp


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def mean_interval(sigma: float):
    """Open interval of means compatible with a beta law of the given std."""
    disc = 1.0 - 4.0 * sigma * sigma
    if disc <= 0:
        raise MeanOutOfRange(f"no beta distribution has std {sigma}")
    half = np.sqrt(disc) / 2.0
    return 0.5 - half, 0.5 + half


def beta_params(m: float, sigma: float):
    """Shape parameters (alpha, beta) of the beta law with mean m and std sigma.

    alpha = m^2 (1 - m) / sigma^2 - m and beta = alpha (1/m - 1); both are
    positive exactly when m lies inside :func:`mean_interval`.
    """
    lo, hi = mean_interval(sigma)
    if not (lo < m < hi):
        raise MeanOutOfRange(f"mean {m} outside the feasible interval ({lo}, {hi})")
    alpha = m * m * (1.0 - m) / (sigma * sigma) - m
    beta = alpha * (1.0 / m - 1.0)
    return float(alpha), float(beta)


@dataclass(eq=False)
class BetaNominal:
    """Independent per-component beta laws on [0, 1]."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.alpha.shape != self.beta.shape:
            raise DimensionMismatch("alpha and beta must match")
        if np.any(self.alpha <= 0) or np.any(self.beta <= 0):
            raise ValueError("shape parameters must be positive")

    @classmethod
    def from_mean_std(cls, means, sigma: float) -> "BetaNominal":
        means = np.asarray(means, dtype=float)
        pairs = [beta_params(m, sigma) for m in means]
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))

    @classmethod
    def random(cls, n: int, sigma: float, seed_or_rng) -> "BetaNominal":
        """Means drawn uniformly from the feasible interval (one draw per
        component, in component order)."""
        rng = _rng(seed_or_rng)
        lo, hi = mean_interval(sigma)
        return cls.from_mean_std(rng.uniform(lo, hi, size=n), sigma)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)

    @property
    def std(self) -> np.ndarray:
        s = self.alpha + self.beta
        return np.sqrt(self.alpha * self.beta / (s * s * (s + 1.0)))


def sample_nominal(dist: BetaNominal, num_samples: int, seed_or_rng) -> np.ndarray:
    """(K, n) i.i.d. draws; a single vectorized beta draw in (K, n) order."""
    if num_samples == 0:
        return np.zeros((0, dist.n))
    rng = _rng(seed_or_rng)
    return rng.beta(dist.alpha, dist.beta, size=(num_samples, dist.n))


def corrupt_interval(data, delta, p, seed_or_rng):
    """Interval scenarios from exact samples.

    Each entry (k, a) is widened to [max(c-delta, 0), min(c+delta, 1)] with
    probability ``p[a]`` and kept zero-width otherwise.  ``delta`` may be a
    scalar or a (K, n) schedule.  RNG order: one uniform matrix of shape
    (K, n), row-major.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    num_k, n = data.shape
    p = np.broadcast_to(np.asarray(p, dtype=float), (n,))
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (num_k, n))
    rng = _rng(seed_or_rng)
    hit = rng.random((num_k, n)) < p
    width = np.where(hit, delta, 0.0)
    lower = np.maximum(data - width, 0.0)
    upper = np.minimum(data + width, 1.0)
    return [Interval(lower[k], upper[k]) for k in range(num_k)]


def growing_delta(num_k: int, n: int, k_max: int) -> np.ndarray:
    """Noise schedule that scales with the sample index: (k-1)/k_max."""
    return np.repeat((np.arange(num_k) / float(k_max)).reshape(-1, 1), n, axis=1)


def observe_semibandit(data, decisions):
    """Scenario k exposes the exact sample values on decision k's support."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    decisions = np.atleast_2d(np.asarray(decisions, dtype=float))
    if data.shape != decisions.shape:
        raise DimensionMismatch("data and decisions must align")
    out = []
    for c, x in zip(data, decisions):
        idx = np.flatnonzero(x > 0.5)
        out.append(SemiBandit(tuple((int(a), float(c[a])) for a in idx)))
    return out


def observe_bandit(data, decisions):
    """Scenario k records only decision k's total cost."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    decisions = np.atleast_2d(np.asarray(decisions, dtype=float))
    if data.shape != decisions.shape:
        raise DimensionMismatch("data and decisions must align")
    return [Bandit(x, float(c @ x)) for c, x in zip(data, decisions)]


@dataclass(eq=False)
class CucbState:
    """Per-component observation counts and running mean costs."""

    counts: np.ndarray
    means: np.ndarray

    @classmethod
    def fresh(cls, n: int) -> "CucbState":
        return cls(np.zeros(n, dtype=int), np.zeros(n))

    def optimistic_costs(self, step: int) -> np.ndarray:
        """Mean minus the exploration bonus, clipped at zero.

        Unobserved components get an infinite bonus, hence adjusted cost 0
        (this also covers step 1, where the bonus is 0/0).
        """
        with np.errstate(divide="ignore", invalid="ignore"):
            bonus = np.sqrt(3.0 * np.log(step) / (2.0 * self.counts))
        bonus = np.where(self.counts > 0, bonus, np.inf)
        return np.maximum(self.means - bonus, 0.0)

    def pessimistic_values(self, step: int) -> np.ndarray:
        """Mean plus the exploration bonus, clipped at one (maximization)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            bonus = np.sqrt(3.0 * np.log(step) / (2.0 * self.counts))
        bonus = np.where(self.counts > 0, bonus, np.inf)
        return np.minimum(self.means + bonus, 1.0)

    def update(self, mask, values):
        idx = np.flatnonzero(mask > 0.5)
        for a in idx:
            self.counts[a] += 1
            self.means[a] += (values[a] - self.means[a]) / self.counts[a]


@dataclass(eq=False)
class CollectorRun:
    """Decisions, per-step observations, and the hidden samples behind them."""

    decisions: np.ndarray  # (K, n) binary
    observations: list  # per step: tuple of (index, value)
    samples: np.ndarray  # (K, n) hidden full samples
    selections: list | None = None  # coverage runs: chosen subset indices

    @property
    def totals(self) -> np.ndarray:
        return np.einsum("kn,kn->k", self.samples, self.decisions)


def cucb_collect(graph: LayeredGraph, dist: BetaNominal, num_k: int, seed_or_rng) -> CollectorRun:
    """Adaptive path history: route optimistically, then observe the arcs used.

    Per step: choose the shortest path under the optimistic adjusted costs,
    draw one fresh nominal sample (the only RNG consumption, after the path
    choice), and fold the traversed arcs into the running means.
    """
    if dist.n != graph.num_arcs:
        raise DimensionMismatch("nominal dimension must equal the arc count")
    rng = _rng(seed_or_rng)
    state = CucbState.fresh(graph.num_arcs)
    decisions = np.zeros((num_k, graph.num_arcs))
    samples = np.zeros((num_k, graph.num_arcs))
    observations = []
    for k in range(num_k):
        _, path = shortest_path_dp(graph, state.optimistic_costs(k + 1))
        sample = sample_nominal(dist, 1, rng)[0]
        decisions[k] = path
        samples[k] = sample
        idx = np.flatnonzero(path > 0.5)
        observations.append(tuple((int(a), float(sample[a])) for a in idx))
        state.update(path, sample)
    return CollectorRun(decisions, observations, samples)


def cucb_collect_mcp(system: CoverageSystem, dist: BetaNominal, num_k: int, seed_or_rng) -> CollectorRun:
    """Adaptive coverage history via greedy optimistic subset selection.

    Per step: greedily pick ``budget`` subsets maximizing the marginal sum of
    the optimistic item values (ties to the lowest subset index), observe the
    covered items of one fresh sample, update.  Decisions and samples live on
    the item block only.
    """
    if dist.n != system.n_items:
        raise DimensionMismatch("nominal dimension must equal the item count")
    rng = _rng(seed_or_rng)
    state = CucbState.fresh(system.n_items)
    decisions = np.zeros((num_k, system.n_items))
    samples = np.zeros((num_k, system.n_items))
    observations = []
    selections = []
    members = [np.array(s, dtype=int) for s in system.subsets]
    for k in range(num_k):
        values = state.pessimistic_values(k + 1)
        covered = np.zeros(system.n_items, dtype=bool)
        chosen = []
        for _ in range(min(system.budget, system.n_subsets)):
            gains = np.array(
                [
                    values[m[~covered[m]]].sum() if i not in chosen else -np.inf
                    for i, m in enumerate(members)
                ]
            )
            best = int(np.argmax(gains))
            chosen.append(best)
            covered[members[best]] = True
        sample = sample_nominal(dist, 1, rng)[0]
        x = covered.astype(float)
        decisions[k] = x
        samples[k] = sample
        idx = np.flatnonzero(covered)
        observations.append(tuple((int(a), float(sample[a])) for a in idx))
        selections.append(tuple(chosen))
        state.update(x, sample)
    return CollectorRun(decisions, observations, samples, selections)
