#!/usr/bin/env python3
"""
Random-delay extension: tabulated delay distributions, retransmission
timeout optimization and the stochastic LP coefficients.
File: deadline_multipath/stochastic.py

Delays, the acknowledgment delay d_min and erasures are independent. For a
pair (i, j) the sender waits t before retransmitting on j and picks t to
maximize

    g(t) = P(t + d_j <= delta) * P(d_i + d_min <= t)

The second factor is the CDF of a sum, obtained by convolving the CDF of
d_i with the bin masses of d_min on a regular grid. g is generally flat near
its maximum, so the whole near-optimal plateau is reported and its midpoint
is used.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from deadline_multipath.delay_models import DelayModel, FixedDelay, ShiftedGammaDelay
from deadline_multipath.errors import NetworkShapeError, ScenarioError
from deadline_multipath.incomplete_gamma import gamma_cdf
from deadline_multipath.model import (
    LpCoefficients, LpProblem, Network, Workload, build_quality_lp, fixed_timeout,
)


logger = logging.getLogger(__name__)

__all__ = [
    "DelayGrid", "TimeoutChoice", "TimeoutTable", "gamma_cdf", "min_delay_path",
    "optimize_timeout", "optimize_all_timeouts", "fixed_timeout_table", "retrans_prob",
    "ack_return_prob", "stochastic_lp_coefficients", "build_stochastic_quality_lp",
]

DEFAULT_STEP_S = 1e-3
DEFAULT_REFINE = 10
PLATEAU_EPS = 1e-3
INFEASIBLE_BELOW = 1e-6


@dataclass(frozen=True, eq=False)
class DelayGrid:
    """CDF and PDF of one delay tabulated on [lo, hi] at a fixed step."""

    step_s: float
    lo: float
    hi: float
    points: np.ndarray
    cdf_values: np.ndarray
    pdf_values: np.ndarray
    fixed: bool = False

    @classmethod
    def tabulate(cls, delay: DelayModel, step_s: float = DEFAULT_STEP_S) -> "DelayGrid":
        if not step_s > 0.0:
            raise ScenarioError(f"grid step must be > 0, got {step_s}")
        if isinstance(delay, FixedDelay):
            if delay.is_infinite():
                raise ScenarioError("cannot tabulate the blackhole delay")
            point = np.array([delay.seconds])
            return cls(step_s, delay.seconds, delay.seconds, point,
                       np.ones(1), np.zeros(1), fixed=True)
        if not isinstance(delay, ShiftedGammaDelay):
            raise ScenarioError(f"unsupported delay model {type(delay).__name__}")
        lo, hi = delay.lower_bound(), delay.support_upper()
        count = max(1, math.ceil((hi - lo) / step_s))
        points = lo + step_s * np.arange(count + 1)
        cdf = np.array([delay.cdf(x) for x in points])
        cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
        pdf = np.array([delay.pdf(x) for x in points])
        bad = ~np.isfinite(pdf)
        if bad.any():
            pdf[bad] = (cdf[1] - cdf[0]) / step_s
        return cls(step_s, lo, hi, points, cdf, pdf)

    def cdf(self, x):
        """P(delay <= x), linear between grid points, 0 below lo and 1 above hi."""
        x = np.asarray(x, dtype=float)
        if self.fixed:
            return np.where(x >= self.lo, 1.0, 0.0)
        return np.interp(x, self.points, self.cdf_values, left=0.0, right=1.0)

    def bin_masses(self) -> Tuple[float, np.ndarray]:
        """(location of the first mass, masses spaced by step_s)."""
        if self.fixed:
            return self.lo, np.ones(1)
        masses = np.diff(self.cdf_values)
        tail = 1.0 - self.cdf_values[-1]
        masses[-1] += max(0.0, tail)
        return self.lo + 0.5 * self.step_s, masses


@lru_cache(maxsize=256)
def _grid(delay: DelayModel, step_s: float) -> DelayGrid:
    return DelayGrid.tabulate(delay, step_s)


@dataclass(frozen=True)
class TimeoutChoice:
    """Chosen timeout for attempt path i followed by retransmission path j."""

    i: int
    j: int
    feasible: bool
    t_lo: float = math.nan
    t_chosen: float = math.nan
    t_hi: float = math.nan
    objective: float = 0.0

    def contains(self, t: float, tolerance: float = 0.0) -> bool:
        return self.feasible and self.t_lo - tolerance <= t <= self.t_hi + tolerance


@dataclass(frozen=True)
class TimeoutTable:
    """Timeouts per (i, j); missing or infeasible entries mean no retransmission."""

    entries: Dict[Tuple[int, int], TimeoutChoice] = field(default_factory=dict)

    def timeout(self, i: int, j: int) -> Optional[float]:
        choice = self.entries.get((i, j))
        if choice is None or not choice.feasible:
            return None
        return choice.t_chosen

    def rows(self):
        return [self.entries[key] for key in sorted(self.entries)]


def min_delay_path(net: Network) -> int:
    """Acknowledgment path: smallest expected delay, lowest index on ties."""
    means = [path.delay.mean() for path in net.paths]
    if all(math.isinf(mean) for mean in means):
        raise ScenarioError("no path has a finite expected delay")
    return net.min_delay_index()


def _real_paths(net: Network, *indices: int) -> None:
    for index in indices:
        if not 0 <= index < net.n:
            raise NetworkShapeError(f"path index {index} out of range")
        if net.paths[index].is_blackhole():
            raise NetworkShapeError("the blackhole path has no delay distribution")


def ack_return_prob(net: Network, i: int, t, step_s: float = DEFAULT_STEP_S / DEFAULT_REFINE):
    """P(d_i + d_min <= t) by direct summation over the d_min bin masses."""
    _real_paths(net, i)
    grid_i = _grid(net.paths[i].delay, step_s)
    grid_min = _grid(net.paths[min_delay_path(net)].delay, step_s)
    first, masses = grid_min.bin_masses()
    offsets = first + step_s * np.arange(masses.size)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    values = grid_i.cdf(t[:, None] - offsets[None, :]) @ masses
    return np.clip(values, 0.0, 1.0)


def _ack_return_on_lattice(grid_i: DelayGrid, grid_min: DelayGrid, count: int) -> np.ndarray:
    """P(d_i + d_min <= n * step) for n = 0..count-1 via np.convolve."""
    step = grid_min.step_s
    first, masses = grid_min.bin_masses()
    lattice = step * np.arange(count)
    shifted = grid_i.cdf(lattice - first)
    return np.clip(np.convolve(masses, shifted)[:count], 0.0, 1.0)


def _objective(net: Network, workload: Workload, i: int, j: int, t: np.ndarray,
               step_s: float) -> np.ndarray:
    grid_j = _grid(net.paths[j].delay, step_s)
    return grid_j.cdf(workload.lifetime_s - t) * ack_return_prob(net, i, t, step_s)


def optimize_timeout(net: Network, workload: Workload, i: int, j: int,
                     step_s: float = DEFAULT_STEP_S, refine: int = DEFAULT_REFINE,
                     plateau_eps: float = PLATEAU_EPS) -> TimeoutChoice:
    """Grid search of g(t) over [0, delta]; plateau edges refined at step_s / refine."""
    _real_paths(net, i, j)
    delta = workload.lifetime_s
    count = int(math.floor(delta / step_s + 1e-9)) + 1
    grid_i = _grid(net.paths[i].delay, step_s)
    grid_j = _grid(net.paths[j].delay, step_s)
    grid_min = _grid(net.paths[min_delay_path(net)].delay, step_s)

    lattice = step_s * np.arange(count)
    g = grid_j.cdf(delta - lattice) * _ack_return_on_lattice(grid_i, grid_min, count)
    g_max = float(g.max())
    if g_max < INFEASIBLE_BELOW:
        logger.info("timeout (%d,%d): no retransmission can meet the deadline", i, j)
        return TimeoutChoice(i, j, feasible=False, objective=g_max)

    threshold = (1.0 - plateau_eps) * g_max
    best = int(np.argmax(g))
    lo = best
    while lo > 0 and g[lo - 1] >= threshold:
        lo -= 1
    hi = best
    while hi < count - 1 and g[hi + 1] >= threshold:
        hi += 1
    if np.count_nonzero(g >= threshold) != hi - lo + 1:
        logger.warning("timeout (%d,%d): near-optimal set is not contiguous", i, j)

    t_lo, t_hi = float(lattice[lo]), float(lattice[hi])
    if refine > 1:
        fine = step_s / refine
        below = np.linspace(max(0.0, t_lo - step_s), t_lo, refine + 1)
        above = np.linspace(t_hi, min(delta, t_hi + step_s), refine + 1)
        g_below = _objective(net, workload, i, j, below, fine)
        g_above = _objective(net, workload, i, j, above, fine)
        inside = np.flatnonzero(g_below >= threshold)
        if inside.size:
            t_lo = float(below[inside[0]])
        inside = np.flatnonzero(g_above >= threshold)
        if inside.size:
            t_hi = float(above[inside[-1]])
        chosen = 0.5 * (t_lo + t_hi)
        objective = float(_objective(net, workload, i, j, np.array([chosen]), fine)[0])
    else:
        chosen = 0.5 * (t_lo + t_hi)
        objective = float(grid_j.cdf(delta - chosen) * ack_return_prob(net, i, chosen, step_s)[0])

    logger.info("timeout (%d,%d): plateau [%.1f, %.1f] ms, chosen %.1f ms, g %.6f",
                i, j, t_lo * 1e3, t_hi * 1e3, chosen * 1e3, objective)
    return TimeoutChoice(i, j, feasible=True, t_lo=t_lo, t_chosen=chosen, t_hi=t_hi,
                         objective=objective)


def optimize_all_timeouts(net: Network, workload: Workload, step_s: float = DEFAULT_STEP_S,
                          refine: int = DEFAULT_REFINE) -> TimeoutTable:
    """Optimized timeouts for every ordered pair of real paths."""
    entries = {}
    for i in net.real_path_indices():
        for j in net.real_path_indices():
            entries[(i, j)] = optimize_timeout(net, workload, i, j, step_s, refine)
    return TimeoutTable(entries)


def fixed_timeout_table(net: Network, guard_s: float = 0.0) -> TimeoutTable:
    """t_{i,j} = d_i + d_min + guard for every real retransmission path j."""
    entries = {}
    for i in net.real_path_indices():
        t = fixed_timeout(net, i, guard_s)
        for j in net.real_path_indices():
            entries[(i, j)] = TimeoutChoice(i, j, feasible=True, t_lo=t, t_chosen=t, t_hi=t,
                                            objective=math.nan)
    return TimeoutTable(entries)


def retrans_prob(net: Network, i: int, j: int, timeout_s: float,
                 step_s: float = DEFAULT_STEP_S / DEFAULT_REFINE) -> float:
    """P(retransmitting on j) = 1 - P(d_i + d_min <= t) * (1 - tau_i)."""
    _real_paths(net, i, j)
    tau = net.paths[i].loss_prob
    if tau >= 1.0:
        return 1.0
    if math.isinf(timeout_s):
        return tau
    back = float(ack_return_prob(net, i, timeout_s, step_s)[0])
    return 1.0 - back * (1.0 - tau)


def stochastic_lp_coefficients(net: Network, workload: Workload, timeouts: TimeoutTable,
                               step_s: float = DEFAULT_STEP_S / DEFAULT_REFINE) -> LpCoefficients:
    """Delivery, sent-rate and cost coefficients under random delays (two attempts)."""
    if net.attempts != 2:
        raise NetworkShapeError("the random-delay coefficients are defined for two attempts only")
    lam = workload.rate_bits_per_s
    delta = workload.lifetime_s
    count = net.combination_count
    delivery = np.zeros(count)
    rates = np.zeros((net.n, count))
    for index, (i, j) in enumerate(net.combinations()):
        first = net.paths[i]
        rates[i, index] += lam
        if first.is_blackhole():
            continue
        in_time = float(_grid(first.delay, step_s).cdf(delta))
        delivery[index] = in_time * (1.0 - first.loss_prob)
        if net.paths[j].is_blackhole():
            rates[j, index] += lam * first.loss_prob
            continue
        t = timeouts.timeout(i, j)
        if t is None:
            continue
        second = net.paths[j]
        p_retrans = retrans_prob(net, i, j, t, step_s)
        second_in_time = float(_grid(second.delay, step_s).cdf(delta - t))
        delivery[index] += p_retrans * second_in_time * (1.0 - second.loss_prob)
        rates[j, index] += lam * p_retrans
    costs = np.array([path.cost_per_bit for path in net.paths])
    return LpCoefficients(delivery=np.clip(delivery, 0.0, 1.0), rate_matrix=rates,
                          cost_row=costs @ rates)


def build_stochastic_quality_lp(net: Network, workload: Workload,
                                timeouts: TimeoutTable) -> LpProblem:
    return build_quality_lp(net, workload, stochastic_lp_coefficients(net, workload, timeouts))

# End of file #
