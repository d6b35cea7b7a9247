#!/usr/bin/env python3
"""
Domain types, network metrics and the linear programs of the multipath model.
File: deadline_multipath/model.py

A datum is sent along a *path combination*: one path per transmission
attempt (first transmission, then retransmissions). The decision variable is
the fraction x of generated data assigned to each combination. Combinations
are flattened with a base-n little-endian index, so for two attempts
i = l mod n and j = l // n.

The formulas below are written for `attempts` transmissions per datum. At
two attempts they reduce exactly to the one-retransmission model (quality
coefficients 1 - tau_i*tau_j / 1 - tau_i / 0, the four-case bandwidth
coefficients, and the lambda*c_i + lambda*tau_i*c_j cost row). For more
attempts they extend the same reasoning prefix by prefix.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from deadline_multipath.delay_models import BLACKHOLE_DELAY, DelayModel
from deadline_multipath.errors import NetworkShapeError, ScenarioError, TimeoutUndefinedError


logger = logging.getLogger(__name__)

Combination = Tuple[int, ...]

BLACKHOLE_INDEX = 0

# deadline comparisons tolerate accumulated rounding of delay sums
DEADLINE_TOL_S = 1e-9


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """One path: bandwidth b_i, delay d_i, erasure probability tau_i, cost c_i per bit."""

    bandwidth_bits_per_s: float
    delay: DelayModel
    loss_prob: float
    cost_per_bit: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ScenarioError(f"loss probability must lie in [0, 1], got {self.loss_prob}")
        if not self.bandwidth_bits_per_s >= 0.0:
            raise ScenarioError(f"bandwidth must be >= 0, got {self.bandwidth_bits_per_s}")
        if not self.cost_per_bit >= 0.0:
            raise ScenarioError(f"cost per bit must be >= 0, got {self.cost_per_bit}")
        if self.delay.is_infinite() and self.loss_prob < 1.0:
            # only a path that erases everything may never deliver
            raise ScenarioError("an infinite delay is reserved for paths with loss probability 1")

    def is_blackhole(self) -> bool:
        return self.loss_prob == 1.0 and self.delay.is_infinite() and self.cost_per_bit == 0.0


@dataclass(frozen=True)
class Workload:
    """Application side: generated rate lambda, lifetime delta, cost bound mu."""

    rate_bits_per_s: float
    lifetime_s: float
    cost_bound: float = math.inf
    packet_bits: int = 8192

    def __post_init__(self):
        if not (self.rate_bits_per_s > 0.0 and math.isfinite(self.rate_bits_per_s)):
            raise ScenarioError(f"generated rate must be finite and > 0, got {self.rate_bits_per_s}")
        if not (self.lifetime_s > 0.0 and math.isfinite(self.lifetime_s)):
            raise ScenarioError(f"lifetime must be finite and > 0, got {self.lifetime_s}")
        if not self.cost_bound >= 0.0:
            raise ScenarioError(f"cost bound must be >= 0, got {self.cost_bound}")
        if int(self.packet_bits) != self.packet_bits or self.packet_bits <= 0:
            raise ScenarioError(f"packet size must be a positive integer, got {self.packet_bits}")


@dataclass(frozen=True)
class Network:
    """Ordered paths plus the number of transmission attempts per datum."""

    paths: Tuple[PathSpec, ...]
    attempts: int = 2
    has_blackhole: bool = False

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ScenarioError("a network needs at least one path")
        if int(self.attempts) != self.attempts or self.attempts < 1:
            raise ScenarioError(f"attempts must be an integer >= 1, got {self.attempts}")
        if all(path.delay.is_infinite() for path in self.paths):
            raise ScenarioError("at least one path must have a finite expected delay")

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def combination_count(self) -> int:
        return self.n ** self.attempts

    def min_delay_index(self) -> int:
        """Index of the path with the smallest expected delay (lowest index on ties)."""
        means = [path.delay.mean() for path in self.paths]
        return int(np.argmin(means))

    def min_delay(self) -> float:
        return self.paths[self.min_delay_index()].delay.mean()

    def all_fixed(self) -> bool:
        return all(path.delay.is_fixed() for path in self.paths)

    def real_path_indices(self) -> range:
        return range(1 if self.has_blackhole else 0, self.n)

    def combination(self, index: int) -> Combination:
        return decode_combination(index, self.n, self.attempts)

    def combination_index(self, combo: Sequence[int]) -> int:
        self.check_combination(combo)
        return encode_combination(combo, self.n)

    def combinations(self) -> Iterator[Combination]:
        for index in range(self.combination_count):
            yield self.combination(index)

    def check_combination(self, combo: Sequence[int]) -> None:
        if len(combo) != self.attempts:
            raise NetworkShapeError(
                f"combination {tuple(combo)} has {len(combo)} entries, network uses {self.attempts} attempts")
        for path in combo:
            if not 0 <= path < self.n:
                raise NetworkShapeError(f"path index {path} out of range for {self.n} paths")

    def with_attempts(self, attempts: int) -> "Network":
        return replace(self, attempts=attempts)


def decode_combination(index: int, n: int, attempts: int) -> Combination:
    """Base-n little-endian digits of `index`: attempt k uses digit k."""
    if not 0 <= index < n ** attempts:
        raise NetworkShapeError(f"combination index {index} out of range")
    digits = []
    for _ in range(attempts):
        digits.append(index % n)
        index //= n
    return tuple(digits)


def encode_combination(combo: Sequence[int], n: int) -> int:
    index = 0
    for path in reversed(combo):
        index = index * n + path
    return index


def format_combination(combo: Sequence[int]) -> str:
    return "-".join(str(path) for path in combo)


class Sense(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """optimize p.x subject to A.x <= q, B.x = 1, x >= 0."""

    objective: np.ndarray
    sense: Sense
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    eq_row: np.ndarray
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        cols = self.objective.shape[0]
        if self.ineq_matrix.ndim != 2 or self.ineq_matrix.shape[1] != cols:
            raise NetworkShapeError(
                f"inequality matrix has shape {self.ineq_matrix.shape}, expected (*, {cols})")
        if self.ineq_rhs.shape[0] != self.ineq_matrix.shape[0]:
            raise NetworkShapeError("inequality right-hand side does not match the matrix rows")
        if self.eq_row.shape[0] != cols:
            raise NetworkShapeError("equality row does not match the objective length")
        if not np.all(np.isfinite(self.ineq_matrix)) or not np.all(np.isfinite(self.objective)):
            raise ScenarioError("LP coefficients must be finite")

    @property
    def variable_count(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True, eq=False)
class Solution:
    """Assignment x over combinations and the objective it achieves."""

    x: np.ndarray
    objective_value: float
    status: SolveStatus
    pivots: int = 0
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def is_optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL


@dataclass(frozen=True, eq=False)
class LpCoefficients:
    """Per-combination coefficients: delivery p, sent-rate matrix (n x n^m), cost row r."""

    delivery: np.ndarray
    rate_matrix: np.ndarray
    cost_row: np.ndarray


# ---------------------------------------------------------------------------
# Deterministic per-combination formulas
# ---------------------------------------------------------------------------

def _require_fixed(net: Network, combo: Sequence[int]) -> None:
    for path in combo:
        if not net.paths[path].delay.is_fixed():
            raise ScenarioError(
                f"path {path} has a random delay; use the stochastic coefficients instead")


def attempt_reach(net: Network, combo: Sequence[int]) -> np.ndarray:
    """Probability that attempt k is transmitted at all.

    Attempt k happens when every earlier attempt was erased. An attempt on the
    blackhole discards the datum, so nothing after it is ever sent.
    """
    reach = np.zeros(len(combo))
    weight = 1.0
    for k, path in enumerate(combo):
        reach[k] = weight
        if net.paths[path].is_blackhole():
            break
        weight *= net.paths[path].loss_prob
    return reach


def delivery_prob(net: Network, workload: Workload, combo: Sequence[int]) -> float:
    """Fraction of data sent along `combo` that arrives before its deadline."""
    net.check_combination(combo)
    _require_fixed(net, combo)
    d_min = net.min_delay()
    total = 0.0
    elapsed = 0.0
    reach = 1.0
    for k, path in enumerate(combo):
        spec = net.paths[path]
        elapsed += spec.delay.seconds + (d_min if k > 0 else 0.0)
        if elapsed <= workload.lifetime_s + DEADLINE_TOL_S:
            total += reach * (1.0 - spec.loss_prob)
        if spec.is_blackhole():
            break
        reach *= spec.loss_prob
    return total


def combination_sent_rate(net: Network, workload: Workload, combo: Sequence[int]) -> np.ndarray:
    """Bit rate put on each path per unit of x assigned to `combo`."""
    net.check_combination(combo)
    column = np.zeros(net.n)
    for path, reach in zip(combo, attempt_reach(net, combo)):
        column[path] += workload.rate_bits_per_s * reach
    return column


def deterministic_coefficients(net: Network, workload: Workload) -> LpCoefficients:
    """Quality, bandwidth and cost coefficients for fixed-delay networks."""
    count = net.combination_count
    delivery = np.zeros(count)
    rates = np.zeros((net.n, count))
    for index, combo in enumerate(net.combinations()):
        delivery[index] = delivery_prob(net, workload, combo)
        rates[:, index] = combination_sent_rate(net, workload, combo)
    costs = np.array([path.cost_per_bit for path in net.paths])
    return LpCoefficients(delivery=delivery, rate_matrix=rates, cost_row=costs @ rates)


def _check_assignment(net: Network, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.combination_count,):
        raise NetworkShapeError(
            f"assignment has shape {x.shape}, expected ({net.combination_count},)")
    return x


def sent_rate(net: Network, workload: Workload, x: np.ndarray) -> np.ndarray:
    """S_r: bit rate sent along every path, retransmissions included."""
    x = _check_assignment(net, x)
    rates = np.zeros((net.n, net.combination_count))
    for index, combo in enumerate(net.combinations()):
        rates[:, index] = combination_sent_rate(net, workload, combo)
    return rates @ x


def quality(net: Network, workload: Workload, x: np.ndarray) -> float:
    """Communication quality Q = goodput / generated rate."""
    x = _check_assignment(net, x)
    delivery = np.array([delivery_prob(net, workload, combo) for combo in net.combinations()])
    return float(delivery @ x)


def total_cost(net: Network, workload: Workload, x: np.ndarray) -> float:
    """C = sum_i c_i * S_i (cost per second)."""
    costs = np.array([path.cost_per_bit for path in net.paths])
    return float(costs @ sent_rate(net, workload, x))


def evaluate_coefficients(coefficients: LpCoefficients, x: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """(quality, per-path sent rate, cost) of `x` under precomputed coefficients."""
    x = np.asarray(x, dtype=float)
    return (float(coefficients.delivery @ x),
            coefficients.rate_matrix @ x,
            float(coefficients.cost_row @ x))


# ---------------------------------------------------------------------------
# Blackhole and LP construction
# ---------------------------------------------------------------------------

def blackhole_path(workload: Workload) -> PathSpec:
    return PathSpec(bandwidth_bits_per_s=workload.rate_bits_per_s,
                    delay=BLACKHOLE_DELAY, loss_prob=1.0, cost_per_bit=0.0)


def augment_blackhole(net: Network, workload: Workload) -> Network:
    """Prepend the discarding path at index 0; user paths shift up by one."""
    if net.has_blackhole or any(path.is_blackhole() for path in net.paths):
        raise NetworkShapeError("network already contains a blackhole path")
    return Network(paths=(blackhole_path(workload),) + net.paths,
                   attempts=net.attempts, has_blackhole=True)


def _combination_labels(net: Network) -> Tuple[str, ...]:
    return tuple(format_combination(combo) for combo in net.combinations())


def build_quality_lp(net: Network, workload: Workload,
                     coefficients: Optional[LpCoefficients] = None) -> LpProblem:
    """Maximize quality subject to per-path bandwidth and the cost bound."""
    if not net.has_blackhole:
        raise NetworkShapeError("quality LP needs a blackhole-augmented network")
    if coefficients is None:
        coefficients = deterministic_coefficients(net, workload)
    bandwidths = np.array([path.bandwidth_bits_per_s for path in net.paths])
    matrix = np.vstack([coefficients.rate_matrix, coefficients.cost_row])
    rhs = np.append(bandwidths, workload.cost_bound)
    logger.info("quality LP: %d rows x %d combinations", matrix.shape[0], matrix.shape[1])
    return LpProblem(objective=coefficients.delivery.copy(), sense=Sense.MAXIMIZE,
                     ineq_matrix=matrix, ineq_rhs=rhs,
                     eq_row=np.ones(net.combination_count),
                     labels=_combination_labels(net))


def build_cost_lp(net: Network, workload: Workload, min_quality: float,
                  coefficients: Optional[LpCoefficients] = None) -> LpProblem:
    """Minimize cost subject to bandwidth and a lower bound on quality."""
    if not net.has_blackhole:
        raise NetworkShapeError("cost LP needs a blackhole-augmented network")
    if not 0.0 <= min_quality <= 1.0:
        raise ScenarioError(f"minimum quality must lie in [0, 1], got {min_quality}")
    if coefficients is None:
        coefficients = deterministic_coefficients(net, workload)
    bandwidths = np.array([path.bandwidth_bits_per_s for path in net.paths])
    matrix = np.vstack([coefficients.rate_matrix, -coefficients.delivery])
    rhs = np.append(bandwidths, -min_quality)
    logger.info("cost LP: %d rows x %d combinations, quality >= %g",
                matrix.shape[0], matrix.shape[1], min_quality)
    return LpProblem(objective=coefficients.cost_row.copy(), sense=Sense.MINIMIZE,
                     ineq_matrix=matrix, ineq_rhs=rhs,
                     eq_row=np.ones(net.combination_count),
                     labels=_combination_labels(net))


def restrict_columns(problem: LpProblem, allowed: Sequence[int]) -> LpProblem:
    """Keep only the listed combination columns."""
    allowed = list(allowed)
    labels = tuple(problem.labels[i] for i in allowed) if problem.labels else ()
    return LpProblem(objective=problem.objective[allowed], sense=problem.sense,
                     ineq_matrix=problem.ineq_matrix[:, allowed], ineq_rhs=problem.ineq_rhs,
                     eq_row=problem.eq_row[allowed], labels=labels)


def expand_solution(solution: Solution, allowed: Sequence[int], size: int) -> Solution:
    """Re-insert zeros for the columns removed by restrict_columns."""
    x = np.zeros(size)
    if solution.x.size:
        x[list(allowed)] = solution.x
    return replace(solution, x=x)


def combinations_using(net: Network, paths: Sequence[int]) -> list:
    """Indices of combinations whose every attempt uses one of `paths`."""
    keep = set(paths)
    return [index for index, combo in enumerate(net.combinations()) if set(combo) <= keep]


def fixed_timeout(net: Network, path_index: int, guard_s: float = 0.0) -> float:
    """Retransmission timeout t_i = d_i + d_min + guard for fixed delays."""
    if not 0 <= path_index < net.n:
        raise NetworkShapeError(f"path index {path_index} out of range")
    if guard_s < 0.0:
        raise ScenarioError(f"timeout guard must be >= 0, got {guard_s}")
    path = net.paths[path_index]
    if path.is_blackhole():
        raise TimeoutUndefinedError("data sent to the blackhole is gone; no timeout applies")
    return path.delay.mean() + net.min_delay() + guard_s


# ---------------------------------------------------------------------------
# Estimation error
# ---------------------------------------------------------------------------

DISTORTION_AXES = ("bandwidth", "delay", "loss")


def distort_path(path: PathSpec, axis: str, factor: float) -> PathSpec:
    if axis == "bandwidth":
        return replace(path, bandwidth_bits_per_s=path.bandwidth_bits_per_s * factor)
    if axis == "delay":
        return replace(path, delay=path.delay.scaled(factor))
    if axis == "loss":
        return replace(path, loss_prob=min(1.0, path.loss_prob * factor))
    raise ScenarioError(f"unknown distortion axis '{axis}', use one of {DISTORTION_AXES}")


def distort_network(net: Network, axis: str, factor: float,
                    paths: Optional[Sequence[int]] = None) -> Network:
    """Copy of `net` with one metric multiplied by `factor` on the selected paths."""
    if not factor > 0.0:
        raise ScenarioError(f"distortion factor must be > 0, got {factor}")
    selected = set(net.real_path_indices()) if paths is None else set(paths)
    distorted = tuple(
        distort_path(path, axis, factor) if index in selected and not path.is_blackhole() else path
        for index, path in enumerate(net.paths)
    )
    return replace(net, paths=distorted)


def pad_delays(net: Network, padding_s: Sequence[float]) -> Network:
    """Add a constant to each path's delay (blackhole untouched)."""
    if len(padding_s) != net.n:
        raise NetworkShapeError(f"expected {net.n} padding values, got {len(padding_s)}")
    padded = tuple(
        path if path.is_blackhole() or pad == 0.0 else replace(path, delay=path.delay.padded(pad))
        for path, pad in zip(net.paths, padding_s)
    )
    return replace(net, paths=padded)


def iter_single_path_sets(net: Network) -> Iterator[Tuple[int, list]]:
    """(path, allowed columns) for every real path together with the blackhole."""
    for path in net.real_path_indices():
        allowed_paths = [path] + ([BLACKHOLE_INDEX] if net.has_blackhole else [])
        yield path, combinations_using(net, allowed_paths)

# End of file #
