#!/usr/bin/env python3
"""
Discrete-event simulation of one sender, one receiver and n paths.
File: deadline_multipath/sim.py

The sender generates fixed-size packets at a constant rate, assigns each to
a path combination with the scheduler, and retransmits on the next path of
the combination when no acknowledgment arrived within the timeout. Each path
serializes packets at its bandwidth through a drop-tail FIFO buffer, erases
packets independently with probability tau and delays survivors by a draw
from its delay model. Arrival order on a path always equals send order. The
receiver acknowledges every arrival on the path with the smallest expected
delay; acknowledgments are never lost and never queue behind data.
An erased or overflowed copy whose next slot is the blackhole is dropped at
once, so every attempt ends as exactly one of dropped, lost or delivered.
"""

import heapq
import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from deadline_multipath.errors import NetworkShapeError, ScenarioError
from deadline_multipath.lp import SolverConfig, best_single_path_quality, solve
from deadline_multipath.model import (
    BLACKHOLE_INDEX, LpCoefficients, LpProblem, Network, PathSpec, Solution, Workload,
    build_cost_lp, build_quality_lp, deterministic_coefficients, distort_network, pad_delays,
)
from deadline_multipath.scheduler import ActionKind, AssignmentState, next_action
from deadline_multipath.stochastic import (
    TimeoutTable, fixed_timeout_table, optimize_all_timeouts, stochastic_lp_coefficients,
)


logger = logging.getLogger(__name__)

DEFAULT_TOTAL_PACKETS = 100_000
DEFAULT_QUEUE_PACKETS = 100
ACK_BYTES = 64
_DRAW_BLOCK = 4096


class EventKind(IntEnum):
    """Values double as tie-break priority at equal times."""

    CHANNEL_DELIVER = 0
    ACK_DELIVER = 1
    RETRANS_TIMEOUT = 2
    GENERATE = 3


class Event(NamedTuple):
    time_s: float
    kind: EventKind
    sequence: int
    packet_id: int = -1
    attempt: int = 0
    path: int = -1


@dataclass
class Packet:
    seq: int
    created_at_s: float
    size_bits: int
    combo: int
    attempt: int = 0
    acked: bool = False
    in_time: bool = False
    arrivals: int = 0


@dataclass(frozen=True)
class ChannelOptions:
    """Simulation-only channel settings; None bandwidth means the path's b_i."""

    bandwidth_bits_per_s: Optional[float] = None
    queue_packets: Optional[int] = DEFAULT_QUEUE_PACKETS


class _Stream:
    """Block-buffered draws from one named random stream."""

    def __init__(self, rng: np.random.Generator, draw):
        self._rng = rng
        self._draw = draw
        self._buffer = np.empty(0)
        self._next = 0

    def take(self) -> float:
        if self._next >= self._buffer.size:
            self._buffer = self._draw(self._rng, _DRAW_BLOCK)
            self._next = 0
        value = self._buffer[self._next]
        self._next += 1
        return float(value)


_LOSS, _DELAY, _ACK = 0, 1, 2


def _stream_rng(seed: int, path: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, path, purpose]))


class Channel:
    """One simulated path: drop-tail FIFO, serialization, erasure, propagation."""

    ERASED = "erased"
    OVERFLOW = "overflow"
    SENT = "sent"

    def __init__(self, index: int, spec: PathSpec, options: ChannelOptions, seed: int):
        self.index = index
        self.spec = spec
        self.bandwidth = options.bandwidth_bits_per_s or spec.bandwidth_bits_per_s
        if not self.bandwidth > 0.0:
            raise ScenarioError(f"path {index} has no bandwidth to simulate")
        self.queue_packets = options.queue_packets
        self.busy_until = 0.0
        self.last_arrival = 0.0
        self.bits_sent = 0
        self.window_start: Optional[float] = None
        self._in_system = deque()
        self._loss = _Stream(_stream_rng(seed, index, _LOSS), lambda rng, k: rng.random(k))
        self._delay = _Stream(_stream_rng(seed, index, _DELAY),
                              lambda rng, k: np.asarray(spec.delay.sample(rng, k), dtype=float))

    def transmit(self, now: float, bits: int) -> Tuple[str, float]:
        """Queue a packet at `now`; returns (outcome, arrival time)."""
        in_system = self._in_system
        while in_system and in_system[0] <= now:
            in_system.popleft()
        if self.queue_packets is not None and len(in_system) > self.queue_packets:
            return self.OVERFLOW, math.nan
        start = max(now, self.busy_until)
        finish = start + bits / self.bandwidth
        self.busy_until = finish
        in_system.append(finish)
        if self.window_start is None:
            self.window_start = start
        self.bits_sent += bits
        if self._loss.take() < self.spec.loss_prob:
            return self.ERASED, math.nan
        arrival = max(finish + self._delay.take(), self.last_arrival)
        self.last_arrival = arrival
        return self.SENT, arrival


@dataclass
class SimReport:
    generated: int
    delivered_in_time: int
    realized_quality: float
    bits_per_path: Tuple[int, ...]
    realized_cost: float
    latency_samples: np.ndarray
    duration_s: float
    duplicates: int = 0
    attempt_outcomes: Dict[int, Dict[str, int]] = field(default_factory=dict)
    throughput_bps: Tuple[float, ...] = ()
    real_paths: Tuple[int, ...] = ()

    def csv_row(self, seed: int) -> list:
        mean_latency = float(self.latency_samples.mean()) if self.latency_samples.size else math.nan
        bits = [self.bits_per_path[i] for i in self.real_paths]
        return ([seed, self.generated, self.delivered_in_time, f"{self.realized_quality:.6f}",
                 f"{self.realized_cost:.6g}"] + bits + [f"{mean_latency:.6f}"])


def report_header(net: Network) -> List[str]:
    """CSV header matching SimReport.csv_row; one bits column per real path."""
    return (["seed", "generated", "delivered_in_time", "realized_quality", "realized_cost"]
            + [f"bits_path_{i}" for i in net.real_path_indices()] + ["mean_latency_s"])


class Simulation:
    """Single-threaded event loop for one run."""

    def __init__(self, net: Network, workload: Workload, solution: Solution,
                 timeouts: TimeoutTable, seed: int = 0,
                 total_packets: int = DEFAULT_TOTAL_PACKETS,
                 channel_options: Optional[Sequence[ChannelOptions]] = None,
                 ack_bytes: int = ACK_BYTES):
        if solution.x.shape != (net.combination_count,):
            raise NetworkShapeError(
                f"solution has {solution.x.size} entries, network needs {net.combination_count}")
        if not solution.is_optimal:
            raise ScenarioError(f"cannot simulate a {solution.status.value} solution")
        if total_packets < 0:
            raise ScenarioError("total_packets must be >= 0")
        options = list(channel_options) if channel_options is not None else [ChannelOptions()] * net.n
        if len(options) != net.n:
            raise NetworkShapeError(f"expected {net.n} channel option entries, got {len(options)}")
        self.net = net
        self.workload = workload
        self.timeouts = timeouts
        self.total_packets = total_packets
        self.interval = workload.packet_bits / workload.rate_bits_per_s
        self.state = AssignmentState(solution.x)
        self.combos = list(net.combinations())
        self.channels: Dict[int, Channel] = {
            i: Channel(i, net.paths[i], options[i], seed)
            for i in net.real_path_indices()
        }
        ack_index = net.min_delay_index()
        ack_spec = net.paths[ack_index]
        ack_bandwidth = options[ack_index].bandwidth_bits_per_s or ack_spec.bandwidth_bits_per_s
        self.ack_serialization = ack_bytes * 8 / ack_bandwidth if ack_bandwidth > 0 else 0.0
        self._ack_delay = _Stream(_stream_rng(seed, ack_index, _ACK),
                                  lambda rng, k: np.asarray(ack_spec.delay.sample(rng, k), dtype=float))
        self.packets: List[Packet] = []
        self.events: List[Event] = []
        self._sequence = 0
        self.delivered_in_time = 0
        self.duplicates = 0
        self.latencies: List[float] = []
        self.outcomes: Dict[int, Dict[str, int]] = {
            k: {"dropped": 0, "lost": 0, "delivered": 0} for k in range(net.attempts)
        }

    def _push(self, time_s: float, kind: EventKind, packet_id: int = -1,
              attempt: int = 0, path: int = -1) -> None:
        self._sequence += 1
        heapq.heappush(self.events, Event(time_s, kind, self._sequence, packet_id, attempt, path))

    def run(self) -> SimReport:
        if self.total_packets:
            self._push(0.0, EventKind.GENERATE)
        handlers = {
            EventKind.GENERATE: self._on_generate,
            EventKind.CHANNEL_DELIVER: self._on_channel_deliver,
            EventKind.ACK_DELIVER: self._on_ack,
            EventKind.RETRANS_TIMEOUT: self._on_timeout,
        }
        processed = 0
        while self.events:
            event = heapq.heappop(self.events)
            handlers[event.kind](event)
            processed += 1
        logger.debug("event loop processed %d events", processed)
        return self._report()

    def _on_generate(self, event: Event) -> None:
        seq = len(self.packets)
        combo = self.state.select()
        packet = Packet(seq=seq, created_at_s=event.time_s,
                        size_bits=self.workload.packet_bits, combo=combo)
        self.packets.append(packet)
        self._attempt(packet, 0, event.time_s)
        if seq + 1 < self.total_packets:
            self._push((seq + 1) * self.interval, EventKind.GENERATE)

    def _attempt(self, packet: Packet, attempt: int, now: float) -> None:
        combo = self.combos[packet.combo]
        action = next_action(combo, attempt, self.net.has_blackhole)
        if action.kind == ActionKind.ABANDON:
            return
        packet.attempt = attempt
        if action.kind == ActionKind.DROP:
            self.outcomes[attempt]["dropped"] += 1
            return
        outcome, arrival = self.channels[action.path].transmit(now, packet.size_bits)
        if outcome == Channel.SENT:
            self._push(arrival, EventKind.CHANNEL_DELIVER, packet.seq, attempt, action.path)
        else:
            self.outcomes[attempt]["lost"] += 1
        if attempt + 1 < len(combo):
            following = combo[attempt + 1]
            if self.net.has_blackhole and following == BLACKHOLE_INDEX:
                # the blackhole slot takes exactly the copies that never arrive
                if outcome != Channel.SENT:
                    self._attempt(packet, attempt + 1, now)
                return
            timeout = self.timeouts.timeout(action.path, following)
            if timeout is not None:
                self._push(now + timeout, EventKind.RETRANS_TIMEOUT, packet.seq, attempt + 1)

    def _on_channel_deliver(self, event: Event) -> None:
        packet = self.packets[event.packet_id]
        self.outcomes[event.attempt]["delivered"] += 1
        packet.arrivals += 1
        if packet.arrivals > 1:
            self.duplicates += 1
        deadline = packet.created_at_s + self.workload.lifetime_s
        if not packet.in_time and event.time_s <= deadline + 1e-12:
            packet.in_time = True
            self.delivered_in_time += 1
            self.latencies.append(event.time_s - packet.created_at_s)
        ack_time = event.time_s + self.ack_serialization + self._ack_delay.take()
        self._push(ack_time, EventKind.ACK_DELIVER, packet.seq)

    def _on_ack(self, event: Event) -> None:
        self.packets[event.packet_id].acked = True

    def _on_timeout(self, event: Event) -> None:
        packet = self.packets[event.packet_id]
        if not packet.acked:
            self._attempt(packet, event.attempt, event.time_s)

    def _report(self) -> SimReport:
        generated = len(self.packets)
        duration = generated * self.interval
        bits = [0] * self.net.n
        throughput = [0.0] * self.net.n
        for index, channel in self.channels.items():
            bits[index] = channel.bits_sent
            if channel.window_start is not None and channel.busy_until > channel.window_start:
                throughput[index] = channel.bits_sent / (channel.busy_until - channel.window_start)
        cost = 0.0
        if duration > 0:
            cost = sum(path.cost_per_bit * b for path, b in zip(self.net.paths, bits)) / duration
        quality = self.delivered_in_time / generated if generated else 0.0
        logger.info("simulated %d packets: %d in time (%.4f), %d duplicates",
                    generated, self.delivered_in_time, quality, self.duplicates)
        return SimReport(generated=generated, delivered_in_time=self.delivered_in_time,
                         realized_quality=quality, bits_per_path=tuple(bits),
                         realized_cost=cost, latency_samples=np.asarray(self.latencies),
                         duration_s=duration, duplicates=self.duplicates,
                         attempt_outcomes=self.outcomes, throughput_bps=tuple(throughput),
                         real_paths=tuple(self.net.real_path_indices()))


def run(net: Network, workload: Workload, solution: Solution, timeouts: TimeoutTable,
        seed: int = 0, total_packets: int = DEFAULT_TOTAL_PACKETS,
        channel_options: Optional[Sequence[ChannelOptions]] = None) -> SimReport:
    """Simulate `total_packets` packets sent according to `solution` over `net`."""
    return Simulation(net, workload, solution, timeouts, seed, total_packets, channel_options).run()


# ---------------------------------------------------------------------------
# Sender planning and sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SenderPlan:
    """What the sender derives from its view of the network."""

    model: Network
    coefficients: LpCoefficients
    problem: LpProblem
    solution: Solution
    timeouts: TimeoutTable


def plan_sender(estimate: Network, workload: Workload, padding_s: Optional[Sequence[float]] = None,
                guard_s: float = 0.0, timeout_mode: str = "fixed",
                min_quality: Optional[float] = None,
                solver_config: Optional[SolverConfig] = None) -> SenderPlan:
    """Build the model view, timeouts and LP solution from estimated path metrics.

    `estimate` must be blackhole-augmented. Fixed-mode timeouts use the
    unpadded estimate plus the guard; the LP uses the padded view. With
    `min_quality` set the cost LP is solved instead of the quality LP.
    """
    model = pad_delays(estimate, padding_s) if padding_s is not None else estimate
    if timeout_mode == "fixed":
        timeouts = fixed_timeout_table(estimate, guard_s)
    elif timeout_mode == "optimized":
        timeouts = optimize_all_timeouts(model, workload)
    else:
        raise ScenarioError(f"unknown timeout mode '{timeout_mode}', use 'fixed' or 'optimized'")
    if model.all_fixed() and timeout_mode == "fixed":
        coefficients = deterministic_coefficients(model, workload)
    else:
        coefficients = stochastic_lp_coefficients(model, workload, timeouts)
    if min_quality is None:
        problem = build_quality_lp(model, workload, coefficients)
    else:
        problem = build_cost_lp(model, workload, min_quality, coefficients)
    solution = solve(problem, solver_config)
    return SenderPlan(model=model, coefficients=coefficients, problem=problem,
                      solution=solution, timeouts=timeouts)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    theoretical_q: float
    simulated_q: float
    single_path_best_q: float


def _simulate_plan(truth: Network, workload: Workload, plan: SenderPlan, seed: int,
                   total_packets: int, channel_options) -> float:
    if not plan.solution.is_optimal:
        return 0.0
    report = run(truth, workload, plan.solution, plan.timeouts, seed, total_packets, channel_options)
    return report.realized_quality


def _sensitivity_point(args) -> SweepPoint:
    (truth, workload, axis, factor, paths, padding_s, guard_s, timeout_mode,
     seed, total_packets, channel_options) = args
    estimate = distort_network(truth, axis, factor, paths)
    plan = plan_sender(estimate, workload, padding_s, guard_s, timeout_mode)
    theoretical = plan.solution.objective_value if plan.solution.is_optimal else 0.0
    simulated = _simulate_plan(truth, workload, plan, seed, total_packets, channel_options)
    single = best_single_path_quality(plan.model, workload, plan.problem)
    return SweepPoint(factor, theoretical, simulated, single)


def sensitivity_points(net_true: Network, workload: Workload, error_axis: str,
                       factors: Sequence[float], seed: int = 0,
                       total_packets: int = DEFAULT_TOTAL_PACKETS,
                       padding_s: Optional[Sequence[float]] = None, guard_s: float = 0.0,
                       timeout_mode: str = "fixed", paths: Optional[Sequence[int]] = None,
                       channel_options: Optional[Sequence[ChannelOptions]] = None,
                       jobs: int = 1) -> List[SweepPoint]:
    """One simulation per factor; the sender plans with distorted metrics."""
    if error_axis not in ("bandwidth", "delay", "loss"):
        raise ScenarioError(f"unknown error axis '{error_axis}'")
    for factor in factors:
        if not factor > 0.0:
            raise ScenarioError(f"distortion factors must be > 0, got {factor}")
    tasks = [(net_true, workload, error_axis, float(factor), paths, padding_s, guard_s,
              timeout_mode, seed, total_packets, channel_options) for factor in factors]
    return fan_out(_sensitivity_point, tasks, jobs)


def sensitivity_sweep(net_true: Network, workload: Workload, error_axis: str,
                      factors: Sequence[float], seed: int = 0, **kwargs) -> List[Tuple[float, float]]:
    """(factor, realized quality) pairs."""
    points = sensitivity_points(net_true, workload, error_axis, factors, seed, **kwargs)
    return [(point.value, point.simulated_q) for point in points]


def fan_out(function, tasks: list, jobs: int = 1) -> list:
    """Map `function` over `tasks`, in parallel when jobs > 1; order follows `tasks`."""
    if jobs <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(function, tasks))

# End of file #
