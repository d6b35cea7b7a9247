#!/usr/bin/env python3
"""
Scenario documents: JSON in Mbps / ms / bytes, converted to SI on ingestion.
File: deadline_multipath/config.py

Example (the two-path network with fixed delays):

    {
      "workload": {"rate_mbps": 90, "lifetime_ms": 800},
      "paths": [
        {"bandwidth_mbps": 80, "delay": {"fixed_ms": 400}, "loss": 0.2,
         "model_delay_padding_ms": 50},
        {"bandwidth_mbps": 20, "delay": {"fixed_ms": 100}, "loss": 0.0,
         "model_delay_padding_ms": 50}
      ],
      "guard_ms": 100
    }

Path indices in the document start at 1; index 0 is always the blackhole
added by augmentation.
"""

import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from deadline_multipath.delay_models import DelayModel, FixedDelay, ShiftedGammaDelay
from deadline_multipath.errors import ScenarioError
from deadline_multipath.model import Network, PathSpec, Workload, augment_blackhole
from deadline_multipath.sim import DEFAULT_QUEUE_PACKETS, DEFAULT_TOTAL_PACKETS, ChannelOptions


logger = logging.getLogger(__name__)

MBPS = 1e6
MS = 1e-3
TIMEOUT_MODES = ("fixed", "optimized")


def _number(data: Dict[str, Any], key: str, where: str, default: Any = None,
            allow_null: bool = False) -> float:
    """Finite number under `key`; `null` means +inf only where `allow_null` is set."""
    if key not in data:
        if default is None:
            raise ScenarioError(f"{where}: missing '{key}'")
        return default
    value = data[key]
    if value is None:
        if allow_null:
            return math.inf
        raise ScenarioError(f"{where}: '{key}' must be a number, got null")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: '{key}' must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ScenarioError(f"{where}: '{key}' must be finite, got {value!r}")
    return float(value)


def _parse_delay(data: Any, where: str) -> DelayModel:
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: 'delay' must be an object")
    if "fixed_ms" in data:
        return FixedDelay(_number(data, "fixed_ms", where) * MS)
    if "gamma" in data:
        gamma = data["gamma"]
        if not isinstance(gamma, dict):
            raise ScenarioError(f"{where}: 'gamma' must be an object")
        return ShiftedGammaDelay(shift=_number(gamma, "eta_ms", where) * MS,
                                 shape=_number(gamma, "alpha", where),
                                 scale=_number(gamma, "beta_ms", where) * MS)
    raise ScenarioError(f"{where}: delay needs 'fixed_ms' or 'gamma'")


@dataclass(frozen=True)
class PathEntry:
    """One path of the document, plus its model-only and simulation-only settings."""

    spec: PathSpec
    padding_s: float = 0.0
    channel: ChannelOptions = ChannelOptions()

    @classmethod
    def from_dict(cls, data: Any, position: int) -> "PathEntry":
        where = f"path {position}"
        if not isinstance(data, dict):
            raise ScenarioError(f"{where}: must be an object")
        spec = PathSpec(bandwidth_bits_per_s=_number(data, "bandwidth_mbps", where) * MBPS,
                        delay=_parse_delay(data.get("delay"), where),
                        loss_prob=_number(data, "loss", where, 0.0),
                        cost_per_bit=_number(data, "cost_per_bit", where, 0.0))
        padding = _number(data, "model_delay_padding_ms", where, 0.0) * MS
        if padding < 0.0:
            raise ScenarioError(f"{where}: delay padding must be >= 0")
        sim_bandwidth = data.get("sim_bandwidth_mbps")
        queue = data.get("queue_packets", DEFAULT_QUEUE_PACKETS)
        if queue is not None and (not isinstance(queue, int) or queue < 0):
            raise ScenarioError(f"{where}: 'queue_packets' must be a non-negative integer or null")
        channel = ChannelOptions(
            bandwidth_bits_per_s=None if sim_bandwidth is None
            else _number(data, "sim_bandwidth_mbps", where) * MBPS,
            queue_packets=queue)
        return cls(spec=spec, padding_s=padding, channel=channel)


@dataclass(frozen=True)
class ScenarioConfig:
    workload: Workload
    paths: Tuple[PathEntry, ...]
    attempts: int = 2
    guard_s: float = 0.0
    seed: int = 0
    total_packets: int = DEFAULT_TOTAL_PACKETS
    timeout_mode: str = "fixed"

    def __post_init__(self):
        if not self.paths:
            raise ScenarioError("scenario needs at least one path")
        if self.guard_s < 0.0:
            raise ScenarioError("guard must be >= 0")
        if self.timeout_mode not in TIMEOUT_MODES:
            raise ScenarioError(f"timeout_mode must be one of {TIMEOUT_MODES}")
        if self.total_packets < 0:
            raise ScenarioError("total_packets must be >= 0")
        # validates attempts and the delay set as a network would
        self.true_network()

    @classmethod
    def from_dict(cls, data: Any) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ScenarioError("scenario document must be a JSON object")
        load = data.get("workload")
        if not isinstance(load, dict):
            raise ScenarioError("scenario needs a 'workload' object")
        workload = Workload(
            rate_bits_per_s=_number(load, "rate_mbps", "workload") * MBPS,
            lifetime_s=_number(load, "lifetime_ms", "workload") * MS,
            cost_bound=_number(load, "cost_bound", "workload", math.inf, allow_null=True),
            packet_bits=int(_number(load, "packet_bytes", "workload", 1024)) * 8,
        )
        raw_paths = data.get("paths")
        if not isinstance(raw_paths, list) or not raw_paths:
            raise ScenarioError("scenario needs a non-empty 'paths' list")
        paths = tuple(PathEntry.from_dict(entry, k + 1) for k, entry in enumerate(raw_paths))
        attempts = data.get("attempts", 2)
        seed = data.get("seed", 0)
        total = data.get("total_packets", DEFAULT_TOTAL_PACKETS)
        for key, value in (("attempts", attempts), ("seed", seed), ("total_packets", total)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(f"'{key}' must be an integer, got {value!r}")
        config = cls(workload=workload, paths=paths, attempts=attempts,
                     guard_s=_number(data, "guard_ms", "scenario", 0.0) * MS,
                     seed=seed, total_packets=total,
                     timeout_mode=data.get("timeout_mode", "fixed"))
        logger.info("scenario: %d paths, lambda %.3g bit/s, delta %.3g s",
                    len(paths), workload.rate_bits_per_s, workload.lifetime_s)
        return config

    def true_network(self) -> Network:
        """Ground truth, blackhole-augmented."""
        net = Network(paths=tuple(entry.spec for entry in self.paths), attempts=self.attempts)
        return augment_blackhole(net, self.workload)

    def padding(self) -> Tuple[float, ...]:
        """Model delay padding per augmented path index."""
        return (0.0,) + tuple(entry.padding_s for entry in self.paths)

    def channel_options(self) -> Tuple[ChannelOptions, ...]:
        return (ChannelOptions(),) + tuple(entry.channel for entry in self.paths)

    def with_overrides(self, seed: Optional[int] = None, attempts: Optional[int] = None,
                       rate_bits_per_s: Optional[float] = None,
                       lifetime_s: Optional[float] = None) -> "ScenarioConfig":
        workload = self.workload
        if rate_bits_per_s is not None:
            workload = replace(workload, rate_bits_per_s=rate_bits_per_s)
        if lifetime_s is not None:
            workload = replace(workload, lifetime_s=lifetime_s)
        return replace(self, workload=workload,
                       seed=self.seed if seed is None else seed,
                       attempts=self.attempts if attempts is None else attempts)


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario '{path}': {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario '{path}' is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(data)

# End of file #
