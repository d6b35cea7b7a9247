#!/usr/bin/env python3
"""
Path delay models: a fixed one-way delay or a shifted gamma distribution.
File: deadline_multipath/delay_models.py

Both models share one abstract base so the LP builders, the timeout
optimizer and the simulator can treat them uniformly. All values are seconds.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from deadline_multipath.errors import ScenarioError
from deadline_multipath.incomplete_gamma import gamma_cdf, gamma_pdf


class DelayModel(ABC):
    """Base class for the delay of one path."""

    @abstractmethod
    def get_kind_name(self) -> str:
        """Return a short name for displays and CSV output."""
        pass

    @abstractmethod
    def mean(self) -> float:
        """Expected delay."""
        pass

    @abstractmethod
    def variance(self) -> float:
        """Delay variance (0 for fixed delays)."""
        pass

    @abstractmethod
    def lower_bound(self) -> float:
        """Essential infimum of the delay."""
        pass

    @abstractmethod
    def cdf(self, x: float) -> float:
        """P(delay <= x)."""
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> Union[float, np.ndarray]:
        """Draw one delay (or an array of `size` delays)."""
        pass

    @abstractmethod
    def scaled(self, factor: float) -> "DelayModel":
        """Delay multiplied by `factor` (estimation error)."""
        pass

    @abstractmethod
    def padded(self, extra_s: float) -> "DelayModel":
        """Delay shifted by a constant `extra_s`."""
        pass

    def is_fixed(self) -> bool:
        return False

    def is_infinite(self) -> bool:
        return math.isinf(self.mean())

    def describe(self) -> str:
        """Human-readable summary in milliseconds."""
        if self.is_infinite():
            return "inf"
        return f"{self.get_kind_name()} mean {self.mean() * 1e3:.3f} ms"


@dataclass(frozen=True)
class FixedDelay(DelayModel):
    """Deterministic delay; +inf is reserved for the blackhole path."""

    seconds: float

    def __post_init__(self):
        if math.isnan(self.seconds) or self.seconds < 0.0:
            raise ScenarioError(f"fixed delay must be >= 0, got {self.seconds}")

    def get_kind_name(self) -> str:
        return "fixed"

    def mean(self) -> float:
        return self.seconds

    def variance(self) -> float:
        return 0.0

    def lower_bound(self) -> float:
        return self.seconds

    def cdf(self, x: float) -> float:
        return 1.0 if x >= self.seconds else 0.0

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> Union[float, np.ndarray]:
        if size is None:
            return self.seconds
        return np.full(size, self.seconds)

    def scaled(self, factor: float) -> "FixedDelay":
        if self.is_infinite():
            return self
        return FixedDelay(self.seconds * factor)

    def padded(self, extra_s: float) -> "FixedDelay":
        if self.is_infinite():
            return self
        return FixedDelay(self.seconds + extra_s)

    def is_fixed(self) -> bool:
        return True

    def describe(self) -> str:
        if self.is_infinite():
            return "inf"
        return f"{self.seconds * 1e3:g} ms"


@dataclass(frozen=True)
class ShiftedGammaDelay(DelayModel):
    """Delay = shift + X with X ~ Gamma(shape, scale)."""

    shift: float
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shift >= 0.0 and math.isfinite(self.shift)):
            raise ScenarioError(f"gamma shift must be finite and >= 0, got {self.shift}")
        if not self.shape > 0.0:
            raise ScenarioError(f"gamma shape must be > 0, got {self.shape}")
        if not self.scale > 0.0:
            raise ScenarioError(f"gamma scale must be > 0, got {self.scale}")

    def get_kind_name(self) -> str:
        return "gamma"

    def mean(self) -> float:
        return self.shift + self.shape * self.scale

    def variance(self) -> float:
        return self.shape * self.scale ** 2

    def lower_bound(self) -> float:
        return self.shift

    def support_upper(self) -> float:
        """Right edge of the tabulation support: mean + 12 * sqrt(shape) * scale."""
        return self.mean() + 12.0 * math.sqrt(self.shape) * self.scale

    def cdf(self, x: float) -> float:
        return gamma_cdf(self.shape, self.scale, x - self.shift)

    def pdf(self, x: float) -> float:
        return gamma_pdf(self.shape, self.scale, x - self.shift)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> Union[float, np.ndarray]:
        draw = rng.gamma(self.shape, self.scale, size)
        if size is None:
            return self.shift + float(draw)
        return self.shift + draw

    def scaled(self, factor: float) -> "ShiftedGammaDelay":
        return ShiftedGammaDelay(self.shift * factor, self.shape, self.scale * factor)

    def padded(self, extra_s: float) -> "ShiftedGammaDelay":
        return ShiftedGammaDelay(self.shift + extra_s, self.shape, self.scale)

    def describe(self) -> str:
        return (f"gamma eta {self.shift * 1e3:g} ms, alpha {self.shape:g}, "
                f"beta {self.scale * 1e3:g} ms")


BLACKHOLE_DELAY = FixedDelay(math.inf)

# End of file #
