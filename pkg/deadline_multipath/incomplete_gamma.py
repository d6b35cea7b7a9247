#!/usr/bin/env python3
"""
Regularized lower incomplete gamma function.
File: deadline_multipath/incomplete_gamma.py

Series representation below x = a + 1, Lentz continued fraction above it.
"""

import math
import sys

from deadline_multipath.errors import ScenarioError


_ACCURACY = 1.0e-15
_MAX_ITERATIONS = 10_000
_TINY = sys.float_info.min / sys.float_info.epsilon


def regularized_gamma_p(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a) for a > 0."""
    if a <= 0.0:
        raise ScenarioError(f"gamma shape must be positive, got {a}")
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return _series(a, x)
    return 1.0 - _continued_fraction(a, x)


def _prefactor(a: float, x: float) -> float:
    return math.exp(-x + a * math.log(x) - math.lgamma(a))


def _series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _ACCURACY:
            break
    return min(1.0, total * _prefactor(a, x))


def _continued_fraction(a: float, x: float) -> float:
    """Upper tail Q(a, x) by the modified Lentz method."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITERATIONS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _ACCURACY:
            break
    return max(0.0, min(1.0, _prefactor(a, x) * h))


def gamma_cdf(shape: float, scale: float, x: float) -> float:
    """CDF of a gamma variable with the SCALE convention: P(shape, x / scale)."""
    if scale <= 0.0:
        raise ScenarioError(f"gamma scale must be positive, got {scale}")
    if x <= 0.0:
        return 0.0
    return regularized_gamma_p(shape, x / scale)


def gamma_pdf(shape: float, scale: float, x: float) -> float:
    """Density of a gamma variable (scale convention)."""
    if x < 0.0:
        return 0.0
    if x == 0.0:
        if shape < 1.0:
            return math.inf
        return 1.0 / scale if shape == 1.0 else 0.0
    z = x / scale
    return math.exp((shape - 1.0) * math.log(z) - z - math.lgamma(shape)) / scale

# End of file #
