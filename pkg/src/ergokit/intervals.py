"""Outward-rounded interval arithmetic for the catalog map expressions.

Only the operations the catalog maps need: translation, scaling, and exact
range computation of sin/cos at integer frequencies.  Endpoints are widened
by one ulp after every operation so box-image enclosures stay outer bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(_down(self.lo + other.lo), _up(self.hi + other.hi))
        return Interval(_down(self.lo + other), _up(self.hi + other))

    def scale(self, c: float) -> "Interval":
        a, b = c * self.lo, c * self.hi
        if a > b:
            a, b = b, a
        return Interval(_down(a), _up(b))

    @property
    def width(self) -> float:
        return self.hi - self.lo


def sin_2pi(iv: Interval, freq: int = 1) -> Interval:
    """Exact range of sin(2*pi*freq*t) over the interval, widened outward."""
    return _trig_range(iv, freq, math.sin)


def cos_2pi(iv: Interval, freq: int = 1) -> Interval:
    return _trig_range(iv, freq, math.cos)


def _trig_range(iv: Interval, freq: int, fn) -> Interval:
    # work in phase units u = freq * t, where fn(2*pi*u) has critical points
    # at quarter-integers
    u0, u1 = freq * iv.lo, freq * iv.hi
    if u1 - u0 >= 1.0:
        return Interval(-1.0, 1.0)
    vals = [fn(2 * math.pi * u0), fn(2 * math.pi * u1)]
    k = math.ceil(u0 * 4)
    while k <= math.floor(u1 * 4):
        vals.append(fn(2 * math.pi * (k / 4.0)))
        k += 1
    return Interval(_down(min(vals)), _up(max(vals)))
