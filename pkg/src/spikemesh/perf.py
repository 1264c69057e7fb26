"""Analytic timing model of the core controller.

The cycle count is an empirical fit: a full crossbar sweep costs
``num_axons * (num_neurons + 3) + 4`` cycles.  Rates are kept as exact
fractions and floored only at the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def _positive(name: str, v) -> None:
    if v <= 0:
        raise ValueError(f"{name} must be positive, got {v}")


def cycles_per_tick(num_axons: int, num_neurons: int) -> int:
    _positive("num_axons", num_axons)
    _positive("num_neurons", num_neurons)
    return num_axons * (num_neurons + 3) + 4


def _rational(v) -> Fraction:
    # strings and ints stay exact; floats go through their shortest repr
    return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)


def tick_rate(clock_hz, cycles: int) -> Fraction:
    """Maximum tick frequency in Hz."""
    if cycles < 1:
        raise ValueError(f"cycles must be >= 1, got {cycles}")
    return _rational(clock_hz) / cycles


@dataclass(frozen=True)
class PerfQuery:
    num_axons: int
    num_neurons: int
    clock_hz: Fraction | int | float | str
    parallel_instances: int = 1
    ticks_per_item: int = 1

    def __post_init__(self):
        object.__setattr__(self, "clock_hz", _rational(self.clock_hz))
        for name in ("num_axons", "num_neurons", "clock_hz", "parallel_instances", "ticks_per_item"):
            _positive(name, getattr(self, name))

    @property
    def cycles(self) -> int:
        return cycles_per_tick(self.num_axons, self.num_neurons)

    @property
    def tick_rate(self) -> Fraction:
        return tick_rate(self.clock_hz, self.cycles)


def throughput(q: PerfQuery) -> int:
    """Items per second across all parallel instances, floored once."""
    return math.floor(q.parallel_instances * q.clock_hz / (q.cycles * q.ticks_per_item))
