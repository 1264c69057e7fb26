"""Spike traces, error logs and trace comparison."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np


class SpikeEvent(NamedTuple):
    tick: int
    x: int
    y: int
    neuron: int

    def to_json(self) -> str:
        return f'{{"tick":{self.tick},"x":{self.x},"y":{self.y},"neuron":{self.neuron}}}'


class Trace:
    """Spikes sent to the output core, in canonical order.

    Canonical order is (tick, source core row-major index, neuron).  Events
    are stored column-wise so that long runs stay cheap.
    """

    __slots__ = ("tick", "x", "y", "neuron")

    def __init__(self, tick=(), x=(), y=(), neuron=()):
        cols = [np.asarray(c, dtype=np.int64).reshape(-1) for c in (tick, x, y, neuron)]
        if len({len(c) for c in cols}) != 1:
            raise ValueError("trace columns differ in length")
        # row-major core index order is (y, x) order
        order = np.lexsort((cols[3], cols[1], cols[2], cols[0]))
        self.tick, self.x, self.y, self.neuron = (c[order] for c in cols)

    @classmethod
    def from_events(cls, events: Iterable[SpikeEvent]) -> "Trace":
        ev = list(events)
        if not ev:
            return cls()
        return cls(*zip(*ev))

    def __len__(self) -> int:
        return len(self.tick)

    def __iter__(self) -> Iterator[SpikeEvent]:
        for t, x, y, n in zip(self.tick.tolist(), self.x.tolist(), self.y.tolist(), self.neuron.tolist()):
            yield SpikeEvent(t, x, y, n)

    def __getitem__(self, i: int) -> SpikeEvent:
        return SpikeEvent(int(self.tick[i]), int(self.x[i]), int(self.y[i]), int(self.neuron[i]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return compare_traces(self, other).equal

    def __repr__(self) -> str:
        return f"Trace({len(self)} events)"

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        events = []
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                events.append(SpikeEvent(d["tick"], d["x"], d["y"], d["neuron"]))
        return cls.from_events(events)

    @classmethod
    def read(cls, path: str | Path) -> "Trace":
        return cls.from_jsonl(Path(path).read_text())

    def window(self, first: int, last: int) -> "Trace":
        """Events with ``first <= tick <= last``."""
        m = (self.tick >= first) & (self.tick <= last)
        return Trace(self.tick[m], self.x[m], self.y[m], self.neuron[m])


@dataclass(frozen=True)
class TraceComparison:
    equal: bool
    index: int | None = None
    tick: int | None = None
    left: SpikeEvent | None = None
    right: SpikeEvent | None = None

    def __bool__(self) -> bool:
        return self.equal

    def describe(self) -> str:
        if self.equal:
            return "traces are identical"
        return (f"first divergence at event {self.index} (tick {self.tick}): "
                f"{self.left.to_json() if self.left else '<end>'} vs "
                f"{self.right.to_json() if self.right else '<end>'}")


def compare_traces(a: Trace, b: Trace) -> TraceComparison:
    """Exact comparison of canonical serialisations; reports the first differing event."""
    n = min(len(a), len(b))
    diff = np.flatnonzero((a.tick[:n] != b.tick[:n]) | (a.x[:n] != b.x[:n])
                          | (a.y[:n] != b.y[:n]) | (a.neuron[:n] != b.neuron[:n]))
    if diff.size:
        i = int(diff[0])
    elif len(a) != len(b):
        i = n
    else:
        return TraceComparison(True)
    left = a[i] if i < len(a) else None
    right = b[i] if i < len(b) else None
    tick = min(e.tick for e in (left, right) if e is not None)
    return TraceComparison(False, i, tick, left, right)


def count_output_spikes(trace: Trace, window: tuple[int, int] | None = None,
                        source: tuple[int, int] | None = None,
                        num_neurons: int | None = None) -> dict[int, int]:
    """Spike count per source neuron.

    ``window`` is an inclusive tick range.  If the trace holds spikes from
    several cores, ``source`` must pick one.
    """
    t = trace if window is None else trace.window(*window)
    if source is not None:
        m = (t.x == source[0]) & (t.y == source[1])
        neurons = t.neuron[m]
    else:
        if len(t) and (np.unique(t.x).size > 1 or np.unique(t.y).size > 1):
            raise ValueError("trace mixes several source cores; pass source=")
        neurons = t.neuron
    counts = Counter(neurons.tolist())
    if num_neurons is not None:
        return {j: counts.get(j, 0) for j in range(num_neurons)}
    return dict(sorted(counts.items()))


class ErrorKind(enum.Enum):
    SCHEDULER_LATE_DROP = "SchedulerLateDrop"
    BUDGET_OVERRUN = "BudgetOverrun"
    OVERFLOW = "Overflow"
    CONGESTION = "Congestion"


class ErrorEvent(NamedTuple):
    tick: int
    kind: ErrorKind
    location: str

    def to_json(self) -> str:
        return json.dumps({"tick": self.tick, "kind": self.kind.value, "location": self.location})


class ErrorLog(list):
    """Append-only list of :class:`ErrorEvent`."""

    def add(self, tick: int, kind: ErrorKind, location: str) -> None:
        self.append(ErrorEvent(tick, kind, location))

    def of_kind(self, kind: ErrorKind) -> list[ErrorEvent]:
        return [e for e in self if e.kind is kind]

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())
