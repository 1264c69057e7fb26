"""Lockstep tick engine.

Each tick runs three phases:

1. external input spikes stamped with this tick are written into the
   schedulers (relative to the slot consumed by the previous tick);
2. every core advances its scheduler and evaluates its neurons;
3. the packets emitted in phase 2 are routed and written into the
   destination schedulers, relative to the slot consumed this tick.

A packet emitted at tick ``t`` with offset ``d`` is therefore integrated at
tick ``t + d``, and an input spike stamped ``t`` with offset ``d`` at
``t + d - 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .core import Core, DebugRow, NeuronSummary
from .errors import ConfigurationError, PotentialOverflow
from .network import InputSchedule, NetworkConfig, validate_inputs
from .noc import Fidelity, MeshNetwork, Packet
from .perf import cycles_per_tick
from .trace import ErrorKind, ErrorLog, SpikeEvent, Trace


@dataclass
class SimulationResult:
    trace: Trace
    errors: ErrorLog
    ticks: int  # ticks requested
    quiescent_at: int | None = None  # first tick after which nothing can change
    debug_rows: dict[tuple[int, int], list[DebugRow]] | None = None
    summaries: dict[tuple[int, int], list[NeuronSummary]] | None = None
    potentials: dict[tuple[int, int], list[int]] = field(default_factory=dict)

    def __iter__(self):
        # allows ``trace, errors = run(...)``
        yield self.trace
        yield self.errors


class Simulator:
    """Pure-Python reference engine.

    ``order`` fixes the core evaluation order inside a tick: ``None`` keeps
    the row-major order, a ``random.Random`` reshuffles every tick and a
    sequence of core coordinates is used verbatim.  None of these change the
    result; the option exists to demonstrate exactly that.
    """

    def __init__(self, net: NetworkConfig, inputs: InputSchedule | None = None, *,
                 fidelity: Fidelity | str | None = None, output_core: tuple[int, int] | None = None,
                 debug: bool = False, cycle_budget: int | None = None,
                 order: random.Random | Sequence[tuple[int, int]] | None = None,
                 record_hops: bool = False):
        inputs = inputs or InputSchedule()
        validate_inputs(net, inputs)
        self.net = net
        self.grid = net.grid
        self.fidelity = Fidelity(fidelity) if fidelity is not None else net.grid.fidelity
        out = tuple(output_core) if output_core is not None else net.output_core
        if out not in {c.coords for c in net.cores}:
            raise ConfigurationError(f"no core at {out}", "output_core")
        self.output_index = self.grid.index(*out)
        self.cores: dict[int, Core] = {}
        for spec in net.ordered_cores():
            self.cores[self.grid.index(spec.x, spec.y)] = Core(spec.params, spec.axon_types, spec.neurons)
        self._order = order
        if order is not None and not isinstance(order, random.Random):
            idx = [self.grid.index(*xy) for xy in order]
            if sorted(idx) != sorted(self.cores):
                raise ConfigurationError("evaluation order must list every core exactly once")
            self._fixed_order = idx
        self._inputs: dict[int, list] = {}
        for s in inputs.spikes:
            self._inputs.setdefault(s.tick, []).append(s)
        self._last_input = inputs.last_tick
        self.debug = debug
        self.debug_rows = {self.grid.coords(i): [] for i in self.cores} if debug else None
        self.summaries = {self.grid.coords(i): [] for i in self.cores} if debug else None
        self.mesh = (MeshNetwork(self.grid, record_hops=record_hops)
                     if self.fidelity is Fidelity.CYCLE else None)
        self.tick = 0
        self.errors = ErrorLog()
        self._events: list[SpikeEvent] = []
        self.cycle_budget = cycle_budget

    # -- phases ---------------------------------------------------------------

    def _inject(self, t: int) -> None:
        for s in self._inputs.get(t, ()):
            core = self.cores[self.grid.index(s.x, s.y)]
            if not core.scheduler.insert(s.axon, s.offset):
                self.errors.add(t, ErrorKind.SCHEDULER_LATE_DROP, f"core ({s.x}, {s.y}) axon {s.axon} (input)")

    def _evaluation_order(self) -> list[int]:
        if self._order is None:
            return list(self.cores)
        if isinstance(self._order, random.Random):
            idx = list(self.cores)
            self._order.shuffle(idx)
            return idx
        return self._fixed_order

    def _compute(self, t: int) -> list[tuple[int, int, Packet]]:
        emitted = []
        for i in self._evaluation_order():
            core = self.cores[i]
            row = core.scheduler.advance()
            if core.quiet and not self.debug and not row.any():
                continue  # state provably unchanged
            xy = self.grid.coords(i)
            try:
                out = core.tick(row, t,
                                self.debug_rows[xy] if self.debug else None,
                                self.summaries[xy] if self.debug else None)
            except PotentialOverflow as exc:
                self.errors.add(t, ErrorKind.OVERFLOW, f"core {xy} neuron {exc.neuron}")
                exc.core = xy
                exc.errors = self.errors
                raise
            emitted.extend((i, j, p) for j, p in out)
        # merge contract: (source core row-major index, neuron)
        emitted.sort(key=lambda e: (e[0], e[1]))
        return emitted

    def _deliver(self, t: int, dest: int, packet: Packet, offset: int) -> None:
        if offset <= 0 or not self.cores[dest].scheduler.insert(packet.axon, offset):
            self.errors.add(t, ErrorKind.SCHEDULER_LATE_DROP,
                            f"core {self.grid.coords(dest)} axon {packet.axon}")

    def _drain(self, t: int, emitted: list[tuple[int, int, Packet]]) -> None:
        if self.mesh is None:
            for src, _, p in emitted:
                x, y = self.grid.coords(src)
                self._deliver(t, self.grid.index(x + p.dx, y + p.dy), p, p.offset)
            return
        for src, j, p in emitted:
            self.mesh.inject(src, p, tag=t)
        for d in self.mesh.drain(self.grid.router_cycles):
            # a packet that missed earlier drain windows has lost that many ticks
            self._deliver(t, d.dest, d.packet, d.packet.offset - (t - d.tag))
        if not self.mesh.idle():
            self.errors.add(t, ErrorKind.CONGESTION, f"{self.mesh.in_flight} packets still in the mesh")

    def _check_budget(self) -> None:
        if self.cycle_budget is None:
            return
        for i, core in self.cores.items():
            need = cycles_per_tick(core.params.num_axons, core.params.num_neurons)
            if need > self.cycle_budget:
                self.errors.add(1, ErrorKind.BUDGET_OVERRUN,
                                f"core {self.grid.coords(i)} needs {need} cycles, budget {self.cycle_budget}")

    # -- driver ---------------------------------------------------------------

    def step(self) -> None:
        t = self.tick + 1
        if t == 1:
            self._check_budget()
        self._inject(t)
        emitted = self._compute(t)
        for src, j, p in emitted:
            x, y = self.grid.coords(src)
            if self.grid.index(x + p.dx, y + p.dy) == self.output_index:
                self._events.append(SpikeEvent(t, x, y, j))
        self._drain(t, emitted)
        self.tick = t

    def quiescent(self) -> bool:
        """True when no future tick can change state or produce output."""
        if self.tick < self._last_input:
            return False
        if self.mesh is not None and not self.mesh.idle():
            return False
        return all(c.quiet and not c.scheduler.slots.any() for c in self.cores.values())

    def run(self, ticks: int) -> SimulationResult:
        if ticks < 1:
            raise ConfigurationError(f"ticks must be >= 1, got {ticks}")
        quiet_at = None
        while self.tick < ticks:
            if not self.debug and self.quiescent():
                quiet_at = self.tick
                break
            self.step()
        return self.result(ticks, quiet_at)

    def result(self, ticks: int, quiet_at: int | None = None) -> SimulationResult:
        return SimulationResult(
            Trace.from_events(self._events), self.errors, ticks, quiet_at,
            self.debug_rows, self.summaries,
            {self.grid.coords(i): list(c.potentials) for i, c in self.cores.items()})


def run(net: NetworkConfig, inputs: InputSchedule | None, ticks: int, *,
        fidelity: Fidelity | str | None = None, engine: str = "auto",
        output_core: tuple[int, int] | None = None, cycle_budget: int | None = None,
        debug: bool = False, order=None) -> SimulationResult:
    """Simulate ``ticks`` ticks and return the output trace and error log.

    ``engine`` is ``"reference"``, ``"fast"`` (compiled, functional fidelity
    only) or ``"auto"``, which picks the compiled engine whenever the run
    needs nothing only the reference engine provides.
    """
    fid = Fidelity(fidelity) if fidelity is not None else net.grid.fidelity
    plain = fid is Fidelity.FUNCTIONAL and not debug and order is None
    if engine not in ("auto", "fast", "reference"):
        raise ConfigurationError(f"unknown engine {engine!r}")
    if engine == "fast" and not plain:
        raise ConfigurationError("the fast engine supports functional fidelity without debug output only")
    if engine == "fast" or (engine == "auto" and plain):
        from ._fast import run_fast

        return run_fast(net, inputs or InputSchedule(), ticks,
                        output_core=output_core, cycle_budget=cycle_budget)
    sim = Simulator(net, inputs, fidelity=fid, output_core=output_core, debug=debug,
                    cycle_budget=cycle_budget, order=order)
    return sim.run(ticks)
