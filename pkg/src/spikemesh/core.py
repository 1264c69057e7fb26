"""Single-core model: neuron datapath, core controller and packet scheduler.

The controller walks neurons in ascending order.  For every neuron it
integrates the weights of all connected axons that carry a spike this tick,
then evaluates the thresholds exactly once, writes the potential back and, if
the neuron fired and has a destination, emits one packet.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, PotentialOverflow
from .noc import Packet


class ResetMode(enum.Enum):
    STATIC = "static"
    LINEAR = "linear"


class NegCompare(enum.Enum):
    ASYMMETRIC = "asymmetric"  # v < neg_threshold
    SYMMETRIC = "symmetric"  # v <= neg_threshold


@dataclass(frozen=True)
class CoreParams:
    num_axons: int
    num_neurons: int
    num_weights: int = 4
    scheduler_depth: int = 16
    potential_bits: int = 64

    def __post_init__(self):
        for name, lo in (("num_axons", 1), ("num_neurons", 1), ("num_weights", 1),
                         ("scheduler_depth", 2), ("potential_bits", 2)):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < lo:
                raise ConfigurationError(f"{name} must be an integer >= {lo}, got {v!r}")
        if self.potential_bits > 64:
            raise ConfigurationError("potential_bits is limited to 64")

    @property
    def potential_limit(self) -> int:
        """Potentials must satisfy ``abs(v) < potential_limit``."""
        return 1 << (self.potential_bits - 1)


@dataclass(frozen=True)
class ResetRule:
    mode: ResetMode = ResetMode.LINEAR
    value: int = 0

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", ResetMode(self.mode))
        if self.mode is ResetMode.LINEAR and self.value < 0:
            raise ConfigurationError(f"linear reset value must be >= 0, got {self.value}")


@dataclass(frozen=True)
class NeuronConfig:
    """Everything the core SRAM stores for one neuron.

    ``connections`` holds the indices of connected axons (the crossbar row);
    a boolean mask is accepted too and converted.
    """

    weights: tuple[int, ...] = (1, 0, 0, 0)
    connections: tuple[int, ...] = ()
    pos_threshold: int = 1
    neg_threshold: int = 0
    pos_reset: ResetRule = field(default_factory=lambda: ResetRule(ResetMode.LINEAR, 1))
    neg_reset: ResetRule = field(default_factory=lambda: ResetRule(ResetMode.STATIC, 0))
    leak: int = 0
    initial_potential: int = 0
    destination: Packet | None = None
    neg_compare: NegCompare = NegCompare.ASYMMETRIC

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        conns = self.connections
        if isinstance(conns, np.ndarray) and conns.dtype == bool:
            conns = np.flatnonzero(conns)
        elif len(conns) and all(isinstance(c, (bool, np.bool_)) for c in conns):
            conns = [i for i, c in enumerate(conns) if c]
        object.__setattr__(self, "connections", tuple(sorted({int(c) for c in conns})))
        if isinstance(self.neg_compare, str):
            object.__setattr__(self, "neg_compare", NegCompare(self.neg_compare))
        if self.neg_threshold > self.pos_threshold:
            raise ConfigurationError(
                f"neg_threshold {self.neg_threshold} exceeds pos_threshold {self.pos_threshold}")

    def connection_mask(self, num_axons: int) -> np.ndarray:
        mask = np.zeros(num_axons, dtype=bool)
        mask[list(self.connections)] = True
        return mask


class DebugRow(NamedTuple):
    """Datapath wires for one integrated axon.

    ``accumulate_base`` (B) is the stored potential for the first axon the
    neuron processes in a tick and the carry (D) afterwards; C = B + A.
    """

    tick: int
    neuron: int
    axon: int
    axon_type: int
    selected_weight: int  # A
    carry: int  # D
    new_neuron: bool  # NN
    accumulate_base: int  # B
    accumulate_sum: int  # C


class NeuronSummary(NamedTuple):
    """End-of-tick state of one neuron (the row written back to SRAM)."""

    tick: int
    neuron: int
    previous: int
    potential: int
    spiked: bool


def select_weight(neuron: NeuronConfig, axon_type: int) -> int:
    if not 0 <= axon_type < len(neuron.weights):
        raise ConfigurationError(f"axon type {axon_type} outside weight table of size {len(neuron.weights)}")
    return neuron.weights[axon_type]


def _check(value: int, limit: int) -> int:
    if not -limit < value < limit:
        raise PotentialOverflow(f"potential {value} outside (-{limit}, {limit})")
    return value


def integrate_row(neuron: NeuronConfig, potential: int, spike_row: Sequence[bool],
                  axon_types: Sequence[int], *, potential_bits: int = 64,
                  tick: int = 0, index: int = 0, debug: list | None = None) -> int:
    """Accumulate the weights of connected, spiking axons in ascending axon order."""
    if len(spike_row) != len(axon_types):
        raise ConfigurationError("spike row and axon types differ in length")
    limit = 1 << (potential_bits - 1)
    v = potential
    carry = 0
    first = True
    for a in neuron.connections:
        if a >= len(spike_row):
            raise ConfigurationError(f"connection to axon {a} beyond {len(spike_row)} axons")
        if not spike_row[a]:
            continue
        t = int(axon_types[a])
        w = select_weight(neuron, t)
        base = v
        v = _check(v + w, limit)
        if debug is not None:
            debug.append(DebugRow(tick, index, a, t, w, carry, first, base, v))
        carry = v
        first = False
    return v


def threshold_reset_leak(neuron: NeuronConfig, integrated: int) -> tuple[int, bool]:
    """Single end-of-tick threshold evaluation; at most one spike."""
    if integrated >= neuron.pos_threshold:
        r = neuron.pos_reset
        return (r.value if r.mode is ResetMode.STATIC else integrated - r.value), True
    if neuron.neg_compare is NegCompare.SYMMETRIC:
        below = integrated <= neuron.neg_threshold
    else:
        below = integrated < neuron.neg_threshold
    if below:
        r = neuron.neg_reset
        return (r.value if r.mode is ResetMode.STATIC else integrated + r.value), False
    return integrated - neuron.leak, False


class SchedulerMemory:
    """Ring of ``depth`` time slots, each a bit per axon.

    ``current_slot`` is the slot holding the current tick's spikes, which have
    already been fed to the neuron block; inserting with offset ``d`` targets
    the slot consumed ``d`` ticks from now, so offset 0 means "too late".
    """

    def __init__(self, num_axons: int, depth: int = 16):
        if depth < 2:
            raise ConfigurationError("scheduler depth must be >= 2")
        self.num_axons = num_axons
        self.depth = depth
        self.slots = np.zeros((depth, num_axons), dtype=bool)
        self.current_slot = 0

    def insert(self, axon: int, offset: int) -> bool:
        """Schedule a spike; returns False if it arrived too late and was dropped."""
        if not 0 <= axon < self.num_axons:
            raise ConfigurationError(f"axon {axon} outside [0, {self.num_axons})")
        if not 0 <= offset < self.depth:
            raise ConfigurationError(f"delivery offset {offset} outside [0, {self.depth})")
        if offset == 0:
            return False
        self.slots[(self.current_slot + offset) % self.depth, axon] = True
        return True

    def advance(self) -> np.ndarray:
        """Move to the next tick's slot and hand out (and clear) its spikes."""
        self.current_slot = (self.current_slot + 1) % self.depth
        row = self.slots[self.current_slot].copy()
        self.slots[self.current_slot] = False
        return row

    def pending(self) -> int:
        return int(self.slots.sum())


class Core:
    """Configuration plus mutable state (potentials, scheduler) of one core."""

    def __init__(self, params: CoreParams, axon_types: Sequence[int], neurons: Sequence[NeuronConfig]):
        self.params = params
        self.axon_types = tuple(int(t) for t in axon_types)
        self.neurons = tuple(neurons)
        if len(self.axon_types) != params.num_axons:
            raise ConfigurationError(
                f"{len(self.axon_types)} axon types given for {params.num_axons} axons", "axon_types")
        for i, t in enumerate(self.axon_types):
            if not 0 <= t < params.num_weights:
                raise ConfigurationError(f"axon type {t} >= num_weights {params.num_weights}", f"axon_types[{i}]")
        if len(self.neurons) > params.num_neurons:
            raise ConfigurationError(f"{len(self.neurons)} neurons exceed num_neurons {params.num_neurons}")
        for j, n in enumerate(self.neurons):
            path = f"neurons[{j}]"
            if len(n.weights) != params.num_weights:
                raise ConfigurationError(f"{len(n.weights)} weights, core has {params.num_weights}", path)
            if n.connections and n.connections[-1] >= params.num_axons:
                raise ConfigurationError(f"connection to axon {n.connections[-1]} beyond {params.num_axons}", path)
            if abs(n.initial_potential) >= params.potential_limit:
                raise ConfigurationError("initial potential out of range", path)
        self.potentials = [n.initial_potential for n in self.neurons]
        self.scheduler = SchedulerMemory(params.num_axons, params.scheduler_depth)
        self.quiet = False

    def reset(self) -> None:
        self.potentials = [n.initial_potential for n in self.neurons]
        self.scheduler = SchedulerMemory(self.params.num_axons, self.params.scheduler_depth)
        self.quiet = False

    def tick(self, spike_row: np.ndarray, tick: int = 0, debug: list | None = None,
             summary: list | None = None) -> list[tuple[int, Packet]]:
        """Evaluate every neuron once; returns ``(neuron, packet)`` in neuron order."""
        emitted = []
        bits = self.params.potential_bits
        limit = self.params.potential_limit
        changed = False
        for j, n in enumerate(self.neurons):
            prev = self.potentials[j]
            try:
                v = integrate_row(n, prev, spike_row, self.axon_types, potential_bits=bits,
                                  tick=tick, index=j, debug=debug)
                v, spiked = threshold_reset_leak(n, v)
                _check(v, limit)
            except PotentialOverflow as exc:
                raise PotentialOverflow(str(exc), tick=tick, neuron=j) from None
            self.potentials[j] = v
            changed = changed or v != prev or spiked
            if summary is not None:
                summary.append(NeuronSummary(tick, j, prev, v, spiked))
            if spiked and n.destination is not None:
                emitted.append((j, n.destination))
        # an idle core with unchanged state stays idle until a spike arrives
        self.quiet = not changed and not spike_row.any()
        return emitted


def core_tick(core: Core, spike_row: np.ndarray, tick: int = 0, debug: bool = False):
    """Functional wrapper: ``(emitted, debug rows or None)``."""
    rows: list | None = [] if debug else None
    emitted = core.tick(spike_row, tick, rows)
    return emitted, rows
