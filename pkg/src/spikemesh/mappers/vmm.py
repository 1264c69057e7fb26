"""Vector-matrix multiplication on spiking cores.

Values are rate coded: an integer ``v`` becomes ``v`` spikes on one axon in
consecutive ticks.  The matrix is split into binary bit-planes held by the
crossbar of a first core; later cores weigh the bit-plane spike trains by
their significance and merge them back into one spike count per column.

Signed problems keep separate channels per sign.  Every first-stage neuron
has a mirror twin with negated weights, so the positive and negative output
channels together carry the exact signed sum.  Two flavours exist for the
residue a neuron is left with when its input goes negative:

* ``SYMMETRIC_THRESHOLD``: the negative threshold compares with ``<=`` and
  linear reset brings the potential back towards zero on its own.
* ``TRUENORTH_FEEDBACK``: the compare is strict, so every neuron gets a
  duplicate whose spikes loop back one tick later on extra axons and cancel
  the twin's residue.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import ceil
from typing import Sequence

import numpy as np

from ..core import CoreParams, NegCompare, NeuronConfig, ResetMode, ResetRule
from ..errors import ConfigurationError, DecodeError, UnsupportedSize
from ..network import CoreSpec, InputSchedule, InputSpike, NetworkConfig
from ..noc import GridConfig, Packet
from ..trace import Trace
from .resources import CoreUsage, ResourceReport

MAX_MAGNITUDE_BITS = 8
GROUP_BITS = 4  # the weight table has four entries: one significance group
_GROUP_WEIGHTS = (8, 4, 2, 1)
POS, NEG = 0, 1


class MappingMode(enum.Enum):
    TRUENORTH_FEEDBACK = "tn-feedback"
    SYMMETRIC_THRESHOLD = "symmetric"


@dataclass(frozen=True)
class VmmProblem:
    """``output[j] = sum_i vector[i] * matrix[i][j]``."""

    matrix: np.ndarray
    vector: np.ndarray
    magnitude_bits: int = 8

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        v = np.asarray(self.vector, dtype=np.int64).reshape(-1)
        if m.ndim == 1:
            m = m.reshape(-1, 1)
        if m.ndim != 2 or m.size == 0:
            raise ConfigurationError("matrix must be a non-empty 2D array")
        if v.shape[0] != m.shape[0]:
            raise ConfigurationError(f"vector has {v.shape[0]} entries, matrix has {m.shape[0]} rows")
        if not 1 <= self.magnitude_bits <= MAX_MAGNITUDE_BITS:
            raise UnsupportedSize(f"magnitude_bits must be in [1, {MAX_MAGNITUDE_BITS}]")
        bound = 1 << self.magnitude_bits
        if np.abs(m).max(initial=0) >= bound or np.abs(v).max(initial=0) >= bound:
            raise ConfigurationError(f"entries must satisfy |value| < {bound}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "vector", v)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def expected(self) -> list[int]:
        return [int(x) for x in self.vector @ self.matrix]


@dataclass(frozen=True)
class OutputChannel:
    x: int
    y: int
    neuron: int
    column: int
    sign: int  # +1 or -1


@dataclass
class MappedNetwork:
    network: NetworkConfig
    inputs: InputSchedule
    ticks_required: int
    channels: list[OutputChannel]
    resources: ResourceReport
    columns: int = 0
    info: dict = field(default_factory=dict)

    def decode(self, trace: Trace) -> list[int]:
        return decode_vmm(trace, self.channels, self.columns)

    def decode_metadata(self) -> dict:
        return {"columns": self.columns,
                "channels": [vars(c) for c in self.channels]}


def rate_encode(value: int, core: tuple[int, int], axon: int, offset: int = 1) -> list[InputSpike]:
    """``value`` spikes on ``axon`` during ticks 1..value."""
    if value < 0:
        raise ValueError(f"rate coding needs a non-negative value, got {value}")
    return [InputSpike(t, core[0], core[1], axon, offset) for t in range(1, value + 1)]


def decode_vmm(trace: Trace, channels: Sequence[OutputChannel] | dict, columns: int | None = None) -> list[int]:
    """Per column: spikes on its positive channel minus spikes on its negative one."""
    if isinstance(channels, dict):
        columns = channels.get("columns", columns)
        channels = [OutputChannel(**c) for c in channels["channels"]]
    lookup = {(c.x, c.y, c.neuron): c for c in channels}
    if columns is None:
        columns = 1 + max((c.column for c in channels), default=-1)
    out = [0] * columns
    # pack (x, y, neuron) into one integer so counting is a 1D unique
    keys, counts = np.unique((trace.x << 42) | (trace.y << 21) | trace.neuron, return_counts=True)
    mask = (1 << 21) - 1
    for key, count in zip(keys.tolist(), counts.tolist()):
        x, y, neuron = key >> 42, (key >> 21) & mask, key & mask
        c = lookup.get((x, y, neuron))
        if c is None:
            raise DecodeError(f"spike from core ({x}, {y}) neuron {neuron} matches no output channel")
        out[c.column] += c.sign * count
    return out


# -- building blocks ------------------------------------------------------------

def _neuron(weights, connections, dest: Packet | None, *, compare=NegCompare.ASYMMETRIC,
            neg_threshold: int = 0, neg_reset: ResetRule | None = None) -> NeuronConfig:
    return NeuronConfig(
        weights=tuple(weights), connections=tuple(connections),
        pos_threshold=1, neg_threshold=neg_threshold,
        pos_reset=ResetRule(ResetMode.LINEAR, 1),
        neg_reset=neg_reset or ResetRule(ResetMode.STATIC, 0),
        leak=0, destination=dest, neg_compare=compare)


@dataclass
class _Stage:
    axon_types: list[int]
    neurons: list[NeuronConfig]


def _groups(bits: int) -> int:
    return ceil(bits / GROUP_BITS)


def _bit(value: int, b: int) -> bool:
    return bool((abs(int(value)) >> b) & 1)


def _max_weight_sum(stage: _Stage) -> int:
    best = 0
    for n in stage.neurons:
        best = max(best, sum(abs(n.weights[stage.axon_types[a]]) for a in n.connections))
    return best


def _assemble(stages: list[_Stage], outputs: int, problem_max: int,
              limits: tuple[int, int], channel_of) -> tuple[NetworkConfig, ResourceReport, int, list]:
    """Place stages left to right plus a sink core that collects the outputs."""
    axons_max, neurons_max = limits
    specs, usage = [], []
    for k, st in enumerate(stages):
        na, nn = len(st.axon_types), len(st.neurons)
        if na > axons_max or nn > neurons_max:
            raise UnsupportedSize(
                f"stage {k + 1} needs {na} axons and {nn} neurons; cores offer {axons_max}x{neurons_max}")
        specs.append(CoreSpec(k, 0, CoreParams(na, nn), tuple(st.axon_types), tuple(st.neurons)))
        usage.append(CoreUsage(k, 0, na, na, nn, nn))
    sink_x = len(stages)
    # the sink only receives; it exists so that the last stage's spikes are
    # addressed to an output core and land in the trace
    specs.append(CoreSpec(sink_x, 0, CoreParams(max(outputs, 1), 1), (0,) * max(outputs, 1),
                          (NeuronConfig(),)))
    grid = GridConfig(width=sink_x + 1, height=1)
    net = NetworkConfig(grid, tuple(specs), (sink_x, 0))

    # drain bound: spikes per axon can only grow by the stage's weight mass,
    # doubled for the mirror twins feeding each other
    ticks, carried = problem_max + len(stages), problem_max
    for st in stages:
        carried = 2 * _max_weight_sum(st) * carried
        ticks += carried
    last = len(stages) - 1
    channels = [channel_of(last, j) for j in range(len(stages[-1].neurons))]
    return net, ResourceReport(tuple(usage)), ticks + 1, channels


def _significance_stage(up_index, columns: int, bits: int, signs: Sequence[int],
                        dest_of, compare, neg_threshold, neg_reset) -> _Stage:
    """Weigh bit-plane spike trains with 8/4/2/1 within each 4-bit group."""
    groups = _groups(bits)
    axon_types = [0] * (columns * bits * len(signs))
    for j in range(columns):
        for b in range(bits):
            for s in signs:
                axon_types[up_index(j, b, s)] = GROUP_BITS - 1 - (b % GROUP_BITS)
    neurons: list[NeuronConfig | None] = [None] * (columns * groups * len(signs))
    for j in range(columns):
        for s in signs:
            for g in range(groups):
                conns = [up_index(j, b, s) for b in range(bits) if b // GROUP_BITS == g]
                idx = (j * groups + (groups - 1 - g)) * len(signs) + signs.index(s)
                neurons[idx] = _neuron(_GROUP_WEIGHTS, conns, dest_of(idx),
                                       compare=compare, neg_threshold=neg_threshold, neg_reset=neg_reset)
    return _Stage(axon_types, neurons)


# -- positive -------------------------------------------------------------------

def map_vmm_positive(problem: VmmProblem, *, core_limits: tuple[int, int] = (256, 256)) -> MappedNetwork:
    mat, vec = problem.matrix, problem.vector
    if (mat < 0).any() or (vec < 0).any():
        raise ConfigurationError("negative entries need map_vmm_signed")
    n, m = mat.shape
    bits = problem.magnitude_bits
    groups = _groups(bits)
    def plane(j: int, b: int, s: int = 0) -> int:
        return j * bits + (bits - 1 - b)

    first = _Stage([i % 4 for i in range(n)], [None] * (m * bits))
    for j in range(m):
        for b in range(bits):
            conns = [i for i in range(n) if _bit(mat[i, j], b)]
            first.neurons[plane(j, b)] = _neuron((1, 1, 1, 1), conns, Packet(1, 0, plane(j, b)))
    stages = [first]

    def to_next(idx: int) -> Packet:
        return Packet(1, 0, idx)

    stages.append(_significance_stage(plane, m, bits, [0], to_next, NegCompare.ASYMMETRIC, 0, None))
    if groups == 2:
        # high group counts 16x, low group 1x
        types = [0] * (2 * m)
        for j in range(m):
            types[j * 2] = 0
            types[j * 2 + 1] = 1
        stages.append(_Stage(types, [_neuron((16, 1, 0, 0), [2 * j, 2 * j + 1], to_next(j))
                                     for j in range(m)]))
    inputs = [s for i in range(n) for s in rate_encode(int(vec[i]), (0, 0), i)]

    def channel(stage: int, j: int) -> OutputChannel:
        return OutputChannel(stage, 0, j, j, 1)

    net, report, ticks, channels = _assemble(stages, m, int(vec.max(initial=0)), core_limits, channel)
    return MappedNetwork(net, InputSchedule(tuple(inputs)), ticks, channels, report, m,
                         {"mode": "positive", "magnitude_bits": bits})


# -- signed ---------------------------------------------------------------------

def map_vmm_signed(problem: VmmProblem, mode: MappingMode | str = MappingMode.SYMMETRIC_THRESHOLD, *,
                   core_limits: tuple[int, int] = (256, 256)) -> MappedNetwork:
    mode = MappingMode(mode)
    mat, vec = problem.matrix, problem.vector
    n, m = mat.shape
    bits = problem.magnitude_bits
    groups = _groups(bits)
    feedback = mode is MappingMode.TRUENORTH_FEEDBACK
    if feedback:
        # strict compare: residue below zero is left for the feedback path
        compare, neg_reset = NegCompare.ASYMMETRIC, ResetRule(ResetMode.LINEAR, 0)
    else:
        compare, neg_reset = NegCompare.SYMMETRIC, ResetRule(ResetMode.LINEAR, 1)
    mirror = {POS: (1, -1), NEG: (-1, 1)}  # weights for same-sign / opposite-sign products
    signs = [POS, NEG]

    def in_axon(i: int, s_in: int, s_mat: int) -> int:
        return i * 4 + s_in * 2 + s_mat

    def plane(j: int, b: int, s: int) -> int:
        return (j * bits + (bits - 1 - b)) * 2 + s

    primaries = m * bits * 2
    types = [0 if s_in == s_mat else 1 for i in range(n) for s_in in signs for s_mat in signs]
    conns_of: list[list[int]] = [[] for _ in range(primaries)]
    for i in range(n):
        for j in range(m):
            v = int(mat[i, j])
            if v == 0:
                continue
            s_mat = POS if v > 0 else NEG
            for b in range(bits):
                if _bit(v, b):
                    for s_out in signs:
                        for s_in in signs:
                            conns_of[plane(j, b, s_out)].append(in_axon(i, s_in, s_mat))
    fb_base = 4 * n
    if feedback:
        # one feedback axon per duplicate; a positive duplicate's spike must
        # raise its negative twin, so it arrives on an "opposite product" axon
        types += [1 if idx % 2 == POS else 0 for idx in range(primaries)]
        for idx in range(primaries):
            twin = idx ^ 1
            conns_of[twin].append(fb_base + idx)
    weights = [(mirror[idx % 2][0], mirror[idx % 2][1], 0, 0) for idx in range(primaries)]
    neurons = [_neuron(weights[idx], conns_of[idx], Packet(1, 0, idx), compare=compare,
                       neg_threshold=-1, neg_reset=neg_reset) for idx in range(primaries)]
    if feedback:
        neurons += [_neuron(weights[idx], conns_of[idx], Packet(0, 0, fb_base + idx), compare=compare,
                            neg_threshold=-1, neg_reset=neg_reset) for idx in range(primaries)]
    stages = [_Stage(types, neurons)]

    def to_next(idx: int) -> Packet:
        return Packet(1, 0, idx)

    final_groups = groups == 1
    second = _significance_stage(plane, m, bits, signs, to_next, compare, -1, neg_reset)
    stages.append(second)
    if not final_groups:
        # axon (j, s, g) sits where core 2 emits it: (j*2 + (1-g))*2 + s
        n3 = 2 * m
        t3 = [0] * (4 * m)
        for j in range(m):
            for s in signs:
                t3[(j * 2 + 0) * 2 + s] = 2 * s  # high group
                t3[(j * 2 + 1) * 2 + s] = 2 * s + 1  # low group
        mirror3 = {POS: (16, 1, -16, -1), NEG: (-16, -1, 16, 1)}
        conns3 = [[(j * 2 + g) * 2 + s for g in (0, 1) for s in signs] for j in range(m) for _ in signs]
        fb3 = 4 * m
        if feedback:
            # positive duplicate -> negative twin via a "negative low" axon, and back
            t3 += [3 if idx % 2 == POS else 1 for idx in range(n3)]
            for idx in range(n3):
                conns3[idx ^ 1].append(fb3 + idx)
        neurons3 = [_neuron(mirror3[idx % 2], conns3[idx], to_next(idx), compare=compare,
                            neg_threshold=-1, neg_reset=neg_reset) for idx in range(n3)]
        if feedback:
            neurons3 += [_neuron(mirror3[idx % 2], conns3[idx], Packet(0, 0, fb3 + idx), compare=compare,
                                 neg_threshold=-1, neg_reset=neg_reset) for idx in range(n3)]
        stages.append(_Stage(t3, neurons3))

    inputs = []
    for i in range(n):
        v = int(vec[i])
        if v:
            s_in = POS if v > 0 else NEG
            for s_mat in signs:
                inputs += rate_encode(abs(v), (0, 0), in_axon(i, s_in, s_mat))
    outputs = 2 * m

    def channel(stage: int, idx: int) -> OutputChannel:
        return OutputChannel(stage, 0, idx, idx // 2, 1 if idx % 2 == POS else -1)

    net, report, ticks, channels = _assemble(
        stages, outputs, int(np.abs(vec).max(initial=0)), core_limits, channel)
    # final-stage duplicates talk to their own core, not to the output
    channels = [c for c in channels if c.neuron < outputs]
    return MappedNetwork(net, InputSchedule(tuple(inputs)), ticks, channels, report, m,
                         {"mode": mode.value, "magnitude_bits": bits})


def map_vmm(problem: VmmProblem, mode: MappingMode | str | None = None, **kw) -> MappedNetwork:
    """Signed mapping when ``mode`` is given, positive mapping otherwise."""
    if mode is None or mode == "positive":
        return map_vmm_positive(problem, **kw)
    return map_vmm_signed(problem, mode, **kw)


def feedback_demo_network(compare: NegCompare | str = NegCompare.ASYMMETRIC, feedback: bool = False,
                          ) -> tuple[NetworkConfig, InputSchedule]:
    """One core, one signed input pair, one mirrored neuron pair and its duplicates.

    Axons: 0 positive input, 1 negative input, 2 and 3 feedback.  Neurons: 0
    positive, 1 negative, 2 and 3 their duplicates, which only drive the
    feedback axons when ``feedback`` is set.  A single spike arrives on axon 0
    at tick 1.
    """
    compare = NegCompare(compare)
    pos_w, neg_w = (1, -1, 0, 0), (-1, 1, 0, 0)
    reset = ResetRule(ResetMode.LINEAR, 1 if compare is NegCompare.SYMMETRIC else 0)
    loops = (Packet(0, 0, 2), Packet(0, 0, 3)) if feedback else (None, None)
    neurons = (
        _neuron(pos_w, (0, 1, 3), None, compare=compare, neg_threshold=-1, neg_reset=reset),
        _neuron(neg_w, (0, 1, 2), None, compare=compare, neg_threshold=-1, neg_reset=reset),
        _neuron(pos_w, (0, 1, 3), loops[0], compare=compare, neg_threshold=-1, neg_reset=reset),
        _neuron(neg_w, (0, 1, 2), loops[1], compare=compare, neg_threshold=-1, neg_reset=reset),
    )
    core = CoreSpec(0, 0, CoreParams(4, 4), (0, 1, 1, 0), neurons)
    net = NetworkConfig(GridConfig(1, 1), (core,), (0, 0))
    return net, InputSchedule((InputSpike(1, 0, 0, 0),))
