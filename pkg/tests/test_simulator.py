import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import relay_chain
from spikemesh import (ConfigurationError, CoreParams, CoreSpec, ErrorKind, GridConfig, InputSchedule,
                       InputSpike, NetworkConfig, NeuronConfig, Packet, PotentialOverflow, Simulator,
                       compare_traces, count_output_spikes, run)


def _rows(sim, core, tick, neuron=None):
    return [(r.axon, r.axon_type, r.selected_weight, r.carry, r.accumulate_base, r.accumulate_sum)
            for r in sim.debug_rows[core] if r.tick == tick and (neuron is None or r.neuron == neuron)]


@pytest.fixture(scope="module")
def worked_debug(worked_mapping):
    sim = Simulator(worked_mapping.network, worked_mapping.inputs, debug=True)
    sim.run(30)
    return sim


def test_worked_decodes_to_25(worked_mapping):
    res = run(worked_mapping.network, worked_mapping.inputs, 30)
    assert worked_mapping.decode(res.trace) == [25]
    assert count_output_spikes(res.trace) == {0: 25}


def test_worked_first_core_counts(worked_mapping):
    res = run(worked_mapping.network, worked_mapping.inputs, 30, output_core=(1, 0))
    assert count_output_spikes(res.trace, (1, 3), num_neurons=4) == {0: 1, 1: 3, 2: 1, 3: 3}


def test_worked_second_core_potentials(worked_debug):
    summary = {s.tick: s for s in worked_debug.summaries[(1, 0)] if s.neuron == 0}
    assert [(summary[t].potential, summary[t].spiked) for t in (2, 3, 4)] == [(14, True), (18, True), (22, True)]


def test_worked_second_core_datapath_rows(worked_debug):
    # (axon, type, A, D, B, C)
    assert _rows(worked_debug, (1, 0), 2) == [
        (0, 0, 8, 0, 0, 8), (1, 1, 4, 8, 8, 12), (2, 2, 2, 12, 12, 14), (3, 3, 1, 14, 14, 15)]
    assert _rows(worked_debug, (1, 0), 3) == [(1, 1, 4, 0, 14, 18), (3, 3, 1, 18, 18, 19)]
    assert _rows(worked_debug, (1, 0), 4) == [(1, 1, 4, 0, 18, 22), (3, 3, 1, 22, 22, 23)]


def test_worked_first_core_datapath_rows(worked_debug):
    assert _rows(worked_debug, (0, 0), 1, neuron=1) == [(2, 2, 1, 0, 0, 1), (3, 3, 1, 1, 1, 2)]
    axon, _, a, d, b, c = _rows(worked_debug, (0, 0), 2, neuron=1)[0]
    assert (axon, a, d, b, c) == (2, 1, 0, 1, 2)


def test_new_neuron_flag_marks_first_row(worked_debug):
    rows = [r for r in worked_debug.debug_rows[(1, 0)] if r.tick == 2]
    assert [r.new_neuron for r in rows] == [True, False, False, False]


def test_silent_network_gives_empty_trace():
    res = run(relay_chain(3), InputSchedule(), 20)
    assert len(res.trace) == 0 and len(res.errors) == 0


def test_result_unpacks_to_trace_and_errors(worked_mapping):
    trace, errors = run(worked_mapping.network, worked_mapping.inputs, 30)
    assert len(trace) == 25 and len(errors) == 0


def test_ticks_must_be_positive(worked_mapping):
    with pytest.raises(ConfigurationError):
        run(worked_mapping.network, worked_mapping.inputs, 0)


def test_pipeline_delay_one_tick_per_hop():
    net = relay_chain(4)
    res = run(net, InputSchedule((InputSpike(1, 0, 0, 0),)), 10, output_core=(3, 0), engine="reference")
    # core 0 fires at 1, core 1 at 2, core 2 at 3 (whose packet targets the output core)
    assert [tuple(e) for e in res.trace] == [(3, 2, 0, 0)]


def test_delivery_offset_delays_consumption():
    net = relay_chain(2, offset=5)
    sim = Simulator(net, InputSchedule((InputSpike(1, 0, 0, 0),)), debug=True)
    sim.run(10)
    fired = [s.tick for s in sim.summaries[(1, 0)] if s.spiked]
    assert fired == [6]


def test_input_offset_rule():
    net = relay_chain(2)
    sim = Simulator(net, InputSchedule((InputSpike(3, 0, 0, 0, 2),)), debug=True)
    sim.run(6)
    assert [s.tick for s in sim.summaries[(0, 0)] if s.spiked] == [4]


@pytest.mark.parametrize("engine", ["reference", "fast"])
def test_zero_offset_is_late_drop(engine):
    net = relay_chain(2, offset=0)
    res = run(net, InputSchedule((InputSpike(1, 0, 0, 0), InputSpike(2, 0, 0, 0, 0))), 5, engine=engine)
    kinds = [(e.tick, e.kind) for e in res.errors]
    assert kinds == [(1, ErrorKind.SCHEDULER_LATE_DROP), (2, ErrorKind.SCHEDULER_LATE_DROP)]


@pytest.mark.parametrize("engine", ["reference", "fast"])
def test_budget_overrun_flag(engine, worked_mapping):
    res = run(worked_mapping.network, worked_mapping.inputs, 30, engine=engine, cycle_budget=20)
    over = [e for e in res.errors if e.kind is ErrorKind.BUDGET_OVERRUN]
    # core (0,0) needs 4*(4+3)+4 = 32 cycles; (1,0) needs 4*(1+3)+4 = 20
    assert [e.location.split(" needs")[0] for e in over] == ["core (0, 0)"]
    assert worked_mapping.decode(res.trace) == [25]


@pytest.mark.parametrize("engine", ["reference", "fast"])
def test_overflow_aborts(engine):
    core = CoreSpec(0, 0, CoreParams(1, 1, potential_bits=4), (0,),
                    (NeuronConfig(weights=(3, 0, 0, 0), connections=(0,), pos_threshold=7),))
    net = NetworkConfig(GridConfig(1, 1), (core,), (0, 0))
    spikes = InputSchedule(tuple(InputSpike(t, 0, 0, 0) for t in range(1, 5)))
    with pytest.raises(PotentialOverflow) as exc:
        run(net, spikes, 10, engine=engine)
    assert exc.value.tick == 3 and exc.value.neuron == 0
    assert [e.kind for e in exc.value.errors] == [ErrorKind.OVERFLOW]


def test_fast_engine_refuses_reference_only_options(worked_mapping):
    with pytest.raises(ConfigurationError):
        run(worked_mapping.network, worked_mapping.inputs, 5, engine="fast", debug=True)


def test_quiescence_skipping_is_exact(worked_mapping):
    plain = run(worked_mapping.network, worked_mapping.inputs, 60, engine="reference")
    full = run(worked_mapping.network, worked_mapping.inputs, 60, engine="reference", debug=True)
    assert plain.quiescent_at is not None and plain.quiescent_at < 60
    assert plain.trace == full.trace
    assert plain.potentials == full.potentials


def test_shuffled_order_gives_same_trace(worked_mapping):
    base = run(worked_mapping.network, worked_mapping.inputs, 30, engine="reference")
    shuffled = run(worked_mapping.network, worked_mapping.inputs, 30, order=random.Random(3))
    assert compare_traces(base.trace, shuffled.trace).equal


def test_cycle_fidelity_matches_functional_with_unbounded_router(worked_mapping):
    a = run(worked_mapping.network, worked_mapping.inputs, 30, fidelity="functional")
    b = run(worked_mapping.network, worked_mapping.inputs, 30, fidelity="cycle")
    assert a.trace == b.trace and len(b.errors) == 0


def _fan_in(router_cycles, offset):
    """Eight sources on a 9x1 row all fire at tick 1 into the last core."""
    cores = [CoreSpec(x, 0, CoreParams(1, 1), (0,),
                      (NeuronConfig(connections=(0,), destination=Packet(8 - x, 0, x, offset)),))
             for x in range(8)]
    cores.append(CoreSpec(8, 0, CoreParams(8, 1), (0,) * 8, (NeuronConfig(connections=tuple(range(8))),)))
    grid = GridConfig(9, 1, fifo_capacity=1, fidelity="cycle", router_cycles=router_cycles)
    net = NetworkConfig(grid, tuple(cores), (8, 0))
    return net, InputSchedule(tuple(InputSpike(1, x, 0, 0) for x in range(8)))


def test_congestion_flag_and_late_drop():
    net, inputs = _fan_in(router_cycles=4, offset=1)
    res = run(net, inputs, 8)
    kinds = {e.kind for e in res.errors}
    assert ErrorKind.CONGESTION in kinds and ErrorKind.SCHEDULER_LATE_DROP in kinds
    # every spike is still traced at its emission tick
    assert len(res.trace) == 8


def test_congestion_absorbed_by_larger_offset():
    net, inputs = _fan_in(router_cycles=4, offset=15)
    res = run(net, inputs, 8)
    assert ErrorKind.SCHEDULER_LATE_DROP not in {e.kind for e in res.errors}


@st.composite
def small_networks(draw):
    w, h = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    cells = [(x, y) for y in range(h) for x in range(w)]
    cores = []
    for x, y in cells:
        na, nn = draw(st.integers(1, 4)), draw(st.integers(1, 4))
        neurons = []
        for _ in range(nn):
            tx, ty = draw(st.sampled_from(cells))
            dest = None if draw(st.booleans()) else Packet(tx - x, ty - y, 0, draw(st.integers(0, 3)))
            lo = draw(st.integers(-3, 0))
            neurons.append(NeuronConfig(
                weights=tuple(draw(st.lists(st.integers(-3, 3), min_size=4, max_size=4))),
                connections=tuple(draw(st.lists(st.integers(0, na - 1), max_size=na))),
                pos_threshold=draw(st.integers(1, 3)), neg_threshold=lo,
                leak=draw(st.integers(-1, 1)), destination=dest,
                neg_compare=draw(st.sampled_from(["asymmetric", "symmetric"]))))
        cores.append(CoreSpec(x, y, CoreParams(na, nn, potential_bits=draw(st.sampled_from([6, 64]))),
                              tuple(draw(st.integers(0, 3)) for _ in range(na)), tuple(neurons)))
    # destinations must hit an existing axon: clamp to axon 0 which always exists
    net = NetworkConfig(GridConfig(w, h), tuple(cores), draw(st.sampled_from(cells)))
    spikes = [InputSpike(draw(st.integers(1, 6)), x, y, draw(st.integers(0, 3)) % c.params.num_axons,
                         draw(st.integers(0, 2)))
              for (x, y), c in ((c.coords, c) for c in cores) for _ in range(draw(st.integers(0, 3)))]
    return net, InputSchedule(tuple(spikes))


def _outcome(net, inputs, engine):
    try:
        res = run(net, inputs, 25, engine=engine)
        return res.trace.to_jsonl(), res.errors.to_jsonl(), res.potentials
    except PotentialOverflow as exc:
        return "overflow", exc.tick, exc.errors.to_jsonl()


@given(small_networks())
def test_engines_agree(case):
    net, inputs = case
    assert _outcome(net, inputs, "reference") == _outcome(net, inputs, "fast")
