import numpy as np
import pytest
from hypothesis import given, strategies as st

from spikemesh import (ConfigurationError, Core, CoreParams, NegCompare, NeuronConfig, PotentialOverflow,
                       ResetMode, ResetRule, SchedulerMemory, core_tick, integrate_row, select_weight,
                       threshold_reset_leak)
from spikemesh.noc import Packet


def test_select_weight_by_axon_type():
    n = NeuronConfig(weights=(5, -3, 2, 7))
    assert [select_weight(n, t) for t in range(4)] == [5, -3, 2, 7]
    with pytest.raises(ConfigurationError):
        select_weight(n, 4)


def test_integrate_only_connected_spiking_axons():
    n = NeuronConfig(weights=(8, 4, 2, 1), connections=(0, 2, 3))
    row = np.array([True, True, False, True])
    assert integrate_row(n, 10, row, (0, 1, 2, 3)) == 10 + 8 + 1


def test_connection_mask_round_trip():
    n = NeuronConfig(connections=np.array([True, False, True]))
    assert n.connections == (0, 2)
    assert n.connection_mask(4).tolist() == [True, False, True, False]


def test_linear_reset_keeps_surplus():
    n = NeuronConfig(pos_threshold=1, pos_reset=ResetRule(ResetMode.LINEAR, 1))
    assert threshold_reset_leak(n, 15) == (14, True)


def test_static_reset():
    n = NeuronConfig(pos_threshold=3, pos_reset=ResetRule(ResetMode.STATIC, 0))
    assert threshold_reset_leak(n, 7) == (0, True)


def test_leak_only_without_threshold_crossing():
    n = NeuronConfig(pos_threshold=10, neg_threshold=-10, leak=2)
    assert threshold_reset_leak(n, 5) == (3, False)
    assert threshold_reset_leak(n, 12)[1]


@pytest.mark.parametrize("compare, v, expected", [
    (NegCompare.ASYMMETRIC, -1, -1),
    (NegCompare.ASYMMETRIC, -2, -1),
    (NegCompare.SYMMETRIC, -1, 0),
])
def test_negative_compare_modes(compare, v, expected):
    n = NeuronConfig(neg_threshold=-1, neg_reset=ResetRule(ResetMode.LINEAR, 1), neg_compare=compare)
    assert threshold_reset_leak(n, v) == (expected, False)


def test_threshold_ordering_rejected():
    with pytest.raises(ConfigurationError):
        NeuronConfig(pos_threshold=0, neg_threshold=1)


def test_negative_linear_reset_value_rejected():
    with pytest.raises(ConfigurationError):
        ResetRule(ResetMode.LINEAR, -1)


def test_overflow_on_partial_sum():
    n = NeuronConfig(weights=(100, -100, 0, 0), connections=(0, 1))
    with pytest.raises(PotentialOverflow):
        # 100 + 100 leaves the 8-bit range before the -100 could bring it back
        integrate_row(n, 100, [True, True], (0, 1), potential_bits=8)


def test_core_tick_emits_in_neuron_order_and_sets_quiet():
    dest = Packet(1, 0, 0)
    neurons = [NeuronConfig(connections=(0,), destination=dest), NeuronConfig(connections=(0,)),
               NeuronConfig(connections=(0,), destination=Packet(0, 1, 3))]
    core = Core(CoreParams(1, 3), (0,), neurons)
    emitted, rows = core_tick(core, np.array([True]), tick=1, debug=True)
    assert [j for j, _ in emitted] == [0, 2]
    assert len(rows) == 3 and not core.quiet
    core.tick(np.array([False]))
    assert core.quiet


def test_core_rejects_bad_config():
    with pytest.raises(ConfigurationError):
        Core(CoreParams(2, 1), (0, 4), [NeuronConfig()])
    with pytest.raises(ConfigurationError):
        Core(CoreParams(2, 1), (0, 0), [NeuronConfig(connections=(2,))])
    with pytest.raises(ConfigurationError):
        Core(CoreParams(2, 1), (0, 0), [NeuronConfig(weights=(1, 2))])


def test_scheduler_offset_rules():
    s = SchedulerMemory(3, depth=4)
    assert s.insert(1, 2)
    assert not s.insert(0, 0)
    for bad in (-1, 4):
        with pytest.raises(ConfigurationError):
            s.insert(0, bad)
    assert not s.advance().any()
    assert s.advance().tolist() == [False, True, False]
    assert s.pending() == 0


@given(st.integers(2, 16), st.lists(st.tuples(st.integers(0, 7), st.integers(0, 15)), max_size=40))
def test_scheduler_delivers_exactly_at_offset(depth, ops):
    s = SchedulerMemory(8, depth)
    expected: dict[int, set] = {}
    now = 0
    for axon, raw in ops:
        off = raw % depth
        if s.insert(axon, off):
            expected.setdefault(now + off, set()).add(axon)
        else:
            assert off == 0
        now += 1
        row = s.advance()
        assert set(np.flatnonzero(row).tolist()) == expected.pop(now, set())
