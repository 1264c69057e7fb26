import pytest

from spikemesh import ErrorKind, ErrorLog, SpikeEvent, Trace, compare_traces, count_output_spikes


def _trace(*events):
    return Trace.from_events(SpikeEvent(*e) for e in events)


def test_canonical_order_is_tick_then_row_major_core_then_neuron():
    t = _trace((2, 0, 0, 1), (1, 0, 1, 0), (1, 1, 0, 5), (1, 1, 0, 2))
    assert [tuple(e) for e in t] == [(1, 1, 0, 2), (1, 1, 0, 5), (1, 0, 1, 0), (2, 0, 0, 1)]


def test_jsonl_round_trip_is_byte_exact(tmp_path):
    t = _trace((3, 1, 2, 4), (1, 0, 0, 0))
    t.write(tmp_path / "t.jsonl")
    text = (tmp_path / "t.jsonl").read_text()
    assert text.splitlines()[0] == '{"tick":1,"x":0,"y":0,"neuron":0}'
    assert Trace.read(tmp_path / "t.jsonl").to_jsonl() == text


def test_compare_identical():
    t = _trace((1, 0, 0, 0))
    assert compare_traces(t, t).equal
    assert compare_traces(Trace(), Trace())


def test_compare_reports_first_divergence():
    a = _trace((1, 0, 0, 0), (7, 0, 0, 1), (9, 0, 0, 0))
    b = _trace((1, 0, 0, 0), (7, 0, 0, 2), (9, 0, 0, 0))
    r = compare_traces(a, b)
    assert not r and r.tick == 7 and r.index == 1
    assert "tick 7" in r.describe()


def test_compare_length_mismatch():
    a = _trace((1, 0, 0, 0))
    r = compare_traces(a, Trace())
    assert not r.equal and r.right is None and r.tick == 1


def test_count_output_spikes_window_and_zeros():
    t = _trace((1, 0, 0, 0), (2, 0, 0, 0), (5, 0, 0, 1))
    assert count_output_spikes(t, (1, 3), num_neurons=3) == {0: 2, 1: 0, 2: 0}
    assert count_output_spikes(Trace(), num_neurons=2) == {0: 0, 1: 0}


def test_count_requires_source_for_mixed_cores():
    t = _trace((1, 0, 0, 0), (1, 1, 0, 0))
    with pytest.raises(ValueError):
        count_output_spikes(t)
    assert count_output_spikes(t, source=(1, 0)) == {0: 1}


def test_error_log_json():
    log = ErrorLog()
    log.add(3, ErrorKind.CONGESTION, "mesh")
    assert log.to_jsonl() == '{"tick": 3, "kind": "Congestion", "location": "mesh"}\n'
    assert log.of_kind(ErrorKind.OVERFLOW) == []
