import numpy as np
import pytest
from hypothesis import given, strategies as st

from spikemesh import ConfigurationError, KernelTooLarge
from spikemesh.mappers import ConvSpec, map_convolution, utilization_report, windows_per_core


def test_toy_layer_on_small_cores():
    plan = map_convolution(ConvSpec(4, 4, 1, 2, 1, 1), 20, 6)
    assert plan.cores == 4
    assert plan.neurons_used == 9 and plan.cores * plan.neurons_per_core == 24
    assert plan.utilization().unique_axon_utilization == pytest.approx(0.40)
    copies = plan.pixel_copies()
    # centre pixels appear on all four cores, edge midpoints on two
    assert copies[1:3, 1:3].tolist() == [[4, 4], [4, 4]]
    assert copies[0, 1] == 2 and copies[0, 0] == 1


def test_toy_layer_exact_fit():
    plan = map_convolution(ConvSpec(4, 4, 1, 2, 1, 1), 32, 9)
    u = plan.utilization()
    assert plan.cores == 1 and plan.neurons_used == 9
    assert u.neuron_utilization == 1 and u.unique_axon_utilization == 1
    assert u.avg_pixel_replication == 1


def test_large_kernel_default_cores():
    plan = map_convolution(ConvSpec(32, 32, 1, 11, 1, 2), 256, 256)
    u = plan.utilization()
    assert plan.cores == 484 and plan.windows_per_core == 1
    assert {t.neurons_used for t in plan.tiles} == {2}
    assert u.avg_pixel_replication == pytest.approx(60.5)
    assert 100 * u.neuron_utilization == pytest.approx(0.78, abs=0.1)
    assert 100 * u.unique_axon_utilization == pytest.approx(1.7, abs=0.1)


def test_large_kernel_wide_cores():
    plan = map_convolution(ConvSpec(32, 32, 1, 11, 1, 2), 1024, 256)
    assert plan.cores == 4
    assert {t.region for t in plan.tiles} == {(21, 21)}
    assert {t.windows for t in plan.tiles} == {121}
    assert {t.neurons_used for t in plan.tiles} == {242}
    u = plan.utilization()
    assert 100 * u.neuron_utilization == pytest.approx(94.5, abs=0.1)
    assert 100 * u.unique_axon_utilization == pytest.approx(50.0, abs=0.1)
    layer = plan.layer()
    assert utilization_report([layer]).layer_utilization("conv")["unique_axon_utilization"] == pytest.approx(0.5)


def test_kernel_too_large_names_constraint():
    with pytest.raises(KernelTooLarge, match="axons"):
        windows_per_core(ConvSpec(32, 32, 1, 12, 1, 1), 256, 256)
    with pytest.raises(KernelTooLarge, match="neurons"):
        windows_per_core(ConvSpec(8, 8, 1, 3, 1, 300), 256, 256)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        ConvSpec(4, 4, 1, 5, 1, 1)
    with pytest.raises(ConfigurationError):
        ConvSpec(4, 4, 0, 2, 1, 1)


@given(st.integers(1, 24), st.integers(1, 24), st.integers(1, 3), st.integers(1, 5), st.integers(1, 3),
       st.integers(1, 4), st.integers(16, 600), st.integers(4, 64))
def test_tiles_partition_windows_and_fit(w, h, c, k, s, f, axons, neurons):
    if k > min(w, h):
        return
    spec = ConvSpec(w, h, c, k, s, f)
    try:
        plan = map_convolution(spec, axons, neurons)
    except KernelTooLarge:
        assert 2 * c * k * k > axons or f > neurons
        return
    seen = np.zeros((spec.windows_y, spec.windows_x), dtype=int)
    for t in plan.tiles:
        seen[t.windows_y[0]:t.windows_y[1], t.windows_x[0]:t.windows_x[1]] += 1
        assert t.axons_used <= axons and t.neurons_used <= neurons
    assert (seen == 1).all()
    u = plan.utilization()
    assert 0 <= u.neuron_utilization <= 1 and 0 <= u.unique_axon_utilization <= 1
    assert u.avg_pixel_replication >= 1
    if plan.cores == 1 and plan.axons_used == axons:
        assert u.avg_pixel_replication == 1
