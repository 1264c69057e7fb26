import pytest

from spikemesh.mappers import CoreUsage, LayerResources, ResourceReport, utilization_report


def _sar(modified):
    if modified:
        return [LayerResources("conv", 4, 1024, 256, neurons_used=968, ideal_axons=2048),
                LayerResources("fc", 4, 256, 64), LayerResources("out", 1, 256, 64)]
    return [LayerResources("conv", 484, 256, 256, neurons_used=968, ideal_axons=2048),
            LayerResources("fc", 4, 256, 256), LayerResources("out", 1, 256, 256)]


def test_sar_default_totals():
    assert utilization_report(_sar(False)).as_tuple() == (489, 125184, 125184)


def test_sar_modified_totals():
    totals = utilization_report(_sar(True))
    assert totals.as_tuple() == (9, 5376, 1344)
    conv = totals.layer_utilization("conv")
    assert conv["neuron_utilization"] == pytest.approx(0.945, abs=1e-3)
    assert conv["unique_axon_utilization"] == pytest.approx(0.50)


def test_usage_cannot_exceed_provision():
    with pytest.raises(ValueError):
        CoreUsage(0, 0, 4, 5, 4, 4)


def test_report_totals_and_dict():
    r = ResourceReport((CoreUsage(0, 0, 10, 8, 4, 4), CoreUsage(1, 0, 6, 6, 2, 1)))
    assert (r.cores, r.axons_used, r.neurons_used, r.axons_provisioned) == (2, 14, 5, 16)
    d = r.to_dict()
    assert d["axons"] == 14 and len(d["per_core"]) == 2
