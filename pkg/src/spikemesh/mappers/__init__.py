"""Compilers from workloads (VMM, convolution) to core networks."""

from .conv import ConvPlan, ConvSpec, ConvTile, UtilizationReport, map_convolution, windows_per_core
from .resources import (CoreUsage, LayerResources, NetworkTotals, ResourceReport, savings,
                        utilization_report)
from .vmm import (MappedNetwork, MappingMode, OutputChannel, VmmProblem, decode_vmm,
                  feedback_demo_network, map_vmm, map_vmm_positive, map_vmm_signed, rate_encode)

__all__ = [
    "ConvPlan", "ConvSpec", "ConvTile", "UtilizationReport", "map_convolution", "windows_per_core",
    "CoreUsage", "LayerResources", "NetworkTotals", "ResourceReport", "savings", "utilization_report",
    "MappedNetwork", "MappingMode", "OutputChannel", "VmmProblem", "decode_vmm",
    "feedback_demo_network", "map_vmm", "map_vmm_positive", "map_vmm_signed", "rate_encode",
]
