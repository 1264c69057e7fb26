"""Tick-accurate simulation of a mesh of spiking neuromorphic cores.

The package models configurable crossbar cores connected by an XY-routed 2D
mesh, compiles vector-matrix products and convolution layers onto them and
estimates controller timing.
"""

from .core import (Core, CoreParams, DebugRow, NegCompare, NeuronConfig, NeuronSummary, ResetMode,
                   ResetRule, SchedulerMemory, core_tick, integrate_row, select_weight,
                   threshold_reset_leak)
from .errors import (ConfigurationError, DecodeError, KernelTooLarge, PotentialOverflow,
                     SimulationError, SpikemeshError, UnsupportedSize)
from .network import (CoreSpec, InputSchedule, InputSpike, NetworkConfig, load_inputs,
                      load_network, network_from_dict, network_to_dict)
from .noc import Direction, Fidelity, GridConfig, MeshNetwork, Packet, route_decision, xy_path
from .perf import PerfQuery, cycles_per_tick, throughput, tick_rate
from .simulator import SimulationResult, Simulator, run
from .trace import ErrorKind, ErrorLog, SpikeEvent, Trace, compare_traces, count_output_spikes

__version__ = "0.1.0"

__all__ = [
    "Core", "CoreParams", "DebugRow", "NegCompare", "NeuronConfig", "NeuronSummary", "ResetMode",
    "ResetRule", "SchedulerMemory", "core_tick", "integrate_row", "select_weight",
    "threshold_reset_leak",
    "ConfigurationError", "DecodeError", "KernelTooLarge", "PotentialOverflow", "SimulationError",
    "SpikemeshError", "UnsupportedSize",
    "CoreSpec", "InputSchedule", "InputSpike", "NetworkConfig", "load_inputs", "load_network",
    "network_from_dict", "network_to_dict",
    "Direction", "Fidelity", "GridConfig", "MeshNetwork", "Packet", "route_decision", "xy_path",
    "PerfQuery", "cycles_per_tick", "throughput", "tick_rate",
    "SimulationResult", "Simulator", "run",
    "ErrorKind", "ErrorLog", "SpikeEvent", "Trace", "compare_traces", "count_output_spikes",
]
