"""Resource and utilization accounting."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class CoreUsage:
    x: int
    y: int
    axons_provisioned: int
    axons_used: int
    neurons_provisioned: int
    neurons_used: int

    def __post_init__(self):
        if self.axons_used > self.axons_provisioned or self.neurons_used > self.neurons_provisioned:
            raise ValueError(f"core ({self.x}, {self.y}) uses more than it provisions")


@dataclass(frozen=True)
class ResourceReport:
    per_core: tuple[CoreUsage, ...] = ()

    @property
    def cores(self) -> int:
        return len(self.per_core)

    @property
    def axons_provisioned(self) -> int:
        return sum(c.axons_provisioned for c in self.per_core)

    @property
    def axons_used(self) -> int:
        return sum(c.axons_used for c in self.per_core)

    @property
    def neurons_provisioned(self) -> int:
        return sum(c.neurons_provisioned for c in self.per_core)

    @property
    def neurons_used(self) -> int:
        return sum(c.neurons_used for c in self.per_core)

    def pairs(self) -> list[tuple[int, int]]:
        """``(axons, neurons)`` used per core."""
        return [(c.axons_used, c.neurons_used) for c in self.per_core]

    def to_dict(self) -> dict:
        return {"cores": self.cores, "axons": self.axons_used, "neurons": self.neurons_used,
                "axons_provisioned": self.axons_provisioned,
                "neurons_provisioned": self.neurons_provisioned,
                "per_core": [asdict(c) for c in self.per_core]}


def savings(smaller: ResourceReport, larger: ResourceReport) -> tuple[int, int]:
    """Axon and neuron totals of ``smaller`` as whole percentages of ``larger``."""
    return (round(100 * smaller.axons_used / larger.axons_used),
            round(100 * smaller.neurons_used / larger.neurons_used))


@dataclass(frozen=True)
class LayerResources:
    """One network layer: ``cores`` identical cores of the given size."""

    name: str
    cores: int
    axons_per_core: int
    neurons_per_core: int
    axons_used: int | None = None
    neurons_used: int | None = None
    ideal_axons: int | None = None  # minimum axons the layer could get away with

    @property
    def axons(self) -> int:
        return self.cores * self.axons_per_core

    @property
    def neurons(self) -> int:
        return self.cores * self.neurons_per_core


@dataclass(frozen=True)
class NetworkTotals:
    cores: int
    axons: int
    neurons: int
    layers: tuple[LayerResources, ...] = field(default=(), repr=False)

    def as_tuple(self) -> tuple[int, int, int]:
        return self.cores, self.axons, self.neurons

    def neuron_utilization(self) -> float:
        used = sum(l.neurons if l.neurons_used is None else l.neurons_used for l in self.layers)
        return used / self.neurons

    def layer_utilization(self, name: str) -> dict[str, float]:
        layer = next(l for l in self.layers if l.name == name)
        out = {}
        if layer.neurons_used is not None:
            out["neuron_utilization"] = layer.neurons_used / layer.neurons
        if layer.axons_used is not None:
            out["axon_utilization"] = layer.axons_used / layer.axons
        if layer.ideal_axons is not None:
            out["unique_axon_utilization"] = layer.ideal_axons / layer.axons
        return out


def utilization_report(layers: list[LayerResources]) -> NetworkTotals:
    return NetworkTotals(sum(l.cores for l in layers), sum(l.axons for l in layers),
                         sum(l.neurons for l in layers), tuple(layers))
