"""Tiling a convolution layer over fixed-size cores.

Each (window, feature) pair is one neuron; each input pixel and channel
needs two axons so kernels can hold ternary weights.  A core receives a
square block of kernel windows and a pixel region sized for the largest
block, so pixels near tile borders are copied onto several cores.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from ..errors import ConfigurationError, KernelTooLarge
from .resources import LayerResources

AXONS_PER_PIXEL = 2


@dataclass(frozen=True)
class ConvSpec:
    image_width: int
    image_height: int
    channels: int
    kernel_size: int
    stride: int
    features: int

    def __post_init__(self):
        for name in ("image_width", "image_height", "channels", "kernel_size", "stride", "features"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
        if self.kernel_size > min(self.image_width, self.image_height):
            raise ConfigurationError("kernel larger than the image")

    @property
    def windows_x(self) -> int:
        return (self.image_width - self.kernel_size) // self.stride + 1

    @property
    def windows_y(self) -> int:
        return (self.image_height - self.kernel_size) // self.stride + 1

    def span(self, windows: int) -> int:
        """Pixels covered along one axis by ``windows`` consecutive windows."""
        return (windows - 1) * self.stride + self.kernel_size


@dataclass(frozen=True)
class ConvTile:
    windows_x: tuple[int, int]  # half-open window index range
    windows_y: tuple[int, int]
    pixels_x: tuple[int, int]  # half-open pixel range
    pixels_y: tuple[int, int]
    features: int
    channels: int

    @property
    def windows(self) -> int:
        return (self.windows_x[1] - self.windows_x[0]) * (self.windows_y[1] - self.windows_y[0])

    @property
    def neurons_used(self) -> int:
        return self.windows * self.features

    @property
    def region(self) -> tuple[int, int]:
        return self.pixels_x[1] - self.pixels_x[0], self.pixels_y[1] - self.pixels_y[0]

    @property
    def axons_used(self) -> int:
        w, h = self.region
        return AXONS_PER_PIXEL * self.channels * w * h


@dataclass(frozen=True)
class UtilizationReport:
    unique_axon_utilization: float
    neuron_utilization: float
    avg_pixel_replication: float


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    """``parts`` contiguous ranges whose sizes differ by at most one."""
    base, extra = divmod(total, parts)
    out, start = [], 0
    for p in range(parts):
        size = base + (1 if p < extra else 0)
        out.append((start, start + size))
        start += size
    return out


@dataclass(frozen=True)
class ConvPlan:
    spec: ConvSpec
    axons_per_core: int
    neurons_per_core: int
    windows_per_core: int  # along each axis
    tiles: tuple[ConvTile, ...]

    @property
    def cores(self) -> int:
        return len(self.tiles)

    @property
    def neurons_used(self) -> int:
        return sum(t.neurons_used for t in self.tiles)

    @property
    def axons_used(self) -> int:
        return sum(t.axons_used for t in self.tiles)

    def covered_pixels(self) -> int:
        """Pixels read by at least one window."""
        s = self.spec
        along = [min(s.span(g), g * s.kernel_size) for g in (s.windows_x, s.windows_y)]
        return along[0] * along[1]

    def ideal_axons(self) -> int:
        """Fewest axons the layer could use: two per covered pixel and channel."""
        return AXONS_PER_PIXEL * self.spec.channels * self.covered_pixels()

    def pixel_copies(self) -> np.ndarray:
        """How many tiles hold each pixel (rows are image rows)."""
        copies = np.zeros((self.spec.image_height, self.spec.image_width), dtype=np.int64)
        for t in self.tiles:
            copies[t.pixels_y[0]:t.pixels_y[1], t.pixels_x[0]:t.pixels_x[1]] += 1
        return copies

    def utilization(self) -> UtilizationReport:
        provisioned_axons = self.cores * self.axons_per_core
        # every core can host this many pixel copies; spread them over the
        # pixels the layer actually reads
        slots = self.cores * (self.axons_per_core // (AXONS_PER_PIXEL * self.spec.channels))
        return UtilizationReport(
            unique_axon_utilization=self.ideal_axons() / provisioned_axons,
            neuron_utilization=self.neurons_used / (self.cores * self.neurons_per_core),
            avg_pixel_replication=slots / self.covered_pixels())

    def layer(self, name: str = "conv") -> LayerResources:
        return LayerResources(name, self.cores, self.axons_per_core, self.neurons_per_core,
                              self.axons_used, self.neurons_used, self.ideal_axons())

    def to_dict(self) -> dict:
        u = self.utilization()
        return {
            "spec": vars(self.spec),
            "core": {"axons": self.axons_per_core, "neurons": self.neurons_per_core},
            "cores": self.cores,
            "windows_per_core": self.windows_per_core,
            "neurons_used": self.neurons_used,
            "axons_used": self.axons_used,
            "ideal_axons": self.ideal_axons(),
            "utilization": vars(u),
            "tiles": [{"windows_x": t.windows_x, "windows_y": t.windows_y,
                       "pixels_x": t.pixels_x, "pixels_y": t.pixels_y,
                       "windows": t.windows, "neurons_used": t.neurons_used,
                       "axons_used": t.axons_used} for t in self.tiles],
        }


def windows_per_core(spec: ConvSpec, num_axons: int, num_neurons: int) -> int:
    """Largest square block of windows whose region and neurons fit one core."""
    per_pixel = AXONS_PER_PIXEL * spec.channels
    if per_pixel * spec.kernel_size ** 2 > num_axons:
        raise KernelTooLarge(
            f"axons: one {spec.kernel_size}x{spec.kernel_size} window needs "
            f"{per_pixel * spec.kernel_size ** 2} axons, core has {num_axons}")
    if spec.features > num_neurons:
        raise KernelTooLarge(f"neurons: {spec.features} features exceed {num_neurons} neurons per core")
    w = 1
    limit = max(spec.windows_x, spec.windows_y)
    while (w < limit and per_pixel * spec.span(w + 1) ** 2 <= num_axons
           and (w + 1) ** 2 * spec.features <= num_neurons):
        w += 1
    return w


def map_convolution(spec: ConvSpec, num_axons: int, num_neurons: int) -> ConvPlan:
    w = windows_per_core(spec, num_axons, num_neurons)

    def region(windows: tuple[int, int], size: int) -> tuple[int, int]:
        # every core receives a full block of pixels, slid back inside the
        # image when its windows sit at the far edge
        length = min(spec.span(w), size)
        start = min(windows[0] * spec.stride, size - length)
        return start, start + length

    tiles = []
    for wy in _split(spec.windows_y, ceil(spec.windows_y / w)):
        for wx in _split(spec.windows_x, ceil(spec.windows_x / w)):
            tiles.append(ConvTile(wx, wy, region(wx, spec.image_width), region(wy, spec.image_height),
                                  spec.features, spec.channels))
    return ConvPlan(spec, num_axons, num_neurons, w, tuple(tiles))
