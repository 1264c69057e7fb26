"""Packets, XY routing and the 2D mesh interconnect.

Coordinates follow the usual convention: ``x`` grows to the east, ``y`` grows
to the north, and a core's linear index is ``y * width + x``.  A packet holds
the *remaining* displacement to its destination; every hop moves one of the
two components one step closer to zero, x first.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from .errors import ConfigurationError


class Direction(enum.Enum):
    EAST = "east"
    WEST = "west"
    NORTH = "north"
    SOUTH = "south"
    ACCEPT = "accept"


# where a packet leaving through a port shows up on the neighbouring router
_OPPOSITE = {
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
}
_STEP = {
    Direction.EAST: (1, 0),
    Direction.WEST: (-1, 0),
    Direction.NORTH: (0, 1),
    Direction.SOUTH: (0, -1),
}


class Fidelity(enum.Enum):
    FUNCTIONAL = "functional"
    CYCLE = "cycle"


@dataclass(frozen=True)
class Packet:
    """A routed spike."""

    dx: int
    dy: int
    axon: int
    offset: int = 1

    @property
    def hops(self) -> int:
        return abs(self.dx) + abs(self.dy)


def route_decision(p: Packet) -> Direction:
    """Dimension-order routing: exhaust dx before touching dy."""
    if p.dx > 0:
        return Direction.EAST
    if p.dx < 0:
        return Direction.WEST
    if p.dy > 0:
        return Direction.NORTH
    if p.dy < 0:
        return Direction.SOUTH
    return Direction.ACCEPT


def hop_apply(p: Packet, d: Direction) -> Packet:
    if d is Direction.EAST:
        return replace(p, dx=p.dx - 1)
    if d is Direction.WEST:
        return replace(p, dx=p.dx + 1)
    if d is Direction.NORTH:
        return replace(p, dy=p.dy - 1)
    if d is Direction.SOUTH:
        return replace(p, dy=p.dy + 1)
    raise ValueError("an accepted packet does not hop")


def xy_path(p: Packet) -> list[Direction]:
    """Directions taken by ``p`` from its source until it is accepted."""
    path = []
    d = route_decision(p)
    while d is not Direction.ACCEPT:
        path.append(d)
        p = hop_apply(p, d)
        d = route_decision(p)
    return path


@dataclass(frozen=True)
class GridConfig:
    """Mesh geometry and interconnect options.

    ``dim_x_max``/``dim_y_max`` size the signed dx/dy packet fields.  They
    default to twice the grid extent so every in-grid destination is
    addressable; TrueNorth-like setups pin them explicitly.
    ``router_cycles`` bounds the router cycles available between two ticks
    in cycle fidelity (``None`` means drain completely every tick).
    """

    width: int
    height: int
    fifo_capacity: int = 16
    fidelity: Fidelity = Fidelity.FUNCTIONAL
    dim_x_max: int | None = None
    dim_y_max: int | None = None
    router_cycles: int | None = None

    def __post_init__(self):
        if isinstance(self.fidelity, str):
            object.__setattr__(self, "fidelity", Fidelity(self.fidelity))
        for name in ("width", "height", "fifo_capacity"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigurationError(f"must be a positive integer, got {v!r}", f"grid.{name}")
        for name in ("dim_x_max", "dim_y_max", "router_cycles"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigurationError(f"must be a positive integer, got {v!r}", f"grid.{name}")

    @property
    def size(self) -> int:
        return self.width * self.height

    def index(self, x: int, y: int) -> int:
        return y * self.width + x

    def coords(self, index: int) -> tuple[int, int]:
        return index % self.width, index // self.width

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def dx_range(self) -> tuple[int, int]:
        dim = self.dim_x_max or 2 * self.width
        return -(dim // 2), (dim + 1) // 2 - 1

    def dy_range(self) -> tuple[int, int]:
        dim = self.dim_y_max or 2 * self.height
        return -(dim // 2), (dim + 1) // 2 - 1

    def resolve(self, source: tuple[int, int], p: Packet, path: str | None = None) -> tuple[int, int]:
        """Destination coordinates of a packet created at ``source``.

        Raises ConfigurationError if the displacement exceeds the packet field
        range or lands outside the grid.
        """
        lo, hi = self.dx_range()
        if not lo <= p.dx <= hi:
            raise ConfigurationError(f"dx={p.dx} outside packet range [{lo}, {hi}]", path)
        lo, hi = self.dy_range()
        if not lo <= p.dy <= hi:
            raise ConfigurationError(f"dy={p.dy} outside packet range [{lo}, {hi}]", path)
        x, y = source[0] + p.dx, source[1] + p.dy
        if not self.contains(x, y):
            raise ConfigurationError(f"destination ({x}, {y}) is off the {self.width}x{self.height} grid", path)
        return x, y


@dataclass
class Delivery:
    """A packet handed to the scheduler of core ``dest``."""

    dest: int
    packet: Packet
    tag: Any = None
    hops: list[Direction] = field(default_factory=list)


def drain_functional(grid: GridConfig, injected: Iterable[tuple[int, Packet, Any]]) -> list[Delivery]:
    """Deliver every packet instantly along its XY path.

    ``injected`` holds ``(source index, packet, tag)`` triples already in
    canonical order; deliveries come back in the same order.
    """
    out = []
    for src, p, tag in injected:
        x, y = grid.coords(src)
        out.append(Delivery(grid.index(x + p.dx, y + p.dy), p, tag))
    return out


_IN_PORTS = (Direction.ACCEPT, Direction.EAST, Direction.WEST, Direction.NORTH, Direction.SOUTH)
_OUT_PORTS = (Direction.EAST, Direction.WEST, Direction.NORTH, Direction.SOUTH, Direction.ACCEPT)


@dataclass
class _Flit:
    packet: Packet
    tag: Any
    hops: list[Direction]


class MeshNetwork:
    """Cycle-stepped mesh of routers with bounded inter-router FIFOs.

    Every router owns five input queues: the local injection queue
    (unbounded, fed by its core's controller) and one bounded FIFO per
    neighbour, keyed by the side the traffic arrives from.  In one router
    cycle each output port forwards at most one head-of-line packet, chosen
    round-robin among the inputs that want it, and only if the downstream
    FIFO had room at the start of the cycle.  A full FIFO therefore stalls
    its upstream reader, which in turn fills up and stalls its own
    neighbours.  The local output port ejects into the core's scheduler and
    never blocks.
    """

    def __init__(self, grid: GridConfig, fifo_capacity: int | None = None, record_hops: bool = False):
        self.grid = grid
        self.capacity = fifo_capacity or grid.fifo_capacity
        if self.capacity < 1:
            raise ConfigurationError("fifo capacity must be >= 1")
        self.record_hops = record_hops
        n = grid.size
        self._queues = [{port: deque() for port in _IN_PORTS} for _ in range(n)]
        self._rr = [{port: 0 for port in _OUT_PORTS} for _ in range(n)]
        self.cycles = 0
        self.in_flight = 0
        self.max_occupancy = 0

    def inject(self, source: int, packet: Packet, tag: Any = None) -> None:
        x, y = self.grid.coords(source)
        if not self.grid.contains(x + packet.dx, y + packet.dy):
            raise ConfigurationError(f"packet from core {source} leaves the grid: {packet}")
        self._queues[source][Direction.ACCEPT].append(_Flit(packet, tag, []))
        self.in_flight += 1

    def idle(self) -> bool:
        return self.in_flight == 0

    def step(self) -> list[Delivery]:
        """Advance every router by one cycle; returns packets ejected this cycle."""
        moves = []  # (router, in_port, out_port)
        for r, queues in enumerate(self._queues):
            wants: dict[Direction, list[Direction]] = {}
            for port in _IN_PORTS:
                q = queues[port]
                if q:
                    wants.setdefault(route_decision(q[0].packet), []).append(port)
            for out, candidates in wants.items():
                if out is not Direction.ACCEPT:
                    nb = self._neighbour(r, out)
                    if len(self._queues[nb][_OPPOSITE[out]]) >= self.capacity:
                        continue  # backpressure: downstream FIFO is full
                start = self._rr[r][out]
                # round-robin over the fixed input-port order
                pick = min(candidates, key=lambda p: (_IN_PORTS.index(p) - start) % len(_IN_PORTS))
                self._rr[r][out] = (_IN_PORTS.index(pick) + 1) % len(_IN_PORTS)
                moves.append((r, pick, out))

        delivered = []
        for r, port, out in moves:
            flit = self._queues[r][port].popleft()
            if out is Direction.ACCEPT:
                self.in_flight -= 1
                delivered.append(Delivery(r, flit.packet, flit.tag, flit.hops))
                continue
            flit.packet = hop_apply(flit.packet, out)
            if self.record_hops:
                flit.hops.append(out)
            nb = self._neighbour(r, out)
            q = self._queues[nb][_OPPOSITE[out]]
            q.append(flit)
            if len(q) > self.max_occupancy:
                self.max_occupancy = len(q)
        self.cycles += 1
        return delivered

    def drain(self, budget: int | None = None) -> list[Delivery]:
        """Step until empty or until ``budget`` cycles have elapsed."""
        out = []
        n = 0
        while self.in_flight and (budget is None or n < budget):
            out.extend(self.step())
            n += 1
        return out

    def _neighbour(self, r: int, d: Direction) -> int:
        x, y = self.grid.coords(r)
        sx, sy = _STEP[d]
        return self.grid.index(x + sx, y + sy)
