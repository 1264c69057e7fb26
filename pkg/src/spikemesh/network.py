"""Network and input documents: data model, validation, JSON round-trip."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

from .core import CoreParams, NegCompare, NeuronConfig, ResetMode, ResetRule
from .errors import ConfigurationError
from .noc import Fidelity, GridConfig, Packet


@dataclass(frozen=True)
class CoreSpec:
    """Configuration of one core placed at ``(x, y)``."""

    x: int
    y: int
    params: CoreParams
    axon_types: tuple[int, ...]
    neurons: tuple[NeuronConfig, ...]

    @property
    def coords(self) -> tuple[int, int]:
        return self.x, self.y


@dataclass(frozen=True)
class NetworkConfig:
    grid: GridConfig
    cores: tuple[CoreSpec, ...]
    output_core: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "cores", tuple(self.cores))
        object.__setattr__(self, "output_core", tuple(self.output_core))
        validate_network(self)

    def core_at(self, x: int, y: int) -> CoreSpec:
        for c in self.cores:
            if c.x == x and c.y == y:
                return c
        raise KeyError((x, y))

    def ordered_cores(self) -> list[CoreSpec]:
        """Cores in row-major grid order, the canonical evaluation order."""
        return sorted(self.cores, key=lambda c: self.grid.index(c.x, c.y))


class InputSpike(NamedTuple):
    tick: int
    x: int
    y: int
    axon: int
    offset: int = 1


@dataclass(frozen=True)
class InputSchedule:
    """External spikes.

    A spike stamped ``tick`` reaches its core's scheduler in the window just
    before that tick starts, the same window in which packets emitted during
    tick ``tick - 1`` arrive; it is therefore consumed at ``tick + offset - 1``.
    With the usual offset of 1 the spike is integrated during ``tick`` itself.
    """

    spikes: tuple[InputSpike, ...] = ()

    def __post_init__(self):
        spikes = tuple(InputSpike(*s) for s in self.spikes)
        for i, s in enumerate(spikes):
            if s.tick < 1:
                raise ConfigurationError(f"tick must be >= 1, got {s.tick}", f"spikes[{i}]")
        object.__setattr__(self, "spikes", tuple(sorted(spikes)))

    def __len__(self):
        return len(self.spikes)

    def __add__(self, other: "InputSchedule") -> "InputSchedule":
        return InputSchedule(self.spikes + other.spikes)

    @property
    def last_tick(self) -> int:
        return max((s.tick for s in self.spikes), default=0)


def validate_network(net: NetworkConfig) -> None:
    grid = net.grid
    if not net.cores:
        raise ConfigurationError("network has no cores", "cores")
    seen: dict[tuple[int, int], int] = {}
    for i, c in enumerate(net.cores):
        path = f"cores[{i}]"
        if not grid.contains(c.x, c.y):
            raise ConfigurationError(f"core ({c.x}, {c.y}) outside the grid", path)
        if c.coords in seen:
            raise ConfigurationError(f"duplicate core coordinates ({c.x}, {c.y})", path)
        seen[c.coords] = i
        p = c.params
        if len(c.axon_types) != p.num_axons:
            raise ConfigurationError(f"{len(c.axon_types)} axon types for {p.num_axons} axons", f"{path}.axon_types")
        for a, t in enumerate(c.axon_types):
            if not 0 <= t < p.num_weights:
                raise ConfigurationError(f"axon type {t} >= num_weights {p.num_weights}", f"{path}.axon_types[{a}]")
        if len(c.neurons) > p.num_neurons:
            raise ConfigurationError(f"{len(c.neurons)} neurons for num_neurons {p.num_neurons}", f"{path}.neurons")
        for j, n in enumerate(c.neurons):
            npath = f"{path}.neurons[{j}]"
            if len(n.weights) != p.num_weights:
                raise ConfigurationError(f"{len(n.weights)} weights, core has {p.num_weights}", f"{npath}.weights")
            if n.connections and (n.connections[0] < 0 or n.connections[-1] >= p.num_axons):
                raise ConfigurationError(f"connection outside [0, {p.num_axons})", f"{npath}.connections")
            if abs(n.initial_potential) >= p.potential_limit:
                raise ConfigurationError("initial potential out of range", f"{npath}.initial_potential")
    for i, c in enumerate(net.cores):
        for j, n in enumerate(c.neurons):
            if n.destination is None:
                continue
            npath = f"cores[{i}].neurons[{j}].dest"
            d = grid.resolve(c.coords, n.destination, npath)
            if d not in seen:
                raise ConfigurationError(f"no core at destination {d}", npath)
            target = net.cores[seen[d]].params
            if not 0 <= n.destination.axon < target.num_axons:
                raise ConfigurationError(
                    f"axon {n.destination.axon} outside [0, {target.num_axons}) of core {d}", npath)
            if not 0 <= n.destination.offset < target.scheduler_depth:
                raise ConfigurationError(
                    f"offset {n.destination.offset} outside [0, {target.scheduler_depth})", npath)
    if tuple(net.output_core) not in seen:
        raise ConfigurationError(f"no core at {tuple(net.output_core)}", "output_core")


def validate_inputs(net: NetworkConfig, inputs: InputSchedule) -> None:
    cores = {c.coords: c for c in net.cores}
    for i, s in enumerate(inputs.spikes):
        path = f"spikes[{i}]"
        c = cores.get((s.x, s.y))
        if c is None:
            raise ConfigurationError(f"no core at ({s.x}, {s.y})", path)
        if not 0 <= s.axon < c.params.num_axons:
            raise ConfigurationError(f"axon {s.axon} outside [0, {c.params.num_axons})", path)
        if not 0 <= s.offset < c.params.scheduler_depth:
            raise ConfigurationError(f"offset {s.offset} outside [0, {c.params.scheduler_depth})", path)


# -- JSON documents -------------------------------------------------------------

def _req(doc: Mapping, key: str, path: str, kind=int):
    if not isinstance(doc, Mapping) or key not in doc:
        raise ConfigurationError(f"missing key {key!r}", path)
    v = doc[key]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise ConfigurationError(f"{key!r} must be an integer, got {v!r}", path)
    if kind is list and not isinstance(v, list):
        raise ConfigurationError(f"{key!r} must be a list", path)
    return v


def _reset_from(doc: Any, path: str) -> ResetRule:
    if not isinstance(doc, Mapping):
        raise ConfigurationError("reset must be an object", path)
    try:
        return ResetRule(ResetMode(doc.get("mode", "linear")), _req(doc, "value", path))
    except ValueError as exc:
        raise ConfigurationError(str(exc), path) from None


def _neuron_from(doc: Mapping, path: str, num_axons: int) -> NeuronConfig:
    if not isinstance(doc, Mapping):
        raise ConfigurationError("neuron must be an object", path)
    conns = _req(doc, "connections", path, list)
    for a in conns:
        if not isinstance(a, int) or not 0 <= a < num_axons:
            raise ConfigurationError(f"connection {a!r} outside [0, {num_axons})", f"{path}.connections")
    dest = doc.get("dest")
    if dest is not None:
        dpath = f"{path}.dest"
        dest = Packet(_req(dest, "dx", dpath), _req(dest, "dy", dpath), _req(dest, "axon", dpath),
                      dest.get("offset", 1))
    try:
        return NeuronConfig(
            weights=tuple(_req(doc, "weights", path, list)),
            connections=tuple(conns),
            pos_threshold=_req(doc, "pos_threshold", path),
            neg_threshold=_req(doc, "neg_threshold", path),
            pos_reset=_reset_from(doc.get("pos_reset", {"mode": "linear", "value": 1}), f"{path}.pos_reset"),
            neg_reset=_reset_from(doc.get("neg_reset", {"mode": "static", "value": 0}), f"{path}.neg_reset"),
            leak=doc.get("leak", 0),
            initial_potential=doc.get("initial_potential", 0),
            destination=dest,
            neg_compare=NegCompare(doc.get("neg_compare", "asymmetric")),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), path) from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc), path) from None


def network_from_dict(doc: Mapping) -> NetworkConfig:
    """Parse and fully validate a network document."""
    if not isinstance(doc, Mapping):
        raise ConfigurationError("network document must be a JSON object")
    g = doc.get("grid")
    if not isinstance(g, Mapping):
        raise ConfigurationError("missing grid object", "grid")
    try:
        grid = GridConfig(
            width=_req(g, "width", "grid"),
            height=_req(g, "height", "grid"),
            fifo_capacity=g.get("fifo_capacity", 16),
            fidelity=Fidelity(g.get("fidelity", "functional")),
            dim_x_max=g.get("dim_x_max"),
            dim_y_max=g.get("dim_y_max"),
            router_cycles=g.get("router_cycles"),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc), "grid") from None
    cores = []
    for i, cd in enumerate(_req(doc, "cores", "", list)):
        path = f"cores[{i}]"
        pd = cd.get("params") if isinstance(cd, Mapping) else None
        if not isinstance(pd, Mapping):
            raise ConfigurationError("missing params object", path)
        try:
            params = CoreParams(
                num_axons=_req(pd, "axons", f"{path}.params"),
                num_neurons=_req(pd, "neurons", f"{path}.params"),
                num_weights=pd.get("weights", 4),
                scheduler_depth=pd.get("scheduler_depth", 16),
                potential_bits=pd.get("potential_bits", 64),
            )
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), f"{path}.params") from None
        types = cd.get("axon_types", [0] * params.num_axons)
        neurons = [_neuron_from(nd, f"{path}.neurons[{j}]", params.num_axons)
                   for j, nd in enumerate(_req(cd, "neurons", path, list))]
        cores.append(CoreSpec(_req(cd, "x", path), _req(cd, "y", path), params, tuple(types), tuple(neurons)))
    out = doc.get("output_core")
    if not isinstance(out, Mapping):
        raise ConfigurationError("missing output_core object", "output_core")
    return NetworkConfig(grid, tuple(cores), (_req(out, "x", "output_core"), _req(out, "y", "output_core")))


def network_to_dict(net: NetworkConfig) -> dict:
    g = net.grid
    grid = {"width": g.width, "height": g.height, "fifo_capacity": g.fifo_capacity,
            "fidelity": g.fidelity.value}
    for k in ("dim_x_max", "dim_y_max", "router_cycles"):
        if getattr(g, k) is not None:
            grid[k] = getattr(g, k)
    cores = []
    for c in net.cores:
        p = c.params
        params = {"axons": p.num_axons, "neurons": p.num_neurons, "weights": p.num_weights,
                  "scheduler_depth": p.scheduler_depth}
        if p.potential_bits != 64:
            params["potential_bits"] = p.potential_bits
        neurons = []
        for n in c.neurons:
            d = n.destination
            neurons.append({
                "weights": list(n.weights),
                "connections": list(n.connections),
                "pos_threshold": n.pos_threshold,
                "neg_threshold": n.neg_threshold,
                "pos_reset": {"mode": n.pos_reset.mode.value, "value": n.pos_reset.value},
                "neg_reset": {"mode": n.neg_reset.mode.value, "value": n.neg_reset.value},
                "leak": n.leak,
                "initial_potential": n.initial_potential,
                "neg_compare": n.neg_compare.value,
                "dest": None if d is None else {"dx": d.dx, "dy": d.dy, "axon": d.axon, "offset": d.offset},
            })
        cores.append({"x": c.x, "y": c.y, "params": params, "axon_types": list(c.axon_types), "neurons": neurons})
    return {"grid": grid, "cores": cores, "output_core": {"x": net.output_core[0], "y": net.output_core[1]}}


def inputs_from_dict(doc: Mapping) -> InputSchedule:
    if not isinstance(doc, Mapping):
        raise ConfigurationError("input document must be a JSON object")
    spikes = []
    for i, s in enumerate(_req(doc, "spikes", "", list)):
        path = f"spikes[{i}]"
        spikes.append(InputSpike(_req(s, "tick", path), _req(s, "x", path), _req(s, "y", path),
                                 _req(s, "axon", path), s.get("offset", 1)))
    return InputSchedule(tuple(spikes))


def inputs_to_dict(inputs: InputSchedule) -> dict:
    return {"spikes": [s._asdict() for s in inputs.spikes]}


def load_network(source: str | Path | Mapping) -> NetworkConfig:
    """Load a network from a path, a JSON string or an already-parsed mapping."""
    return network_from_dict(_read(source))


def load_inputs(source: str | Path | Mapping) -> InputSchedule:
    return inputs_from_dict(_read(source))


def _read(source):
    if isinstance(source, Mapping):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read {source}: {exc}") from None
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from None


def dump_json(doc: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")


def make_inputs(events: Iterable[Sequence[int]]) -> InputSchedule:
    return InputSchedule(tuple(InputSpike(*e) for e in events))
