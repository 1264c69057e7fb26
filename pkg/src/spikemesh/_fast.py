"""Compiled functional-fidelity engine.

Same tick semantics as :class:`spikemesh.simulator.Simulator`, but the whole
network is flattened into arrays and the tick loop runs under numba.  The
crossbar is stored axon-major (for every axon, the neurons it reaches and the
weight each of them selects for that axon's type), so a tick only touches
axons that actually carry a spike.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import NegCompare, ResetMode
from .errors import ConfigurationError, PotentialOverflow
from .network import InputSchedule, NetworkConfig, validate_inputs
from .perf import cycles_per_tick
from .trace import ErrorKind, ErrorLog, Trace

_INT64_MIN = np.iinfo(np.int64).min

# status codes returned by the kernel
_OK = 0
_OVERFLOW = 1


@njit(cache=True)
def _fits(v, lim, wide):
    if wide:
        return v != _INT64_MIN
    return -lim < v < lim


@njit(cache=True)
def _add(a, b, lim, wide):
    s = a + b
    if wide and ((a ^ s) & (b ^ s)) < 0:  # two's complement wrap
        return s, False
    return s, _fits(s, lim, wide)


@njit(cache=True)
def _grow(a, n):
    out = np.empty(max(2 * a.shape[0], n + 1), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _kernel(ticks, axon_base, neuron_base, depth, sched_base, lim, wide,
            csr_ptr, csr_nrn, csr_w,
            pot, pos_th, neg_th, pos_static, pos_val, neg_static, neg_val, leak, symmetric,
            dest_core, dest_axon, dest_off, out_core,
            in_tick, in_core, in_axon, in_off):
    n_cores = depth.shape[0]
    sched = np.zeros(sched_base[n_cores], dtype=np.bool_)
    slot_count = np.zeros(sched_base[n_cores], dtype=np.int64)  # indexed like a row start
    cur = np.zeros(n_cores, dtype=np.int64)
    quiet = np.zeros(n_cores, dtype=np.bool_)
    vtmp = pot.copy()
    ovf = np.zeros(pot.shape[0], dtype=np.bool_)
    emitted = np.empty(pot.shape[0], dtype=np.int64)
    pending = 0

    tr_tick = np.empty(1024, dtype=np.int64)
    tr_nrn = np.empty(1024, dtype=np.int64)
    n_tr = 0
    er_tick = np.empty(64, dtype=np.int64)
    er_core = np.empty(64, dtype=np.int64)
    er_axon = np.empty(64, dtype=np.int64)
    n_er = 0

    ip = 0
    n_in = in_tick.shape[0]
    quiet_at = -1
    t = 0
    while t < ticks:
        if ip == n_in and pending == 0:
            done = True
            for c in range(n_cores):
                if not quiet[c]:
                    done = False
                    break
            if done:
                quiet_at = t
                break
        t += 1
        # phase 1: external inputs
        while ip < n_in and in_tick[ip] == t:
            c = in_core[ip]
            off = in_off[ip]
            if off == 0:
                if n_er == er_tick.shape[0]:
                    er_tick = _grow(er_tick, n_er)
                    er_core = _grow(er_core, n_er)
                    er_axon = _grow(er_axon, n_er)
                er_tick[n_er] = t
                er_core[n_er] = c
                er_axon[n_er] = -1 - in_axon[ip]
                n_er += 1
            else:
                slot = (cur[c] + off) % depth[c]
                row = sched_base[c] + slot * (axon_base[c + 1] - axon_base[c])
                k = row + in_axon[ip]
                if not sched[k]:
                    sched[k] = True
                    slot_count[row] += 1
                    pending += 1
            ip += 1
        # phase 2: advance and evaluate
        n_emit = 0
        for c in range(n_cores):
            na = axon_base[c + 1] - axon_base[c]
            cur[c] = (cur[c] + 1) % depth[c]
            row = sched_base[c] + cur[c] * na
            active = slot_count[row]
            if quiet[c] and active == 0:
                continue
            n0 = neuron_base[c]
            n1 = neuron_base[c + 1]
            for j in range(n0, n1):
                vtmp[j] = pot[j]
            if active:
                for a in range(na):
                    if sched[row + a]:
                        sched[row + a] = False
                        g = axon_base[c] + a
                        for e in range(csr_ptr[g], csr_ptr[g + 1]):
                            j = csr_nrn[e]
                            if ovf[j]:
                                continue
                            s, ok = _add(vtmp[j], csr_w[e], lim[c], wide[c])
                            if ok:
                                vtmp[j] = s
                            else:
                                # reported below, in neuron order
                                ovf[j] = True
                slot_count[row] = 0
                pending -= active
            changed = False
            for j in range(n0, n1):
                if ovf[j]:
                    return (_OVERFLOW, t, j, tr_tick, tr_nrn, n_tr,
                            er_tick, er_core, er_axon, n_er, quiet_at)
                v = vtmp[j]
                spiked = False
                if v >= pos_th[j]:
                    spiked = True
                    if pos_static[j]:
                        v, ok = pos_val[j], True
                    else:
                        v, ok = _add(v, -pos_val[j], lim[c], wide[c])
                elif (symmetric[j] and v <= neg_th[j]) or (not symmetric[j] and v < neg_th[j]):
                    if neg_static[j]:
                        v, ok = neg_val[j], True
                    else:
                        v, ok = _add(v, neg_val[j], lim[c], wide[c])
                else:
                    v, ok = _add(v, -leak[j], lim[c], wide[c])
                if not ok or not _fits(v, lim[c], wide[c]):
                    return (_OVERFLOW, t, j, tr_tick, tr_nrn, n_tr,
                            er_tick, er_core, er_axon, n_er, quiet_at)
                if v != pot[j] or spiked:
                    changed = True
                pot[j] = v
                if spiked and dest_core[j] >= 0:
                    emitted[n_emit] = j
                    n_emit += 1
            quiet[c] = not changed and active == 0
        # phase 3: deliver (emission order is already canonical)
        for q in range(n_emit):
            j = emitted[q]
            d = dest_core[j]
            if d == out_core:
                if n_tr == tr_tick.shape[0]:
                    tr_tick = _grow(tr_tick, n_tr)
                    tr_nrn = _grow(tr_nrn, n_tr)
                tr_tick[n_tr] = t
                tr_nrn[n_tr] = j
                n_tr += 1
            off = dest_off[j]
            if off == 0:
                if n_er == er_tick.shape[0]:
                    er_tick = _grow(er_tick, n_er)
                    er_core = _grow(er_core, n_er)
                    er_axon = _grow(er_axon, n_er)
                er_tick[n_er] = t
                er_core[n_er] = d
                er_axon[n_er] = dest_axon[j]
                n_er += 1
                continue
            na = axon_base[d + 1] - axon_base[d]
            row = sched_base[d] + ((cur[d] + off) % depth[d]) * na
            k = row + dest_axon[j]
            if not sched[k]:
                sched[k] = True
                slot_count[row] += 1
                pending += 1
    return (_OK, t, -1, tr_tick, tr_nrn, n_tr, er_tick, er_core, er_axon, n_er, quiet_at)


class CompiledNetwork:
    """Flat array form of a :class:`NetworkConfig` (cores in row-major order)."""

    def __init__(self, net: NetworkConfig):
        self.net = net
        grid = net.grid
        cores = net.ordered_cores()
        self.coords = [c.coords for c in cores]
        self.position = {xy: k for k, xy in enumerate(self.coords)}
        n_cores = len(cores)
        self.axon_base = np.zeros(n_cores + 1, dtype=np.int64)
        self.neuron_base = np.zeros(n_cores + 1, dtype=np.int64)
        self.depth = np.zeros(n_cores, dtype=np.int64)
        self.sched_base = np.zeros(n_cores + 1, dtype=np.int64)
        self.lim = np.zeros(n_cores, dtype=np.int64)
        self.wide = np.zeros(n_cores, dtype=np.bool_)
        for k, c in enumerate(cores):
            p = c.params
            self.axon_base[k + 1] = self.axon_base[k] + p.num_axons
            self.neuron_base[k + 1] = self.neuron_base[k] + len(c.neurons)
            self.depth[k] = p.scheduler_depth
            self.sched_base[k + 1] = self.sched_base[k] + p.scheduler_depth * p.num_axons
            self.wide[k] = p.potential_bits == 64
            self.lim[k] = 0 if self.wide[k] else p.potential_limit

        n = int(self.neuron_base[-1])
        cols = {name: np.zeros(n, dtype=np.int64) for name in (
            "pot", "pos_th", "neg_th", "pos_val", "neg_val", "leak", "dest_axon", "dest_off")}
        flags = {name: np.zeros(n, dtype=np.bool_) for name in ("pos_static", "neg_static", "symmetric")}
        self.dest_core = np.full(n, -1, dtype=np.int64)
        self.neuron_core = np.zeros(n, dtype=np.int64)
        edges: list[list[tuple[int, int]]] = [[] for _ in range(int(self.axon_base[-1]))]
        for k, c in enumerate(cores):
            for local, nc in enumerate(c.neurons):
                j = int(self.neuron_base[k]) + local
                self.neuron_core[j] = k
                cols["pot"][j] = nc.initial_potential
                cols["pos_th"][j] = nc.pos_threshold
                cols["neg_th"][j] = nc.neg_threshold
                cols["pos_val"][j] = nc.pos_reset.value
                cols["neg_val"][j] = nc.neg_reset.value
                cols["leak"][j] = nc.leak
                flags["pos_static"][j] = nc.pos_reset.mode is ResetMode.STATIC
                flags["neg_static"][j] = nc.neg_reset.mode is ResetMode.STATIC
                flags["symmetric"][j] = nc.neg_compare is NegCompare.SYMMETRIC
                if nc.destination is not None:
                    d = nc.destination
                    self.dest_core[j] = self.position[(c.x + d.dx, c.y + d.dy)]
                    cols["dest_axon"][j] = d.axon
                    cols["dest_off"][j] = d.offset
                for a in nc.connections:
                    w = nc.weights[c.axon_types[a]]
                    edges[int(self.axon_base[k]) + a].append((j, w))
        self.__dict__.update(cols)
        self.__dict__.update(flags)
        self.csr_ptr = np.zeros(len(edges) + 1, dtype=np.int64)
        self.csr_ptr[1:] = np.cumsum([len(e) for e in edges])
        # per axon, neurons ascend, which keeps the per-neuron summation order
        # identical to the reference engine (ascending axon for every neuron)
        flat = [e for es in edges for e in es]
        self.csr_nrn = np.array([e[0] for e in flat], dtype=np.int64)
        self.csr_w = np.array([e[1] for e in flat], dtype=np.int64)
        self.grid = grid
        self.net_cores = cores

    def local(self, j: int) -> tuple[int, int, int]:
        """(x, y, neuron index within its core) of flat neuron ``j``."""
        k = int(self.neuron_core[j])
        x, y = self.coords[k]
        return x, y, j - int(self.neuron_base[k])


def run_fast(net: NetworkConfig, inputs: InputSchedule, ticks: int, *,
             output_core: tuple[int, int] | None = None, cycle_budget: int | None = None,
             compiled: CompiledNetwork | None = None):
    from .simulator import SimulationResult

    if ticks < 1:
        raise ConfigurationError(f"ticks must be >= 1, got {ticks}")
    validate_inputs(net, inputs)
    cn = compiled or CompiledNetwork(net)
    out = tuple(output_core) if output_core is not None else net.output_core
    if out not in cn.position:
        raise ConfigurationError(f"no core at {out}", "output_core")

    errors = ErrorLog()
    if cycle_budget is not None:
        for c in cn.net_cores:
            need = cycles_per_tick(c.params.num_axons, c.params.num_neurons)
            if need > cycle_budget:
                errors.add(1, ErrorKind.BUDGET_OVERRUN,
                           f"core {c.coords} needs {need} cycles, budget {cycle_budget}")

    spikes = inputs.spikes
    in_tick = np.array([s.tick for s in spikes], dtype=np.int64)
    in_core = np.array([cn.position[(s.x, s.y)] for s in spikes], dtype=np.int64)
    in_axon = np.array([s.axon for s in spikes], dtype=np.int64)
    in_off = np.array([s.offset for s in spikes], dtype=np.int64)
    pot = cn.pot.copy()

    (status, t, bad, tr_tick, tr_nrn, n_tr, er_tick, er_core, er_axon, n_er, quiet_at) = _kernel(
        ticks, cn.axon_base, cn.neuron_base, cn.depth, cn.sched_base, cn.lim, cn.wide,
        cn.csr_ptr, cn.csr_nrn, cn.csr_w,
        pot, cn.pos_th, cn.neg_th, cn.pos_static, cn.pos_val, cn.neg_static, cn.neg_val,
        cn.leak, cn.symmetric, cn.dest_core, cn.dest_axon, cn.dest_off, cn.position[out],
        in_tick, in_core, in_axon, in_off)

    for i in range(n_er):
        xy = cn.coords[int(er_core[i])]
        a = int(er_axon[i])
        where = f"core {xy} axon {a}" if a >= 0 else f"core ({xy[0]}, {xy[1]}) axon {-1 - a} (input)"
        errors.add(int(er_tick[i]), ErrorKind.SCHEDULER_LATE_DROP, where)

    src = cn.neuron_core[tr_nrn[:n_tr]]
    xs = np.array([xy[0] for xy in cn.coords], dtype=np.int64)[src]
    ys = np.array([xy[1] for xy in cn.coords], dtype=np.int64)[src]
    trace = Trace(tr_tick[:n_tr], xs, ys, tr_nrn[:n_tr] - cn.neuron_base[src])

    if status == _OVERFLOW:
        x, y, local = cn.local(int(bad))
        errors.add(int(t), ErrorKind.OVERFLOW, f"core {(x, y)} neuron {local}")
        exc = PotentialOverflow(f"potential of core {(x, y)} neuron {local} overflowed at tick {t}",
                                tick=int(t), core=(x, y), neuron=local)
        exc.errors = errors
        exc.trace = trace
        raise exc

    potentials = {xy: pot[cn.neuron_base[k]:cn.neuron_base[k + 1]].tolist()
                  for k, xy in enumerate(cn.coords)}
    return SimulationResult(trace, errors, ticks, None if quiet_at < 0 else int(quiet_at),
                            potentials=potentials)
