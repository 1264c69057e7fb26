"""Command line interface: ``spikemesh {sim,map,report,perf,compare}``.

Exit codes: 0 success, 1 traces differ, 2 usage error, 3 invalid input,
4 the simulation aborted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DecodeError, PotentialOverflow, SpikemeshError
from .network import dump_json, inputs_to_dict, load_inputs, load_network, network_to_dict
from .perf import PerfQuery, throughput
from .simulator import run
from .trace import Trace, compare_traces

EXIT_OK, EXIT_DIVERGED, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3, 4


def _pair(text: str) -> tuple[int, int]:
    """Parse ``AxB`` (or ``A,B``) into two positive integers."""
    for sep in ("x", "X", ","):
        if sep in text:
            a, b = text.split(sep, 1)
            try:
                pair = int(a), int(b)
            except ValueError:
                break
            if min(pair) < 1:
                break
            return pair
    raise argparse.ArgumentTypeError(f"expected two positive integers like 256x256, got {text!r}")


def _coords(text: str) -> tuple[int, int]:
    a, _, b = text.partition(",")
    try:
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}") from None


def _read_array(source: str) -> np.ndarray:
    """A JSON file, a CSV file of integer rows, or an inline JSON array."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
        if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
            data = json.loads(text)
        else:
            data = [[int(v) for v in row if v.strip()] for row in csv.reader(text.splitlines()) if row]
            if data and all(len(r) == 1 for r in data):
                data = [r[0] for r in data] if len(data) > 1 else data[0]
    else:
        try:
            data = json.loads(source)
        except json.JSONDecodeError:
            raise ConfigurationError(f"{source!r} is neither a file nor a JSON array") from None
    arr = np.asarray(data)
    if arr.dtype.kind not in "iu" and arr.size:
        raise ConfigurationError(f"{source}: entries must be integers")
    return arr.astype(np.int64)


def _sim_config(path: str | None) -> dict:
    if path is None:
        return {}
    cfg = json.loads(Path(path).read_text())
    if not isinstance(cfg, dict):
        raise ConfigurationError("simulation config must be a JSON object")
    return cfg


def cmd_sim(args) -> int:
    cfg = _sim_config(args.config)
    net = load_network(args.network)
    inputs = load_inputs(args.input) if args.input else None
    ticks = args.ticks or cfg.get("ticks")
    if not ticks:
        raise ConfigurationError("number of ticks missing (--ticks or config 'ticks')")
    fidelity = args.fidelity or cfg.get("fidelity")
    out_core = args.output_core
    if out_core is None and "output_core" in cfg:
        out_core = (cfg["output_core"]["x"], cfg["output_core"]["y"])
    debug_path = args.debug_rows
    if debug_path is None and cfg.get("debug_rows"):
        debug_path = str(args.out) + ".debug.jsonl"
    try:
        res = run(net, inputs, ticks, fidelity=fidelity, engine=args.engine, output_core=out_core,
                  cycle_budget=args.cycle_budget, debug=debug_path is not None)
    except PotentialOverflow as exc:
        if args.errors and getattr(exc, "errors", None) is not None:
            exc.errors.write(args.errors)
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    res.trace.write(args.out)
    if args.errors:
        res.errors.write(args.errors)
    if debug_path is not None:
        with open(debug_path, "w") as fh:
            for (x, y), rows in sorted(res.debug_rows.items()):
                for r in rows:
                    fh.write(json.dumps({"x": x, "y": y, **r._asdict()}) + "\n")
    print(f"{len(res.trace)} output spikes, {len(res.errors)} errors")
    return EXIT_OK


def cmd_map_vmm(args) -> int:
    from .mappers.vmm import VmmProblem, map_vmm

    problem = VmmProblem(_read_array(args.matrix), _read_array(args.vector), args.bits)
    mode = args.mode
    if mode == "auto":
        mode = "positive" if (problem.matrix >= 0).all() and (problem.vector >= 0).all() else "symmetric"
    mapped = map_vmm(problem, mode, core_limits=args.core)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(network_to_dict(mapped.network), out / "network.json")
    dump_json(inputs_to_dict(mapped.inputs), out / "input.json")
    dump_json(mapped.resources.to_dict(), out / "resources.json")
    dump_json({"kind": "vmm", "mode": mode, "ticks": mapped.ticks_required,
               **mapped.decode_metadata()}, out / "decode.json")
    r = mapped.resources
    print(f"{mode}: {r.cores} cores, {r.axons_used} axons, {r.neurons_used} neurons; "
          f"simulate for {mapped.ticks_required} ticks")
    return EXIT_OK


def cmd_map_conv(args) -> int:
    from .mappers.conv import ConvSpec, map_convolution

    w, h = args.image
    spec = ConvSpec(w, h, args.channels, args.kernel, args.stride, args.features)
    plan = map_convolution(spec, *args.core)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump_json({"kind": "conv", **plan.to_dict()}, out / "plan.json")
    print(f"{plan.cores} cores of {args.core[0]}x{args.core[1]}, {plan.windows_per_core}x"
          f"{plan.windows_per_core} windows per core")
    return EXIT_OK


def cmd_report(args) -> int:
    from .mappers.vmm import decode_vmm

    plan_dir = Path(args.plan)
    if (plan_dir / "decode.json").is_file():
        meta = json.loads((plan_dir / "decode.json").read_text())
        trace = Trace.read(args.trace or plan_dir / "trace.jsonl")
        print(" ".join(str(v) for v in decode_vmm(trace, meta)))
        return EXIT_OK
    if (plan_dir / "plan.json").is_file():
        plan = json.loads((plan_dir / "plan.json").read_text())
        u = plan["utilization"]
        core = plan["core"]
        print(f"cores: {plan['cores']}")
        print(f"neurons used: {plan['neurons_used']} of {plan['cores'] * core['neurons']}")
        print(f"neuron utilization: {100 * u['neuron_utilization']:.2f}%")
        print(f"unique axon utilization: {100 * u['unique_axon_utilization']:.2f}%")
        print(f"average pixel replication: {u['avg_pixel_replication']:.2f}")
        return EXIT_OK
    raise ConfigurationError(f"{plan_dir} holds neither decode.json nor plan.json")


def cmd_perf(args) -> int:
    q = PerfQuery(args.core[0], args.core[1], args.freq, args.parallel, args.ticks_per_item)
    print(f"cycles per tick: {q.cycles}")
    print(f"tick rate: {float(q.tick_rate) / 1e3:.3f} kHz")
    print(f"throughput: {throughput(q)} items/s")
    return EXIT_OK


def cmd_compare(args) -> int:
    result = compare_traces(Trace.read(args.a), Trace.read(args.b))
    print(result.describe())
    return EXIT_OK if result.equal else EXIT_DIVERGED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spikemesh", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sim", help="run a network and write the output trace")
    s.add_argument("--network", required=True)
    s.add_argument("--input")
    s.add_argument("--ticks", type=int)
    s.add_argument("--config", help="simulation config JSON (ticks, fidelity, output_core, debug_rows)")
    s.add_argument("--fidelity", choices=["functional", "cycle"])
    s.add_argument("--engine", choices=["auto", "fast", "reference"], default="auto")
    s.add_argument("--output-core", type=_coords, metavar="X,Y")
    s.add_argument("--cycle-budget", type=int, help="controller cycles available per tick")
    s.add_argument("--out", required=True)
    s.add_argument("--errors")
    s.add_argument("--debug-rows", nargs="?", const="", default=None, metavar="FILE")
    s.set_defaults(func=cmd_sim)

    m = sub.add_parser("map", help="compile a workload onto cores")
    msub = m.add_subparsers(dest="workload", required=True)
    v = msub.add_parser("vmm")
    v.add_argument("--matrix", required=True)
    v.add_argument("--vector", required=True)
    v.add_argument("--mode", choices=["auto", "positive", "tn-feedback", "symmetric"], default="auto")
    v.add_argument("--bits", type=int, default=8)
    v.add_argument("--core", type=_pair, default=(256, 256), metavar="AxN")
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_map_vmm)
    c = msub.add_parser("conv")
    c.add_argument("--image", type=_pair, required=True, metavar="WxH")
    c.add_argument("--channels", type=int, default=1)
    c.add_argument("--kernel", type=int, required=True)
    c.add_argument("--stride", type=int, default=1)
    c.add_argument("--features", type=int, default=1)
    c.add_argument("--core", type=_pair, required=True, metavar="AxN")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_map_conv)

    r = sub.add_parser("report", help="decode a VMM run or summarize a convolution plan")
    r.add_argument("--plan", required=True)
    r.add_argument("--trace")
    r.set_defaults(func=cmd_report)

    f = sub.add_parser("perf", help="controller timing estimates")
    f.add_argument("--core", type=_pair, required=True, metavar="AxN")
    f.add_argument("--freq", required=True, help="core clock in Hz")
    f.add_argument("--parallel", type=int, default=1)
    f.add_argument("--ticks-per-item", type=int, default=1)
    f.set_defaults(func=cmd_perf)

    k = sub.add_parser("compare", help="compare two traces")
    k.add_argument("a")
    k.add_argument("b")
    k.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "debug_rows", None) == "":
        args.debug_rows = str(args.out) + ".debug.jsonl"
    try:
        return args.func(args)
    except (ConfigurationError, DecodeError, json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpikemeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
