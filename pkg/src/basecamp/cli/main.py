"""The basecamp command: one entry point over all the tools.

Subcommands mirror the toolkit's compile / deploy / execute split:
kernel compilation (compile), coordination graphs (graph), system
planning (plan), cluster simulation (simulate), knob tuning (tune),
anomaly detection (detect), and end-to-end dataflow runs (run).

Exit codes: 0 success, 1 tool diagnostic, 2 usage error.  Diagnostics
go to stderr; data goes to stdout or the requested output file, and a
rerun with the same inputs and seeds writes identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from ..errors import BasecampError
from ..numerics import F64, parse_format


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- compile

def cmd_compile(args) -> int:
    from ..ekl import analyze, parse_kernel
    from ..olympus import KernelConfig
    from ..olympus.hlsgen import emit_hls_c
    from ..tensorir import lower

    src = Path(args.kernel).read_text()
    fmt = parse_format(args.format) if args.format else F64
    name = Path(args.kernel).stem
    ir = lower(analyze(parse_kernel(src), default_format=fmt), name=name)
    if args.emit == "ir":
        _write(_json_text(ir.to_json()), args.out)
    else:
        esize = -(-fmt.bit_width // 8)
        cfg = KernelConfig(
            node_id=name, replication=args.replication,
            packing=args.packing, double_buffered=args.double_buffer,
            tile_elements=args.tile,
            buffer_bytes=args.tile * esize * (2 if args.double_buffer else 1))
        _write(emit_hls_c(ir, cfg), args.out)
    return 0


# ------------------------------------------------------------------ graph

def cmd_graph(args) -> int:
    from ..coord import build_dfg, parse_coord

    fn = parse_coord(Path(args.program).read_text())
    g = build_dfg(fn)
    _write(g.to_json_text(), args.out)
    return 0


# ------------------------------------------------------------------- plan

def _kernel_sources_for(g, kernels_dir: str | None,
                        anchor: Path) -> dict[str, str]:
    sources: dict[str, str] = {}
    for n in g.nodes:
        attr = getattr(n, "attr", None)
        if attr is None or not attr.path.endswith(".ekl"):
            continue
        for base in ([Path(kernels_dir)] if kernels_dir else []) + [anchor]:
            cand = base / attr.path
            if cand.exists():
                sources[attr.path] = cand.read_text()
                break
    return sources


def cmd_plan(args) -> int:
    from ..coord import dfg_from_json
    from ..olympus import PlatformSpec, node_costs, plan

    g = dfg_from_json(json.loads(Path(args.dfg).read_text()))
    platform = PlatformSpec.load(args.platform)
    fmt = parse_format(args.format) if args.format else F64
    sources = _kernel_sources_for(
        g, args.kernels_dir, Path(args.dfg).parent)
    costs = node_costs(g, sources or None, fmt)
    result = plan(g, costs, platform, objective=args.objective,
                  formats={nid: fmt for nid in costs})
    _write(result.to_json_text(), args.out)
    return 0


# --------------------------------------------------------------- simulate

def _load_task_graph(path: str, plan_path: str | None):
    from ..runtime import TaskGraph

    g = TaskGraph.from_json(json.loads(Path(path).read_text()))
    if plan_path is None:
        return g
    # an architecture plan can supply fpga durations for tasks that
    # reference its kernels by id through knobs["kernel"]
    plan_doc = json.loads(Path(plan_path).read_text())
    makespans = {str(k["node"]): float(k["makespan"])
                 for k in plan_doc.get("kernels", ())}
    patched = []
    for t in g.tasks:
        kid = t.knobs.get("kernel") if t.knobs else None
        if kid is not None and "fpga" not in t.durations:
            key = str(kid)
            if key in makespans:
                durations = dict(t.durations)
                durations["fpga"] = float(makespans[key])
                t = dataclasses.replace(t, durations=durations)
        patched.append(t)
    return TaskGraph(tuple(patched))


def cmd_simulate(args) -> int:
    from ..runtime import ClusterSpec, schedule, simulate

    cluster = ClusterSpec.load(args.cluster)
    g = _load_task_graph(args.tasks, args.plan)
    sched = schedule(g, ClusterSpec(cluster.nodes))
    trace = simulate(g, cluster, sched, seed=args.seed)
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl())
    summary = {
        "makespan": trace.makespan_us,
        "planned_makespan": sched.makespan_us,
        "events": len(trace.events),
        "reschedules": len(trace.of_kind("reschedule")),
    }
    sys.stdout.write(_json_text(summary))
    return 0


# ------------------------------------------------------------------- tune

def cmd_tune(args) -> int:
    from ..runtime import (ClusterSpec, TaskSpec, TaskGraph, schedule,
                           simulate, tune, query_resources)

    cluster = ClusterSpec.load(args.cluster)
    g = _load_task_graph(args.tasks, args.plan)
    dual = [t.id for t in g.tasks
            if "cpu" in t.durations and "fpga" in t.durations]
    if not dual:
        sys.stderr.write("tune: no task offers both cpu and fpga "
                         "variants; nothing to choose\n")
        return 1

    def with_variant(variant: str) -> TaskGraph:
        tasks = []
        for t in g.tasks:
            if t.id in dual:
                req = ("fpga-vf",) if variant == "fpga" else ("cpu-cores", 1)
                t = dataclasses.replace(t, request=req)
            tasks.append(t)
        return TaskGraph(tuple(tasks))

    def evaluate(cfg: dict) -> float:
        gv = with_variant(cfg["variant"])
        sched = schedule(gv, ClusterSpec(cluster.nodes))
        return simulate(gv, cluster, sched, seed=args.seed).makespan_us

    state = tune({"variant": ("cpu", "fpga")}, evaluate,
                 env=query_resources(cluster), rounds=args.rounds,
                 seed=args.seed, epsilon=args.epsilon)
    best = dict(state.best())
    out = {"chosen": best, "state": state.to_json()}
    sys.stdout.write(_json_text(out))
    return 0


# ----------------------------------------------------------------- detect

def _read_series(path: str) -> list[float]:
    p = Path(path)
    text = p.read_text()
    if p.suffix == ".json":
        return [float(x) for x in json.loads(text)]
    values = []
    for i, line in enumerate(text.splitlines()):
        cell = line.split(",")[0].strip()
        if not cell:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            if i == 0:
                continue  # header
            raise BasecampError(
                f"{path}:{i + 1}: not a number: {cell!r}")
    return values


def _read_labels(path: str) -> list[int]:
    out = []
    for line in Path(path).read_text().splitlines():
        for cell in line.split(","):
            cell = cell.strip()
            if cell:
                out.append(int(cell))
    return out


def cmd_detect(args) -> int:
    from ..sentinel import AnomalyReport, detect, select_model, serve

    if args.serve:
        return serve()
    if not args.data:
        raise BasecampError("detect: --data is required unless --serve")
    series = _read_series(args.data)
    labels = _read_labels(args.labels) if args.labels else None
    res = select_model(series, labels, args.budget_trials, seed=args.seed)
    if res.warning:
        sys.stderr.write(f"warning: {res.warning}\n")
    hits = detect(res.model, series)
    report = AnomalyReport(hits.anomalies, res.model.to_json(), res.score)
    _write(report.to_json_text(), args.out)
    return 0


# -------------------------------------------------------------------- run

def _payload_from_json(doc):
    from ..tensorir import DenseTensor

    if isinstance(doc, dict) and set(doc) >= {"shape", "values"}:
        return DenseTensor(tuple(int(s) for s in doc["shape"]),
                           [float(v) for v in doc["values"]])
    return doc


def _payload_to_json(v):
    from ..tensorir import DenseTensor

    if isinstance(v, DenseTensor):
        return {"shape": list(v.shape), "values": list(v.data)}
    if isinstance(v, tuple):
        return [_payload_to_json(x) for x in v]
    return v


def cmd_run(args) -> int:
    from ..coord import build_dfg, execute_dfg, parse_coord

    fn = parse_coord(Path(args.program).read_text())
    g = build_dfg(fn)
    inputs_dir = Path(args.inputs)
    inputs = {}
    for name, _type in g.inputs:
        f = inputs_dir / f"{name}.json"
        if not f.exists():
            raise BasecampError(
                f"run: no payload for input '{name}' "
                f"(expected {f})")
        inputs[name] = _payload_from_json(json.loads(f.read_text()))
    sources = _kernel_sources_for(
        g, str(inputs_dir), Path(args.program).parent)
    result = execute_dfg(g, {}, inputs, schedule_seed=args.seed,
                         kernel_sources=sources or None)
    sys.stdout.write(_json_text(_payload_to_json(result)))
    return 0


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="basecamp",
        description="einsum kernel compiler, dataflow coordinator, "
                    "system planner, cluster simulator, and anomaly "
                    "detector behind one command")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("compile", help="compile an .ekl kernel")
    p.add_argument("kernel", help="kernel source file (.ekl)")
    p.add_argument("--emit", choices=("ir", "c"), default="ir",
                   help="ir: typed IR as JSON; c: HLS-style C")
    p.add_argument("--format", default=None,
                   help="numeric format for f64 tensors, e.g. fixed:8:8")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--replication", type=int, default=1,
                   help="replica count stamped into emitted C")
    p.add_argument("--packing", type=int, default=1,
                   help="lane packing stamped into emitted C")
    p.add_argument("--double-buffer", action="store_true",
                   help="double buffering stamped into emitted C")
    p.add_argument("--tile", type=int, default=1024,
                   help="tile elements stamped into emitted C")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("graph", help="build the dataflow graph of a "
                                     "coordination program")
    p.add_argument("program", help="coordination source file (.cdr)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(fn=cmd_graph)

    p = sub.add_parser("plan", help="plan kernel configs for a platform")
    p.add_argument("--dfg", required=True, help="dataflow graph JSON")
    p.add_argument("--platform", required=True, help="platform JSON")
    p.add_argument("--objective", choices=("latency", "throughput"),
                   default="latency")
    p.add_argument("--format", default=None,
                   help="numeric format for kernel costing")
    p.add_argument("--kernels-dir", default=None,
                   help="directory holding .ekl sources named by node paths")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("simulate", help="schedule and simulate a task graph")
    p.add_argument("--plan", default=None,
                   help="architecture plan JSON; fills fpga durations for "
                        "tasks whose knobs name a planned kernel")
    p.add_argument("--cluster", required=True, help="cluster JSON")
    p.add_argument("--tasks", required=True, help="task graph JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="write JSONL trace here")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("tune", help="pick task variants by repeated "
                                    "simulation")
    p.add_argument("--plan", default=None)
    p.add_argument("--cluster", required=True, help="cluster JSON")
    p.add_argument("--tasks", required=True, help="task graph JSON")
    p.add_argument("--rounds", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(fn=cmd_tune)

    p = sub.add_parser("detect", help="select a detector and report "
                                      "anomalies")
    p.add_argument("--data", default=None,
                   help="series as one-column CSV or JSON array")
    p.add_argument("--labels", default=None, help="CSV of anomalous indexes")
    p.add_argument("--budget-trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--serve", action="store_true",
                   help="line-JSON select/detect/refit service on stdio")
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("run", help="execute a coordination program "
                                   "end to end")
    p.add_argument("program", help="coordination source file (.cdr)")
    p.add_argument("--inputs", required=True,
                   help="directory of <input>.json payloads")
    p.add_argument("--seed", type=int, default=0,
                   help="schedule interleaving seed")
    p.set_defaults(fn=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BasecampError as e:
        sys.stderr.write(f"basecamp {args.cmd}: {e}\n")
        return 1
    except OSError as e:
        sys.stderr.write(f"basecamp {args.cmd}: {e}\n")
        return 1
    except json.JSONDecodeError as e:
        sys.stderr.write(f"basecamp {args.cmd}: bad JSON input: {e}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
