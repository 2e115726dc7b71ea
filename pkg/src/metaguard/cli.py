"""Command line entry point: enforce, verify, verify-1ph, graph and bench.

Exit codes: 0 clean, 1 runtime failure, 2 usage or parse error, 3 definite
violation or halt, 4 possible violations only, 5 partial result or budget hit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .core_lang import ParseError, parse
from .explorer import IncompleteGraph, verify, verify_1ph
from .machine import abstract, concrete, run
from .machine.config import DEFAULT_NODE_CEILING, DEFAULT_STEP_BUDGET, MachineConfig
from .policies import LinkError, PolicyError, link, load_policy

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3
EXIT_POSSIBLE = 4
EXIT_PARTIAL = 5

ENV_NODE_CEILING = "METAGUARD_NODE_CEILING"
ENV_STEP_BUDGET = "METAGUARD_STEP_BUDGET"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if not raw:
        return default
    try:
        return int(raw.replace("_", ""))
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def _read_program(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text, path)


def _read_policy(path: str):
    if not Path(path).is_file():
        raise UsageError(f"cannot read policy {path}")
    return load_policy(path)


def _inputs(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--input expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _abstract_cfg(args, precision: str) -> MachineConfig:
    ceiling = args.node_ceiling if args.node_ceiling is not None else _env_int(ENV_NODE_CEILING, DEFAULT_NODE_CEILING)
    kw = {"node_ceiling": ceiling}
    if getattr(args, "kont_depth", None) is not None:
        kw["kont_depth"] = args.kont_depth
    return abstract(precision, **kw)


def _write_graph(g, fmt: str, out: str):
    text = g.to_dot() if fmt == "dot" else g.to_json()
    Path(out).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")


def cmd_enforce(args) -> int:
    from .rasp import enforce

    prog = _read_program(args.program)
    pol = _read_policy(args.policy)
    budget = args.step_budget if args.step_budget is not None else _env_int(ENV_STEP_BUDGET, DEFAULT_STEP_BUDGET)
    out = enforce(prog, pol.meta, policy_id=pol.id, step_budget=budget, meta_file=pol.file,
                  **_inputs(args.input))
    if args.format == "json":
        print(_dump(out.to_json()))
    elif out.kind == "halted":
        print(f"{out.halt_span}: halted by {pol.id} ({out.halt_trap})")
    elif out.kind == "completed":
        print(f"completed in {out.steps} steps")
    else:
        print(f"{out.kind}: {out.message}")
    return {"completed": EXIT_OK, "halted": EXIT_VIOLATION, "partial": EXIT_PARTIAL}.get(out.kind, EXIT_FAILURE)


def _report(res, args, approach: str) -> int:
    if args.format == "json":
        print(_dump([r.to_json() for r in res]))
    else:
        for r in res:
            print(f"{r.span}: {r.severity} violation of {r.policy_id} ({r.trap})")
        note = "" if res.complete else " (partial graph)"
        print(f"{approach}: {len(res)} report(s), {res.states} states{note}")
    if res.errors:
        for n in sorted(res.errors):
            for msg in res.errors[n]:
                print(f"warning: node {n}: {msg}", file=sys.stderr)
    if args.graph:
        _write_graph(res.graph, args.graph, args.graph_out or f"{Path(args.program).stem}.flow.{args.graph}")
    if any(r.severity == "definite" for r in res):
        return EXIT_VIOLATION
    if not res.complete:
        return EXIT_PARTIAL
    return EXIT_POSSIBLE if len(res) else EXIT_OK


def cmd_verify(args) -> int:
    if args.p2 != "H":
        raise UsageError("phase 2 always runs at high precision; --p2 accepts only H")
    prog = _read_program(args.program)
    pol = _read_policy(args.policy)
    try:
        res = verify(prog, pol.meta, _abstract_cfg(args, args.p1), policy_id=pol.id,
                     allow_partial=args.allow_partial, meta_file=pol.file)
    except IncompleteGraph as exc:
        print(f"partial: {exc} (rerun with --allow-partial for non-exhaustive reports)", file=sys.stderr)
        return EXIT_PARTIAL
    return _report(res, args, "2PH")


def cmd_verify_1ph(args) -> int:
    prog = _read_program(args.program)
    pol = _read_policy(args.policy)
    try:
        res = verify_1ph(prog, pol.meta, _abstract_cfg(args, args.p1), policy_id=pol.id,
                         allow_partial=args.allow_partial, meta_file=pol.file)
    except IncompleteGraph as exc:
        print(f"partial: {exc} (rerun with --allow-partial for non-exhaustive reports)", file=sys.stderr)
        return EXIT_PARTIAL
    return _report(res, args, "1PH")


def cmd_graph(args) -> int:
    prog = _read_program(args.program)
    if args.policy:
        pol = _read_policy(args.policy)
        prog = link(prog, pol.meta, pol.file)
    if args.concrete:
        budget = args.step_budget if args.step_budget is not None else _env_int(ENV_STEP_BUDGET, DEFAULT_STEP_BUDGET)
        cfg = concrete(budget)
    else:
        cfg = _abstract_cfg(args, args.p1)
    g = run(prog, cfg)
    text = g.to_dot() if args.format == "dot" else g.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK if g.complete else EXIT_PARTIAL


def cmd_bench(args) -> int:
    from .bench import SUITES, load_suite, run_suite, write_metrics

    suites = SUITES if args.suite == "all" else (args.suite,)
    cases = [c for s in suites for c in load_suite(s)]
    if args.case:
        wanted = set(args.case)
        cases = [c for c in cases if c.name in wanted or c.key in wanted]
        if not cases:
            raise UsageError(f"no cases match {sorted(wanted)}")

    def progress(m):
        if not args.quiet:
            cells = m.cells()
            print(f"{cells[0]:<28} {m.config:<7} {m.status:<8} tp={cells[4]} fp={cells[5]} "
                  f"fn={cells[6]} states={cells[7]} t={cells[8]}", file=sys.stderr)

    rows = run_suite(cases, timeout=args.timeout, workers=args.workers, node_ceiling=args.node_ceiling,
                     progress=progress)
    paths = write_metrics(rows, args.out)
    for p in paths.values():
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="metaguard", description="Enforce and statically verify execution-monitor policies.")
    p.add_argument("--version", action="version", version=f"metaguard {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, policy_required=True):
        sp.add_argument("program", help="program file (.js0)")
        sp.add_argument("--policy", required=policy_required, help="policy file (.pol builder or .js0 META)")
        sp.add_argument("--format", choices=("json", "human"), default="json")

    def analysis(sp):
        sp.add_argument("--p1", choices=("H", "L"), required=True, help="phase-1 precision")
        sp.add_argument("--node-ceiling", type=int, help=f"state ceiling (env {ENV_NODE_CEILING})")
        sp.add_argument("--kont-depth", type=int, help="call-string depth of stack addresses")
        sp.add_argument("--allow-partial", action="store_true", help="report on a graph cut by the ceiling")
        sp.add_argument("--graph", choices=("dot", "json"), help="also export the phase-1 flow graph")
        sp.add_argument("--graph-out", help="graph output path (default <program>.flow.<fmt>)")

    e = sub.add_parser("enforce", help="run a program under the execution monitor")
    common(e)
    e.add_argument("--step-budget", type=int, help=f"step budget (env {ENV_STEP_BUDGET})")
    e.add_argument("--input", action="append", metavar="KEY=VALUE",
                   help="host input, e.g. element:pass=secret or prompt=yes")
    e.set_defaults(func=cmd_enforce)

    v = sub.add_parser("verify", help="two-phase static verification")
    common(v)
    analysis(v)
    v.add_argument("--p2", default="H", help="phase-2 precision (only H)")
    v.set_defaults(func=cmd_verify)

    v1 = sub.add_parser("verify-1ph", help="single-phase analysis of the instrumented program")
    common(v1)
    analysis(v1)
    v1.set_defaults(func=cmd_verify_1ph)

    g = sub.add_parser("graph", help="export a flow graph")
    g.add_argument("program")
    g.add_argument("--policy", help="link this policy's META first")
    g.add_argument("--p1", choices=("H", "L"), default="H")
    g.add_argument("--concrete", action="store_true", help="concrete run instead of abstract")
    g.add_argument("--format", choices=("dot", "json"), default="dot")
    g.add_argument("--out")
    g.add_argument("--node-ceiling", type=int)
    g.add_argument("--kont-depth", type=int)
    g.add_argument("--step-budget", type=int)
    g.set_defaults(func=cmd_graph)

    b = sub.add_parser("bench", help="benchmark harness")
    bsub = b.add_subparsers(dest="bench_command", parser_class=_Parser)
    bsub.required = True
    br = bsub.add_parser("run", help="run the approach x precision matrix")
    br.add_argument("--out", required=True, help="output directory")
    br.add_argument("--suite", choices=("analogues", "ac", "ifc", "all"), default="analogues")
    br.add_argument("--case", action="append", help="restrict to named cases")
    br.add_argument("--timeout", type=float, default=430.0, help="seconds per run")
    br.add_argument("--workers", type=int, help="parallel runs (default: CPU count)")
    br.add_argument("--node-ceiling", type=int)
    br.add_argument("--quiet", action="store_true")
    br.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, PolicyError, LinkError, ValueError) as exc:
        print(f"metaguard: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
