"""Violation reports for the two-phase analysis and its single-phase baseline."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..core_lang.syntax import If, Program, SourceSpan, Var, walk
from ..flowgraph import FlowGraph
from ..machine import MachineConfig, phase2, run
from ..machine.semantics import Machine
from ..machine.state import Ev, Halt, Ko
from ..machine.values import FALSE, truthiness
from ..policies.link import link
from ..rasp.instrument import EM_FILE, em_trap, instrument
from ..rasp.traps import is_decision
from .explore import Exploration, explore
from .handle import frame_node


class IncompleteGraph(RuntimeError):
    """The phase-1 graph hit its budget; results would not be exhaustive."""


@dataclass(frozen=True)
class ViolationReport:
    span: SourceSpan
    trap: str
    node: int
    policy_id: str = ""
    severity: str = "possible"      # definite | possible

    def sort_key(self):
        s = self.span
        return (s.file, s.start_line, s.start_col, s.end_line, s.end_col, self.node)

    def to_json(self) -> dict:
        return {"span": self.span.to_json(), "trap": self.trap, "severity": self.severity,
                "policy_id": self.policy_id, "node": self.node}


class Verification(list):
    """Reports (the list itself) plus what produced them."""

    def __init__(self, reports=(), *, graph: Optional[FlowGraph] = None, complete: bool = True,
                 exploration: Optional[Exploration] = None, errors=None, seconds: float = 0.0):
        super().__init__(reports)
        self.graph = graph
        self.complete = complete
        self.exploration = exploration
        self.errors = errors or {}
        self.seconds = seconds

    @property
    def states(self) -> int:
        """Phase-1 graph states plus, for the two-phase analysis, trap states."""
        n = len(self.graph) if self.graph is not None else 0
        if self.exploration is not None:
            n += self.exploration.trap_states
        return n

    def spans(self) -> set:
        return {r.span for r in self}


def node_span(g: FlowGraph, n: int) -> Optional[SourceSpan]:
    st = g.nodes[n]
    node = None
    if type(st) is Ev:
        node = st.e
    elif type(st) is Ko and st.iota:
        node = frame_node(st.iota[-1])
    if node is None:
        return None
    table = g.program.label_table if g.program is not None else {}
    return table.get(node.label, node.span)


def violations(g: FlowGraph, ex: Exploration, policy_id: str = "") -> list[ViolationReport]:
    """Nodes whose decision trap may return a falsy verdict (the EM halts on it)."""
    out = []
    for n in sorted(ex.results):
        r = ex.results[n]
        if r.trap is None or not is_decision(r.trap):
            continue
        tv = truthiness(r.value)
        if FALSE not in tv:
            continue
        sev = "definite" if tv == frozenset([FALSE]) else "possible"
        out.append(ViolationReport(node_span(g, n), r.trap, n, policy_id, sev))
    out.sort(key=ViolationReport.sort_key)
    return out


def verify(p: Program, meta: str, cfg1: MachineConfig, cfg2: Optional[MachineConfig] = None, *,
           policy_id: str = "", allow_partial: bool = False, order_seed: Optional[int] = None,
           meta_file: str = "<policy>") -> Verification:
    """Two-phase analysis: analyze ``p`` with META linked, then run the traps."""
    if cfg1.concrete:
        raise ValueError("phase 1 needs an abstract configuration")
    t0 = time.perf_counter()
    g = run(link(p, meta, meta_file), cfg1)
    if not g.complete and not allow_partial:
        raise IncompleteGraph(f"phase 1 stopped at {len(g)} states")
    ex = explore(g, cfg2 or phase2(), order_seed=order_seed)
    reports = violations(g, ex, policy_id)
    return Verification(reports, graph=g, complete=g.complete, exploration=ex, errors=ex.errors,
                        seconds=time.perf_counter() - t0)


def _decision_ifs(ip: Program) -> set:
    """Labels of the EM's ``if (ok)`` verdict tests."""
    out = set()
    for n in walk(ip.body):
        if type(n) is If and type(n.test) is Var and n.test.name == "ok" and n.span.file == EM_FILE:
            out.add(n.label)
    return out


def verify_1ph(p: Program, meta: str, cfg: MachineConfig, *, policy_id: str = "",
               allow_partial: bool = False, meta_file: str = "<policy>") -> Verification:
    """Single-phase baseline: analyze the instrumented program directly.

    A violation is a reachable halt of the inlined monitor; it is definite
    when the monitor's verdict at that site can only be a halt.
    """
    if cfg.concrete:
        raise ValueError("the single-phase analysis needs an abstract configuration")
    t0 = time.perf_counter()
    ip = instrument(link(p, meta, meta_file))
    m = Machine(cfg)
    g = run(ip, cfg, m)
    if not g.complete and not allow_partial:
        raise IncompleteGraph(f"analysis stopped at {len(g)} states")
    ifs = _decision_ifs(ip)
    verdicts: dict[int, frozenset] = {}
    for st in g.nodes:
        if type(st) is Ev and st.e.label in ifs and st.kont.e is not None:
            tv = truthiness(m.eval_simple(st.e.test, st.env, st.store, st.kont))
            lbl = st.kont.e.label
            verdicts[lbl] = verdicts.get(lbl, frozenset()) | tv
    seen = {}
    for n in g.halts():
        site = g.nodes[n].site
        if site is None or site.label in seen:
            continue
        sev = "definite" if verdicts.get(site.label) == frozenset([FALSE]) else "possible"
        seen[site.label] = ViolationReport(ip.label_table[site.label], em_trap(site) or "halt", n,
                                           policy_id, sev)
    reports = sorted(seen.values(), key=ViolationReport.sort_key)
    return Verification(reports, graph=g, complete=g.complete, seconds=time.perf_counter() - t0)
