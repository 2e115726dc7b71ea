"""Concrete enforcement: run the instrumented program with META linked."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..core_lang.syntax import Program, SourceSpan
from ..machine import concrete, run
from ..machine.config import DEFAULT_STEP_BUDGET
from ..machine.semantics import MachineError
from ..machine.state import ErrorState, Halt
from ..machine.values import summarize
from ..policies.link import link
from .instrument import em_trap, instrument


@dataclass
class EnforcementOutcome:
    kind: str                        # completed | halted | error | partial
    halt_span: Optional[SourceSpan] = None
    halt_trap: Optional[str] = None
    steps: int = 0
    value: list = field(default_factory=list)
    effects: list = field(default_factory=list)
    message: Optional[str] = None
    policy_id: str = ""

    def to_json(self) -> dict:
        d = {"outcome": self.kind, "policy_id": self.policy_id, "steps": self.steps}
        if self.kind == "halted":
            d["span"] = self.halt_span.to_json()
            d["trap"] = self.halt_trap
        elif self.kind == "completed":
            d["value"] = self.value
        if self.message:
            d["message"] = self.message
        return d


def enforce(p: Program, meta: str, *, policy_id: str = "", step_budget: int = DEFAULT_STEP_BUDGET,
            meta_file: str = "<policy>", **inputs) -> EnforcementOutcome:
    """Run ``p`` under the execution monitor with ``meta`` as the policy."""
    ip = instrument(link(p, meta, meta_file))
    cfg = concrete(step_budget, **inputs)
    try:
        g = run(ip, cfg)
    except (MachineError, RecursionError) as exc:
        return EnforcementOutcome("error", message=f"machine failure: {exc}", policy_id=policy_id)
    effects = list(getattr(g, "effects", []))
    for i in sorted(g.terminals()):
        st = g.nodes[i]
        if type(st) is Halt:
            site = st.site
            return EnforcementOutcome("halted", ip.label_table[site.label], em_trap(site),
                                      steps=len(g), effects=effects, policy_id=policy_id)
        if type(st) is ErrorState:
            where = "policy code" if st.node is not None and st.node.meta else "base program"
            return EnforcementOutcome("error", steps=len(g), effects=effects, policy_id=policy_id,
                                      message=f"{where}: {st.message}")
    if not g.complete:
        return EnforcementOutcome("partial", steps=len(g), effects=effects, policy_id=policy_id,
                                  message="step budget exhausted")
    return EnforcementOutcome("completed", steps=len(g), value=summarize(g.result_values()),
                              effects=effects, policy_id=policy_id)
