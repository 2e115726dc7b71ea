"""Driving the machine to a flow graph."""
from __future__ import annotations

from typing import TYPE_CHECKING, Union

from ..core_lang.syntax import Node, Program
from .config import MachineConfig
from .semantics import Machine

if TYPE_CHECKING:
    from ..flowgraph import FlowGraph


def run(prog: Union[Program, Node], cfg: MachineConfig, machine: Machine = None) -> "FlowGraph":
    """Explore every state reachable from the injection of ``prog``.

    Concrete runs stop after ``step_budget`` transitions and abstract runs
    after ``node_ceiling`` states; either way the graph is then marked
    incomplete.
    """
    # flowgraph imports the machine's state types
    from ..flowgraph import explore_states

    body = prog.body if isinstance(prog, Program) else prog
    m = machine or Machine(cfg)
    root = m.inject(body)
    if cfg.concrete:
        b, complete = explore_states(m.step, root, cfg.step_budget, count_steps=True,
                                      woken=m.take_woken)
    else:
        b, complete = explore_states(m.step, root, cfg.node_ceiling, woken=m.take_woken)
    g = b.build(complete, prog if isinstance(prog, Program) else None, cfg)
    g.effects = list(m.effects)
    return g
