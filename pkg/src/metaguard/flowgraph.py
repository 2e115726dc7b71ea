"""Flow graphs: deduplicated machine states connected by transitions."""
from __future__ import annotations

import json
from collections import deque
from .machine.state import ErrorState, Ev, Halt, Ko, State
from .machine.values import BOTTOM, summarize


class InvalidNode(KeyError):
    pass


def node_summary(st) -> dict:
    """JSON-ready description of one state."""
    if isinstance(st, dict):
        return st
    if type(st) is Ev:
        return {"kind": "ev", "expr": type(st.e).__name__, "label": st.e.label,
                "span": st.e.span.to_json(), "meta": st.e.meta, "depth": len(st.iota)}
    if type(st) is Ko:
        return {"kind": "ko", "value": summarize(st.value), "depth": len(st.iota),
                "terminal": st.terminal}
    if type(st) is Halt:
        return {"kind": "halt", "label": st.site.label if st.site is not None else None}
    if type(st) is ErrorState:
        return {"kind": "error", "message": st.message,
                "label": st.node.label if st.node is not None else None}
    raise TypeError(f"not a state: {st!r}")


def is_terminal(st) -> bool:
    if isinstance(st, dict):
        return st["kind"] in ("halt", "error") or (st["kind"] == "ko" and st.get("terminal", False))
    return bool(st.terminal)


class FlowGraph:
    """Immutable once built: nodes are states indexed densely from the root."""

    def __init__(self, nodes: list, edges: list[tuple[int, int]], root: int = 0,
                 complete: bool = True, program=None, config=None):
        self._nodes = tuple(nodes)
        self._edges = tuple(edges)
        self.root = root
        self.complete = complete
        self.program = program
        self.config = config
        succ: list[list[int]] = [[] for _ in self._nodes]
        pred: list[list[int]] = [[] for _ in self._nodes]
        for a, b in self._edges:
            succ[a].append(b)
            pred[b].append(a)
        self._succ = tuple(tuple(x) for x in succ)
        self._pred = tuple(tuple(x) for x in pred)

    # -- queries ------------------------------------------------------------

    def __len__(self):
        return len(self._nodes)

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def edges(self) -> tuple:
        return self._edges

    def node(self, n: int):
        self._check(n)
        return self._nodes[n]

    def _check(self, n):
        if not isinstance(n, int) or not 0 <= n < len(self._nodes):
            raise InvalidNode(f"invalid node id {n!r}")

    def successors(self, n: int) -> frozenset:
        self._check(n)
        return frozenset(self._succ[n])

    def successor_list(self, n: int) -> tuple:
        return self._succ[n]

    def predecessors(self, n: int) -> tuple:
        self._check(n)
        return self._pred[n]

    def terminals(self) -> frozenset:
        return frozenset(i for i, st in enumerate(self._nodes) if is_terminal(st))

    def result_values(self) -> frozenset:
        out = BOTTOM
        for i in sorted(self.terminals()):
            st = self._nodes[i]
            if type(st) is Ko:
                out = out | st.value
        return out

    def halts(self) -> list[int]:
        return [i for i, st in enumerate(self._nodes) if type(st) is Halt]

    def errors(self) -> list[int]:
        return [i for i, st in enumerate(self._nodes) if type(st) is ErrorState]

    # -- serialization --------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "root": self.root,
            "complete": self.complete,
            "nodes": [dict(id=i, **node_summary(st)) for i, st in enumerate(self._nodes)],
            "edges": [list(e) for e in self._edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FlowGraph":
        d = json.loads(text)
        nodes = []
        for i, n in enumerate(d["nodes"]):
            if n.get("id", i) != i:
                raise ValueError("node ids must be dense and ordered")
            n = dict(n)
            n.pop("id", None)
            nodes.append(n)
        return cls(nodes, [tuple(e) for e in d["edges"]], d["root"], d["complete"])

    def __eq__(self, other):
        if not isinstance(other, FlowGraph):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None

    def to_dot(self, name: str = "flowgraph") -> str:
        lines = [f"digraph {name} {{", "  node [fontname=monospace];"]
        for i, st in enumerate(self._nodes):
            s = node_summary(st)
            if s["kind"] == "ev":
                sp = s["span"]
                text = f"Ev {s['expr']} {sp['start_line']}:{sp['start_col']}"
                shape = "box"
            elif s["kind"] == "ko":
                text = "Ko " + " ".join(s["value"]) if s["value"] else "Ko _|_"
                shape = "ellipse"
            elif s["kind"] == "halt":
                text = f"HALT @{s['label']}"
                shape = "octagon"
            else:
                text = f"ERROR {s['message']}"
                shape = "octagon"
            style = ', style=filled, fillcolor="#fff3a0"' if is_terminal(st) else ""
            lines.append(f'  n{i} [label="{_esc(text)}", shape={shape}{style}];')
        for a, b in self._edges:
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


class GraphBuilder:
    """Incremental construction with structural state deduplication."""

    def __init__(self):
        self.nodes: list[State] = []
        self.index: dict[State, int] = {}
        self.edges: list[tuple[int, int]] = []

    def add(self, st: State) -> tuple[int, bool]:
        i = self.index.get(st)
        if i is not None:
            return i, False
        i = len(self.nodes)
        self.nodes.append(st)
        self.index[st] = i
        return i, True

    def edge(self, a: int, b: int):
        self.edges.append((a, b))

    def build(self, complete: bool, program=None, config=None) -> FlowGraph:
        return FlowGraph(self.nodes, sorted(set(self.edges)), 0, complete, program, config)


def explore_states(step, root, limit: int, count_steps: bool = False, woken=None):
    """Breadth-first closure of ``step`` from ``root`` (a state or a list).

    ``woken`` returns already-explored states that must be stepped again
    (their successors grew, e.g. a new return point was recorded).  Stops
    after ``limit`` nodes (or transitions when ``count_steps``).  Returns
    the builder and whether the closure is complete.
    """
    b = GraphBuilder()
    for r in (root if isinstance(root, list) else [root]):
        b.add(r)
    frontier = deque(range(len(b.nodes)))
    steps = 0
    while frontier:
        i = frontier.popleft()
        succs = step(b.nodes[i])
        steps += 1
        for s in succs:
            j, new = b.add(s)
            b.edge(i, j)
            if new:
                frontier.append(j)
        if woken is not None:
            for w in woken():
                frontier.append(b.index[w])
        if (steps if count_steps else len(b.nodes)) >= limit and frontier:
            return b, False
    return b, True
