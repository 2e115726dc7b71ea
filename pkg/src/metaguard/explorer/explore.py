"""Fixed point of trap handling over a phase-1 flow graph."""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..flowgraph import FlowGraph
from ..machine import MachineConfig, phase2
from ..machine.semantics import Machine
from ..machine.store import Store, join_stores, store_leq
from ..machine.values import BOTTOM, join as vjoin, leq
from .handle import EMPTY_META, Handler

# per-node guard on the number of growing joins
JOIN_LIMIT = 10_000


class ExplorerError(RuntimeError):
    pass


@dataclass
class NodeResult:
    value: frozenset
    meta: Store
    trap: Optional[str] = None
    intercepted: bool = False


@dataclass
class Exploration:
    graph: FlowGraph
    results: dict                       # node id -> NodeResult
    errors: dict = field(default_factory=dict)   # node id -> [message]
    handled: int = 0                    # handle() invocations
    trap_states: int = 0                # phase-2 states over all trap runs
    chains: Optional[dict] = None       # node id -> accumulated pairs, when traced

    def __getitem__(self, n):
        return self.results[n]


def _join_meta(a: Store, b: Store, thr) -> Store:
    if a is b:
        return a
    if not a._d:
        return b
    if not b._d:
        return a
    return join_stores(a, b, thr)


def explore(g: FlowGraph, cfg2: Optional[MachineConfig] = None, *, order_seed: Optional[int] = None,
            trace: bool = False) -> Exploration:
    """Accumulate one (value, meta store) pair per node until stable.

    Each node is handled with the join of its predecessors' meta stores;
    successors are revisited whenever a node's pair grows.  ``order_seed``
    shuffles the worklist (the result must not depend on it for stateless
    META).  ``trace`` keeps every node's sequence of accumulated pairs.
    """
    cfg2 = cfg2 or phase2()
    if g.config is None:
        raise ExplorerError("graph carries no phase-1 configuration")
    h = Handler(Machine(g.config), Machine(cfg2))
    thr = cfg2.threshold
    acc: dict[int, NodeResult] = {}
    errors: dict[int, list] = {}
    joins: dict[int, int] = {}
    chains = {} if trace else None
    rng = random.Random(order_seed) if order_seed is not None else None
    work = deque([g.root])
    queued = {g.root}
    handled = 0
    while work:
        if rng is not None and len(work) > 1:
            i = rng.randrange(len(work))
            work.rotate(-i)
            n = work.popleft()
            work.rotate(i)
        else:
            n = work.popleft()
        queued.discard(n)
        if n == g.root:
            meta_in = EMPTY_META
        else:
            meta_in = None
            for p in g.predecessors(n):
                r = acc.get(p)
                if r is not None:
                    meta_in = r.meta if meta_in is None else _join_meta(meta_in, r.meta, thr)
            if meta_in is None:
                continue
        res = h.handle(g.nodes[n], meta_in, g, n)
        handled += 1
        if res.errors:
            errs = errors.setdefault(n, [])
            for e in res.errors:
                if e not in errs:
                    errs.append(e)
        old = acc.get(n)
        if old is None:
            new = NodeResult(res.value, res.meta, res.trap, res.intercepted)
        else:
            new = NodeResult(vjoin(old.value, res.value, thr), _join_meta(old.meta, res.meta, thr),
                             old.trap or res.trap, old.intercepted or res.intercepted)
            if new.value == old.value and new.meta == old.meta:
                continue
            # accumulated pairs form a chain
            if not (leq(old.value, new.value) and store_leq(old.meta, new.meta)):
                raise ExplorerError(f"non-monotone accumulation at node {n}")
        acc[n] = new
        joins[n] = joins.get(n, 0) + 1
        if joins[n] > JOIN_LIMIT:
            raise ExplorerError(f"node {n} grew more than {JOIN_LIMIT} times")
        if chains is not None:
            chains.setdefault(n, []).append((new.value, new.meta))
        for s in g.successor_list(n):
            if s not in queued:
                queued.add(s)
                work.append(s)
    return Exploration(g, acc, errors, handled, h.states, chains)
