"""Machine configuration: concrete, or abstract at precision H or L."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

DEFAULT_STEP_BUDGET = 1_000_000
DEFAULT_NODE_CEILING = 100_000
DEFAULT_WIDEN_THRESHOLD = 3
DEFAULT_KONT_DEPTH = 3


@dataclass(frozen=True)
class MachineConfig:
    mode: str = "abstract"              # concrete | abstract
    precision: Optional[str] = "H"      # H | L, None in concrete mode
    widen_threshold: int = DEFAULT_WIDEN_THRESHOLD
    step_budget: int = DEFAULT_STEP_BUDGET
    node_ceiling: int = DEFAULT_NODE_CEILING
    # allocation: "fresh" (counter), "H" (site + call site) or "L" (site)
    allocator: Optional[str] = None
    # strong updates replace bindings; weak updates join into them
    strong_updates: Optional[bool] = None
    # caller sites kept in abstract stack addresses; separates return points
    # of one call site reached from different calling contexts
    kont_depth: int = DEFAULT_KONT_DEPTH
    # host inputs seen by a concrete run: element id -> value, prompt answers
    inputs: tuple = field(default=())

    def __post_init__(self):
        if self.mode not in ("concrete", "abstract"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "concrete":
            object.__setattr__(self, "precision", None)
        elif self.precision not in ("H", "L"):
            raise ValueError(f"unknown precision {self.precision!r}")
        if self.allocator is None:
            object.__setattr__(self, "allocator", "fresh" if self.concrete else self.precision)
        if self.allocator not in ("fresh", "H", "L"):
            raise ValueError(f"unknown allocator {self.allocator!r}")
        if self.strong_updates is None:
            object.__setattr__(self, "strong_updates", self.concrete)
        if self.kont_depth < 0:
            raise ValueError("kont_depth must be non-negative")
        if self.widen_threshold < 1:
            raise ValueError("widen_threshold must be positive")

    @property
    def concrete(self) -> bool:
        return self.mode == "concrete"

    @property
    def threshold(self) -> Optional[int]:
        """Widening threshold applied at joins (None: no widening)."""
        return None if self.concrete else self.widen_threshold

    def input(self, key: str, default=None):
        for k, v in self.inputs:
            if k == key:
                return v
        return default

    def with_inputs(self, **kw) -> "MachineConfig":
        return replace(self, inputs=tuple(sorted(kw.items())))


def concrete(step_budget: int = DEFAULT_STEP_BUDGET, **inputs) -> MachineConfig:
    return MachineConfig(mode="concrete", step_budget=step_budget, inputs=tuple(sorted(inputs.items())))


def abstract(precision: str = "H", **kw) -> MachineConfig:
    return MachineConfig(mode="abstract", precision=precision, **kw)


def phase2(step_budget: int = DEFAULT_NODE_CEILING, widen_threshold: int = DEFAULT_WIDEN_THRESHOLD) -> MachineConfig:
    """High-precision configuration for executing trap code: exact constants,
    fresh allocation and strong updates, bounded by ``step_budget`` states per
    trap invocation."""
    return MachineConfig(mode="abstract", precision="H", allocator="fresh", strong_updates=True,
                         step_budget=step_budget, node_ceiling=step_budget,
                         widen_threshold=widen_threshold)


_INT_KEYS = {"widen_threshold", "step_budget", "node_ceiling", "kont_depth"}


def parse_config(text: str) -> MachineConfig:
    """Read ``key = value`` lines (``#`` starts a comment)."""
    kw = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in _INT_KEYS:
            kw[k] = int(v.replace("_", ""))
        elif k in ("mode", "precision", "allocator"):
            kw[k] = v
        elif k == "strong_updates":
            kw[k] = v.lower() in ("1", "true", "yes")
        else:
            raise ValueError(f"line {n}: unknown key {k!r}")
    return MachineConfig(**kw)


def load_config(path) -> MachineConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
