"""TP/FP/FN scoring of reports against a case's ground truth."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

from .cases import BenchCase

TIMEOUT_CELL = "-"


@dataclass
class RunMetrics:
    case: str
    approach: str                   # 1PH | 2PH
    precision: str                  # H | L
    status: str = "ok"              # ok | ceiling | timeout | error
    tp: Optional[int] = None
    fp: Optional[int] = None
    fn: Optional[int] = None
    states: Optional[int] = None
    wall_time: Optional[float] = None
    message: str = ""

    @property
    def config(self) -> str:
        return f"{self.approach}_{self.precision}"

    def to_json(self) -> dict:
        return asdict(self)

    def cells(self) -> list:
        """Table row with ``-`` for values a run did not produce."""
        def c(v):
            return TIMEOUT_CELL if v is None else v
        t = None if self.wall_time is None else round(self.wall_time, 3)
        return [self.case, self.approach, self.precision, self.status, c(self.tp), c(self.fp),
                c(self.fn), c(self.states), c(t)]


COLUMNS = ["case", "approach", "precision", "status", "tp", "fp", "fn", "states", "wall_time"]


def _line(r) -> tuple:
    if isinstance(r, dict):
        s = r["span"]
        return (s["file"], s["start_line"])
    return (r.span.file, r.span.start_line)


def score(reports, case: BenchCase, approach: str = "2PH", precision: str = "H") -> RunMetrics:
    """Match reports (objects or their JSON form) to ground truth by (file, start line)."""
    got = {_line(r) for r in reports}
    tp = len(got & case.truth)
    return RunMetrics(case.key, approach, precision, "ok", tp, len(got - case.truth),
                      len(case.truth - got))
