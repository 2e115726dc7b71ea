"""Benchmark cases: a program, its policy and the annotated violation lines."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..core_lang import parse
from ..core_lang.syntax import Program
from ..policies import Policy, load_policy

SUITES = ("analogues", "ac", "ifc")
FEATURES = frozenset(["if", "lp", "ret", "this", "new", "arr", "oprop", "oproto", "cb"])

_MARK = re.compile(r"//\s*@violation\b")


class CaseError(ValueError):
    pass


@dataclass(frozen=True)
class BenchCase:
    name: str
    suite: str
    program: Program
    truth: frozenset            # {(file, line)} of reachable injected violations
    policy: Policy
    features: frozenset = frozenset()
    description: str = ""

    @property
    def key(self) -> str:
        return f"{self.suite}/{self.name}"


def marked_lines(text: str) -> list[int]:
    return [i for i, line in enumerate(text.splitlines(), 1) if _MARK.search(line)]


def load_case(path, suite: str | None = None, file: str | None = None) -> BenchCase:
    """Load a case directory holding program.js0, policy.pol|js0 and truth.json.

    ``file`` is the name reported spans carry (defaults to suite/name/program.js0,
    so reports do not depend on where the package is installed).
    """
    d = Path(path)
    suite = suite or d.parent.name
    src = d / "program.js0"
    if not src.is_file():
        raise CaseError(f"{d}: missing program.js0")
    pols = [d / n for n in ("policy.pol", "policy.js0") if (d / n).is_file()]
    if len(pols) != 1:
        raise CaseError(f"{d}: expected exactly one policy.pol or policy.js0")
    text = src.read_text(encoding="utf-8")
    meta = json.loads((d / "truth.json").read_text(encoding="utf-8"))
    lines = sorted(meta.get("violations", []))
    marks = marked_lines(text)
    if lines != marks:
        raise CaseError(f"{d}: truth.json lines {lines} disagree with @violation marks {marks}")
    nlines = len(text.splitlines())
    for ln in lines:
        if not 1 <= ln <= nlines:
            raise CaseError(f"{d}: violation line {ln} outside the program")
    feats = frozenset(meta.get("features", []))
    if not feats <= FEATURES:
        raise CaseError(f"{d}: unknown feature tags {sorted(feats - FEATURES)}")
    file = file or f"{suite}/{d.name}/program.js0"
    prog = parse(text, file)
    return BenchCase(d.name, suite, prog, frozenset((file, ln) for ln in lines),
                     load_policy(pols[0]), feats, meta.get("description", ""))


def suite_dir(suite: str):
    if suite not in SUITES:
        raise CaseError(f"unknown suite {suite!r}")
    return resources.files("metaguard.assets").joinpath("bench").joinpath(suite)


def load_suite(suite: str) -> list[BenchCase]:
    root = Path(str(suite_dir(suite)))
    return [load_case(d, suite) for d in sorted(root.iterdir()) if d.is_dir()]
