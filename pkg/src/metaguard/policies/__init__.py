"""Policy assets: the AC builder, the IFC taint META and the linker."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .builder import ArgMatch, PolicyError, PolicySpec, compile_policy, parse_policy
from .link import LinkError, link


@dataclass(frozen=True)
class Policy:
    id: str
    meta: str           # META source text
    file: str


def _asset(*parts) -> str:
    node = resources.files("metaguard.assets")
    for part in parts:
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def ifc_meta() -> str:
    """META tracking explicit taint flows into registered sinks."""
    return _asset("policies", "ifc.js0")


def policy_from_text(text: str, file: str, policy_id: str | None = None) -> Policy:
    """``.pol`` builder text is compiled; anything else is taken as META source.

    Builder policies are identified by their statement ids, META files by name.
    """
    if file.endswith(".pol"):
        specs = parse_policy(text, file)
        return Policy(policy_id or ",".join(s.id for s in specs), compile_policy(specs), file)
    pid = policy_id or Path(file).stem
    if not file.endswith(".js0"):
        raise PolicyError(f"{file}: policy files end in .pol or .js0")
    return Policy(pid, text, file)


def load_policy(path, policy_id: str | None = None) -> Policy:
    path = Path(path)
    if path.name == "policy.js0":
        # bench cases name META policies after their directory
        policy_id = policy_id or path.parent.name
    return policy_from_text(path.read_text(encoding="utf-8"), str(path), policy_id)


__all__ = [
    "ArgMatch", "LinkError", "Policy", "PolicyError", "PolicySpec", "compile_policy",
    "ifc_meta", "link", "load_policy", "parse_policy", "policy_from_text",
]
