from .explore import Exploration, ExplorerError, NodeResult, explore
from .handle import EMPTY_META, Handler, HandleResult, TrapCall, reachable, restrict_meta, trap, trap_calls
from .verify import IncompleteGraph, Verification, ViolationReport, verify, verify_1ph, violations

__all__ = [
    "EMPTY_META", "Exploration", "ExplorerError", "HandleResult", "Handler", "IncompleteGraph",
    "NodeResult", "TrapCall", "Verification", "ViolationReport", "explore", "reachable",
    "restrict_meta", "trap", "trap_calls", "verify", "verify_1ph", "violations",
]
