from .enforce import EnforcementOutcome, enforce
from .instrument import InstrumentError, em_trap, instrument
from .traps import DECISION_TRAPS, TRAP_TABLE, trap_for

__all__ = ["DECISION_TRAPS", "EnforcementOutcome", "InstrumentError", "TRAP_TABLE", "em_trap",
           "enforce", "instrument", "trap_for"]
