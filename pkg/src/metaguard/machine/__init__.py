from .config import MachineConfig, abstract, concrete, load_config, parse_config, phase2
from .semantics import Machine, MachineError
from .state import Closure, ErrorState, Ev, Halt, Ko, Kont, Native
from .values import summarize
from .run import run

__all__ = [
    "Closure", "ErrorState", "Ev", "Halt", "Ko", "Kont", "Machine", "MachineConfig",
    "MachineError", "Native", "abstract", "concrete", "load_config", "parse_config",
    "phase2", "run", "summarize",
]
