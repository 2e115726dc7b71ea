"""Two-phase static verification of execution-monitor policies for a small JavaScript core."""

__version__ = "0.1.0"
