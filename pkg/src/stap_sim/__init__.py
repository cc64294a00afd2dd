"""Invariant-based fast pulse design and simulation for coupled-cavity atom networks."""
from .dynamics import SimResult, Trajectory, run
from .invariant import PulseKind, PulseProtocol
from .model import Scheme, SchemeSpec

__all__ = ["PulseKind", "PulseProtocol", "Scheme", "SchemeSpec", "SimResult", "Trajectory", "run"]
__version__ = "0.1.0"
