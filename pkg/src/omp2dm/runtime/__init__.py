"""Execution: sequential interpreter, message-passing simulator, differential check."""

from .diff import Cell, Mismatch, Verdict, compare_states, differential_check
from .interp import AccessTrace, BlockAccess, ExecResult, interpret_sequential
from .sim import (
    ANY, Message, ProcessState, SimResult, SimTrace, Simulator, enumerate_arrival_orders, match_recv,
    simulate_mpi,
)

__all__ = [
    "ANY", "AccessTrace", "BlockAccess", "Cell", "ExecResult", "Message", "Mismatch", "ProcessState",
    "SimResult", "SimTrace", "Simulator", "Verdict", "compare_states", "differential_check",
    "enumerate_arrival_orders", "interpret_sequential", "match_recv", "simulate_mpi",
]
