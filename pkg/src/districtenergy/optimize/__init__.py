"""Optimization layer: program container, LP/convex/MILP solvers, blocking, export."""

from districtenergy.optimize.program import (
    ConstraintTag,
    MathProgram,
    ProgramError,
    Solution,
    SolveStatus,
)

__all__ = [
    "ConstraintTag",
    "MathProgram",
    "ProgramError",
    "Solution",
    "SolveStatus",
]
