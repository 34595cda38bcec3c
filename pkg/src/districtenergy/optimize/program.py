"""Container for the composed optimization programs.

A MathProgram holds bounded continuous and binary variables, linear
equality/inequality rows, and an objective made of a linear part plus
optional separable convex terms c4*x^4 + c2*x^2 attached to single
variables. Rows carry a category tag (single-component, interconnection,
control) so reports can group residuals the way the model taxonomy does.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

INF = float("inf")


class ProgramError(ValueError):
    """Raised for ill-formed programs or unsupported solver inputs."""


class ConstraintTag(enum.Enum):
    SINGLE_COMPONENT = "single-component"
    INTERCONNECTION = "interconnection"
    CONTROL = "control"
    OBJECTIVE = "objective"  # epigraph / linearization plumbing


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass
class Solution:
    """Solver result with enough metadata to audit it."""

    status: SolveStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    nodes: int = 0
    gap: float = 0.0
    certificate: np.ndarray | None = None  # Farkas vector or unbounded ray
    residuals: dict | None = None

    @property
    def optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


@dataclass
class _Row:
    cols: np.ndarray
    coefs: np.ndarray
    rhs: float
    tag: ConstraintTag
    label: str


@dataclass
class QuarticTerm:
    """Separable convex objective term c4*x^4 + c2*x^2 on one variable."""

    var: int
    c4: float
    c2: float


class MathProgram:
    """Incrementally built optimization program.

    min  c'x + c0 + sum_i (c4_i x_i^4 + c2_i x_i^2)
    s.t. A_eq x = b_eq,  A_le x <= b_le,  lb <= x <= ub,
         x_j binary for flagged j.
    """

    def __init__(self, name: str = "program"):
        self.name = name
        self.var_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.binary: list[bool] = []
        self.obj: dict[int, float] = {}
        self.obj_const: float = 0.0
        self.quartics: list[QuarticTerm] = []
        self.eq_rows: list[_Row] = []
        self.le_rows: list[_Row] = []
        self.series: dict[str, dict] = {}

    # -- variables ---------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def add_var(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = INF,
        binary: bool = False,
        obj: float = 0.0,
    ) -> int:
        if lb > ub:
            raise ProgramError(f"variable {name}: lb {lb} > ub {ub}")
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
            if lb > ub:
                raise ProgramError(f"binary {name}: bounds exclude {{0,1}}")
        idx = len(self.var_names)
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.binary.append(bool(binary))
        if obj:
            self.obj[idx] = self.obj.get(idx, 0.0) + float(obj)
        return idx

    def add_vars(self, prefix: str, n: int, lb=0.0, ub=INF, binary=False) -> list[int]:
        lbs = np.broadcast_to(np.asarray(lb, dtype=float), (n,))
        ubs = np.broadcast_to(np.asarray(ub, dtype=float), (n,))
        return [
            self.add_var(f"{prefix}[{i}]", lbs[i], ubs[i], binary=binary)
            for i in range(n)
        ]

    def set_bounds(self, idx: int, lb: float | None = None, ub: float | None = None):
        if lb is not None:
            self.lb[idx] = float(lb)
        if ub is not None:
            self.ub[idx] = float(ub)
        if self.lb[idx] > self.ub[idx]:
            raise ProgramError(f"variable {self.var_names[idx]}: empty bound interval")

    def fix_var(self, idx: int, value: float):
        self.set_bounds(idx, value, value)

    # -- constraints & objective -------------------------------------------

    @staticmethod
    def _pack(coefs: dict[int, float]) -> tuple[np.ndarray, np.ndarray]:
        items = [(j, c) for j, c in sorted(coefs.items()) if c != 0.0]
        if not items:
            return np.empty(0, dtype=int), np.empty(0)
        cols, vals = zip(*items)
        return np.array(cols, dtype=int), np.array(vals, dtype=float)

    def add_eq(self, coefs: dict[int, float], rhs: float,
               tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT, label: str = ""):
        cols, vals = self._pack(coefs)
        self.eq_rows.append(_Row(cols, vals, float(rhs), tag, label))

    def add_le(self, coefs: dict[int, float], rhs: float,
               tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT, label: str = ""):
        cols, vals = self._pack(coefs)
        self.le_rows.append(_Row(cols, vals, float(rhs), tag, label))

    def add_ge(self, coefs: dict[int, float], rhs: float,
               tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT, label: str = ""):
        self.add_le({j: -c for j, c in coefs.items()}, -rhs, tag, label)

    def add_obj(self, coefs: dict[int, float], const: float = 0.0):
        for j, c in coefs.items():
            self.obj[j] = self.obj.get(j, 0.0) + float(c)
        self.obj_const += float(const)

    def add_quartic(self, var: int, c4: float, c2: float):
        if c4 < 0 or c2 < 0:
            raise ProgramError(
                f"non-convex separable term on {self.var_names[var]}: "
                f"c4={c4}, c2={c2}"
            )
        self.quartics.append(QuarticTerm(var, float(c4), float(c2)))

    # -- series registry (for blocking and reports) -------------------------

    def register_series(self, name: str, ids, kind: str, role: str = "derived"):
        """Record that variables ``ids`` form the time series ``name``.

        kind: 'knot' (length M+1, index 0..M) or 'slot' (length M, 1..M).
        role: 'decision' series may be blocked under multirate control;
        'derived' series follow from decisions via constraints.
        """
        if kind not in ("knot", "slot"):
            raise ProgramError(f"series {name}: kind must be knot or slot")
        if role not in ("decision", "derived"):
            raise ProgramError(f"series {name}: role must be decision or derived")
        self.series[name] = {"ids": list(ids), "kind": kind, "role": role}

    # -- export to solver arrays --------------------------------------------

    def to_arrays(self):
        """Dense (c, c0, A_eq, b_eq, A_le, b_le, lb, ub, binary) views."""
        n = self.n_vars
        c = np.zeros(n)
        for j, v in self.obj.items():
            c[j] = v
        A_eq = np.zeros((len(self.eq_rows), n))
        b_eq = np.zeros(len(self.eq_rows))
        for i, row in enumerate(self.eq_rows):
            A_eq[i, row.cols] = row.coefs
            b_eq[i] = row.rhs
        A_le = np.zeros((len(self.le_rows), n))
        b_le = np.zeros(len(self.le_rows))
        for i, row in enumerate(self.le_rows):
            A_le[i, row.cols] = row.coefs
            b_le[i] = row.rhs
        return (
            c,
            self.obj_const,
            A_eq,
            b_eq,
            A_le,
            b_le,
            np.array(self.lb),
            np.array(self.ub),
            np.array(self.binary, dtype=bool),
        )

    # -- evaluation helpers --------------------------------------------------

    def objective_value(self, x: np.ndarray) -> float:
        val = self.obj_const + sum(c * x[j] for j, c in self.obj.items())
        for t in self.quartics:
            val += t.c4 * x[t.var] ** 4 + t.c2 * x[t.var] ** 2
        return float(val)

    def residuals(self, x: np.ndarray) -> dict:
        """Max violation per tag; useful as an independent validator pass."""
        out: dict[str, float] = {}

        def bump(tag, v):
            key = tag.value
            out[key] = max(out.get(key, 0.0), v)

        for row in self.eq_rows:
            bump(row.tag, abs(float(x[row.cols] @ row.coefs) - row.rhs))
        for row in self.le_rows:
            bump(row.tag, max(0.0, float(x[row.cols] @ row.coefs) - row.rhs))
        lb = np.array(self.lb)
        ub = np.array(self.ub)
        bound_viol = np.maximum(lb - x, 0.0) + np.maximum(x - ub, 0.0)
        out["bounds"] = float(bound_viol.max(initial=0.0))
        if any(self.binary):
            mask = np.array(self.binary)
            out["integrality"] = float(
                np.abs(x[mask] - np.round(x[mask])).max(initial=0.0)
            )
        return out

    def validate(self):
        """Structural checks before a solve."""
        for t in self.quartics:
            if self.binary[t.var]:
                raise ProgramError("quartic term attached to a binary variable")
        for j, is_bin in enumerate(self.binary):
            if is_bin and (self.lb[j] < 0.0 or self.ub[j] > 1.0):
                raise ProgramError(f"binary {self.var_names[j]} has non-unit bounds")

    @property
    def has_binaries(self) -> bool:
        return any(self.binary)

    @property
    def has_quartics(self) -> bool:
        return len(self.quartics) > 0

    def copy(self) -> "MathProgram":
        import copy as _copy

        return _copy.deepcopy(self)
