"""Energy-flux component models: chiller, storage, CHP microturbine, wind.

Each component maps per-slot control inputs to per-slot energies and knows
how to emit its constraints into a MathProgram, including the exact
mixed-integer encodings of its on-off logic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from districtenergy.optimize.program import ConstraintTag, MathProgram

DEFAULT_EPSILON = 1e-6  # on-off threshold, in program energy units


class ComponentError(ValueError):
    """Raised for invalid component parameters."""


class InfeasibleOperatingPoint(ComponentError):
    """Operating point outside the physically meaningful domain."""


class NonConvexCurveError(ComponentError):
    """Sampled curve violates the convexity the approximation relies on."""


class DegenerateFitError(ComponentError):
    """Fit produced coefficients outside the convex-model class."""


# ---------------------------------------------------------------------------
# Chiller


@dataclass(frozen=True)
class ChillerSpec:
    """Vapor-compression chiller characterized by four performance
    coefficients (units W/K, W, K/W, 1) relating slot cooling energy to
    absorbed electrical energy at condenser-water temperature ``t_cw``.

    ``e_max_c`` is the per-slot cooling capacity in J. ``model_type``: 'A'
    biquadratic, 'B' PWA, 'C' biquadratic with on-off, 'D' PWA with on-off.
    """

    a1: float
    a2: float
    a3: float
    a4: float
    e_max_c: float
    t_cw: float
    model_type: str = "B"
    pwa_knots: int = 10
    name: str = "chiller"

    def __post_init__(self):
        if self.e_max_c <= 0:
            raise ComponentError("chiller capacity must be positive")
        if self.t_cw <= 0:
            raise ComponentError("condenser water temperature must be in kelvin")
        if self.model_type not in ("A", "B", "C", "D"):
            raise ComponentError(f"unknown chiller model type {self.model_type!r}")
        if self.pwa_knots < 2:
            raise ComponentError("need at least 2 PWA knots")
        if min(self.a1, self.a2, self.a3) < 0:
            raise ComponentError("a1, a2, a3 must be nonnegative")

    def validate_capacity(self, dt: float):
        """The consumption curve has a pole at E_c = T_cw*dt/a3; the rated
        capacity must stay strictly below it."""
        if self.a3 > 0 and self.a3 * self.e_max_c / dt >= self.t_cw:
            raise ComponentError(
                f"{self.name}: capacity {self.e_max_c:.6g} J reaches the model "
                f"pole {self.t_cw * dt / self.a3:.6g} J at dt={dt:.6g} s; "
                "reduce e_max_c"
            )

    @property
    def uses_onoff(self) -> bool:
        return self.model_type in ("C", "D")


def ng_gordon_electrical(spec: ChillerSpec, t_o: float, dt: float, e_c) -> np.ndarray:
    """Electrical energy absorbed to deliver cooling energy ``e_c`` in one slot.

    Vectorized over ``e_c`` (J). Raises if any point sits at or beyond the
    pole of the underlying entropy-balance model.
    """
    e_c = np.asarray(e_c, dtype=float)
    if np.any(e_c < -1e-12) or np.any(e_c > spec.e_max_c * (1 + 1e-12)):
        raise InfeasibleOperatingPoint(
            f"cooling energy outside [0, {spec.e_max_c}] J"
        )
    denom = spec.t_cw - spec.a3 * e_c / dt
    if np.any(denom <= 0):
        raise InfeasibleOperatingPoint(
            "cooling request beyond the chiller model pole"
        )
    num = (
        spec.a1 * t_o * spec.t_cw * dt
        + spec.a2 * (t_o - spec.t_cw) * dt
        + spec.a4 * t_o * e_c
    )
    return num / denom - e_c


def chiller_cop(spec: ChillerSpec, t_o: float, dt: float, e_c) -> np.ndarray:
    """Coefficient of performance E_c / E_l; zero request maps to COP 0."""
    e_c = np.asarray(e_c, dtype=float)
    e_l = ng_gordon_electrical(spec, t_o, dt, e_c)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(e_l > 0, e_c / np.where(e_l > 0, e_l, 1.0), 0.0)
    return out


def max_cop_point(spec: ChillerSpec, t_o: float, dt: float) -> tuple[float, float]:
    """Cooling energy and COP at the efficiency peak on (0, e_max_c]."""
    spec.validate_capacity(dt)

    def neg_cop(e):
        return -chiller_cop(spec, t_o, dt, e)

    res = minimize_scalar(
        neg_cop,
        bounds=(spec.e_max_c * 1e-9, spec.e_max_c),
        method="bounded",
        options={"xatol": spec.e_max_c * 1e-12},
    )
    return float(res.x), float(-res.fun)


@dataclass(frozen=True)
class BiquadraticApprox:
    """E_l ~= c1 E_c^4 + c2 E_c^2 + c3, convex by c1, c2 >= 0."""

    c1: float
    c2: float
    c3: float

    def evaluate(self, e_c) -> np.ndarray:
        e_c = np.asarray(e_c, dtype=float)
        return self.c1 * e_c**4 + self.c2 * e_c**2 + self.c3


@dataclass(frozen=True)
class PwaApprox:
    """E_l ~= max_i(m[i] E_c + q[i]); chords of a convex curve."""

    m: np.ndarray
    q: np.ndarray
    knots_x: np.ndarray
    knots_y: np.ndarray

    def evaluate(self, e_c) -> np.ndarray:
        e_c = np.asarray(e_c, dtype=float)
        return np.max(np.multiply.outer(e_c, self.m) + self.q, axis=-1)


def fit_biquadratic(
    spec: ChillerSpec, t_o: float, dt: float, n_grid: int = 256
) -> BiquadraticApprox:
    """Least-squares biquadratic fit pinned at the two operating points that
    matter: zero request and the COP maximizer.

    The two interpolation conditions fix c3 and tie c2 to c1; the remaining
    degree of freedom minimizes the residual on a dense grid.
    """
    spec.validate_capacity(dt)
    e_star, _ = max_cop_point(spec, t_o, dt)
    y0 = float(ng_gordon_electrical(spec, t_o, dt, 0.0))
    y_star = float(ng_gordon_electrical(spec, t_o, dt, e_star))
    grid = np.linspace(0.0, spec.e_max_c, n_grid)
    y = ng_gordon_electrical(spec, t_o, dt, grid)

    alpha = (y_star - y0) / e_star**2
    g = grid**4 - e_star**2 * grid**2
    d = y - alpha * grid**2 - y0
    gg = float(g @ g)
    c1 = float(g @ d) / gg if gg > 0 else 0.0
    c2 = alpha - c1 * e_star**2
    tol = 1e-12 * max(1.0, abs(y_star))
    if c1 < -tol or c2 < -tol:
        raise DegenerateFitError(
            f"biquadratic fit not convex: c1={c1:.3e}, c2={c2:.3e} "
            f"(T_o={t_o} K, e_star={e_star:.4g} J)"
        )
    return BiquadraticApprox(max(c1, 0.0), max(c2, 0.0), y0)


def fit_pwa(spec: ChillerSpec, t_o: float, dt: float, knots: int | None = None) -> PwaApprox:
    """Chord interpolant of the consumption curve on ``knots`` abscissae.

    Knots are uniform over [0, e_max_c] with the interior knot nearest the
    COP maximizer moved onto it, so the highest-efficiency point is always
    represented exactly. Slopes must come out strictly increasing, or the
    sampled curve was not convex and an error names the offending triple.
    """
    spec.validate_capacity(dt)
    k = spec.pwa_knots if knots is None else knots
    if k < 2:
        raise ComponentError("need at least 2 PWA knots")
    x = np.linspace(0.0, spec.e_max_c, k)
    if k > 2:
        e_star, _ = max_cop_point(spec, t_o, dt)
        if 0.0 < e_star < spec.e_max_c:
            interior = x[1:-1]
            j = int(np.argmin(np.abs(interior - e_star))) + 1
            x[j] = e_star
            x = np.unique(x)
    y = ng_gordon_electrical(spec, t_o, dt, x)
    dx = np.diff(x)
    m = np.diff(y) / dx
    for i in range(len(m) - 1):
        if m[i + 1] <= m[i]:
            raise NonConvexCurveError(
                f"chord slopes not increasing around knots "
                f"({x[i]:.6g}, {x[i + 1]:.6g}, {x[i + 2]:.6g})"
            )
    q = y[:-1] - m * x[:-1]
    return PwaApprox(m=m, q=q, knots_x=x, knots_y=y)


def chiller_onoff_constraints(
    program: MathProgram,
    e_c_ids,
    delta_ids,
    e_max_c: float,
    epsilon: float = DEFAULT_EPSILON,
    tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT,
    label: str = "chiller",
):
    """Emit eps*delta <= E_c <= E_max*delta per slot.

    delta = 0 collapses the cooling energy to exactly zero; delta = 1 opens
    [epsilon, E_max].
    """
    if epsilon <= 0 or epsilon > 1e-6 * e_max_c * 1e6:
        # keep epsilon well under the capacity so it only breaks the tie at 0
        if epsilon >= e_max_c:
            raise ComponentError("epsilon must be far below capacity")
    for k, (e, d) in enumerate(zip(e_c_ids, delta_ids)):
        program.add_le({e: 1.0, d: -e_max_c}, 0.0, tag, f"{label}.cap[{k}]")
        program.add_le({e: -1.0, d: epsilon}, 0.0, tag, f"{label}.floor[{k}]")


def binary_product_constraints(
    program: MathProgram,
    z: int,
    delta: int,
    expr: dict[int, float],
    expr_const: float,
    big_m: float,
    tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT,
    label: str = "prod",
):
    """Exact linearization of z = delta * (expr + const) for binary delta.

    Requires 0 <= expr + const <= big_m over the feasible box. Emits the
    four-row product encoding; each row is tight for one binary value:

        z >= 0,  z <= big_m*delta,  z <= expr,  z >= expr - big_m*(1-delta).
    """
    if big_m <= 0:
        raise ComponentError(f"{label}: big-M must be positive")
    # z <= big_m * delta
    program.add_le({z: 1.0, delta: -big_m}, 0.0, tag, f"{label}.cap")
    # z <= expr + const
    row = {z: 1.0}
    for j, c in expr.items():
        row[j] = row.get(j, 0.0) - c
    program.add_le(row, expr_const, tag, f"{label}.ub")
    # z >= expr + const - big_m (1 - delta)
    row = {z: -1.0, delta: -big_m}
    for j, c in expr.items():
        row[j] = row.get(j, 0.0) + c
    program.add_le(row, big_m - expr_const, tag, f"{label}.lb")
    program.set_bounds(z, lb=0.0)


# ---------------------------------------------------------------------------
# Storage


@dataclass(frozen=True)
class StorageSpec:
    """Lossy energy buffer S(k+1) = a S(k) - s(k), s > 0 discharging.

    Type 'A' bounds the net exchange directly; type 'B' splits it into a
    charge stream s_C (nonpositive) and a discharge stream s_D (nonnegative)
    gated by mutually exclusive binary commands, with efficiencies beta_c
    (charge) and beta_d (discharge). Charge interval (charge_lo, charge_hi]
    has charge_lo < charge_hi <= 0; discharge [discharge_lo, discharge_hi)
    has 0 <= discharge_lo < discharge_hi.
    """

    a: float
    s_max_level: float
    s0: float
    model_type: str = "A"
    s_min: float = 0.0
    s_max: float = 0.0
    beta_c: float = 0.0
    beta_d: float = 0.0
    charge_lo: float = 0.0
    charge_hi: float = 0.0
    discharge_lo: float = 0.0
    discharge_hi: float = 0.0
    name: str = "storage"

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise ComponentError("loss factor a must be in (0, 1]")
        if not 0.0 <= self.s0 <= self.s_max_level:
            raise ComponentError("initial level outside [0, capacity]")
        if self.model_type == "A":
            if self.s_min > self.s_max:
                raise ComponentError("exchange bounds empty")
        elif self.model_type == "B":
            if not 0.0 <= self.beta_c <= 1.0 or not 0.0 <= self.beta_d <= 1.0:
                raise ComponentError("efficiencies must be in [0, 1]")
            if not self.charge_lo < self.charge_hi <= 0.0:
                raise ComponentError(
                    "charge bounds must satisfy lo < hi <= 0 "
                    f"(got {self.charge_lo}, {self.charge_hi})"
                )
            if not 0.0 <= self.discharge_lo < self.discharge_hi:
                raise ComponentError(
                    "discharge bounds must satisfy 0 <= lo < hi "
                    f"(got {self.discharge_lo}, {self.discharge_hi})"
                )
        else:
            raise ComponentError(f"unknown storage model type {self.model_type!r}")


def storage_step(spec: StorageSpec, level: float, s: float) -> float:
    """One-slot level update for the net-exchange model."""
    return spec.a * level - s


def storage_step_split(spec: StorageSpec, level: float, s_c: float, s_d: float) -> float:
    """One-slot update with charge/discharge efficiencies applied."""
    return spec.a * level - (1.0 - spec.beta_c) * s_c - (1.0 + spec.beta_d) * s_d


def storage_lift(spec: StorageSpec, M: int):
    """Horizon maps from initial level and exchanges to levels S(1)..S(M).

    Returns (xi0, xi1) with S = xi0*S(0) + xi1 @ s for type A, and
    (xi0, xi_c, xi_d) with S = xi0*S(0) + xi_c @ s_C + xi_d @ s_D for type B.
    Row k-1 holds S(k) = a^k S(0) - sum_h a^(k-h) s_h over slots h = 1..k.
    """
    if M < 1:
        raise ComponentError("horizon must be at least one slot")
    xi0 = spec.a ** np.arange(1, M + 1)
    xi1 = np.zeros((M, M))
    for k in range(1, M + 1):
        for h in range(1, k + 1):
            xi1[k - 1, h - 1] = -spec.a ** (k - h)
    if spec.model_type == "A":
        return xi0, xi1
    return xi0, (1.0 - spec.beta_c) * xi1, (1.0 + spec.beta_d) * xi1


def storage_mode_constraints(
    program: MathProgram,
    spec: StorageSpec,
    s_c_ids,
    s_d_ids,
    d_c_ids,
    d_d_ids,
    tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT,
):
    """Mutual exclusion and mode-gated exchange bounds for type-B storage.

    With both commands zero the bounds collapse both streams to 0.
    """
    if spec.model_type != "B":
        raise ComponentError("mode constraints apply to type-B storage only")
    n = spec.name
    for k, (sc, sd, dc, dd) in enumerate(zip(s_c_ids, s_d_ids, d_c_ids, d_d_ids)):
        program.add_le({dc: 1.0, dd: 1.0}, 1.0, tag, f"{n}.excl[{k}]")
        # delta_C*lo <= s_C <= delta_C*hi
        program.add_le({sc: -1.0, dc: spec.charge_lo}, 0.0, tag, f"{n}.chg_lo[{k}]")
        program.add_le({sc: 1.0, dc: -spec.charge_hi}, 0.0, tag, f"{n}.chg_hi[{k}]")
        # delta_D*lo <= s_D <= delta_D*hi
        program.add_le({sd: -1.0, dd: spec.discharge_lo}, 0.0, tag, f"{n}.dis_lo[{k}]")
        program.add_le({sd: 1.0, dd: -spec.discharge_hi}, 0.0, tag, f"{n}.dis_hi[{k}]")


# ---------------------------------------------------------------------------
# CHP microturbine


@dataclass(frozen=True)
class ChpSpec:
    """Microturbine with affine electrical/heat output vs fuel flow.

    Energies per slot: E_l = m_l*u + q_l, E_h = m_h*u + q_h when running.
    ``u_min`` is the minimum operative flow: u <= u_min means the unit is
    off. Type 'A' always on; 'B' adds the binary on-off command.
    """

    m_l: float
    q_l: float
    m_h: float
    q_h: float
    u_min: float
    u_max: float
    e_max_l: float
    e_max_h: float
    startup_cost: float = 0.0
    fuel_price: float = 0.0
    model_type: str = "B"
    name: str = "chp"

    def __post_init__(self):
        if min(self.m_l, self.q_l, self.m_h, self.q_h) <= 0:
            raise ComponentError("characteristic coefficients must be positive")
        if not 0.0 <= self.u_min < self.u_max:
            raise ComponentError("need 0 <= u_min < u_max")
        if self.model_type not in ("A", "B"):
            raise ComponentError(f"unknown CHP model type {self.model_type!r}")


def chp_energies(spec: ChpSpec, u, delta=None) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the slot energies for given flow (and on-off status)."""
    u = np.asarray(u, dtype=float)
    e_l = spec.m_l * u + spec.q_l
    e_h = spec.m_h * u + spec.q_h
    if delta is not None:
        delta = np.asarray(delta, dtype=float)
        if np.any((delta > 0.5) & (u < spec.u_min)):
            raise ComponentError("flow below u_min while the unit is on")
        e_l = delta * e_l
        e_h = delta * e_h
    return e_l, e_h


def chp_gate_constraints(
    program: MathProgram,
    spec: ChpSpec,
    u_ids,
    delta_ids,
    epsilon: float = DEFAULT_EPSILON,
    tag: ConstraintTag = ConstraintTag.SINGLE_COMPONENT,
):
    """Minimum-flow gate: u <= u_min <=> delta = 0.

    delta*(u_min+eps) <= u <= delta*u_max + (1-delta)*u_min.
    """
    n = spec.name
    for k, (u, d) in enumerate(zip(u_ids, delta_ids)):
        program.add_le(
            {u: -1.0, d: spec.u_min + epsilon}, 0.0, tag, f"{n}.gate_lo[{k}]"
        )
        program.add_le(
            {u: 1.0, d: spec.u_min - spec.u_max}, spec.u_min, tag, f"{n}.gate_hi[{k}]"
        )


# ---------------------------------------------------------------------------
# Wind turbine


@dataclass(frozen=True)
class WindSpec:
    """Wind turbine power curve: off below cut-in and above cut-out,
    below-rated curve between cut-in and rated speed, rated power above.

    ``curve`` optionally tabulates (v, P) pairs for the below-rated region;
    default is the cubic P_n (v/v_n)^3.
    """

    v_in: float
    v_n: float
    v_out: float
    p_n: float
    curve: tuple[tuple[float, float], ...] | None = None
    name: str = "wind"

    def __post_init__(self):
        if not 0.0 < self.v_in < self.v_n < self.v_out:
            raise ComponentError("need 0 < v_in < v_n < v_out")
        if self.p_n <= 0:
            raise ComponentError("rated power must be positive")
        if self.curve is not None:
            v, p = zip(*self.curve)
            if list(v) != sorted(v):
                raise ComponentError("tabulated curve speeds must be increasing")
            p_at_rated = float(np.interp(self.v_n, v, p))
            if abs(p_at_rated - self.p_n) > 1e-9 * self.p_n:
                raise ComponentError(
                    f"tabulated curve discontinuous at rated speed: "
                    f"P({self.v_n}) = {p_at_rated}, expected {self.p_n}"
                )

    def below_rated(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.curve is None:
            return self.p_n * (v / self.v_n) ** 3
        xs, ps = zip(*self.curve)
        return np.interp(v, xs, ps)


def wind_power(spec: WindSpec, v) -> np.ndarray:
    """Instantaneous power for wind speed ``v`` (m/s), vectorized."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    mid = (v > spec.v_in) & (v < spec.v_n)
    out[mid] = spec.below_rated(v[mid])
    rated = (v >= spec.v_n) & (v < spec.v_out)
    out[rated] = spec.p_n
    return out


def wind_energy(spec: WindSpec, v_samples, dt: float) -> float:
    """Slot energy: mean power over the sub-samples times slot length."""
    v = np.asarray(v_samples, dtype=float)
    if v.size == 0:
        raise ComponentError("need at least one wind speed sample per slot")
    if np.any(v < 0):
        raise ComponentError("wind speeds must be nonnegative")
    return float(np.mean(wind_power(spec, v)) * dt)
