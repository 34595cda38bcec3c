"""Exact discretization of the building model under piecewise-linear inputs.

Setpoints and disturbances are sampled on knots t_k = k*dt and interpolated
linearly in between (first-order hold). The continuous dynamics

    dT/dt = A T + B u + W w,   y = C T + D u

then admit an exact discrete recursion built from the matrix exponential and
its first two moments,

    Phi = e^{A dt},  H1 = int_0^dt e^{As} ds,  H2 = int_0^dt e^{As}(dt-s) ds,

computed in one call via an augmented-matrix exponential. Stacking the
recursion over a horizon yields dense maps from the initial state and the
knot series to outputs, slot energies and the final state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "DiscreteModel",
    "LiftedModel",
    "exact_discretization",
    "phi_integrals",
    "phi_integrals_series",
    "lift",
    "pairwise_trapezoid",
    "slot_energy_maps",
    "zone_capacity_map",
    "people_energy_map",
    "internal_energy_terms",
    "cooling_energy_map",
]


def phi_integrals(A: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrix exponential and its first two integral moments.

    Returns ``(Phi, H1, H2)`` with Phi = e^{A dt}, H1 = int_0^dt e^{As} ds and
    H2 = int_0^dt e^{As}(dt - s) ds, read off the top block row of

        exp([[A, I, 0], [0, 0, I], [0, 0, 0]] * dt).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if dt <= 0:
        raise ValueError("dt must be positive")
    aug = np.zeros((3 * n, 3 * n))
    aug[:n, :n] = A
    aug[:n, n : 2 * n] = np.eye(n)
    aug[n : 2 * n, 2 * n :] = np.eye(n)
    E = expm(aug * dt)
    return E[:n, :n], E[:n, n : 2 * n], E[:n, 2 * n :]


def phi_integrals_series(
    A: np.ndarray, dt: float, order: int = 30
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated Taylor series for the same three matrices.

    Independent of the augmented exponential; used to cross-check it. Only
    trustworthy when ||A||*dt is modest, so keep for testing.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    phi = np.zeros((n, n))
    h1 = np.zeros((n, n))
    h2 = np.zeros((n, n))
    term = np.eye(n)  # A^k
    fact = 1.0
    for k in range(order + 1):
        if k > 0:
            term = term @ A
            fact *= k
        phi += term * dt**k / fact
        h1 += term * dt ** (k + 1) / (fact * (k + 1))
        h2 += term * dt ** (k + 2) / (fact * (k + 1) * (k + 2))
    return phi, h1, h2


@dataclass(frozen=True)
class DiscreteModel:
    """Exact discrete-time model for first-order-hold inputs.

    The physical state recursion is

        T(k+1) = Gx T(k) + (Gu0 - Gu1) u(k) + Gu1 u(k+1)
                          + (Gw0 - Gw1) w(k) + Gw1 w(k+1)

    and the shifted state xi(k) = T(k) - Gu1 u(k) - Gw1 w(k) obeys the
    standard form xi(k+1) = Ad xi(k) + Bd u(k) + Wd w(k),
    y(k) = Cd xi(k) + Dd u(k) + Vd w(k).
    """

    dt: float
    Gx: np.ndarray
    Gu0: np.ndarray
    Gu1: np.ndarray
    Gw0: np.ndarray
    Gw1: np.ndarray
    Ad: np.ndarray
    Bd: np.ndarray
    Wd: np.ndarray
    Cd: np.ndarray
    Dd: np.ndarray
    Vd: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def n_states(self) -> int:
        return self.Gx.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.Gu0.shape[1]

    @property
    def n_dist(self) -> int:
        return self.Gw0.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    def step(self, T, u0, u1, w0, w1) -> np.ndarray:
        """Advance one slot in physical coordinates."""
        return (
            self.Gx @ T
            + (self.Gu0 - self.Gu1) @ u0
            + self.Gu1 @ u1
            + (self.Gw0 - self.Gw1) @ w0
            + self.Gw1 @ w1
        )

    def simulate(self, T0, u, w) -> tuple[np.ndarray, np.ndarray]:
        """Roll the recursion over all knots.

        ``u`` has shape (M+1, n_inputs) and ``w`` (M+1, n_dist). Returns the
        state trajectory (M+1, n_states) and outputs y(k) = C T(k) + D u(k)
        at every knot.
        """
        u = np.atleast_2d(np.asarray(u, dtype=float))
        w = np.atleast_2d(np.asarray(w, dtype=float))
        if u.shape[0] != w.shape[0]:
            raise ValueError("u and w must share the knot count")
        m1 = u.shape[0]
        T = np.zeros((m1, self.n_states))
        T[0] = np.asarray(T0, dtype=float)
        for k in range(m1 - 1):
            T[k + 1] = self.step(T[k], u[k], u[k + 1], w[k], w[k + 1])
        y = T @ self.C.T + u @ self.D.T
        return T, y


def exact_discretization(A, B, W, C, D, dt: float) -> DiscreteModel:
    """Discretize (A, B, W, C, D) exactly for piecewise-linear inputs."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    D = np.asarray(D, dtype=float)
    phi, h1, h2 = phi_integrals(A, dt)
    gu0 = h1 @ B
    gu1 = h2 @ B / dt
    gw0 = h1 @ W
    gw1 = h2 @ W / dt
    eye = np.eye(A.shape[0])
    return DiscreteModel(
        dt=dt,
        Gx=phi,
        Gu0=gu0,
        Gu1=gu1,
        Gw0=gw0,
        Gw1=gw1,
        Ad=phi,
        Bd=(phi - eye) @ gu1 + gu0,
        Wd=(phi - eye) @ gw1 + gw0,
        Cd=C,
        Dd=C @ gu1 + D,
        Vd=C @ gw1,
        C=C,
        D=D,
    )


@dataclass(frozen=True)
class LiftedModel:
    """Dense horizon maps of the discrete model.

    Knot outputs:   y_stack = F T0 + G u_stack + H w_stack
    Final state:    T(M)    = ST T0 + SU u_stack + SW w_stack

    Stacks are knot-major: u_stack = [u(0); u(1); ...; u(M)], likewise for
    w and y. y(0) depends only on T0 and u(0) since the shifted-state terms
    cancel there.
    """

    M: int
    dt: float
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    ST: np.ndarray
    SU: np.ndarray
    SW: np.ndarray
    n_outputs: int
    n_inputs: int
    n_dist: int

    def outputs(self, T0, u, w) -> np.ndarray:
        """Knot outputs with (M+1, .)-shaped series, returned (M+1, n_outputs)."""
        ustack = np.asarray(u, dtype=float).reshape(-1)
        wstack = np.asarray(w, dtype=float).reshape(-1)
        y = self.F @ np.asarray(T0, dtype=float) + self.G @ ustack + self.H @ wstack
        return y.reshape(self.M + 1, self.n_outputs)

    def final_state(self, T0, u, w) -> np.ndarray:
        ustack = np.asarray(u, dtype=float).reshape(-1)
        wstack = np.asarray(w, dtype=float).reshape(-1)
        return self.ST @ np.asarray(T0, dtype=float) + self.SU @ ustack + self.SW @ wstack


def lift(model: DiscreteModel, M: int) -> LiftedModel:
    """Unroll the recursion into dense maps over an M-slot horizon."""
    if M < 1:
        raise ValueError("horizon must contain at least one slot")
    n = model.n_states
    nu = model.n_inputs
    nw = model.n_dist
    ny = model.n_outputs

    F = np.zeros(((M + 1) * ny, n))
    G = np.zeros(((M + 1) * ny, (M + 1) * nu))
    H = np.zeros(((M + 1) * ny, (M + 1) * nw))

    # Knot 0: the hold has not acted yet.
    F[:ny] = model.C
    G[:ny, :nu] = model.D

    du0 = model.Gu0 - model.Gu1  # weight of u(0) after one transition
    dw0 = model.Gw0 - model.Gw1

    # Powers C Ad^k accumulated row by row.
    CAk = model.Cd.copy()  # C Ad^0
    for k in range(1, M + 1):
        r = slice(k * ny, (k + 1) * ny)
        # C Ad^{k-1} available before update; stash for the u(0)/w(0) term.
        CA_prev = CAk
        CAk = CAk @ model.Ad
        F[r] = CAk
        G[r, :nu] = CA_prev @ du0
        H[r, :nw] = CA_prev @ dw0
        G[r, k * nu : (k + 1) * nu] = model.Dd
        H[r, k * nw : (k + 1) * nw] = model.Vd
        # Interior knots h = 1..k-1 carry C Ad^{k-1-h} Bd.
        CAh = model.Cd
        for h in range(k - 1, 0, -1):
            G[r, h * nu : (h + 1) * nu] = CAh @ model.Bd
            H[r, h * nw : (h + 1) * nw] = CAh @ model.Wd
            CAh = CAh @ model.Ad

    ST = np.linalg.matrix_power(model.Gx, M)
    SU = np.zeros((n, (M + 1) * nu))
    SW = np.zeros((n, (M + 1) * nw))
    Gpow = np.eye(n)  # Gx^{M-1-h} built from h = M-1 downward
    SU[:, M * nu :] = model.Gu1
    SW[:, M * nw :] = model.Gw1
    for h in range(M - 1, -1, -1):
        if h == 0:
            SU[:, :nu] = Gpow @ du0
            SW[:, :nw] = Gpow @ dw0
        else:
            SU[:, h * nu : (h + 1) * nu] = Gpow @ model.Bd
            SW[:, h * nw : (h + 1) * nw] = Gpow @ model.Wd
        Gpow = Gpow @ model.Gx

    return LiftedModel(
        M=M, dt=model.dt, F=F, G=G, H=H, ST=ST, SU=SU, SW=SW,
        n_outputs=ny, n_inputs=nu, n_dist=nw,
    )


def pairwise_trapezoid(M: int, n: int, dt: float) -> np.ndarray:
    """Map knot values to per-slot trapezoid integrals.

    Returns the (M*n, (M+1)*n) matrix P with row block k (1-based slots)
    equal to (dt/2)(v(k-1) + v(k)).
    """
    P = np.zeros((M, M + 1))
    for k in range(M):
        P[k, k] = 0.5 * dt
        P[k, k + 1] = 0.5 * dt
    return np.kron(P, np.eye(n))


def slot_energy_maps(lifted: LiftedModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Wall-to-zone energy per slot from the lifted output maps.

    E_w(k) = (dt/2)(y(k-1) + y(k)) for k = 1..M. Returns (Ft, Gt, Ht) with
    E_w_stack = Ft T0 + Gt u_stack + Ht w_stack, stacked slot-major.
    """
    P = pairwise_trapezoid(lifted.M, lifted.n_outputs, lifted.dt)
    return P @ lifted.F, P @ lifted.G, P @ lifted.H


def zone_capacity_map(M: int, zone_capacities) -> np.ndarray:
    """Energy released by the zone air mass per slot.

    E_z(k) = -C_z (u(k) - u(k-1)): lowering the setpoint over a slot means
    the air itself must be cooled, raising it releases stored cold. Returns
    the (M*nz, (M+1)*nz) map.
    """
    cz = np.diag(np.asarray(zone_capacities, dtype=float))
    nz = cz.shape[0]
    Z = np.zeros((M * nz, (M + 1) * nz))
    for k in range(1, M + 1):
        r = slice((k - 1) * nz, k * nz)
        Z[r, (k - 1) * nz : k * nz] = cz
        Z[r, k * nz : (k + 1) * nz] = -cz
    return Z


def people_energy_map(
    occupancy: np.ndarray, dt: float, p1_lin: float, p0_lin: float
) -> tuple[np.ndarray, np.ndarray]:
    """Occupant heat per slot as an affine map of the setpoint knots.

    ``occupancy`` holds head counts on knots, shape (M+1,) or (M+1, nz).
    Both occupancy and setpoint vary linearly inside a slot, so their
    product integrates exactly to quadratic weights:

        E_p(k) = q2(k) u(k) + q1(k) u(k-1) + q0(k)
        q2(k) = (p1 dt / 6)(2 n(k) + n(k-1))
        q1(k) = (p1 dt / 6)(n(k) + 2 n(k-1))
        q0(k) = (p0 dt / 2)(n(k) + n(k-1))

    Returns (N, n0) with E_p_stack = N u_stack + n0.
    """
    occ = np.asarray(occupancy, dtype=float)
    if occ.ndim == 1:
        occ = occ[:, None]
    m1, nz = occ.shape
    M = m1 - 1
    N = np.zeros((M * nz, (M + 1) * nz))
    n0 = np.zeros(M * nz)
    for k in range(1, M + 1):
        r = slice((k - 1) * nz, k * nz)
        q2 = (p1_lin * dt / 6.0) * (2.0 * occ[k] + occ[k - 1])
        q1 = (p1_lin * dt / 6.0) * (occ[k] + 2.0 * occ[k - 1])
        N[r, k * nz : (k + 1) * nz] = np.diag(q2)
        N[r, (k - 1) * nz : k * nz] = np.diag(q1)
        n0[r] = (p0_lin * dt / 2.0) * (occ[k] + occ[k - 1])
    return N, n0


def internal_energy_terms(
    M: int,
    dt: float,
    apertures,
    base_loads,
    occupied_loads,
    occupancy: np.ndarray,
    n_dist: int,
    solar_slot: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Solar and fixed internal gains per slot.

    E_int(k) = (dt/2) a_j (QS(k) + QS(k-1)) + dt lam_j
               + (dt/2) kap_j (1[n(k)>0] + 1[n(k-1)>0])

    The solar part is returned as a map Mw on the stacked disturbance knots
    (selecting column ``solar_slot``), the rest as a constant vector.
    """
    occ = np.asarray(occupancy, dtype=float)
    if occ.ndim == 1:
        occ = occ[:, None]
    nz = occ.shape[1]
    ap = np.asarray(apertures, dtype=float)
    lam = np.asarray(base_loads, dtype=float)
    kap = np.asarray(occupied_loads, dtype=float)
    Mw = np.zeros((M * nz, (M + 1) * n_dist))
    b = np.zeros(M * nz)
    for k in range(1, M + 1):
        for j in range(nz):
            row = (k - 1) * nz + j
            Mw[row, (k - 1) * n_dist + solar_slot] += 0.5 * dt * ap[j]
            Mw[row, k * n_dist + solar_slot] += 0.5 * dt * ap[j]
            occ_frac = 0.5 * (float(occ[k - 1, j] > 0) + float(occ[k, j] > 0))
            b[row] = dt * lam[j] + dt * kap[j] * occ_frac
    return Mw, b


def cooling_energy_map(
    lifted: LiftedModel,
    zones,
    occupancy: np.ndarray,
    p1_lin: float,
    p0_lin: float,
    solar_slot: int,
):
    """Affine map from (T0, setpoints, disturbances) to slot cooling demand.

    E_c(k) collects everything the plant must remove from each zone during
    slot k: wall heat, occupant heat, solar and fixed internal gains, and
    the zone air capacity term. Returns (Ac, Bc, Wc, b) with

        E_c_stack = Ac T0 + Bc u_stack + Wc w_stack + b.
    """
    occ = np.asarray(occupancy, dtype=float)
    if occ.ndim == 1:
        occ = occ[:, None]
    if occ.shape != (lifted.M + 1, len(zones)):
        raise ValueError(
            f"occupancy shape {occ.shape} does not match "
            f"(M+1, n_zones) = ({lifted.M + 1}, {len(zones)})"
        )
    Ft, Gt, Ht = slot_energy_maps(lifted)
    Z = zone_capacity_map(lifted.M, [z.heat_capacity for z in zones])
    N, n0 = people_energy_map(occ, lifted.dt, p1_lin, p0_lin)
    Mw, b_int = internal_energy_terms(
        lifted.M,
        lifted.dt,
        [z.solar_aperture for z in zones],
        [z.base_load for z in zones],
        [z.occupied_load for z in zones],
        occ,
        lifted.n_dist,
        solar_slot,
    )
    return Ft, Gt + Z + N, Ht + Mw, n0 + b_int
