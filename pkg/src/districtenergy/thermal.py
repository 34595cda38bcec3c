"""Continuous-time thermal model of a multi-zone building.

Walls are one-dimensional stacks of homogeneous slices. Each slice exchanges
heat with its neighbours by conduction; boundary slices additionally exchange
heat by convection with the adjacent zone air or the outdoor air, and by
long/shortwave radiation when facing outside. Stacking all slice balances
yields the linear system

    dT/dt = A T + B T_z + W d
    Q     = C T + D T_z

with wall-slice temperatures T, zone setpoints T_z, the disturbance vector
d = [T_out, T_gnd, Q_S, Q_L, 1] and Q the thermal power flowing from the
walls into each zone.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

STEFAN_BOLTZMANN = 5.670374419e-8  # W/(m^2 K^4)

# Occupant heat rate Q_p = n_p * (P2*Tz^2 + P1*Tz + P0), empirical fit.
PEOPLE_P2 = -0.22  # W/K^2
PEOPLE_P1 = 125.12  # W/K
PEOPLE_P0 = -1.7685e4  # W

# Disturbance vector slots.
D_TOUT, D_TGND, D_QS, D_QL, D_ONE = 0, 1, 2, 3, 4
N_DIST = 5

OUTSIDE = "outside"
GROUND = "ground"


class ModelError(ValueError):
    """Raised for inconsistent building descriptions."""


@dataclass(frozen=True)
class SliceSpec:
    """One homogeneous vertical layer of a wall.

    Parameters
    ----------
    thickness : float
        Layer thickness in m.
    density : float
        Material density in kg/m^3. May be 0 for idealized insulation.
    conductivity : float
        Thermal conductivity in W/(m K).
    specific_heat : float
        Specific heat capacity in J/(kg K). May be 0 for idealized insulation.
    """

    thickness: float
    density: float
    conductivity: float
    specific_heat: float

    def __post_init__(self):
        if self.thickness <= 0 or self.conductivity <= 0:
            raise ModelError(
                f"slice thickness and conductivity must be positive, got "
                f"t={self.thickness}, k={self.conductivity}"
            )
        if self.density < 0 or self.specific_heat < 0:
            raise ModelError("slice density and specific heat must be >= 0")

    @property
    def heat_capacity(self) -> float:
        """Thermal capacity per unit area, rho*c_p*t in J/(K m^2)."""
        return self.density * self.specific_heat * self.thickness


@dataclass(frozen=True)
class WallSpec:
    """A wall as an ordered stack of slices (inside -> outside).

    ``inner`` and ``outer`` name what each face is exposed to: a zone index
    (int), ``"outside"``, or ``"ground"``. Ground-facing boundaries exchange
    heat by conduction only (no convection, no radiation). ``h_in``/``h_out``
    are the convective coefficients of the inner/outer face in W/(m^2 K),
    ignored for ground faces. Radiative properties apply to faces exposed to
    the outside; faces exposed to a zone radiate only through the optional
    view-factor coupling set up at building level.
    """

    slices: tuple[SliceSpec, ...]
    area: float
    inner: int | str
    outer: int | str
    h_in: float = 0.0
    h_out: float = 0.0
    shortwave_absorbance: float = 0.0
    longwave_absorbance: float = 0.0
    emissivity: float = 0.0
    internal_gain: tuple[float, ...] | None = None  # W/m^2 per slice
    name: str = ""

    def __post_init__(self):
        if len(self.slices) < 1:
            raise ModelError("wall needs at least one slice")
        if self.area <= 0:
            raise ModelError("wall area must be positive")
        for value, what in (
            (self.shortwave_absorbance, "shortwave absorbance"),
            (self.longwave_absorbance, "longwave absorbance"),
            (self.emissivity, "emissivity"),
        ):
            if not 0.0 <= value <= 1.0:
                raise ModelError(f"{what} must lie in [0, 1], got {value}")
        if self.internal_gain is not None and len(self.internal_gain) != len(self.slices):
            raise ModelError("internal_gain must have one entry per slice")
        for side in (self.inner, self.outer):
            if not (isinstance(side, int) or side in (OUTSIDE, GROUND)):
                raise ModelError(f"boundary must be a zone index, 'outside' or 'ground': {side!r}")

    @property
    def n_slices(self) -> int:
        return len(self.slices)


@dataclass(frozen=True)
class ZoneSpec:
    """Thermal zone parameters.

    ``heat_capacity`` is the zone air/content capacity in J/K,
    ``solar_aperture`` the effective window aperture in m^2 (lumping
    transmittance, shading and incidence effects), ``base_load`` the constant
    internal heat rate in W, ``occupied_load`` the additional heat rate in W
    while the zone is occupied, and ``comfort_temp`` the linearization point
    in K for the occupant heat model.
    """

    heat_capacity: float
    solar_aperture: float = 0.0
    base_load: float = 0.0
    occupied_load: float = 0.0
    comfort_temp: float = 295.15
    name: str = ""

    def __post_init__(self):
        if self.heat_capacity <= 0:
            raise ModelError("zone heat capacity must be positive")
        if self.solar_aperture < 0 or self.occupied_load < 0:
            raise ModelError("solar aperture and occupied load must be >= 0")


def disturbance_vector(t_out: float, t_gnd: float, q_s: float, q_l: float) -> np.ndarray:
    """Pack outdoor temperature, ground temperature and radiation into d.

    The trailing 1 carries constant terms (radiation linearization offsets
    and internal generation) through the linear dynamics.
    """
    if t_out <= 0 or t_gnd <= 0:
        raise ModelError("temperatures must be positive (kelvin)")
    return np.array([t_out, t_gnd, q_s, q_l, 1.0])


def people_heat_coeffs(comfort_temp: float) -> tuple[float, float]:
    """Per-occupant linearized heat rate coefficients.

    The quadratic occupant model is linearized at ``comfort_temp`` so that
    Q_p = n_p * (p1_lin * T_z + p0_lin). Returns ``(p1_lin, p0_lin)`` in
    W/K and W.
    """
    if not 283.0 <= comfort_temp <= 313.0:
        raise ModelError(f"comfort temperature {comfort_temp} K outside sensible range")
    p1_lin = 2.0 * PEOPLE_P2 * comfort_temp + PEOPLE_P1
    p0_lin = PEOPLE_P0 - PEOPLE_P2 * comfort_temp**2
    return p1_lin, p0_lin


def people_heat_exact(n_p: float, t_z: float) -> float:
    """Occupant heat rate from the quadratic model, in W."""
    return n_p * (PEOPLE_P2 * t_z**2 + PEOPLE_P1 * t_z + PEOPLE_P0)


def radiated_power_linear(mean_temp: float) -> tuple[float, float]:
    """Tangent-line coefficients of sigma*T^4 at ``mean_temp``.

    Returns ``(slope, offset)`` with Q_r(T) ~= slope*T + offset.
    """
    slope = 4.0 * STEFAN_BOLTZMANN * mean_temp**3
    offset = -3.0 * STEFAN_BOLTZMANN * mean_temp**4
    return slope, offset


@dataclass(frozen=True)
class BuildingModel:
    """Assembled continuous-time model of walls coupled to zones."""

    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    C: np.ndarray
    D: np.ndarray
    walls: tuple[WallSpec, ...]
    zones: tuple[ZoneSpec, ...]
    mean_slice_temps: np.ndarray
    wall_offsets: tuple[int, ...] = field(default=())

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_zones(self) -> int:
        return len(self.zones)

    def state_index(self, wall: int, slice_: int) -> int:
        """State coordinate of slice ``slice_`` (0-based, inside first) of wall ``wall``."""
        return self.wall_offsets[wall] + slice_

    def zone_capacities(self) -> np.ndarray:
        return np.array([z.heat_capacity for z in self.zones])


def _conduction_coefficients(slices: tuple[SliceSpec, ...]) -> np.ndarray:
    """Inter-slice conductances as series conductance of two half slices, W/(m^2 K)."""
    k = np.zeros(len(slices) - 1)
    for i in range(len(slices) - 1):
        a, b = slices[i], slices[i + 1]
        k[i] = 1.0 / (a.thickness / (2.0 * a.conductivity) + b.thickness / (2.0 * b.conductivity))
    return k


def _half_slice_conductance(s: SliceSpec) -> float:
    return 2.0 * s.conductivity / s.thickness


def assemble_wall(
    spec: WallSpec,
    mean_temps,
    n_zones: int,
    min_capacity: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-wall slice-balance matrices (A_w, B_w, W_w).

    ``mean_temps`` gives the radiation linearization temperature of each
    slice in K. Zero-capacity idealized insulation slices are floored at
    ``min_capacity`` J/(K m^2) to keep the balance well posed.
    """
    m = spec.n_slices
    mean_temps = np.asarray(mean_temps, dtype=float)
    if mean_temps.shape != (m,):
        raise ModelError(f"expected {m} mean slice temperatures, got shape {mean_temps.shape}")
    if min_capacity <= 0:
        raise ModelError("min_capacity must be positive")

    caps = np.array([max(s.heat_capacity, min_capacity) for s in spec.slices])
    kcond = _conduction_coefficients(spec.slices)

    A = np.zeros((m, m))
    B = np.zeros((m, n_zones))
    W = np.zeros((m, N_DIST))

    for i in range(m):
        if i > 0:
            A[i, i - 1] += kcond[i - 1] / caps[i]
            A[i, i] -= kcond[i - 1] / caps[i]
        if i < m - 1:
            A[i, i + 1] += kcond[i] / caps[i]
            A[i, i] -= kcond[i] / caps[i]

    def couple_boundary(i: int, side, h: float) -> None:
        c = caps[i]
        if side == GROUND:
            # Conduction only into the ground reservoir through a half slice.
            k_gnd = _half_slice_conductance(spec.slices[i])
            A[i, i] -= k_gnd / c
            W[i, D_TGND] += k_gnd / c
            return
        if isinstance(side, int):
            if not 0 <= side < n_zones:
                raise ModelError(f"wall {spec.name!r} references undefined zone {side}")
            A[i, i] -= h / c
            B[i, side] += h / c
            return
        # Outside face: convection plus linearized gray-body radiation.
        A[i, i] -= h / c
        W[i, D_TOUT] += h / c
        W[i, D_QS] += spec.shortwave_absorbance / c
        W[i, D_QL] += spec.longwave_absorbance / c
        if spec.emissivity > 0.0:
            slope, offset = radiated_power_linear(mean_temps[i])
            A[i, i] -= spec.emissivity * slope / c
            W[i, D_ONE] += -spec.emissivity * offset / c

    couple_boundary(0, spec.inner, spec.h_in)
    couple_boundary(m - 1, spec.outer, spec.h_out)

    if spec.internal_gain is not None:
        for i, q in enumerate(spec.internal_gain):
            W[i, D_ONE] += q / caps[i]

    return A, B, W


def assemble_building(
    walls,
    zones,
    mean_slice_temp: float = 295.15,
    mean_slice_temps=None,
    view_factors=None,
    min_capacity: float = 1.0,
) -> BuildingModel:
    """Assemble the full building model from wall and zone descriptions.

    Parameters
    ----------
    walls, zones : sequences of WallSpec and ZoneSpec
    mean_slice_temp : float
        Scalar radiation linearization temperature used for every slice
        unless ``mean_slice_temps`` overrides it.
    mean_slice_temps : sequence of arrays, optional
        Per-wall arrays of per-slice linearization temperatures.
    view_factors : dict, optional
        Long-wave radiation coupling between interior faces, keyed by
        ``((wall, face), (other_wall, other_face))`` with face in
        {"inner", "outer"} and values F >= 0; for each emitting face the
        factors must sum to at most 1. Disabled (all zero) by default.
    min_capacity : float
        Floor in J/(K m^2) for idealized zero-capacity slices.

    Returns
    -------
    BuildingModel
        With A block-diagonal over walls (plus any view-factor coupling),
        stacked B and W, and output matrices C, D mapping slice and zone
        temperatures to the per-zone wall heat flow Q.
    """
    walls = tuple(walls)
    zones = tuple(zones)
    n_z = len(zones)
    if n_z == 0:
        raise ModelError("need at least one zone")

    for w_idx, w in enumerate(walls):
        for side in (w.inner, w.outer):
            if isinstance(side, int) and not 0 <= side < n_z:
                raise ModelError(
                    f"wall {w.name or w_idx} references zone {side}, only {n_z} zones declared"
                )

    offsets = []
    n = 0
    for w in walls:
        offsets.append(n)
        n += w.n_slices

    if mean_slice_temps is None:
        mean_slice_temps = [np.full(w.n_slices, mean_slice_temp) for w in walls]
    mean_all = np.concatenate([np.asarray(t, dtype=float) for t in mean_slice_temps])
    if mean_all.shape != (n,):
        raise ModelError("mean_slice_temps do not match total slice count")

    A = np.zeros((n, n))
    B = np.zeros((n, n_z))
    W = np.zeros((n, N_DIST))
    for w_idx, w in enumerate(walls):
        o = offsets[w_idx]
        Aw, Bw, Ww = assemble_wall(
            w, mean_all[o : o + w.n_slices], n_z, min_capacity=min_capacity
        )
        A[o : o + w.n_slices, o : o + w.n_slices] = Aw
        B[o : o + w.n_slices, :] = Bw
        W[o : o + w.n_slices, :] = Ww

    caps = np.array(
        [max(s.heat_capacity, min_capacity) for w in walls for s in w.slices]
    )

    def face_state(wall: int, face: str) -> int:
        return offsets[wall] + (0 if face == "inner" else walls[wall].n_slices - 1)

    if view_factors:
        _apply_view_factors(A, W, walls, view_factors, face_state, mean_all, caps)

    # Output: Q_j = sum over adjacent walls of S_w h (T_boundary - T_zj).
    C = np.zeros((n_z, n))
    D = np.zeros((n_z, n_z))
    adjacency = [0] * n_z
    for w_idx, w in enumerate(walls):
        for face, side, h in (("inner", w.inner, w.h_in), ("outer", w.outer, w.h_out)):
            if isinstance(side, int):
                idx = face_state(w_idx, face)
                C[side, idx] += w.area * h
                D[side, side] -= w.area * h
                adjacency[side] += 1
    for j, count in enumerate(adjacency):
        if count == 0:
            warnings.warn(
                f"zone {zones[j].name or j} has no adjacent wall faces", stacklevel=2
            )

    return BuildingModel(
        A=A, B=B, W=W, C=C, D=D,
        walls=walls, zones=zones,
        mean_slice_temps=mean_all,
        wall_offsets=tuple(offsets),
    )


def _apply_view_factors(A, W, walls, view_factors, face_state, mean_all, caps):
    """Add linearized interior long-wave exchange between wall faces."""
    emitted = {}
    for (src, dst), f in view_factors.items():
        if f < 0:
            raise ModelError(f"view factor {src}->{dst} is negative")
        emitted[src] = emitted.get(src, 0.0) + f
    for src, total in emitted.items():
        if total > 1.0 + 1e-12:
            raise ModelError(f"view factors leaving {src} sum to {total} > 1")

    for (src, dst), f in view_factors.items():
        if f == 0.0:
            continue
        w_s, face_s = src
        w_d, face_d = dst
        i = face_state(w_s, face_s)
        j = face_state(w_d, face_d)
        eps_s = walls[w_s].emissivity
        eps_d = walls[w_d].emissivity
        slope_s, offset_s = radiated_power_linear(mean_all[i])
        slope_d, offset_d = radiated_power_linear(mean_all[j])
        c = caps[i]
        # R_i += F * (eps_d Q_r(T_j) - eps_s Q_r(T_i)), linearized in both.
        A[i, j] += f * eps_d * slope_d / c
        A[i, i] -= f * eps_s * slope_s / c
        W[i, D_ONE] += f * (eps_d * offset_d - eps_s * offset_s) / c
