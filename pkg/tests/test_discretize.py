"""Oracle tests for the exact discretization and horizon lifting.

The matrix-moment computation is checked against closed scalar forms, a
truncated Taylor series and high-resolution RK4; the lifted maps against
the step recursion they unroll; the energy maps against direct quadrature.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import quad_slot, rk4_foh, rk4_trajectory
from districtenergy.discretize import (
    cooling_energy_map,
    exact_discretization,
    internal_energy_terms,
    lift,
    pairwise_trapezoid,
    people_energy_map,
    phi_integrals,
    phi_integrals_series,
    slot_energy_maps,
    zone_capacity_map,
)
from districtenergy.thermal import (
    D_QS,
    OUTSIDE,
    SliceSpec,
    WallSpec,
    ZoneSpec,
    assemble_building,
    people_heat_coeffs,
)

RNG = np.random.default_rng(20240817)


def small_building():
    concrete = SliceSpec(0.1, 2300.0, 1.4, 750.0)
    insul = SliceSpec(0.06, 30.0, 0.04, 1200.0)
    wall = WallSpec(
        slices=(concrete, insul, concrete), area=15.0, inner=0, outer=OUTSIDE,
        h_in=3.0, h_out=20.0, emissivity=0.9, shortwave_absorbance=0.6,
    )
    zone = ZoneSpec(heat_capacity=4e6, solar_aperture=6.0, base_load=150.0,
                    occupied_load=50.0)
    return assemble_building([wall, wall], [zone])


def random_stable(n, scale=1.0):
    M = RNG.normal(size=(n, n)) * scale
    A = -(M @ M.T) - 0.1 * np.eye(n)
    return A


class TestPhiIntegrals:
    def test_scalar_closed_form(self):
        a, dt = -0.37, 2.5
        phi, h1, h2 = phi_integrals(np.array([[a]]), dt)
        assert phi[0, 0] == pytest.approx(np.exp(a * dt), rel=1e-14)
        assert h1[0, 0] == pytest.approx((np.exp(a * dt) - 1.0) / a, rel=1e-13)
        assert h2[0, 0] == pytest.approx(
            (np.exp(a * dt) - 1.0 - a * dt) / a**2, rel=1e-13
        )

    def test_matches_series(self):
        A = random_stable(4, scale=0.3)
        dt = 0.7
        for got, ref in zip(phi_integrals(A, dt), phi_integrals_series(A, dt, order=40)):
            assert np.allclose(got, ref, rtol=1e-12, atol=1e-14)

    def test_zero_dynamics_limits(self):
        Z = np.zeros((3, 3))
        phi, h1, h2 = phi_integrals(Z, 4.0)
        assert np.allclose(phi, np.eye(3))
        assert np.allclose(h1, 4.0 * np.eye(3))
        assert np.allclose(h2, 8.0 * np.eye(3))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            phi_integrals(np.zeros((2, 3)), 1.0)
        with pytest.raises(ValueError):
            phi_integrals(np.zeros((2, 2)), 0.0)


class TestExactStep:
    def test_building_step_matches_rk4(self):
        model = small_building()
        dt = 600.0
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, dt)
        T0 = 290.0 + RNG.normal(size=model.n_states)
        u0, u1 = np.array([294.0]), np.array([296.0])
        w0 = np.array([300.0, 287.0, 200.0, 50.0, 1.0])
        w1 = np.array([302.0, 287.0, 450.0, 60.0, 1.0])
        got = disc.step(T0, u0, u1, w0, w1)
        ref = rk4_foh(model.A, model.B, model.W, T0, u0, u1, w0, w1, dt, n_sub=1000)
        assert np.max(np.abs(got - ref)) < 1e-9

    def test_constant_input_steady_state_fixed_point(self):
        model = small_building()
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, 900.0)
        u = np.array([295.0])
        w = np.array([303.0, 288.0, 300.0, 40.0, 1.0])
        T_ss = np.linalg.solve(model.A, -(model.B @ u + model.W @ w))
        assert np.allclose(disc.step(T_ss, u, u, w, w), T_ss, atol=1e-8)

    def test_zero_hold_limits(self):
        # With A = 0 the moment integrals collapse to dt B and dt/2 B.
        B = RNG.normal(size=(3, 2))
        W = RNG.normal(size=(3, 5))
        disc = exact_discretization(np.zeros((3, 3)), B, W, np.zeros((1, 3)),
                                    np.zeros((1, 2)), 2.0)
        assert np.allclose(disc.Gu0, 2.0 * B)
        assert np.allclose(disc.Gu1, 1.0 * B)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 5), st.floats(0.1, 5.0))
    def test_random_systems_match_rk4(self, n, dt):
        rng = np.random.default_rng(n * 1000 + int(dt * 10))
        M = rng.normal(size=(n, n))
        A = -(M @ M.T) / n - 0.05 * np.eye(n)
        B = rng.normal(size=(n, 1))
        W = rng.normal(size=(n, 2))
        disc = exact_discretization(A, B, W, np.eye(n), np.zeros((n, 1)), dt)
        T0 = rng.normal(size=n)
        u0, u1 = rng.normal(size=1), rng.normal(size=1)
        w0, w1 = rng.normal(size=2), rng.normal(size=2)
        got = disc.step(T0, u0, u1, w0, w1)
        ref = rk4_foh(A, B, W, T0, u0, u1, w0, w1, dt, n_sub=800)
        assert np.max(np.abs(got - ref)) < 1e-8 * max(1.0, np.max(np.abs(ref)))


class TestShiftedState:
    def test_shifted_recursion_equals_physical(self):
        model = small_building()
        dt = 600.0
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, dt)
        M = 6
        u = 294.0 + RNG.normal(size=(M + 1, 1))
        w = np.column_stack([
            300.0 + RNG.normal(size=M + 1),
            np.full(M + 1, 287.0),
            RNG.uniform(0, 500, M + 1),
            RNG.uniform(0, 80, M + 1),
            np.ones(M + 1),
        ])
        T0 = 292.0 + RNG.normal(size=disc.n_states)
        T, y = disc.simulate(T0, u, w)

        xi = T0 - disc.Gu1 @ u[0] - disc.Gw1 @ w[0]
        for k in range(M):
            y_k = disc.Cd @ xi + disc.Dd @ u[k] + disc.Vd @ w[k]
            assert np.allclose(y_k, y[k], atol=1e-9)
            xi = disc.Ad @ xi + disc.Bd @ u[k] + disc.Wd @ w[k]
        # Recover the physical state at the end.
        T_M = xi + disc.Gu1 @ u[M] + disc.Gw1 @ w[M]
        assert np.allclose(T_M, T[M], atol=1e-9)


class TestLift:
    def _series(self, disc, M):
        u = 293.0 + RNG.normal(size=(M + 1, disc.n_inputs))
        w = np.column_stack([
            298.0 + 4.0 * np.sin(np.linspace(0, 3, M + 1)),
            np.full(M + 1, 286.0),
            RNG.uniform(0, 600, M + 1),
            RNG.uniform(0, 70, M + 1),
            np.ones(M + 1),
        ])
        T0 = 291.0 + RNG.normal(size=disc.n_states)
        return T0, u, w

    def test_lifted_outputs_match_recursion(self):
        model = small_building()
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, 900.0)
        M = 9
        lifted = lift(disc, M)
        T0, u, w = self._series(disc, M)
        _, y_rec = disc.simulate(T0, u, w)
        y_lift = lifted.outputs(T0, u, w)
        assert np.max(np.abs(y_lift - y_rec)) < 1e-12 * max(1.0, np.max(np.abs(y_rec)))

    def test_lifted_final_state_matches_recursion(self):
        model = small_building()
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, 900.0)
        M = 7
        lifted = lift(disc, M)
        T0, u, w = self._series(disc, M)
        T, _ = disc.simulate(T0, u, w)
        assert np.allclose(lifted.final_state(T0, u, w), T[M], atol=1e-9)

    def test_first_knot_ignores_disturbance(self):
        model = small_building()
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, 600.0)
        lifted = lift(disc, 3)
        assert np.allclose(lifted.H[: disc.n_outputs], 0.0)
        assert np.allclose(lifted.F[: disc.n_outputs], model.C)

    def test_horizon_one(self):
        model = small_building()
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, 600.0)
        lifted = lift(disc, 1)
        T0, u, w = self._series(disc, 1)
        _, y = disc.simulate(T0, u, w)
        assert np.allclose(lifted.outputs(T0, u, w), y, atol=1e-10)


class TestEnergyMaps:
    def test_pairwise_trapezoid_values(self):
        P = pairwise_trapezoid(3, 1, 2.0)
        v = np.array([1.0, 3.0, 5.0, 7.0])
        assert np.allclose(P @ v, [4.0, 8.0, 12.0])

    def test_zone_capacity_map_sign(self):
        Z = zone_capacity_map(2, [10.0])
        u = np.array([294.0, 293.0, 295.0])
        # Setpoint drop stores cold (negative released energy demand offset):
        # E_z(1) = -C(u1-u0) = +10, E_z(2) = -C(u2-u1) = -20.
        assert np.allclose(Z @ u, [10.0, -20.0])

    def test_people_energy_matches_quadrature(self):
        dt = 600.0
        p1, p0 = people_heat_coeffs(295.15)
        occ = np.array([0.0, 4.0, 6.0, 0.0])
        u = np.array([294.0, 295.0, 296.5, 294.5])
        N, n0 = people_energy_map(occ, dt, p1, p0)
        got = N @ u + n0
        for k in range(1, 4):
            def rate(t, k=k):
                a = t / dt
                n = (1 - a) * occ[k - 1] + a * occ[k]
                tz = (1 - a) * u[k - 1] + a * u[k]
                return n * (p1 * tz + p0)
            ref = quad_slot(rate, 0.0, dt)
            assert got[k - 1] == pytest.approx(ref, rel=1e-10)

    def test_internal_energy_terms(self):
        dt = 600.0
        occ = np.array([0.0, 2.0, 0.0])
        solar = np.array([100.0, 300.0, 200.0])
        Mw, b = internal_energy_terms(
            2, dt, apertures=[5.0], base_loads=[40.0], occupied_loads=[60.0],
            occupancy=occ, n_dist=5, solar_slot=D_QS,
        )
        w = np.zeros((3, 5))
        w[:, D_QS] = solar
        got = Mw @ w.reshape(-1) + b
        # slot1: 5*(100+300)/2*600 + 40*600 + 60*600*(0+1)/2
        assert got[0] == pytest.approx(5 * 200 * 600 + 24000 + 18000)
        # slot2: 5*(300+200)/2*600 + 40*600 + 60*600*(1+0)/2
        assert got[1] == pytest.approx(5 * 250 * 600 + 24000 + 18000)

    def test_cooling_energy_bookkeeping(self):
        """Total demanded cooling = wall heat + gains + capacity release,
        verified against quadrature on the simulated trajectory."""
        model = small_building()
        dt = 600.0
        M = 5
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, dt)
        lifted = lift(disc, M)
        p1, p0 = people_heat_coeffs(295.15)
        occ = np.array([0.0, 3.0, 5.0, 5.0, 2.0, 0.0])
        u = np.array([[294.0], [294.5], [295.0], [296.0], [295.5], [294.0]])
        w = np.column_stack([
            301.0 + np.linspace(0, 2, M + 1),
            np.full(M + 1, 287.0),
            np.linspace(100, 500, M + 1),
            np.linspace(20, 60, M + 1),
            np.ones(M + 1),
        ])
        T0 = np.full(disc.n_states, 294.0)
        Ac, Bc, Wc, b = cooling_energy_map(
            lifted, model.zones, occ, p1, p0, solar_slot=D_QS
        )
        got = Ac @ T0 + Bc @ u.reshape(-1) + Wc @ w.reshape(-1) + b

        _, y = disc.simulate(T0, u, w)
        zone = model.zones[0]
        for k in range(1, M + 1):
            wall = 0.5 * dt * (y[k - 1, 0] + y[k, 0])
            cap = -zone.heat_capacity * (u[k, 0] - u[k - 1, 0])
            def people(t, k=k):
                a = t / dt
                n = (1 - a) * occ[k - 1] + a * occ[k]
                tz = (1 - a) * u[k - 1, 0] + a * u[k, 0]
                return n * (p1 * tz + p0)
            ppl = quad_slot(people, 0.0, dt)
            sol = 0.5 * dt * zone.solar_aperture * (w[k - 1, D_QS] + w[k, D_QS])
            base = dt * zone.base_load
            occl = 0.5 * dt * zone.occupied_load * (
                float(occ[k - 1] > 0) + float(occ[k] > 0)
            )
            ref = wall + cap + ppl + sol + base + occl
            assert got[k - 1] == pytest.approx(ref, rel=1e-9, abs=1e-6)

    def test_rk4_energy_consistency(self):
        """Slot trapezoid energies track the true integral of wall heat to
        second order; verify against dense quadrature on a fine trajectory."""
        model = small_building()
        dt = 600.0
        disc = exact_discretization(model.A, model.B, model.W, model.C, model.D, dt)
        lifted = lift(disc, 2)
        u = np.array([[294.0], [294.0], [294.0]])
        w = np.tile([301.0, 287.0, 250.0, 30.0, 1.0], (3, 1))
        T0 = np.full(disc.n_states, 294.0)
        Ft, Gt, Ht = slot_energy_maps(lifted)
        E = Ft @ T0 + Gt @ u.reshape(-1) + Ht @ w.reshape(-1)
        ref = rk4_trajectory(model.A, model.B, model.W, T0, u, w, dt, n_sub=200)
        y_ref = ref @ model.C.T + u @ model.D.T
        trap = 0.5 * dt * (y_ref[:-1] + y_ref[1:]).sum(axis=1)
        assert np.allclose(E, trap, rtol=1e-9, atol=1e-6)
