"""Independent reference computations shared by the test suite.

Everything here deliberately avoids the package's own matrix-exponential
and lifting code paths so test comparisons stay meaningful.
"""

import numpy as np


def rk4_foh(A, B, W, T0, u0, u1, w0, w1, dt, n_sub=1000):
    """Integrate dT/dt = A T + B u + W w over one slot with RK4.

    Inputs are interpolated linearly between their slot-edge values,
    matching the first-order hold the discretization assumes.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    W = np.asarray(W, float)
    u0 = np.atleast_1d(np.asarray(u0, float))
    u1 = np.atleast_1d(np.asarray(u1, float))
    w0 = np.atleast_1d(np.asarray(w0, float))
    w1 = np.atleast_1d(np.asarray(w1, float))
    T = np.asarray(T0, float).copy()
    h = dt / n_sub

    def f(t, x):
        a = t / dt
        u = (1.0 - a) * u0 + a * u1
        w = (1.0 - a) * w0 + a * w1
        return A @ x + B @ u + W @ w

    t = 0.0
    for _ in range(n_sub):
        k1 = f(t, T)
        k2 = f(t + 0.5 * h, T + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, T + 0.5 * h * k2)
        k4 = f(t + h, T + h * k3)
        T = T + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return T


def rk4_trajectory(A, B, W, T0, u, w, dt, n_sub=1000):
    """Knot states from repeated one-slot RK4 integration."""
    u = np.atleast_2d(np.asarray(u, float))
    w = np.atleast_2d(np.asarray(w, float))
    out = [np.asarray(T0, float)]
    for k in range(u.shape[0] - 1):
        out.append(rk4_foh(A, B, W, out[-1], u[k], u[k + 1], w[k], w[k + 1], dt, n_sub))
    return np.array(out)


def quad_slot(f, t0, t1, n=4001):
    """Composite-Simpson integral of a callable over [t0, t1]; n odd."""
    t = np.linspace(t0, t1, n)
    y = np.array([f(ti) for ti in t])
    h = (t1 - t0) / (n - 1)
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())
