"""Harmonic and autoparallel curves: right-hand sides, integration, action."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45, simpson
from scipy.interpolate import CubicHermiteSpline

from .errors import NonFiniteState, QuadratureError, StepFailure
from .jet import JetPoint
from .metrics import spatial_christoffel, temporal_christoffel
from .spray import semispray_difference

MIN_STEP = 1e-12


def harmonic_rhs(s):
    """``a = -2 H - 2 G`` evaluated at ``(t, x, v)``."""
    def rhs(t, x, v):
        H, G = s(JetPoint(t, x, v))
        return -2.0 * H - 2.0 * G
    return rhs


def autoparallel_rhs(g):
    """``a = -M - N v``."""
    def rhs(t, x, v):
        M, N = g(JetPoint(t, x, v))
        return -M - N @ np.asarray(v, dtype=float)
    return rhs


@dataclass(frozen=True)
class RK4:
    dt: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("RK4 step must be positive")


@dataclass(frozen=True)
class Adaptive:
    """Dormand-Prince 5(4) with the given tolerances."""

    rtol: float = 1e-9
    atol: float = 1e-12

    def __post_init__(self):
        for tol in (self.rtol, self.atol):
            if not 1e-14 <= tol <= 1e-2:
                raise ValueError("adaptive tolerances must lie in [1e-14, 1e-2]")


@dataclass(frozen=True)
class SodeProblem:
    rhs: object
    t0: float
    x0: np.ndarray
    v0: np.ndarray
    t_end: float
    stepper: object = field(default_factory=RK4)

    def __post_init__(self):
        if self.t_end == self.t0:
            raise ValueError("t_end must differ from t0")
        x0 = np.array(self.x0, dtype=float)
        v0 = np.array(self.v0, dtype=float)
        if x0.shape != v0.shape or x0.ndim != 1:
            raise ValueError("x0 and v0 must be vectors of equal length")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "v0", v0)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.x.shape[1]

    def __len__(self):
        return len(self.t)


def _first_order(rhs, n):
    def f(t, z):
        a = np.asarray(rhs(t, z[:n], z[n:]), dtype=float)
        return np.concatenate([z[n:], a])
    return f


def _check_finite(t, z):
    if not np.all(np.isfinite(z)):
        raise NonFiniteState(f"state became non-finite at t = {t:g}")


def _rk4(f, t0, z0, t_end, dt):
    span = t_end - t0
    nsteps = max(1, math.ceil(abs(span) / dt - 1e-9))
    h = span / nsteps
    ts = t0 + h * np.arange(nsteps + 1)
    ts[-1] = t_end
    zs = np.empty((nsteps + 1, z0.size))
    zs[0] = z0
    z = z0
    for k in range(nsteps):
        t = ts[k]
        k1 = f(t, z)
        k2 = f(t + 0.5 * h, z + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, z + 0.5 * h * k2)
        k4 = f(t + h, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check_finite(ts[k + 1], z)
        zs[k + 1] = z
    return ts, zs, {"stepper": "rk4", "steps": nsteps, "dt": abs(h), "rhs_evals": 4 * nsteps}


def _rk45(f, t0, z0, t_end, rtol, atol):
    solver = RK45(f, t0, z0, t_end, rtol=rtol, atol=atol)
    ts, zs = [t0], [z0.copy()]
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(f"adaptive step failed at t = {solver.t:g}: {msg}")
        _check_finite(solver.t, solver.y)
        if solver.step_size is not None and solver.step_size < MIN_STEP and solver.status == "running":
            raise StepFailure(f"adaptive step {solver.step_size:.3g} fell below {MIN_STEP:g}")
        ts.append(solver.t)
        zs.append(solver.y.copy())
    stats = {"stepper": "rk45", "steps": len(ts) - 1, "rhs_evals": solver.nfev, "rtol": rtol,
             "atol": atol}
    return np.array(ts), np.array(zs), stats


def integrate(prob):
    """Solve ``x'' = rhs(t, x, x')`` from ``t0`` to ``t_end`` (either direction)."""
    n = prob.x0.size
    f = _first_order(prob.rhs, n)
    z0 = np.concatenate([prob.x0, prob.v0])
    _check_finite(prob.t0, z0)
    st = prob.stepper
    if isinstance(st, RK4):
        ts, zs, stats = _rk4(f, float(prob.t0), z0, float(prob.t_end), st.dt)
    elif isinstance(st, Adaptive):
        ts, zs, stats = _rk45(f, float(prob.t0), z0, float(prob.t_end), st.rtol, st.atol)
    else:
        raise TypeError(f"unknown stepper {st!r}")
    zs[0] = z0
    return Trajectory(ts, zs[:, :n], zs[:, n:], stats)


def poisson_force(s, h, phi, p):
    """``F^i = 2 h^11 (T^i + S^i)`` for the difference tensors of ``s``."""
    T, S = semispray_difference(s, h, phi)
    h11, _ = h.jet(p.t)
    return 2.0 / h11 * (T(p).components[:, 0] + S(p).components[:, 0])


def poisson_lhs(h, phi, t, x, v, a):
    """``h^11 (a - H^1_11 v + gamma[v, v])``; equals the Poisson force on harmonic curves."""
    h11, _ = h.jet(t)
    v = np.asarray(v, dtype=float)
    gamma = spatial_christoffel(phi, x)
    return (np.asarray(a) - temporal_christoffel(h, t) * v + np.einsum("ijk,j,k->i", gamma, v, v)) / h11


def _uniform(traj):
    t = traj.t
    steps = np.diff(t)
    if np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        return t, traj.x, traj.v, None
    m = 2 * len(t) + 1
    tu = np.linspace(t[0], t[-1], m)
    order = np.argsort(t)  # the spline needs increasing knots; reverse-time runs are flipped
    spline = CubicHermiteSpline(t[order], traj.x[order], traj.v[order], axis=0)
    return tu, spline(tu), spline(tu, 1), spline


def action_functional(L, h, traj):
    """``E2 = integral of L(t, x, x') sqrt(h11(t)) dt`` by composite Simpson.

    Non-uniform grids are resampled on a uniform grid by cubic Hermite
    interpolation of the stored ``(x, v)``.
    """
    if len(traj) < 3:
        raise QuadratureError("at least 3 samples are needed")
    t, x, v, _ = _uniform(traj)
    f = np.array([L(JetPoint(ti, xi, vi)) * math.sqrt(h(ti)) for ti, xi, vi in zip(t, x, v)])
    return float(simpson(f, x=t))


def energy(phi, traj):
    """``phi_ij(x) v^i v^j`` at every sample."""
    return np.array([v @ phi(x) @ v for x, v in zip(traj.x, traj.v)])

