"""Jet Lagrangians: metric, Euler-Lagrange semisprays, canonical connection, potential.

Throughout, ``L`` is a scalar on J1(R, M) and the action density is
``L sqrt(h11)``. The spatial Euler-Lagrange semispray is

    G^i = (h11 g^ik / 4) [L_{x^j y^k} y^j - L_{x^k} + L_{t y^k}
                          + H L_{y^k} + 2 h^11 H g_kl y^l]

with ``g = (h11 / 2) L_yy`` and ``H`` the Christoffel symbol of ``h``. The
alternative bracket ``"printed"`` replaces ``H L_{y^k}`` by ``H L_{x^k}``;
it agrees with the default only when ``H`` vanishes.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ad
from .dtensor import DTensorValue, IndexSlot
from .errors import DegenerateLagrangianError, DimensionError
from .exprlang import Expression
from .jet import JetPoint
from .metrics import temporal_christoffel
from .spray import NonlinearConnection, RelativisticSemispray, SpatialSemispray, \
    TemporalSemispray, adapted_coframe

COND_ERROR = 1e12
COND_WARN = 1e8
FD_STEP = 1e-5
BRACKETS = ("corrected", "printed")


class IllConditionedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LagrangianJet:
    """Value and the partial derivatives of ``L`` used by the pipeline.

    ``xy[j, k] = d2L / dx^j dy^k`` and ``ty[k] = d2L / dt dy^k``.
    """

    value: float
    t: float
    x: np.ndarray
    y: np.ndarray
    yy: np.ndarray
    xy: np.ndarray
    ty: np.ndarray


def _split(t2, n):
    g, H = t2.grad, t2.hess
    ys = slice(1 + n, 1 + 2 * n)
    xs = slice(1, 1 + n)
    return dict(value=t2.value, t=g[0], x=g[xs], y=g[ys], yy=H[ys, ys], xy=H[xs, ys], ty=H[0, ys])


class JetLagrangian:
    """A scalar ``L(t, x, y)``.

    ``func(t, x, y)`` must be written against :mod:`jetflow.ad` arithmetic
    (expressions always are). Alternatively pass ``derivatives(p)`` returning
    a :class:`LagrangianJet`; such Lagrangians have no exact third
    derivatives and their connection falls back to central differences.
    """

    def __init__(self, func, n, derivatives=None):
        self.func = func
        self.n = int(n)
        self._derivatives = derivatives

    @classmethod
    def from_expression(cls, text, n):
        expr = Expression(text, n)
        lag = cls(expr, n)
        lag.text = text
        return lag

    @property
    def exact_third_derivatives(self):
        return self._derivatives is None

    def local(self, p):
        """A generic callable that agrees with ``L`` to the orders needed near ``p``."""
        return self.func

    def _check(self, p):
        if p.n != self.n:
            raise DimensionError(f"Lagrangian has dimension {self.n}, point has {p.n}")

    def __call__(self, p):
        self._check(p)
        return float(ad.real(self.func(p.t, p.x, p.y)))

    def derivatives(self, p):
        self._check(p)
        if self._derivatives is not None:
            return self._derivatives(p)
        seeds = ad.taylor_seeds(p.as_vector())
        n = self.n
        out = ad.promote(self.local(p)(seeds[0], seeds[1:1 + n], seeds[1 + n:]), 2 * n + 1)
        parts = _split(out, n)
        return LagrangianJet(**{k: np.asarray(v, dtype=float) if k != "value" else float(v)
                                for k, v in parts.items()})

    def derivatives_with_y_jacobian(self, p):
        """``(jet, djet)``: the jet plus the y-derivative of every entry (trailing axis)."""
        self._check(p)
        n = self.n
        z = p.as_vector()
        duals = [float(v) for v in z[:1 + n]] + ad.dual_seeds(z[1 + n:])
        size = 2 * n + 1
        seeds = [ad.Taylor2.variable(v, k, size) for k, v in enumerate(duals)]
        out = ad.promote(self.local(p)(seeds[0], seeds[1:1 + n], seeds[1 + n:]), size)
        vals, grads = {}, {}
        for k, v in _split(out, n).items():
            vals[k], grads[k] = ad.dual_parts(v, n)
        return LagrangianJet(**vals), grads


def harmonic_lagrangian(h, phi):
    """``L = h^11(t) phi_ij(x) y^i y^j``."""
    n = phi.n

    def func(t, x, y):
        h11 = h.func(t) if h.func is not None else h(ad.real(t))
        ph = phi.func(x)
        acc = 0.0
        for i in range(n):
            for j in range(n):
                acc = acc + ph[i][j] * y[i] * y[j]
        return acc / h11

    if h.func is None or phi.func is None:
        raise ValueError("harmonic_lagrangian needs generic metric callables")
    return JetLagrangian(func, n)


def fundamental_metric(L, p):
    """``(1/2) d2L / dy^i dy^j`` as a d-tensor with two velocity-down slots."""
    yy = L.derivatives(p).yy
    return DTensorValue((IndexSlot.VEL_DOWN, IndexSlot.VEL_DOWN), 0.5 * yy, p)


@dataclass
class GMatrix:
    g: np.ndarray
    inverse: np.ndarray
    condition: float
    metadata: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.g, self.inverse))


def _g_from_yy(h11, yy):
    g = 0.5 * h11 * yy
    g = 0.5 * (g + g.T)
    cond = np.linalg.cond(g)
    if not cond <= COND_ERROR:
        raise DegenerateLagrangianError(f"g condition number {cond:.3g} exceeds {COND_ERROR:g}")
    meta = {}
    if cond > COND_WARN:
        meta["warning"] = f"g condition number {cond:.3g} above {COND_WARN:g}"
        warnings.warn(meta["warning"], IllConditionedWarning, stacklevel=3)
    return GMatrix(g, np.linalg.inv(g), cond, meta)


def g_matrix(L, h, p):
    """``g_ij = (h11 / 2) L_{y^i y^j}`` and its inverse."""
    h11, _ = h.jet(p.t)
    return _g_from_yy(h11, L.derivatives(p).yy)


def _bracket(d, H, h11, g, y, bracket):
    if bracket not in BRACKETS:
        raise ValueError(f"bracket must be one of {BRACKETS}")
    fourth = d.y if bracket == "corrected" else d.x
    return d.xy.T @ y - d.x + d.ty + H * fourth + (2.0 / h11) * H * (g @ y)


def el_semisprays(L, h, p, bracket="corrected"):
    """Temporal and spatial Euler-Lagrange semisprays ``(H, G)`` at ``p``."""
    h11, _ = h.jet(p.t)
    H = temporal_christoffel(h, p.t)
    d = L.derivatives(p)
    gm = _g_from_yy(h11, d.yy)
    b = _bracket(d, H, h11, gm.g, p.y, bracket)
    return -0.5 * H * p.y, 0.25 * h11 * (gm.inverse @ b)


def el_semispray(L, h, bracket="corrected"):
    """The Euler-Lagrange pair as a :class:`RelativisticSemispray` field."""
    return RelativisticSemispray(
        TemporalSemispray(lambda p: -0.5 * temporal_christoffel(h, p.t) * p.y),
        SpatialSemispray(lambda p: el_semisprays(L, h, p, bracket)[1],
                         lambda p: _el_G_y_jacobian(L, h, p, bracket)[0]))


def el_residual(L, h, t, x, v, a, return_scale=False):
    """``d/dt (dLh/dy) - dLh/dx`` for ``Lh = L sqrt(h11)`` along ``(x, v, a)``.

    With ``return_scale`` also returns the largest magnitude among the
    individual terms, a natural yardstick for the residual.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    d = L.derivatives(JetPoint(t, x, v))
    h11, _ = h.jet(t)
    H = temporal_christoffel(h, t)
    root = math.sqrt(h11)
    terms = [H * d.y, d.ty, d.xy.T @ v, d.yy @ a, -d.x]
    res = root * sum(terms)
    if return_scale:
        return res, root * max(float(np.max(np.abs(term))) for term in terms)
    return res


def _el_G_y_jacobian(L, h, p, bracket):
    """``dG^j / dy^m`` by nested forward differentiation (or differences)."""
    if not L.exact_third_derivatives:
        return _fd_G_y_jacobian(L, h, p, bracket), {"y_jacobian": "central-difference", "step": FD_STEP}
    n = p.n
    h11, _ = h.jet(p.t)
    H = temporal_christoffel(h, p.t)
    d, dd = L.derivatives_with_y_jacobian(p)
    gm = _g_from_yy(h11, d.yy)
    g, ginv = gm.g, gm.inverse
    y = p.y
    b = _bracket(d, H, h11, g, y, bracket)
    dg = 0.5 * h11 * dd["yy"]
    fourth = dd["y"] if bracket == "corrected" else dd["x"]
    eye = np.eye(n)
    # db[k, m] = d b_k / d y^m
    db = (np.einsum("jkm,j->km", dd["xy"], y) + d.xy.T - dd["x"] + dd["ty"] + H * fourth
          + (2.0 / h11) * H * (np.einsum("klm,l->km", dg, y) + g @ eye))
    Gb = ginv @ b
    jac = 0.25 * h11 * (ginv @ db - ginv @ np.einsum("klm,l->km", dg, Gb))
    return jac, {"y_jacobian": "forward-mode"}


def _fd_G_y_jacobian(L, h, p, bracket):
    n = p.n
    jac = np.empty((n, n))
    for m in range(n):
        e = np.zeros(n)
        e[m] = FD_STEP
        up = el_semisprays(L, h, JetPoint(p.t, p.x, p.y + e), bracket)[1]
        dn = el_semisprays(L, h, JetPoint(p.t, p.x, p.y - e), bracket)[1]
        jac[:, m] = (up - dn) / (2.0 * FD_STEP)
    return jac


def connection_from_lagrangian(L, h, bracket="corrected"):
    """``M = 2 H``, ``N = dG / dy`` of the Euler-Lagrange semisprays."""
    meta = {"y_jacobian": "forward-mode" if L.exact_third_derivatives else "central-difference"}
    if not L.exact_third_derivatives:
        meta["step"] = FD_STEP
    return NonlinearConnection(lambda p: -temporal_christoffel(h, p.t) * p.y,
                               lambda p: _el_G_y_jacobian(L, h, p, bracket)[0],
                               metadata=meta)


@dataclass(frozen=True)
class GravPotential:
    """Blocks of ``h11 dt dt + g dx dx + h^11 g dy dy`` and the coframe they use."""

    h_block: float
    g_block: np.ndarray
    v_block: np.ndarray
    coframe: np.ndarray

    def matrix(self):
        """Gram matrix in the natural basis."""
        n = self.g_block.shape[0]
        B = np.zeros((2 * n + 1, 2 * n + 1))
        B[0, 0] = self.h_block
        B[1:1 + n, 1:1 + n] = self.g_block
        B[1 + n:, 1 + n:] = self.v_block
        return self.coframe.T @ B @ self.coframe

    def pair(self, u, w):
        """``G(u, w)`` for tangent vectors given by natural components."""
        return float(np.asarray(u, dtype=float) @ self.matrix() @ np.asarray(w, dtype=float))


def gravitational_potential(L, h, p, connection=None):
    """The potential at ``p``; ``connection`` defaults to the Lagrangian one."""
    h11, _ = h.jet(p.t)
    g = g_matrix(L, h, p).g
    conn = connection if connection is not None else connection_from_lagrangian(L, h)
    return GravPotential(h11, g, g / h11, adapted_coframe(conn, p))


class PulledLagrangian(JetLagrangian):
    """``L~(t~, x~, y~) = L(t, x, y)`` in the tilde chart of a change.

    Values use the exact inverse maps. Derivatives are taken on a local model
    around each tilde point that is exact in ``y~`` and through first order in
    ``(t~, x~)``, which covers every derivative the pipeline uses.
    """

    def __init__(self, base, change):
        super().__init__(None, base.n)
        self.base = base
        self.change = change
        if not base.exact_third_derivatives:
            raise ValueError("pullback needs a Lagrangian written against jetflow.ad")

    def __call__(self, pt):
        self._check(pt)
        p = self.change.inverted().at(pt).image
        return self.base(p)

    def local(self, pt):
        t0, s, s2 = self.change.time.inverse.jet(pt.t)
        x0, K, Hi = self.change.space.inverse.jet(pt.x)
        _, dtt, ddtt = self.change.time.forward.jet(t0)
        n = self.n
        base = self.base.local(JetPoint(t0, x0, dtt * (K @ pt.y)))

        def func(tt, xt, yt):
            dt = tt - pt.t
            dx = [xt[q] - pt.x[q] for q in range(n)]
            t = t0 + s * dt + 0.5 * s2 * dt * dt
            factor = dtt + ddtt * s * dt
            x, y = [], []
            for l in range(n):
                xl = x0[l]
                yl = 0.0
                for q in range(n):
                    xl = xl + K[l, q] * dx[q]
                    Kq = K[l, q]
                    for r in range(n):
                        xl = xl + 0.5 * Hi[l, q, r] * dx[q] * dx[r]
                        Kq = Kq + Hi[l, q, r] * dx[r]
                    yl = yl + Kq * yt[q]
                x.append(xl)
                y.append(factor * yl)
            return base(t, x, y)
        return func


def pullback_lagrangian(L, change):
    return PulledLagrangian(L, change)
