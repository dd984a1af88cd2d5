"""Temporal metric h11(t), spatial metric phi_ij(x) and their Christoffel symbols."""

import numpy as np

from . import ad
from .errors import DimensionError, MetricDegenerateError
from .exprlang import Expression

SYMMETRY_TOL = 1e-12
DET_TOL = 1e-12
COND_MAX = 1e12


class TemporalMetric:
    """Riemannian metric ``h11(t) > 0`` on the time axis.

    ``func`` is a callable over :mod:`jetflow.ad` numbers; its derivative is
    taken by dual numbers unless ``derivative`` is supplied.
    """

    def __init__(self, func, derivative=None):
        self.func = func
        self.derivative = derivative

    @classmethod
    def from_expression(cls, text):
        expr = Expression(text, 1)
        if not expr.depends_only_on("t"):
            raise DimensionError(f"temporal metric {text!r} may only use t")
        m = cls(lambda t: expr(t))
        m.text = text
        return m

    @classmethod
    def constant(cls, value=1.0):
        value = float(value)
        return cls(lambda t: value, lambda t: 0.0)

    def jet(self, t):
        """``(h11, dh11/dt)`` at ``t``."""
        t = float(t)
        if self.derivative is not None:
            h, dh = float(self.func(t)), float(self.derivative(t))
        else:
            r = self.func(ad.Dual(t, [1.0]))
            if isinstance(r, ad.Dual):
                h, dh = r.value, float(r.grad[0])
            else:
                h, dh = float(r), 0.0
        if not h > 0.0:
            raise MetricDegenerateError(f"h11({t:g}) = {h:g} is not positive")
        return h, dh

    def __call__(self, t):
        return self.jet(t)[0]


class SpatialMetric:
    """Semi-Riemannian metric ``phi_ij(x)`` on the spatial manifold.

    ``func(x)`` returns an n x n nested sequence; ``jacobian(x)``, if given,
    returns ``d phi_ij / d x^k`` as an (n, n, n) array.
    """

    def __init__(self, func, n, jacobian=None):
        self.func = func
        self.n = int(n)
        self.jacobian = jacobian

    @classmethod
    def from_expressions(cls, rows, n):
        if len(rows) != n or any(len(r) != n for r in rows):
            raise DimensionError(f"phi must be an {n}x{n} matrix of expressions")
        exprs = [[Expression(s, n) for s in row] for row in rows]
        for row in exprs:
            for e in row:
                if not e.depends_only_on("x"):
                    raise DimensionError(f"spatial metric entry {e.text!r} may only use x1..xn")
        m = cls(lambda x: [[e(0.0, x) for e in row] for row in exprs], n)
        m.rows = rows
        return m

    @classmethod
    def euclidean(cls, n):
        eye = np.eye(n)
        return cls(lambda x: eye, n, lambda x: np.zeros((n, n, n)))

    def jet(self, x):
        """``(phi, dphi)`` at ``x`` with ``dphi[i, j, k] = d phi_ij / d x^k``."""
        return self._checked_jet(x)[:2]

    def _checked_jet(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a point of dimension {self.n}")
        if self.jacobian is not None:
            phi = np.array(self.func(x), dtype=float)
            dphi = np.array(self.jacobian(x), dtype=float)
        else:
            phi, dphi = ad.dual_parts(self.func(ad.dual_seeds(x)), self.n)
        return phi, dphi, _validate(phi)

    def __call__(self, x):
        return self.jet(x)[0]


def _validate(phi):
    if np.max(np.abs(phi - phi.T)) > SYMMETRY_TOL:
        raise MetricDegenerateError("spatial metric is not symmetric")
    # phi is symmetric, so one eigh gives singular values, condition and inverse
    w, V = np.linalg.eigh(phi)
    if not np.prod(np.abs(w)) >= DET_TOL:
        raise MetricDegenerateError("spatial metric is degenerate")
    return w, V


def invert_metric(phi, error=MetricDegenerateError, what="metric", eig=None):
    """Inverse of a symmetric matrix, refusing condition numbers above 1e12."""
    w, V = np.linalg.eigh(0.5 * (phi + phi.T)) if eig is None else eig
    sv = np.abs(w)
    cond = sv.max() / sv.min() if sv.min() > 0 else np.inf
    if not cond <= COND_MAX:
        raise error(f"{what} condition number {cond:.3g} exceeds {COND_MAX:g}")
    return (V / w) @ V.T


def temporal_christoffel(h, t):
    """``H^1_11 = (h^11 / 2) dh11/dt``."""
    h11, dh = h.jet(t)
    return 0.5 * dh / h11


def spatial_christoffel(phi, x):
    """``gamma[i, j, k]``, symmetric in ``j, k`` by construction."""
    g, dg, eig = phi._checked_jet(x)
    ginv = invert_metric(g, eig=eig)
    # bracket[m, j, k] = d_k g_jm + d_j g_km - d_m g_jk
    bracket = (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0))
               - np.transpose(dg, (2, 0, 1)))
    n = g.shape[0]
    gamma = 0.5 * (ginv @ bracket.reshape(n, n * n)).reshape(n, n, n)
    return 0.5 * (gamma + np.transpose(gamma, (0, 2, 1)))


class PulledTemporalMetric(TemporalMetric):
    """``h~(t~) = h(t) (dt/dt~)^2``, expressed in the tilde time coordinate."""

    def __init__(self, base, time_change):
        super().__init__(None)
        self.base = base
        self.change = time_change

    def jet(self, tt):
        t, s, s2 = self.change.inverse.jet(tt)
        h, dh = self.base.jet(t)
        return h * s * s, dh * s ** 3 + 2.0 * h * s * s2


class PulledSpatialMetric(SpatialMetric):
    """``phi~_pq = phi_ij (dx^i/dx~^p)(dx^j/dx~^q)`` in tilde coordinates."""

    def __init__(self, base, space_change):
        super().__init__(None, base.n)
        self.base = base
        self.change = space_change

    def _checked_jet(self, xt):
        x, K, Hi = self.change.inverse.jet(np.asarray(xt, dtype=float))
        g, dg = self.base.jet(x)
        gt = K.T @ g @ K
        # d_r gt_pq = dg_ij,m K^m_r K^i_p K^j_q + g_ij (Hi^i_pr K^j_q + K^i_p Hi^j_qr)
        term = np.einsum("ijm,mr,ip,jq->pqr", dg, K, K, K)
        half = np.einsum("ij,ipr,jq->pqr", g, Hi, K)
        dgt = term + half + np.transpose(half, (1, 0, 2))
        gt = 0.5 * (gt + gt.T)
        return gt, dgt, _validate(gt)


def pull_back_metrics(h, phi, change):
    """Both metrics expressed in the tilde chart of a :class:`~jetflow.jet.JetChange`."""
    return PulledTemporalMetric(h, change.time), PulledSpatialMetric(phi, change.space)


def temporal_christoffel_law(H11, cj):
    """Tilde Christoffel symbol of ``h`` predicted from the source one."""
    return H11 * cj.s + cj.dtt * cj.s2


def spatial_christoffel_law(gamma, cj, inhomogeneous=True):
    """Tilde Christoffel symbols of ``phi`` predicted from the source ones.

    With ``inhomogeneous=False`` the second-derivative term is dropped, which
    is only correct for affine changes (used as a negative control).
    """
    out = np.einsum("pi,ijk,jq,kr->pqr", cj.J, gamma, cj.K, cj.K)
    if inhomogeneous:
        out = out + np.einsum("pl,lqr->pqr", cj.J, cj.Hi)
    return out
