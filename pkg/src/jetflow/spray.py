"""Semisprays, nonlinear connections, their correspondence and adapted bases.

Array conventions: a temporal semispray ``H`` and a spatial semispray ``G``
evaluate to length-n vectors; a connection has temporal part ``M`` (length n)
and spatial part ``N`` with ``N[j, i]`` the component ``N^(j)_(1)i``. The
y-Jacobian of ``G`` is ``dG[j, k] = dG^j / dy^k`` and that of ``N`` is
``dN[j, i, m] = dN^j_i / dy^m``.
"""

from dataclasses import dataclass

import numpy as np

from . import ad
from .dtensor import DTensorField, IndexSlot
from .errors import MissingDerivativeError
from .exprlang import Expression
from .jet import JetPoint
from .metrics import spatial_christoffel, temporal_christoffel


def _generic_vector(f):
    return lambda p: np.array([ad.real(v) for v in f(p.t, p.x, list(p.y))], dtype=float)


def _generic_y_jacobian(f):
    def jac(p):
        return ad.jacobian(lambda y: f(p.t, p.x, y), p.y)[1]
    return jac


def _expression_vector(texts, n):
    exprs = [Expression(s, n) for s in texts]
    if len(exprs) != n:
        raise ValueError(f"expected {n} expressions, got {len(exprs)}")
    return lambda t, x, y: [e(t, x, y) for e in exprs]


class TemporalSemispray:
    """Components ``H^(j)_(1)1`` as a field ``p -> array(n)``."""

    def __init__(self, func):
        self.func = func

    @classmethod
    def from_generic(cls, f):
        """Build from ``f(t, x, y) -> sequence`` written against :mod:`jetflow.ad`."""
        return cls(_generic_vector(f))

    @classmethod
    def from_expressions(cls, texts, n):
        return cls.from_generic(_expression_vector(texts, n))

    def __call__(self, p):
        return np.asarray(self.func(p), dtype=float)


class SpatialSemispray:
    """Components ``G^(j)_(1)1`` with their y-Jacobian.

    Callback semisprays must pass ``y_jacobian``; generic ones get it by
    forward differentiation.
    """

    def __init__(self, func, y_jacobian=None):
        self.func = func
        self._y_jacobian = y_jacobian

    @classmethod
    def from_generic(cls, f):
        return cls(_generic_vector(f), _generic_y_jacobian(f))

    @classmethod
    def from_expressions(cls, texts, n):
        return cls.from_generic(_expression_vector(texts, n))

    def __call__(self, p):
        return np.asarray(self.func(p), dtype=float)

    def y_jacobian(self, p):
        if self._y_jacobian is None:
            raise MissingDerivativeError("spatial semispray has no y-Jacobian; supply y_jacobian")
        return np.asarray(self._y_jacobian(p), dtype=float)


@dataclass(frozen=True)
class RelativisticSemispray:
    temporal: TemporalSemispray
    spatial: SpatialSemispray

    def __call__(self, p):
        """``(H, G)`` at ``p``."""
        return self.temporal(p), self.spatial(p)


class NonlinearConnection:
    """Temporal components ``M[j]`` and spatial components ``N[j, i]`` as fields."""

    def __init__(self, M, N, N_y_jacobian=None, metadata=None):
        self.M = M
        self.N = N
        self._N_y_jacobian = N_y_jacobian
        self.metadata = dict(metadata or {})

    @classmethod
    def from_generic(cls, fM, fN):
        """``fM(t, x, y) -> sequence``, ``fN(t, x, y) -> nested n x n sequence``."""
        def N(p):
            return np.array([[ad.real(v) for v in row] for row in fN(p.t, p.x, list(p.y))])

        def dN(p):
            out = fN(p.t, p.x, ad.dual_seeds(p.y))
            return ad.dual_parts(out, p.n)[1]
        return cls(_generic_vector(fM), N, dN)

    @classmethod
    def zero(cls, n):
        return cls(lambda p: np.zeros(n), lambda p: np.zeros((n, n)),
                   lambda p: np.zeros((n, n, n)))

    @classmethod
    def constant(cls, M, N):
        M = np.array(M, dtype=float)
        N = np.array(N, dtype=float)
        n = M.size
        return cls(lambda p: M, lambda p: N, lambda p: np.zeros((n, n, n)))

    def __call__(self, p):
        return np.asarray(self.M(p), dtype=float), np.asarray(self.N(p), dtype=float)

    def N_y_jacobian(self, p):
        if self._N_y_jacobian is None:
            raise MissingDerivativeError("connection has no y-Jacobian of N")
        return np.asarray(self._N_y_jacobian(p), dtype=float)


# --- canonical objects of a pair of metrics --------------------------------

def canonical_temporal_semispray(h):
    return TemporalSemispray(lambda p: -0.5 * temporal_christoffel(h, p.t) * p.y)


def canonical_spatial_semispray(phi):
    def G(p):
        return 0.5 * np.einsum("jkl,k,l->j", spatial_christoffel(phi, p.x), p.y, p.y)

    def dG(p):
        return np.einsum("jkm,m->jk", spatial_christoffel(phi, p.x), p.y)
    return SpatialSemispray(G, dG)


def canonical_semispray(h, phi):
    return RelativisticSemispray(canonical_temporal_semispray(h), canonical_spatial_semispray(phi))


def canonical_connection(h, phi):
    """``M = -H^1_11 y``, ``N^j_i = gamma^j_im y^m``."""
    return NonlinearConnection(
        lambda p: -temporal_christoffel(h, p.t) * p.y,
        lambda p: np.einsum("jim,m->ji", spatial_christoffel(phi, p.x), p.y),
        lambda p: spatial_christoffel(phi, p.x))


def semispray_difference(s, h, phi):
    """The d-tensor pair ``(T, S)`` with ``s = canonical - (T, S)``."""
    canon = canonical_semispray(h, phi)
    sig = (IndexSlot.VEL_UP, IndexSlot.TIME_DOWN)
    T = DTensorField(sig, lambda p: (canon.temporal(p) - s.temporal(p))[:, None])
    S = DTensorField(sig, lambda p: (canon.spatial(p) - s.spatial(p))[:, None])
    return T, S


# --- correspondence ---------------------------------------------------------

def connection_from_semispray(s):
    """``M = 2 H``, ``N^j_k = dG^j / dy^k``."""
    return NonlinearConnection(lambda p: 2.0 * s.temporal(p), s.spatial.y_jacobian)


def semispray_from_connection(g):
    """``H = M / 2``, ``G^j = N^j_m y^m / 2``."""
    def G(p):
        return 0.5 * g.N(p) @ p.y

    def dG(p):
        return 0.5 * (np.asarray(g.N(p)) + np.einsum("jmk,m->jk", g.N_y_jacobian(p), p.y))
    jac = dG if g._N_y_jacobian is not None else None
    return RelativisticSemispray(TemporalSemispray(lambda p: 0.5 * np.asarray(g.M(p))),
                                 SpatialSemispray(G, jac))


# --- adapted bases ----------------------------------------------------------

def adapted_frame(g, p):
    """Rows ``d/dt - M d/dy``, ``d/dx^i - N^j_i d/dy^j``, ``d/dy^i`` in the natural basis."""
    M, N = g(p)
    n = p.n
    F = np.eye(2 * n + 1)
    F[0, 1 + n:] = -M
    F[1:1 + n, 1 + n:] = -N.T
    return F


def adapted_coframe(g, p):
    """Rows ``dt``, ``dx^i``, ``dy^i + M^i dt + N^i_j dx^j`` in the natural cobasis."""
    M, N = g(p)
    n = p.n
    C = np.eye(2 * n + 1)
    C[1 + n:, 0] = M
    C[1 + n:, 1:1 + n] = N
    return C


# --- transformation laws ----------------------------------------------------

def temporal_semispray_law(H, cj, inhomogeneous=True):
    out = cj.s * cj.s * (cj.J @ H)
    if inhomogeneous:
        out = out - 0.5 * cj.s * cj.dyt_dt
    return out


def spatial_semispray_law(G, cj, inhomogeneous=True):
    out = cj.s * cj.s * (cj.J @ G)
    if inhomogeneous:
        out = out - 0.5 * cj.dyt_dx @ (cj.K @ cj.image.y)
    return out


def temporal_connection_law(M, cj, inhomogeneous=True):
    out = cj.s * cj.s * (cj.J @ M)
    if inhomogeneous:
        out = out - cj.s * cj.dyt_dt
    return out


def spatial_connection_law(N, cj, inhomogeneous=True):
    out = cj.s * (cj.J @ N @ cj.K)
    if inhomogeneous:
        out = out - cj.dyt_dx @ cj.K
    return out


def _source_change_jet(change, pt):
    back = change.inverted().at(pt).image
    return change.at(back)


def transform_semispray(s, change):
    """Semispray in the tilde chart, defined through the transformation laws."""
    def H(pt):
        cj = _source_change_jet(change, pt)
        return temporal_semispray_law(s.temporal(cj.point), cj)

    def G(pt):
        cj = _source_change_jet(change, pt)
        return spatial_semispray_law(s.spatial(cj.point), cj)
    return RelativisticSemispray(TemporalSemispray(H), SpatialSemispray(G))


def transform_connection(g, change):
    """Connection in the tilde chart, defined through the transformation laws."""
    def M(pt):
        cj = _source_change_jet(change, pt)
        return temporal_connection_law(g.M(cj.point), cj)

    def N(pt):
        cj = _source_change_jet(change, pt)
        return spatial_connection_law(g.N(cj.point), cj)
    return NonlinearConnection(M, N)


def natural_point(t, x, y):
    return JetPoint(t, x, y)
