"""Points of the 1-jet space J1(R, M) and the coordinate changes acting on them.

A chart change is a pair ``(t -> t~(t), x -> x~(x))``; its prolongation moves
velocities by ``y~ = (dx~/dx) (dt/dt~) y``. Maps expose ``jet(point)``
returning value, first and second derivatives, which is all any
transformation law needs.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import ad
from .errors import DimensionError, InconsistentChangeError, SingularChangeError
from .exprlang import Expression

SINGULAR_TOL = 1e-12
INVERSE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JetPoint:
    """A point ``(t, x, y)`` of J1(R, M)."""

    t: float
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.size < 1 or x.shape != y.shape:
            raise DimensionError(f"x and y must have equal length >= 1, got {x.size} and {y.size}")
        t = float(self.t)
        if not (math.isfinite(t) and np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("jet point entries must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.size

    def as_vector(self):
        return np.concatenate([[self.t], self.x, self.y])

    @classmethod
    def from_vector(cls, z):
        z = np.asarray(z, dtype=float)
        n = (z.size - 1) // 2
        return cls(z[0], z[1:1 + n], z[1 + n:])

    def __eq__(self, other):
        if not isinstance(other, JetPoint):
            return NotImplemented
        return (self.t == other.t and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y))

    def __hash__(self):
        return hash((self.t, self.x.tobytes(), self.y.tobytes()))


# --- scalar and vector maps --------------------------------------------------

class ScalarMap:
    """A map R -> R given by a callable written against :mod:`jetflow.ad`."""

    def __init__(self, func):
        self.func = func

    @classmethod
    def from_expression(cls, text):
        expr = Expression(text, 1)
        if not expr.depends_only_on("t"):
            raise DimensionError(f"time map {text!r} may only use t")
        return cls(lambda t: expr(t))

    def __call__(self, t):
        return float(self.func(float(t)))

    def jet(self, t):
        r = ad.promote(self.func(ad.Taylor2.variable(float(t), 0, 1)), 1)
        return float(r.value), float(r.grad[0]), float(r.hess[0, 0])


class VectorMap:
    """A map R^n -> R^n given by a callable over a sequence of ad numbers."""

    def __init__(self, func, n):
        self.func = func
        self.n = int(n)

    @classmethod
    def from_expressions(cls, texts, n):
        exprs = [Expression(s, n) for s in texts]
        if len(exprs) != n:
            raise DimensionError(f"expected {n} component expressions, got {len(exprs)}")
        for e in exprs:
            if not e.depends_only_on("x"):
                raise DimensionError(f"space map component {e.text!r} may only use x1..xn")
        return cls(lambda x: [e(0.0, x) for e in exprs], n)

    def __call__(self, x):
        return np.array([float(v) for v in self.func(list(np.asarray(x, dtype=float)))])

    def jet(self, x):
        n = self.n
        seeds = ad.taylor_seeds(x)
        out = [ad.promote(v, n) for v in self.func(seeds)]
        v = np.array([float(o.value) for o in out])
        J = np.array([o.grad for o in out], dtype=float)
        H = np.array([o.hess for o in out], dtype=float)
        return v, J, H


class AffineSineTime(ScalarMap):
    """``t -> a t + b + eps sin t`` with closed-form derivatives."""

    def __init__(self, a, b, eps):
        self.a, self.b, self.eps = float(a), float(b), float(eps)
        super().__init__(lambda t: self.a * t + self.b + self.eps * ad.sin(t))

    def jet(self, t):
        s, c = np.sin(t), np.cos(t)
        return self.a * t + self.b + self.eps * s, self.a + self.eps * c, -self.eps * s


class AffineSineSpace(VectorMap):
    """``x -> A x + eps sin(B x)`` (sin componentwise) with closed-form derivatives."""

    def __init__(self, A, B, eps):
        self.A = np.array(A, dtype=float)
        self.B = np.array(B, dtype=float)
        self.eps = float(eps)
        n = self.A.shape[0]

        def func(x):
            out = []
            for i in range(n):
                lin = sum(self.A[i, j] * x[j] for j in range(n))
                arg = sum(self.B[i, j] * x[j] for j in range(n))
                out.append(lin + self.eps * ad.sin(arg))
            return out
        super().__init__(func, n)

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        bx = self.B @ x
        v = self.A @ x + self.eps * np.sin(bx)
        J = self.A + self.eps * np.cos(bx)[:, None] * self.B
        H = -self.eps * np.sin(bx)[:, None, None] * self.B[:, :, None] * self.B[:, None, :]
        return v, J, H


class NewtonScalarInverse(ScalarMap):
    """Inverse of a scalar map by Newton iteration; derivatives by the inverse function theorem."""

    def __init__(self, forward, guess=None, tol=1e-14, max_iter=60):
        self.forward = forward
        self.guess = guess or (lambda s: s)
        self.tol = tol
        self.max_iter = max_iter
        super().__init__(None)

    def _solve(self, s):
        t = float(self.guess(s))
        for _ in range(self.max_iter):
            v, d1, _ = self.forward.jet(t)
            if abs(d1) < SINGULAR_TOL:
                raise SingularChangeError(f"time map derivative {d1:g} near zero")
            step = (v - s) / d1
            t -= step
            if abs(step) <= self.tol * (1.0 + abs(t)):
                return t
        raise InconsistentChangeError(f"Newton inversion of time map did not converge at {s}")

    def __call__(self, s):
        return self._solve(float(s))

    def jet(self, s):
        t = self._solve(float(s))
        _, d1, d2 = self.forward.jet(t)
        return t, 1.0 / d1, -d2 / d1 ** 3


class NewtonVectorInverse(VectorMap):
    """Inverse of a vector map by Newton iteration; second derivatives by implicit differentiation."""

    def __init__(self, forward, guess=None, tol=1e-14, max_iter=60):
        self.forward = forward
        self.guess = guess or (lambda s: s)
        self.tol = tol
        self.max_iter = max_iter
        super().__init__(None, forward.n)

    def _solve(self, s):
        x = np.array(self.guess(np.asarray(s, dtype=float)), dtype=float)
        for _ in range(self.max_iter):
            v, J, _ = self.forward.jet(x)
            step = np.linalg.solve(J, v - s)
            x = x - step
            if np.max(np.abs(step)) <= self.tol * (1.0 + np.max(np.abs(x))):
                return x
        raise InconsistentChangeError("Newton inversion of space map did not converge")

    def __call__(self, s):
        return self._solve(s)

    def jet(self, s):
        x = self._solve(s)
        _, J, H = self.forward.jet(x)
        K = np.linalg.inv(J)
        Hi = -np.einsum("la,abc,bq,cr->lqr", K, H, K, K)
        return x, K, Hi


class ComposedScalarMap(ScalarMap):
    """``outer o inner`` with second-order chain rule on jets."""

    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner
        super().__init__(None)

    def __call__(self, t):
        return self.outer(self.inner(t))

    def jet(self, t):
        u, du, ddu = self.inner.jet(t)
        v, dv, ddv = self.outer.jet(u)
        return v, dv * du, ddv * du * du + dv * ddu


class ComposedVectorMap(VectorMap):
    """``outer o inner`` for vector maps."""

    def __init__(self, outer, inner):
        self.outer, self.inner = outer, inner
        super().__init__(None, inner.n)

    def __call__(self, x):
        return self.outer(self.inner(x))

    def jet(self, x):
        u, Ju, Hu = self.inner.jet(x)
        v, Jv, Hv = self.outer.jet(u)
        H = np.einsum("iab,aj,bk->ijk", Hv, Ju, Ju) + np.einsum("ia,ajk->ijk", Jv, Hu)
        return v, Jv @ Ju, H


def _as_scalar_map(m):
    return m if isinstance(m, ScalarMap) else ScalarMap(m)


class TimeChange:
    """Reparametrization ``t~ = t~(t)`` supplied with its inverse ``t = t(t~)``."""

    def __init__(self, forward, inverse):
        self.forward = _as_scalar_map(forward)
        self.inverse = _as_scalar_map(inverse)

    @classmethod
    def from_expressions(cls, forward, inverse):
        return cls(ScalarMap.from_expression(forward), ScalarMap.from_expression(inverse))

    @classmethod
    def identity(cls):
        m = ScalarMap(lambda t: t)
        return cls(m, m)

    def inverted(self):
        return TimeChange(self.inverse, self.forward)


class SpaceChange:
    """Spatial diffeomorphism ``x~ = x~(x)`` supplied with its inverse."""

    def __init__(self, forward, inverse):
        if forward.n != inverse.n:
            raise DimensionError("forward and inverse space maps differ in dimension")
        self.forward = forward
        self.inverse = inverse
        self.n = forward.n

    @classmethod
    def from_expressions(cls, forward, inverse):
        n = len(forward)
        return cls(VectorMap.from_expressions(forward, n), VectorMap.from_expressions(inverse, n))

    @classmethod
    def identity(cls, n):
        m = VectorMap(lambda x: list(x), n)
        return cls(m, m)

    def inverted(self):
        return SpaceChange(self.inverse, self.forward)


@dataclass(frozen=True, eq=False)
class ChangeJet:
    """Every derivative of a jet change needed at one base point.

    ``dtt`` is dt~/dt, ``s`` is dt/dt~, ``s2`` is d2t/dt~2; ``J[i, j]`` is
    dx~^i/dx^j, ``K`` its inverse dx/dx~, ``Hf[i, j, k]`` the second
    derivatives of the forward spatial map and ``Hi[l, q, r]`` those of the
    inverse (in tilde coordinates). ``dyt_dx[k, i]`` is dy~^k/dx^i.
    """

    point: JetPoint
    image: JetPoint
    dtt: float
    ddtt: float
    s: float
    s2: float
    J: np.ndarray
    K: np.ndarray
    Hf: np.ndarray
    Hi: np.ndarray
    dyt_dt: np.ndarray
    dyt_dx: np.ndarray
    dyt_dy: np.ndarray


class JetChange:
    """A chart change on J1(R, M): a time change and a space change."""

    def __init__(self, time, space):
        self.time = time
        self.space = space
        self.n = space.n

    @classmethod
    def identity(cls, n):
        return cls(TimeChange.identity(), SpaceChange.identity(n))

    def inverted(self):
        return JetChange(self.time.inverted(), self.space.inverted())

    def at(self, p, check=True):
        """Evaluate all derivative data at ``p``; validates the change there."""
        if p.n != self.n:
            raise DimensionError(f"change has dimension {self.n}, point has {p.n}")
        tt, dtt, ddtt = self.time.forward.jet(p.t)
        if not abs(dtt) >= SINGULAR_TOL:
            raise SingularChangeError(f"|dt~/dt| = {abs(dtt):.3g} below {SINGULAR_TOL}")
        xt, J, Hf = self.space.forward.jet(p.x)
        det = np.linalg.det(J)
        if not abs(det) >= SINGULAR_TOL:
            raise SingularChangeError(f"|det dx~/dx| = {abs(det):.3g} below {SINGULAR_TOL}")
        t_back, s_inv, s2 = self.time.inverse.jet(tt)
        x_back, K_inv, Hi = self.space.inverse.jet(xt)
        s = 1.0 / dtt
        K = np.linalg.inv(J)
        if check:
            _check_close("time inverse", t_back, p.t)
            _check_close("time inverse derivative", s_inv, s)
            _check_close("space inverse", x_back, p.x)
            _check_close("space inverse Jacobian", K_inv, K)
        y = p.y
        Jy = J @ y
        yt = s * Jy
        dyt_dt = -ddtt * s * s * Jy
        dyt_dx = s * np.einsum("kij,j->ki", Hf, y)
        return ChangeJet(point=p, image=JetPoint(tt, xt, yt), dtt=dtt, ddtt=ddtt, s=s, s2=s2,
                         J=J, K=K, Hf=Hf, Hi=Hi, dyt_dt=dyt_dt, dyt_dx=dyt_dx, dyt_dy=s * J)


def _check_close(what, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    err = np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))
    if not err <= INVERSE_TOL:
        raise InconsistentChangeError(f"{what} mismatch {err:.3g} exceeds {INVERSE_TOL}")


def prolong(change, p):
    """Image of ``p`` under the jet prolongation of ``change``."""
    return change.at(p).image


def jet_jacobian(change, p):
    """Natural frame at ``p`` expressed in the tilde natural frame.

    Entry ``[a, b]`` is dz~^b / dz^a with ``z = (t, x, y)``, so row ``a`` holds
    the tilde components of the a-th natural vector field. The inverse
    transpose expresses ``(dt, dx, dy)`` through ``(dt~, dx~, dy~)``.
    """
    cj = change.at(p)
    return _jacobian_from(cj)


def _jacobian_from(cj):
    n = cj.J.shape[0]
    m = 2 * n + 1
    out = np.zeros((m, m))
    out[0, 0] = cj.dtt
    out[0, 1 + n:] = cj.dyt_dt
    out[1:1 + n, 1:1 + n] = cj.J.T
    out[1:1 + n, 1 + n:] = cj.dyt_dx.T
    out[1 + n:, 1 + n:] = cj.dyt_dy.T
    return out


def compose(second, first):
    """The change ``second o first`` (apply ``first``, then ``second``)."""
    time = TimeChange(ComposedScalarMap(second.time.forward, first.time.forward),
                      ComposedScalarMap(first.time.inverse, second.time.inverse))
    space = SpaceChange(ComposedVectorMap(second.space.forward, first.space.forward),
                        ComposedVectorMap(first.space.inverse, second.space.inverse))
    return JetChange(time, space)


def _orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_change(rng, n, eps=0.1):
    """Draw a change from the test family.

    ``t~ = a t + b + e1 sin t`` with ``|a|`` in [0.5, 2] and
    ``x~ = A x + e2 sin(B x)`` with the singular values of ``A`` in [0.5, 2]
    (condition number at most 4), ``B`` orthogonal and ``|e1|, |e2| <= eps``.
    For ``eps < 0.5`` both maps are global diffeomorphisms.
    """
    a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    b = rng.uniform(-1.0, 1.0)
    e1 = rng.uniform(-eps, eps)
    A = _orthogonal(rng, n) @ np.diag(rng.uniform(0.5, 2.0, n)) @ _orthogonal(rng, n).T
    B = _orthogonal(rng, n)
    e2 = rng.uniform(-eps, eps)
    tf = AffineSineTime(a, b, e1)
    sf = AffineSineSpace(A, B, e2)
    Ainv = np.linalg.inv(A)
    time = TimeChange(tf, NewtonScalarInverse(tf, guess=lambda s: (s - b) / a))
    space = SpaceChange(sf, NewtonVectorInverse(sf, guess=lambda s: Ainv @ s))
    return JetChange(time, space)


def random_point(rng, n, t_box=(-1.0, 1.0), x_box=(-1.0, 1.0), y_box=(-1.0, 1.0)):
    """Uniform random jet point; each box is ``(low, high)``, scalars or length-n arrays."""
    return JetPoint(rng.uniform(*t_box),
                    rng.uniform(x_box[0], x_box[1], size=n),
                    rng.uniform(y_box[0], y_box[1], size=n))
