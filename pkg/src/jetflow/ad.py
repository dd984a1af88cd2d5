"""Forward-mode differentiation with truncated Taylor numbers.

``Dual`` carries a value and a gradient over ``m`` directions (first order).
``Taylor2`` carries value, gradient and Hessian over a seed set (second
order). The coefficients of a ``Taylor2`` may be ``Dual`` numbers: seeding the
velocities as duals and then running a second-order pass yields third
derivatives of the form d/dy (d2 f / dz dw), which is what the spatial
components of the Lagrangian connection need.

The elementary functions in this module (``sin``, ``exp``, ...) accept floats,
``Dual`` and ``Taylor2`` alike, so any callable written against them can be
differentiated by feeding it seeded numbers.
"""

import math

import numpy as np

from .errors import DomainError

_REAL = (int, float, np.integer, np.floating)


def _dual(value, grad):
    d = object.__new__(Dual)
    d.value = value
    d.grad = grad
    return d


class Dual:
    """First-order number ``value + grad . eps`` over ``len(grad)`` directions."""

    __slots__ = ("value", "grad")

    def __init__(self, value, grad):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)

    def __repr__(self):
        return f"Dual({self.value!r}, {self.grad!r})"

    def __neg__(self):
        return _dual(-self.value, -self.grad)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Dual):
            return _dual(self.value + other.value, self.grad + other.grad)
        if isinstance(other, _REAL):
            return _dual(self.value + other, self.grad)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return _dual(self.value - other.value, self.grad - other.grad)
        if isinstance(other, _REAL):
            return _dual(self.value - other, self.grad)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _REAL):
            return _dual(other - self.value, -self.grad)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return _dual(self.value * other.value,
                         self.value * other.grad + other.value * self.grad)
        if isinstance(other, _REAL):
            return _dual(self.value * other, self.grad * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * reciprocal(other)
        if isinstance(other, _REAL):
            if other == 0:
                raise DomainError("division by zero")
            return _dual(self.value / other, self.grad / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _REAL):
            return reciprocal(self) * other
        return NotImplemented

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)):
            return ipow(self, int(k))
        return NotImplemented


def _taylor(value, grad, hess):
    t = object.__new__(Taylor2)
    t.value = value
    t.grad = grad
    t.hess = hess
    return t


def _is_scalar(x):
    return not isinstance(x, (Taylor2, np.ndarray))


class Taylor2:
    """Second-order truncated Taylor number over a fixed seed set.

    ``grad[i]`` and ``hess[i, j]`` are the first and second partials with
    respect to the i-th (and j-th) seed. Every update below adds a symmetric
    term to a symmetric matrix, so the Hessian stays exactly symmetric.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = value
        self.grad = np.asarray(grad)
        self.hess = np.asarray(hess)

    def __repr__(self):
        return f"Taylor2({self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    @classmethod
    def variable(cls, value, index, size):
        g = np.zeros(size)
        g[index] = 1.0
        return _taylor(value, g, np.zeros((size, size)))

    @classmethod
    def constant(cls, value, size):
        return _taylor(value, np.zeros(size), np.zeros((size, size)))

    def _chain(self, f0, f1, f2):
        g = self.grad
        return _taylor(f0, g * f1, self.hess * f1 + np.multiply.outer(g, g) * f2)

    def __neg__(self):
        return _taylor(-self.value, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Taylor2):
            return _taylor(self.value + other.value, self.grad + other.grad,
                           self.hess + other.hess)
        if _is_scalar(other):
            return _taylor(self.value + other, self.grad, self.hess)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Taylor2):
            return _taylor(self.value - other.value, self.grad - other.grad,
                           self.hess - other.hess)
        if _is_scalar(other):
            return _taylor(self.value - other, self.grad, self.hess)
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return _taylor(other - self.value, -self.grad, -self.hess)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Taylor2):
            a, b = self, other
            cross = np.multiply.outer(a.grad, b.grad)
            return _taylor(a.value * b.value,
                           a.grad * b.value + b.grad * a.value,
                           a.hess * b.value + b.hess * a.value + (cross + cross.T))
        if _is_scalar(other):
            return _taylor(self.value * other, self.grad * other, self.hess * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Taylor2):
            return self * reciprocal(other)
        if _is_scalar(other):
            return self * reciprocal(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_scalar(other):
            return reciprocal(self) * other
        return NotImplemented

    def __pow__(self, k):
        if isinstance(k, (int, np.integer)):
            return ipow(self, int(k))
        return NotImplemented


def real(x):
    """Underlying float of a (possibly nested) Taylor/dual number."""
    while not isinstance(x, _REAL):
        x = x.value
    return float(x)


# --- elementary functions -------------------------------------------------

def reciprocal(x):
    if real(x) == 0.0:
        raise DomainError("division by zero")
    if isinstance(x, Taylor2):
        r = reciprocal(x.value)
        return x._chain(r, -(r * r), 2.0 * r * r * r)
    if isinstance(x, Dual):
        r = 1.0 / x.value
        return _dual(r, x.grad * (-r * r))
    return 1.0 / x


def sin(x):
    if isinstance(x, Taylor2):
        s = sin(x.value)
        return x._chain(s, cos(x.value), -s)
    if isinstance(x, Dual):
        return _dual(math.sin(x.value), x.grad * math.cos(x.value))
    return math.sin(x)


def cos(x):
    if isinstance(x, Taylor2):
        c = cos(x.value)
        return x._chain(c, -sin(x.value), -c)
    if isinstance(x, Dual):
        return _dual(math.cos(x.value), x.grad * -math.sin(x.value))
    return math.cos(x)


def tan(x):
    if abs(math.cos(real(x))) < 1e-300:
        raise DomainError("tan at a pole")
    if isinstance(x, Taylor2):
        t = tan(x.value)
        d1 = 1.0 + t * t
        return x._chain(t, d1, 2.0 * t * d1)
    if isinstance(x, Dual):
        t = math.tan(x.value)
        return _dual(t, x.grad * (1.0 + t * t))
    return math.tan(x)


def exp(x):
    if real(x) > 709.0:
        raise DomainError("exp overflow")
    if isinstance(x, Taylor2):
        e = exp(x.value)
        return x._chain(e, e, e)
    if isinstance(x, Dual):
        e = math.exp(x.value)
        return _dual(e, x.grad * e)
    return math.exp(x)


def log(x):
    if real(x) <= 0.0:
        raise DomainError("log of a non-positive number")
    if isinstance(x, Taylor2):
        r = reciprocal(x.value)
        return x._chain(log(x.value), r, -(r * r))
    if isinstance(x, Dual):
        return _dual(math.log(x.value), x.grad / x.value)
    return math.log(x)


def sqrt(x):
    v = real(x)
    if v < 0.0 or (v == 0.0 and not isinstance(x, _REAL)):
        raise DomainError("sqrt outside (0, inf)" if v == 0.0 else "sqrt of a negative number")
    if isinstance(x, Taylor2):
        s = sqrt(x.value)
        r = reciprocal(s)
        return x._chain(s, 0.5 * r, -0.25 * r * r * r)
    if isinstance(x, Dual):
        s = math.sqrt(x.value)
        return _dual(s, x.grad * (0.5 / s))
    return math.sqrt(x)


def sinh(x):
    if abs(real(x)) > 709.0:
        raise DomainError("sinh overflow")
    if isinstance(x, Taylor2):
        s = sinh(x.value)
        return x._chain(s, cosh(x.value), s)
    if isinstance(x, Dual):
        return _dual(math.sinh(x.value), x.grad * math.cosh(x.value))
    return math.sinh(x)


def cosh(x):
    if abs(real(x)) > 709.0:
        raise DomainError("cosh overflow")
    if isinstance(x, Taylor2):
        c = cosh(x.value)
        return x._chain(c, sinh(x.value), c)
    if isinstance(x, Dual):
        return _dual(math.cosh(x.value), x.grad * math.sinh(x.value))
    return math.cosh(x)


def ipow(x, k):
    """``x**k`` for integer ``k`` by repeated multiplication (exact polynomial)."""
    if k < 0:
        return reciprocal(ipow(x, -k))
    result = 1.0
    base = x
    first = True
    while k:
        if k & 1:
            result = base if first else result * base
            first = False
        k >>= 1
        if k:
            base = base * base
    return result


def rpow(x, p):
    """``x**p`` for a general exponent; the base must be positive."""
    if real(x) <= 0.0:
        raise DomainError("non-integer power of a non-positive base")
    return exp(log(x) * p)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
}


# --- seeding helpers --------------------------------------------------------

def taylor_seeds(values, active=None):
    """Seed ``values`` as Taylor2 variables.

    ``active`` is a boolean mask (default all); inactive entries are returned
    as plain floats, active ones as variables over the active subset in order.
    """
    values = [float(v) for v in values]
    if active is None:
        active = [True] * len(values)
    size = sum(bool(a) for a in active)
    out, k = [], 0
    for v, a in zip(values, active):
        if a:
            out.append(Taylor2.variable(v, k, size))
            k += 1
        else:
            out.append(v)
    return out


def dual_seeds(values):
    """Seed ``values`` as Dual numbers with one direction per entry."""
    m = len(values)
    eye = np.eye(m)
    return [_dual(float(v), eye[i]) for i, v in enumerate(values)]


def promote(x, size):
    """Wrap a constant result as a Taylor2 over ``size`` seeds."""
    if isinstance(x, Taylor2):
        return x
    return Taylor2.constant(x, size)


def dual_parts(x, m):
    """Split a scalar or array of Dual/float entries into (value, grad[..., m])."""
    arr = np.asarray(x, dtype=object)
    flat = arr.reshape(-1)
    vals = np.empty(flat.size)
    grads = np.zeros((flat.size, m))
    for k, e in enumerate(flat):
        if isinstance(e, Dual):
            vals[k] = e.value
            grads[k] = e.grad
        else:
            vals[k] = e
    if arr.shape == ():
        return float(vals[0]), grads[0]
    return vals.reshape(arr.shape), grads.reshape(arr.shape + (m,))


def jacobian(func, x):
    """Value and Jacobian of a vector callable ``func`` at ``x`` via duals.

    ``func`` must be written against this module's arithmetic. Returns
    ``(f, J)`` with ``J[i, j] = d f_i / d x_j``.
    """
    x = np.asarray(x, dtype=float)
    out = func(dual_seeds(x))
    vals, grads = dual_parts(out, len(x))
    return vals, grads
