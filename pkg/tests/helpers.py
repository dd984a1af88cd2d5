"""Independent oracles shared by the tests: finite differences, random inputs."""

import numpy as np


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


def fd_gradient(f, z, h=1e-5):
    z = np.asarray(z, dtype=float)
    g = np.empty(z.size)
    for i in range(z.size):
        e = np.zeros(z.size)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2.0 * h)
    return g


def fd_hessian(f, z, h=1e-4):
    z = np.asarray(z, dtype=float)
    m = z.size
    H = np.empty((m, m))
    f0 = f(z)
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        H[i, i] = (f(z + ei) - 2.0 * f0 + f(z - ei)) / (h * h)
        for j in range(i + 1, m):
            ej = np.zeros(m)
            ej[j] = h
            H[i, j] = H[j, i] = (f(z + ei + ej) - f(z + ei - ej) - f(z - ei + ej)
                                 + f(z - ei - ej)) / (4.0 * h * h)
    return H


def fd_jacobian(f, z, h=1e-6):
    z = np.asarray(z, dtype=float)
    cols = []
    for i in range(z.size):
        e = np.zeros(z.size)
        e[i] = h
        cols.append((np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def christoffel_oracle(phi_func, x, h=1e-6):
    """Christoffel symbols from a plain-float metric callable by central differences."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dphi = fd_jacobian(lambda z: np.array(phi_func(z), dtype=float), x, h)
    ginv = np.linalg.inv(np.array(phi_func(x), dtype=float))
    gamma = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                gamma[i, j, k] = 0.5 * sum(
                    ginv[i, m] * (dphi[j, m, k] + dphi[k, m, j] - dphi[j, k, m]) for m in range(n))
    return gamma


# A bounded-growth generator of expression text over t, x1..xn, y1..yn. Every
# production keeps the expression inside the domain of its operations on any
# point, so evaluation never fails.

_LEAF_CONSTS = ("0.5", "1.5", "2", "0.25", "3")


def _leaf(rng, n):
    r = rng.random()
    if r < 0.2:
        return rng.choice(_LEAF_CONSTS)
    if r < 0.35:
        return "t"
    kind = "x" if rng.random() < 0.5 else "y"
    return f"{kind}{rng.integers(1, n + 1)}"


def random_expression(rng, n, depth=3):
    if depth == 0 or rng.random() < 0.2:
        return _leaf(rng, n)
    a = random_expression(rng, n, depth - 1)
    choice = rng.integers(0, 13)
    if choice <= 2:
        b = random_expression(rng, n, depth - 1)
        return f"({a} {'+-*'[choice]} {b})"
    if choice == 3:
        b = random_expression(rng, n, depth - 1)
        return f"({a}) / (1 + ({b})^2)"
    if choice == 4:
        return f"({a})^{rng.integers(2, 4)}"
    if choice == 5:
        return f"-({a})"
    if choice == 6:
        return f"sin({a})"
    if choice == 7:
        return f"cos({a})"
    if choice == 8:
        return f"exp(0.3*sin({a}))"
    if choice == 9:
        return f"log(1 + ({a})^2)"
    if choice == 10:
        return f"sqrt(2 + sin({a}))"
    if choice == 11:
        return f"(1.5 + cos({a}))^0.7"
    return rng.choice([f"tan(0.5*sin({a}))", f"sinh(0.5*sin({a}))", f"cosh(sin({a}))"])


def random_polynomial_lagrangian(rng, n):
    """Polynomial ``L(t, x, y)`` whose y-Hessian stays positive definite on the unit box.

    The diagonal quadratic terms dominate the bounded off-diagonal and cubic
    contributions, so ``g`` is invertible wherever the samples land.
    """
    c = lambda lo, hi: f"{rng.uniform(lo, hi):.6f}"
    terms = []
    for i in range(1, n + 1):
        terms.append(f"({c(2.0, 3.0)} + {c(0.1, 0.5)}*x{i}^2 + {c(-0.3, 0.3)}*t*x{i})*y{i}^2")
        terms.append(f"{c(-0.1, 0.1)}*y{i}^3")
        terms.append(f"{c(-1, 1)}*t*x{i}*y{i}")
        terms.append(f"{c(-1, 1)}*x{i}^3")
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            terms.append(f"{c(-0.2, 0.2)}*x{j}*y{i}*y{j}")
            terms.append(f"{c(-1, 1)}*x{i}*x{j}*y{j}")
            terms.append(f"{c(-1, 1)}*t^2*x{i}*x{j}")
    return " + ".join(terms)
