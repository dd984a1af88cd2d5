import warnings

import numpy as np
import pytest

from helpers import fd_gradient, fd_hessian, fd_jacobian, random_polynomial_lagrangian, rel_err
from jetflow.errors import DegenerateLagrangianError, DimensionError
from jetflow.jet import JetPoint, jet_jacobian, random_change, random_point
from jetflow.lagrange import (IllConditionedWarning, JetLagrangian, LagrangianJet,
                              connection_from_lagrangian, el_residual, el_semispray,
                              el_semisprays, fundamental_metric, g_matrix,
                              gravitational_potential, harmonic_lagrangian, pullback_lagrangian)
from jetflow.metrics import SpatialMetric, TemporalMetric, pull_back_metrics
from jetflow.spray import adapted_frame, canonical_connection, canonical_semispray

FLAT_H = TemporalMetric.constant()
QUAD_H = TemporalMetric.from_expression("t^2 + 1")
SPHERE = SpatialMetric.from_expressions([["1", "0"], ["0", "sin(x1)^2"]], 2)


def _point(rng, n=2):
    return JetPoint(rng.uniform(-1, 1), rng.uniform(0.4, 1.2, n), rng.uniform(-1, 1, n))


def _acceleration(L, h, p, bracket="corrected"):
    H, G = el_semisprays(L, h, p, bracket)
    return -2.0 * H - 2.0 * G


def test_fundamental_metric_examples():
    p = JetPoint(0.0, [0.0, 0.0], [1.0, 2.0])
    g = fundamental_metric(JetLagrangian.from_expression("y1^2 + y2^2", 2), p)
    assert np.array_equal(g.components, np.eye(2))
    g = fundamental_metric(JetLagrangian.from_expression("x1*y1^2 + y1*y2", 2), JetPoint(0, [3.0, 0], [0, 0]))
    assert np.array_equal(g.components, [[3.0, 0.5], [0.5, 0.0]])


def test_g_matrix_scales_with_h():
    L = JetLagrangian.from_expression("y1^2 + 2*y2^2", 2)
    g, ginv = g_matrix(L, QUAD_H, JetPoint(1.0, [0.0, 0.0], [0.0, 0.0]))
    assert np.array_equal(g, np.diag([2.0, 4.0]))
    assert np.array_equal(ginv, np.diag([0.5, 0.25]))


def test_derivatives_against_differences():
    rng = np.random.default_rng(0)
    L = JetLagrangian.from_expression(random_polynomial_lagrangian(rng, 2) + " + sin(t*x1*y2)", 2)
    z = np.array([0.3, 0.5, -0.4, 0.7, 0.2])
    d = L.derivatives(JetPoint.from_vector(z))
    f = lambda w: L(JetPoint.from_vector(w))
    g = fd_gradient(f, z)
    H = fd_hessian(f, z)
    assert rel_err(np.concatenate([[d.t], d.x, d.y]), g) < 1e-8
    assert rel_err(d.yy, H[3:, 3:]) < 1e-6
    assert rel_err(d.xy, H[1:3, 3:]) < 1e-6
    assert rel_err(d.ty, H[0, 3:]) < 1e-6


def test_degenerate_lagrangian_is_rejected():
    L = JetLagrangian.from_expression("(y1 + y2)^2", 2)
    with pytest.raises(DegenerateLagrangianError):
        el_semisprays(L, FLAT_H, JetPoint(0.0, [0.0, 0.0], [1.0, 1.0]))


def test_ill_conditioned_lagrangian_warns():
    L = JetLagrangian.from_expression("y1^2 + 1e-9*y2^2", 2)
    with pytest.warns(IllConditionedWarning):
        gm = g_matrix(L, FLAT_H, JetPoint(0.0, [0.0, 0.0], [1.0, 1.0]))
    assert "warning" in gm.metadata and gm.condition > 1e8


def test_unknown_bracket():
    L = JetLagrangian.from_expression("y1^2", 1)
    with pytest.raises(ValueError):
        el_semisprays(L, FLAT_H, JetPoint(0.0, [0.0], [1.0]), bracket="other")


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        JetLagrangian.from_expression("y1^2", 1).derivatives(JetPoint(0, [0, 0], [0, 0]))


def test_harmonic_lagrangian_value():
    L = harmonic_lagrangian(QUAD_H, SPHERE)
    p = JetPoint(1.0, [np.pi / 2, 0.0], [1.0, 2.0])
    assert L(p) == pytest.approx(2.5, rel=1e-15)
    # pulled-back metrics expose only numeric jets, not a generic callable
    ht, _ = pull_back_metrics(QUAD_H, SPHERE, random_change(np.random.default_rng(0), 2))
    with pytest.raises(ValueError):
        harmonic_lagrangian(ht, SPHERE)


# --- reductions -------------------------------------------------------------

def test_harmonic_lagrangian_reproduces_canonical_objects():
    rng = np.random.default_rng(1)
    L = harmonic_lagrangian(QUAD_H, SPHERE)
    canon = canonical_semispray(QUAD_H, SPHERE)
    conn = canonical_connection(QUAD_H, SPHERE)
    lconn = connection_from_lagrangian(L, QUAD_H)
    for _ in range(30):
        p = _point(rng)
        H, G = el_semisprays(L, QUAD_H, p)
        assert rel_err(H, canon.temporal(p)) < 1e-12
        assert rel_err(G, canon.spatial(p)) < 1e-10
        assert rel_err(lconn.M(p), conn.M(p)) < 1e-12
        assert rel_err(lconn.N(p), conn.N(p)) < 1e-10


def test_el_semispray_field_and_jacobian():
    rng = np.random.default_rng(2)
    L = JetLagrangian.from_expression(random_polynomial_lagrangian(rng, 2), 2)
    s = el_semispray(L, QUAD_H)
    p = _point(rng)
    fd = fd_jacobian(lambda y: s.spatial(JetPoint(p.t, p.x, y)), p.y)
    assert rel_err(s.spatial.y_jacobian(p), fd) < 1e-8
    assert connection_from_lagrangian(L, QUAD_H).metadata == {"y_jacobian": "forward-mode"}


def test_callback_lagrangian_falls_back_to_differences():
    base = JetLagrangian.from_expression("(2 + x1^2)*y1^2 + y2^2 + t*y1*y2 + x2*y1", 2)

    def derivatives(p):
        return base.derivatives(p)
    L = JetLagrangian(lambda t, x, y: base.func(t, x, y), 2, derivatives=derivatives)
    assert not L.exact_third_derivatives
    conn = connection_from_lagrangian(L, QUAD_H)
    assert conn.metadata == {"y_jacobian": "central-difference", "step": 1e-5}
    p = JetPoint(0.3, [0.5, 0.2], [0.7, -0.4])
    assert rel_err(conn.N(p), connection_from_lagrangian(base, QUAD_H).N(p)) < 1e-8
    assert isinstance(L.derivatives(p), LagrangianJet)


# --- Euler-Lagrange consistency ---------------------------------------------

LAGRANGIANS = {
    "sphere": lambda rng: harmonic_lagrangian(QUAD_H, SPHERE),
    "potential": lambda rng: JetLagrangian.from_expression(
        "y1^2 + y2^2 - 2*(x1^2 + 0.5*x2^4 + sin(x1*x2))", 2),
    "polynomial": lambda rng: JetLagrangian.from_expression(random_polynomial_lagrangian(rng, 2), 2),
}


@pytest.mark.parametrize("name", sorted(LAGRANGIANS))
def test_corrected_bracket_solves_euler_lagrange(name):
    rng = np.random.default_rng(3)
    L = LAGRANGIANS[name](rng)
    for _ in range(50):
        p = _point(rng)
        res, scale = el_residual(L, QUAD_H, p.t, p.x, p.y, _acceleration(L, QUAD_H, p), return_scale=True)
        assert np.max(np.abs(res)) <= 1e-9 * (1 + scale)


def test_printed_bracket_fails_for_generic_lagrangian():
    rng = np.random.default_rng(4)
    L = LAGRANGIANS["polynomial"](rng)
    failures = 0
    for _ in range(20):
        p = _point(rng)
        res, scale = el_residual(L, QUAD_H, p.t, p.x, p.y, _acceleration(L, QUAD_H, p, "printed"),
                                 return_scale=True)
        failures += np.max(np.abs(res)) > 1e-9 * (1 + scale)
    assert failures == 20


def test_brackets_agree_when_temporal_christoffel_vanishes():
    rng = np.random.default_rng(5)
    L = LAGRANGIANS["polynomial"](rng)
    for _ in range(10):
        p = _point(rng)
        a = el_semisprays(L, FLAT_H, p, "corrected")[1]
        b = el_semisprays(L, FLAT_H, p, "printed")[1]
        assert np.array_equal(a, b)


def test_el_residual_against_differenced_action_density():
    # d/dt (dL/dy sqrt h) - dL/dx sqrt h, computed by finite differences along a curve
    L = JetLagrangian.from_expression("(1 + x1^2)*y1^2 + t*x1*y1", 1)
    x = lambda t: np.sin(t) + 0.5
    v = lambda t: np.cos(t)
    a = lambda t: -np.sin(t)
    h = 1e-5
    density_y = lambda t: L.derivatives(JetPoint(t, [x(t)], [v(t)])).y[0] * np.sqrt(QUAD_H(t))
    t0 = 0.4
    d = L.derivatives(JetPoint(t0, [x(t0)], [v(t0)]))
    oracle = (density_y(t0 + h) - density_y(t0 - h)) / (2 * h) - d.x[0] * np.sqrt(QUAD_H(t0))
    got = el_residual(L, QUAD_H, t0, [x(t0)], [v(t0)], [a(t0)])
    assert abs(got[0] - oracle) < 1e-8


# --- gravitational potential ------------------------------------------------

def test_potential_is_block_diagonal_in_adapted_frame():
    L = harmonic_lagrangian(QUAD_H, SPHERE)
    p = JetPoint(0.5, [1.0, 0.3], [0.4, -0.6])
    gp = gravitational_potential(L, QUAD_H, p)
    F = adapted_frame(connection_from_lagrangian(L, QUAD_H), p)
    B = F @ gp.matrix() @ F.T
    h11 = QUAD_H(0.5)
    expected = np.zeros((5, 5))
    expected[0, 0] = h11
    expected[1:3, 1:3] = gp.g_block
    expected[3:, 3:] = gp.g_block / h11
    assert rel_err(B, expected) < 1e-12
    assert gp.pair(F[0], F[0]) == pytest.approx(h11, rel=1e-12)
    # the spatial block of the harmonic Lagrangian is the spatial metric
    assert rel_err(gp.g_block, SPHERE([1.0, 0.3])) < 1e-14


def test_potential_is_chart_independent():
    rng = np.random.default_rng(6)
    L = harmonic_lagrangian(QUAD_H, SPHERE)
    for _ in range(5):
        c = random_change(rng, 2)
        p = _point(rng)
        pt = c.at(p).image
        ht, _ = pull_back_metrics(QUAD_H, SPHERE, c)
        Lt = pullback_lagrangian(L, c)
        Jac = jet_jacobian(c, p)
        a = gravitational_potential(L, QUAD_H, p).matrix()
        b = gravitational_potential(Lt, ht, pt).matrix()
        assert rel_err(a, Jac @ b @ Jac.T) < 1e-7


# --- pullback -----------------------------------------------------------------

def test_pullback_value_and_derivatives():
    rng = np.random.default_rng(8)
    L = JetLagrangian.from_expression(random_polynomial_lagrangian(rng, 2), 2)
    c = random_change(rng, 2)
    p = random_point(rng, 2)
    pt = c.at(p).image
    Lt = pullback_lagrangian(L, c)
    assert Lt(pt) == pytest.approx(L(p), rel=1e-12)
    exact = lambda w: Lt(JetPoint.from_vector(w))
    z = pt.as_vector()
    d = Lt.derivatives(pt)
    assert rel_err(np.concatenate([[d.t], d.x, d.y]), fd_gradient(exact, z)) < 1e-7
    H = fd_hessian(exact, z)
    assert rel_err(d.yy, H[3:, 3:]) < 1e-5
    assert rel_err(d.xy, H[1:3, 3:]) < 1e-5
    assert rel_err(d.ty, H[0, 3:]) < 1e-5


def test_pullback_el_semispray_matches_transformed_one():
    rng = np.random.default_rng(9)
    L = harmonic_lagrangian(QUAD_H, SPHERE)
    c = random_change(rng, 2)
    p = _point(rng)
    pt = c.at(p).image
    ht, phit = pull_back_metrics(QUAD_H, SPHERE, c)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        H, G = el_semisprays(pullback_lagrangian(L, c), ht, pt)
    Ht, Gt = canonical_semispray(ht, phit)(pt)
    assert rel_err(H, Ht) < 1e-9 and rel_err(G, Gt) < 1e-7
