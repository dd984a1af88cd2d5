import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rel_err
from jetflow.dtensor import (DTensorField, DTensorValue, IndexSlot, classical_contraction,
                             h_liouville, h_normalization, liouville, tensor_product,
                             transform_dtensor)
from jetflow.errors import DimensionError, MetricDegenerateError
from jetflow.jet import (JetChange, JetPoint, SpaceChange, TimeChange, jet_jacobian, prolong,
                         random_change, random_point)
from jetflow.metrics import TemporalMetric, pull_back_metrics, SpatialMetric
from jetflow.spray import NonlinearConnection, adapted_coframe, adapted_frame

H_QUAD = TemporalMetric.from_expression("t^2 + 1")


def _scale_change():
    return JetChange(TimeChange.from_expressions("2*t", "t/2"),
                     SpaceChange.from_expressions(["3*x1"], ["x1/3"]))


def test_identity_change_keeps_components():
    p = JetPoint(0.5, [1.0, 2.0], [3.0, -1.0])
    v = h_normalization(H_QUAD, p)
    assert np.array_equal(transform_dtensor(v, JetChange.identity(2)).components, v.components)


def test_liouville_under_scaling():
    p = JetPoint(1.0, [0.5], [4.0])
    out = transform_dtensor(liouville(p), _scale_change())
    assert out.components[0] == 6.0
    assert out.base == prolong(_scale_change(), p)


def test_h_normalization_under_scaling():
    p = JetPoint(1.0, [0.5], [4.0])
    c = _scale_change()
    out = transform_dtensor(h_normalization(H_QUAD, p), c)
    ht, _ = pull_back_metrics(H_QUAD, SpatialMetric.euclidean(1), c)
    assert out.components[0, 0, 0] == pytest.approx(ht(2.0), rel=1e-15)
    assert ht(2.0) == pytest.approx(2.0 * 0.25, rel=1e-15)


def test_liouville_examples():
    assert np.array_equal(liouville(JetPoint(0, [0, 0], [0, 0])).components, [0, 0])
    assert np.array_equal(liouville(JetPoint(0, [0, 0], [1, -2])).components, [1, -2])
    assert liouville(JetPoint(0, [0], [1])).signature == (IndexSlot.VEL_UP,)


def test_h_normalization_examples():
    p = JetPoint(0.0, [0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(h_normalization(TemporalMetric.constant(), p).components[:, 0, :], np.eye(2))
    e = h_normalization(TemporalMetric.from_expression("exp(2*t)"), JetPoint(0.0, [0.0], [1.0]))
    assert e.components[0, 0, 0] == 1.0
    q = JetPoint(2.0, [0.0, 0.0], [1.0, 1.0])
    assert np.array_equal(h_normalization(H_QUAD, q).components[:, 0, :], 5.0 * np.eye(2))


def test_h_liouville_examples():
    assert np.all(h_liouville(H_QUAD, JetPoint(1.0, [0.0], [0.0])).components == 0.0)
    assert h_liouville(TemporalMetric.constant(), JetPoint(1.0, [0.0], [3.0])).components[0, 0, 0] == 3.0
    v = h_liouville(H_QUAD, JetPoint(1.0, [0.0, 0.0], [3.0, -1.0]))
    assert np.array_equal(v.components[:, 0, 0], [6.0, -2.0])


def test_h_liouville_is_liouville_times_h():
    p = JetPoint(0.4, [0.1, 0.2], [1.5, -0.5])
    h11 = H_QUAD(p.t)
    h_tensor = DTensorValue((IndexSlot.TIME_DOWN, IndexSlot.TIME_DOWN), [[h11]], p)
    assert np.array_equal(tensor_product(liouville(p), h_tensor).components, h_liouville(H_QUAD, p).components)


def test_h_normalization_needs_positive_metric():
    with pytest.raises(MetricDegenerateError):
        h_normalization(TemporalMetric.from_expression("t"), JetPoint(-1.0, [0.0], [0.0]))


def test_signature_shape_mismatch():
    p = JetPoint(0.0, [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(DimensionError):
        DTensorValue((IndexSlot.VEL_UP, IndexSlot.TIME_DOWN), np.zeros((2, 2)), p)
    field = DTensorField((IndexSlot.SPACE_UP,), lambda q: np.ones(2))
    assert field(p).components.shape == (2,)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_round_trip_with_inverse_change(seed, n):
    rng = np.random.default_rng(seed)
    c = random_change(rng, n)
    p = random_point(rng, n)
    sig = tuple(rng.choice(list(IndexSlot), size=3))
    shape = tuple(1 if s.is_time else n for s in sig)
    v = DTensorValue(sig, rng.standard_normal(shape), p)
    back = transform_dtensor(transform_dtensor(v, c), c.inverted())
    assert rel_err(back.components, v.components) < 1e-9
    assert rel_err(back.base.as_vector(), p.as_vector()) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_canonical_d_tensors_transform_as_d_tensors(seed):
    rng = np.random.default_rng(seed)
    c = random_change(rng, 2)
    p = random_point(rng, 2)
    pt = prolong(c, p)
    ht, _ = pull_back_metrics(H_QUAD, SpatialMetric.euclidean(2), c)
    assert rel_err(transform_dtensor(liouville(p), c).components, pt.y) < 1e-12
    assert rel_err(transform_dtensor(h_normalization(H_QUAD, p), c).components,
                   h_normalization(ht, pt).components) < 1e-7
    assert rel_err(transform_dtensor(h_liouville(H_QUAD, p), c).components,
                   h_liouville(ht, pt).components) < 1e-7


def test_classical_contraction_is_chart_independent():
    rng = np.random.default_rng(11)
    n = 2
    for _ in range(10):
        c = random_change(rng, n)
        p = random_point(rng, n)
        cj = c.at(p)
        # a connection in the source chart, carried to the tilde chart by its laws
        Ms, Ns = rng.standard_normal(n), rng.standard_normal((n, n))
        g = NonlinearConnection.constant(Ms, Ns)
        Mt = cj.s ** 2 * cj.J @ Ms - cj.s * cj.dyt_dt
        Nt = cj.s * cj.J @ Ns @ cj.K - cj.dyt_dx @ cj.K
        gt = NonlinearConnection.constant(Mt, Nt)
        sig = (IndexSlot.VEL_UP, IndexSlot.SPACE_DOWN, IndexSlot.TIME_DOWN)
        v = DTensorValue(sig, rng.standard_normal((n, n, 1)), p)
        vt = transform_dtensor(v, c)
        Jac = jet_jacobian(c, p)
        args = [rng.standard_normal(2 * n + 1) for _ in sig]
        moved = [np.linalg.solve(Jac, a) if s.is_up else Jac.T @ a for s, a in zip(sig, args)]
        a = classical_contraction(v, adapted_frame(g, p), adapted_coframe(g, p), args)
        b = classical_contraction(vt, adapted_frame(gt, pt := cj.image), adapted_coframe(gt, pt), moved)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(a))
