"""Covariance harness: every transformation law checked under random chart changes.

Each check computes an object twice at the prolonged point: once natively in
the tilde chart (from pulled-back metrics, Lagrangian or fields) and once by
pushing the source-chart value through the law under test. The error is

    max |a - b| / max(1, max |a|, max |b|).
"""

from dataclasses import dataclass, field

import numpy as np

from . import dtensor as dt
from .jet import _jacobian_from, compose, random_change, random_point
from .lagrange import fundamental_metric, gravitational_potential, harmonic_lagrangian, \
    pullback_lagrangian
from .metrics import pull_back_metrics, spatial_christoffel, spatial_christoffel_law, \
    temporal_christoffel, temporal_christoffel_law
from .spray import RelativisticSemispray, SpatialSemispray, TemporalSemispray, \
    adapted_coframe, adapted_frame, canonical_connection, canonical_semispray, \
    connection_from_semispray, semispray_difference, spatial_connection_law, \
    spatial_semispray_law, temporal_connection_law, temporal_semispray_law, transform_semispray

LAWS_WITH_INHOMOGENEOUS_TERMS = (
    "spatial-christoffel-law", "temporal-semispray-law", "spatial-semispray-law",
    "temporal-connection-law", "spatial-connection-law",
)


def relative_error(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return float(np.max(np.abs(a - b), initial=0.0)) / scale


@dataclass
class CheckRecord:
    name: str
    max_error: float
    tolerance: float
    samples: int = 0

    @property
    def passed(self):
        return bool(self.max_error <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "max_error": self.max_error, "tolerance": self.tolerance,
                "samples": self.samples, "passed": self.passed}


@dataclass
class CovarianceReport:
    records: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def failing(self):
        return [r.name for r in self.records if not r.passed]

    def __getitem__(self, name):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


class _Collector:
    def __init__(self, tolerance):
        self.tolerance = tolerance
        self.errors = {}
        self.counts = {}

    def add(self, name, a, b):
        e = relative_error(a, b)
        self.errors[name] = max(self.errors.get(name, 0.0), e)
        self.counts[name] = self.counts.get(name, 0) + 1

    def report(self):
        return CovarianceReport([CheckRecord(k, self.errors[k], self.tolerance, self.counts[k])
                                 for k in sorted(self.errors)])


def _shifted_semispray(h, phi, n):
    """A non-canonical semispray: the canonical one plus fixed polynomial terms."""
    canon = canonical_semispray(h, phi)
    a = np.linspace(0.3, -0.2, n)

    def H(p):
        return canon.temporal(p) + a * p.t

    def G(p):
        return canon.spatial(p) + a * np.sin(p.x[0]) + 0.1 * p.y * p.y[0]

    def dG(p):
        extra = 0.1 * (p.y[0] * np.eye(n))
        extra[:, 0] += 0.1 * p.y
        return canon.spatial.y_jacobian(p) + extra
    return RelativisticSemispray(TemporalSemispray(H), SpatialSemispray(G, dG))


def _check_point(col, p, change, h, phi, L, corrupt, rng):
    n = p.n
    cj = change.at(p)
    pt = cj.image
    inh = {name: name not in corrupt for name in LAWS_WITH_INHOMOGENEOUS_TERMS}
    ht, phit = pull_back_metrics(h, phi, change)

    # d-tensor law on the canonical d-tensors
    for name, value, native in (
        ("liouville", dt.liouville(p), dt.liouville(pt)),
        ("h-normalization", dt.h_normalization(h, p), dt.h_normalization(ht, pt)),
        ("h-liouville", dt.h_liouville(h, p), dt.h_liouville(ht, pt)),
    ):
        col.add(f"dtensor-law/{name}", dt.transform_dtensor(value, change).components,
                native.components)
    Lt = pullback_lagrangian(L, change)
    fm = fundamental_metric(L, p)
    col.add("dtensor-law/fundamental-metric", dt.transform_dtensor(fm, change).components,
            fundamental_metric(Lt, pt).components)

    # Christoffel symbols
    col.add("temporal-christoffel-law", temporal_christoffel_law(temporal_christoffel(h, p.t), cj),
            temporal_christoffel(ht, pt.t))
    col.add("spatial-christoffel-law",
            spatial_christoffel_law(spatial_christoffel(phi, p.x), cj,
                                    inh["spatial-christoffel-law"]),
            spatial_christoffel(phit, pt.x))

    # semisprays
    s, st = canonical_semispray(h, phi), canonical_semispray(ht, phit)
    H, G = s(p)
    Ht, Gt = st(pt)
    col.add("temporal-semispray-law", temporal_semispray_law(H, cj, inh["temporal-semispray-law"]), Ht)
    col.add("spatial-semispray-law", spatial_semispray_law(G, cj, inh["spatial-semispray-law"]), Gt)

    # the difference of a non-canonical semispray is a d-tensor
    other = _shifted_semispray(h, phi, n)
    T, S = semispray_difference(other, h, phi)
    Tt, St = semispray_difference(transform_semispray(other, change), ht, phit)
    col.add("semispray-difference-law",
            np.concatenate([dt.transform_dtensor(T(p), change).components,
                            dt.transform_dtensor(S(p), change).components]),
            np.concatenate([Tt(pt).components, St(pt).components]))

    # the law is consistent under composition with a second change
    second = random_change(rng, n)
    both = compose(second, change)
    via = transform_semispray(transform_semispray(other, change), second)
    direct = transform_semispray(other, both)
    p2 = second.at(pt).image
    col.add("semispray-composition", np.concatenate(via(p2)), np.concatenate(direct(p2)))

    # connections produced from the canonical semispray
    g = connection_from_semispray(s)
    gt = canonical_connection(ht, phit)
    M, N = g(p)
    Mt, Nt = gt(pt)
    col.add("temporal-connection-law", temporal_connection_law(M, cj, inh["temporal-connection-law"]), Mt)
    col.add("spatial-connection-law", spatial_connection_law(N, cj, inh["spatial-connection-law"]), Nt)

    # adapted bases
    Jac = _jacobian_from(cj)
    F, C = adapted_frame(g, p), adapted_coframe(g, p)
    Ft, Ct = adapted_frame(gt, pt), adapted_coframe(gt, pt)
    m = 2 * n + 1
    frame_scale = np.zeros((m, m))
    frame_scale[0, 0] = cj.dtt
    frame_scale[1:1 + n, 1:1 + n] = cj.J.T
    frame_scale[1 + n:, 1 + n:] = cj.s * cj.J.T
    coframe_scale = np.zeros((m, m))
    coframe_scale[0, 0] = cj.s
    coframe_scale[1:1 + n, 1:1 + n] = cj.K
    coframe_scale[1 + n:, 1 + n:] = cj.dtt * cj.K
    col.add("adapted-frame-law", F @ Jac, frame_scale @ Ft)
    col.add("adapted-coframe-law", C @ np.linalg.inv(Jac).T, coframe_scale @ Ct)

    # d-tensors expanded in an adapted basis are classical tensors
    Jinv = np.linalg.inv(Jac)
    for value, native in ((dt.h_liouville(h, p), dt.h_liouville(ht, pt)),
                          (fm, fundamental_metric(Lt, pt))):
        args = [rng.standard_normal(m) for _ in value.signature]
        moved = [Jinv @ a if slot.is_up else Jac.T @ a for slot, a in zip(value.signature, args)]
        col.add("classical-tensor-invariance",
                dt.classical_contraction(value, F, C, args),
                dt.classical_contraction(native, Ft, Ct, moved))

    # the gravitational potential is a chart-independent bilinear form
    u, w = rng.standard_normal(m), rng.standard_normal(m)
    col.add("gravitational-potential-invariance",
            gravitational_potential(L, h, p).pair(u, w),
            gravitational_potential(Lt, ht, pt).pair(Jac.T @ u, Jac.T @ w))


def run_covariance_suite(h, phi, lagrangian=None, *, rng=None, changes=None, random_changes=10,
                         points=2, tolerance=1e-7, box=None, corrupt=(), eps=0.1):
    """Check every law on ``points`` random points for each change.

    ``changes`` is an explicit list of :class:`~jetflow.jet.JetChange`; if
    omitted, ``random_changes`` are drawn from the generator family. ``box``
    is a dict with optional ``t``, ``x``, ``y`` ranges for the probe points.
    ``corrupt`` names laws whose inhomogeneous term is dropped (negative
    control).
    """
    rng = np.random.default_rng(rng)
    n = phi.n
    L = lagrangian if lagrangian is not None else harmonic_lagrangian(h, phi)
    unknown = set(corrupt) - set(LAWS_WITH_INHOMOGENEOUS_TERMS)
    if unknown:
        raise ValueError(f"cannot corrupt {sorted(unknown)}; choose from {LAWS_WITH_INHOMOGENEOUS_TERMS}")
    box = dict(box or {})
    boxes = {k: box.get(k, (-1.0, 1.0)) for k in ("t", "x", "y")}
    if changes is None:
        changes = [random_change(rng, n, eps) for _ in range(random_changes)]
    col = _Collector(tolerance)
    for change in changes:
        for _ in range(points):
            p = random_point(rng, n, boxes["t"], boxes["x"], boxes["y"])
            _check_point(col, p, change, h, phi, L, set(corrupt), rng)
    return col.report()
