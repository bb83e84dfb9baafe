"""Frame transport, flatness certification and the developing map."""

import numpy as np
import pytest

from conftest import chart_path
from projgeo.connection import load_chart
from projgeo.develop import (LeftDomain, NotFlat, PathOutsideDomain,
                             ProjectivePoint, StepFailure, cartan_transport,
                             collinearity_defect, develop_map, flatness_defect,
                             geodesic_trace, model_connection, model_metric)
from projgeo.projective import OneFormField, projective_change
from projgeo.algebra import cotton, weyl
from projgeo.connection import curvature
from projgeo.tensor import norm


def test_model_charts_are_flat():
    p = np.array([0.3, -0.2, 0.4])
    for spec in (model_connection(3), model_metric(3)):
        w = weyl(curvature(spec.evaluate(p))).W
        assert norm(w) < 1e-12
    c = cotton(model_metric(2).evaluate(np.array([0.2, 0.1]), derivs=2))
    assert norm(c) < 1e-11


def test_affine_transport_carries_the_base_point():
    flat = model_connection(2)
    target = np.array([0.4, -0.2])
    frame = cartan_transport(flat, [np.zeros(2), target])
    assert np.allclose(frame.phi[:, 0], [1.0, 0.4, -0.2], atol=1e-14)
    assert frame.error_estimate < 1e-12


def test_transport_composes_and_inverts():
    sph = load_chart(chart_path("sphere2.chart"))
    a, b, c = np.zeros(2), np.array([0.3, 0.1]), np.array([0.1, 0.4])
    ab = cartan_transport(sph, [a, b]).phi
    bc = cartan_transport(sph, [b, c]).phi
    ac = cartan_transport(sph, [a, b, c]).phi
    assert np.max(np.abs(ab @ bc - ac)) < 1e-12
    ba = cartan_transport(sph, [b, a]).phi
    assert np.max(np.abs(ab @ ba - np.eye(3))) < 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_round_metric_has_no_holonomy(n):
    spec = load_chart(chart_path(f"sphere{n}.chart"))
    assert flatness_defect(spec, np.zeros(n), seed=1) < 1e-7


def test_witness_chart_has_holonomy():
    spec = load_chart(chart_path("witness3.chart"))
    assert flatness_defect(spec, np.zeros(3), seed=4) > 1e-3


def test_develop_map_refuses_curved_input():
    spec = load_chart(chart_path("witness3.chart"))
    with pytest.raises(NotFlat) as err:
        develop_map(spec, np.zeros(3), [np.array([0.1, 0.0, 0.0])], seed=4)
    assert err.value.deviation > 1e-3


def test_affine_chart_develops_to_homogeneous_coordinates():
    flat = model_connection(3)
    targets = [np.array([0.2, -0.1, 0.3]), np.array([-0.4, 0.2, 0.1])]
    out = develop_map(flat, np.zeros(3), targets)
    for target, dev in zip(targets, out):
        expect = ProjectivePoint(np.concatenate([[1.0], target]))
        assert dev.point.approx_equal(expect, tol=1e-9)
        assert dev.path_error < 1e-9


def test_development_straightens_round_geodesics():
    sph = load_chart(chart_path("sphere2.chart"))
    x0 = np.array([0.05, -0.1])
    trace = geodesic_trace(sph, x0, np.array([0.7, 0.4]), 0.5, 8)
    out = develop_map(sph, x0, list(trace))
    assert max(d.path_error for d in out) < 1e-7
    assert collinearity_defect([d.point for d in out]) < 1e-6


def test_projective_point_normalization():
    p = ProjectivePoint(np.array([-2.0, 4.0, 1.0]))
    assert np.max(np.abs(p.homogeneous)) == 1.0
    nz = p.homogeneous[np.nonzero(p.homogeneous)[0][0]]
    assert nz > 0
    assert p.approx_equal(ProjectivePoint(np.array([1.0, -2.0, -0.5])))
    with pytest.raises(ValueError):
        ProjectivePoint(np.zeros(3))


def test_collinearity_defect_detects_bent_triples():
    line = [ProjectivePoint(np.array([1.0, t, 2 * t])) for t in (0.0, 0.25, 0.5, 0.75)]
    assert collinearity_defect(line) < 1e-14
    bent = line[:3] + [ProjectivePoint(np.array([1.0, 0.75, 2.0]))]
    assert collinearity_defect(bent) > 1e-3


def test_flat_geodesics_are_straight():
    flat = model_connection(2)
    pts = geodesic_trace(flat, np.array([0.1, 0.2]), np.array([0.3, -0.1]), 1.0, 10)
    expect = np.array([0.1, 0.2]) + np.outer(np.linspace(0, 1, 11), [0.3, -0.1])
    assert np.max(np.abs(pts - expect)) < 1e-13


def test_geodesic_integrator_is_fourth_order():
    sph = load_chart(chart_path("sphere2.chart"))
    x0 = np.array([0.0, 0.1])
    v0 = np.array([0.9, 0.2])
    ends = [geodesic_trace(sph, x0, v0, 0.8, steps)[-1]
            for steps in (10, 20, 40)]
    coarse = np.linalg.norm(ends[0] - ends[2])
    fine = np.linalg.norm(ends[1] - ends[2])
    assert coarse / fine > 12  # 16 for an exact fourth-order law


def test_reparametrized_connections_share_geodesic_traces():
    """A projective change bends parametrizations, never the curves."""
    sph = load_chart(chart_path("sphere2.chart"))
    twin = projective_change(sph, OneFormField.from_strings(["0.4", "-0.2*x1"]))
    x0, v0 = np.array([0.05, -0.1]), np.array([0.8, 0.5])
    dense = geodesic_trace(sph, x0, v0, 0.6, 600)
    other = geodesic_trace(twin, x0, v0, 0.45, 40)

    def dist_to_polyline(p):
        best = np.inf
        for q0, q1 in zip(dense[:-1], dense[1:]):
            d = q1 - q0
            t = np.clip(np.dot(p - q0, d) / np.dot(d, d), 0.0, 1.0)
            best = min(best, float(np.linalg.norm(p - (q0 + t * d))))
        return best

    assert max(dist_to_polyline(p) for p in other) < 1e-6


def test_domain_guards():
    sph = load_chart(chart_path("sphere2.chart"))
    with pytest.raises(PathOutsideDomain):
        cartan_transport(sph, [np.zeros(2), np.array([5.0, 0.0])], domain=1.0)
    with pytest.raises(LeftDomain):
        geodesic_trace(sph, np.zeros(2), np.array([1.0, 0.0]), 10.0, 50,
                       domain=0.8)


def test_unreachable_tolerance_fails_loudly():
    sph = load_chart(chart_path("sphere2.chart"))
    with pytest.raises(StepFailure):
        cartan_transport(sph, [np.zeros(2), np.array([0.3, 0.1])], tol=1e-19)
