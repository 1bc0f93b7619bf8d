import itertools
import math

import numpy as np
import pytest

from r5curve import analyze, load_fixture
from r5curve.curve import (
    IntersectionPoint,
    chain_tail,
    fifth_tangential,
    frenet_frame,
    transversal_tangent,
)
from r5curve.errors import DegenerateFrenet, NonTransversal, PointMismatch
from r5curve.tracer import fd_curvature_oracle

from helpers import (
    KN_EXPECTED,
    EX_NORMALS,
    EX_TANGENT,
    EX_UPRIME,
    helix_curvatures_qr,
    helix_frenet,
)


def _at(scene, point):
    return analyze(scene.surfaces, point)


# --- worked example: stages that the printed numbers pin down ----------------


def test_tangent_and_normals(example_app):
    assert np.allclose(example_app.data.normals, EX_NORMALS, atol=1e-12)
    assert np.allclose(example_app.t, EX_TANGENT, atol=1e-12)


def test_first_parameter_derivatives(example_app):
    u1 = np.array([u[0] for u in example_app.data.u])
    assert np.allclose(u1, EX_UPRIME, atol=1e-4, rtol=0)


def test_normal_curvatures(example_app):
    assert np.allclose(example_app.data.kn, KN_EXPECTED, atol=1e-4, rtol=0)
    # kn^3 = u'^T h^3 u' with the exact coefficients
    u = example_app.data.u[2][0]
    assert example_app.data.kn[2] == pytest.approx(u @ example_app.data.second_forms[2] @ u)
    assert example_app.data.kn[2] == pytest.approx(32 / 91, abs=1e-12)


def test_normal_gram(example_app):
    N = example_app.data.normals
    assert np.allclose(example_app.data.gram, N @ N.T, atol=1e-15)


def test_status_and_values(example_app):
    assert example_app.status == "ok"
    assert all(k is not None for k in example_app.kappa)
    assert example_app.kappa[0] == pytest.approx(1.2542060965, rel=1e-9)


# --- internal consistency ----------------------------------------------------


def check_invariants(app, tol_frame=1e-9, tol_kn=1e-9, tol_tan=1e-7):
    F = np.array(app.frame())
    assert np.allclose(F @ F.T, np.eye(5), atol=tol_frame)
    d = app.data
    a1, a2, a3, a4, a5 = d.alphas
    k1, k2, _, _ = app.kappa
    assert np.allclose(d.normals @ a2, d.kn, atol=tol_kn)
    assert a3 @ a1 == pytest.approx(-k1**2, abs=tol_tan)
    assert a4 @ a1 == pytest.approx(-3 * k1 * d.k1p, abs=tol_tan * max(1, abs(k1 * d.k1p)))
    assert a5 @ a1 == pytest.approx(fifth_tangential(k1, d.k1p, d.k1pp, k2), rel=1e-7)
    # every surface's chain rule reproduces the same ambient derivatives
    for j, u in zip(d.jets, d.u):
        for k in range(2, 5):
            lhs = j.tangents.T @ u[k - 1] + chain_tail(j, k, u)
            assert np.allclose(lhs, d.alphas[k - 1], atol=1e-9 * max(1.0, np.abs(d.alphas[k - 1]).max()))


def test_invariants_at_p(example_app):
    check_invariants(example_app)


def test_invariants_along_trace(example_scene, example_trace):
    rng = np.random.default_rng(11)
    for idx in rng.choice(len(example_trace), size=20, replace=False):
        check_invariants(_at(example_scene, example_trace.points[idx]))


def test_surface_order_does_not_matter(example_scene, example_app):
    for perm in [(1, 0, 2, 3), (3, 2, 1, 0), (2, 3, 0, 1)]:
        surfaces = [example_scene.surfaces[i] for i in perm]
        params = example_scene.params[list(perm)]
        app = analyze(surfaces, params)
        # an odd permutation reverses the orientation of the curve: t, k1'
        # and the last curvature change sign, everything else stays
        sign = np.sign(app.t @ example_app.t)
        assert sign == np.linalg.det(np.eye(4)[list(perm)])
        assert np.allclose(app.kappa[:3], example_app.kappa[:3], rtol=1e-10)
        assert app.kappa[3] == pytest.approx(sign * example_app.kappa[3], rel=1e-10)
        assert app.k1p == pytest.approx(sign * example_app.k1p, rel=1e-10)
        assert np.allclose(app.t, sign * example_app.t, atol=1e-12)
        assert np.allclose(app.n, example_app.n, atol=1e-10)


# --- independent oracles -----------------------------------------------------


def test_fd_oracle_at_p(example_app, example_trace):
    fd = fd_curvature_oracle(example_trace)
    i = list(fd.index).index(300)
    assert fd.k1[i] == pytest.approx(example_app.kappa[0], rel=1e-5)
    assert fd.k2[i] == pytest.approx(example_app.kappa[1], rel=1e-4)


@pytest.mark.parametrize("idx", [50, 700, 1200, 1900])
def test_fd_oracle_along_trace(example_scene, example_trace, idx):
    fd = fd_curvature_oracle(example_trace)
    app = _at(example_scene, example_trace.points[idx])
    i = idx - 2
    assert fd.k1[i] == pytest.approx(app.kappa[0], rel=1e-4)
    assert fd.k2[i] == pytest.approx(app.kappa[1], rel=1e-3)
    assert abs(fd.t[i] @ app.t) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("idx", [300, 1000])
def test_frame_derivatives_give_curvatures(example_scene, example_trace, idx):
    # Frenet equations checked with central differences of analytic frames
    h = example_trace.h
    prev, mid, nxt = (_at(example_scene, example_trace.points[idx + k]) for k in (-1, 0, 1))
    F0, F1, F2 = (np.array(a.frame()) for a in (prev, mid, nxt))
    dF = (F2 - F0) / (2 * h)
    k1, k2, k3, k4 = mid.kappa
    tol = 1e-4
    assert dF[0] @ F1[1] == pytest.approx(k1, abs=tol)
    assert dF[1] @ F1[2] == pytest.approx(k2, abs=tol)
    assert dF[2] @ F1[3] == pytest.approx(k3, abs=tol)
    assert dF[3] @ F1[4] == pytest.approx(k4, abs=tol)
    assert (nxt.kappa[0] - prev.kappa[0]) / (2 * h) == pytest.approx(mid.k1p, abs=tol * 10)
    assert (nxt.k1p - prev.k1p) / (2 * h) == pytest.approx(mid.k1pp, abs=tol * 100)


@pytest.mark.parametrize("theta", [0.7, -1.3, 2.9])
def test_ruled_helix_matches_curve_oracle(helix_scene, theta):
    app = analyze(helix_scene.surfaces, np.array([[theta, 0, 0, 0]] * 4))
    frame, kappa = helix_frenet(theta)
    assert np.allclose(app.kappa, kappa, rtol=1e-10)
    assert np.allclose(helix_curvatures_qr(theta), kappa, rtol=1e-10)
    for a, b in zip(app.frame(), frame):
        assert np.allclose(a, b, atol=1e-10)
    assert abs(app.k1p) < 1e-12


# --- degenerate and analytic fixtures ----------------------------------------


def test_circle_degenerates_at_level_2(circle_scene):
    app = analyze(circle_scene.surfaces, circle_scene.start())
    assert app.status == "degenerate_at_level_2"
    assert app.kappa[0] == pytest.approx(1.0, abs=1e-12)
    assert app.kappa[1:] == [None, None, None]
    assert app.n is not None and app.b1 is None


def test_line_degenerates_at_level_1(line_scene):
    app = analyze(line_scene.surfaces, line_scene.start())
    assert app.status == "degenerate_at_level_1"
    assert app.kappa[0] <= 1e-12
    assert app.n is None


def test_level_3_degeneracy():
    # a helix living in a 3-space has no third curvature
    th = 0.4
    a = [np.array([math.cos(th + k * math.pi / 2), math.sin(th + k * math.pi / 2), 0.0 if k > 1 else 1.0, 0, 0])
         for k in range(1, 5)]
    a = [v / math.sqrt(2) ** k for k, v in enumerate(a, start=1)]
    with pytest.raises(DegenerateFrenet) as info:
        frenet_frame(*a)
    assert info.value.level == 3


def test_orthonormal_normals_remark():
    sc = load_fixture("orthonormal_normals")
    app = analyze(sc.surfaces, sc.start())
    N = app.data.normals
    assert np.allclose(N @ N.T, np.eye(4), atol=1e-15)
    a = app.data.a
    assert app.kappa[0] == pytest.approx(math.sqrt(np.sum(a**2)), abs=1e-10)
    assert np.allclose(a, app.data.kn, atol=1e-14)


# --- failures ----------------------------------------------------------------


def test_point_mismatch(example_scene):
    params = example_scene.params.copy()
    params[3, 0] += 0.2
    with pytest.raises(PointMismatch):
        IntersectionPoint.from_params(example_scene.surfaces, params)


def test_duplicated_surface_is_not_transversal(example_scene):
    surfaces = list(example_scene.surfaces)
    params = example_scene.params.copy()
    surfaces[1], params[1] = surfaces[0], params[0]
    with pytest.raises(NonTransversal):
        analyze(surfaces, params)


def test_transversal_tangent_is_unit_and_orthogonal():
    N = EX_NORMALS
    t = transversal_tangent(N)
    assert np.linalg.norm(t) == pytest.approx(1.0)
    assert np.allclose(N @ t, 0, atol=1e-15)
    with pytest.raises(NonTransversal):
        transversal_tangent([N[0], N[0], N[2], N[3]])


def test_all_tuple_orders_of_identity_are_equivalent():
    # the pipeline never depends on which surface supplies the point
    sc = load_fixture("ruled_helix")
    ref = analyze(sc.surfaces, sc.start()).kappa
    for perm in itertools.permutations(range(4)):
        k = analyze([sc.surfaces[i] for i in perm], sc.params[list(perm)]).kappa
        sign = np.linalg.det(np.eye(4)[list(perm)])
        assert np.allclose(k, ref[:3] + [sign * ref[3]], rtol=1e-10)
