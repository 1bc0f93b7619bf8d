"""Frenet apparatus of the transversal intersection curve of four hypersurfaces.

All quantities are taken with respect to arc length ``s`` at one point of the
curve.  Every ambient derivative beyond the first is split into a tangential
part fixed by the Frenet equations and a part in the span of the four surface
normals; the latter is found from a 4x4 Gram system whose right-hand side is
the normal projection of the chain-rule expansion on each surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import (
    DegenerateFrenet,
    NonTransversal,
    PointMismatch,
    R5CurveError,
    SingularSystem,
)
from .linalg import gram_matrix, norm, quad_product, solve4
from .surface import SurfaceJet, first_fundamental, second_fundamental, unit_normal

TRANSVERSAL_TOL = 1e-8
DEGENERACY_TOL = 1e-10
AGREEMENT_TOL = 1e-9


@dataclass
class IntersectionPoint:
    point: np.ndarray
    params: np.ndarray  # (4, 4): one parameter tuple per surface
    residual: float
    iterations: int = 0
    # order-1 jets at ``params`` when the point came out of the corrector
    jets: Optional[list] = field(default=None, repr=False, compare=False)

    @classmethod
    def from_params(cls, surfaces, params, tol=AGREEMENT_TOL, check=True):
        params = np.array(params, dtype=float).reshape(4, 4)
        pts = np.array([s.evaluate(p) for s, p in zip(surfaces, params)])
        residual = max(norm(pts[i] - pts[j]) for i, j in combinations(range(4), 2))
        if check and residual > tol:
            raise PointMismatch(f"surface points disagree by {residual:.3e} (tolerance {tol:.1e})")
        return cls(pts.mean(axis=0), params, residual)


def contract(T, *vectors):
    """Contract the leading parameter axes of a jet tensor with the given vectors."""
    for v in vectors:
        T = np.tensordot(v, T, axes=(0, 0))
    return T


def chain_tail(j: SurfaceJet, k, u):
    """Chain-rule expansion of the k-th arc-length derivative of Phi(u(s)).

    Returns every term except ``sum_i Phi_i u_i^(k)``.  ``u[r]`` holds the
    (r+1)-th derivative of the parameters; the weights are the Faa di Bruno
    counts of the set partitions of ``k``.
    """
    if k == 1:
        return np.zeros(5)
    D2 = j.tensor(2)
    u1 = u[0]
    if k == 2:
        return contract(D2, u1, u1)
    u2 = u[1]
    D3 = j.tensor(3)
    if k == 3:
        return 3.0 * contract(D2, u2, u1) + contract(D3, u1, u1, u1)
    u3 = u[2]
    D4 = j.tensor(4)
    if k == 4:
        return (
            4.0 * contract(D2, u3, u1)
            + 3.0 * contract(D2, u2, u2)
            + 6.0 * contract(D3, u2, u1, u1)
            + contract(D4, u1, u1, u1, u1)
        )
    if k == 5:
        u4 = u[3]
        D5 = j.tensor(5)
        return (
            5.0 * contract(D2, u4, u1)
            + 10.0 * contract(D2, u3, u2)
            + 10.0 * contract(D3, u3, u1, u1)
            + 15.0 * contract(D3, u2, u2, u1)
            + 10.0 * contract(D4, u2, u1, u1, u1)
            + contract(D5, u1, u1, u1, u1, u1)
        )
    raise ValueError(f"unsupported derivative order {k}")


def transversal_tangent(normals):
    """Unit tangent of the intersection curve from the four unit normals."""
    v = quad_product(*normals)
    nv = norm(v)
    if nv < TRANSVERSAL_TOL:
        raise NonTransversal(f"normals are dependent (quad product norm {nv:.3e})")
    return v / nv


def param_derivs(j: SurfaceJet, order, lower, rhs_vector):
    """k-th arc-length derivative of one surface's parameters.

    ``lower`` lists the already known parameter derivatives of orders
    1..order-1 and ``rhs_vector`` is the ambient derivative of the same order.
    Solves the first-fundamental-form system against the residual left after
    removing the chain-rule tail.
    """
    if not 1 <= order <= 4:
        raise ValueError("parameter derivatives are defined for orders 1..4")
    if len(lower) < order - 1:
        raise ValueError(f"order {order} needs {order - 1} lower derivatives")
    if j.order < order:
        raise ValueError(f"jet of order {j.order} is too short for order {order}")
    resid = np.asarray(rhs_vector, dtype=float) - chain_tail(j, order, lower)
    return solve4(first_fundamental(j), j.tangents @ resid)


def normal_curvature(Pi, uprime):
    uprime = np.asarray(uprime, dtype=float)
    return float(uprime @ np.asarray(Pi) @ uprime)


def _normal_part(normals, rhs):
    coeffs = solve4(gram_matrix(normals), rhs)
    return coeffs, coeffs @ np.asarray(normals)


def second_derivative(normals, kn):
    """Curve acceleration as a combination of the normals; returns (a, alpha'')."""
    return _normal_part(normals, np.asarray(kn, dtype=float))


def _require_k1(k1, stage):
    if k1 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"first curvature {k1:.3e} vanishes", 1, stage=stage)


def normal_projections(jets, normals, k, u):
    """<tail_k(surface r), N_r> for each surface r, with r's own parameters."""
    return np.array([chain_tail(j, k, ur) @ N for j, N, ur in zip(jets, normals, u)])


def third_derivative(jets, t, k1, u1, u2, normals):
    """Returns (c, alpha''', mu)."""
    _require_k1(k1, "third_derivative")
    u = [[a, b] for a, b in zip(u1, u2)]
    mu = normal_projections(jets, normals, 3, u)
    c, part = _normal_part(normals, mu)
    return c, -k1 * k1 * np.asarray(t) + part, mu


def fourth_derivative(jets, t, k1, k1p, u1, u2, u3, normals):
    """Returns (d, alpha^(4), xi)."""
    _require_k1(k1, "fourth_derivative")
    u = [[a, b, c] for a, b, c in zip(u1, u2, u3)]
    xi = normal_projections(jets, normals, 4, u)
    d, part = _normal_part(normals, xi)
    return d, -3.0 * k1 * k1p * np.asarray(t) + part, xi


def second_curvature_derivative(alpha4, n, k1, k2):
    """kappa_1'' read off the n-component of alpha^(4)."""
    return float(alpha4 @ n) + k1**3 + k1 * k2 * k2


def fifth_tangential(k1, k1p, k1pp, k2):
    return -3.0 * k1p * k1p - 4.0 * k1 * k1pp + k1**4 + k1 * k1 * k2 * k2


def fifth_derivative(jets, t, k1, k1p, k1pp, k2, u1, u2, u3, u4, normals):
    """Returns (m, alpha^(5), eta)."""
    _require_k1(k1, "fifth_derivative")
    if k2 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"second curvature {k2:.3e} vanishes", 2, stage="fifth_derivative")
    u = [[a, b, c, d] for a, b, c, d in zip(u1, u2, u3, u4)]
    eta = normal_projections(jets, normals, 5, u)
    m, part = _normal_part(normals, eta)
    return m, fifth_tangential(k1, k1p, k1pp, k2) * np.asarray(t) + part, eta


def frenet_frame(a1, a2, a3, a4):
    """Principal normal and the three binormals from alpha' .. alpha^(4).

    Degeneracy is detected level by level before the quadruple products are
    formed; the error carries the first vanishing curvature index.
    """
    a1, a2, a3, a4 = (np.asarray(v, dtype=float) for v in (a1, a2, a3, a4))
    t = a1 / norm(a1)
    k1 = norm(a2)
    if k1 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"first curvature {k1:.3e} vanishes", 1, stage="frenet_frame")
    n = a2 / k1
    r2 = a3 - (a3 @ t) * t - (a3 @ n) * n
    k2 = norm(r2) / k1
    if k2 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"second curvature {k2:.3e} vanishes", 2, stage="frenet_frame")
    e3 = r2 / norm(r2)
    r3 = a4 - (a4 @ t) * t - (a4 @ n) * n - (a4 @ e3) * e3
    k3 = norm(r3) / (k1 * k2)
    if k3 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"third curvature {k3:.3e} vanishes", 3, stage="frenet_frame")

    w = quad_product(a1, a2, a3, a4)
    scale = norm(a1) * norm(a2) * norm(a3) * norm(a4)
    if norm(w) <= DEGENERACY_TOL * scale:
        raise DegenerateFrenet("alpha' .. alpha^(4) are dependent", 3, stage="frenet_frame")
    b3 = w / norm(w)
    w = quad_product(b3, a1, a2, a3)
    b2 = w / norm(w)
    w = quad_product(b2, b3, a1, a2)
    b1 = w / norm(w)
    return n, b1, b2, b3


def curvatures(a2, a3, a4, a5, frame):
    """kappa_1..kappa_4 from the derivatives and the frame (n, b1, b2, b3)."""
    _, b1, b2, b3 = frame
    k1 = norm(a2)
    if k1 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"first curvature {k1:.3e} vanishes", 1, stage="curvatures")
    k2 = float(np.dot(a3, b1)) / k1
    if k2 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"second curvature {k2:.3e} vanishes", 2, stage="curvatures")
    k3 = float(np.dot(a4, b2)) / (k1 * k2)
    if k3 <= DEGENERACY_TOL:
        raise DegenerateFrenet(f"third curvature {k3:.3e} vanishes", 3, stage="curvatures")
    k4 = None if a5 is None else float(np.dot(a5, b3)) / (k1 * k2 * k3)
    return k1, k2, k3, k4


@dataclass
class DerivativeData:
    """Intermediate values of the pipeline; entries stay None past a degeneracy."""

    point: IntersectionPoint
    jets: list
    normals: np.ndarray
    gram: np.ndarray
    first_forms: list
    second_forms: list
    u: list  # u[i][k] is the (k+1)-th derivative of surface i's parameters
    alphas: list  # alpha', alpha'', ...
    kn: np.ndarray
    a: Optional[np.ndarray] = None
    c: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    m: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = None
    delta: list = field(default_factory=list)
    k1p: Optional[float] = None
    k1pp: Optional[float] = None

    def alpha(self, k):
        return self.alphas[k - 1] if k <= len(self.alphas) else None


@dataclass
class FrenetApparatus:
    t: np.ndarray
    n: Optional[np.ndarray]
    b1: Optional[np.ndarray]
    b2: Optional[np.ndarray]
    b3: Optional[np.ndarray]
    kappa: list  # [k1, k2, k3, k4], None where undefined
    data: DerivativeData
    degenerate_level: Optional[int] = None
    degenerate_reason: Optional[str] = None

    @property
    def status(self):
        if self.degenerate_level is None:
            return "ok"
        return f"degenerate_at_level_{self.degenerate_level}"

    @property
    def k1p(self):
        return self.data.k1p

    @property
    def k1pp(self):
        return self.data.k1pp

    def frame(self):
        return [self.t, self.n, self.b1, self.b2, self.b3]


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except R5CurveError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def analyze(surfaces, point) -> FrenetApparatus:
    """Run the full pipeline at an intersection point.

    ``point`` is an IntersectionPoint or a (4, 4) array of parameter tuples.
    Mathematical degeneracy of the Frenet frame does not raise: the apparatus
    is returned with the values computed so far and ``degenerate_level`` set.
    """
    if not isinstance(point, IntersectionPoint):
        point = IntersectionPoint.from_params(surfaces, point)
    jets = [_stage("jet", s.jet, p, 5) for s, p in zip(surfaces, point.params)]
    normals = np.array([_stage("unit_normal", unit_normal, j) for j in jets])
    t = _stage("transversal_tangent", transversal_tangent, normals)
    first_forms = [first_fundamental(j) for j in jets]
    second_forms = [second_fundamental(j, N) for j, N in zip(jets, normals)]
    u = [[_stage("param_derivs[1]", param_derivs, j, 1, [], t)] for j in jets]
    kn = np.array([normal_curvature(P, ui[0]) for P, ui in zip(second_forms, u)])
    data = DerivativeData(
        point=point,
        jets=jets,
        normals=normals,
        gram=gram_matrix(normals),
        first_forms=first_forms,
        second_forms=second_forms,
        u=u,
        alphas=[t],
        kn=kn,
    )
    app = FrenetApparatus(t, None, None, None, None, [None] * 4, data)
    try:
        _continue(app, surfaces)
    except DegenerateFrenet as exc:
        app.degenerate_level = exc.level
        app.degenerate_reason = str(exc)
    return app


def _continue(app, surfaces):
    data = app.data
    jets, normals, t, u = data.jets, data.normals, app.t, data.u
    try:
        data.a, a2 = second_derivative(normals, data.kn)
    except SingularSystem as exc:
        raise NonTransversal(str(exc), stage="second_derivative") from exc
    data.alphas.append(a2)
    k1 = norm(a2)
    app.kappa[0] = k1
    data.delta = [chain_tail(j, 2, ui) for j, ui in zip(jets, u)]
    for j, ui in zip(jets, u):
        ui.append(_stage("param_derivs[2]", param_derivs, j, 2, ui, a2))
    _require_k1(k1, "second_derivative")
    app.n = a2 / k1

    data.c, a3, data.mu = _stage(
        "third_derivative", third_derivative, jets, t, k1,
        [ui[0] for ui in u], [ui[1] for ui in u], normals,
    )
    data.alphas.append(a3)
    data.k1p = float(a3 @ app.n)
    for j, ui in zip(jets, u):
        ui.append(_stage("param_derivs[3]", param_derivs, j, 3, ui, a3))

    data.d, a4, data.xi = _stage(
        "fourth_derivative", fourth_derivative, jets, t, k1, data.k1p,
        [ui[0] for ui in u], [ui[1] for ui in u], [ui[2] for ui in u], normals,
    )
    data.alphas.append(a4)
    for j, ui in zip(jets, u):
        ui.append(_stage("param_derivs[4]", param_derivs, j, 4, ui, a4))

    n, b1, b2, b3 = frenet_frame(t, a2, a3, a4)
    app.n, app.b1, app.b2, app.b3 = n, b1, b2, b3
    k1, k2, k3, _ = curvatures(a2, a3, a4, None, (n, b1, b2, b3))
    app.kappa[:3] = [k1, k2, k3]
    data.k1pp = second_curvature_derivative(a4, n, k1, k2)

    data.m, a5, data.eta = _stage(
        "fifth_derivative", fifth_derivative, jets, t, k1, data.k1p, data.k1pp, k2,
        [ui[0] for ui in u], [ui[1] for ui in u], [ui[2] for ui in u], [ui[3] for ui in u],
        normals,
    )
    data.alphas.append(a5)
    app.kappa[3] = float(a5 @ b3) / (k1 * k2 * k3)
