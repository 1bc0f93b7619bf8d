"""Marching along the intersection curve and finite-difference curvature oracles."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .curve import IntersectionPoint, transversal_tangent
from .errors import (
    DomainError,
    InsufficientTrace,
    NewtonDivergence,
    NotRegular,
    SingularSystem,
)
from .linalg import norm
from .surface import REGULARITY_TOL, unit_normal


@dataclass
class TraceConfig:
    h: float = 1e-3
    steps: int = 0
    tol: float = 1e-12
    max_iter: int = 25
    min_step: float = 1e-8
    # extra Newton iterations after convergence; finite-difference oracles
    # divide by h**3 so points must sit at machine precision, not at tol
    polish: int = 1
    # corrector also enforces |x_new - x_prev| = h, giving uniform spacing
    fixed_chord: bool = True
    direction: int = 1

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if self.steps < 0 or self.max_iter < 0:
            raise ValueError("counts must be non-negative")


@dataclass
class Trace:
    s: list
    points: list
    h: float
    halvings: int = 0

    def __len__(self):
        return len(self.points)

    def ambient(self):
        return np.array([p.point for p in self.points])

    def chords(self):
        X = self.ambient()
        return np.linalg.norm(np.diff(X, axis=0), axis=1)


def _residual(X):
    return np.concatenate([X[0] - X[1], X[0] - X[2], X[0] - X[3]])


def _pairwise(X):
    return max(norm(X[i] - X[j]) for i in range(4) for j in range(i + 1, 4))


def newton_correct(surfaces, guess, tol=1e-12, max_iter=25, anchor=None, chord=None, polish=0):
    """Project parameter guesses onto the common intersection.

    Gauss-Newton on F(U) = (Phi1 - Phi2, Phi1 - Phi3, Phi1 - Phi4) over the
    16 parameters, taking the minimum-norm least-squares step.  With
    ``anchor`` and ``chord`` one more equation |Phi1 - anchor| = chord is
    appended.
    """
    U = np.array(guess, dtype=float).reshape(4, 4).copy()
    extra = anchor is not None and chord is not None
    converged_at = None
    for it in range(max_iter + 1 + polish):
        for s, p in zip(surfaces, U):
            if not s.in_domain(p):
                raise NewtonDivergence(f"parameters left the domain of {s.name!r}")
        jets = [s.jet(p, 1, check=False) for s, p in zip(surfaces, U)]
        X = np.array([j.point() for j in jets])
        F = _residual(X)
        if extra:
            diff = X[0] - anchor
            dist = norm(diff)
            F = np.append(F, dist - chord)
        err = float(np.max(np.abs(F)))
        if err <= tol:
            # the pairwise spread only matters once F itself is small
            err = max(err, _pairwise(X))
        if converged_at is None and err <= tol:
            converged_at = it
        if converged_at is not None and it - converged_at >= polish:
            for s, j in zip(surfaces, jets):
                if j.regularity_margin() <= REGULARITY_TOL:
                    raise NotRegular(f"surface {s.name!r} is singular at the corrected point")
            return IntersectionPoint(X.mean(axis=0), U.copy(), _pairwise(X), converged_at, jets)
        if it >= max_iter + polish:
            break
        J = np.zeros((16 if extra else 15, 16))
        T0 = jets[0].tangents.T
        for k in range(3):
            J[5 * k:5 * k + 5, 0:4] = T0
            J[5 * k:5 * k + 5, 4 * (k + 1):4 * (k + 2)] = -jets[k + 1].tangents.T
        if extra:
            J[15, 0:4] = (diff / dist) @ T0 if dist > 0 else 0.0
        if not np.all(np.isfinite(J)):
            raise NewtonDivergence("non-finite Jacobian")
        U += _min_norm_step(J, F).reshape(4, 4)
    raise NewtonDivergence(f"no convergence after {max_iter} iterations (residual {err:.3e})")


def _min_norm_step(J, F):
    # J has full row rank on a regular transversal curve, so the minimum-norm
    # solution is J^T (J J^T)^-1 (-F); fall back to SVD otherwise
    try:
        return -J.T @ np.linalg.solve(J @ J.T, F)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(J, -F, rcond=None)[0]


def tangent_at(surfaces, params, jets=None):
    """Unit tangent and the order-1 jets it was computed from."""
    if jets is None:
        jets = [s.jet(p, 1, check=False) for s, p in zip(surfaces, params)]
    normals = [unit_normal(j) for j in jets]
    t = transversal_tangent(normals)
    return t, jets


def _param_velocity(jets, t):
    P = np.array([j.tangents for j in jets])
    G = P @ P.transpose(0, 2, 1)
    try:
        return np.linalg.solve(G, (P @ t)[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"first fundamental form is singular: {exc}") from exc


def trace(surfaces, start: IntersectionPoint, config: TraceConfig) -> Trace:
    """March ``config.steps`` steps of arc length ``config.h`` from ``start``.

    Each step predicts along the tangent in every surface's parameter space
    and corrects back onto the curve; failed corrections halve the step.
    The orientation of the first tangent (times ``config.direction``) is
    kept throughout.
    """
    t_prev, _ = tangent_at(surfaces, start.params)
    t_prev = t_prev * (1.0 if config.direction >= 0 else -1.0)
    cur = start
    out = Trace([0.0], [start], config.h)
    s = 0.0
    for step in range(config.steps):
        t, jets = tangent_at(surfaces, cur.params, cur.jets)
        if t @ t_prev < 0.0:
            t = -t
        udot = _param_velocity(jets, t)
        h = config.h
        while True:
            guess = cur.params + h * udot
            try:
                nxt = newton_correct(
                    surfaces, guess, config.tol, config.max_iter,
                    anchor=cur.point if config.fixed_chord else None,
                    chord=h if config.fixed_chord else None,
                    polish=config.polish,
                )
                if (nxt.point - cur.point) @ t <= 0.0:
                    raise NewtonDivergence("corrector moved backwards")
                break
            except (NewtonDivergence, DomainError, NotRegular, SingularSystem) as exc:
                h *= 0.5
                out.halvings += 1
                if h < config.min_step:
                    raise NewtonDivergence(
                        f"step {step}: corrector failed down to minimum step ({exc})",
                        step_index=step,
                    ) from exc
        s += norm(nxt.point - cur.point)
        out.s.append(s)
        out.points.append(nxt)
        cur = nxt
        t_prev = t
    return out


def trace_around(surfaces, start, config: TraceConfig, back: int, forward: int) -> Trace:
    """Trace ``back`` steps against and ``forward`` steps along the tangent.

    The result runs in the forward direction with arc length 0 at ``start``.
    """
    fwd = trace(surfaces, start, replace(config, steps=forward, direction=1))
    bwd = trace(surfaces, start, replace(config, steps=back, direction=-1))
    s = [-v for v in reversed(bwd.s[1:])] + fwd.s
    pts = list(reversed(bwd.points[1:])) + fwd.points
    return Trace(s, pts, config.h, fwd.halvings + bwd.halvings)


def trace_centered(surfaces, start, config: TraceConfig, half_steps: int) -> Trace:
    return trace_around(surfaces, start, config, half_steps, half_steps)


@dataclass
class FDCurvatures:
    s: np.ndarray
    index: np.ndarray  # trace indices of the estimates
    t: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    alpha2: np.ndarray = field(repr=False)
    alpha3: np.ndarray = field(repr=False)


def fd_curvature_oracle(tr: Trace, h=None) -> FDCurvatures:
    """Five-point central-difference curvature estimates from the point sequence.

    The points must be (close to) uniformly spaced in arc length by ``h``.
    """
    X = tr.ambient() if isinstance(tr, Trace) else np.asarray(tr, dtype=float)
    if len(X) < 5:
        raise InsufficientTrace(f"need at least 5 points, got {len(X)}")
    if h is None:
        h = tr.h
    chords = np.linalg.norm(np.diff(X, axis=0), axis=1)
    if np.max(np.abs(chords - h)) > 1e-6 * h:
        raise ValueError("fd oracle needs uniformly spaced points")
    xm2, xm1, x0, xp1, xp2 = X[:-4], X[1:-3], X[2:-2], X[3:-1], X[4:]
    d1 = (xm2 - 8.0 * xm1 + 8.0 * xp1 - xp2) / (12.0 * h)
    d2 = (-xm2 + 16.0 * xm1 - 30.0 * x0 + 16.0 * xp1 - xp2) / (12.0 * h * h)
    d3 = (-xm2 + 2.0 * xm1 - 2.0 * xp1 + xp2) / (2.0 * h**3)
    t = d1 / np.linalg.norm(d1, axis=1)[:, None]
    k1 = np.linalg.norm(d2, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        n = d2 / k1[:, None]
        r = d3 - np.sum(d3 * t, axis=1)[:, None] * t - np.sum(d3 * n, axis=1)[:, None] * n
        k2 = np.linalg.norm(r, axis=1) / k1
    idx = np.arange(2, len(X) - 2)
    s = np.asarray(tr.s)[idx] if isinstance(tr, Trace) else idx * h
    return FDCurvatures(s, idx, t, k1, k2, d2, d3)
