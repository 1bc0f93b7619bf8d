"""Darboux frames of the intersection curve on each surface, geodesic curvature and torsions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientTrace, NotRegular, RankDeficient
from .linalg import gram_schmidt, norm, quad_product
from .surface import SurfaceJet

RANK_TOL = 1e-10
FLAT_TOL = 1e-12


@dataclass
class DarbouxFrame:
    surface: int
    U: list  # U1..U5; U3/U4 are None when the construction stopped early

    def __getitem__(self, k):
        return self.U[k - 1]

    @property
    def complete(self):
        return all(u is not None for u in self.U)


@dataclass
class GeodesicData:
    surface: int
    kappa1g: Optional[float]
    tau: list  # tau_1g, tau_2g, tau_3g; None where the frame vector is missing
    dNds: np.ndarray
    frame: DarbouxFrame
    failed_at: Optional[int] = None


def darboux_frame(alphas, N, surface=0, partial=False) -> DarbouxFrame:
    """Frame {U1..U5} adapted to the curve and surface ``surface``.

    U1 is alpha' and U5 the surface normal, both kept exactly; U2, U3, U4
    orthonormalize alpha'', alpha''', alpha^(4) in that order against N and
    the earlier U's.  With ``partial`` the frame is returned as far as it
    could be built instead of raising RankDeficient.
    """
    t = np.asarray(alphas[0], dtype=float)
    N = np.asarray(N, dtype=float)
    U = [t, None, None, None, N]
    basis = [t, N]
    for k, a in enumerate(alphas[1:4], start=2):
        try:
            (q,) = gram_schmidt([a], RANK_TOL, basis=basis)
        except RankDeficient as exc:
            if partial:
                break
            raise RankDeficient(
                f"Darboux vector U{k} undefined: {exc}", k, stage="darboux_frame"
            ) from exc
        U[k - 1] = q
        basis.append(q)
    if not partial and any(u is None for u in U):
        missing = next(k for k, u in enumerate(U, start=1) if u is None)
        raise RankDeficient(f"Darboux vector U{missing} undefined", missing, stage="darboux_frame")
    return DarbouxFrame(surface, U)


def geodesic_curvature(a, normals, U2):
    """First geodesic curvature from the normal-span coefficients of alpha''."""
    return float(sum(aj * np.dot(Nj, U2) for aj, Nj in zip(a, normals)))


def normal_derivative(j: SurfaceJet, uprime):
    """Arc-length derivative of the unit normal along the curve.

    Differentiates the unnormalized normal (product rule on the quadruple
    product), divides by its norm and removes the component along N, which
    is the full quotient rule for N = Nbar / |Nbar|.
    """
    P = j.tangents
    D2 = j.tensor(2)
    nbar = quad_product(*P)
    nn = norm(nbar)
    if nn == 0.0:
        raise NotRegular("unit normal undefined")
    dnbar = np.zeros(5)
    for k in range(4):
        if uprime[k] == 0.0:
            continue
        dk = (
            quad_product(D2[0, k], P[1], P[2], P[3])
            + quad_product(P[0], D2[1, k], P[2], P[3])
            + quad_product(P[0], P[1], D2[2, k], P[3])
            + quad_product(P[0], P[1], P[2], D2[3, k])
        )
        dnbar += dk * uprime[k]
    N = nbar / nn
    v = dnbar / nn
    return v - (v @ N) * N


def geodesic_torsions(dNds, frame: DarbouxFrame):
    return [None if frame[k] is None else -float(np.dot(dNds, frame[k])) for k in (2, 3, 4)]


def surface_geodesics(app, i) -> GeodesicData:
    """Darboux frame, kappa_1g and tau_jg of the curve on surface ``i``."""
    data = app.data
    alphas = data.alphas[:4]
    N = data.normals[i]
    dN = normal_derivative(data.jets[i], data.u[i][0])
    if len(alphas) < 2:
        frame = DarbouxFrame(i, [alphas[0], None, None, None, N])
    else:
        frame = darboux_frame(alphas, N, surface=i, partial=True)
    failed = next((k for k in (2, 3, 4) if frame[k] is None), None)
    k1g = None
    if frame[2] is not None:
        k1g = float(np.dot(data.alphas[1], frame[2]))
    elif len(alphas) >= 2:
        # alpha'' has no component in the tangent hyperplane beyond t: the
        # geodesic curvature is the length of that (vanishing) component
        a2 = data.alphas[1]
        k1g = norm(a2 - (a2 @ N) * N - (a2 @ alphas[0]) * alphas[0])
    tau = geodesic_torsions(dN, frame)
    if norm(dN) <= FLAT_TOL:
        # N is constant along the curve, so every torsion vanishes whatever
        # completion of the frame one picks
        tau = [0.0 if v is None else v for v in tau]
    return GeodesicData(i, k1g, tau, dN, frame, failed)


def all_geodesics(app):
    return [surface_geodesics(app, i) for i in range(4)]


def align_frames(frames):
    """Flip frame vectors so consecutive frames do not change orientation."""
    out = [np.array(frames[0], dtype=float)]
    for F in frames[1:]:
        F = np.array(F, dtype=float)
        prev = out[-1]
        signs = np.where(np.einsum("ij,ij->i", F, prev) < 0.0, -1.0, 1.0)
        out.append(F * signs[:, None])
    return out


def geodesic_profile(frames, h):
    """Central-difference estimates of kappa_ig = <U_i', U_{i+1}> along a trace.

    ``frames`` is a sequence of 5x5 arrays (rows U1..U5) at points equally
    spaced by ``h`` in arc length.  Returns an array of shape (len-2, 4).
    """
    if len(frames) < 3:
        raise InsufficientTrace(f"need at least 3 frames, got {len(frames)}")
    F = np.array(align_frames(frames))
    dU = (F[2:] - F[:-2]) / (2.0 * h)
    mid = F[1:-1]
    return np.stack([np.einsum("ij,ij->i", dU[:, i], mid[:, i + 1]) for i in range(4)], axis=1)
