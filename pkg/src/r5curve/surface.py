"""Parametric hypersurfaces R^4 -> R^5 and their local invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import expr
from .errors import NotRegular, SceneError
from .linalg import norm, quad_product

REGULARITY_TOL = 1e-10

_ALL_INDICES = expr.multi_indices(expr.MAX_ORDER)
_POSITION = {s: i for i, s in enumerate(_ALL_INDICES)}


def _gather(order):
    """Index array mapping the full (4,)*order tensor onto canonical rows."""
    shape = (4,) * order
    g = np.empty(shape, dtype=int)
    for idx in product(range(4), repeat=order):
        g[idx] = _POSITION[tuple(sorted(i + 1 for i in idx))]
    return g


_GATHER = [_gather(r) for r in range(expr.MAX_ORDER + 1)]
_COUNT = [len(expr.multi_indices(r)) for r in range(expr.MAX_ORDER + 1)]


@dataclass
class SurfaceJet:
    """Partial derivatives of a hypersurface up to ``order`` at ``params``.

    ``values[i]`` is the derivative for multi-index ``expr.multi_indices(order)[i]``.
    """

    params: np.ndarray
    order: int
    values: np.ndarray
    _tensors: dict = field(default_factory=dict, repr=False)

    def point(self):
        return self.values[0]

    def d(self, *sigma):
        return self.values[_POSITION[expr.multi_index(sigma)]]

    def tensor(self, r):
        """Full symmetric array of r-th partials, shape (4,)*r + (5,)."""
        if r > self.order:
            raise ValueError(f"jet of order {self.order} has no order-{r} partials")
        t = self._tensors.get(r)
        if t is None:
            t = self.values[_GATHER[r]]
            self._tensors[r] = t
        return t

    @property
    def tangents(self):
        """Rows Phi_1..Phi_4."""
        return self.values[1:5]

    def normal_vector(self):
        """Unnormalized normal Phi_1 x Phi_2 x Phi_3 x Phi_4 (cached)."""
        nbar = self._tensors.get("nbar")
        if nbar is None:
            nbar = quad_product(*self.tangents)
            self._tensors["nbar"] = nbar
        return nbar

    def regularity_margin(self, nbar=None):
        P = self.tangents
        scale = float(np.prod(np.sqrt(np.einsum("ij,ij->i", P, P))))
        if scale == 0.0:
            return 0.0
        if nbar is None:
            nbar = self.normal_vector()
        return norm(nbar) / scale


class Hypersurface:
    """A parametric map from R^4 to R^5 given by five component expressions.

    Partial-derivative tables are built eagerly to order five so the object
    is read-only afterwards.
    """

    def __init__(self, name, components, domain=None):
        if len(components) != 5:
            raise SceneError(f"surface {name!r}: expected 5 components, got {len(components)}")
        self.name = name
        self.sources = [str(c) for c in components]
        self.components = []
        for k, text in enumerate(self.sources, start=1):
            try:
                self.components.append(expr.parse(text))
            except expr.ParseError as exc:
                raise SceneError(
                    f"surface {name!r} component {k}: {exc.reason} at offset {exc.offset}"
                ) from exc
        self.domain = None if domain is None else np.array(domain, dtype=float).reshape(4, 2)
        self.tables = [expr.PartialTable(a).build() for a in self.components]
        self._evaluators = {}

    def __repr__(self):
        return f"Hypersurface({self.name!r})"

    def _evaluator(self, order):
        f = self._evaluators.get(order)
        if f is None:
            nodes = []
            for sigma in _ALL_INDICES[: _COUNT[order]]:
                nodes.extend(t.partial(sigma) for t in self.tables)
            f = expr.compile_many(nodes)
            self._evaluators[order] = f
        return f

    def evaluate(self, params):
        return np.array(self._evaluator(0)(*params))

    def in_domain(self, params):
        if self.domain is None:
            return True
        p = np.asarray(params)
        return bool(np.all(p >= self.domain[:, 0]) and np.all(p <= self.domain[:, 1]))

    def jet(self, params, order=1, check=True):
        return jet(self, params, order, check=check)


def jet(s: Hypersurface, params, order=1, check=True) -> SurfaceJet:
    if not 0 <= order <= expr.MAX_ORDER:
        raise ValueError(f"jet order must be in 0..{expr.MAX_ORDER}")
    params = np.array(params, dtype=float)
    flat = s._evaluator(order)(*params)
    values = np.array(flat).reshape(_COUNT[order], 5)
    j = SurfaceJet(params, order, values)
    if check and order >= 1:
        margin = j.regularity_margin()
        if margin <= REGULARITY_TOL:
            raise NotRegular(f"surface {s.name!r} not regular at {params.tolist()} (margin {margin:.3e})")
    return j


def unit_normal(j: SurfaceJet):
    nbar = j.normal_vector()
    n = norm(nbar)
    if n == 0.0 or j.regularity_margin(nbar) <= REGULARITY_TOL:
        raise NotRegular("tangent vectors are dependent; normal undefined")
    return nbar / n


def first_fundamental(j: SurfaceJet):
    P = j.tangents
    G = P @ P.T
    return 0.5 * (G + G.T)


def second_fundamental(j: SurfaceJet, N):
    H = j.tensor(2) @ np.asarray(N, dtype=float)
    return 0.5 * (H + H.T)
