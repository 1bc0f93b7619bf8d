"""Scene files: four hypersurfaces, a starting point and optional tolerances.

A scene is a UTF-8 JSON document::

    {
      "name": "optional label",
      "surfaces": [
        {"name": "M1", "components": ["...", "...", "...", "...", "..."],
         "domain": [[lo, hi], [lo, hi], [lo, hi], [lo, hi]]},
        ...                                   (exactly four surfaces)
      ],
      "point": {"params": [[p, p, p, p], ...]},   (one 4-tuple per surface)
      "tolerances": {"agreement": 1e-9, "corrector": 1e-12,
                     "max_newton": 25, "min_step": 1e-8, "step": 1e-3},
      "reference": {"kappa1": 1.2, ...}
    }

Point parameters may be numbers or constant expressions such as ``"pi/4"``.
``reference`` is optional and only echoed in reports next to the computed
values (with the difference); it is never checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import expr
from .curve import IntersectionPoint
from .errors import DomainError, ParseError, SceneError
from .surface import Hypersurface
from .tracer import TraceConfig

DEFAULT_TOLERANCES = {
    "agreement": 1e-9,
    "corrector": 1e-12,
    "max_newton": 25,
    "min_step": 1e-8,
    "step": 1e-3,
}


@dataclass
class Scene:
    surfaces: list
    params: np.ndarray
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    name: str = ""
    # optional published values to compare against, e.g. {"kappa1": 1.25679}
    reference: dict = field(default_factory=dict)

    def start(self, check=True) -> IntersectionPoint:
        return IntersectionPoint.from_params(
            self.surfaces, self.params, tol=self.tolerances["agreement"], check=check
        )

    def trace_config(self, **overrides) -> TraceConfig:
        tol = self.tolerances
        cfg = dict(
            h=tol["step"],
            tol=tol["corrector"],
            max_iter=int(tol["max_newton"]),
            min_step=tol["min_step"],
        )
        cfg.update(overrides)
        return TraceConfig(**cfg)


def _constant(value, where):
    if isinstance(value, bool):
        raise SceneError(f"{where}: expected a number or expression, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise SceneError(f"{where}: expected a number or expression, got {value!r}")
    try:
        node = expr.parse(value)
    except ParseError as exc:
        raise SceneError(f"{where}: {exc.reason} at offset {exc.offset}") from exc
    if not expr.is_constant(node):
        raise SceneError(f"{where}: point parameters must not depend on u1..u4")
    try:
        return expr.evaluate(node, (0.0, 0.0, 0.0, 0.0))
    except DomainError as exc:
        raise SceneError(f"{where}: {exc}") from exc


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SceneError(f"{where}: missing field {key!r}")
    return obj[key]


def scene_from_dict(data) -> Scene:
    surfaces_raw = _require(data, "surfaces", "scene")
    if not isinstance(surfaces_raw, list) or len(surfaces_raw) != 4:
        n = len(surfaces_raw) if isinstance(surfaces_raw, list) else "no"
        raise SceneError(f"expected 4 surfaces, found {n}")
    surfaces = []
    for k, raw in enumerate(surfaces_raw, start=1):
        name = raw.get("name", f"M{k}") if isinstance(raw, dict) else f"M{k}"
        comps = _require(raw, "components", f"surface {name!r}")
        if not isinstance(comps, list) or len(comps) != 5 or not all(isinstance(c, str) for c in comps):
            raise SceneError(f"surface {name!r}: 'components' must be a list of 5 expression strings")
        domain = raw.get("domain")
        if domain is not None:
            try:
                domain = np.array(domain, dtype=float).reshape(4, 2)
            except (TypeError, ValueError) as exc:
                raise SceneError(f"surface {name!r}: 'domain' must be four [lo, hi] pairs") from exc
        surfaces.append(Hypersurface(name, comps, domain))

    point = _require(data, "point", "scene")
    params_raw = _require(point, "params", "point")
    if not isinstance(params_raw, list) or len(params_raw) != 4:
        raise SceneError("point: 'params' must hold one 4-tuple per surface")
    params = np.zeros((4, 4))
    for i, tup in enumerate(params_raw):
        if not isinstance(tup, list) or len(tup) != 4:
            raise SceneError(f"point: parameters of surface {i + 1} must be a 4-tuple")
        for j, v in enumerate(tup):
            params[i, j] = _constant(v, f"point parameter {j + 1} of surface {surfaces[i].name!r}")
        if not surfaces[i].in_domain(params[i]):
            raise SceneError(f"point: parameters of surface {surfaces[i].name!r} lie outside its domain")

    tolerances = dict(DEFAULT_TOLERANCES)
    extra = data.get("tolerances") or {}
    if not isinstance(extra, dict):
        raise SceneError("'tolerances' must be an object")
    for key, value in extra.items():
        if key not in DEFAULT_TOLERANCES:
            raise SceneError(f"unknown tolerance {key!r}")
        tolerances[key] = _constant(value, f"tolerance {key!r}")
    reference = {}
    for key, value in (data.get("reference") or {}).items():
        reference[str(key)] = _constant(value, f"reference value {key!r}")
    return Scene(surfaces, params, tolerances, str(data.get("name", "")), reference)


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneError(f"cannot read scene file {str(path)!r}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{path.name}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise SceneError(f"{path.name}: top level must be an object")
    scene = scene_from_dict(data)
    if not scene.name:
        scene.name = path.stem
    return scene


def fixture_path(name):
    """Path of a scene shipped with the package (``name`` without ``.json``)."""
    return Path(str(resources.files("r5curve") / "fixtures" / f"{name}.json"))


def load_fixture(name) -> Scene:
    return load_scene(fixture_path(name))
