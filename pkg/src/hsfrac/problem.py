"""On-disk problem descriptions and evaluation reports (JSON)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from .errors import ParameterError
from .params import Params
from .quadrature import DEFAULT_CONFIG, QuadConfig
from .solvers import BumpSum, log_grid

SCHEMA_VERSION = 1

_BUMP = {
    "type": "object",
    "required": ["center", "radius"],
    "properties": {
        "center": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 3},
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "weight": {"type": "number"},
        "profile": {"enum": ["poly", "exp"]},
        "q": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

_DATA = {"type": "array", "items": _BUMP}

_GRID = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["list", "log", "linear"]},
        "points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "n": {"type": "integer", "minimum": 1},
        "tangential": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "params", "grid"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "params": {
            "type": "object",
            "required": ["N", "m", "sigma"],
            "properties": {
                "N": {"type": "integer", "minimum": 1, "maximum": 3},
                "m": {"type": "integer", "minimum": 0},
                "sigma": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
            "additionalProperties": False,
        },
        "f": _DATA,
        "g": _DATA,
        "h": {"type": "array", "items": _DATA},
        "quad": {
            "type": "object",
            "properties": {
                "abs_tol": {"type": "number", "exclusiveMinimum": 0},
                "rel_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_subdivisions": {"type": "integer", "minimum": 1},
                "grading_ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "tail_radius": {"type": "number", "exclusiveMinimum": 1},
                "extrapolation_levels": {"type": "integer", "minimum": 3},
            },
            "additionalProperties": False,
        },
        "grid": _GRID,
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


class SpecError(ParameterError):
    """A problem file that does not match the schema."""


def validate_problem(doc: dict) -> None:
    """Raise SpecError naming the offending field for every schema violation."""
    validator = jsonschema.Draft202012Validator(PROBLEM_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise SpecError("invalid problem spec:\n  " + "\n  ".join(lines))


@dataclass(frozen=True)
class ProblemSpec:
    params: Params
    f: Optional[BumpSum] = None
    g: Optional[BumpSum] = None
    h: Optional[tuple] = None
    quad: dict = field(default_factory=dict)
    grid: dict = field(default_factory=lambda: {"kind": "list", "points": []})
    seed: int = 0

    @property
    def cfg(self) -> QuadConfig:
        return DEFAULT_CONFIG.replace(**self.quad) if self.quad else DEFAULT_CONFIG

    def points(self) -> np.ndarray:
        return grid_points(self.grid, self.params.N)

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "params": {"N": self.params.N, "m": self.params.m, "sigma": self.params.sigma},
            "grid": self.grid,
            "seed": self.seed,
        }
        if self.f is not None:
            out["f"] = [b.as_dict() for b in self.f.terms]
        if self.g is not None:
            out["g"] = [b.as_dict() for b in self.g.terms]
        if self.h is not None:
            out["h"] = [[b.as_dict() for b in hk.terms] for hk in self.h]
        if self.quad:
            out["quad"] = dict(self.quad)
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemSpec":
        validate_problem(doc)
        pr = doc["params"]
        params = Params(int(pr["N"]), int(pr["m"]), float(pr["sigma"]))
        N = params.N

        def bumps(items, tag):
            return BumpSum.from_dict({"domain_tag": tag, "N": N, "terms": items})

        f = bumps(doc["f"], "interior") if "f" in doc else None
        g = bumps(doc["g"], "exterior") if "g" in doc else None
        h = None
        if "h" in doc:
            h = tuple(bumps(items, "boundary") for items in doc["h"])
            if len(h) > params.m + 1:
                raise SpecError(f"h: {len(h)} boundary data given, at most m+1 = {params.m + 1} allowed")
            h = h + tuple(BumpSum.empty("boundary", N) for _ in range(params.m + 1 - len(h)))
        for data in (f, g, *(h or ())):
            if data is not None:
                data.validate_for(params)
        return cls(params, f, g, h, dict(doc.get("quad", {})), dict(doc["grid"]), int(doc.get("seed", 0)))

    @classmethod
    def load(cls, path) -> "ProblemSpec":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(dumps(self.to_dict()))


def grid_points(grid: dict, N: int) -> np.ndarray:
    kind = grid["kind"]
    if kind == "list":
        pts = np.asarray(grid.get("points", []), dtype=float)
        if pts.size == 0:
            return np.zeros((0, N))
        if pts.ndim != 2 or pts.shape[1] != N:
            raise SpecError(f"grid/points: expected rows of length {N}")
        return pts
    for key in ("lo", "hi", "n"):
        if key not in grid:
            raise SpecError(f"grid/{key}: required for a {kind} lattice")
    tang = grid.get("tangential", [[0.0] * (N - 1)])
    if N > 1 and any(len(t) != N - 1 for t in tang):
        raise SpecError(f"grid/tangential: expected rows of length {N - 1}")
    if kind == "log":
        return log_grid(grid["lo"], grid["hi"], grid["n"], tang, N)
    x1 = np.linspace(grid["lo"], grid["hi"], grid["n"])
    if N == 1:
        return x1[:, None]
    return np.array([[a, *t] for t in tang for a in x1])


def dumps(doc: dict) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class EvalReport:
    """Everything a run produced; each number sits next to its tolerance."""

    kind: str
    config: dict
    sections: dict = field(default_factory=dict)
    passed: Optional[bool] = None
    timings: Optional[dict] = None

    def add(self, name: str, payload) -> None:
        self.sections[name] = payload

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION, "kind": self.kind, "config": self.config, **self.sections}
        if self.passed is not None:
            out["passed"] = self.passed
        if self.timings is not None:
            out["timings"] = self.timings
        return out

    def dumps(self) -> str:
        return dumps(self.to_dict())
