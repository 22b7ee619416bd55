"""JSON instance files and reports.

An instance file is a JSON object with the space fields ``weights``,
``fine`` and ``coarse`` plus optional payload sections:

``x``          module element (one number per E-atom)
``set``        stratified convex set (``{"atoms": [{"V": ...} | {"H": ...}], ...}``)
``seminorms``  list of seminorm objects
``functional`` ``{"coeffs": [...]}``
``function``   ``{"atoms": [piece, ...]}``
``gamma``      entropic risk aversion
``eps``        random scalar, one value per F-atom
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .convex_sets import StratifiedConvexSet
from .fenchel import StratifiedConvexFunction
from .l0_lattice import RandomScalar
from .prob_core import SpaceError, StratifiedSpace, make_space
from .rlc_module import ModuleElement, ModuleFunctional, seminorm_from_json


class SchemaError(ValueError):
    """Malformed instance; the message names the offending field."""


def space_to_json(space: StratifiedSpace) -> dict:
    return {
        "weights": space.weights.tolist(),
        "fine": [list(b) for b in space.fine],
        "coarse": [list(b) for b in space.coarse],
    }


def space_from_json(data) -> StratifiedSpace:
    if not isinstance(data, dict):
        raise SchemaError("instance: expected a JSON object")
    for key in ("weights", "fine", "coarse"):
        if key not in data:
            raise SchemaError(f"missing field {key!r}")
    if not isinstance(data["weights"], list):
        raise SchemaError("field 'weights': expected a list of numbers")
    for key in ("fine", "coarse"):
        if not isinstance(data[key], list) or not all(isinstance(b, list) for b in data[key]):
            raise SchemaError(f"field {key!r}: expected a list of index lists")
    try:
        return make_space(data["weights"], data["fine"], data["coarse"])
    except SpaceError as e:
        raise SchemaError(f"space: {e}") from e


@dataclass
class Instance:
    space: StratifiedSpace
    x: ModuleElement | None = None
    set: StratifiedConvexSet | None = None
    seminorms: list | None = None
    functional: ModuleFunctional | None = None
    function: StratifiedConvexFunction | None = None
    gamma: float | None = None
    eps: RandomScalar | None = None

    def to_json(self) -> dict:
        out = space_to_json(self.space)
        if self.x is not None:
            out["x"] = self.x.to_json()
        if self.set is not None:
            out["set"] = self.set.to_json()
        if self.seminorms is not None:
            out["seminorms"] = [s.to_json() for s in self.seminorms]
        if self.functional is not None:
            out["functional"] = self.functional.to_json()
        if self.function is not None:
            out["function"] = self.function.to_json()
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.eps is not None:
            out["eps"] = self.eps.to_json()
        return out


def _section(name, fn):
    try:
        return fn()
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"field {name!r}: {e}") from e


def instance_from_json(data) -> Instance:
    space = space_from_json(data)
    inst = Instance(space)
    if "x" in data:
        inst.x = _section("x", lambda: _element(data["x"], space))
    if "set" in data:
        inst.set = _section("set", lambda: StratifiedConvexSet.from_json(data["set"], space))
    if "seminorms" in data:
        inst.seminorms = _section("seminorms", lambda: [_validated(seminorm_from_json(s, space.n_atoms), space) for s in data["seminorms"]])
    if "functional" in data:
        inst.functional = _section("functional", lambda: _functional(data["functional"], space))
    if "function" in data:
        inst.function = _section("function", lambda: StratifiedConvexFunction.from_json(data["function"], space))
    if "gamma" in data:
        inst.gamma = _section("gamma", lambda: _positive(data["gamma"]))
    if "eps" in data:
        inst.eps = _section("eps", lambda: RandomScalar.from_json(data["eps"]))
    return inst


def _element(v, space):
    x = ModuleElement(v)
    if len(x) != space.dim:
        raise SchemaError(f"field 'x': expected {space.dim} coordinates, got {len(x)}")
    return x


def _functional(v, space):
    f = ModuleFunctional.from_json(v)
    if f.coeffs.size != space.dim:
        raise SchemaError(f"field 'functional': expected {space.dim} coefficients, got {f.coeffs.size}")
    return f


def _validated(s, space):
    s.validate(space)
    return s


def _positive(g):
    g = float(g)
    if not g > 0:
        raise SchemaError("field 'gamma': must be positive")
    return g


def load_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON ({e})") from e
    return instance_from_json(data)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=2))


def _default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return _finite_or_token(float(o))
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _finite_or_token(v: float):
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return v


def _sanitize(o):
    if isinstance(o, np.ndarray):
        return _sanitize(o.tolist())
    if isinstance(o, float):
        return _finite_or_token(o)
    if isinstance(o, dict):
        return {k: _sanitize(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_sanitize(v) for v in o]
    return o


def dumps_report(report: dict) -> str:
    return json.dumps(_sanitize(report), indent=2, sort_keys=True, default=_default)


def save_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report))


def load_report(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SchemaError(f"cannot read report {path}: {e}") from e
