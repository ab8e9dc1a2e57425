"""Reading systems, vectors and matrices from JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema

from .catalog import (DirichletSLOnPi, FAMILY_ALIASES, HalfLineKinetic, ImpulseOnUnit,
                      OperatorSpec, OrderedRepData, SymbolicSpectral, gesztesy_kirsch_cell)
from .errors import ParseError, SchemaError, UnsupportedFamily
from .realset import EPS_ATOM, RealSet, SpectralMeasureClass, WeightedPPMeasure, _num
from .vectorop import EMZSystem

SCHEMA_VERSION = "1.0"

_number = {"type": "number"}
_bound = {"anyOf": [_number, {"type": "string", "enum": ["inf", "-inf", "+inf"]},
                    {"type": "null"}]}
_interval = {"anyOf": [
    {"type": "array", "items": _bound, "minItems": 2, "maxItems": 2},
    {"type": "object", "required": ["lo", "hi"],
     "properties": {"lo": _bound, "hi": _bound, "lo_closed": {"type": "boolean"},
                    "hi_closed": {"type": "boolean"}}}]}
SET_SCHEMA = {
    "type": "object",
    "properties": {
        "window": {"type": "array", "items": _number},
        "intervals": {"type": "array", "items": _interval},
        "atoms": {"type": "array", "items": _number},
        "progression": {"type": "object", "required": ["step"],
                        "properties": {"offset": _number, "step": _number,
                                       "min": _bound, "max": _bound}},
        "exclude": {"$ref": "#/definitions/set"},
        "generator": {"type": "string"},
    },
    "additionalProperties": False,
}
SYSTEM_SCHEMA = {
    "type": "object",
    "definitions": {"set": SET_SCHEMA},
    "required": ["operators", "window"],
    "properties": {
        "window": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        "eps_atom": {"type": "number", "exclusiveMinimum": 0},
        "operators": {"type": "array", "minItems": 1, "items": {
            "type": "object", "required": ["id", "family"],
            "properties": {
                "id": {"type": "string"},
                "family": {"type": "string"},
                "params": {"type": "object"},
                "spectral_data": {"type": "object", "properties": {
                    "subspectrum": {"$ref": "#/definitions/set"},
                    "theta": {"type": "object", "properties": {
                        "ac": {"$ref": "#/definitions/set"},
                        "pp": {"$ref": "#/definitions/set"}}},
                    "mult_sets": {"type": "array", "items": {"$ref": "#/definitions/set"}},
                    "pp_weights": {"type": "array", "items": {
                        "type": "array", "items": _number, "minItems": 2, "maxItems": 2}},
                    "description": {"type": "string"}}},
            }}},
        "matrices": {"type": "array", "items": {"type": "object"}},
    },
}
MATRIX_SCHEMA = {
    "type": "object", "required": ["n", "interval", "entries"],
    "properties": {"n": {"type": "integer", "minimum": 2},
                   "interval": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                   "entries": {"type": "array", "items": {"type": "array"}}},
}


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _validate(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{what} at {where}: {exc.message}") from None


def check_window(window):
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise SchemaError(f"window must satisfy lo < hi with finite ends, got {list(window)}")
    return float(lo), float(hi)


def parse_set(d: dict, window, eps=EPS_ATOM) -> RealSet:
    s = RealSet.from_dict(d, window=window, eps=eps)
    if "exclude" in d:
        s = s - parse_set(d["exclude"], window, eps)
    return s


def _symbolic(sd: dict, window, eps) -> SymbolicSpectral:
    empty = RealSet.empty(window, eps)
    if "theta" in sd:
        ac = parse_set(sd["theta"].get("ac", {}), window, eps)
        pp = parse_set(sd["theta"].get("pp", {}), window, eps)
        theta = SpectralMeasureClass(ac.interval_part(), pp.atom_part())
    elif "subspectrum" in sd:
        theta = SpectralMeasureClass.from_set(parse_set(sd["subspectrum"], window, eps))
    else:
        raise SchemaError("spectral_data needs 'theta' or 'subspectrum'")
    mult = [parse_set(m, window, eps) for m in sd.get("mult_sets", [])] or [theta.support()]
    weights = None
    if sd.get("pp_weights"):
        weights = WeightedPPMeasure(tuple((float(p), float(w)) for p, w in sd["pp_weights"]), eps)
    try:
        data = OrderedRepData(theta, mult, weights)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    return SymbolicSpectral(data, description=sd.get("description", ""))


def parse_operator(d: dict, window, eps=EPS_ATOM) -> OperatorSpec:
    fam = FAMILY_ALIASES.get(d["family"].lower().replace("-", "_"))
    p = d.get("params", {})
    try:
        if fam == "half_line_kinetic":
            k = p.get("k", "inf")
            family = HalfLineKinetic(str(p.get("sign", "-")), math.inf if k is None else _num(k))
        elif fam == "impulse":
            family = ImpulseOnUnit(float(p.get("alpha", 0.0)))
        elif fam == "dirichlet_pi":
            family = DirichletSLOnPi()
        elif fam == "symbolic":
            if "spectral_data" not in d:
                raise SchemaError(f"operator {d['id']}: symbolic family needs spectral_data")
            family = _symbolic(d["spectral_data"], window, eps)
        elif fam == "gesztesy_kirsch":
            family = gesztesy_kirsch_cell(window, eps)
        else:
            raise UnsupportedFamily(f"operator {d['id']}: unknown family {d['family']!r}")
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"operator {d['id']}: {exc}") from None
    return OperatorSpec(d["id"], family)


def system_from_dict(doc: dict, window=None, eps=None) -> EMZSystem:
    _validate(doc, SYSTEM_SCHEMA, "system")
    w = check_window(window if window is not None else doc["window"])
    eps = eps or doc.get("eps_atom", EPS_ATOM)
    ops = [parse_operator(o, w, eps) for o in doc["operators"]]
    ids = [o.id for o in ops]
    if len(set(ids)) != len(ids):
        raise SchemaError(f"operator ids must be unique: {ids}")
    return EMZSystem(ops, w, eps)


def load_system(path, window=None, eps=None) -> EMZSystem:
    return system_from_dict(load_json(path), window, eps)


def validate_matrix_doc(doc: dict):
    _validate(doc, MATRIX_SCHEMA, "matrix")


def bundled(name: str) -> Path:
    """Path of a fixture shipped with the package."""
    return Path(__file__).parent / "data" / name
