"""Instance-spec parsing and report serialization (JSON, [re, im] pairs)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema
import numpy as np

from .algebra import Algebra, Element, Tolerance
from .doubling import RHO_KINDS, make_doubling_instance
from .errors import CStarError, RejectedInput
from .maps import AlgebraMap
from .witness import DEFAULT_WINDOW, PositiveFunctional

SCHEMA_VERSION = "1"

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_matrix = {"type": "array", "items": {"type": "array", "items": _complex}}

SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["blocks", "endomorphism"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "blocks": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "endomorphism": {"$ref": "#/$defs/map"},
        "transfer": {"$ref": "#/$defs/map"},
        "functional": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {"kind": {"const": "trace"}, "normalized": {"type": "boolean"}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "matrices"],
                 "properties": {"kind": {"const": "density"}, "matrices": {"type": "array", "items": _matrix}}},
            ]
        },
        "tolerance": {
            "type": "object", "additionalProperties": False,
            "properties": {"eq_tol": {"type": "number", "exclusiveMinimum": 0},
                           "rank_tol": {"type": "number", "exclusiveMinimum": 0}},
        },
        "window": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "samples": {"type": "integer", "minimum": 1},
    },
    "$defs": {
        "map": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["kind", "data"],
                 "properties": {"kind": {"const": "matrix"}, "data": _matrix}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "assignment"],
                 "properties": {"kind": {"const": "block_map"},
                                "assignment": {"type": "array",
                                               "items": {"type": ["integer", "null"], "minimum": 0}}}},
                {"type": "object", "additionalProperties": False, "required": ["kind", "N"],
                 "properties": {"kind": {"const": "doubling"}, "N": {"type": "integer"},
                                "rho_kind": {"enum": list(RHO_KINDS)},
                                "rho": {"type": "array", "items": {"type": "number"}}}},
            ]
        }
    },
}


class SpecError(CStarError):
    """The instance spec is malformed (CLI exit code 2)."""


@dataclass(frozen=True, eq=False)
class ParsedSpec:
    raw: dict
    name: str
    algebra: Algebra
    delta: AlgebraMap
    delta_star: Optional[AlgebraMap]
    functional: Optional[PositiveFunctional]
    tolerance: Tolerance
    window: int
    seed: int
    samples: int


def _complex_matrix(data, shape, what) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except ValueError as exc:
        raise SpecError(f"{what}: ragged matrix") from exc
    if arr.ndim != 3 or arr.shape[:2] != shape or arr.shape[2] != 2:
        raise SpecError(f"{what}: expected {shape[0]}x{shape[1]} entries of [re, im], got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def _parse_map(obj: dict, alg: Algebra, role: str) -> AlgebraMap:
    kind = obj["kind"]
    try:
        if kind == "matrix":
            return AlgebraMap(alg, _complex_matrix(obj["data"], (alg.dim, alg.dim), role))
        if kind == "block_map":
            return AlgebraMap.from_block_assignment(alg, obj["assignment"])
        inst = make_doubling_instance(obj["N"], obj.get("rho_kind", "constant_half"), obj.get("rho"))
    except CStarError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{role}: {exc}") from exc
    if inst.algebra.block_dims != alg.block_dims:
        raise SpecError(f"{role}: doubling with N={obj['N']} needs blocks [1]*{obj['N']}")
    return inst.delta if role == "endomorphism" else inst.delta_star


def parse_spec(text: str, env_tol: Optional[float] = None) -> ParsedSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SpecError(f"schema violation at '{path}': {exc.message}") from exc

    alg = Algebra(tuple(raw["blocks"]))
    delta = _parse_map(raw["endomorphism"], alg, "endomorphism")
    delta_star = _parse_map(raw["transfer"], alg, "transfer") if "transfer" in raw else None

    functional = None
    fobj = raw.get("functional")
    try:
        if fobj and fobj["kind"] == "trace":
            functional = PositiveFunctional.trace(alg, fobj.get("normalized", True))
        elif fobj:
            mats = fobj["matrices"]
            if len(mats) != alg.n_blocks:
                raise SpecError(f"functional: {alg.n_blocks} density matrices expected, got {len(mats)}")
            functional = PositiveFunctional(alg, tuple(
                _complex_matrix(m, (d, d), f"functional block {b}") for b, (m, d) in enumerate(zip(mats, alg.block_dims))))
    except RejectedInput as exc:
        raise SpecError(f"functional: {exc}") from exc

    tol = Tolerance()
    if env_tol is not None:
        tol = Tolerance(eq_tol=env_tol, rank_tol=tol.rank_tol)
    t = raw.get("tolerance", {})
    tol = Tolerance(eq_tol=t.get("eq_tol", tol.eq_tol), rank_tol=t.get("rank_tol", tol.rank_tol))
    return ParsedSpec(raw=raw, name=raw.get("name", ""), algebra=alg, delta=delta, delta_star=delta_star,
                      functional=functional, tolerance=tol, window=raw.get("window", DEFAULT_WINDOW),
                      seed=raw.get("seed", 0), samples=raw.get("samples", 64))


# -- serialization --------------------------------------------------------

def _clean_float(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} in report")
    # 12 significant digits keep reports stable against last-bit noise
    return float(f"{x:.12g}") + 0.0


def complex_pairs(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [[_clean_float(z.real), _clean_float(z.imag)] for z in m]
    return [complex_pairs(row) for row in m]


def element_to_json(x: Element) -> list:
    return [complex_pairs(b) for b in x.blocks]


def map_to_spec(m: AlgebraMap) -> dict:
    return {"kind": "matrix", "data": complex_pairs(m.matrix)}


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars, tuples and floats to canonical JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean_float(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=True) + "\n"
