"""Deterministic JSON input and output.

Exact rationals travel as strings ("3/4", "0.04"); floats use Python's
shortest round-trip repr; every dump is canonical (sorted keys, two-space
indent, trailing newline), so identical inputs produce byte-identical
files.  Schema violations raise ``SchemaError`` naming the offending field.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import polyx as px
from .curves import ProfileCurve
from .errors import SchemaError
from .insertion import StraightPieceSummary, TubeAtlas
from .plug import PlugSpec

# ---------------------------------------------------------------------------
# generic conversion and canonical dumping
# ---------------------------------------------------------------------------


def to_jsonable(obj):
    """Recursively convert package objects to plain JSON-compatible data."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise SchemaError(f"cannot serialize object of type {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(canonical_dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# field-level parsing helpers
# ---------------------------------------------------------------------------


def parse_fraction(value, field: str) -> Fraction:
    """Exact rational from a JSON value.

    Strings accept "p/q" and decimal literals; integers are exact; floats
    are read through their shortest decimal repr (so 0.04 means 1/25, not
    the binary float below it).
    """
    if isinstance(value, bool):
        raise SchemaError(f"{field}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"{field}: not a rational: {value!r}") from exc
    raise SchemaError(f"{field}: expected a rational, got {type(value).__name__}")


def parse_float(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SchemaError(f"{field}: expected a number, got {type(value).__name__}")
    try:
        return float(Fraction(value) if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{field}: not a number: {value!r}") from exc


def parse_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{field}: expected an integer, got {type(value).__name__}")
    return value


def require_kind(data, kind: str, where: str) -> dict:
    if not isinstance(data, dict):
        raise SchemaError(f"{where}: expected a JSON object")
    got = data.get("kind")
    if got != kind:
        raise SchemaError(f"{where}.kind: expected {kind!r}, got {got!r}")
    return data


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise SchemaError(f"{where}.{key}: missing required field")
    return data[key]


# ---------------------------------------------------------------------------
# profile curves
# ---------------------------------------------------------------------------


def curve_to_json(curve: ProfileCurve) -> dict:
    segments = []
    for h1, h2, exact in zip(curve.h1_polys, curve.h2_polys, curve.exact):
        segments.append(
            {
                "h1": [str(c) for c in h1],
                "h2": [str(c) for c in h2],
                "exact": bool(exact),
            }
        )
    return {
        "kind": "profile_curve",
        "breakpoints": [str(b) for b in curve.breakpoints],
        "segments": segments,
    }


def curve_from_json(data, where: str = "curve") -> ProfileCurve:
    data = require_kind(data, "profile_curve", where)
    raw_bp = _require(data, "breakpoints", where)
    raw_segs = _require(data, "segments", where)
    if not isinstance(raw_bp, list) or len(raw_bp) < 2:
        raise SchemaError(f"{where}.breakpoints: need at least two entries")
    if not isinstance(raw_segs, list) or len(raw_segs) != len(raw_bp) - 1:
        raise SchemaError(
            f"{where}.segments: need exactly one segment per breakpoint gap "
            f"({len(raw_bp) - 1}), got "
            f"{len(raw_segs) if isinstance(raw_segs, list) else type(raw_segs).__name__}"
        )
    breakpoints = [
        parse_fraction(b, f"{where}.breakpoints[{i}]") for i, b in enumerate(raw_bp)
    ]
    h1s, h2s, exact = [], [], []
    for i, seg in enumerate(raw_segs):
        if not isinstance(seg, dict):
            raise SchemaError(f"{where}.segments[{i}]: expected an object")
        for name, target in (("h1", h1s), ("h2", h2s)):
            coeffs = _require(seg, name, f"{where}.segments[{i}]")
            if not isinstance(coeffs, list) or not coeffs:
                raise SchemaError(
                    f"{where}.segments[{i}].{name}: expected a coefficient list"
                )
            target.append(
                px.poly(
                    [
                        parse_fraction(c, f"{where}.segments[{i}].{name}[{j}]")
                        for j, c in enumerate(coeffs)
                    ]
                )
            )
        exact.append(bool(seg.get("exact", True)))
    return ProfileCurve.from_segments(breakpoints, h1s, h2s, exact)


# ---------------------------------------------------------------------------
# tube atlases
# ---------------------------------------------------------------------------


def atlas_to_json(atlas: TubeAtlas) -> dict:
    return {
        "kind": "tube_atlas",
        "alpha_tmin": str(atlas.alpha_tmin),
        "pieces": [
            {"a": str(p.a), "b": str(p.b), "c": str(p.c)} for p in atlas.pieces
        ],
        "opaque": str(atlas.opaque),
    }


def atlas_from_json(data, where: str = "atlas") -> TubeAtlas:
    data = require_kind(data, "tube_atlas", where)
    tmin = parse_fraction(_require(data, "alpha_tmin", where), f"{where}.alpha_tmin")
    raw_pieces = _require(data, "pieces", where)
    if not isinstance(raw_pieces, list) or not raw_pieces:
        raise SchemaError(f"{where}.pieces: expected a non-empty list")
    pieces = []
    for i, piece in enumerate(raw_pieces):
        if not isinstance(piece, dict):
            raise SchemaError(f"{where}.pieces[{i}]: expected an object")
        pieces.append(
            StraightPieceSummary(
                a=parse_fraction(_require(piece, "a", f"{where}.pieces[{i}]"),
                                 f"{where}.pieces[{i}].a"),
                b=parse_fraction(_require(piece, "b", f"{where}.pieces[{i}]"),
                                 f"{where}.pieces[{i}].b"),
                c=parse_fraction(piece.get("c", 0), f"{where}.pieces[{i}].c"),
            )
        )
    opaque = parse_fraction(data.get("opaque", 0), f"{where}.opaque")
    return TubeAtlas(alpha_tmin=tmin, pieces=tuple(pieces), opaque=opaque)


# ---------------------------------------------------------------------------
# plug specs
# ---------------------------------------------------------------------------

_PLUG_INT_FIELDS = {"n", "beads_per_sector"}
_PLUG_OPT_FIELDS = {"ring_width", "collar_width"}


def plug_spec_to_json(spec: PlugSpec) -> dict:
    out = {"kind": "plug_spec"}
    for f in dataclasses.fields(PlugSpec):
        out[f.name] = getattr(spec, f.name)
    return out


def plug_spec_from_json(data, where: str = "plug_spec") -> PlugSpec:
    data = require_kind(data, "plug_spec", where)
    known = {f.name for f in dataclasses.fields(PlugSpec)}
    kwargs = {}
    for key, value in data.items():
        if key == "kind":
            continue
        if key not in known:
            raise SchemaError(f"{where}.{key}: unknown plug parameter")
        if key in _PLUG_INT_FIELDS:
            kwargs[key] = parse_int(value, f"{where}.{key}")
        elif key in _PLUG_OPT_FIELDS and value is None:
            kwargs[key] = None
        else:
            kwargs[key] = parse_float(value, f"{where}.{key}")
    if "n" not in kwargs:
        raise SchemaError(f"{where}.n: missing required field")
    return PlugSpec(**kwargs)
