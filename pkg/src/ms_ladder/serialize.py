"""Deterministic JSON output.

Floats are written with 17 significant digits and keys are sorted, so equal
inputs give byte-identical files. Complex numbers become ``[re, im]`` pairs.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .tolerances import Tolerances


def _float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0.0"  # folds -0.0 as well
    return format(x, ".17g")


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, list):
        if not obj:
            return "[]"
        # flat lists of numbers stay on one line
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_encode(x, indent, level) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(x, indent, level + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items())
        return "{\n" + ",\n".join(f"{pad}{_encode(k, indent, level)}: {_encode(v, indent, level + 1)}"
                                  for k, v in items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(to_jsonable(obj), indent, 0) + "\n"


def system_hash(system) -> str:
    """SHA-256 of the canonical JSON form of a ladder system."""
    from .ladder import system_to_dict

    return hashlib.sha256(dumps(system_to_dict(system), indent=0).encode()).hexdigest()


def report_to_dict(report, tol: Tolerances | None = None) -> dict:
    """Everything needed to rebuild ``S`` and the chains of a decomposition."""
    t = report.transformation
    out = {
        "degeneracies": list(report.degeneracies),
        "detunings": list(report.detunings),
        "envelope_ids": list(report.envelope_ids),
        "transformation": {
            "blocks": [np.asarray(b) for b in t.blocks],
            "order": None if t.order is None else list(t.order),
        },
        "coupling_blocks": [
            {"matrix": blk.matrix,
             "links": [{"lower": ln.lower, "upper": ln.upper, "lambda": ln.value} for ln in blk.links]}
            for blk in report.coupling_blocks
        ],
        "chains": [
            {"members": [list(m) for m in c.members], "couplings": list(c.couplings),
             "envelope_ids": list(c.envelope_ids), "detunings": list(c.detunings)}
            for c in report.chains
        ],
        "census": report.census.as_dict(),
        "census_text": str(report.census),
        "commutator_residuals": list(report.commutator_residuals),
        "notes": list(report.notes),
    }
    if tol is not None:
        out["tolerances"] = tol.as_dict()
    return out


def sparsity_pattern(h: np.ndarray, threshold: float) -> str:
    """Text picture of a matrix: ``x`` for entries above ``threshold``, ``.`` otherwise."""
    mask = np.abs(h) > threshold
    return "\n".join(" ".join("x" if m else "." for m in row) for row in mask) + "\n"
