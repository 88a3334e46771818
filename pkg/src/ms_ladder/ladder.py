"""Degenerate N-level ladder systems and their RWA Hamiltonians.

Units: hbar = 1. Detunings and coupling entries are angular frequencies, time
is in inverse angular frequency. Coupling-block entries are the *half* Rabi
frequencies, i.e. exactly the numbers that appear off the diagonal of H.

Level ``k`` carries a detuning ``Delta_k`` (cumulative multiphoton detuning;
level 0 is the energy zero). Transition ``n`` couples level ``n`` to level
``n + 1`` through ``f_n(t) * V_n`` where ``V_n`` is a constant
``N_n x N_{n+1}`` matrix and ``f_n`` the envelope named by the block.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidSystem, ParseError, SchemaError

ENVELOPE_KINDS = ("constant", "gaussian", "sin_squared")


@dataclass(frozen=True)
class Envelope:
    """Scalar time profile shared by every element of one coupling block.

    ``gaussian``: ``amplitude * exp(-((t - center) / width)**2)``.
    ``sin_squared``: ``amplitude * sin(pi * (t - center + width/2) / width)**2``
    for ``|t - center| <= width / 2`` and zero outside, i.e. a pulse of total
    duration ``width``. ``constant`` ignores ``center`` and ``width``.
    """

    kind: str
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind != "constant" and not self.width > 0:
            raise ValueError("pulsed envelopes need width > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.amplitude)
        elif self.kind == "gaussian":
            out = self.amplitude * np.exp(-(((t - self.center) / self.width) ** 2))
        else:
            x = (t - self.center) / self.width + 0.5
            out = np.where((x >= 0) & (x <= 1), self.amplitude * np.sin(np.pi * x) ** 2, 0.0)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


@dataclass(frozen=True)
class LevelSet:
    label: str
    degeneracy: int
    detuning: float = 0.0


@dataclass(frozen=True)
class CouplingBlock:
    """Constant factor ``V_n`` of one transition plus the id of its envelope.

    Set ``null_link`` for a deliberately absent transition (all-zero matrix).
    """

    constant_part: np.ndarray
    envelope_id: str
    null_link: bool = False

    def __post_init__(self):
        arr = np.array(self.constant_part, dtype=complex, ndmin=2)
        arr.setflags(write=False)
        object.__setattr__(self, "constant_part", arr)

    @property
    def shape(self):
        return self.constant_part.shape


@dataclass(frozen=True)
class LadderSystem:
    levels: tuple
    transitions: tuple
    envelopes: Mapping[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "envelopes", dict(self.envelopes))

    @property
    def degeneracies(self) -> list:
        return [lv.degeneracy for lv in self.levels]

    @property
    def detunings(self) -> list:
        return [lv.detuning for lv in self.levels]

    @property
    def dim(self) -> int:
        return sum(self.degeneracies)

    @property
    def offsets(self) -> list:
        out = [0]
        for n in self.degeneracies:
            out.append(out[-1] + n)
        return out

    def envelope(self, n: int) -> Callable:
        return self.envelopes[self.transitions[n].envelope_id]

    def envelope_values(self, t) -> list:
        return [float(self.envelope(n)(t)) for n in range(len(self.transitions))]


@dataclass
class Violation:
    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass
class ValidationReport:
    violations: list

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


def validate(system: LadderSystem) -> ValidationReport:
    """Check every structural invariant; never raises."""
    out = []
    levels, transitions = system.levels, system.transitions
    if len(levels) < 2:
        out.append(Violation("levels", f"need at least 2 levels, got {len(levels)}"))
    for k, lv in enumerate(levels):
        if not isinstance(lv.degeneracy, (int, np.integer)) or lv.degeneracy < 1:
            out.append(Violation(f"levels[{k}]", f"degeneracy must be a positive integer, got {lv.degeneracy!r}"))
        if not math.isfinite(lv.detuning):
            out.append(Violation(f"levels[{k}]", "detuning must be finite"))
    if levels and levels[0].detuning != 0:
        out.append(Violation("levels[0]", f"first level is the energy zero; detuning is {levels[0].detuning}"))
    if len(transitions) != max(len(levels) - 1, 0):
        out.append(Violation("transitions", f"expected {len(levels) - 1} transitions, got {len(transitions)}"))
    for n, tr in enumerate(transitions):
        where = f"transitions[{n}]"
        if n + 1 < len(levels):
            want = (levels[n].degeneracy, levels[n + 1].degeneracy)
            if tr.shape != want:
                out.append(Violation(where, f"shape {tr.shape} does not match degeneracies {want}"))
        if not np.all(np.isfinite(tr.constant_part)):
            out.append(Violation(where, "matrix has non-finite entries"))
        elif not tr.null_link and not np.any(tr.constant_part):
            out.append(Violation(where, "all-zero coupling not flagged as a null link"))
        if tr.envelope_id not in system.envelopes:
            out.append(Violation(where, f"unknown envelope id {tr.envelope_id!r}"))
    return ValidationReport(out)


def require_valid(system: LadderSystem) -> None:
    report = validate(system)
    if not report.valid:
        raise InvalidSystem("; ".join(map(str, report.violations)), report.violations)


def coupling_operators(system: LadderSystem) -> tuple:
    """Static pieces of H: the diagonal and one Hermitian operator per transition.

    ``H(t) = diag + sum_n f_n(t) * ops[n]``.
    """
    off = system.offsets
    diagonal = np.concatenate([np.full(lv.degeneracy, lv.detuning, dtype=float) for lv in system.levels])
    ops = []
    for n, tr in enumerate(system.transitions):
        k = np.zeros((system.dim, system.dim), dtype=complex)
        k[off[n]:off[n + 1], off[n + 1]:off[n + 2]] = tr.constant_part
        ops.append(k + k.conj().T)
    return diagonal, ops


def assemble_hamiltonian(system: LadderSystem, t: float) -> np.ndarray:
    """Block-tridiagonal RWA Hamiltonian H(t) in the original basis."""
    require_valid(system)
    off = system.offsets
    h = np.diag(np.concatenate([np.full(lv.degeneracy, lv.detuning) for lv in system.levels])).astype(complex)
    for n, f in enumerate(system.envelope_values(t)):
        block = f * system.transitions[n].constant_part
        h[off[n]:off[n + 1], off[n + 1]:off[n + 2]] = block
        h[off[n + 1]:off[n + 2], off[n]:off[n + 1]] = block.conj().T
    return h


# JSON

def _complex_matrix(value, where):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SchemaError(where, "expected a non-empty list of rows")
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width:
            raise SchemaError(f"{where}[{i}]", f"row length {len(row)} differs from {width}")
        out = []
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)) and not isinstance(entry, bool):
                out.append(complex(entry))
            elif (isinstance(entry, list) and len(entry) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                out.append(complex(entry[0], entry[1]))
            else:
                raise SchemaError(f"{where}[{i}][{j}]", "complex entries are [re, im] pairs")
        rows.append(out)
    return np.array(rows, dtype=complex)


def _complex_scalar(value, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise SchemaError(where, "expected a number or an [re, im] pair")


def _number(obj, key, where, default=None):
    if key not in obj:
        if default is None:
            raise SchemaError(f"{where}.{key}", "missing")
        return default
    value = obj[key]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"{where}.{key}", f"expected a number, got {value!r}")
    return float(value)


def _object(value, where):
    if not isinstance(value, dict):
        raise SchemaError(where, "expected an object")
    return value


def system_from_dict(doc) -> LadderSystem:
    """Build a :class:`LadderSystem` from an already-parsed JSON document."""
    from .angular import PolarizationTriple, build_coupling

    doc = _object(doc, "$")
    for key in ("levels", "transitions", "envelopes"):
        if key not in doc:
            raise SchemaError(key, "missing")
    if not isinstance(doc["levels"], list):
        raise SchemaError("levels", "expected a list")
    levels = []
    for k, item in enumerate(doc["levels"]):
        where = f"levels[{k}]"
        item = _object(item, where)
        label = item.get("label", chr(ord("a") + k))
        if not isinstance(label, str):
            raise SchemaError(f"{where}.label", "expected a string")
        deg = item.get("degeneracy")
        if not isinstance(deg, int) or isinstance(deg, bool) or deg < 1:
            raise SchemaError(f"{where}.degeneracy", f"expected a positive integer, got {deg!r}")
        levels.append(LevelSet(label, deg, _number(item, "detuning", where, 0.0)))

    envelopes = {}
    for name, item in _object(doc["envelopes"], "envelopes").items():
        where = f"envelopes.{name}"
        item = _object(item, where)
        kind = item.get("kind")
        if kind not in ENVELOPE_KINDS:
            raise SchemaError(f"{where}.kind", f"expected one of {ENVELOPE_KINDS}, got {kind!r}")
        try:
            envelopes[name] = Envelope(kind, _number(item, "amplitude", where, 1.0),
                                       _number(item, "center", where, 0.0),
                                       _number(item, "width", where, 1.0))
        except ValueError as exc:
            raise SchemaError(where, str(exc)) from None

    if not isinstance(doc["transitions"], list):
        raise SchemaError("transitions", "expected a list")
    transitions = []
    for n, item in enumerate(doc["transitions"]):
        where = f"transitions[{n}]"
        item = _object(item, where)
        env = item.get("envelope")
        if not isinstance(env, str):
            raise SchemaError(f"{where}.envelope", "expected an envelope id string")
        if "matrix" in item:
            matrix = _complex_matrix(item["matrix"], f"{where}.matrix")
        elif "polarization" in item:
            pol = _object(item["polarization"], f"{where}.polarization")
            triple = PolarizationTriple(*(_complex_scalar(pol.get(c, 0.0), f"{where}.polarization.{c}")
                                          for c in ("r", "p", "l")))
            try:
                jl = _number(item, "J_lower", where)
                ju = _number(item, "J_upper", where)
                matrix = build_coupling(jl, ju, triple)
            except ValueError as exc:
                raise SchemaError(where, str(exc)) from None
            if n + 1 < len(levels) and matrix.shape != (levels[n].degeneracy, levels[n + 1].degeneracy):
                raise SchemaError(where, f"2J+1 sizes {matrix.shape} do not match level degeneracies")
        else:
            raise SchemaError(where, "needs either 'matrix' or 'polarization'")
        transitions.append(CouplingBlock(matrix, env, bool(item.get("null_link", False))))

    system = LadderSystem(tuple(levels), tuple(transitions), envelopes)
    report = validate(system)
    if not report.valid:
        v = report.violations[0]
        raise SchemaError(v.where, v.message)
    return system


def build_from_json(document: str) -> LadderSystem:
    """Parse a JSON system description (see README for the schema)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return system_from_dict(doc)


def load_system(path) -> LadderSystem:
    with open(path, encoding="utf-8") as fh:
        return build_from_json(fh.read())


def system_to_dict(system: LadderSystem) -> dict:
    """Inverse of :func:`system_from_dict` (matrices always written explicitly)."""
    envs = {}
    for name, env in system.envelopes.items():
        if not isinstance(env, Envelope):
            raise TypeError(f"envelope {name!r} is an arbitrary callable and cannot be serialized")
        envs[name] = env.to_dict()
    return {
        "levels": [{"label": lv.label, "degeneracy": lv.degeneracy, "detuning": lv.detuning}
                   for lv in system.levels],
        "transitions": [
            dict({"matrix": [[[z.real, z.imag] for z in row] for row in tr.constant_part],
                  "envelope": tr.envelope_id}, **({"null_link": True} if tr.null_link else {}))
            for tr in system.transitions
        ],
        "envelopes": envs,
    }


def make_system(degeneracies: Sequence[int], couplings: Sequence, detunings=None,
                envelopes=None, envelope_ids=None) -> LadderSystem:
    """Convenience constructor.

    ``envelopes`` defaults to one constant unit envelope shared by all
    transitions; ``envelope_ids`` defaults to ``f1, f2, ...`` when several
    envelopes are given as a list.
    """
    n = len(degeneracies)
    detunings = [0.0] * n if detunings is None else list(detunings)
    levels = [LevelSet(chr(ord("a") + k) if k < 26 else f"L{k}", int(d), float(x))
              for k, (d, x) in enumerate(zip(degeneracies, detunings))]
    if envelopes is None:
        envelopes = {"f": Envelope("constant")}
        envelope_ids = ["f"] * (n - 1)
    elif not isinstance(envelopes, Mapping):
        envelopes = list(envelopes)
        envelope_ids = envelope_ids or [f"f{i + 1}" for i in range(len(envelopes))]
        envelopes = dict(zip(envelope_ids, envelopes))
    elif envelope_ids is None:
        (only,) = envelopes
        envelope_ids = [only] * (n - 1)
    blocks = [CouplingBlock(v, e, null_link=not np.any(v)) for v, e in zip(couplings, envelope_ids)]
    return LadderSystem(tuple(levels), tuple(blocks), envelopes)
