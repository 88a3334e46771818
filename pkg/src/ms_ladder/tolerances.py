"""Numerical thresholds shared by every module.

All thresholds are dimensionless and relative unless noted. A JSON file named
by the ``MS_LADDER_TOLERANCES`` environment variable may override any subset of
fields, e.g. ``{"commute": 1e-9}``.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "MS_LADDER_TOLERANCES"


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10        # ||A - A^H||_F / ||A||_F
    degen: float = 1e-8        # eigenvalue coincidence, relative to spectral radius
    abs: float = 1e-14         # floor for relative scales
    commute: float = 1e-10     # scaled commutator residual accepted as zero
    offdiag: float = 1e-10     # leftover off-diagonal weight after diagonalization
    unitary: float = 1e-10
    eig: float = 1e-10         # PSD / eigen-residual threshold, relative
    null: float = 1e-10        # a link with lambda <= null * ||V||_F is absent
    subspace: float = 1e-6     # principal-angle cosine slack when intersecting subspaces
    norm: float = 1e-8         # allowed relative norm drift in propagation

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, mapping, base: "Tolerances | None" = None) -> "Tolerances":
        base = base or cls()
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown tolerance field(s): {', '.join(sorted(unknown))}")
        values = {}
        for key, value in mapping.items():
            value = float(value)
            if not value > 0:
                raise ValueError(f"tolerance {key} must be positive, got {value}")
            values[key] = value
        return base.replace(**values)


DEFAULT = Tolerances()


def from_environment(base: Tolerances = DEFAULT) -> Tolerances:
    """Apply the override file named by ``MS_LADDER_TOLERANCES``, if set."""
    path = os.environ.get(ENV_VAR)
    if not path:
        return base
    with open(path, encoding="utf-8") as fh:
        return Tolerances.from_mapping(json.load(fh), base)
