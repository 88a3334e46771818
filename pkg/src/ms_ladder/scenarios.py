"""Bundled ready-to-run system documents.

Each builder returns a JSON-compatible dict accepted by
:func:`ms_ladder.ladder.system_from_dict`. The optional ``simulation`` block
holds default time window and initial state for ``ms-ladder simulate``;
``metadata`` records the scenario name and seed.
"""

from __future__ import annotations

import numpy as np

from .angular import PolarizationTriple
from .errors import UnknownExample
from .frobenius import compatible_upper_coupling, forced_upper_pi
from .random_systems import haar_unitary, random_complex

EXAMPLE_POL1 = PolarizationTriple(1.0, 0.8 + 0.3j, 0.5 - 0.2j)
EXAMPLE_R2, EXAMPLE_L2 = 0.6 + 0.2j, 0.9
DEFAULT_COEFFS = (0.3, 0.5, 0.2)


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _matrix(a) -> list:
    return [[_pair(z) for z in row] for row in np.asarray(a)]


def _levels(degeneracies, detunings):
    return [{"label": chr(ord("a") + k), "degeneracy": int(d), "detuning": float(x)}
            for k, (d, x) in enumerate(zip(degeneracies, detunings))]


def _doc(name, seed, levels, transitions, envelopes, simulation):
    return {"metadata": {"scenario": name, "seed": seed}, "levels": levels,
            "transitions": transitions, "envelopes": envelopes, "simulation": simulation}


def two_level(seed=0):
    """Resonant ``1 <-> 1`` Rabi problem; ``P_2(t) = sin^2(lambda t)``."""
    return _doc("two_level", seed, _levels([1, 1], [0, 0]),
                [{"matrix": [[[0.5, 0.0]]], "envelope": "f"}],
                {"f": {"kind": "constant", "amplitude": 1.0}},
                {"t0": 0.0, "t1": 2 * np.pi, "samples": 101, "initial": "0:1,0"})


def quasi_two_level(seed=0):
    """Four-level ladder on two-photon resonance with one shared pulse."""
    rng = np.random.default_rng(seed)
    degs = [2, 3, 2, 2]
    transitions = [{"matrix": _matrix(random_complex(rng, a, b)), "envelope": "f"}
                   for a, b in zip(degs, degs[1:])]
    return _doc("quasi_two_level", seed, _levels(degs, [0.0, 0.4, 0.0, 0.4]), transitions,
                {"f": {"kind": "gaussian", "amplitude": 1.0, "center": 0.0, "width": 2.0}},
                {"t0": -6.0, "t1": 6.0, "samples": 121, "initial": "0:1,0"})


def j32_j12_j12(seed=0):
    """``J = 3/2 <-> 1/2 <-> 1/2`` ladder with compatible polarizations.

    The upper pi amplitude is the one forced by the lower polarization, and
    the pulses are in counterintuitive (STIRAP) order.
    """
    p2 = forced_upper_pi(EXAMPLE_POL1, EXAMPLE_R2, EXAMPLE_L2)
    pol = lambda t: {"r": _pair(t.r), "p": _pair(t.p), "l": _pair(t.l)}
    pol2 = PolarizationTriple(EXAMPLE_R2, p2, EXAMPLE_L2)
    return _doc("j32_j12_j12", seed, _levels([4, 2, 2], [0, 0, 0]),
                [{"J_lower": 1.5, "J_upper": 0.5, "polarization": pol(EXAMPLE_POL1), "envelope": "f1"},
                 {"J_lower": 0.5, "J_upper": 0.5, "polarization": pol(pol2), "envelope": "f2"}],
                {"f1": {"kind": "gaussian", "amplitude": 10.0, "center": 0.5, "width": 1.0},
                 "f2": {"kind": "gaussian", "amplitude": 10.0, "center": -0.5, "width": 1.0}},
                {"t0": -4.0, "t1": 4.0, "samples": 161, "initial": "0:1,0"})


def single_intermediate(seed=0):
    """``3 <-> 1 <-> 4``: one three-state chain plus five dark states."""
    rng = np.random.default_rng(seed)
    v1, v2 = random_complex(rng, 3, 1), random_complex(rng, 1, 4)
    return _doc("single_intermediate", seed, _levels([3, 1, 4], [0.0, 0.3, 0.0]),
                [{"matrix": _matrix(v1), "envelope": "f1"}, {"matrix": _matrix(v2), "envelope": "f2"}],
                {"f1": {"kind": "gaussian", "amplitude": 2.0, "center": 0.5, "width": 1.5},
                 "f2": {"kind": "gaussian", "amplitude": 2.0, "center": -0.5, "width": 1.5}},
                {"t0": -5.0, "t1": 5.0, "samples": 101, "initial": "0:1,0"})


def frobenius_demo(seed=0, coeffs=DEFAULT_COEFFS):
    """``2 <-> 3 <-> 5`` with ``V2 V2^H = sum_n coeffs[n] (V1^H V1)^n``."""
    rng = np.random.default_rng(seed)
    v1 = random_complex(rng, 2, 3)
    v2 = compatible_upper_coupling(v1, coeffs, 5, haar_unitary(rng, 5))
    doc = _doc("frobenius_demo", seed, _levels([2, 3, 5], [0.0, 0.2, -0.1]),
               [{"matrix": _matrix(v1), "envelope": "f1"}, {"matrix": _matrix(v2), "envelope": "f2"}],
               {"f1": {"kind": "sin_squared", "amplitude": 1.5, "center": 0.0, "width": 6.0},
                "f2": {"kind": "sin_squared", "amplitude": 1.5, "center": 0.5, "width": 6.0}},
               {"t0": -3.5, "t1": 3.5, "samples": 141, "initial": "0:1,0"})
    doc["metadata"]["coefficients"] = [float(c) for c in coeffs]
    return doc


EXAMPLES = {
    "two_level": two_level,
    "quasi_two_level": quasi_two_level,
    "j32_j12_j12": j32_j12_j12,
    "single_intermediate": single_intermediate,
    "frobenius_demo": frobenius_demo,
}


def example_document(name: str, seed: int = 0, coeffs=None) -> dict:
    if name not in EXAMPLES:
        raise UnknownExample(name, sorted(EXAMPLES))
    if coeffs is not None:
        if name != "frobenius_demo":
            raise ValueError("coefficients only apply to frobenius_demo")
        return frobenius_demo(seed, tuple(coeffs))
    return EXAMPLES[name](seed)
