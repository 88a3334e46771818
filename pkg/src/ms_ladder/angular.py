"""Clebsch-Gordan coefficients and dipole coupling matrices.

Quantum numbers are accepted as ordinary numbers (``1.5``, ``Fraction(3, 2)``)
and converted to doubled integers internally, so half-integers are exact.

Coupling matrices for ``J -> J'`` are indexed by ascending magnetic quantum
number on both sides; the entry for ``M -> M'`` is the amplitude of the
polarization component with ``q = M' - M`` (``r`` for +1, ``p`` for 0, ``l``
for -1) times ``<J M; 1 q | J' M'>``. With this convention the
``J=3/2 -> 1/2`` and ``J=1/2 -> 1/2`` matrices are::

    V1 = 1/sqrt(6) [[ r*sqrt3,      0    ],      V2 = 1/sqrt(3) [[ -p, -r*sqrt2 ],
                    [-p*sqrt2,      r    ],                      [l*sqrt2,  p   ]]
                    [    l,     -p*sqrt2 ],
                    [    0,      l*sqrt3 ]]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidQuantumNumbers, InvalidTransition

MAX_TWO_J = 40  # j <= 20


def _doubled(x, name) -> int:
    if isinstance(x, (int, np.integer)):
        return 2 * int(x)
    if isinstance(x, Fraction):
        if (2 * x).denominator != 1:
            raise InvalidQuantumNumbers(f"{name}={x} is not an integer or half-integer")
        return int(2 * x)
    two = 2 * float(x)
    rounded = round(two)
    if not math.isfinite(two) or abs(two - rounded) > 1e-9:
        raise InvalidQuantumNumbers(f"{name}={x} is not an integer or half-integer")
    return int(rounded)


@lru_cache(maxsize=None)
def _cg_squared(tj1, tm1, tj2, tm2, tJ, tM) -> Fraction:
    """Signed square of the CG coefficient, exact; arguments are 2j, 2m."""
    if tm1 + tm2 != tM:
        return Fraction(0)
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2) or (tj1 + tj2 + tJ) % 2:
        return Fraction(0)
    f = math.factorial
    # all of these are integers once the parity checks above hold
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    pref = Fraction((tJ + 1) * f((tJ + tj1 - tj2) // 2) * f((tJ - tj1 + tj2) // 2) * f(a),
                    f((tj1 + tj2 + tJ) // 2 + 1))
    pref *= (f((tJ + tM) // 2) * f((tJ - tM) // 2) * f((tj1 - tm1) // 2) * f((tj1 + tm1) // 2)
             * f((tj2 - tm2) // 2) * f((tj2 + tm2) // 2))
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        total += Fraction((-1) ** k, f(k) * f(a - k) * f(b - k) * f(c - k) * f(d + k) * f(e + k))
    sq = pref * total * total
    return sq if total >= 0 else -sq


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley coefficient ``<j1 m1; j2 m2 | J M>`` (Racah formula).

    Returns 0 for ``M != m1 + m2`` or when the triangle rule fails.
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_doubled(x, n) for x, n in
                                  zip((j1, m1, j2, m2, J, M), ("j1", "m1", "j2", "m2", "J", "M")))
    for tj, tm, name in ((tj1, tm1, "1"), (tj2, tm2, "2"), (tJ, tM, "")):
        if tj < 0 or tj > MAX_TWO_J:
            raise InvalidQuantumNumbers(f"j{name}={tj / 2} outside 0..{MAX_TWO_J // 2}")
        if abs(tm) > tj or (tj - tm) % 2:
            raise InvalidQuantumNumbers(f"m{name}={tm / 2} invalid for j{name}={tj / 2}")
    sq = _cg_squared(tj1, tm1, tj2, tm2, tJ, tM)
    return math.copysign(math.sqrt(abs(sq)), sq) if sq else 0.0


@dataclass(frozen=True)
class PolarizationTriple:
    """Complex sigma+, pi, sigma- amplitudes (``r``, ``p``, ``l``)."""

    r: complex = 0j
    p: complex = 0j
    l: complex = 0j

    def __post_init__(self):
        for name in ("r", "p", "l"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"polarization amplitude {name} must be finite")
            object.__setattr__(self, name, v)

    def scaled(self, factor) -> "PolarizationTriple":
        return PolarizationTriple(self.r * factor, self.p * factor, self.l * factor)

    def norm2(self) -> float:
        return abs(self.r) ** 2 + abs(self.p) ** 2 + abs(self.l) ** 2


def build_coupling(j_lower, j_upper, pol: PolarizationTriple) -> np.ndarray:
    """Dipole coupling matrix of shape ``(2J+1, 2J'+1)`` for ``J -> J'``."""
    tj, tjp = _doubled(j_lower, "J_lower"), _doubled(j_upper, "J_upper")
    if tj < 0 or tjp < 0 or abs(tj - tjp) > 2 or (tj - tjp) % 2 or tj + tjp < 2:
        raise InvalidTransition(f"J={tj / 2} -> J'={tjp / 2} is not an electric-dipole transition")
    amps = {2: pol.r, 0: pol.p, -2: pol.l}
    out = np.zeros((tj + 1, tjp + 1), dtype=complex)
    for i, tm in enumerate(range(-tj, tj + 1, 2)):
        for k, tmp in enumerate(range(-tjp, tjp + 1, 2)):
            tq = tmp - tm
            if tq in amps:
                sq = _cg_squared(tj, tm, 2, tq, tjp, tmp)
                if sq:
                    out[i, k] = amps[tq] * math.copysign(math.sqrt(abs(sq)), sq)
    return out


@dataclass(frozen=True)
class ExampleParameters:
    """Reduced polarization parameters of one transition.

    ``eta = sqrt(|l|^2 + |r|^2)``, ``epsilon = (|l|^2 - |r|^2) / eta^2``,
    ``xi = |p|^2 / eta^2``, ``alpha = arg(l* r* p^2)``.
    """

    epsilon: float
    xi: float
    eta: float
    alpha: float

    @classmethod
    def from_polarization(cls, pol: PolarizationTriple) -> "ExampleParameters":
        eta2 = abs(pol.l) ** 2 + abs(pol.r) ** 2
        if eta2 == 0:
            raise DomainError("parameters undefined for r = l = 0")
        alpha = float(np.angle(np.conj(pol.l) * np.conj(pol.r) * pol.p ** 2))
        return cls((abs(pol.l) ** 2 - abs(pol.r) ** 2) / eta2, abs(pol.p) ** 2 / eta2,
                   math.sqrt(eta2), alpha)


def _lambda_pair(pol: PolarizationTriple, f: float, prefactor: float, base: float) -> tuple:
    """Closed-form ``(lambda^(1), lambda^(2))`` for one transition of the example.

    ``prefactor`` is 1/sqrt(6) or 1/sqrt(3) and ``base`` the constant in front
    of ``(1 + xi)`` (2 for the lower transition, 1 for the upper).
    """
    eta2 = abs(pol.l) ** 2 + abs(pol.r) ** 2
    p2 = abs(pol.p) ** 2
    if eta2 == 0:
        # r = l = 0: W is |p|^2 * base times identity (up to prefactor^2)
        lam = abs(f) * prefactor * math.sqrt(base * p2)
        return lam, lam
    par = ExampleParameters.from_polarization(pol)
    eps, xi = par.epsilon, par.xi
    disc = eps ** 2 + 2 * xi * (1 + math.sqrt(max(0.0, 1 - eps ** 2)) * math.cos(par.alpha))
    root = math.sqrt(max(disc, 0.0))
    out = []
    for sign in (-1.0, 1.0):
        bracket = base * (1 + xi) + sign * root
        if bracket < 0:
            if bracket < -1e-12 * base * (1 + xi):
                raise DomainError(f"negative radicand {bracket:.3e}")
            bracket = 0.0
        out.append(abs(f) * prefactor * par.eta * math.sqrt(bracket))
    return tuple(out)


def example_lambdas(pol1: PolarizationTriple, pol2: PolarizationTriple, f1=1.0, f2=1.0) -> tuple:
    """Effective couplings of the ``J=3/2 <-> 1/2 <-> 1/2`` ladder.

    Returns ``(lam1_1, lam1_2, lam2_1, lam2_2)``; within each transition the
    first value takes the minus sign of the inner root and is the smaller one.
    """
    return (_lambda_pair(pol1, f1, 1 / math.sqrt(6), 2.0)
            + _lambda_pair(pol2, f2, 1 / math.sqrt(3), 1.0))


def example_w_matrices(pol1: PolarizationTriple, pol2: PolarizationTriple, f1=1.0, f2=1.0):
    """Explicit ``W1 = V1^H V1`` and ``W2 = V2 V2^H`` of the example ladder."""
    r1, p1, l1 = pol1.r, pol1.p, pol1.l
    r2, p2, l2 = pol2.r, pol2.p, pol2.l
    s2 = math.sqrt(2)
    w1 = np.array([
        [3 * abs(r1) ** 2 + 2 * abs(p1) ** 2 + abs(l1) ** 2, -s2 * (np.conj(p1) * r1 + p1 * np.conj(l1))],
        [-s2 * (p1 * np.conj(r1) + np.conj(p1) * l1), abs(r1) ** 2 + 2 * abs(p1) ** 2 + 3 * abs(l1) ** 2],
    ], dtype=complex) * (f1 ** 2 / 6)
    w2 = np.array([
        [abs(p2) ** 2 + 2 * abs(r2) ** 2, -s2 * (p2 * np.conj(l2) + np.conj(p2) * r2)],
        [-s2 * (np.conj(p2) * l2 + p2 * np.conj(r2)), abs(p2) ** 2 + 2 * abs(l2) ** 2],
    ], dtype=complex) * (f2 ** 2 / 3)
    return w1, w2


def example_couplings(pol1: PolarizationTriple, pol2: PolarizationTriple):
    """Constant parts ``(V1, V2)`` of the ``J=3/2 <-> 1/2 <-> 1/2`` ladder."""
    return build_coupling(1.5, 0.5, pol1), build_coupling(0.5, 0.5, pol2)
