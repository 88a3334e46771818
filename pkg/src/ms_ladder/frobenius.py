"""Hermitian matrices commuting with a given one, and compatible couplings.

Given the lower coupling ``V1`` of a three-level ladder, the upper coupling
``V2`` admits a Morris-Shore factorization iff ``W2 = V2 V2^H`` commutes with
``W1 = V1^H V1``. All such ``W2`` are ``G^H diag(xi) G`` with ``G``
diagonalizing ``W1``; for non-degenerate ``W1`` these are exactly the real
polynomials ``sum_n w_n W1^n`` of degree below ``dim W1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import PolarizationTriple, example_w_matrices
from .errors import DimensionMismatch, NotPsd, NotUnitary
from .linalg import as_hermitian, commutator_residual, dagger, fro, hermitian_eigensystem, is_unitary, psd_factor
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class CommutingFamilySpec:
    """Parametrization of the matrices commuting with ``base``.

    Supply exactly one of ``coefficients`` (polynomial form) or
    ``diagonal_values`` together with ``basis`` (spectral form).
    """

    base: np.ndarray
    coefficients: tuple | None = None
    diagonal_values: tuple | None = None
    basis: np.ndarray | None = None

    def __post_init__(self):
        n = np.asarray(self.base).shape[0]
        if (self.coefficients is None) == (self.diagonal_values is None):
            raise ValueError("give exactly one of coefficients or diagonal_values")
        given = self.coefficients if self.coefficients is not None else self.diagonal_values
        if len(given) != n:
            raise DimensionMismatch(f"expected {n} parameters, got {len(given)}")

    def matrix(self) -> np.ndarray:
        if self.coefficients is not None:
            return commuting_matrix_from_polynomial(self.base, self.coefficients)
        g = self.basis
        if g is None:
            g = hermitian_eigensystem(self.base).eigenvectors.conj().T
        return commuting_matrix_from_spectrum(g, self.diagonal_values)


def commuting_matrix_from_polynomial(w1, coeffs) -> np.ndarray:
    """``sum_n coeffs[n] * W1**n`` for real coefficients, by Horner's rule."""
    w1 = as_hermitian(w1)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (w1.shape[0],):
        raise DimensionMismatch(f"need {w1.shape[0]} coefficients, got {coeffs.size}")
    eye = np.eye(w1.shape[0], dtype=complex)
    out = np.zeros_like(w1)
    for c in coeffs[::-1]:
        out = out @ w1 + c * eye
    return 0.5 * (out + dagger(out))


def commuting_matrix_from_spectrum(g, xi, tol: Tolerances = DEFAULT) -> np.ndarray:
    """``G^H diag(xi) G``; rows of ``G`` are the shared eigenvectors."""
    g = np.asarray(g, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    if not is_unitary(g, tol):
        raise NotUnitary("G must be unitary")
    if xi.shape != (g.shape[0],):
        raise DimensionMismatch(f"need {g.shape[0]} diagonal values, got {xi.size}")
    out = dagger(g) @ (xi[:, None] * g)
    return 0.5 * (out + dagger(out))


def _check_psd(w, tol):
    values = np.linalg.eigvalsh(w)
    if values[0] < -tol.eig * max(np.abs(values).max(), tol.abs):
        raise NotPsd(f"interaction intensity matrix has eigenvalue {values[0]:.3e} < 0")


def compatible_upper_coupling(v1, coeffs, n_upper: int, right_unitary=None,
                              tol: Tolerances = DEFAULT) -> np.ndarray:
    """Upper coupling ``V2`` (shape ``N_b x n_upper``) with ``V2 V2^H = poly(W1)``.

    ``right_unitary`` (``n_upper x n_upper``) multiplies the canonical factor
    from the right; it does not change ``V2 V2^H``.

    Raises
    ------
    NotPsd
        If the polynomial has a negative eigenvalue on the spectrum of ``W1``.
    RankTooLarge
        If ``n_upper`` is smaller than the rank of ``W2``.
    """
    v1 = np.asarray(v1, dtype=complex)
    w2 = commuting_matrix_from_polynomial(dagger(v1) @ v1, coeffs)
    _check_psd(w2, tol)
    v2 = psd_factor(w2, n_upper, tol)
    return v2 if right_unitary is None else v2 @ np.asarray(right_unitary)


def compatible_upper_coupling_from_spectrum(v1, xi, n_upper: int, right_unitary=None,
                                            tol: Tolerances = DEFAULT) -> np.ndarray:
    """As :func:`compatible_upper_coupling` but with ``W2 = G^H diag(xi) G``.

    ``G`` is the eigenbasis of ``W1`` in descending eigenvalue order, so
    ``xi[k]`` is the eigenvalue of ``W2`` on the k-th eigenvector of ``W1``.
    This form also reaches the compatible couplings that the polynomial form
    misses when ``W1`` is degenerate.
    """
    v1 = np.asarray(v1, dtype=complex)
    g = dagger(hermitian_eigensystem(dagger(v1) @ v1, tol).eigenvectors)
    w2 = commuting_matrix_from_spectrum(g, xi, tol)
    _check_psd(w2, tol)
    v2 = psd_factor(w2, n_upper, tol)
    return v2 if right_unitary is None else v2 @ np.asarray(right_unitary)


@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of :func:`check_example_conditions`.

    ``imag_condition`` and ``balance_condition`` are the scaled residuals of
    the two commutation equations; ``forced_p`` is the upper pi amplitude the
    balance equation demands when ``|r1| != |l1|`` (else ``None``).
    """

    imag_condition: float
    balance_condition: float
    satisfied: bool
    forced_p: complex | None
    commutator: float
    numerically_commuting: bool

    @property
    def consistent(self) -> bool:
        return self.satisfied == self.numerically_commuting


def forced_upper_pi(pol1: PolarizationTriple, r2: complex, l2: complex) -> complex:
    """Upper pi amplitude making ``[W1, W2] = 0`` when ``|r1| != |l1|``."""
    u = np.conj(pol1.l) * pol1.p + pol1.r * np.conj(pol1.p)
    denom = abs(pol1.l) ** 2 - abs(pol1.r) ** 2
    if denom == 0:
        raise ValueError("p2 is not fixed when |r1| == |l1|")
    return complex((l2 * u - r2 * np.conj(u)) / denom)


def check_example_conditions(pol1: PolarizationTriple, pol2: PolarizationTriple,
                             threshold: float = 1e-8) -> ConditionVerdict:
    """Evaluate the analytic commutation conditions of the ``3/2-1/2-1/2`` ladder.

    Both residuals are divided by ``|pol1|^2 |pol2|^2`` so that the verdict is
    scale-free, and the result is cross-checked against the numerical
    commutator of the explicit ``W1``, ``W2``.
    """
    r1, p1, l1 = pol1.r, pol1.p, pol1.l
    r2, p2, l2 = pol2.r, pol2.p, pol2.l
    scale = max(pol1.norm2() * pol2.norm2(), 1e-300)
    lower = l1 * np.conj(p1) + np.conj(r1) * p1
    upper = l2 * np.conj(p2) + p2 * np.conj(r2)
    imag = abs(np.imag(np.conj(lower) * upper)) / scale
    balance = abs(lower * (abs(r2) ** 2 - abs(l2) ** 2) - (abs(r1) ** 2 - abs(l1) ** 2) * upper) / scale
    forced = forced_upper_pi(pol1, r2, l2) if abs(r1) != abs(l1) else None
    w1, w2 = example_w_matrices(pol1, pol2)
    comm = commutator_residual(w1, w2) if fro(w1) and fro(w2) else 0.0
    return ConditionVerdict(float(imag), float(balance), bool(imag < threshold and balance < threshold),
                            forced, comm, comm < threshold)
