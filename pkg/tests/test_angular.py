import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.physics.quantum.cg import CG

from ms_ladder.angular import (
    ExampleParameters, PolarizationTriple, build_coupling, clebsch_gordan, example_couplings,
    example_lambdas, example_w_matrices,
)
from ms_ladder.errors import DomainError, InvalidQuantumNumbers, InvalidTransition


def spins(max_two_j):
    return [Fraction(t, 2) for t in range(0, max_two_j + 1)]


def projections(j):
    return [j - k for k in range(int(2 * j) + 1)]


def test_selection_rule_zero():
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert clebsch_gordan(1, 0, 1, 0, 3, 0) == 0.0  # triangle


def test_against_sympy_oracle():
    worst = 0.0
    for j1, j2 in itertools.product(spins(4), repeat=2):
        for J in spins(8):
            if not abs(j1 - j2) <= J <= j1 + j2 or (j1 + j2 + J).denominator != 1:
                continue
            for m1, m2 in itertools.product(projections(j1), projections(j2)):
                M = m1 + m2
                if abs(M) > J:
                    continue
                ref = float(CG(*(sympy.Rational(x.numerator, x.denominator)
                                 for x in (j1, m1, j2, m2, J, M))).doit())
                worst = max(worst, abs(clebsch_gordan(j1, m1, j2, m2, J, M) - ref))
    assert worst < 1e-12


def cg_matrix(j1, j2):
    """Rows (m1, m2), columns (J, M): the full coupling table as a matrix."""
    rows = [(m1, m2) for m1 in projections(j1) for m2 in projections(j2)]
    cols = [(J, M) for J in spins(int(2 * (j1 + j2)))
            if abs(j1 - j2) <= J and (j1 + j2 + J).denominator == 1 for M in projections(J)]
    return np.array([[clebsch_gordan(j1, m1, j2, m2, J, M) for J, M in cols] for m1, m2 in rows])


@pytest.mark.parametrize("j1,j2", [(Fraction(a, 2), Fraction(b, 2)) for a in range(7) for b in range(7)])
def test_orthogonality(j1, j2):
    c = cg_matrix(j1, j2)
    assert c.shape[0] == c.shape[1]
    # both orthogonality relations: over (m1, m2) and over (J, M)
    assert np.max(np.abs(c.T @ c - np.eye(c.shape[1]))) < 1e-12
    assert np.max(np.abs(c @ c.T - np.eye(c.shape[0]))) < 1e-12


def test_invalid_quantum_numbers():
    with pytest.raises(InvalidQuantumNumbers):
        clebsch_gordan(0.3, 0, 1, 0, 1, 0)
    with pytest.raises(InvalidQuantumNumbers):
        clebsch_gordan(1, 2, 1, 0, 1, 0)
    with pytest.raises(InvalidQuantumNumbers):
        clebsch_gordan(1, 0.5, 1, 0, 1, 0)


def symbolic_example():
    r, p, l = sympy.symbols("r p l")
    s6, s3, s2 = sympy.sqrt(6), sympy.sqrt(3), sympy.sqrt(2)
    v1 = sympy.Matrix([[r * s3, 0], [-p * s2, r], [l, -p * s2], [0, l * s3]]) / s6
    v2 = sympy.Matrix([[-p, -r * s2], [l * s2, p]]) / s3
    return (r, p, l), v1, v2


@pytest.mark.parametrize("which", ["v1", "v2"])
def test_build_coupling_matches_reference_matrices(which):
    (r, p, l), v1, v2 = symbolic_example()
    ref, args = (v1, (1.5, 0.5)) if which == "v1" else (v2, (0.5, 0.5))
    # unit amplitudes one at a time pin every entry and sign
    for sym, pol in ((r, PolarizationTriple(1, 0, 0)), (p, PolarizationTriple(0, 1, 0)),
                     (l, PolarizationTriple(0, 0, 1))):
        want = np.array(ref.subs({x: int(x == sym) for x in (r, p, l)}).evalf(), dtype=complex)
        got = build_coupling(*args, pol)
        assert np.max(np.abs(got - want)) < 1e-14
        # squared entries are exact rationals
        exact = ref.subs({x: int(x == sym) for x in (r, p, l)}).applyfunc(lambda z: z ** 2)
        assert np.max(np.abs(np.abs(got) ** 2 - np.array(exact, dtype=float))) < 1e-14


def test_build_coupling_zero_and_errors():
    assert not np.any(build_coupling(1.5, 0.5, PolarizationTriple()))
    assert build_coupling(1, 2, PolarizationTriple(1, 1, 1)).shape == (3, 5)
    with pytest.raises(InvalidTransition):
        build_coupling(0.5, 2.5, PolarizationTriple(1, 0, 0))
    with pytest.raises(InvalidTransition):
        build_coupling(0, 0, PolarizationTriple(0, 1, 0))


def test_w_matrices_match_products():
    rng = np.random.default_rng(9)
    for _ in range(50):
        z = rng.normal(size=(6,)) + 1j * rng.normal(size=(6,))
        pol1, pol2 = PolarizationTriple(*z[:3]), PolarizationTriple(*z[3:])
        f1, f2 = rng.uniform(0.2, 2, size=2)
        w1, w2 = example_w_matrices(pol1, pol2, f1, f2)
        v1, v2 = example_couplings(pol1, pol2)
        assert np.max(np.abs(w1 - f1 ** 2 * v1.conj().T @ v1)) < 1e-14 * max(1, np.abs(w1).max())
        assert np.max(np.abs(w2 - f2 ** 2 * v2 @ v2.conj().T)) < 1e-14 * max(1, np.abs(w2).max())


def test_w_matrix_special_values():
    one = PolarizationTriple(1, 1, 1)
    w1, _ = example_w_matrices(one, one)
    assert np.allclose(np.diag(w1), 1.0)
    assert np.allclose(w1[0, 1], -math.sqrt(2) * 2 / 6)
    w1, w2 = example_w_matrices(PolarizationTriple(), PolarizationTriple())
    assert not np.any(w1) and not np.any(w2)
    w1, _ = example_w_matrices(PolarizationTriple(1, 1j, 1), one)
    assert np.allclose(w1, np.eye(2), atol=1e-15)


def test_lambdas_special_cases():
    lam = example_lambdas(PolarizationTriple(1, 1j, 1), PolarizationTriple(1, 0, 0))
    assert lam[0] == pytest.approx(1.0, abs=1e-12) and lam[1] == pytest.approx(1.0, abs=1e-12)
    lam = example_lambdas(PolarizationTriple(), PolarizationTriple(0, 1, 0))
    assert lam[:2] == (0.0, 0.0)
    assert lam[2] == pytest.approx(1 / math.sqrt(3)) and lam[3] == pytest.approx(1 / math.sqrt(3))


def test_parameters():
    par = ExampleParameters.from_polarization(PolarizationTriple(1, 1j, 1))
    assert par.epsilon == 0 and par.xi == pytest.approx(0.5) and par.alpha == pytest.approx(math.pi)
    with pytest.raises(DomainError):
        ExampleParameters.from_polarization(PolarizationTriple(0, 1, 0))


def eig_lambdas(v):
    # nonzero eigenvalues of V V^H are the squared couplings
    w = np.linalg.eigvalsh(v @ v.conj().T)
    return np.sqrt(np.sort(np.clip(w, 0, None))[::-1][: min(v.shape)])[::-1]


def test_lambdas_match_eigenvalues_1000_draws():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        z = rng.normal(size=6) + 1j * rng.normal(size=6)
        pol1, pol2 = PolarizationTriple(*z[:3]), PolarizationTriple(*z[3:])
        f1, f2 = rng.uniform(0.3, 2.0, size=2)
        lam = np.array(example_lambdas(pol1, pol2, f1, f2))
        v1, v2 = example_couplings(pol1, pol2)
        ref = np.concatenate([eig_lambdas(f1 * v1), eig_lambdas(f2 * v2)])
        worst = max(worst, float(np.max(np.abs(lam ** 2 - ref ** 2) / np.max(ref ** 2))))
    assert worst < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=12, max_size=12), st.floats(-math.pi, math.pi))
def test_lambdas_global_phase_invariant(x, phi):
    z = np.array(x[:6]) + 1j * np.array(x[6:])
    pol1, pol2 = PolarizationTriple(*z[:3]), PolarizationTriple(*z[3:])
    phase = np.exp(1j * phi)
    a = example_lambdas(pol1, pol2)
    b = example_lambdas(pol1.scaled(phase), pol2.scaled(phase))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)
