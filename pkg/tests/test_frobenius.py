import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ms_ladder.angular import PolarizationTriple, example_w_matrices
from ms_ladder.decompose import decompose
from ms_ladder.errors import DimensionMismatch, NotPsd, NotUnitary, RankTooLarge
from ms_ladder.frobenius import (
    CommutingFamilySpec, check_example_conditions, commuting_matrix_from_polynomial,
    commuting_matrix_from_spectrum, compatible_upper_coupling, compatible_upper_coupling_from_spectrum,
    forced_upper_pi,
)
from ms_ladder.ladder import make_system
from ms_ladder.linalg import commutator_residual, dagger, hermitian_eigensystem
from ms_ladder.random_systems import haar_unitary, random_complex

seeds = st.integers(0, 2**32 - 1)


def random_w1(rng, na, nb):
    v1 = random_complex(rng, na, nb)
    return v1, dagger(v1) @ v1


def test_polynomial_trivial():
    _, w1 = random_w1(np.random.default_rng(0), 3, 3)
    assert not np.any(commuting_matrix_from_polynomial(w1, [0, 0, 0]))
    assert np.allclose(commuting_matrix_from_polynomial(w1, [2.5, 0, 0]), 2.5 * np.eye(3))
    with pytest.raises(DimensionMismatch):
        commuting_matrix_from_polynomial(w1, [1, 2])


def test_polynomial_example_real():
    w1, _ = example_w_matrices(PolarizationTriple(2, 1, 1), PolarizationTriple())
    x = commuting_matrix_from_polynomial(w1, [0.3, 0.7])
    assert np.allclose(x, 0.3 * np.eye(2) + 0.7 * w1, atol=1e-15)
    assert commutator_residual(w1, x) < 1e-14


def test_spectrum_trivial():
    assert np.allclose(commuting_matrix_from_spectrum(np.eye(2), [1.5, -2]), np.diag([1.5, -2]))
    g = haar_unitary(np.random.default_rng(1), 3)
    assert np.allclose(commuting_matrix_from_spectrum(g, [0.7] * 3), 0.7 * np.eye(3))
    with pytest.raises(NotUnitary):
        commuting_matrix_from_spectrum(2 * np.eye(2), [1, 1])


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 6))
def test_generated_matrices_commute(seed, n):
    rng = np.random.default_rng(seed)
    _, w1 = random_w1(rng, n + 1, n)
    x = commuting_matrix_from_polynomial(w1, rng.normal(size=n) / (1 + np.arange(n)))
    assert commutator_residual(w1, x) < 1e-12
    g = dagger(hermitian_eigensystem(w1).eigenvectors)
    y = commuting_matrix_from_spectrum(g, rng.normal(size=n))
    assert commutator_residual(w1, y) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 5))
def test_polynomial_equals_spectrum(seed, n):
    rng = np.random.default_rng(seed)
    _, w1 = random_w1(rng, n, n)
    w1 = w1 / np.linalg.norm(w1)
    coeffs = rng.normal(size=n)
    es = hermitian_eigensystem(w1)
    xi = np.polynomial.polynomial.polyval(es.eigenvalues, coeffs)
    a = commuting_matrix_from_polynomial(w1, coeffs)
    b = commuting_matrix_from_spectrum(dagger(es.eigenvectors), xi)
    assert np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300) < 1e-10


def test_family_spec():
    _, w1 = random_w1(np.random.default_rng(2), 2, 2)
    spec = CommutingFamilySpec(w1, coefficients=(0.1, 0.2))
    assert np.allclose(spec.matrix(), 0.1 * np.eye(2) + 0.2 * w1)
    spec = CommutingFamilySpec(w1, diagonal_values=(1.0, 1.0))
    assert np.allclose(spec.matrix(), np.eye(2))
    with pytest.raises(ValueError):
        CommutingFamilySpec(w1)
    with pytest.raises(DimensionMismatch):
        CommutingFamilySpec(w1, coefficients=(1.0,))


def test_upper_coupling_scaled_copy():
    v1, w1 = random_w1(np.random.default_rng(3), 4, 2)
    v2 = compatible_upper_coupling(v1, [0.0, 1.7], 2)
    assert np.allclose(v2 @ dagger(v2), 1.7 * w1)


def test_upper_coupling_not_psd():
    v1 = np.diag([1.0, 2.0])
    with pytest.raises(NotPsd):
        compatible_upper_coupling(v1, [1.0, -1.0], 2)  # 1 - W1 has eigenvalue -3
    with pytest.raises(RankTooLarge):
        compatible_upper_coupling(v1, [1.0, 0.0], 1)


def test_upper_coupling_end_to_end():
    rng = np.random.default_rng(4)
    v1 = random_complex(rng, 4, 2)
    v2 = compatible_upper_coupling(v1, [0.2, 0.5], 2)
    report = decompose(make_system([4, 2, 2], [v1, v2]))
    assert str(report.census) == "2 x 3-chain, 2 dark"
    v2r = compatible_upper_coupling(v1, [0.2, 0.5], 2, haar_unitary(rng, 2))
    assert np.allclose(v2r @ dagger(v2r), v2 @ dagger(v2))
    assert decompose(make_system([4, 2, 2], [v1, v2r])).census == report.census


def test_spectrum_coupling_reaches_degenerate_w1():
    # W1 = identity: the polynomial form only gives multiples of the identity
    v1 = np.vstack([np.eye(2), np.zeros((1, 2))])
    v2 = compatible_upper_coupling_from_spectrum(v1, [2.0, 0.5], 2)
    assert not np.allclose(v2 @ dagger(v2), (v2 @ dagger(v2))[0, 0] * np.eye(2))
    assert decompose(make_system([3, 2, 2], [v1, v2])).census.count(3) == 2


def test_conditions_hand_cases():
    assert check_example_conditions(PolarizationTriple(1, 1, 1), PolarizationTriple(2, 0.5, 2)).satisfied
    free = check_example_conditions(PolarizationTriple(1, 1j, 1), PolarizationTriple(0.3, 1 - 2j, 0.7j))
    assert free.satisfied and free.numerically_commuting


def test_forced_p_hand_value():
    p2 = forced_upper_pi(PolarizationTriple(1, 1, 2), 1, 1)
    assert p2 == 0
    w1, w2 = example_w_matrices(PolarizationTriple(1, 1, 2), PolarizationTriple(1, p2, 1))
    assert commutator_residual(w1, w2) < 1e-15
    verdict = check_example_conditions(PolarizationTriple(1, 1, 2), PolarizationTriple(1, p2, 1))
    assert verdict.forced_p == 0 and verdict.satisfied


def test_forced_p_random_commutes():
    rng = np.random.default_rng(6)
    for _ in range(200):
        z = rng.normal(size=5) + 1j * rng.normal(size=5)
        pol1 = PolarizationTriple(*z[:3])
        if abs(abs(pol1.l) - abs(pol1.r)) < 0.1:
            continue
        p2 = forced_upper_pi(pol1, z[3], z[4])
        w1, w2 = example_w_matrices(pol1, PolarizationTriple(z[3], p2, z[4]))
        assert commutator_residual(w1, w2) < 1e-13


def test_conditions_agree_with_commutator_1000_draws():
    rng = np.random.default_rng(11)
    disagreements = 0
    kinds = ["free", "forced", "balanced", "shifted"]
    for i in range(1000):
        z = rng.normal(size=6) + 1j * rng.normal(size=6)
        kind = kinds[i % 4]
        if kind == "forced":
            z[4] = forced_upper_pi(PolarizationTriple(*z[:3]), z[3], z[5])
        elif kind == "balanced":
            z = np.real(z) * np.array([1, 1, 0, 1, 1, 0])
            z[2], z[5] = z[0], z[3]
        elif kind == "shifted":
            z[2] = z[0] * np.exp(1j * rng.uniform(-np.pi, np.pi))
            # with |r1| = |l1|, this phase makes l1 p1* + r1* p1 vanish
            phase = 0.5 * (np.angle(z[2]) + np.angle(z[0]) - np.pi)
            z[1] = abs(z[1]) * np.exp(1j * phase)
        verdict = check_example_conditions(PolarizationTriple(*z[:3]), PolarizationTriple(*z[3:]))
        disagreements += not verdict.consistent
        if kind != "free":
            assert verdict.satisfied, kind
        else:
            assert not verdict.satisfied
    assert disagreements == 0
