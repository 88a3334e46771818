import json
import types

import numpy as np
import pytest
import scipy.linalg

from ms_ladder import dynamics
from ms_ladder.angular import PolarizationTriple, example_couplings
from ms_ladder.decompose import MsTransformation, decompose
from ms_ladder.dynamics import PropagatorConfig, Trajectory, compare_bases, propagate, propagate_decomposed
from ms_ladder.errors import GridMismatch, StepFailure
from ms_ladder.frobenius import forced_upper_pi
from ms_ladder.ladder import Envelope, assemble_hamiltonian, make_system
from ms_ladder.random_systems import random_compatible_ladder, random_state


def expm_oracle(h, c0, times, t0=0.0):
    return np.array([scipy.linalg.expm(-1j * h * (t - t0)) @ c0 for t in times])


def test_zero_hamiltonian_is_static():
    system = make_system([1, 2], [np.zeros((1, 2))])
    c0 = np.array([0.6, 0.8j, 0.0])
    traj = propagate(system, c0, PropagatorConfig(0, 3, sample_count=7))
    assert np.allclose(traj.amplitudes, c0, atol=1e-14)


def test_rabi_oscillation():
    lam = 0.9
    config = PropagatorConfig(0.0, 6.0, sample_count=20)
    traj = propagate(make_system([1, 1], [[[lam]]]), [1, 0], config)
    assert np.max(np.abs(traj.populations[:, 1] - np.sin(lam * traj.times) ** 2)) < 1e-7
    assert traj.norm_drift() < 1e-8


def test_three_state_matches_expm():
    system = make_system([1, 1, 1], [[[0.8]], [[0.8]]])
    config = PropagatorConfig(0.0, 5.0, sample_count=10)
    c0 = np.array([1, 0, 0], dtype=complex)
    traj = propagate(system, c0, config)
    ref = expm_oracle(assemble_hamiltonian(system, 0.0), c0, traj.times)
    assert np.max(np.abs(traj.amplitudes - ref)) < 1e-7


def test_config_validation():
    with pytest.raises(ValueError):
        PropagatorConfig(1.0, 1.0)
    with pytest.raises(ValueError):
        PropagatorConfig(0.0, 1.0, method="euler")
    with pytest.raises(ValueError):
        PropagatorConfig(0.0, 1.0, method="rk4_fixed")
    with pytest.raises(ValueError):
        PropagatorConfig(0.0, 1.0, rtol=0.0)
    with pytest.raises(ValueError):
        PropagatorConfig(0.0, 1.0, sample_count=1)


def test_step_failure(monkeypatch):
    failed = types.SimpleNamespace(status=-1, message="Required step size is less than spacing")
    monkeypatch.setattr(dynamics, "solve_ivp", lambda *a, **k: failed)
    with pytest.raises(StepFailure):
        propagate(make_system([1, 1], [[[1.0]]]), [1, 0], PropagatorConfig(0, 1))


def test_rk4_fourth_order():
    system = make_system([1, 1, 1], [[[1.0]], [[0.7]]], [0, 0.3, -0.2],
                         [Envelope("gaussian", 2.0, 0.0, 1.0), Envelope("gaussian", 2.0, 0.5, 1.0)])
    c0 = np.array([1, 0, 0], dtype=complex)
    ref = propagate(system, c0, PropagatorConfig(-3, 3, sample_count=7, rtol=1e-12, atol=1e-14))
    errors = []
    for h in (0.1, 0.01):
        traj = propagate(system, c0, PropagatorConfig(-3, 3, "rk4_fixed", step=h, sample_count=7))
        errors.append(np.max(np.abs(traj.amplitudes - ref.amplitudes)))
    ratio = errors[0] / errors[1]
    assert 1e4 / 4 <= ratio <= 1e4 * 4


def test_dark_state_stays_put():
    system = random_compatible_ladder([3, 1, 2], np.random.default_rng(0))
    report = decompose(system)
    dark = [c for c in report.chains if c.is_dark][0]
    idx = report.chain_indices(dark)[0]
    c_ms = np.zeros(report.dim, dtype=complex)
    c_ms[idx] = 1
    c0 = report.transformation.matrix().conj().T @ c_ms
    config = PropagatorConfig(-3, 3, sample_count=31)
    ms = propagate_decomposed(report, system, c0, config)
    assert np.max(np.abs(ms.populations[:, idx] - 1)) < 1e-14
    full = propagate(system, c0, config)
    cmp = compare_bases(full, ms, report)
    assert cmp.population_deviation[idx] < 1e-8


def example_system(envelopes):
    pol1 = PolarizationTriple(1.0, 0.8 + 0.3j, 0.5 - 0.2j)
    r2, l2 = 0.6 + 0.2j, 0.9
    pol2 = PolarizationTriple(r2, forced_upper_pi(pol1, r2, l2), l2)
    return make_system([4, 2, 2], list(example_couplings(pol1, pol2)), [0, 0.2, -0.1], envelopes)


def test_example_bright_superposition():
    system = example_system([Envelope("gaussian", 3.0, 0.5, 1.0), Envelope("gaussian", 3.0, -0.5, 1.0)])
    report = decompose(system)
    bright = [c for c in report.chains if c.length == 3][0]
    c_ms = np.zeros(8, dtype=complex)
    c_ms[report.chain_indices(bright)[0]] = 1
    c0 = report.transformation.matrix().conj().T @ c_ms
    config = PropagatorConfig(-4, 4, sample_count=81)
    cmp = compare_bases(propagate(system, c0, config), propagate_decomposed(report, system, c0, config), report)
    assert cmp.max_deviation < 1e-6
    assert cmp.max_population_deviation < 1e-6


def test_stirap_transfer():
    # counterintuitive order: the upper-transition pulse comes first; the
    # transfer is adiabatic, so it holds across a range of pulse areas
    for amp in (6.0, 10.0, 20.0):
        system = make_system([1, 1, 1], [[[1.0]], [[1.0]]], [0, 0, 0],
                             [Envelope("gaussian", amp, 0.5, 1.0), Envelope("gaussian", amp, -0.5, 1.0)])
        traj = propagate(system, [1, 0, 0], PropagatorConfig(-6, 6, sample_count=11))
        assert traj.populations[-1, 2] > 0.99


def test_compare_identical_identity():
    traj = propagate(make_system([1, 1], [[[1.0]]]), [1, 0], PropagatorConfig(0, 1, sample_count=5))
    cmp = compare_bases(traj, Trajectory(traj.times, traj.amplitudes, "ms"), np.eye(2))
    assert cmp.max_deviation == 0 and cmp.max_population_deviation == 0


def test_random_422_equivalence_and_negative_control():
    rng = np.random.default_rng(7)
    system = random_compatible_ladder([4, 2, 2], rng)
    report = decompose(system)
    c0 = random_state(rng, system.dim)
    config = PropagatorConfig(-3, 3, sample_count=61)
    full = propagate(system, c0, config)
    ms = propagate_decomposed(report, system, c0, config)
    assert compare_bases(full, ms, report).max_deviation < 1e-6
    assert full.norm_drift() < 1e-8 and ms.norm_drift() < 1e-8
    blocks = list(report.transformation.blocks)
    bad = blocks[1].copy()
    bad[0] *= -1  # flip the phase of one MS state
    blocks[1] = bad
    corrupted = MsTransformation(tuple(blocks))
    assert compare_bases(full, ms, corrupted).max_deviation > 0.1


def test_grid_mismatch():
    system = make_system([1, 1], [[[1.0]]])
    a = propagate(system, [1, 0], PropagatorConfig(0, 1, sample_count=5))
    b = propagate(system, [1, 0], PropagatorConfig(0, 1, sample_count=6))
    with pytest.raises(GridMismatch):
        compare_bases(a, b, np.eye(2))


def test_initial_state_dimension():
    with pytest.raises(ValueError):
        propagate(make_system([1, 1], [[[1.0]]]), [1, 0, 0], PropagatorConfig(0, 1))


def test_csv_round_trip(tmp_path):
    system = make_system([1, 2], [np.array([[0.5, 0.2j]])])
    traj = propagate(system, [1, 0, 0], PropagatorConfig(0, 2, sample_count=9))
    path = tmp_path / "traj.csv"
    traj.write_csv(path, {"seed": 3})
    header = path.read_text().splitlines()[0]
    assert header == "t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3"
    again = Trajectory.read_csv(path)
    assert np.array_equal(again.times, traj.times)
    assert np.array_equal(again.amplitudes, traj.amplitudes)
    meta = json.loads((tmp_path / "traj.csv.json").read_text())
    assert meta["basis"] == "original" and meta["seed"] == 3
    assert len(meta["system_hash"]) == 64
    assert meta["config"]["method"] == "rk45_adaptive"
