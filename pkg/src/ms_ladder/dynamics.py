"""Time-dependent Schroedinger equation ``i dC/dt = H(t) C`` in both bases.

The original-basis propagation integrates the full ladder; the MS-basis
propagation integrates each chain on its own and evolves dark states by their
detuning phase alone. Comparing the two through ``C_MS = S C`` is the
end-to-end check of a decomposition.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .decompose import DecompositionReport
from .errors import GridMismatch, StepFailure
from .ladder import LadderSystem, coupling_operators, require_valid

METHODS = ("rk45_adaptive", "rk4_fixed")


@dataclass(frozen=True)
class PropagatorConfig:
    """Integration window and method.

    ``rk45_adaptive`` is the Dormand-Prince 5(4) pair with ``rtol``/``atol``;
    ``rk4_fixed`` is classical RK4 with step at most ``step``. Amplitudes are
    reported on ``sample_count`` equally spaced times including both ends.
    """

    t_start: float
    t_end: float
    method: str = "rk45_adaptive"
    step: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-12
    sample_count: int = 101

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.method == "rk4_fixed" and not (self.step and self.step > 0):
            raise ValueError("rk4_fixed needs a positive step")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if self.sample_count < 2:
            raise ValueError("sample_count must be at least 2")

    def grid(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.sample_count)


@dataclass
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray      # shape (len(times), dim)
    basis: str                  # "original" or "ms"
    system_hash: str | None = None
    config: PropagatorConfig | None = None

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=1)

    def norm_drift(self) -> float:
        """Largest relative deviation of the norm from its initial value."""
        n = self.norms
        return float(np.max(np.abs(n - n[0])) / max(n[0], 1e-300))

    def metadata(self, extra=None) -> dict:
        meta = {"basis": self.basis, "system_hash": self.system_hash,
                "config": asdict(self.config) if self.config else None,
                "dim": int(self.amplitudes.shape[1]), "samples": int(len(self.times))}
        meta.update(extra or {})
        return meta

    def write_csv(self, path, extra_metadata=None) -> None:
        """CSV ``t,re_c1,im_c1,...`` plus ``<path>.json`` with metadata."""
        from .serialize import dumps

        dim = self.amplitudes.shape[1]
        header = ["t"] + [f"{part}_c{k + 1}" for k in range(dim) for part in ("re", "im")]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, row in zip(self.times, self.amplitudes):
                values = [t] + [x for z in row for x in (z.real, z.imag)]
                writer.writerow([format(float(x), ".17g") for x in values])
        with open(f"{path}.json", "w", encoding="utf-8") as fh:
            fh.write(dumps(self.metadata(extra_metadata)))

    @classmethod
    def read_csv(cls, path, basis="original") -> "Trajectory":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        amps = data[:, 1::2] + 1j * data[:, 2::2]
        return cls(data[:, 0], amps, basis)


def _integrate(hamiltonian, y0, config: PropagatorConfig) -> np.ndarray:
    grid = config.grid()
    y0 = np.asarray(y0, dtype=complex)

    def rhs(t, y):
        return -1j * (hamiltonian(t) @ y)

    if config.method == "rk45_adaptive":
        sol = solve_ivp(rhs, (config.t_start, config.t_end), y0, method="RK45", t_eval=grid,
                        rtol=config.rtol, atol=config.atol)
        if sol.status != 0:
            raise StepFailure(sol.message)
        return sol.y.T.copy()

    out = np.empty((len(grid), y0.size), dtype=complex)
    out[0] = y = y0
    for i in range(1, len(grid)):
        t0, t1 = grid[i - 1], grid[i]
        n = max(1, math.ceil((t1 - t0) / config.step - 1e-9))
        h = (t1 - t0) / n
        t = t0
        for _ in range(n):
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out[i] = y
    return out


def _system_hash(system):
    from .serialize import system_hash

    try:
        return system_hash(system)
    except TypeError:
        return None


def propagate(system: LadderSystem, initial, config: PropagatorConfig) -> Trajectory:
    """Integrate the full ladder in the original basis."""
    require_valid(system)
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (system.dim,):
        raise ValueError(f"initial state needs {system.dim} amplitudes, got {initial.shape}")
    diagonal, ops = coupling_operators(system)
    envs = [system.envelope(n) for n in range(len(ops))]
    base = np.diag(diagonal).astype(complex)

    def hamiltonian(t):
        h = base.copy()
        for f, op in zip(envs, ops):
            h += float(f(t)) * op
        return h

    amps = _integrate(hamiltonian, initial, config)
    return Trajectory(config.grid(), amps, "original", _system_hash(system), config)


def _chain_hamiltonian(chain, envelopes):
    diag = np.diag(np.asarray(chain.detunings, dtype=complex))
    terms = []
    for i, (lam, env_id) in enumerate(zip(chain.couplings, chain.envelope_ids)):
        e = np.zeros_like(diag)
        e[i, i + 1] = e[i + 1, i] = lam
        terms.append((envelopes[env_id], e))

    def hamiltonian(t):
        h = diag.copy()
        for f, e in terms:
            h += float(f(t)) * e
        return h

    return hamiltonian


def propagate_decomposed(report: DecompositionReport, system: LadderSystem, initial,
                         config: PropagatorConfig, basis: str = "original") -> Trajectory:
    """Propagate chain by chain; returns the MS-basis trajectory.

    ``initial`` is given in the original basis (mapped by ``S``) unless
    ``basis="ms"``. Chains starting with zero amplitude stay at zero and are
    skipped.
    """
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (report.dim,):
        raise ValueError(f"initial state needs {report.dim} amplitudes, got {initial.shape}")
    start = report.transformation.matrix() @ initial if basis == "original" else initial
    grid = config.grid()
    out = np.zeros((len(grid), report.dim), dtype=complex)
    for chain in report.chains:
        idx = report.chain_indices(chain)
        c0 = start[idx]
        if not np.any(c0):
            continue
        if chain.is_dark:
            out[:, idx[0]] = c0[0] * np.exp(-1j * chain.detunings[0] * (grid - config.t_start))
        else:
            out[:, idx] = _integrate(_chain_hamiltonian(chain, system.envelopes), c0, config)
    return Trajectory(grid, out, "ms", _system_hash(system), config)


@dataclass(frozen=True)
class BasisComparison:
    """``max_deviation`` is ``max_t ||S C_orig(t) - C_ms(t)||``."""

    max_deviation: float
    population_deviation: np.ndarray   # per MS state, maximum over time
    deviation_by_time: np.ndarray

    @property
    def max_population_deviation(self) -> float:
        return float(np.max(self.population_deviation, initial=0.0))

    def to_dict(self) -> dict:
        return {"max_deviation": self.max_deviation,
                "max_population_deviation": self.max_population_deviation,
                "population_deviation": [float(x) for x in self.population_deviation]}


def compare_bases(traj_original: Trajectory, traj_ms: Trajectory, transformation) -> BasisComparison:
    """Map the original trajectory into the MS basis and measure the mismatch.

    ``transformation`` is an ``MsTransformation``, a ``DecompositionReport``
    or a plain unitary matrix.
    """
    if traj_original.times.shape != traj_ms.times.shape or not np.allclose(
            traj_original.times, traj_ms.times, rtol=0, atol=1e-12):
        raise GridMismatch("trajectories are sampled on different time grids")
    if isinstance(transformation, DecompositionReport):
        transformation = transformation.transformation
    s = transformation.matrix() if hasattr(transformation, "matrix") else np.asarray(transformation)
    mapped = traj_original.amplitudes @ s.T
    diff = np.linalg.norm(mapped - traj_ms.amplitudes, axis=1)
    pops = np.abs(np.abs(mapped) ** 2 - traj_ms.populations)
    return BasisComparison(float(diff.max()), pops.max(axis=0), diff)


def trajectory_metadata_json(traj: Trajectory, extra=None) -> str:
    return json.dumps(traj.metadata(extra), sort_keys=True)
