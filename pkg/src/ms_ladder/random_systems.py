"""Random ladders for tests, demos and parameter sweeps.

Compatible ladders are grown one transition at a time: each new coupling is
the PSD factor of a matrix diagonal in the eigenbasis of the previous
``V^H V``, mixed by a Haar-random unitary on the right.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .frobenius import compatible_upper_coupling_from_spectrum
from .ladder import Envelope, LadderSystem, make_system


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def compatible_couplings(degeneracies, rng: np.random.Generator, scale: float = 1.0) -> list:
    """Coupling matrices satisfying the interior commutation conditions."""
    dims = list(degeneracies)
    couplings = [scale * random_complex(rng, dims[0], dims[1])]
    for k in range(1, len(dims) - 1):
        prev = couplings[-1]
        nb, nc = dims[k], dims[k + 1]
        xi = rng.uniform(0.3, 1.5, size=nb) * scale ** 2
        # W2 can have rank at most nc; silence the eigenvectors with the
        # smallest W1 eigenvalue (the dark ones first) to keep chains maximal
        if nc < nb:
            xi[nc:] = 0.0
        couplings.append(compatible_upper_coupling_from_spectrum(prev, xi, nc, haar_unitary(rng, nc)))
    return couplings


def random_gaussian_envelopes(rng: np.random.Generator, count: int, span: float = 2.0) -> list:
    return [Envelope("gaussian", float(rng.uniform(0.6, 1.4)), float(rng.uniform(-span / 2, span / 2)),
                     float(rng.uniform(0.6, 1.5))) for _ in range(count)]


def random_compatible_ladder(degeneracies, rng: np.random.Generator, scale: float = 1.0,
                             detuning_range: float = 1.0, envelopes=None) -> LadderSystem:
    """Decomposable ladder with random couplings, detunings and Gaussian pulses."""
    n = len(degeneracies)
    couplings = compatible_couplings(degeneracies, rng, scale)
    detunings = [0.0] + list(rng.uniform(-detuning_range, detuning_range, size=n - 1))
    if envelopes is None:
        envelopes = random_gaussian_envelopes(rng, n - 1)
    return make_system(degeneracies, couplings, detunings, envelopes)


def random_ladder(degeneracies, rng: np.random.Generator, scale: float = 1.0) -> LadderSystem:
    """Ladder with independent random couplings (generically not decomposable)."""
    dims = list(degeneracies)
    couplings = [scale * random_complex(rng, a, b) for a, b in zip(dims, dims[1:])]
    return make_system(dims, couplings)


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized random amplitude vector."""
    v = random_complex(rng, dim)
    return v / np.linalg.norm(v)
