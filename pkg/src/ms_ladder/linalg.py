"""Dense complex linear algebra used throughout the package.

Every function here is pure. Matrices are plain ``numpy`` arrays; Hermiticity
is checked on entry and the upper/lower halves are averaged before handing the
matrix to LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotCommuting, NotHermitian, NotPsd, RankTooLarge
from .tolerances import DEFAULT, Tolerances


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def fro(a) -> float:
    return float(np.linalg.norm(a))


def as_hermitian(a, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Return the Hermitian part of ``a`` after checking it is Hermitian.

    Raises
    ------
    NotHermitian
        If ``a`` is not square or ``||a - a^H||_F`` exceeds ``tol.herm`` times
        ``||a||_F``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotHermitian(f"expected a non-empty square matrix, got shape {a.shape}")
    scale = max(fro(a), tol.abs)
    residual = fro(a - dagger(a)) / scale
    if residual > tol.herm:
        raise NotHermitian(f"Hermiticity residual {residual:.3e} exceeds {tol.herm:.1e}")
    return 0.5 * (a + dagger(a))


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so that its first non-negligible component is real positive."""
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    peak = mags.max(initial=0.0)
    if peak == 0.0:
        return v
    idx = int(np.argmax(mags > 1e-10 * peak))
    return v * (np.conj(v[idx]) / mags[idx])


def canonical_basis(q: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the column span of ``q``.

    The result depends only on the subspace, not on the particular basis
    ``q``: it is built from the projector onto the span by pivoted QR, with
    each vector phase-canonicalized.
    """
    q = np.asarray(q, dtype=complex)
    d = q.shape[1]
    if d == 0:
        return q.copy()
    proj = q @ dagger(q)
    basis, _, _ = scipy.linalg.qr(proj, pivoting=True)
    basis = basis[:, :d]
    return np.column_stack([canonical_phase(basis[:, k]) for k in range(d)])


def orthonormal_complement(q: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis of the complement of span(q) in C^dim (canonical)."""
    if q.size == 0:
        return np.eye(dim, dtype=complex)
    proj = np.eye(dim) - q @ dagger(q)
    d = dim - q.shape[1]
    if d <= 0:
        return np.zeros((dim, 0), dtype=complex)
    w, u = np.linalg.eigh(0.5 * (proj + dagger(proj)))
    return canonical_basis(u[:, np.argsort(w)[::-1][:d]])


def is_unitary(u, tol: Tolerances = DEFAULT) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return fro(u @ dagger(u) - np.eye(u.shape[0])) < tol.unitary * max(1.0, np.sqrt(u.shape[0]))


@dataclass(frozen=True)
class Eigensystem:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvalues`` are sorted descending; column ``k`` of ``eigenvectors`` is
    the eigenvector for ``eigenvalues[k]``. ``degeneracy_groups`` lists
    ``range`` objects over coincident eigenvalues.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_groups: tuple

    def group_basis(self, group: range) -> np.ndarray:
        return self.eigenvectors[:, group.start:group.stop]


def _degeneracy_groups(values: np.ndarray, tol: Tolerances, radius=None) -> tuple:
    if radius is None:
        radius = float(np.max(np.abs(values), initial=0.0))
    threshold = tol.degen * max(radius, tol.abs)
    groups = []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k - 1] - values[k] > threshold:
            groups.append(range(start, k))
            start = k
    return tuple(groups)


def hermitian_eigensystem(a, tol: Tolerances = DEFAULT, radius=None) -> Eigensystem:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    Within a degenerate group the eigenvectors are replaced by
    :func:`canonical_basis` of the eigenspace, so the output is deterministic.
    ``radius`` overrides the spectral radius used to scale the degeneracy
    threshold (needed when ``a`` is a restriction of a larger matrix).
    """
    h = as_hermitian(a, tol)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order]
    v = v[:, order]
    groups = _degeneracy_groups(w, tol, radius)
    cols = []
    for g in groups:
        block = v[:, g.start:g.stop]
        if len(g) == 1:
            cols.append(canonical_phase(block[:, 0])[:, None])
        else:
            cols.append(canonical_basis(block))
    return Eigensystem(w, np.hstack(cols), groups)


def joint_eigenspaces(family, tol: Tolerances = DEFAULT):
    """Split C^n into joint eigenspaces of a commuting Hermitian family.

    Returns a list of ``(basis, values)`` where ``basis`` has orthonormal
    columns spanning one joint eigenspace and ``values`` holds the eigenvalue
    of each family member there. The first matrix is diagonalized, then each
    later matrix is re-diagonalized inside every remaining degenerate
    subspace.

    Raises
    ------
    NotCommuting
        If some member has weight between two different joint eigenspaces of
        the preceding members.
    """
    family = [as_hermitian(a, tol) for a in family]
    if not family:
        raise ValueError("family must be non-empty")
    n = family[0].shape[0]
    if any(a.shape != (n, n) for a in family):
        raise DimensionMismatch("all family members must share one dimension")
    blocks = [(np.eye(n, dtype=complex), ())]
    for stage, a in enumerate(family):
        scale = max(fro(a), tol.abs)
        radius = float(np.max(np.abs(np.linalg.eigvalsh(a)), initial=0.0))
        refined = []
        for q, values in blocks:
            sub = dagger(q) @ a @ q
            sub = 0.5 * (sub + dagger(sub))
            es = hermitian_eigensystem(sub, tol, radius=radius)
            for g in es.degeneracy_groups:
                basis = q @ es.group_basis(g)
                val = float(np.mean(es.eigenvalues[g.start:g.stop]))
                refined.append((basis, values + (val,)))
        # weight of ``a`` outside the block-diagonal of the refined partition
        full = np.hstack([q for q, _ in refined])
        conj = dagger(full) @ a @ full
        mask = np.ones_like(conj, dtype=bool)
        start = 0
        for q, _ in refined:
            stop = start + q.shape[1]
            mask[start:stop, start:stop] = False
            start = stop
        leak = fro(conj[mask]) / scale
        if leak > tol.offdiag:
            raise NotCommuting(f"family member {stage} leaks {leak:.3e} between joint eigenspaces")
        blocks = refined
    return blocks


def simultaneous_diagonalize(family, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Unitary ``U`` with ``U @ A @ U^H`` diagonal for every ``A`` in ``family``.

    Rows of ``U`` are the (conjugated) common eigenvectors. Ordering follows
    the first matrix's eigenvalues descending, ties resolved by the later
    matrices.
    """
    blocks = joint_eigenspaces(family, tol)
    g = np.hstack([q for q, _ in blocks])
    u = dagger(g)
    for k, a in enumerate(family):
        d = u @ np.asarray(a, dtype=complex) @ dagger(u)
        off = fro(d - np.diag(np.diag(d))) / max(fro(a), tol.abs)
        if off > tol.offdiag:
            raise NotCommuting(f"family member {k} retains off-diagonal weight {off:.3e}")
    return u


def commutator_residual(a, b, tol: Tolerances = DEFAULT) -> float:
    """``||AB - BA||_F / max(||A||_F ||B||_F, tol.abs)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cannot commute shapes {a.shape} and {b.shape}")
    return fro(a @ b - b @ a) / max(fro(a) * fro(b), tol.abs)


def psd_factor(w, cols: int, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Factor a positive-semidefinite ``W`` as ``B @ B^H`` with ``B`` of shape (dim, cols).

    ``B`` is ``U sqrt(Lambda)`` over the nonzero eigenpairs, padded with zero
    columns. Any ``B @ R`` with unitary ``R`` is an equally valid factor.
    """
    es = hermitian_eigensystem(w, tol)
    values = es.eigenvalues
    radius = float(np.max(np.abs(values), initial=0.0))
    floor = tol.eig * max(radius, tol.abs)
    if values.size and values[-1] < -floor:
        raise NotPsd(f"eigenvalue {values[-1]:.3e} is negative")
    keep = values > floor
    rank = int(keep.sum())
    if cols < rank:
        raise RankTooLarge(f"rank {rank} does not fit into {cols} columns")
    dim = values.size
    out = np.zeros((dim, cols), dtype=complex)
    out[:, :rank] = es.eigenvectors[:, keep] * np.sqrt(values[keep])
    return out
