"""Morris-Shore decomposition of degenerate ladders into independent chains.

The transformation is block diagonal, one constant unitary ``S_k`` per level,
with ``H_MS = S H S^H`` and amplitudes mapping as ``C_MS = S C``. Rows of
``S_k`` are the (conjugated) MS states of level ``k``. In the MS basis every
transformed coupling ``M_n = S_n V_n S_{n+1}^H`` has at most one nonzero entry
per row and column, all real and positive; following these links level by
level yields the independent chains. Length-1 chains are dark states.

MS-state order inside each level: states of length-1 chains first, then the
members of longer chains in chain order. Chains are sorted by their lowest
level, then by their couplings in descending order from the bottom link up.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NotCommuting, NotDecomposable, PreconditionFailed
from .ladder import LadderSystem, require_valid
from .linalg import canonical_basis, commutator_residual, dagger, fro, is_unitary, joint_eigenspaces, orthonormal_complement
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True)
class MsTransformation:
    """Constant block-diagonal unitary ``S``.

    ``order`` lists, for each row of ``block_diag(*blocks)``, the original
    basis index it acts on; ``None`` means the natural level ordering. It is
    only non-trivial after the quasi-two-level merge.
    """

    blocks: tuple
    order: tuple | None = None

    def matrix(self) -> np.ndarray:
        s = scipy.linalg.block_diag(*self.blocks).astype(complex)
        if self.order is None:
            return s
        out = np.zeros_like(s)
        out[:, list(self.order)] = s
        return out


@dataclass(frozen=True)
class Link:
    lower: int     # MS-state index in the lower level of the transition
    upper: int     # MS-state index in the upper level
    value: float   # lambda, the constant coupling factor


@dataclass(frozen=True)
class MsCouplingBlock:
    matrix: np.ndarray
    links: tuple

    @property
    def lambdas(self) -> list:
        return [ln.value for ln in self.links]


@dataclass(frozen=True)
class Chain:
    """One independent nondegenerate sub-ladder.

    ``members`` are ``(level, ms_index)`` pairs on consecutive levels,
    ``couplings[i]`` links ``members[i]`` and ``members[i+1]`` with envelope
    ``envelope_ids[i]``, and ``detunings[i]`` is the detuning of
    ``members[i]``.
    """

    members: tuple
    couplings: tuple
    envelope_ids: tuple
    detunings: tuple

    @property
    def length(self) -> int:
        return len(self.members)

    @property
    def is_dark(self) -> bool:
        return len(self.members) == 1

    def couplings_at(self, envelopes, t) -> np.ndarray:
        """Time-dependent couplings ``lambda * f_n(t)``."""
        return np.array([lam * float(envelopes[e](t)) for lam, e in zip(self.couplings, self.envelope_ids)])

    def hamiltonian(self, envelopes, t) -> np.ndarray:
        h = np.diag(np.asarray(self.detunings, dtype=complex))
        for i, c in enumerate(self.couplings_at(envelopes, t)):
            h[i, i + 1] = h[i + 1, i] = c
        return h


@dataclass(frozen=True)
class Census:
    by_length: dict

    @property
    def dark(self) -> int:
        return self.by_length.get(1, 0)

    def count(self, length: int) -> int:
        return self.by_length.get(length, 0)

    @property
    def total_states(self) -> int:
        return sum(k * v for k, v in self.by_length.items())

    def as_dict(self) -> dict:
        return {str(k): v for k, v in sorted(self.by_length.items(), reverse=True)}

    def __str__(self):
        parts = [f"{v} x {k}-chain" for k, v in sorted(self.by_length.items(), reverse=True) if k > 1]
        parts.append(f"{self.dark} dark")
        return ", ".join(parts)


@dataclass(frozen=True)
class DecompositionReport:
    """Result of a Morris-Shore decomposition.

    ``degeneracies``, ``detunings`` and ``couplings`` describe the ladder the
    chains refer to: the original system, or the merged two-level system
    after :func:`quasi_two_level_reduce`.
    """

    transformation: MsTransformation
    coupling_blocks: tuple
    chains: tuple
    census: Census
    commutator_residuals: tuple
    degeneracies: tuple
    detunings: tuple
    couplings: tuple
    envelope_ids: tuple
    notes: tuple = field(default=())

    @property
    def offsets(self) -> list:
        out = [0]
        for n in self.degeneracies:
            out.append(out[-1] + n)
        return out

    @property
    def dim(self) -> int:
        return sum(self.degeneracies)

    def global_index(self, level: int, index: int) -> int:
        return self.offsets[level] + index

    def chain_indices(self, chain: Chain) -> list:
        return [self.global_index(k, i) for k, i in chain.members]

    @property
    def lambdas(self) -> list:
        """Constant couplings per transition."""
        return [blk.lambdas for blk in self.coupling_blocks]

    def lambdas_at(self, envelopes, t) -> list:
        """Couplings ``lambda * f_n(t)`` per transition."""
        return [[v * float(envelopes[e](t)) for v in blk.lambdas]
                for blk, e in zip(self.coupling_blocks, self.envelope_ids)]


# report assembly

def _assemble(bases, couplings, detunings, envelope_ids, residuals, tol, order=None, notes=()):
    """Check diagonality of every ``M_n``, fix phases, extract and sort chains."""
    bases = [np.array(b, dtype=complex) for b in bases]
    n_levels = len(bases)
    thresholds = [tol.null * max(fro(v), tol.abs) for v in couplings]
    links = []
    for n, v in enumerate(couplings):
        m = dagger(bases[n]) @ v @ bases[n + 1]
        mags = np.abs(m)
        hits = mags > thresholds[n]
        if (hits.sum(axis=1) > 1).any() or (hits.sum(axis=0) > 1).any():
            leak = float(np.sort(mags, axis=None)[-2] / max(fro(v), tol.abs)) if mags.size > 1 else 0.0
            raise NotDecomposable(n + 1, leak, "coupling block has several links per MS state")
        leak = fro(np.where(hits, 0, m)) / max(fro(v), tol.abs)
        if leak > tol.offdiag:
            raise NotDecomposable(n + 1, leak, "coupling block is not diagonal in the MS basis")
        pairs = list(zip(*np.nonzero(hits)))
        # absorb the phase of every link into the upper partner
        for i, j in pairs:
            bases[n + 1][:, j] *= np.conj(m[i, j]) / abs(m[i, j])
        links.append(dict(pairs))

    up = links
    down = [dict((j, i) for i, j in ln.items()) for ln in links]
    chains = []
    for k in range(n_levels):
        for i in range(bases[k].shape[1]):
            if k > 0 and i in down[k - 1]:
                continue
            members = [(k, i)]
            while members[-1][0] < n_levels - 1 and members[-1][1] in up[members[-1][0]]:
                lv, idx = members[-1]
                members.append((lv + 1, up[lv][idx]))
            chains.append(members)

    def lam(n, i, j):
        return float(np.real(np.conj(bases[n][:, i]) @ couplings[n] @ bases[n + 1][:, j]))

    def chain_key(members):
        return (members[0][0], tuple(-lam(lv, i, j) for (lv, i), (_, j) in zip(members, members[1:])))

    chains.sort(key=chain_key)
    # new within-level ordering: dark states first, then chain members
    new_order = [[] for _ in range(n_levels)]
    for members in chains:
        if len(members) == 1:
            new_order[members[0][0]].append(members[0][1])
    for members in chains:
        if len(members) > 1:
            for lv, i in members:
                new_order[lv].append(i)
    remap = [{old: new for new, old in enumerate(o)} for o in new_order]
    bases = [b[:, o] for b, o in zip(bases, new_order)]

    coupling_blocks = []
    for n, v in enumerate(couplings):
        m = dagger(bases[n]) @ v @ bases[n + 1]
        blk_links = tuple(sorted(
            (Link(remap[n][i], remap[n + 1][j], float(abs(m[remap[n][i], remap[n + 1][j]])))
             for i, j in links[n].items()),
            key=lambda ln: ln.lower))
        coupling_blocks.append(MsCouplingBlock(m, blk_links))

    out_chains = []
    for members in chains:
        new_members = tuple((lv, remap[lv][i]) for lv, i in members)
        lams = tuple(float(abs(coupling_blocks[lv].matrix[i, j]))
                     for (lv, i), (_, j) in zip(new_members, new_members[1:]))
        out_chains.append(Chain(new_members, lams,
                                tuple(envelope_ids[lv] for lv, _ in new_members[:-1]),
                                tuple(float(detunings[lv]) for lv, _ in new_members)))

    blocks = tuple(dagger(b) for b in bases)
    for k, s in enumerate(blocks):
        if not is_unitary(s, tol):
            raise NotDecomposable(k, fro(s @ dagger(s) - np.eye(s.shape[0])), "MS block is not unitary")
    census = Census(dict(Counter(c.length for c in out_chains)))
    return DecompositionReport(
        MsTransformation(blocks, None if order is None else tuple(int(i) for i in order)),
        tuple(coupling_blocks), tuple(out_chains), census, tuple(float(r) for r in residuals),
        tuple(b.shape[0] for b in bases), tuple(float(d) for d in detunings),
        tuple(np.asarray(v) for v in couplings), tuple(envelope_ids), tuple(notes))


# two-level

def decompose_two_level(v, delta: float = 0.0, envelope_id: str = "f", tol: Tolerances = DEFAULT,
                        order=None) -> DecompositionReport:
    """Two-level MS transformation from the singular value decomposition of ``V``.

    ``S_a = U^H`` and ``S_b = W^H`` for ``V = U Sigma W^H``, so that
    ``M = S_a V S_b^H = Sigma`` is diagonal with the singular values as the
    couplings of the independent two-state systems.
    """
    v = np.atleast_2d(np.asarray(v, dtype=complex))
    u, _, wh = np.linalg.svd(v, full_matrices=True)
    return _assemble([u, dagger(wh)], [v], [0.0, float(delta)], [envelope_id], (), tol, order)


# N-level

def _intersect(partition, other, level, tol):
    """Common refinement of two orthogonal decompositions of the same space."""
    out = []
    for q in partition:
        pieces = []
        for r in other:
            u, s, _ = np.linalg.svd(dagger(q) @ r, full_matrices=False)
            bad = (s > tol.subspace) & (s < 1 - tol.subspace)
            if bad.any():
                raise NotDecomposable(level, float(np.max(np.minimum(s[bad], 1 - s[bad]))),
                                      "MS subspaces of adjacent transitions are incompatible")
            keep = s >= 1 - tol.subspace
            if keep.any():
                pieces.append(q @ u[:, keep])
        got = sum(p.shape[1] for p in pieces)
        if got != q.shape[1]:
            raise NotDecomposable(level, 1.0, "MS subspaces of adjacent transitions are incompatible")
        out.extend(pieces)
    return out


def _isometry(y):
    u, _, wh = np.linalg.svd(y, full_matrices=False)
    return u @ wh


def _images(partition, v, threshold):
    """Map each block through ``v``; return (image bases, index map) for bright blocks."""
    images, owners = [], []
    for idx, q in enumerate(partition):
        y = v @ q
        lam = np.sqrt(max(np.real(np.trace(dagger(y) @ y)) / q.shape[1], 0.0))
        if lam > threshold:
            images.append(_isometry(y / lam))
            owners.append(idx)
    return images, owners


def _transport(partition, v, threshold, dim, level, tol):
    images, _ = _images(partition, v, threshold)
    pieces = list(images)
    rest = orthonormal_complement(np.hstack(images) if images else np.zeros((dim, 0)), dim)
    if rest.shape[1]:
        pieces.append(rest)
    return pieces


def level_partitions(system: LadderSystem, tol: Tolerances = DEFAULT) -> list:
    """Mutually consistent joint-eigenspace partitions of every level.

    Starts from the joint eigenspaces of ``V_{k-1}^H V_{k-1}`` and
    ``V_k V_k^H`` on each level, then alternately pushes the partitions up
    (through ``V^H``) and down (through ``V``) and intersects, until the image
    of every bright block is exactly one block of the neighbouring level.
    """
    v = [tr.constant_part for tr in system.transitions]
    dims = system.degeneracies
    thresholds = [tol.null * max(fro(x), tol.abs) for x in v]
    parts = []
    for k in range(len(dims)):
        family = []
        if k < len(v):
            family.append(v[k] @ dagger(v[k]))
        if k > 0:
            family.append(dagger(v[k - 1]) @ v[k - 1])
        try:
            parts.append([q for q, _ in joint_eigenspaces(family, tol)])
        except NotCommuting as exc:
            raise NotDecomposable(k, float("nan"), str(exc)) from None
    for _ in range(2 * len(dims) * max(dims) + 2):
        before = [len(p) for p in parts]
        for k in range(len(v)):
            parts[k + 1] = _intersect(parts[k + 1], _transport(parts[k], dagger(v[k]), thresholds[k],
                                                               dims[k + 1], k + 1, tol), k + 1, tol)
        for k in range(len(v), 0, -1):
            parts[k - 1] = _intersect(parts[k - 1], _transport(parts[k], v[k - 1], thresholds[k - 1],
                                                               dims[k - 1], k - 1, tol), k - 1, tol)
        if [len(p) for p in parts] == before:
            break
    return parts


def construct_level_blocks(system: LadderSystem, partitions, tol: Tolerances = DEFAULT) -> list:
    """Per-level MS bases (columns = MS states) from consistent partitions.

    Blocks that are images of bright blocks one level down get the images
    ``V^H |x> / lambda`` of that level's states; all other blocks (dark from
    below) get a canonical orthonormal basis.
    """
    v = [tr.constant_part for tr in system.transitions]
    thresholds = [tol.null * max(fro(x), tol.abs) for x in v]
    chosen = [[canonical_basis(q) for q in partitions[0]]]
    for k in range(len(v)):
        nxt = [None] * len(partitions[k + 1])
        for basis in chosen[k]:
            y = dagger(v[k]) @ basis
            lam = np.sqrt(max(np.real(np.trace(dagger(y) @ y)) / basis.shape[1], 0.0))
            if lam <= thresholds[k]:
                continue
            y = _isometry(y / lam)
            weights = [fro(dagger(q) @ y) for q in partitions[k + 1]]
            target = int(np.argmax(weights))
            q = partitions[k + 1][target]
            if q.shape[1] != y.shape[1] or nxt[target] is not None:
                raise NotDecomposable(k + 1, 1.0, "bright image does not match one MS subspace")
            nxt[target] = y
        chosen.append([b if b is not None else canonical_basis(q)
                       for b, q in zip(nxt, partitions[k + 1])])
    return [np.hstack(c) for c in chosen]


def interior_residuals(system: LadderSystem, tol: Tolerances = DEFAULT) -> list:
    """Scaled ``[V_{k-1}^H V_{k-1}, V_k V_k^H]`` for every interior level ``k``."""
    v = [tr.constant_part for tr in system.transitions]
    return [commutator_residual(dagger(v[k - 1]) @ v[k - 1], v[k] @ dagger(v[k]), tol)
            for k in range(1, len(v))]


def decompose(system: LadderSystem, tol: Tolerances = DEFAULT) -> DecompositionReport:
    """Morris-Shore decomposition of an N-level ladder.

    Only the constant parts of the couplings enter; envelopes are attached to
    the chain links afterwards.

    Raises
    ------
    NotDecomposable
        If some interior level has a commutator residual above
        ``tol.commute``, or if the MS bases of adjacent transitions cannot be
        matched.
    """
    require_valid(system)
    residuals = interior_residuals(system, tol)
    for k, r in enumerate(residuals, start=1):
        if r > tol.commute:
            raise NotDecomposable(k, r)
    partitions = level_partitions(system, tol)
    bases = construct_level_blocks(system, partitions, tol)
    return _assemble(bases, [tr.constant_part for tr in system.transitions], system.detunings,
                     [tr.envelope_id for tr in system.transitions], residuals, tol)


# quasi two-level

def _same_envelope(system, ids):
    first = ids[0]
    return all(i == first or system.envelopes[i] == system.envelopes[first] for i in ids)


def quasi_two_level_reduce(system: LadderSystem, tol: Tolerances = DEFAULT,
                           resonance_tol: float = 1e-12) -> DecompositionReport:
    """Merge alternate levels into two super-levels and apply the two-level MS.

    Requires (i) one common envelope for all transitions and (ii) zero
    detuning on levels 0, 2, 4, ... and a common detuning on levels 1, 3, ....
    The returned report refers to the merged two-level system; its
    transformation carries the permutation back to the original ordering.

    Raises
    ------
    PreconditionFailed
        ``condition`` is ``"envelope"`` or ``"resonance"``.
    """
    require_valid(system)
    ids = [tr.envelope_id for tr in system.transitions]
    if not _same_envelope(system, ids):
        raise PreconditionFailed("envelope", f"transitions use different envelopes {ids}")
    det = system.detunings
    even, odd = det[0::2], det[1::2]
    scale = max(1.0, max(abs(x) for x in det))
    if any(abs(x) > resonance_tol * scale for x in even):
        raise PreconditionFailed("resonance", f"levels 0, 2, ... must have zero detuning, got {even}")
    if any(abs(x - odd[0]) > resonance_tol * scale for x in odd):
        raise PreconditionFailed("resonance", f"levels 1, 3, ... must share one detuning, got {odd}")
    off = system.offsets
    lower = [k for k in range(len(det)) if k % 2 == 0]
    upper = [k for k in range(len(det)) if k % 2 == 1]
    pos = {}
    for group in (lower, upper):
        start = 0
        for k in group:
            pos[k] = start
            start += system.levels[k].degeneracy
    n_lo = sum(system.levels[k].degeneracy for k in lower)
    n_up = sum(system.levels[k].degeneracy for k in upper)
    v = np.zeros((n_lo, n_up), dtype=complex)
    for n, tr in enumerate(system.transitions):
        a, b = system.levels[n].degeneracy, system.levels[n + 1].degeneracy
        if n % 2 == 0:
            v[pos[n]:pos[n] + a, pos[n + 1]:pos[n + 1] + b] = tr.constant_part
        else:
            v[pos[n + 1]:pos[n + 1] + b, pos[n]:pos[n] + a] = dagger(tr.constant_part)
    order = [i for group in (lower, upper) for k in group for i in range(off[k], off[k + 1])]
    return decompose_two_level(v, odd[0], ids[0], tol, order=order)


# Hamiltonians in the MS basis

def ms_hamiltonian(report: DecompositionReport, system: LadderSystem, t: float) -> np.ndarray:
    """``S H(t) S^H`` computed by conjugating the original Hamiltonian."""
    from .ladder import assemble_hamiltonian

    s = report.transformation.matrix()
    return s @ assemble_hamiltonian(system, t) @ dagger(s)


def hamiltonian_from_chains(report: DecompositionReport, envelopes, t: float) -> np.ndarray:
    """MS-basis Hamiltonian assembled directly from the chains."""
    h = np.zeros((report.dim, report.dim), dtype=complex)
    for chain in report.chains:
        idx = report.chain_indices(chain)
        h[np.ix_(idx, idx)] = chain.hamiltonian(envelopes, t)
    return h


# census

def chain_census(degeneracies, chains=None) -> Census:
    """Count chains by length, or predict the generic census.

    With ``chains`` the census is counted and checked to cover every state.
    Without, the generic full-rank census is predicted: for two levels
    ``min`` two-state chains plus ``|N_a - N_b|`` dark states; for three
    levels the minimum-degeneracy rules (middle level smallest, or smallest
    at an end).
    """
    degeneracies = [int(d) for d in degeneracies]
    if chains is not None:
        census = Census(dict(Counter(c.length for c in chains)))
        if census.total_states != sum(degeneracies):
            raise ValueError(f"chains cover {census.total_states} states, system has {sum(degeneracies)}")
        return census
    if len(degeneracies) == 2:
        a, b = degeneracies
        return Census({k: v for k, v in {2: min(a, b), 1: abs(a - b)}.items() if v})
    if len(degeneracies) == 3:
        na, nb, nc = degeneracies
        lo, mid, hi = sorted(degeneracies)
        if nb == lo:
            counts = {3: nb, 1: (na - nb) + (nc - nb)}
        else:
            counts = {3: lo, 2: mid - lo, 1: hi - mid}
        return Census({k: v for k, v in counts.items() if v})
    raise ValueError("generic census is only tabulated for two or three levels")
