"""Adjoint-invariant subspace chains.

Given a tuple v, the chain K_0 < K_1 < ... < K_k = C^D consists of nested
{v_mu*}-invariant subspaces with no invariant subspace strictly between
consecutive levels.  Corner tuples (compressions of v to the level subspaces)
are rescaled to unital form via their Perron data and aligned level by level
to a common primitive base tuple by unitary intertwiners.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .cpmaps import find_intertwiner, is_primitive, peripheral_structure
from .errors import (ContractionFail, CornerZero, NotIrreducible, NotPrimitive,
                     StructureViolation)
from .linalg import DEFAULT_RANK_TOL, hermitian_eig, orthonormal_span
from .mps import MpsTuple

INVARIANCE_TOL = 1e-10
CERTIFICATE_SEEDS = 8


@dataclass(frozen=True)
class InvariantChain:
    """Chain data; fields after ``corners`` are filled by later stages."""

    v: MpsTuple
    k: int
    level_bases: list = field(repr=False)   # orthonormal basis of ran r_a
    bases: list = field(repr=False)         # cumulative orthonormal basis of K_a
    corners: list = field(repr=False)       # corner tuples omega_a
    radii: list | None = None               # spectral radii r^(a)
    perron: list | None = field(default=None, repr=False)    # t_a
    rescaled: list | None = field(default=None, repr=False)  # unital u_a
    phases: list | None = None              # c_a
    unitaries: list | None = field(default=None, repr=False)  # V_a
    base: MpsTuple | None = field(default=None, repr=False)

    @property
    def dims(self):
        return [b.shape[1] for b in self.level_bases]

    def projection(self, a: int) -> np.ndarray:
        """p_a, the orthogonal projection onto K_a."""
        B = self.bases[a]
        return B @ B.conj().T

    def level_projection(self, a: int) -> np.ndarray:
        """r_a = p_a - p_{a-1}."""
        B = self.level_bases[a]
        return B @ B.conj().T

    def report(self) -> dict:
        out = {"k": self.k, "dims": self.dims}
        if self.radii is not None:
            out["radii"] = [float(r) for r in self.radii]
        if self.phases is not None:
            out["phases"] = [[complex(c).real, complex(c).imag] for c in self.phases]
        return out


def _closure(mats, start, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis of the smallest invariant subspace containing start."""
    rank, basis = orthonormal_span([start], tol)
    while True:
        cols = [basis[:, j] for j in range(basis.shape[1])]
        new = [A @ c for A in mats for c in cols]
        rank2, basis2 = orthonormal_span(cols + new, tol)
        if rank2 == rank:
            return basis2
        rank, basis = rank2, basis2


def _descend_once(mats, dim, rng, tol=DEFAULT_RANK_TOL):
    """One random-combination descent step; basis of an invariant subspace."""
    cur = np.eye(dim, dtype=complex)
    stall = 0
    while stall < CERTIFICATE_SEEDS and cur.shape[1] > 1:
        comp = [cur.conj().T @ A @ cur for A in mats]
        g = rng.standard_normal(len(comp)) + 1j * rng.standard_normal(len(comp))
        M = sum(c * A for c, A in zip(g, comp))
        vals, vecs = np.linalg.eig(M)
        order = np.lexsort((vals.imag, vals.real))
        xi = vecs[:, order[0]]
        inner = _closure(comp, xi, tol)
        if inner.shape[1] < cur.shape[1]:
            cur = cur @ inner
            stall = 0
        else:
            stall += 1
    return cur


def _overlap_key(basis: np.ndarray) -> tuple:
    """Lexicographic key: squared overlaps of the subspace with e_1, e_2, ..."""
    P = basis @ basis.conj().T
    return tuple(np.round(np.real(np.diag(P)), 8))


def _minimal_of_matrices(mats, seed: int, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Minimal common invariant subspace of a family of square matrices.

    Runs the random descent from several seeds; among the smallest-dimension
    results the tie is broken by largest overlap with the standard basis
    (reproducibility for tuples with several minimal subspaces).
    """
    dim = mats[0].shape[0]
    results = []
    for s in range(seed, seed + CERTIFICATE_SEEDS):
        rng = np.random.default_rng(s)
        results.append(_descend_once(mats, dim, rng, tol))
    best_dim = min(b.shape[1] for b in results)
    candidates = [b for b in results if b.shape[1] == best_dim]
    return max(candidates, key=_overlap_key)


def minimal_invariant_subspace(v: MpsTuple, within: np.ndarray | None = None,
                               seed: int = 0, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of a minimal {v_mu*}-invariant subspace.

    ``within`` (default: the full space) must itself be invariant; the search
    happens in the compressed action.  Deterministic given the seed.
    """
    adj = [m.conj().T for m in v.matrices]
    if within is None:
        Q = np.eye(v.D, dtype=complex)
    else:
        Q = np.asarray(within, dtype=complex)
        leak = max(np.linalg.norm((np.eye(v.D) - Q @ Q.conj().T) @ A @ Q) for A in adj)
        if leak > INVARIANCE_TOL * max(1.0, max(np.linalg.norm(A) for A in adj)):
            raise StructureViolation(f"'within' is not invariant (leak {leak:.3e})")
    comp = [Q.conj().T @ A @ Q for A in adj]
    W = _minimal_of_matrices(comp, seed, tol)
    return Q @ W


def build_chain(v: MpsTuple, K0: np.ndarray | None = None, seed: int = 0,
                tol=DEFAULT_RANK_TOL) -> InvariantChain:
    """Construct the full invariant chain starting from a minimal subspace."""
    adj = [m.conj().T for m in v.matrices]
    if K0 is None:
        K0 = minimal_invariant_subspace(v, seed=seed, tol=tol)
    level_bases = [np.asarray(K0, dtype=complex)]
    cumulative = [level_bases[0]]
    scale = max(1.0, max(np.linalg.norm(A) for A in adj))
    while cumulative[-1].shape[1] < v.D:
        B = cumulative[-1]
        C = scipy.linalg.null_space(B.conj().T)  # orthonormal complement
        compressed = [C.conj().T @ A @ C for A in adj]
        W = _minimal_of_matrices(compressed, seed, tol)
        lvl = C @ W
        level_bases.append(lvl)
        cumulative.append(np.column_stack([B, lvl]))
    # invariance certificates
    for a, B in enumerate(cumulative):
        P = B @ B.conj().T
        leak = max(np.linalg.norm((np.eye(v.D) - P) @ A @ P) for A in adj)
        if leak > INVARIANCE_TOL * scale:
            raise StructureViolation(f"level {a} invariance residual {leak:.3e}")
    corners = [MpsTuple(np.array([lb.conj().T @ m @ lb for m in v.matrices]))
               for lb in level_bases]
    return InvariantChain(v=v, k=len(level_bases) - 1, level_bases=level_bases,
                          bases=cumulative, corners=corners)


def corner_rescale(chain: InvariantChain, tol: float = 1e-8) -> InvariantChain:
    """Fill radii, Perron matrices and unital rescalings u_a for every corner.

    Diagnoses the two assumption failures: a vanishing corner (CornerZero)
    and a non-contracting corner at level >= 1 (ContractionFail).
    """
    radii, perron, rescaled = [], [], []
    for a, corner in enumerate(chain.corners):
        norm = max(np.linalg.norm(m) for m in corner.matrices)
        if norm < 1e-12:
            raise CornerZero(f"corner at level {a} vanishes")
        spec = peripheral_structure(corner)
        r = spec.radius
        if a >= 1 and r >= 1 - tol:
            raise ContractionFail(
                f"corner at level {a} has spectral radius {r:.6f} >= 1")
        t = spec.perron_matrix
        if t is None:
            raise NotIrreducible(f"corner at level {a} has no Perron matrix")
        w = np.linalg.eigvalsh((t + t.conj().T) / 2)
        if w.min() <= 1e-12 * max(w.max(), 1e-300):
            raise NotIrreducible(
                f"corner at level {a}: Perron matrix not strictly positive")
        eig = hermitian_eig((t + t.conj().T) / 2)
        th = eig.eigenvectors @ np.diag(np.sqrt(eig.eigenvalues)) @ eig.eigenvectors.conj().T
        thi = np.linalg.inv(th)
        u = MpsTuple(np.array([thi @ m @ th / np.sqrt(r) for m in corner.matrices]))
        if not u.is_normalized(1e-10 * u.D):
            raise StructureViolation(f"rescaled corner at level {a} not unital")
        radii.append(float(r))
        perron.append(t)
        rescaled.append(u)
    return replace(chain, radii=radii, perron=perron, rescaled=rescaled)


def align_to_primitive(chain: InvariantChain, base: MpsTuple | None = None,
                       tol: float = 1e-8) -> InvariantChain:
    """Intertwine every rescaled corner with the (primitive) base tuple.

    Fills V_a, c_a with u_a = c_a V_a base V_a*; V_0 = 1, c_0 = 1 when the
    base is the level-0 tuple itself.
    """
    if chain.rescaled is None:
        raise StructureViolation("call corner_rescale first")
    if base is None:
        base = chain.rescaled[0]
    if not is_primitive(base):
        raise NotPrimitive("base tuple is not primitive")
    n0 = base.D
    unitaries, phases = [], []
    for a, u in enumerate(chain.rescaled):
        if u.D != n0:
            raise StructureViolation(
                f"level {a} has rank {u.D}, base has {n0}")
        if a == 0 and base is chain.rescaled[0]:
            unitaries.append(np.eye(n0, dtype=complex))
            phases.append(1.0 + 0j)
            continue
        if not is_primitive(u):
            raise NotPrimitive(f"rescaled corner at level {a} is not primitive")
        found = find_intertwiner(base, u, tol)
        if found is None:
            raise StructureViolation(f"level {a} does not intertwine with the base")
        U, cprime = found
        V, c = U, np.conj(cprime)   # u_mu = c V base_mu V*
        res = max(np.linalg.norm(um - c * V @ bm @ V.conj().T)
                  for um, bm in zip(u.matrices, base.matrices))
        if res > tol:
            raise StructureViolation(f"alignment residual {res:.3e} at level {a}")
        unitaries.append(V)
        phases.append(complex(c))
    return replace(chain, unitaries=unitaries, phases=phases, base=base)


def verify_chain_words(chain: InvariantChain, max_len: int = 4, seed: int = 0) -> float:
    """Max residual of the corner word identity on random words.

    For every level a and word w: (corner word) = p_a (v word) (1 - p_{a-1}),
    both compressed to the level basis.
    """
    rng = np.random.default_rng(seed)
    v = chain.v
    worst = 0.0
    for a in range(chain.k + 1):
        lb = chain.level_bases[a]
        upper = chain.bases[a] @ chain.bases[a].conj().T
        lower = (chain.bases[a - 1] @ chain.bases[a - 1].conj().T
                 if a >= 1 else np.zeros((v.D, v.D)))
        corner = chain.corners[a]
        for L in range(1, max_len + 1):
            word = rng.integers(0, v.n, size=L)
            full = np.eye(v.D, dtype=complex)
            small = np.eye(corner.D, dtype=complex)
            for mu in word:
                full = full @ v.matrices[mu]
                small = small @ corner.matrices[mu]
            rhs = lb.conj().T @ (upper @ full @ (np.eye(v.D) - lower)) @ lb
            worst = max(worst, float(np.linalg.norm(small - rhs)))
    return worst
