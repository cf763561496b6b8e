"""Spectral classification of transfer CP maps.

A tuple v defines T(X) = sum_mu v_mu X v_mu*.  This module decides whether T
is reducible / irreducible / primitive, extracts the Perron pair (t, rho),
the peripheral spectrum and its period structure, and searches for unitary
(or antiunitary-composed) intertwiners between two tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotIrreducible, NotPrimitive, SingularRho
from .linalg import DEFAULT_RANK_TOL, general_eig, hermitian_eig
from .mps import MpsTuple, apply_transfer, transfer_matrix

PERIPHERAL_TOL = 1e-8
POSITIVITY_FLOOR = 1e-10


@dataclass(frozen=True)
class TransferSpectrum:
    radius: float
    eigenvalues: np.ndarray
    peripheral: np.ndarray
    period: int
    perron_matrix: np.ndarray | None
    invariant_state: np.ndarray | None
    support_rank: int
    flags: dict
    period_unitary: np.ndarray | None = None
    period_projections: list | None = field(default=None, repr=False)

    def report(self) -> dict:
        """JSON-ready summary (complex numbers as [re, im] pairs)."""
        return {
            "radius": self.radius,
            "peripheral": [[z.real, z.imag] for z in self.peripheral],
            "period": self.period,
            "flags": dict(self.flags),
        }


def _hermitian_eigvec_at(v: MpsTuple, value: float, direction: str,
                         tol: float) -> np.ndarray | None:
    """Hermitian element of the eigenspace of T (or T*) at a real eigenvalue.

    Returns None when the eigenspace contains no Hermitian ray.  For a simple
    real eigenvalue of a CP map the eigenvector can always be Hermitized.
    """
    T = transfer_matrix(v, direction)
    D = v.D
    eig = general_eig(T)
    idx = [j for j, lam in enumerate(eig.eigenvalues)
           if abs(lam - value) <= tol * max(value, 1.0)]
    if not idx:
        return None
    X = eig.eigenvectors[:, idx[0]].reshape(D, D)
    H = (X + X.conj().T) / 2
    if np.linalg.norm(H) < 1e-12:
        H = (X - X.conj().T) / 2j
    if np.linalg.norm(H) < 1e-12:
        return None
    if H.trace().real < 0:
        H = -H
    return H


def _perron_pair(v: MpsTuple, radius: float, tol: float):
    """(t, rho) with T(t) = r t, T*(rho) = r rho, rho trace-one Hermitian."""
    t = _hermitian_eigvec_at(v, radius, "R", tol)
    rho = _hermitian_eigvec_at(v, radius, "L", tol)
    if t is not None:
        t = t / np.linalg.norm(t, 2)
    if rho is not None and abs(rho.trace()) > 1e-12:
        rho = rho / rho.trace()
    return t, rho


def peripheral_structure(v: MpsTuple, tol: float = PERIPHERAL_TOL) -> TransferSpectrum:
    """Full spectral classification of the transfer map of ``v``."""
    T = transfer_matrix(v, "R")
    eig = general_eig(T)
    vals = eig.eigenvalues
    radius = float(np.abs(vals).max())
    if radius == 0.0:
        return TransferSpectrum(0.0, vals, vals[:0], 0, None, None, 0,
                                {"reducible": True, "irreducible": False,
                                 "primitive": False})
    peripheral = vals[np.abs(vals) >= radius * (1 - tol)]
    # multiplicity of the radius itself
    at_r = [z for z in peripheral if abs(z - radius) <= tol * radius]
    r_simple = len(at_r) == 1
    t, rho = _perron_pair(v, radius, tol)

    def strictly_positive(H):
        if H is None:
            return False
        w = np.linalg.eigvalsh((H + H.conj().T) / 2)
        return bool(w.min() > POSITIVITY_FLOOR * max(w.max(), 1e-300))

    irreducible = r_simple and strictly_positive(t)
    primitive = (irreducible and len(peripheral) == 1 and strictly_positive(rho))

    if rho is None:
        # reducible case: project I/D onto the eigenspace at the radius of T*
        Tadj = transfer_matrix(v, "L")
        eigL = general_eig(Tadj)
        cols = [j for j, lam in enumerate(eigL.eigenvalues)
                if abs(lam - radius) <= tol * radius]
        if cols:
            B = eigL.eigenvectors[:, cols]
            x = np.eye(v.D, dtype=complex).ravel() / v.D
            coef, *_ = np.linalg.lstsq(B, x, rcond=None)
            R = (B @ coef).reshape(v.D, v.D)
            R = (R + R.conj().T) / 2
            if abs(R.trace()) > 1e-12:
                rho = R / R.trace()
    support_rank = 0
    if rho is not None:
        w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        support_rank = int(np.count_nonzero(w > POSITIVITY_FLOOR * max(abs(w).max(), 1e-300)))

    period = len(peripheral) if irreducible else (1 if r_simple else 0)
    U = None
    projections = None
    if irreducible and period > 1:
        U, projections = _period_data(v, radius, period, tol)
    flags = {"reducible": not irreducible, "irreducible": irreducible,
             "primitive": primitive}
    return TransferSpectrum(radius, vals, peripheral, period, t, rho,
                            support_rank, flags, U, projections)


def _period_data(v: MpsTuple, radius: float, b: int, tol: float):
    """Period unitary U and its spectral projections Q_k with T(Q_k) = r Q_{k-1}.

    The eigenvector of T at r*exp(2 pi i / b) is a scalar multiple of a
    unitary; its spectral projections cluster at the b-th roots of unity.
    """
    T = transfer_matrix(v, "R")
    eig = general_eig(T)
    target = radius * np.exp(2j * np.pi / b)
    j = int(np.argmin(np.abs(eig.eigenvalues - target)))
    X = eig.eigenvectors[:, j].reshape(v.D, v.D)
    U, _ = scipy.linalg.polar(X)
    # polar leaves a free global phase; pin it so that U^b = 1 and the
    # eigenvalues land on the b-th roots of unity
    Ub = np.linalg.matrix_power(U, b)
    c = np.trace(Ub) / v.D
    if abs(abs(c) - 1) < 1e-8 and np.linalg.norm(Ub - c * np.eye(v.D)) < 1e-8:
        U = U * c ** (-1.0 / b)
    w, S = np.linalg.eig(U)
    phases = np.round(np.angle(w) / (2 * np.pi / b)).astype(int) % b
    projections = []
    Sinv = np.linalg.inv(S)
    for k in range(b):
        mask = (phases == k).astype(float)
        Q = S @ np.diag(mask) @ Sinv
        projections.append(Q)
    # the cluster labels carry an arbitrary offset and orientation; pick the
    # relabeling that realizes the cyclic shift T(Q_k) = r Q_{k-1 mod b}
    def shift_residual(proj):
        res = 0.0
        for k in range(b):
            res = max(res, np.linalg.norm(
                apply_transfer(v, proj[k]) - radius * proj[(k - 1) % b]))
        return res
    for direction in (1, -1):
        for offset in range(b):
            cand = [projections[(direction * k + offset) % b]
                    for k in range(b)]
            if shift_residual(cand) <= tol * max(radius, 1.0):
                return U, cand
    return U, None


def perron_data(v: MpsTuple, tol: float = PERIPHERAL_TOL):
    """(r, t, rho) for an irreducible transfer map; raises NotIrreducible."""
    spec = peripheral_structure(v, tol)
    if not spec.flags["irreducible"]:
        raise NotIrreducible("transfer map is reducible")
    r, t, rho = spec.radius, spec.perron_matrix, spec.invariant_state
    if float(np.linalg.norm(apply_transfer(v, t) - r * t)) > 1e-10 * max(r, 1.0):
        raise NotIrreducible("Perron matrix residual too large")
    if float(np.linalg.norm(apply_transfer(v, rho, "L") - r * rho)) > 1e-10 * max(r, 1.0):
        raise NotIrreducible("invariant state residual too large")
    return r, t, rho


def is_primitive(v: MpsTuple, tol: float = PERIPHERAL_TOL) -> bool:
    return peripheral_structure(v, tol).flags["primitive"]


def _intertwiner_candidates(v1: MpsTuple, v2: MpsTuple, tol: float):
    """All residual-passing (U, c) pairs from the cross transfer map."""
    if v1.n != v2.n:
        raise DimensionMismatch(f"physical dimensions differ: {v1.n} vs {v2.n}")
    if v1.D != v2.D:
        return []  # no unitary between different bond dimensions
    D = v1.D
    S = sum(np.kron(m2, m1.conj()) for m1, m2 in zip(v1.matrices, v2.matrices))
    eig = general_eig(S)
    scale = max(max(np.linalg.norm(m) for m in v1.matrices), 1.0)
    out = []
    for j in range(len(eig.eigenvalues)):
        s = eig.eigenvalues[j]
        if abs(s) < 1 - tol:
            continue
        X = eig.eigenvectors[:, j].reshape(D, D)
        if np.linalg.svd(X, compute_uv=False)[-1] < 1e-10:
            continue
        U, _ = scipy.linalg.polar(X)
        c = np.conj(s / abs(s))
        residual = max(np.linalg.norm(U @ m1 - c * m2 @ U)
                       for m1, m2 in zip(v1.matrices, v2.matrices))
        if residual <= tol * scale:
            # phase-fix U: first sizable entry of the first column real positive
            col = U[:, 0]
            idx = np.flatnonzero(np.abs(col) > 1e-8)
            if idx.size:
                U = U * (abs(col[idx[0]]) / col[idx[0]])
            out.append((U, c, residual))
    return out


def find_intertwiner(v1: MpsTuple, v2: MpsTuple, tol: float = PERIPHERAL_TOL):
    """Unitary U and phase c with U v1_mu = c v2_mu U, or None.

    Both tuples must be primitive (unital after gauge).  Search: peripheral
    eigenvectors of the cross transfer map S(X) = sum v2_mu X v1_mu*; when
    the relation holds, S(U) = conj(c) U, so each unimodular eigenvalue s
    yields the candidate c = conj(s).  Candidates are residual-tested and the
    eigenvector is polar-decomposed to a unitary.
    """
    cands = _intertwiner_candidates(v1, v2, tol)
    if not cands:
        return None
    U, c, _ = cands[0]
    return U, c


@dataclass(frozen=True)
class AntiunitaryMatch:
    """J = (conjugation in rho's eigenbasis) composed with this unitary part."""

    unitary: np.ndarray          # V with J = J0 V, J0 = conjugation in rho basis
    c: complex
    rho_eigenbasis: np.ndarray   # Q, columns = eigenbasis of rho
    residual: float

    def apply(self, omega_L: MpsTuple, rho: np.ndarray) -> MpsTuple:
        """Evaluate c * J* rho^{-1/2} omega_L_mu^* rho^{1/2} J for all mu."""
        transformed = _antiunitary_flip(omega_L, rho, self.rho_eigenbasis)
        V = self.unitary
        return MpsTuple(np.array([self.c * V.conj().T @ m @ V
                                  for m in transformed.matrices]))


def _antiunitary_flip(omega_L: MpsTuple, rho: np.ndarray, Q: np.ndarray) -> MpsTuple:
    """conj(rho^{-1/2} omega_L_mu^* rho^{1/2}) entrywise in rho's eigenbasis."""
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() <= POSITIVITY_FLOOR:
        raise SingularRho(f"rho minimum eigenvalue {w.min():.3e}")
    eig = hermitian_eig(rho)
    rs = eig.eigenvectors @ np.diag(np.sqrt(eig.eigenvalues)) @ eig.eigenvectors.conj().T
    rsi = np.linalg.inv(rs)
    out = []
    for m in omega_L.matrices:
        M = rsi @ m.conj().T @ rs
        out.append(Q @ (Q.conj().T @ M @ Q).conj() @ Q.conj().T)
    return MpsTuple(np.array(out))


def find_antiunitary_match(omega_L: MpsTuple, omega_R: MpsTuple,
                           rho: np.ndarray, tol: float = PERIPHERAL_TOL):
    """Antiunitary J and phase c with omega_R = c J* rho^{-1/2} omega_L* rho^{1/2} J.

    rho must be strictly positive and invariant for the adjoint transfer map
    of omega_L.  Returns None when no match exists.
    """
    for name, t in (("omega_L", omega_L), ("omega_R", omega_R)):
        if not is_primitive(t, tol):
            raise NotPrimitive(f"{name} is not primitive")
    rho = np.asarray(rho, dtype=complex)
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if w.min() <= POSITIVITY_FLOOR:
        raise SingularRho(f"rho minimum eigenvalue {w.min():.3e}")
    if np.linalg.norm(apply_transfer(omega_L, rho, "L") - rho) > 1e-8:
        raise SingularRho("rho is not invariant for omega_L's adjoint transfer map")
    Q = hermitian_eig(rho).eigenvectors
    flipped = _antiunitary_flip(omega_L, rho, Q)
    cands = _intertwiner_candidates(flipped, omega_R, tol)
    if not cands:
        return None
    # U flipped_mu = c' omega_R_mu U  =>  omega_R = conj(c') U flipped U*.
    # Phase convention: when several matches pass (self-intertwining base),
    # prefer arg(c) in [0, pi), then the smallest argument.
    def phase_key(cand):
        arg = float(np.angle(np.conj(cand[1]))) % (2 * np.pi)
        return (0 if arg < np.pi else 1, arg)
    U, cprime, _ = min(cands, key=phase_key)
    V, c = U.conj().T, np.conj(cprime)
    residual = max(np.linalg.norm(
        c * V.conj().T @ m @ V - mr)
        for m, mr in zip(flipped.matrices, omega_R.matrices))
    return AntiunitaryMatch(V, c, Q, float(residual))
