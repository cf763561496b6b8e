"""Example tuples and random instance generators used across tests and scripts."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .canonical import ClassAData, assemble_tensor, check_structure
from .cpmaps import is_primitive
from .errors import StructureViolation
from .mps import MpsTuple

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def ghz_tuple() -> MpsTuple:
    """Reducible two-level tuple: v_0 = diag(1, 0), v_1 = diag(0, 1)."""
    return MpsTuple(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
                             dtype=complex))


def xz_tuple() -> MpsTuple:
    """(sigma_x, sigma_z)/sqrt(2): irreducible with period 2."""
    return MpsTuple(np.array([SX, SZ]) / np.sqrt(2))


def pauli_tuple() -> MpsTuple:
    """(sigma_x, sigma_y, sigma_z)/sqrt(3): primitive, invariant state I/2."""
    return MpsTuple(np.array([SX, SY, SZ]) / np.sqrt(3))


def aklt_tuple() -> MpsTuple:
    """Spin-1 valence-bond tuple, unital normalization.

    v_+ = sqrt(2/3) sigma_+, v_0 = -sqrt(1/3) sigma_z, v_- = -sqrt(2/3) sigma_-.
    """
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    return MpsTuple(np.array([np.sqrt(2 / 3) * sp,
                              -np.sqrt(1 / 3) * SZ,
                              -np.sqrt(2 / 3) * sp.T]))


def scalar_tuple(values) -> MpsTuple:
    """D = 1 tuple from a list of scalars."""
    return MpsTuple(np.array([[[complex(z)]] for z in values]))


def toy_classa() -> ClassAData:
    """Smallest structured example: n0 = 1, kR = 1, kL = 0.

    B_1 = [[1/(2 sqrt 2), 1], [0, 1/sqrt 2]] and
    B_2 = [[1/(2 sqrt 2), -1], [0, 1/sqrt 2]] in the ladder basis.
    """
    s = 1 / np.sqrt(2)
    data = ClassAData(
        n=2, n0=1, kR=1, kL=0,
        lam=np.array([0.5, 1.0], dtype=complex),
        D=[np.array([[0, 1], [0, 0]], dtype=complex)],
        G=[],
        Y=np.zeros((2, 2), dtype=complex),
        omega=scalar_tuple([s, s]),
        xR=np.array([[[[1.0]]], [[[-1.0]]]], dtype=complex),
        xL=np.zeros((2, 0, 1, 1), dtype=complex),
    )
    data = replace(data, B=assemble_tensor(data), l0=1)
    check_structure(data)
    return data


def four_corner_toy() -> ClassAData:
    """Two-sided example (kR = kL = 1) whose kernel spaces have a corner block."""
    s = 1 / np.sqrt(2)
    K = 3
    D1 = np.zeros((K, K), dtype=complex)
    D1[0, 1] = 1.0           # positions: -1, 0, +1
    G1 = np.zeros((K, K), dtype=complex)
    G1[1, 2] = 1.0
    data = ClassAData(
        n=2, n0=1, kR=1, kL=1,
        lam=np.array([0.5, 1.0, 0.4], dtype=complex),
        D=[D1], G=[G1],
        Y=np.zeros((K, K), dtype=complex),
        omega=scalar_tuple([s, s]),
        xR=np.array([[[[1.0]]], [[[-1.0]]]], dtype=complex),
        xL=np.array([[[[0.7]]], [[[0.3]]]], dtype=complex),
    )
    data = replace(data, B=assemble_tensor(data), l0=1)
    check_structure(data)
    return data


def random_primitive_tuple(n: int, D: int, rng, max_tries: int = 50) -> MpsTuple:
    """Random unital tuple with a primitive transfer map."""
    for _ in range(max_tries):
        raw = rng.standard_normal((n, D, D)) + 1j * rng.standard_normal((n, D, D))
        S = np.einsum("mij,mkj->ik", raw, raw.conj())
        w, Q = np.linalg.eigh(S)
        if w.min() < 1e-8 * w.max():
            continue
        Si = Q @ np.diag(1 / np.sqrt(w)) @ Q.conj().T
        v = MpsTuple(np.einsum("ij,mjk->mik", Si, raw))
        if is_primitive(v):
            return v
    raise StructureViolation("no primitive tuple found")


def _random_moduli(count: int, rng) -> np.ndarray:
    """Well-separated contraction scales in (0.3, 0.85)."""
    while True:
        vals = np.sort(rng.uniform(0.3, 0.85, size=count))[::-1]
        if count < 2 or np.min(np.abs(np.diff(vals))) > 0.05:
            return vals


def random_classa(rng, n: int = 2, n0: int = 1, kR: int = 1, kL: int = 1,
                  complex_scales: bool = True) -> ClassAData:
    """Random valid structured data with elementary ladder matrices.

    Scales are well separated in modulus (so Y = 0 is forced) with optional
    random phases; correction coefficients are dense random matrices.
    """
    K = kR + kL + 1
    lam = np.ones(K, dtype=complex)
    modR = _random_moduli(kR, rng)
    modL = _random_moduli(kL, rng)
    for a in range(1, kR + 1):
        phase = np.exp(2j * np.pi * rng.uniform()) if complex_scales else 1.0
        lam[kR - a] = modR[a - 1] * phase
    for b in range(1, kL + 1):
        phase = np.exp(2j * np.pi * rng.uniform()) if complex_scales else 1.0
        lam[kR + b] = modL[b - 1] * phase
    Ds, Gs = [], []
    for a in range(1, kR + 1):
        D = np.zeros((K, K), dtype=complex)
        D[kR - a, kR] = 1.0
        Ds.append(D)
    for b in range(1, kL + 1):
        G = np.zeros((K, K), dtype=complex)
        G[kR, kR + b] = 1.0
        Gs.append(G)
    omega = random_primitive_tuple(n, n0, rng)
    xR = 0.7 * (rng.standard_normal((n, kR, n0, n0))
                + 1j * rng.standard_normal((n, kR, n0, n0)))
    xL = 0.7 * (rng.standard_normal((n, kL, n0, n0))
                + 1j * rng.standard_normal((n, kL, n0, n0)))
    data = ClassAData(n=n, n0=n0, kR=kR, kL=kL, lam=lam, D=Ds, G=Gs,
                      Y=np.zeros((K, K), dtype=complex), omega=omega,
                      xR=xR, xL=xL)
    data = replace(data, B=assemble_tensor(data))
    check_structure(data)
    return data


def scramble(v: MpsTuple, rng, strength: float = 0.4,
             block: int | None = None) -> MpsTuple:
    """Conjugate by a random well-conditioned similarity.

    With ``block`` set, the similarity is block upper triangular with unitary
    diagonal blocks (preserves the flag of adjoint-invariant subspaces up to
    rotation); otherwise a dense unitary is used.
    """
    D = v.D
    raw = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    Q, _ = np.linalg.qr(raw)
    if block is None:
        S = Q
    else:
        S = np.zeros((D, D), dtype=complex)
        for start in range(0, D, block):
            stop = min(start + block, D)
            sub = rng.standard_normal((stop - start,) * 2) \
                + 1j * rng.standard_normal((stop - start,) * 2)
            Qb, _ = np.linalg.qr(sub)
            S[start:stop, start:stop] = Qb
            upper = rng.standard_normal((stop - start, D - stop)) \
                + 1j * rng.standard_normal((stop - start, D - stop))
            S[start:stop, stop:] = strength * upper
        S = Q @ S
    Si = np.linalg.inv(S)
    return MpsTuple(np.array([S @ m @ Si for m in v.matrices]))
