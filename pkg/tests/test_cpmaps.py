import numpy as np
import pytest

from gappedmps.cpmaps import (_antiunitary_flip, find_antiunitary_match,
                              find_intertwiner, is_primitive,
                              peripheral_structure, perron_data)
from gappedmps.errors import NotIrreducible, NotPrimitive, SingularRho
from gappedmps.linalg import hermitian_eig
from gappedmps.models import random_primitive_tuple
from gappedmps.mps import MpsTuple, apply_transfer


def test_ghz_reducible(ghz):
    spec = peripheral_structure(ghz)
    assert spec.radius == pytest.approx(1.0, abs=1e-10)
    assert spec.flags["reducible"]
    # eigenvalue multiset {1, 1, 0, 0}
    vals = sorted(np.abs(spec.eigenvalues))
    assert np.allclose(vals, [0, 0, 1, 1], atol=1e-10)
    with pytest.raises(NotIrreducible):
        perron_data(ghz)


def test_xz_period_two(xz):
    spec = peripheral_structure(xz)
    assert spec.flags["irreducible"] and not spec.flags["primitive"]
    assert spec.period == 2
    assert np.allclose(sorted(spec.peripheral.real), [-1, 1], atol=1e-10)
    # the cyclic projections shift under the transfer map
    assert spec.period_projections is not None
    Q0, Q1 = spec.period_projections
    assert np.linalg.norm(apply_transfer(xz, Q1) - Q0) < 1e-8
    assert np.linalg.norm(apply_transfer(xz, Q0) - Q1) < 1e-8


def test_pauli_primitive(pauli):
    spec = peripheral_structure(pauli)
    assert spec.flags["primitive"] and spec.period == 1
    r, t, rho = perron_data(pauli)
    assert r == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-10)
    assert spec.support_rank == 2


def test_perron_pair_residuals(rng):
    v = random_primitive_tuple(2, 3, rng)
    r, t, rho = perron_data(v)
    assert np.linalg.norm(apply_transfer(v, t) - r * t) < 1e-10
    assert np.linalg.norm(apply_transfer(v, rho, "L") - r * rho) < 1e-10
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > 0


@pytest.mark.parametrize("seed", range(6))
def test_find_intertwiner_roundtrip(seed):
    rng = np.random.default_rng(seed)
    v1 = random_primitive_tuple(2, 2, rng)
    Q, _ = np.linalg.qr(rng.standard_normal((2, 2))
                        + 1j * rng.standard_normal((2, 2)))
    c = np.exp(2j * np.pi * rng.uniform())
    v2 = MpsTuple(np.array([np.conj(c) * Q @ m @ Q.conj().T
                            for m in v1.matrices]))
    U, cg = find_intertwiner(v1, v2)
    res = max(np.linalg.norm(U @ m1 - cg * m2 @ U)
              for m1, m2 in zip(v1.matrices, v2.matrices))
    assert res < 1e-8
    assert abs(abs(cg) - 1) < 1e-10


def test_find_intertwiner_none_for_unrelated(rng):
    v1 = random_primitive_tuple(2, 2, rng)
    v2 = random_primitive_tuple(2, 2, rng)
    assert find_intertwiner(v1, v2) is None


def test_antiunitary_match_roundtrip(rng):
    """Plant omega_R = c J* rho^{-1/2} omega_L* rho^{1/2} J and recover it."""
    vL = random_primitive_tuple(2, 2, rng)
    _, _, rho = perron_data(vL)
    Q = hermitian_eig(rho).eigenvectors
    flipped = _antiunitary_flip(vL, rho, Q)
    V, _ = np.linalg.qr(rng.standard_normal((2, 2))
                        + 1j * rng.standard_normal((2, 2)))
    c = np.exp(2j * np.pi * rng.uniform())
    vR = MpsTuple(np.array([c * V.conj().T @ m @ V for m in flipped.matrices]))
    match = find_antiunitary_match(vL, vR, rho)
    assert match is not None and match.residual < 1e-8
    recon = match.apply(vL, rho)
    assert max(np.linalg.norm(a - b) for a, b in
               zip(recon.matrices, vR.matrices)) < 1e-8


def test_antiunitary_match_rejects_bad_rho(ghz, pauli):
    with pytest.raises(NotPrimitive):
        find_antiunitary_match(ghz, ghz, np.eye(2) / 2)
    with pytest.raises(SingularRho):
        find_antiunitary_match(pauli, pauli, np.diag([1.0, 0.0]))
