import numpy as np
import pytest

from gappedmps.errors import (DegenerateInteraction, DimensionMismatch,
                              InvalidTriple, NLessThanRange, NoGap)
from gappedmps.models import random_classa
from gappedmps.mps import ground_space_basis
from gappedmps.spinchain import (FcsTriple, assemble_hamiltonian,
                                 edge_expectation, fcs_evaluate, ground_data,
                                 interpolation_scan, ltqo_scan,
                                 parent_interaction, projector_distance)


def test_ghz_interaction_and_spectrum(ghz):
    h = parent_interaction(ghz, 2)
    assert int(round(np.trace(h.h).real)) == 2
    # oracle: the kernel is span{|00>, |11>}; h projects onto {|01>, |10>}
    assert h.h[1, 1] == pytest.approx(1.0) and h.h[2, 2] == pytest.approx(1.0)
    H = assemble_hamiltonian(h, 3)
    spec = ground_data(H, N=3)
    assert np.allclose(spec.eigenvalues, [0, 0, 1, 1, 1, 1, 2, 2], atol=1e-10)
    assert spec.kernel_dim == 2 and spec.gap == pytest.approx(1.0, abs=1e-10)


def test_hamiltonian_kron_oracle(pauli):
    """N = 3 assembly against the explicit Kronecker sum."""
    h = parent_interaction(pauli, 2)
    H = assemble_hamiltonian(h, 3)
    oracle = np.kron(h.h, np.eye(3)) + np.kron(np.eye(3), h.h)
    assert np.abs(H - oracle).max() < 1e-12


def test_assemble_errors(pauli):
    h = parent_interaction(pauli, 2)
    with pytest.raises(NLessThanRange):
        assemble_hamiltonian(h, 1)
    assert np.abs(assemble_hamiltonian(h, 2) - h.h).max() < 1e-12  # N = m


def test_degenerate_interaction(xz):
    # sigma_x, sigma_z are linearly independent, so length-1 words span C^2
    with pytest.raises(DegenerateInteraction):
        parent_interaction(xz, 1)


def test_no_gap():
    with pytest.raises(NoGap):
        ground_data(np.zeros((4, 4)))


def test_projector_distance():
    P = np.diag([1.0, 0.0])
    Q = np.diag([0.0, 1.0])
    op, overlap = projector_distance(P, P)
    assert op == pytest.approx(0.0, abs=1e-14)
    op, overlap = projector_distance(P, Q)
    assert op == pytest.approx(1.0, abs=1e-12)
    assert overlap == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        projector_distance(P, np.eye(3))


def test_kernel_equals_word_range(toy):
    """Frustration-freeness: ker H = Ran Gamma_N, dims from the level count."""
    B = toy.B
    h = parent_interaction(B, 2)
    for N in (3, 4, 5):
        spec = ground_data(assemble_hamiltonian(h, N), N=N)
        basis = ground_space_basis(B, N)
        assert spec.kernel_dim == basis.shape[1] == 2
        G2 = basis @ basis.conj().T
        op, _ = projector_distance(spec.ground_projector, G2)
        assert op < 1e-9


def test_edge_expectation_identity_and_ghz(ghz, toy):
    ee = edge_expectation(ghz, np.diag([1.0, 0.0]), range(3, 8))
    assert np.allclose(ee.values.real, 0.5, atol=1e-12)  # two ground words
    ee = edge_expectation(toy.B, np.eye(2), range(3, 8))
    assert np.allclose(ee.values.real, 1.0, atol=1e-12)
    assert ee.limit == pytest.approx(1.0, abs=1e-12)


def test_edge_expectation_decays(toy):
    E = np.zeros((4, 4))
    E[0, 0] = 1.0
    ee = edge_expectation(toy.B, E, range(4, 11))
    diffs = np.abs(np.diff(ee.values))
    assert all(diffs[i + 1] < diffs[i] for i in range(len(diffs) - 1))
    assert 0 < ee.ratio < 1


def test_ltqo_identity_skips_fit(toy):
    diag, rows = ltqo_scan(toy.B, [("I", np.eye(2))], 1, range(4, 9))
    assert all(r["error"] < 1e-12 for r in rows)
    assert diag.ltqo_s1 == 0.0
    assert diag.d1 == 2
    assert diag.support_floor > 0


def test_interpolation_same_kernel(toy):
    h0 = parent_interaction(toy.B, 2)
    h1 = parent_interaction(toy.B, 3)
    rows, report = interpolation_scan(h0, h1, np.linspace(0, 1, 5),
                                      range(4, 7))
    assert report["kernel_dim_constant"]
    assert report["gamma_star"] > 0
    # endpoints reproduce the plain spectra
    t0 = [r for r in rows if r["t"] == 0.0 and r["N"] == 4][0]
    spec0 = ground_data(assemble_hamiltonian(h0, 4), N=4)
    assert t0["lambda_min_nonzero"] == pytest.approx(spec0.gap, abs=1e-10)


def test_fcs_state_properties(pauli, rng):
    triple = FcsTriple(tuple=pauli, rho=np.eye(2) / 2)
    assert fcs_evaluate(triple, [np.eye(3)]) == pytest.approx(1.0, abs=1e-12)
    assert fcs_evaluate(triple, [np.eye(3)] * 3) == pytest.approx(1.0, abs=1e-12)
    # sigma-z pattern averages to zero by symmetry
    Z = np.diag([1.0, 0.0, -1.0])
    assert abs(fcs_evaluate(triple, [Z])) < 1e-12
    # positivity on a positive observable
    A = rng.standard_normal((3, 3))
    A = A @ A.T
    assert fcs_evaluate(triple, [A]).real > -1e-12
    # translation covariance: padding with identities changes nothing
    val = fcs_evaluate(triple, [A, np.eye(3)])
    assert abs(val - fcs_evaluate(triple, [np.eye(3), A])) < 1e-12


def test_fcs_left_right_agree(rng):
    """Left (dual) and right evaluation of the same bulk state coincide."""
    data = random_classa(rng, n=2, n0=2, kR=1, kL=1)
    from gappedmps.cpmaps import perron_data
    _, _, rho = perron_data(data.omega)
    right = FcsTriple(tuple=data.omega, rho=rho, direction="R")
    left = FcsTriple(tuple=data.omega, rho=rho, direction="L")
    units = [np.eye(2)[:, [i]] @ np.eye(2)[[j], :]
             for i in range(2) for j in range(2)]
    for A in units:
        for B in units:
            assert abs(fcs_evaluate(right, [A, B])
                       - fcs_evaluate(left, [A, B])) < 1e-10


def test_invalid_triple(pauli):
    with pytest.raises(InvalidTriple):
        FcsTriple(tuple=pauli, rho=np.diag([1.0, 0.0]))
    with pytest.raises(InvalidTriple):
        FcsTriple(tuple=pauli, rho=np.eye(2))  # trace 2
    triple = FcsTriple(tuple=pauli, rho=np.eye(2) / 2)
    with pytest.raises(InvalidTriple):
        fcs_evaluate(triple, [np.eye(4)])
