"""Deterministic dense complex linear algebra used by every other module.

All rank decisions in the repo flow through :func:`orthonormal_span` so the
relative threshold lives in exactly one place (``DEFAULT_RANK_TOL``).
Eigen-sorting and eigenvector phases follow fixed conventions so downstream
permutation/intertwiner outputs are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, EmptyInput, NotHermitian

DEFAULT_RANK_TOL = 1e-10
PHASE_FLOOR = 1e-8  # first entry above this modulus anchors the phase
MAX_DENSE_DIM = 16384


@dataclass(frozen=True)
class EigenData:
    """Eigendecomposition with residual bookkeeping.

    eigenvalues are sorted ascending by (real, imaginary) part; eigenvectors
    are the matched columns.  ``defective`` is set when the eigenvector matrix
    is numerically rank-deficient (no full eigenbasis).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    defective: bool = False


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each column so its first entry of modulus > PHASE_FLOOR is real > 0."""
    out = np.array(vecs, copy=True)
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > PHASE_FLOOR)
        if idx.size:
            pivot = col[idx[0]]
            out[:, j] = col * (abs(pivot) / pivot)
    return out


def hermitian_eig(A: np.ndarray, tol: float = 1e-12) -> EigenData:
    """Eigendecomposition of a Hermitian matrix.

    Raises NotHermitian if ``A`` deviates from its adjoint by more than
    ``tol`` relative to ``norm(A)``.  Real-symmetric input takes the real
    LAPACK path (twice as fast, needed for the larger chain Hamiltonians).
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DENSE_DIM:
        raise ConvergenceFailure(
            f"dimension {A.shape[0]} exceeds dense cap {MAX_DENSE_DIM}")
    scale = np.linalg.norm(A)
    herm_err = np.linalg.norm(A - A.conj().T)
    if herm_err > tol * max(scale, 1.0):
        raise NotHermitian(
            f"|A - A*| = {herm_err:.3e} exceeds {tol:.1e} * max(|A|, 1)")
    if np.iscomplexobj(A) and np.abs(A.imag).max(initial=0.0) == 0.0:
        work = np.ascontiguousarray(A.real)
    else:
        work = A
    vals, vecs = np.linalg.eigh(work)
    vecs = _fix_phases(vecs)
    recon = (vecs * vals) @ vecs.conj().T
    residual = float(np.linalg.norm(A - recon))
    return EigenData(vals, vecs, residual)


def general_eig(A: np.ndarray) -> EigenData:
    """All eigenvalues of a general square matrix with matched right eigenvectors.

    Sorted ascending by (Re, Im).  The ``defective`` flag is set when the
    eigenvector matrix has numerical rank < D (e.g. nilpotent input).
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConvergenceFailure(f"expected a square matrix, got shape {A.shape}")
    try:
        vals, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    order = np.lexsort((vals.imag, vals.real))
    vals, vecs = vals[order], vecs[:, order]
    vecs = _fix_phases(vecs)
    scale = max(np.linalg.norm(A), 1.0)
    residual = 0.0
    for j in range(len(vals)):
        residual = max(residual, float(np.linalg.norm(A @ vecs[:, j] - vals[j] * vecs[:, j])))
    svals = np.linalg.svd(vecs, compute_uv=False)
    defective = bool(svals[-1] <= DEFAULT_RANK_TOL * svals[0]) if svals[0] > 0 else True
    return EigenData(vals, vecs, residual / scale, defective)


def orthonormal_span(vectors, tol: float = DEFAULT_RANK_TOL):
    """Orthonormal basis of the span of the given vectors.

    Returns ``(rank, basis)`` where basis columns are orthonormal.  Singular
    values below ``tol * s_max`` are discarded.
    """
    vecs = [np.asarray(x, dtype=complex).ravel() for x in vectors]
    if not vecs:
        raise EmptyInput("no vectors given")
    lengths = {v.size for v in vecs}
    if len(lengths) != 1:
        raise EmptyInput(f"vectors of mixed lengths {sorted(lengths)}")
    M = np.column_stack(vecs)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, np.zeros((M.shape[0], 0), dtype=complex)
    rank = int(np.count_nonzero(s > tol * s[0]))
    return rank, U[:, :rank]


def matrix_span(matrices, tol: float = DEFAULT_RANK_TOL):
    """orthonormal_span for matrices under the Frobenius inner product.

    Returns (rank, list of orthonormal matrices, smallest retained singular value).
    """
    mats = [np.asarray(m, dtype=complex) for m in matrices]
    if not mats:
        raise EmptyInput("no matrices given")
    shape = mats[0].shape
    rank, basis = orthonormal_span([m.ravel() for m in mats], tol)
    out = [basis[:, j].reshape(shape) for j in range(rank)]
    M = np.column_stack([m.ravel() for m in mats])
    s = np.linalg.svd(M, compute_uv=False)
    smallest = float(s[rank - 1]) if rank else 0.0
    return rank, out, smallest
