"""MPS tensors, word maps and kernel spaces.

An :class:`MpsTuple` is an n-tuple of D x D complex matrices (v_1, ..., v_n).
Length-l words v_{mu_1} ... v_{mu_l} define

* the transfer map  T(X) = sum_mu  v_mu X v_mu*,
* the coefficient map  Gamma_l(X)[word] = Tr(X * word-product-adjoint),
* the kernel space  K_l(v) = span of all length-l word products.

Direction "L" reverses the word order (the product is taken right-to-left)
while keeping the word index itself big-endian: site 0 is always the slowest
index of (C^n)^{tensor l}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_RANK_TOL, matrix_span, orthonormal_span

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class MpsTuple:
    """Immutable n-tuple of D x D complex matrices."""

    matrices: np.ndarray  # shape (n, D, D)

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatch(f"expected shape (n, D, D), got {mats.shape}")
        if mats.shape[0] < 1:
            raise DimensionMismatch("need at least one matrix")
        if not np.all(np.isfinite(mats.view(float))):
            raise DimensionMismatch("non-finite entries")
        mats = mats.copy()
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def D(self) -> int:
        return self.matrices.shape[1]

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        """True when sum_mu v_mu v_mu* = 1 within tol."""
        gram = np.einsum("mij,mkj->ik", self.matrices, self.matrices.conj())
        return bool(np.linalg.norm(gram - np.eye(self.D)) <= tol)

    def __iter__(self):
        return iter(self.matrices)


@dataclass(frozen=True)
class KernelSpaceBasis:
    """Orthonormal (Frobenius) basis of K_l(v)."""

    l: int
    dim: int
    basis: list = field(repr=False)  # list of D x D matrices
    word_gram_condition: float = 0.0


def transfer_matrix(v: MpsTuple, direction: str = "R") -> np.ndarray:
    """Matrix of the transfer map on vectorized (row-major) D x D operators.

    R: X -> sum v_mu X v_mu*;  L: the adjoint-side analogue X -> sum v_mu* X v_mu.
    """
    mats = v.matrices
    if direction == "R":
        return sum(np.kron(m, m.conj()) for m in mats)
    if direction == "L":
        return sum(np.kron(m.conj().T, m.T) for m in mats)
    raise ValueError(f"direction must be 'L' or 'R', got {direction!r}")


def apply_transfer(v: MpsTuple, X: np.ndarray, direction: str = "R") -> np.ndarray:
    """T(X) without materializing the D^2 x D^2 matrix."""
    mats = v.matrices
    if direction == "R":
        return np.einsum("mij,jk,mlk->il", mats, X, mats.conj())
    if direction == "L":
        return np.einsum("mji,jk,mkl->il", mats.conj(), X, mats)
    raise ValueError(f"direction must be 'L' or 'R', got {direction!r}")


def word_products(v: MpsTuple, l: int, direction: str = "R") -> np.ndarray:
    """All length-l word products, shape (n^l, D, D), word index big-endian.

    Entry [w] is v_{mu_1}...v_{mu_l} for direction R and the reversed product
    v_{mu_l}...v_{mu_1} for direction L, where w = (mu_1, ..., mu_l) with
    mu_1 the slowest digit.
    """
    if l < 1:
        raise DimensionMismatch("word length must be >= 1")
    mats = v.matrices
    n, D = v.n, v.D
    W = mats.copy()
    for _ in range(l - 1):
        if direction == "R":
            # prepend a site: new word (mu, w), product v_mu @ existing
            W = np.einsum("aij,wjk->awik", mats, W).reshape(-1, D, D)
        elif direction == "L":
            # prepend a site: reversed product puts v_mu on the right
            W = np.einsum("wij,ajk->awik", W, mats).reshape(-1, D, D)
        else:
            raise ValueError(f"direction must be 'L' or 'R', got {direction!r}")
    return W


def gamma_map(v: MpsTuple, l: int, X: np.ndarray, direction: str = "R") -> np.ndarray:
    """Coefficient vector (Tr(X w*))_w over all length-l words, in (C^n)^{tensor l}."""
    X = np.asarray(X, dtype=complex)
    if X.shape != (v.D, v.D):
        raise DimensionMismatch(f"X must be {v.D}x{v.D}, got {X.shape}")
    W = word_products(v, l, direction)
    # Tr(X w*) = sum_ij X_ij conj(w_ij)
    return np.einsum("ij,wij->w", X, W.conj())


def kernel_space(v: MpsTuple, l: int, tol: float = DEFAULT_RANK_TOL) -> KernelSpaceBasis:
    """Orthonormal basis of K_l(v) built iteratively (never touches n^l words)."""
    if l < 1:
        raise DimensionMismatch("word length must be >= 1")
    rank, basis, cond = matrix_span(list(v.matrices), tol)
    for _ in range(l - 1):
        products = [m @ b for m in v.matrices for b in basis]
        rank, basis, cond = matrix_span(products, tol)
    return KernelSpaceBasis(l=l, dim=rank, basis=basis, word_gram_condition=cond)


def support_projection(v: MpsTuple, l: int, direction: str = "R",
                       tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projection onto span{Gamma_l(E_ij)} inside (C^n)^{tensor l}.

    Since Gamma_l(E_ij)[w] = conj(w_ij), the image span is the column space of
    the conjugated word stack reshaped to (n^l, D^2).
    """
    W = word_products(v, l, direction)
    G = W.conj().reshape(W.shape[0], -1)
    rank, basis = orthonormal_span([G[:, j] for j in range(G.shape[1])], tol)
    if rank == 0:
        return np.zeros((W.shape[0], W.shape[0]), dtype=complex)
    return basis @ basis.conj().T


def ground_space_basis(v: MpsTuple, N: int, direction: str = "R",
                       tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of Ran Gamma_N, the MPS ground space."""
    W = word_products(v, N, direction)
    G = W.conj().reshape(W.shape[0], -1)
    rank, basis = orthonormal_span([G[:, j] for j in range(G.shape[1])], tol)
    return basis[:, :rank]
