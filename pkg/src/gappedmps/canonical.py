"""Canonicalization pipeline and structured-tensor assembly.

A graded tuple (block lower-triangular over chain levels, diagonal blocks
lambda_a * omega) carries a distinguished dual basis of its kernel spaces.
Solving a family of matrix functional equations turns the tuple, level by
level, into the structured form

    B_mu = omega_mu (x) Lam(1+Y)  +  right/left ladder corrections,

with nilpotent ladder matrices D_a, G_b.  This module implements:

* the dual kernel-space basis and the measured stabilization length l0,
* the functional-equation solver (key_solve) and the triangular
  reduction steps,
* extraction of (Y, D_a, x) and the modulus-ordering permutation,
* assembly of the two-sided tensor B and its kernel-space validation,
* the combinatorial utilities (sieve coefficients, binomial convolution).

Grading convention: the graded space C^{n0} (x) C^{k+1} is stored with the
level as the *slow* axis: basis index = a*n0 + alpha, and "x (x) L" is
realized as np.kron(L, x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .chain import (InvariantChain, align_to_primitive, build_chain,
                    corner_rescale)
from .cpmaps import peripheral_structure
from .errors import (ConditionViolated, DecompositionFail, Inconsistent,
                     InvalidLambda, NotClassA, NotInjective, OutOfRange,
                     SingularSystem, StructureViolation)
from .linalg import hermitian_eig
from .mps import MpsTuple, kernel_space

L0_CAP = 24
GRAM_COND_TOL = 1e-8
RESIDUAL_TOL = 1e-9


def level_kron(L: np.ndarray, x: np.ndarray) -> np.ndarray:
    """x tensor L with the level factor L on the slow axis."""
    return np.kron(L, x)


def _block(M: np.ndarray, a: int, b: int, n0: int) -> np.ndarray:
    return M[a * n0:(a + 1) * n0, b * n0:(b + 1) * n0]


# ---------------------------------------------------------------------------
# septuplet / dual basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Septuplet:
    """Graded tuple with its kernel-space dual basis.

    ``y[l]`` has shape (k+1, n0, n0, D, D) with D = n0*(k+1); ``level`` is
    the reduction depth reached (how many sub-diagonals of y_0 have been
    cleared below the structured part).
    """

    n0: int
    k: int
    omega: MpsTuple
    v: MpsTuple
    lam: np.ndarray
    l0: int
    y: dict = field(repr=False)
    h: np.ndarray = field(default=None, repr=False)
    Y: np.ndarray = field(default=None, repr=False)
    level: int = 0

    @property
    def D(self) -> int:
        return self.n0 * (self.k + 1)


def _build_gram(basis, n0: int, k: int) -> np.ndarray:
    """Pairings of kernel-basis elements with the defining matrix elements.

    Row index t = (a*n0 + alpha)*n0 + beta; entry = kappa[a*n0+alpha, beta]
    (the matrix element between the graded vectors g^(a)_alpha and g^(0)_beta).
    """
    m = n0 * n0 * (k + 1)
    M = np.empty((m, len(basis)), dtype=complex)
    for i, kap in enumerate(basis):
        rows = kap[:, :n0]                      # columns on the level-0 block
        M[:, i] = rows.reshape(-1)              # index (a*n0+alpha)*n0 + beta
    return M


def dual_basis(v: MpsTuple, n0: int, k: int, l: int,
               cond_tol: float = GRAM_COND_TOL) -> np.ndarray:
    """The unique y-family in K_l(v) with prescribed level-0 matrix elements.

    y[a, alpha, beta] is the element of K_l whose matrix element between the
    graded basis vectors (a', alpha') and (0, beta') is the delta pattern;
    equivalently y * (1 (x) E00) = |g^(a)_alpha><g^(0)_beta|.

    Raises NotInjective when dim K_l != n0^2 (k+1) or the defining linear
    system is ill-conditioned (the injectivity gate).
    """
    m = n0 * n0 * (k + 1)
    ks = kernel_space(v, l)
    if ks.dim != m:
        raise NotInjective(f"dim K_{l} = {ks.dim}, expected {m}")
    M = _build_gram(ks.basis, n0, k)
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= cond_tol * s[0]:
        raise NotInjective(f"dual system singular at l={l} "
                           f"(condition {s[-1] / s[0]:.3e})")
    C = np.linalg.solve(M, np.eye(m, dtype=complex))
    K = np.stack(ks.basis)                       # (m, D, D)
    y = np.einsum("it,ixy->txy", C, K)
    D = v.D
    return y.reshape(k + 1, n0, n0, D, D)


def measure_l0(v: MpsTuple, n0: int, k: int, cap: int = L0_CAP) -> int:
    """Smallest l with stabilized kernel dimension and injective dual system."""
    m = n0 * n0 * (k + 1)
    for l in range(1, cap + 1):
        ks = kernel_space(v, l)
        if ks.dim != m:
            continue
        M = _build_gram(ks.basis, n0, k)
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] > GRAM_COND_TOL * s[0]:
            return l
    raise NotInjective(f"no injective length found up to l = {cap}")


def to_condition5(chain: InvariantChain, window_extra: int = 2) -> Septuplet:
    """Transform an aligned chain into graded coordinates.

    The similarity stacks (V_a* t_a^{-1/2}) level blocks; in the new basis
    the tuple is block lower triangular with diagonal blocks lambda_a omega,
    lambda_a = r_a^{1/2} c_a.
    """
    if chain.unitaries is None:
        raise StructureViolation("chain must be aligned (align_to_primitive)")
    v, k = chain.v, chain.k
    n0 = chain.base.D
    rows, cols = [], []
    for a in range(k + 1):
        t = (chain.perron[a] + chain.perron[a].conj().T) / 2
        eig = hermitian_eig(t)
        th = eig.eigenvectors @ np.diag(np.sqrt(eig.eigenvalues)) @ eig.eigenvectors.conj().T
        thi = np.linalg.inv(th)
        Va = chain.unitaries[a]
        Lb = chain.level_bases[a]
        rows.append(Va.conj().T @ thi @ Lb.conj().T)
        cols.append(Lb @ th @ Va)
    W = np.vstack(rows)
    Winv = np.hstack(cols)
    w = MpsTuple(np.array([W @ m @ Winv for m in v.matrices]))
    lam = np.array([np.sqrt(chain.radii[a]) * chain.phases[a] for a in range(k + 1)])
    if abs(lam[0] - 1) > 1e-6:
        raise ConditionViolated(f"level-0 scale {lam[0]} != 1")
    lam[0] = 1.0
    for a in range(1, k + 1):
        if not 0 < abs(lam[a]) < 1:
            raise InvalidLambda(f"|lambda_{a}| = {abs(lam[a]):.6f} not in (0,1)")
    scale = max(np.linalg.norm(m) for m in w.matrices)
    omega = chain.base
    for a in range(k + 1):
        for b in range(k + 1):
            for mu in range(v.n):
                blk = _block(w.matrices[mu], a, b, n0)
                if b > a and np.linalg.norm(blk) > RESIDUAL_TOL * scale * 10:
                    raise ConditionViolated(
                        f"upper block ({a},{b}) nonzero: {np.linalg.norm(blk):.3e}")
                if b == a:
                    res = np.linalg.norm(blk - lam[a] * omega.matrices[mu])
                    if res > RESIDUAL_TOL * scale * 10:
                        raise ConditionViolated(
                            f"diagonal block {a} mismatch: {res:.3e}")
    l0 = measure_l0(w, n0, k)
    window = range(l0, l0 + k + window_extra + 1)
    y = {l: dual_basis(w, n0, k, l) for l in window}
    return Septuplet(n0=n0, k=k, omega=omega, v=w, lam=lam, l0=l0, y=y,
                     h=np.ones(k + 1), Y=np.zeros((k + 1, k + 1), dtype=complex),
                     level=0)


def condition6_residual(sept: Septuplet, level: int) -> float:
    """Max deviation of y_0 from the structured part on sub-diagonals <= level."""
    k, n0 = sept.k, sept.n0
    Lt = np.diag(sept.lam) @ (np.eye(k + 1) + sept.Y)
    worst = 0.0
    for l, y in sept.y.items():
        Ll = np.linalg.matrix_power(Lt, l)
        for alpha in range(n0):
            for beta in range(n0):
                e = np.zeros((n0, n0))
                e[alpha, beta] = 1.0
                delta = y[0, alpha, beta] - level_kron(Ll, e)
                for j in range(k + 1):
                    for jp in range(max(0, j - level), j + 1):
                        worst = max(worst, float(np.linalg.norm(
                            _block(delta, j, jp, n0))))
    return worst


# ---------------------------------------------------------------------------
# the functional-equation solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KeySolution:
    J: np.ndarray
    c: complex
    residual: float


def _check_cocycle(x: dict, lam: complex, n0: int, tol: float) -> None:
    ls = sorted(x)
    scale = max(max(np.linalg.norm(x[l][a, b]) for a in range(n0)
                    for b in range(n0)) for l in ls)
    scale = max(scale, 1.0)
    for l1 in ls:
        for l2 in ls:
            if l1 + l2 not in x:
                continue
            for a1 in range(n0):
                for b1 in range(n0):
                    for a2 in range(n0):
                        for b2 in range(n0):
                            e = np.zeros((n0, n0))
                            e[a2, b2] = 1.0
                            e1 = np.zeros((n0, n0))
                            e1[a1, b1] = 1.0
                            lhs = x[l1][a1, b1] @ e + lam ** (-l1) * e1 @ x[l2][a2, b2]
                            rhs = (x[l1 + l2][a1, b2] if b1 == a2
                                   else np.zeros((n0, n0)))
                            if np.linalg.norm(lhs - rhs) > tol * scale:
                                raise Inconsistent(
                                    f"cocycle fails at l=({l1},{l2}), "
                                    f"indices ({a1},{b1},{a2},{b2})")


def key_solve(x: dict, lam: complex, l0: int, tol: float = 1e-8) -> KeySolution:
    """Solve the graded functional equation for the family x^(l).

    ``x`` maps word lengths l >= l0 to arrays of shape (n0, n0, n0, n0),
    where x[l][alpha, beta] is an n0 x n0 matrix.  The family must satisfy

        x^(l1)_{a1 b1} e_{a2 b2} + lam^{-l1} e_{a1 b1} x^(l2)_{a2 b2}
            = delta_{b1 a2} x^(l1+l2)_{a1 b2}.

    Returns J (and c for the lam = 1 branch) with

        x^(l) = J e - lam^{-l} e J            (lam != 1)
        x^(l) = J e - e J + c l e             (lam == 1, J traceless).
    """
    if l0 not in x:
        raise Inconsistent(f"family must contain the base length {l0}")
    n0 = x[l0].shape[0]
    lam = complex(lam)
    if lam == 0:
        raise Inconsistent("lambda must be nonzero")
    _check_cocycle(x, lam, n0, tol)

    # off-diagonal part, common to both branches
    F = [sum((x[l0][a, a] for a in range(n0) if a != b),
             np.zeros((n0, n0), dtype=complex)) for b in range(n0)]
    Jt = np.zeros((n0, n0), dtype=complex)
    for b in range(n0):
        e = np.zeros((n0, n0))
        e[b, b] = 1.0
        Jt += e @ F[b] @ (np.eye(n0) - e)

    def Cdiag(l, a, b):
        return x[l][a, b][a, b]

    if abs(lam - 1) < 1e-10:
        if l0 + 1 not in x:
            raise Inconsistent("lambda = 1 branch needs lengths l0 and l0+1")
        c = Cdiag(l0 + 1, 0, 0) - Cdiag(l0, 0, 0)
        J = Jt + np.diag([Cdiag(l0, a, 0) for a in range(n0)])
        J = J - np.trace(J) / n0 * np.eye(n0)   # commutator gauge: traceless

        def model(l, a, b):
            e = np.zeros((n0, n0))
            e[a, b] = 1.0
            return J @ e - e @ J + c * l * e
    else:
        candidates = [l for l in x if abs(lam ** (-l) - 1) > 1e-8]
        if not candidates:
            raise Inconsistent("no available length with lambda^l != 1")
        l0p = max(candidates, key=lambda l: abs(lam ** (-l) - 1))
        d = lam ** (-l0p) / (1 - lam ** (-l0p)) * Cdiag(l0p, 0, 0)
        J = Jt + np.diag([Cdiag(l0p, a, 0) + d for a in range(n0)])
        c = 0.0

        def model(l, a, b):
            e = np.zeros((n0, n0))
            e[a, b] = 1.0
            return J @ e - lam ** (-l) * e @ J

    residual = 0.0
    for l in x:
        for a in range(n0):
            for b in range(n0):
                residual = max(residual, float(
                    np.linalg.norm(x[l][a, b] - model(l, a, b))))
    return KeySolution(J=J, c=complex(c), residual=residual)


# ---------------------------------------------------------------------------
# reduction and extraction
# ---------------------------------------------------------------------------

def reduction_step(sept: Septuplet, tol: float = 1e-8):
    """Clear the (level+1)-th sub-diagonal of y_0 by a triangular similarity.

    Returns (R, Y_increment, new septuplet).  The dual basis is recomputed in
    the new gauge (it is the unique family with the defining property, so
    recomputation and transport agree).
    """
    i, k, n0 = sept.level, sept.k, sept.n0
    if i >= k:
        raise ConditionViolated("already fully reduced")
    lam = sept.lam
    Lt = np.diag(lam) @ (np.eye(k + 1) + sept.Y)
    Jlist = {}
    clist = {}
    for j in range(i + 1, k + 1):
        fam = {}
        for l, y in sept.y.items():
            xs = np.empty((n0, n0, n0, n0), dtype=complex)
            Ll = np.linalg.matrix_power(Lt, l)
            for alpha in range(n0):
                for beta in range(n0):
                    e = np.zeros((n0, n0))
                    e[alpha, beta] = 1.0
                    delta = y[0, alpha, beta] - level_kron(Ll, e)
                    xs[alpha, beta] = _block(delta, j, j - (i + 1), n0)
            fam[l] = xs
        jm = j - (i + 1)
        scaled = {l: lam[jm] ** (-l) * xs for l, xs in fam.items()}
        ratio = lam[jm] / lam[j]
        sol = key_solve(scaled, ratio, sept.l0, tol)
        if sol.residual > tol * 10:
            raise ConditionViolated(
                f"functional equation residual {sol.residual:.3e} at block {j}")
        Jlist[j] = sol.J
        clist[j] = sol.c if abs(lam[j] - lam[jm]) < 1e-10 else 0.0
    if np.linalg.norm(Jlist[i + 1]) > tol * 100:
        raise ConditionViolated(
            f"column-0 block forces J_{i+1} = 0, got norm "
            f"{np.linalg.norm(Jlist[i + 1]):.3e}")
    Jlist[i + 1] = np.zeros((n0, n0), dtype=complex)

    D = sept.D
    R = np.eye(D, dtype=complex)
    for j in range(i + 1, k + 1):
        E = np.zeros((k + 1, k + 1))
        E[j, j - (i + 1)] = 1.0
        R -= level_kron(E, Jlist[j])
    Rinv = np.linalg.inv(R)
    Yinc = np.zeros((k + 1, k + 1), dtype=complex)
    for j in range(i + 1, k + 1):
        if abs(lam[j] - lam[j - (i + 1)]) < 1e-10:
            Yinc[j, j - (i + 1)] = clist[j]
    w = MpsTuple(np.array([R @ m @ Rinv for m in sept.v.matrices]))
    ynew = {l: dual_basis(w, n0, k, l) for l in sept.y}
    out = replace(sept, v=w, y=ynew, Y=sept.Y + Yinc, level=i + 1)
    res = condition6_residual(out, i + 1)
    if res > tol * 100:
        raise ConditionViolated(
            f"membership test fails after step {i}: residual {res:.3e}")
    return R, Yinc, out


@dataclass(frozen=True)
class ExtractResult:
    Y: np.ndarray
    D: list            # ladder matrices on the level space, strictly lower
    x: np.ndarray      # (n, k, n0, n0) correction coefficients
    h: np.ndarray      # diagonal weights (ones in this gauge)
    residual: float


def extract_structure(sept: Septuplet, tol: float = 1e-8) -> ExtractResult:
    """Read off (Y, D_a, x) from a fully reduced septuplet.

    In the final gauge y_0^(l) = e (x) (Lam(1+Y))^l and
    y_a^(l) = e (x) D_a (Lam(1+Y))^l; the tuple decomposes as
    v_mu = omega_mu (x) LamTilde + sum_a x_{mu a} (x) D_a LamTilde.
    """
    k, n0 = sept.k, sept.n0
    if sept.level < k:
        raise ConditionViolated(f"septuplet only reduced to level {sept.level}")
    lam = sept.lam
    Lt = np.diag(lam) @ (np.eye(k + 1) + sept.Y)
    res0 = condition6_residual(sept, k)
    Ds = []
    worst = res0
    for a in range(1, k + 1):
        extracted = None
        for l, y in sept.y.items():
            Lli = np.linalg.inv(np.linalg.matrix_power(Lt, l))
            for alpha in range(n0):
                for beta in range(n0):
                    big = y[a, alpha, beta]
                    L = big[alpha::n0, beta::n0]      # level-factor slice
                    Da = L @ Lli
                    if extracted is None:
                        extracted = Da
                    else:
                        worst = max(worst, float(np.linalg.norm(Da - extracted)))
                    # off-pattern entries of y_a must vanish
                    if n0 > 1:
                        sub = big.reshape(k + 1, n0, k + 1, n0).copy()
                        sub[:, alpha, :, beta] = 0.0
                        worst = max(worst, float(np.abs(sub).max()))
        Ds.append(extracted)
    # ladder relations
    for a, Da in enumerate(Ds, start=1):
        worst = max(worst, float(np.linalg.norm(np.triu(Da))))
        col0 = np.zeros(k + 1)
        col0[a] = 1.0
        worst = max(worst, float(np.linalg.norm(Da[:, 0] - col0)))
        worst = max(worst, float(np.linalg.norm(
            np.diag(lam) @ Da - lam[a] * Da @ np.diag(lam))))
    if worst > tol:
        raise DecompositionFail(f"ladder-structure residual {worst:.3e}")

    # unique decomposition of the tuple itself
    n = sept.v.n
    xcoef = np.zeros((n, k, n0, n0), dtype=complex)
    A = np.column_stack([(Da @ Lt).reshape(-1) for Da in Ds]) if k else None
    viii = 0.0
    for mu in range(n):
        delta = sept.v.matrices[mu] - level_kron(Lt, sept.omega.matrices[mu])
        T = delta.reshape(k + 1, n0, k + 1, n0).transpose(0, 2, 1, 3)
        Tm = T.reshape((k + 1) ** 2, n0 * n0)
        if k:
            sol, *_ = np.linalg.lstsq(A, Tm, rcond=None)
            xcoef[mu] = sol.reshape(k, n0, n0)
            viii = max(viii, float(np.linalg.norm(A @ sol - Tm)))
        else:
            viii = max(viii, float(np.linalg.norm(Tm)))
    if viii > tol:
        raise DecompositionFail(f"tuple decomposition residual {viii:.3e}")
    return ExtractResult(Y=sept.Y.copy(), D=Ds, x=xcoef,
                         h=np.ones(k + 1), residual=max(worst, viii))


def weyl_reorder(lam: np.ndarray, mats: list, Y: np.ndarray):
    """Sort the grading by descending modulus (ties: descending argument).

    Index 0 (the unit scale) stays first; the permutation is stable within
    equal values.  Returns (lam', mats', Y', U) with U the permutation matrix;
    conjugated matrices provably stay strictly triangular (re-checked here).
    """
    lam = np.asarray(lam, dtype=complex)
    k = len(lam) - 1

    def key(a):
        arg = float(np.angle(lam[a])) % (2 * np.pi)
        return (-abs(lam[a]), -arg)

    perm = [0] + sorted(range(1, k + 1), key=key)
    U = np.zeros((k + 1, k + 1))
    for new, old in enumerate(perm):
        U[old, new] = 1.0    # <f_old, U f_new> picks the relabeling
    lam_new = lam[perm]
    # mats are labeled by their scale: relabel and conjugate
    inv = {old: new for new, old in enumerate(perm)}
    mats_new = [None] * len(mats)
    for a, M in enumerate(mats, start=1):
        mats_new[inv[a] - 1] = U.T @ M @ U
    Y_new = U.T @ Y @ U
    for M in list(mats_new) + [Y_new]:
        if np.linalg.norm(np.triu(M)) > 1e-10 * max(np.linalg.norm(M), 1.0):
            raise StructureViolation("reordering broke strict triangularity")
    return lam_new, mats_new, Y_new, U


# ---------------------------------------------------------------------------
# half-pipeline driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalHalf:
    """Fully reduced one-sided data in level coordinates (D_a strictly lower)."""

    n0: int
    k: int
    omega: MpsTuple
    lam: np.ndarray
    D: list
    Y: np.ndarray
    x: np.ndarray       # (n, k, n0, n0)
    l0: int


def canonical_half(v: MpsTuple, seed: int = 0) -> CanonicalHalf:
    """chain -> rescale -> align -> graded coordinates -> reductions -> extraction."""
    ch = build_chain(v, seed=seed)
    ch = corner_rescale(ch)
    ch = align_to_primitive(ch)
    sept = to_condition5(ch)
    for _ in range(sept.k):
        _, _, sept = reduction_step(sept)
    ext = extract_structure(sept)
    if sept.k:
        lam, Ds, Y, U = weyl_reorder(sept.lam, ext.D, ext.Y)
        perm = [int(np.argmax(U[:, q])) for q in range(sept.k + 1)]
        x = ext.x[:, [p - 1 for p in perm[1:]], :, :]
    else:
        lam, Ds, Y, x = sept.lam, [], ext.Y, ext.x
    return CanonicalHalf(n0=sept.n0, k=sept.k, omega=sept.omega, lam=lam,
                         D=Ds, Y=Y, x=x, l0=sept.l0)


# ---------------------------------------------------------------------------
# two-sided assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassAData:
    """Two-sided structured tensor and its generating data.

    Index set {-kR, ..., 0, ..., kL}; position q = i + kR in arrays.
    D[a-1] (a = 1..kR) and G[b-1] (b = 1..kL) are embedded in the full
    (kR+kL+1)-dimensional level space.
    """

    n: int
    n0: int
    kR: int
    kL: int
    lam: np.ndarray           # length kR+kL+1, position-indexed
    D: list
    G: list
    Y: np.ndarray
    omega: MpsTuple
    xR: np.ndarray            # (n, kR, n0, n0)
    xL: np.ndarray            # (n, kL, n0, n0)
    B: MpsTuple = None
    l0: int = 0

    @property
    def K(self) -> int:
        return self.kR + self.kL + 1

    def pos(self, i: int) -> int:
        return i + self.kR

    def lam_at(self, i: int) -> complex:
        return complex(self.lam[self.pos(i)])

    def structured_factor(self) -> np.ndarray:
        """Lam(1+Y) on the level space."""
        return np.diag(self.lam) @ (np.eye(self.K) + self.Y)


def _embed_right(M: np.ndarray, kR: int, K: int) -> np.ndarray:
    """Level-coordinate matrix (levels 0..kR) into positions kR-a (index flip)."""
    out = np.zeros((K, K), dtype=complex)
    for li in range(kR + 1):
        for lj in range(kR + 1):
            out[kR - li, kR - lj] = M[li, lj]
    return out


def _embed_left(M: np.ndarray, kR: int, kL: int, K: int) -> np.ndarray:
    """Level-coordinate matrix (levels 0..kL) into positions kR..kR+kL."""
    out = np.zeros((K, K), dtype=complex)
    out[kR:kR + kL + 1, kR:kR + kL + 1] = M
    return out


def assemble_classa(right: CanonicalHalf, left: CanonicalHalf,
                    match: np.ndarray | None = None,
                    l0: int | None = None) -> ClassAData:
    """Build the two-sided tensor from one-sided canonical data.

    ``left`` is the canonical half of the *adjoint* of the left block; the
    star flip (G_b = D_b^*, Y_L = Y^*, lambda^L = conj(lambda)) happens here.
    ``match`` is the invertible base intertwiner M with
    M (left.omega_mu)^* M^{-1} = right.omega_mu; identity when omitted.
    """
    n0, n = right.n0, right.omega.n
    if left.n0 != n0 or left.omega.n != n:
        raise StructureViolation("halves have incompatible dimensions")
    kR, kL = right.k, left.k
    K = kR + kL + 1
    lam = np.empty(K, dtype=complex)
    for a in range(kR + 1):
        lam[kR - a] = right.lam[a]
    for b in range(kL + 1):
        lam[kR + b] = np.conj(left.lam[b])
    if abs(lam[kR] - 1) > 1e-10:
        raise InvalidLambda("unit scale missing at index 0")
    lam[kR] = 1.0
    for q in range(K):
        if q != kR and not 0 < abs(lam[q]) < 1:
            raise InvalidLambda(f"|lambda| = {abs(lam[q]):.6f} at position {q}")

    omega = right.omega
    M = np.eye(n0, dtype=complex) if match is None else np.asarray(match, dtype=complex)
    Minv = np.linalg.inv(M)
    base_res = max(np.linalg.norm(M @ wl.conj().T @ Minv - wr)
                   for wl, wr in zip(left.omega.matrices, omega.matrices))
    if base_res > 1e-8:
        raise StructureViolation(f"base tuples do not match (residual {base_res:.3e})")

    Ds = [_embed_right(Da, kR, K) for Da in right.D]
    Gs = [_embed_left(Db.conj().T, kR, kL, K) for Db in left.D]
    Y = (_embed_right(right.Y, kR, K)
         + _embed_left(left.Y.conj().T, kR, kL, K))
    xR = right.x
    xL = np.zeros((n, kL, n0, n0), dtype=complex)
    for mu in range(n):
        for b in range(kL):
            xL[mu, b] = M @ left.x[mu, b].conj().T @ Minv

    data = ClassAData(n=n, n0=n0, kR=kR, kL=kL, lam=lam, D=Ds, G=Gs, Y=Y,
                      omega=omega, xR=xR, xL=xL,
                      l0=l0 if l0 is not None else max(right.l0, left.l0))
    B = assemble_tensor(data)
    data = replace(data, B=B)
    check_structure(data)
    return data


def assemble_tensor(data: ClassAData) -> MpsTuple:
    """B_mu = omega_mu (x) Lam(1+Y) + left/right ladder corrections."""
    Lc = data.structured_factor()
    mats = []
    for mu in range(data.n):
        B = level_kron(Lc, data.omega.matrices[mu])
        for b in range(data.kL):
            B += level_kron(Lc @ data.G[b], data.xL[mu, b])
        for a in range(data.kR):
            B += level_kron(data.D[a] @ Lc, data.xR[mu, a])
        mats.append(B)
    return MpsTuple(np.array(mats))


def check_structure(data: ClassAData, tol: float = 1e-10) -> None:
    """All structural invariants of the two-sided data; raises on failure."""
    K, kR, kL = data.K, data.kR, data.kL
    lam = data.lam
    mods = np.abs(lam)
    if abs(mods[kR] - 1) > tol:
        raise InvalidLambda("|lambda_0| != 1")
    right_mods = mods[:kR + 1][::-1]     # |lambda_0|, |lambda_-1|, ...
    left_mods = mods[kR:]
    for seq in (right_mods, left_mods):
        if len(seq) > 1 and not (seq[0] > seq[1] - tol):
            raise InvalidLambda("unit scale not strictly dominant")
        if any(seq[i] < seq[i + 1] - tol for i in range(1, len(seq) - 1)):
            raise InvalidLambda("moduli not ordered outward")
    Lam = np.diag(lam)
    if np.linalg.norm(Lam @ data.Y - data.Y @ Lam) > tol:
        raise StructureViolation("[Lam, Y] != 0")
    if np.linalg.norm(np.tril(data.Y)) > tol:
        raise StructureViolation("Y not strictly upper triangular")
    for a, Da in enumerate(data.D, start=1):
        if np.linalg.norm(Lam @ Da - data.lam_at(-a) * Da @ Lam) > tol:
            raise StructureViolation(f"ladder relation fails for D_{a}")
        target = np.zeros(K)
        target[data.pos(-a)] = 1.0
        if np.linalg.norm(Da[:, data.pos(0)] - target) > tol:
            raise StructureViolation(f"D_{a} column-0 action wrong")
    for b, Gb in enumerate(data.G, start=1):
        if np.linalg.norm(Lam @ Gb - Gb @ Lam / data.lam_at(b)) > tol:
            raise StructureViolation(f"ladder relation fails for G_{b}")
        target = np.zeros(K)
        target[data.pos(b)] = 1.0
        if np.linalg.norm(Gb[data.pos(0), :] - target) > tol:
            raise StructureViolation(f"G_{b} row-0 action wrong")
    if data.kR:
        stack = np.column_stack([np.eye(K).ravel()]
                                + [Da.ravel() for Da in data.D])
        s = np.linalg.svd(stack, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise StructureViolation("{D_a} u {1} linearly dependent")
        for a1, D1 in enumerate(data.D, start=1):
            for a2, D2 in enumerate(data.D, start=1):
                prod = D1 @ D2
                span = [data.D[b - 1] for b in range(1, kR + 1)
                        if abs(data.lam_at(-a1) * data.lam_at(-a2)
                               - data.lam_at(-b)) < 1e-10]
                if span:
                    A = np.column_stack([S.ravel() for S in span])
                    coef, *_ = np.linalg.lstsq(A, prod.ravel(), rcond=None)
                    resid = np.linalg.norm(A @ coef - prod.ravel())
                else:
                    resid = np.linalg.norm(prod)
                if resid > tol:
                    raise StructureViolation(
                        f"D_{a1} D_{a2} outside the allowed span")


def exchange_residual(data: ClassAData, lmax: int = 6) -> float:
    """Residual of the level-space exchange relations for l = 1..lmax."""
    Lc = data.structured_factor()
    worst = 0.0
    for l in range(1, lmax + 1):
        Ll = np.linalg.matrix_power(Lc, l)
        for a in range(1, data.kR + 1):
            lhs = Ll @ data.D[a - 1]
            rhs = sum(Ll[data.pos(-ap), data.pos(-a)] * data.D[ap - 1] @ Ll
                      for ap in range(1, data.kR + 1))
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        for b in range(1, data.kL + 1):
            lhs = data.G[b - 1] @ Ll
            rhs = sum(Ll[data.pos(b), data.pos(bp)] * Ll @ data.G[bp - 1]
                      for bp in range(1, data.kL + 1))
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def validate_classa(data: ClassAData, l_range=None) -> dict:
    """Compare kernel spaces of B against the structured model space.

    The model at length l is Mat_{n0} tensored with
    span{ Lc^l, D_a Lc^l, Lc^l G_b, corner units E_{-a,b} },  Lc = Lam(1+Y).
    Reports the first l where equality holds and the stabilized dimension;
    raises NotClassA when an inclusion fails.
    """
    if data.B is None:
        data = replace(data, B=assemble_tensor(data))
    n0, K = data.n0, data.K
    Lc = data.structured_factor()
    target = n0 * n0 * (data.kR + 1) * (data.kL + 1)
    if l_range is None:
        # the word span cannot exceed n^l, so scan past log_n(target)
        need = int(np.ceil(np.log(target) / np.log(data.n)))
        l_range = range(1, max(4, data.l0 + 2, need + 3))
    dims = {}
    first = None
    for l in l_range:
        Ll = np.linalg.matrix_power(Lc, l)
        level_span = [Ll]
        level_span += [Da @ Ll for Da in data.D]
        level_span += [Ll @ Gb for Gb in data.G]
        for a in range(1, data.kR + 1):
            for b in range(1, data.kL + 1):
                E = np.zeros((K, K))
                E[data.pos(-a), data.pos(b)] = 1.0
                level_span.append(E)
        cols = np.column_stack([S.ravel() for S in level_span])
        U, s, _ = np.linalg.svd(cols, full_matrices=False)
        level_rank = int(np.count_nonzero(s > 1e-10 * s[0]))
        Q = U[:, :level_rank]
        ks = kernel_space(data.B, l)
        dims[l] = ks.dim
        # upper inclusion: every kernel element inside the model space
        P = Q @ Q.conj().T
        for kap in ks.basis:
            T = kap.reshape(K, n0, K, n0).transpose(0, 2, 1, 3).reshape(K * K, n0 * n0)
            resid = np.linalg.norm(T - P @ T)
            if resid > 1e-8:
                raise NotClassA(
                    f"kernel space escapes the model at l={l} (residual {resid:.3e})")
        if ks.dim == target and level_rank * n0 * n0 == target and first is None:
            first = l
    if first is None:
        raise NotClassA(
            f"kernel dimension never reaches {target}: {dims}")
    return {"l0": first, "dims": dims, "stabilized_dim": target}


# ---------------------------------------------------------------------------
# full two-sided recovery
# ---------------------------------------------------------------------------

def _base_intertwiner(A: MpsTuple, B: MpsTuple) -> np.ndarray:
    """Invertible M with M A_mu M^{-1} = B_mu (1-dim Sylvester nullspace)."""
    n0 = A.D
    rows = []
    for ma, mb in zip(A.matrices, B.matrices):
        rows.append(np.kron(np.eye(n0), ma.T) - np.kron(mb, np.eye(n0)))
    S = np.vstack(rows)
    _, s, Vh = np.linalg.svd(S)
    if s[-1] > 1e-8 * max(s[0], 1.0):
        raise StructureViolation("base tuples are not similar")
    M = Vh[-1].conj().reshape(n0, n0)
    if np.linalg.svd(M, compute_uv=False)[-1] < 1e-8:
        raise StructureViolation("base intertwiner is singular")
    return M


def canonicalize(v: MpsTuple, seed: int = 0) -> ClassAData:
    """Recover two-sided structured data from a scrambled tensor.

    Splits the full adjoint-invariant chain at its unique radius-1 level,
    canonicalizes the two compressions (the left one through its adjoint),
    matches the base tuples and assembles the result.
    """
    full = build_chain(v, seed=seed)
    radii = [peripheral_structure(c).radius for c in full.corners]
    top = [a for a, r in enumerate(radii) if r >= 1 - 1e-8]
    if len(top) != 1:
        raise NotClassA(f"expected one radius-1 level, found {len(top)}: {radii}")
    astar = top[0]
    kL, kR = astar, full.k - astar

    # right block: v restricted to the invariant complement of K_{astar-1}
    if astar >= 1:
        QR = scipy.linalg.null_space(full.bases[astar - 1].conj().T)
    else:
        QR = np.eye(v.D, dtype=complex)
    leakR = max(np.linalg.norm((np.eye(v.D) - QR @ QR.conj().T) @ m @ QR)
                for m in v.matrices)
    if leakR > 1e-8 * max(np.linalg.norm(m) for m in v.matrices):
        raise NotClassA(f"right block not invariant (leak {leakR:.3e})")
    wR = MpsTuple(np.array([QR.conj().T @ m @ QR for m in v.matrices]))

    # left block: compression to K_{astar} (adjoint-invariant)
    QL = full.bases[astar]
    wL = MpsTuple(np.array([QL.conj().T @ m @ QL for m in v.matrices]))

    right = canonical_half(wR, seed=seed)
    leftstar = canonical_half(
        MpsTuple(np.array([m.conj().T for m in wL.matrices])), seed=seed)

    flipped = MpsTuple(np.array([m.conj().T for m in leftstar.omega.matrices]))
    M = _base_intertwiner(flipped, right.omega)
    return assemble_classa(right, leftstar, match=M)


# ---------------------------------------------------------------------------
# combinatorial utilities
# ---------------------------------------------------------------------------

def sieve_coefficients(values, degree: int, target, window: int) -> np.ndarray:
    """Window coefficients isolating a single s_i^j * C(j, gamma) component.

    Solves sum_j xi(j) s_i'^j C(j, gamma') = delta at the target (i, gamma)
    pair and zero at all others (generalized Vandermonde system).
    """
    values = [complex(s) for s in values]
    for i, s in enumerate(values):
        if abs(s) < 1e-12:
            raise SingularSystem("zero value")
        for sp in values[i + 1:]:
            if abs(s - sp) < 1e-12:
                raise SingularSystem("duplicate values")
    pairs = [(i, g) for i in range(len(values)) for g in range(degree + 1)]
    if window < len(pairs):
        raise SingularSystem(
            f"window {window} smaller than {len(pairs)} constraints")
    ti, tg = target
    if not (0 <= ti < len(values) and 0 <= tg <= degree):
        raise OutOfRange(f"target {target} outside the pair grid")
    A = np.array([[values[i] ** j * math.comb(j, g) for j in range(window)]
                  for (i, g) in pairs])
    b = np.array([1.0 if (i, g) == (ti, tg) else 0.0 for (i, g) in pairs])
    xi, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.norm(A @ xi - b) > 1e-10:
        raise SingularSystem("sieve system numerically singular")
    return xi


def binomial_convolution(l: int, m1: int, m2: int) -> dict:
    """Exact expansion coefficients of C(l, m1) * C(l, m2) over C(l, k).

    Returns {k: alpha_k} with C(l,m1)C(l,m2) = sum_k alpha_k C(l,k) for all l;
    alpha_k = C(k, m2) * C(m2, k - m1) (zero outside m1 <= k <= m1+m2).
    """
    if m1 < 0 or m2 < 0 or m1 + m2 > l:
        raise OutOfRange(f"need 0 <= m1, m2 and m1+m2 <= l, got ({l},{m1},{m2})")
    out = {}
    for k in range(m1 + m2 + 1):
        if k < m2 or k - m1 < 0 or k - m1 > m2:
            continue
        val = math.comb(k, m2) * math.comb(m2, k - m1)
        if val:
            out[k] = val
    return out
