"""Finite spin chains: parent interactions, gaps, edge states, interpolation.

The parent interaction of a tuple v at range m is the orthogonal projection
onto the complement of the length-m word span; summing its translates gives a
frustration-free Hamiltonian whose kernel is exactly Ran Gamma_N.  On top of
that sit the desk-scale experiments: gap scans, edge expectation values with
geometric extrapolation, decay-rate fits, spectra along interpolation paths,
and evaluation of the bulk state from its generating triple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import build_chain, corner_rescale
from .errors import (ContractionFail, CornerZero, DegenerateInteraction,
                     DimensionMismatch, FitFailure, InvalidTriple,
                     NLessThanRange, NoGap, TooLarge)
from .linalg import MAX_DENSE_DIM, hermitian_eig
from .mps import (MpsTuple, apply_transfer, ground_space_basis,
                  kernel_space, support_projection)

KERNEL_TOL = 1e-9


@dataclass(frozen=True)
class Interaction:
    """Positive semidefinite projection acting on ``m`` consecutive sites."""

    m: int
    n: int
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        dim = self.n ** self.m
        if h.shape != (dim, dim):
            raise DimensionMismatch(f"h must be {dim}x{dim}, got {h.shape}")
        if (np.linalg.norm(h - h.conj().T) > 1e-10
                or np.linalg.norm(h @ h - h) > 1e-10):
            raise DimensionMismatch("h must be a Hermitian projection")
        h = h.copy()
        h.setflags(write=False)
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class ChainSpectrum:
    N: int
    eigenvalues: np.ndarray
    kernel_dim: int
    gap: float
    ground_projector: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class FcsTriple:
    """Generating triple (tuple, invariant state, direction) of a bulk state.

    The tuple must be unital (sum v v* = 1) and rho invariant under the
    adjoint transfer map.  Direction R composes the evaluation maps from the
    right edge inward; direction L is the dual composition seeded with rho.
    Both generate the same state (the equality is an exact algebraic
    identity), so the flag records which edge the half-infinite extension
    hangs off.
    """

    tuple: MpsTuple
    rho: np.ndarray
    direction: str = "R"

    def __post_init__(self):
        v, rho = self.tuple, np.asarray(self.rho, dtype=complex)
        if self.direction not in ("L", "R"):
            raise InvalidTriple(f"direction must be 'L' or 'R', got {self.direction!r}")
        if rho.shape != (v.D, v.D):
            raise InvalidTriple(f"rho must be {v.D}x{v.D}, got {rho.shape}")
        if np.linalg.norm(rho - rho.conj().T) > 1e-10 or abs(np.trace(rho) - 1) > 1e-10:
            raise InvalidTriple("rho must be a trace-1 Hermitian matrix")
        if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() <= 1e-12:
            raise InvalidTriple("rho must be faithful (strictly positive)")
        mats = v.matrices
        unit = np.einsum("mij,mkj->ik", mats, mats.conj())
        back = apply_transfer(v, rho, "L")
        if np.linalg.norm(unit - np.eye(v.D)) > 1e-10 * v.D:
            raise InvalidTriple("tuple is not unital")
        if np.linalg.norm(back - rho) > 1e-10:
            raise InvalidTriple("rho is not invariant under the transfer map")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)


@dataclass
class AssumptionDiagnostics:
    """Measured stand-ins for the uniform-chain assumptions."""

    d1: int = 0
    gamma: float | None = None
    ltqo_C1: float = 0.0
    ltqo_s1: float = 0.0
    support_floor: float = 0.0
    chain_flags: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def parent_interaction(v: MpsTuple, m: int, direction: str = "R") -> Interaction:
    """h = 1 - (projection onto the length-m word span of v)."""
    if m < 1:
        raise NLessThanRange("range must be >= 1")
    dim = v.n ** m
    if dim > MAX_DENSE_DIM:
        raise TooLarge(f"n^m = {dim} exceeds the dense cap {MAX_DENSE_DIM}")
    P = support_projection(v, m, direction)
    h = np.eye(dim, dtype=complex) - P
    h = (h + h.conj().T) / 2
    if np.linalg.norm(h) < 1e-10:
        raise DegenerateInteraction(
            f"length-{m} words span everything; the interaction vanishes")
    return Interaction(m=m, n=v.n, h=h)


def assemble_hamiltonian(h: Interaction, N: int) -> np.ndarray:
    """H = sum_{x=0}^{N-m} 1^{(x)} (x) h (x) 1^{(N-m-x)}, assembled in place."""
    n, m = h.n, h.m
    if N < m:
        raise NLessThanRange(f"N = {N} below the interaction range m = {m}")
    dim = n ** N
    if dim > MAX_DENSE_DIM:
        raise TooLarge(f"n^N = {dim} exceeds the dense cap {MAX_DENSE_DIM}")
    term = np.ascontiguousarray(h.h)
    if np.abs(term.imag).max(initial=0.0) == 0.0:
        term = term.real
    H = np.zeros((dim, dim), dtype=term.dtype)
    mid = n ** m
    for x in range(N - m + 1):
        left = n ** x
        right = dim // (left * mid)
        view = H.reshape(left, mid, right, left, mid, right)
        for a in range(left):
            for b in range(right):
                view[a, :, b, a, :, b] += term
    return H


def ground_data(H: np.ndarray, kernel_tol: float = KERNEL_TOL,
                N: int = 0) -> ChainSpectrum:
    """Spectrum, kernel dimension, gap and ground projector of a PSD matrix."""
    eig = hermitian_eig(H)
    vals = eig.eigenvalues
    thr = kernel_tol * max(1.0, float(vals[-1]) if vals.size else 1.0)
    kdim = int(np.count_nonzero(vals <= thr))
    if kdim == vals.size:
        raise NoGap("all eigenvalues below the kernel tolerance")
    gap = float(vals[kdim])
    Vk = eig.eigenvectors[:, :kdim]
    G = Vk @ Vk.conj().T
    return ChainSpectrum(N=N, eigenvalues=vals, kernel_dim=kdim, gap=gap,
                         ground_projector=G)


def projector_distance(G1: np.ndarray, G2: np.ndarray):
    """(operator norm of G1 - G2, trace overlap Tr((1-G2) G1))."""
    G1 = np.asarray(G1, dtype=complex)
    G2 = np.asarray(G2, dtype=complex)
    if G1.shape != G2.shape:
        raise DimensionMismatch(f"shapes {G1.shape} and {G2.shape} differ")
    op = float(np.linalg.norm(G1 - G2, ord=2))
    overlap = float(np.real(np.trace((np.eye(G1.shape[0]) - G2) @ G1)))
    return op, overlap


# ---------------------------------------------------------------------------
# edge states and decay fits
# ---------------------------------------------------------------------------

def _edge_states(v: MpsTuple, l: int, Ns, direction: str = "R"):
    """Reduced density matrices of the ground-space average on sites [0, l-1].

    Returns ({N: rho_N}, {N: ground dimension}).
    """
    out, dims = {}, {}
    dim = v.n ** l
    for N in Ns:
        B = ground_space_basis(v, N, direction)
        if B.shape[1] == 0:
            raise NoGap(f"empty ground space at N = {N}")
        rho = np.zeros((dim, dim), dtype=complex)
        for j in range(B.shape[1]):
            X = B[:, j].reshape(dim, -1)
            rho += X @ X.conj().T
        out[N] = rho / B.shape[1]
        dims[N] = B.shape[1]
    return out, dims


def _aitken(seq):
    """Geometric-sequence limit from the last three entries; (limit, ratio)."""
    if len(seq) < 3:
        return seq[-1], 0.0
    f1, f2, f3 = seq[-3], seq[-2], seq[-1]
    d1, d2 = f2 - f1, f3 - f2
    if abs(d1) < 1e-14 or abs(d2) < 1e-14:
        return f3, 0.0
    s = d2 / d1
    if abs(1 - s) < 1e-12:
        return f3, abs(s)
    return f3 + d2 * s / (1 - s), abs(s)


@dataclass(frozen=True)
class EdgeExpectation:
    Ns: list
    values: np.ndarray
    limit: complex
    ratio: float
    converged: bool


def edge_expectation(v: MpsTuple, A: np.ndarray, N_range,
                     direction: str = "R") -> EdgeExpectation:
    """Ground-space average of A on the edge window, with extrapolated limit."""
    A = np.asarray(A, dtype=complex)
    l = int(round(np.log(A.shape[0]) / np.log(v.n)))
    if v.n ** l != A.shape[0] or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"observable shape {A.shape} is not a power of n")
    Ns = sorted(N_range)
    if Ns and l > Ns[0]:
        raise NLessThanRange(f"window length {l} exceeds smallest N = {Ns[0]}")
    states, _ = _edge_states(v, l, Ns, direction)
    values = np.array([np.trace(states[N] @ A) for N in Ns])
    limit, ratio = _aitken(list(values))
    diffs = np.abs(np.diff(values))
    burn = len(diffs) // 2
    tail = diffs[burn:]
    converged = bool(len(tail) >= 2 and all(
        tail[i + 1] <= tail[i] + 1e-14 for i in range(len(tail) - 1)))
    return EdgeExpectation(Ns=Ns, values=values, limit=complex(limit),
                           ratio=float(ratio), converged=converged)


def _fit_decay(Ns, errors, l):
    """Least-squares fit errors ~ C1 * s1^(N - l) on the log scale."""
    pts = [(N, e) for N, e in zip(Ns, errors) if e > 1e-14]
    if len(pts) < 3:
        raise FitFailure(f"only {len(pts)} nonzero error points")
    xs = np.array([N - l for N, _ in pts], dtype=float)
    ys = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    C1, s1 = float(np.exp(intercept)), float(np.exp(slope))
    if not 0 < s1 < 1:
        raise FitFailure(f"fitted ratio {s1:.4f} outside (0, 1)")
    return C1, s1


def ltqo_scan(v: MpsTuple, observables, l: int, N_range,
              direction: str = "R", compute_gap: bool = False):
    """Decay of edge expectations towards their limits, with a geometric fit.

    ``observables`` is a list of (id, matrix) pairs or bare matrices.  Returns
    (AssumptionDiagnostics, rows) where each row is a dict with keys
    N, observable_id, value, error, fit_C1, fit_s1.
    """
    obs = [(o[0], np.asarray(o[1], complex)) if isinstance(o, tuple)
           else (str(i), np.asarray(o, complex)) for i, o in enumerate(observables)]
    Ns = sorted(N_range)
    if not Ns or l > Ns[0]:
        raise NLessThanRange("window must fit on every chain in the range")
    states, gdims = _edge_states(v, l, Ns, direction)
    d1 = max(gdims.values())
    rho_seq = [states[N] for N in Ns]
    rho_limit = np.array([[_aitken([r[i, j] for r in rho_seq])[0]
                           for j in range(rho_seq[0].shape[0])]
                          for i in range(rho_seq[0].shape[0])])
    rho_limit = (rho_limit + rho_limit.conj().T) / 2
    evals = np.linalg.eigvalsh(rho_limit)
    nonzero = evals[evals > 1e-10]
    support_floor = float(nonzero.min()) if nonzero.size else 0.0

    rows = []
    fits = []
    for oid, A in obs:
        values = np.array([np.trace(states[N] @ A) for N in Ns])
        limit, _ = _aitken(list(values))
        errors = np.abs(values - limit)
        if np.all(errors < 1e-12):
            C1, s1 = 0.0, 0.0          # exact for all N; nothing to fit
        else:
            C1, s1 = _fit_decay(Ns, errors, l)
            fits.append((C1, s1))
        for N, val, err in zip(Ns, values, errors):
            rows.append({"N": N, "observable_id": oid,
                         "value": complex(val), "error": float(err),
                         "fit_C1": C1, "fit_s1": s1})
    chain_flags = {"corner_zero": False, "contraction_fail": False}
    try:
        corner_rescale(build_chain(v))
    except CornerZero:
        chain_flags["corner_zero"] = True
    except ContractionFail:
        chain_flags["contraction_fail"] = True
    except Exception:
        chain_flags["chain_error"] = True

    gamma = None
    if compute_gap:
        h = parent_interaction(v, l, direction)
        gamma = min(ground_data(assemble_hamiltonian(h, N), N=N).gap for N in Ns)
    diag = AssumptionDiagnostics(
        d1=int(d1), gamma=gamma,
        ltqo_C1=max((c for c, _ in fits), default=0.0),
        ltqo_s1=max((s for _, s in fits), default=0.0),
        support_floor=support_floor, chain_flags=chain_flags)
    return diag, rows


# ---------------------------------------------------------------------------
# interpolation paths
# ---------------------------------------------------------------------------

def interpolation_scan(h0: Interaction, h1: Interaction, t_grid, N_range):
    """Spectra of H(t) = (1-t) H0 + t H1 over a (t, N) grid.

    Returns (rows, report): rows carry (t, N, kernel_dim, lambda_min_nonzero,
    lambda_max); the report gives the measured eigenvalue-free interval and
    whether the kernel dimension is constant along every t-slice.
    """
    if h0.n != h1.n:
        raise DimensionMismatch(f"site dimensions differ: {h0.n} vs {h1.n}")
    Ns = sorted(N_range)
    ts = sorted(float(t) for t in t_grid)
    rows = []
    kdims = {}
    for N in Ns:
        H0 = assemble_hamiltonian(h0, N)
        H1 = assemble_hamiltonian(h1, N)
        for t in ts:
            spec = ground_data((1 - t) * H0 + t * H1, N=N)
            rows.append({"t": t, "N": N, "kernel_dim": spec.kernel_dim,
                         "lambda_min_nonzero": spec.gap,
                         "lambda_max": float(spec.eigenvalues[-1])})
            kdims.setdefault(N, set()).add(spec.kernel_dim)
    gamma_star = min(r["lambda_min_nonzero"] for r in rows)
    report = {
        "kernel_dim_constant": all(len(s) == 1 for s in kdims.values()),
        "kernel_dims": {N: sorted(s) for N, s in kdims.items()},
        "gamma_star": gamma_star,
        "free_interval": [0.0, gamma_star],
    }
    return rows, report


# ---------------------------------------------------------------------------
# bulk-state evaluation
# ---------------------------------------------------------------------------

def fcs_evaluate(triple: FcsTriple, local_ops) -> complex:
    """State value on a product of single-site observables at consecutive sites.

    Right generation composes E_A(X) = sum A_{mu nu} v_mu X v_nu* from the
    right edge inward and pairs against rho at the end; left generation is the
    dual composition X -> sum A_{mu nu} v_nu* X v_mu seeded with rho, traced
    at the end.  The result is independent of the absolute window position.
    """
    v = triple.tuple
    ops = [np.asarray(A, dtype=complex) for A in local_ops]
    for A in ops:
        if A.shape != (v.n, v.n):
            raise InvalidTriple(f"each local operator must be {v.n}x{v.n}")
    mats = v.matrices
    if triple.direction == "R":
        X = np.eye(v.D, dtype=complex)
        for A in reversed(ops):
            X = np.einsum("mn,mij,jk,nlk->il", A, mats, X, mats.conj())
        return complex(np.trace(triple.rho @ X))
    X = np.asarray(triple.rho, dtype=complex)
    for A in ops:
        X = np.einsum("mn,nji,jk,mkl->il", A, mats.conj(), X, mats)
    return complex(np.trace(X))
