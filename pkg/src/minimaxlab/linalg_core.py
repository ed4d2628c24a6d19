"""Small dense linear algebra used by the game classifiers.

Everything here works on plain ``numpy`` arrays and is meant for matrices
of dimension a dozen or so.  Tolerances follow one rule: a singular value
or eigenvalue below ``tol * max(1, scale)`` counts as zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-9
DEFAULT_DEF_TOL = 1e-8


class NonFinite(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class NonConvergence(RuntimeError):
    pass


class Definiteness(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMI = "PositiveSemi"
    INDEFINITE = "Indefinite"
    NEGATIVE_SEMI = "NegativeSemi"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    ZERO = "Zero"

    @property
    def is_psd(self) -> bool:
        return self in (Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_SEMI, Definiteness.ZERO)

    @property
    def is_nsd(self) -> bool:
        return self in (Definiteness.NEGATIVE_DEFINITE, Definiteness.NEGATIVE_SEMI, Definiteness.ZERO)


@dataclass(frozen=True)
class SpectralDecomp:
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite(f"{name} has non-finite entries")
    return M


def _as_square(M, name: str = "matrix") -> np.ndarray:
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {M.shape}")
    return M


def sym_eig(M, max_sweeps: int = 100) -> SpectralDecomp:
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    The input is symmetrized first.  Eigenvalues come back sorted in
    descending order with orthonormal eigenvectors as columns.
    """
    S = _as_square(M, "symmetric matrix")
    S = 0.5 * (S + S.T)
    n = S.shape[0]
    V = np.eye(n)
    scale = max(np.abs(S).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(S, -1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = S[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (S[q, q] - S[p, p]) / (2.0 * apq)
                if theta == 0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/cols p, q
                Sp, Sq = S[:, p].copy(), S[:, q].copy()
                S[:, p] = c * Sp - s * Sq
                S[:, q] = s * Sp + c * Sq
                Sp, Sq = S[p, :].copy(), S[q, :].copy()
                S[p, :] = c * Sp - s * Sq
                S[q, :] = s * Sp + c * Sq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        raise NonConvergence("Jacobi sweeps did not converge")
    w = np.diag(S).copy()
    order = np.argsort(-w, kind="stable")
    return SpectralDecomp(w[order], V[:, order])


def _cutoff(values: np.ndarray, tol: float) -> float:
    top = float(np.max(np.abs(values))) if values.size else 0.0
    return tol * max(1.0, top)


def pinv(M, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with an explicit zero band."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = as_matrix(M)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > _cutoff(s, tol)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def null_projector(L, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthogonal projector ``I - L L^+`` onto the null space of ``L^T``."""
    L = as_matrix(L, "L")
    P = np.eye(L.shape[0]) - L @ pinv(L, tol)
    return 0.5 * (P + P.T)


def null_basis(M, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the null space of ``M``."""
    M = as_matrix(M)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > _cutoff(s, tol)))
    return Vt[rank:].T.copy()


def pos_neg_parts(S, tol: float = DEFAULT_RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Split a symmetric matrix into its positive and negative spectral parts.

    Eigenvalues inside the zero band go to neither part.
    """
    dec = sym_eig(S)
    w, U = dec.eigenvalues, dec.eigenvectors
    thr = _cutoff(w, tol)
    wp = np.where(w > thr, w, 0.0)
    wn = np.where(w < -thr, w, 0.0)
    return (U * wp) @ U.T, (U * wn) @ U.T


def definiteness(S, tol: float = DEFAULT_DEF_TOL) -> Definiteness:
    w = sym_eig(S).eigenvalues
    thr = _cutoff(w, tol)
    lo, hi = float(w.min()), float(w.max())
    if hi <= thr and lo >= -thr:
        return Definiteness.ZERO
    if lo > thr:
        return Definiteness.POSITIVE_DEFINITE
    if hi < -thr:
        return Definiteness.NEGATIVE_DEFINITE
    if lo >= -thr:
        return Definiteness.POSITIVE_SEMI
    if hi <= thr:
        return Definiteness.NEGATIVE_SEMI
    return Definiteness.INDEFINITE


def min_eig(S) -> float:
    return float(sym_eig(S).eigenvalues[-1])


def max_eig(S) -> float:
    return float(sym_eig(S).eigenvalues[0])


def in_range(M, v, tol: float = 1e-8) -> bool:
    return range_residual(M, v) <= tol * (1.0 + float(np.linalg.norm(v)))


def range_residual(M, v) -> float:
    M = as_matrix(M)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != M.shape[0]:
        raise DimensionMismatch(f"vector of length {v.shape[0]} against {M.shape[0]} rows")
    r = v - M @ (pinv(M) @ v)
    return float(np.linalg.norm(r))


def charpoly(M) -> np.ndarray:
    """Characteristic polynomial coefficients (monic, highest degree first).

    Faddeev-LeVerrier recursion; only meant for the small matrices where
    it is used as an independent cross-check.
    """
    M = _as_square(M)
    n = M.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(M @ Mk) / k
    return coeffs


def companion_roots(coeffs) -> np.ndarray:
    """Roots of a (real or complex) polynomial via its companion matrix."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.flatnonzero(c != 0)
    if nz.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c[nz[0]:]
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -c[1:] / c[0]
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp)


def general_eig(M) -> np.ndarray:
    """Eigenvalues (with multiplicity) of a real square matrix.

    LAPACK's Hessenberg + shifted QR does the work; for dimension <= 4 a
    characteristic-polynomial companion solve is the fallback when that
    fails.
    """
    M = _as_square(M)
    n = M.shape[0]
    try:
        w = np.linalg.eigvals(M)
        if np.all(np.isfinite(w)):
            return w.astype(complex)
    except np.linalg.LinAlgError:
        pass
    if n <= 4:
        try:
            w = companion_roots(charpoly(M))
            if np.all(np.isfinite(w)):
                return w
        except np.linalg.LinAlgError:
            pass
    raise NonConvergence(f"eigenvalue iteration failed for a {n}x{n} matrix")


def spectral_radius(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if np.iscomplexobj(M):
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    return float(np.max(np.abs(general_eig(M))))
