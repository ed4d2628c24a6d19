"""Exact classification of unconstrained quadratic games.

A game is ``q(x, y) = 1/2 (x'Ax + 2x'Cy + y'By + 2a'x + 2b'y + c)``, with
``x`` minimizing and ``y`` maximizing.  Stationarity is the gradient-zero
system ``K z = -[a; b]`` with ``K = [[A, C], [C', B]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import linalg_core as la
from .linalg_core import DimensionMismatch

NEIGHBORHOOD_NOTE = (
    "LRP verdict uses eigenspace box neighborhoods: the y-box is aligned with "
    "the eigenvectors of B and the x-box with those of A. The verdict can change "
    "under other norms."
)


@dataclass(frozen=True)
class QuadraticGame:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        A = la.as_matrix(self.A, "A")
        B = la.as_matrix(self.B, "B")
        n, m = A.shape[0], B.shape[0]
        if A.shape != (n, n) or B.shape != (m, m):
            raise DimensionMismatch(f"A {A.shape} and B {B.shape} must be square")
        C = np.asarray(self.C, dtype=float).reshape(n, m) if np.size(self.C) == n * m else None
        if C is None:
            raise DimensionMismatch(f"C must be {n}x{m}, got {np.shape(self.C)}")
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.size != n or b.size != m:
            raise DimensionMismatch(f"a must have length {n} and b length {m}")
        for name, M in (("A", A), ("B", B)):
            if not np.allclose(M, M.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(M).max())):
                raise ValueError(f"{name} must be symmetric")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and math.isfinite(self.c)):
            raise la.NonFinite("game has non-finite entries")
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "B", 0.5 * (B + B.T))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def K(self) -> np.ndarray:
        return np.block([[self.A, self.C], [self.C.T, self.B]])

    @property
    def r(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @property
    def is_homogeneous(self) -> bool:
        return not (np.any(self.a) or np.any(self.b))

    @classmethod
    def homogeneous(cls, A, B, C) -> "QuadraticGame":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        return cls(A, B, C, np.zeros(A.shape[0]), np.zeros(B.shape[0]), 0.0)

    @classmethod
    def one_dim(cls, a: float, b: float, c: float) -> "QuadraticGame":
        """``a x^2/2 + c x y + b y^2/2``."""
        return cls.homogeneous([[a]], [[b]], [[c]])

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "QuadraticGame":
        try:
            A = np.atleast_2d(np.asarray(d["A"], dtype=float))
            B = np.atleast_2d(np.asarray(d["B"], dtype=float))
        except KeyError as exc:
            raise KeyError(f"game is missing field {exc}") from None
        n, m = A.shape[0], B.shape[0]
        C = np.asarray(d.get("C", np.zeros((n, m))), dtype=float)
        if C.ndim < 2:
            C = C.reshape(n, -1) if C.size == n * m else C
        a = d.get("a", np.zeros(n))
        b = d.get("b", np.zeros(m))
        return cls(A, B, C, a, b, float(d.get("c", 0.0)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist(),
            "a": self.a.tolist(), "b": self.b.tolist(), "c": self.c,
        }

    def translated(self, x0, y0) -> "QuadraticGame":
        """The game in coordinates centered at ``(x0, y0)``."""
        x0 = np.asarray(x0, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        gx, gy = grad(self, x0, y0)
        return QuadraticGame(self.A, self.B, self.C, gx, gy, 2.0 * evaluate(self, x0, y0))


def _xy(game: QuadraticGame, x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != (game.n,) or y.shape[-1:] != (game.m,):
        if game.n == 1 and x.ndim == 0:
            x = x.reshape(1)
        if game.m == 1 and y.ndim == 0:
            y = y.reshape(1)
        if x.shape[-1:] != (game.n,) or y.shape[-1:] != (game.m,):
            raise DimensionMismatch(f"expected x in R^{game.n} and y in R^{game.m}")
    return x, y


def evaluate(game: QuadraticGame, x, y):
    """Payoff value; broadcasts over leading axes of ``x`` and ``y``."""
    x, y = _xy(game, x, y)
    val = (
        np.einsum("...i,ij,...j->...", x, game.A, x)
        + 2.0 * np.einsum("...i,ij,...j->...", x, game.C, y)
        + np.einsum("...i,ij,...j->...", y, game.B, y)
        + 2.0 * (x @ game.a)
        + 2.0 * (y @ game.b)
        + game.c
    )
    return 0.5 * val


def grad(game: QuadraticGame, x, y) -> tuple[np.ndarray, np.ndarray]:
    x, y = _xy(game, x, y)
    gx = x @ game.A + y @ game.C.T + game.a
    gy = x @ game.C + y @ game.B + game.b
    return gx, gy


@dataclass(frozen=True)
class AffineSet:
    """``basepoint + span(basis)``; ``empty`` marks an unsolvable system."""

    basepoint: np.ndarray
    basis: np.ndarray
    empty: bool = False

    @property
    def dim(self) -> int:
        return -1 if self.empty else self.basis.shape[1]

    def contains(self, z, tol: float = 1e-7) -> bool:
        if self.empty:
            return False
        d = np.asarray(z, dtype=float) - self.basepoint
        if self.basis.shape[1]:
            d = d - self.basis @ (self.basis.T @ d)
        return float(np.linalg.norm(d)) <= tol * (1.0 + float(np.linalg.norm(z)))

    def is_subset_of(self, other: "AffineSet", tol: float = 1e-7) -> bool:
        if self.empty:
            return True
        if other.empty or not other.contains(self.basepoint, tol):
            return False
        for k in range(self.basis.shape[1]):
            if not other.contains(other.basepoint + self.basis[:, k], tol):
                return False
        return True

    def swapped(self, n_first: int) -> "AffineSet":
        """Swap the coordinate blocks ``(u, v) -> (v, u)`` with ``u`` of size ``n_first``."""
        perm = np.concatenate([np.arange(n_first, self.basepoint.size), np.arange(n_first)])
        return AffineSet(self.basepoint[perm], self.basis[perm], self.empty)

    def to_dict(self) -> dict[str, Any]:
        if self.empty:
            return {"empty": True}
        return {"empty": False, "basepoint": self.basepoint.tolist(),
                "basis": self.basis.T.tolist(), "dim": self.dim}


def solution_set(M, rhs, tol: float = 1e-8) -> AffineSet:
    """Solutions of ``M z = rhs`` as an affine set."""
    M = la.as_matrix(M)
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    P = la.pinv(M)
    z0 = P @ rhs
    z0 = z0 + P @ (rhs - M @ z0)   # one refinement step for ill-conditioned M
    basis = la.null_basis(M)
    if np.linalg.norm(M @ z0 - rhs) > tol * (1.0 + np.linalg.norm(rhs)):
        return AffineSet(np.zeros(M.shape[1]), np.zeros((M.shape[1], 0)), empty=True)
    return AffineSet(z0, basis)


def stationary_set(game: QuadraticGame, tol: float = 1e-8) -> AffineSet:
    return solution_set(game.K, -game.r, tol)


def mirror(game: QuadraticGame) -> QuadraticGame:
    """The game ``-q`` with the roles of the players swapped."""
    return QuadraticGame(-game.B, -game.A, -game.C.T, -game.b, -game.a, -game.c)


@dataclass
class Concept:
    exists: bool
    set: AffineSet | None = None
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"exists": self.exists}
        if self.set is not None:
            d["set"] = self.set.to_dict()
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class ClassificationReport:
    stationary: AffineSet
    global_minimax: Concept
    local_minimax: Concept
    global_maximin: Concept
    local_maximin: Concept
    saddle: Concept
    lrp: Concept
    condition_trace: list[tuple[str, bool, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "stationary": self.stationary.to_dict(),
            "global_minimax": self.global_minimax.to_dict(),
            "local_minimax": self.local_minimax.to_dict(),
            "global_maximin": self.global_maximin.to_dict(),
            "local_maximin": self.local_maximin.to_dict(),
            "saddle": self.saddle.to_dict(),
            "lrp": self.lrp.to_dict(),
            "condition_trace": [
                {"condition": name, "holds": bool(ok), "witness": float(w)}
                for name, ok, w in self.condition_trace
            ],
        }


def _psd(S, tol) -> tuple[bool, float]:
    if S.size == 0:
        return True, 0.0
    lo = la.min_eig(S)
    return la.definiteness(S, tol).is_psd, lo


def _nsd(S, tol) -> tuple[bool, float]:
    if S.size == 0:
        return True, 0.0
    hi = la.max_eig(S)
    return la.definiteness(S, tol).is_nsd, hi


def minimax_conditions(game: QuadraticGame, tol: float = 1e-8) -> dict[str, Any]:
    """The two definiteness conditions for minimax points and their pieces.

    ``B <= 0`` and ``P_L (A - C B^+ C') P_L >= 0`` with ``L = C P_B``.
    """
    A, B, C = game.A, game.B, game.C
    P_B = la.null_projector(B)
    L = C @ P_B
    P_L = la.null_projector(L)
    S = A - C @ la.pinv(B) @ C.T
    reduced = P_L @ S @ P_L
    b_ok, b_w = _nsd(B, tol)
    s_ok, s_w = _psd(reduced, tol)
    return {"P_B": P_B, "L": L, "P_L": P_L, "S": S, "reduced": reduced,
            "B_nsd": (b_ok, b_w), "reduced_psd": (s_ok, s_w)}


def _minimax_sets(game: QuadraticGame, tol: float, trace: list, label: str,
                  mirrored: bool = False) -> tuple[Concept, Concept]:
    # for the mirrored game the trace is phrased (and signed) in the original blocks
    cond = minimax_conditions(game, tol)
    b_ok, b_w = cond["B_nsd"]
    s_ok, s_w = cond["reduced_psd"]
    rng = la.range_residual(game.K, game.r)
    rng_ok = rng <= tol * (1.0 + np.linalg.norm(game.r))
    if mirrored:
        trace.append((f"{label}: A >= 0 (min eig)", b_ok, -b_w))
        trace.append((f"{label}: P_M(B - C' A^+ C)P_M <= 0 (max eig)", s_ok, -s_w))
    else:
        trace.append((f"{label}: B <= 0 (max eig)", b_ok, b_w))
        trace.append((f"{label}: P_L(A - C B^+ C')P_L >= 0 (min eig)", s_ok, s_w))
    trace.append((f"{label}: [a; b] in range(K) (residual)", rng_ok, rng))
    if not (b_ok and s_ok):
        return Concept(False), Concept(False)
    n = game.n
    D = np.eye(n + game.m)
    D[:n, :n] = cond["P_L"]
    glob = solution_set(D @ game.K, -(D @ game.r), tol)
    loc = stationary_set(game, tol)
    return Concept(not glob.empty, glob), Concept(not loc.empty, loc)


def lrp_conditions(game: QuadraticGame, tol: float = 1e-8) -> dict[str, Any]:
    """Definiteness conditions for a local robust point of a homogeneous game."""
    A, B, C = game.A, game.B, game.C
    A_p, _ = la.pos_neg_parts(A)
    _, B_n = la.pos_neg_parts(B)
    L = C @ la.null_projector(B_n)
    P_L = la.null_projector(L)
    M = C.T @ la.null_projector(A_p)
    P_M = la.null_projector(M)
    x_side = P_L @ (A - C @ la.pinv(B_n) @ C.T) @ P_L
    y_side = P_M @ (B - C.T @ la.pinv(A_p) @ C) @ P_M
    return {"x_side": _psd(x_side, tol), "y_side": _nsd(y_side, tol)}


def classify(game: QuadraticGame, tol: float = 1e-8) -> ClassificationReport:
    trace: list[tuple[str, bool, float]] = []
    stat = stationary_set(game, tol)
    rng = la.range_residual(game.K, game.r)
    trace.append(("stationary: -[a; b] in range(K) (residual)", not stat.empty, rng))

    gmm, lmm = _minimax_sets(game, tol, trace, "minimax")
    gmx_m, lmx_m = _minimax_sets(mirror(game), tol, trace, "maximin", mirrored=True)
    n = game.n
    m = game.m
    gmx = Concept(gmx_m.exists, gmx_m.set.swapped(m) if gmx_m.set is not None else None)
    lmx = Concept(lmx_m.exists, lmx_m.set.swapped(m) if lmx_m.set is not None else None)

    a_ok, a_w = _psd(game.A, tol)
    b_ok, b_w = _nsd(game.B, tol)
    trace.append(("saddle: A >= 0 (min eig)", a_ok, a_w))
    trace.append(("saddle: B <= 0 (max eig)", b_ok, b_w))
    saddle_exists = a_ok and b_ok and not stat.empty
    saddle = Concept(saddle_exists, stat if saddle_exists else None)

    if stat.empty:
        lrp = Concept(False, None, NEIGHBORHOOD_NOTE)
        trace.append(("lrp: stationary point exists", False, rng))
    else:
        cond = lrp_conditions(game, tol)
        x_ok, x_w = cond["x_side"]
        y_ok, y_w = cond["y_side"]
        trace.append(("lrp: P_L(A - C B_n^+ C')P_L >= 0 (min eig)", x_ok, x_w))
        trace.append(("lrp: P_M(B - C' A_p^+ C)P_M <= 0 (max eig)", y_ok, y_w))
        ok = x_ok and y_ok
        lrp = Concept(ok, stat if ok else None, NEIGHBORHOOD_NOTE)

    return ClassificationReport(stat, gmm, lmm, gmx, lmx, saddle, lrp, trace)


def envelope_1d(a: float, b: float, c: float, kind: str, eps: float, point: float) -> float:
    """Envelope of ``a x^2/2 + c x y + b y^2/2`` over an interval of half-width ``eps``.

    ``kind="upper"`` maximizes over ``|y| <= eps`` at ``x = point``;
    ``kind="lower"`` minimizes over ``|x| <= eps`` at ``y = point``.  The
    inner problem is solved exactly, which reproduces the textbook closed
    forms whenever the interior optimizer lies inside the interval.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    for v in (a, b, c, eps, point):
        if np.ndim(v) != 0:
            raise DimensionMismatch("envelope_1d expects a one-dimensional game and scalar point")
    if kind == "upper":
        x = point

        def g(y):
            return a * x * x / 2 + c * x * y + b * y * y / 2

        cands = [-eps, eps]
        if b < 0:
            cands.append(min(max(-c * x / b, -eps), eps))
        return max(g(y) for y in cands)
    if kind == "lower":
        y = point

        def h(x):
            return a * x * x / 2 + c * x * y + b * y * y / 2

        cands = [-eps, eps]
        if a > 0:
            cands.append(min(max(-c * y / a, -eps), eps))
        return min(h(x) for x in cands)
    raise ValueError(f"kind must be 'upper' or 'lower', got {kind!r}")


@dataclass(frozen=True)
class UpperEnvelope:
    """``max_y q(x, y)`` as a quadratic on the affine set ``L' x = rhs``.

    ``finite`` is False when ``B`` is not negative semidefinite, in which
    case the envelope is ``+inf`` everywhere.
    """

    finite: bool
    L: np.ndarray | None = None
    rhs: np.ndarray | None = None
    Q: np.ndarray | None = None
    linear: np.ndarray | None = None
    constant: float = 0.0

    def __call__(self, x, tol: float = 1e-8) -> float:
        if not self.finite:
            return math.inf
        x = np.asarray(x, dtype=float).reshape(-1)
        if np.linalg.norm(self.L.T @ x - self.rhs) > tol * (1.0 + np.linalg.norm(x)):
            return math.inf
        return float(0.5 * x @ self.Q @ x + self.linear @ x + self.constant)

    def domain(self) -> AffineSet:
        return solution_set(self.L.T, self.rhs)


def upper_envelope_quadratic(game: QuadraticGame, tol: float = 1e-8) -> UpperEnvelope:
    """Closed-form upper envelope over all of ``R^m``.

    With ``g = C'x + b`` the inner maximum is ``-g' B^+ g / 2`` when
    ``g`` lies in the range of ``B``, i.e. ``L' x = -P_B b``.
    """
    b_ok, _ = _nsd(game.B, tol)
    if not b_ok:
        return UpperEnvelope(False)
    Bp = la.pinv(game.B)
    P_B = la.null_projector(game.B)
    L = game.C @ P_B
    Q = game.A - game.C @ Bp @ game.C.T
    linear = game.a - game.C @ Bp @ game.b
    const = 0.5 * game.c - 0.5 * game.b @ Bp @ game.b
    return UpperEnvelope(True, L, -(P_B @ game.b), Q, linear, float(const))


def random_game(rng: np.random.Generator, n: int, m: int, scale: float = 3.0,
                homogeneous: bool = False) -> QuadraticGame:
    """Uniform random game, entries in ``[-scale, scale]``."""
    def sym(k):
        M = rng.uniform(-scale, scale, (k, k))
        return 0.5 * (M + M.T)

    A, B = sym(n), sym(m)
    C = rng.uniform(-scale, scale, (n, m))
    if homogeneous:
        return QuadraticGame.homogeneous(A, B, C)
    return QuadraticGame(A, B, C, rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, m),
                         float(rng.uniform(-scale, scale)))
