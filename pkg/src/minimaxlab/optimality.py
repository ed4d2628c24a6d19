"""Derivative tests at candidate points: stationarity, invertible second order, local saddle."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import linalg_core as la
from .envelope import SmoothGameOracle, _shell_points


class NotStationary(ValueError):
    pass


class SecondOrderVerdict(enum.Enum):
    SUFFICIENT_STRICT_LOCAL_MINIMAX = "SufficientStrictLocalMinimax"
    NECESSARY_HOLDS = "NecessaryHolds"
    NECESSARY_FAILS = "NecessaryFails"
    DEGENERATE_YY = "DegenerateYY"


@dataclass
class FirstOrderResult:
    stationary: bool
    grad_x_norm: float
    grad_y_norm: float


def first_order_check(oracle: SmoothGameOracle, point, tol: float = 1e-8) -> FirstOrderResult:
    x, y = oracle.split(point)
    gx = np.asarray(oracle.grad_x(x, y), dtype=float)
    gy = np.asarray(oracle.grad_y(x, y), dtype=float)
    scale = 1.0 + float(np.linalg.norm(np.asarray(point, dtype=float)))
    nx, ny = float(np.linalg.norm(gx)), float(np.linalg.norm(gy))
    return FirstOrderResult(nx <= tol * scale and ny <= tol * scale, nx, ny)


@dataclass
class SecondOrderReport:
    grad_norm: float
    yy_definiteness: la.Definiteness
    schur_complement: np.ndarray | None
    schur_definiteness: la.Definiteness | None
    verdict: SecondOrderVerdict

    def to_dict(self) -> dict[str, Any]:
        return {
            "grad_norm": self.grad_norm,
            "yy_definiteness": self.yy_definiteness.value,
            "schur_complement": None if self.schur_complement is None else self.schur_complement.tolist(),
            "schur_definiteness": None if self.schur_definiteness is None else self.schur_definiteness.value,
            "verdict": self.verdict.value,
        }


def second_order_invertible(oracle: SmoothGameOracle, point, tol: float = 1e-8,
                            inv_tol: float = 1e-7) -> SecondOrderReport:
    """Second-order minimax test when the yy Hessian block is invertible.

    Invertible means ``|lambda|_min > inv_tol * (1 + ||H_yy||)``; otherwise
    the verdict is DegenerateYY and the envelope checks have to decide.
    """
    fo = first_order_check(oracle, point)
    if not fo.stationary:
        raise NotStationary(f"gradient norms ({fo.grad_x_norm:.3g}, {fo.grad_y_norm:.3g}) are not zero")
    x, y = oracle.split(point)
    H = oracle.hessian(x, y)
    n = oracle.n
    hxx, hxy, hyy = H[:n, :n], H[:n, n:], H[n:, n:]
    yy_def = la.definiteness(hyy, tol)
    w = la.sym_eig(hyy).eigenvalues
    gnorm = float(np.hypot(fo.grad_x_norm, fo.grad_y_norm))
    if np.min(np.abs(w)) <= inv_tol * (1.0 + np.linalg.norm(hyy, 2)):
        return SecondOrderReport(gnorm, yy_def, None, None, SecondOrderVerdict.DEGENERATE_YY)
    S = hxx - hxy @ np.linalg.solve(hyy, hxy.T)
    S = 0.5 * (S + S.T)
    s_def = la.definiteness(S, tol)
    if yy_def is la.Definiteness.NEGATIVE_DEFINITE and s_def is la.Definiteness.POSITIVE_DEFINITE:
        verdict = SecondOrderVerdict.SUFFICIENT_STRICT_LOCAL_MINIMAX
    elif yy_def is not la.Definiteness.NEGATIVE_DEFINITE or not s_def.is_psd:
        verdict = SecondOrderVerdict.NECESSARY_FAILS
    else:
        verdict = SecondOrderVerdict.NECESSARY_HOLDS
    return SecondOrderReport(gnorm, yy_def, S, s_def, verdict)


@dataclass
class SaddleCheck:
    status: str                   # "yes" / "no" / "inconclusive"
    witness: np.ndarray | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"verdict": self.status, "evidence": self.evidence}
        if self.witness is not None:
            d["witness"] = self.witness.tolist()
        return d


def _ball_samples(center: np.ndarray, radius: float, extra_dirs=None) -> np.ndarray:
    d = center.size
    per = 2 if d == 1 else 32
    pts = [_shell_points(center, radius * np.geomspace(1.0, 1e-3, 16), per)]
    if extra_dirs is not None and len(extra_dirs):
        r = radius * np.geomspace(1.0, 1e-3, 8)
        for v in extra_dirs:
            pts.append(center + np.outer(r, v))
            pts.append(center - np.outer(r, v))
    return np.concatenate(pts)


def local_saddle_check(oracle: SmoothGameOracle, point, radius: float = 0.1,
                       rel_tol: float = 1e-9) -> SaddleCheck:
    """Sampled test of ``f(x*, y) <= f(x*, y*) <= f(x, y*)`` near the point.

    Besides shells around each coordinate block, samples run along the
    eigenvectors of the diagonal Hessian blocks, where violations of
    curvature type are largest.
    """
    x, y = oracle.split(point)
    f0 = float(oracle.f(x, y))
    tol = rel_tol * (1.0 + abs(f0))
    H = oracle.hessian(x, y)
    n = oracle.n
    ux = la.sym_eig(H[:n, :n]).eigenvectors.T
    uy = la.sym_eig(H[n:, n:]).eigenvectors.T
    X = _ball_samples(x, radius, ux)
    Y = _ball_samples(y, radius, uy)
    fx = oracle.f(X, y[None, :])
    fy = oracle.f(x[None, :], Y)
    ix, iy = int(np.argmin(fx)), int(np.argmax(fy))
    drop = float(f0 - fx[ix])      # > 0 means x can lower f
    rise = float(fy[iy] - f0)      # > 0 means y can raise f
    ev = {"f": f0, "max_x_improvement": drop, "max_y_improvement": rise, "tol": tol}
    if drop > tol:
        return SaddleCheck("no", np.concatenate([X[ix], y]), ev)
    if rise > tol:
        return SaddleCheck("no", np.concatenate([x, Y[iy]]), ev)
    if drop <= tol / 10 and rise <= tol / 10:
        return SaddleCheck("yes", None, ev)
    return SaddleCheck("inconclusive", None, ev)
