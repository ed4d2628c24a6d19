"""Local exponential stability of gradient dynamics at stationary points.

Each simultaneous method has a closed-form condition on every eigenvalue
``lambda`` of ``H = [[-a1 f_xx, -a1 f_xy], [a2 f_yx, a2 f_yy]]``.  The
conditions are implemented as signed margins (positive means strictly
stable) so callers can tell how close a verdict is to the boundary.
Every verdict is cross-checked against the spectral radius of the full
update Jacobian.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import linalg_core as la
from .dynamics import AlgorithmSpec, Family
from .envelope import SmoothGameOracle
from .linalg_core import DimensionMismatch

MARGIN_BAND = 1e-6


class DegeneratePolynomial(ValueError):
    pass


class SpectrumFailure(RuntimeError):
    pass


class NotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class JacobianH:
    matrix: np.ndarray
    alpha1: float
    alpha2: float
    point: np.ndarray
    label: str = ""
    n: int = 0


def jacobian_H(oracle: SmoothGameOracle, point, alpha1: float, alpha2: float) -> JacobianH:
    x, y = oracle.split(point)
    Hs = oracle.hessian(x, y)
    n = oracle.n
    if Hs.shape != (n + oracle.m, n + oracle.m):
        raise DimensionMismatch("Hessian shape does not match the oracle")
    H = np.empty_like(Hs)
    H[:n] = -alpha1 * Hs[:n]
    H[n:] = alpha2 * Hs[n:]
    return JacobianH(H, alpha1, alpha2, np.asarray(point, dtype=float), oracle.label, n)


def hessian_blocks_H(A, B, C, alpha1: float, alpha2: float) -> np.ndarray:
    A, B, C = np.atleast_2d(A), np.atleast_2d(B), np.atleast_2d(C)
    return np.block([[-alpha1 * A, -alpha1 * C], [alpha2 * C.T, alpha2 * B]])


# ---------------------------------------------------------------------------
# root tests


def schur_real(coeffs) -> bool:
    """All roots of ``a0 z^n + ... + an`` strictly inside the unit disk.

    Decided by the determinants of ``P_k P_k^H - Q_k^H Q_k`` for k = 1..n,
    with ``[P_k]_ij = a_{i-j}`` (i >= j) and ``[Q_k]_ij = a_{n-j+i}`` (i <= j).
    Complex coefficients are accepted as well.
    """
    a = np.atleast_1d(np.asarray(coeffs))
    if a.size == 0 or a[0] == 0:
        raise DegeneratePolynomial("leading coefficient must be nonzero")
    a = a.astype(complex) / a[0]
    n = a.size - 1
    if n == 0:
        return True
    P = np.zeros((n, n), dtype=complex)
    Q = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            if i >= j:
                P[i, j] = a[i - j]
            if i <= j:
                Q[i, j] = a[n - j + i]
    M = P @ P.conj().T - Q.conj().T @ Q
    for k in range(1, n + 1):
        if np.linalg.det(M[:k, :k]).real <= 0:
            return False
    return True


def schur_complex_quadratic(a: complex, b: complex) -> bool:
    """Both roots of ``z^2 + a z + b`` strictly inside the unit disk."""
    a, b = complex(a), complex(b)
    ab = abs(b)
    return ab < 1 and (1 - ab ** 2) ** 2 + 2 * (a * a * b.conjugate()).real > abs(a) ** 2 * (1 + ab ** 2)


def roots_inside(coeffs) -> tuple[bool, float]:
    """Companion-matrix root test; returns (all inside, largest modulus)."""
    r = la.companion_roots(coeffs)
    rho = float(np.max(np.abs(r))) if r.size else 0.0
    return rho < 1, rho


# ---------------------------------------------------------------------------
# per-eigenvalue margins


def margin_gda(lam):
    return 1 - np.abs(1 + lam)


def margin_eg(lam, beta):
    if np.isinf(beta):
        return -np.real(lam + lam * lam)
    return 1 - np.abs(1 + (lam + lam * lam) / beta)


def margin_ogd(lam, k):
    r2 = np.abs(lam) ** 2
    first = 1 - np.sqrt(r2)
    if k == 1:
        return np.minimum(first, np.abs(lam - 0.5) - 0.5)
    second = 2 * np.real(lam) * (k * r2 - 1) - r2 * (k - 3 + (k + 1) * r2)
    return np.minimum(first, second)


def margin_hb(lam, beta):
    if abs(beta) >= 1:
        return np.full(np.shape(lam), 1 - abs(beta), dtype=float)
    u, v = np.real(lam), np.imag(lam)
    ell = (u + beta + 1) ** 2 / (beta + 1) ** 2 + v ** 2 / (beta - 1) ** 2
    return np.minimum(1 - abs(beta), 1 - ell)


def margin_nag(lam, beta):
    one = np.abs(1 + lam)
    with np.errstate(divide="ignore"):
        lhs = np.where(one > 0, 1.0 / np.where(one > 0, one, 1.0) ** 2, np.inf)
    rhs = 1 + 2 * beta * (beta ** 2 - beta - 1) * np.real(lam) + beta ** 2 * np.abs(lam) ** 2 * (1 + 2 * beta)
    return np.minimum(lhs - rhs, 1 - abs(beta) * one)


def stable_gda(lam) -> bool:
    return bool(margin_gda(complex(lam)) > 0)


def stable_eg(lam, beta: float) -> bool:
    """EG with ratio ``beta``; ``beta = inf`` selects the limiting region ``Re(lam + lam^2) < 0``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return bool(margin_eg(complex(lam), beta) > 0)


def stable_eg_limit(lam) -> bool:
    return stable_eg(lam, math.inf)


def stable_ogd(lam, k: float) -> bool:
    """OGD with coefficient ``k > 1``; ``k = 1`` selects the ``k -> 1+`` limit region."""
    if k < 1:
        raise ValueError("OGD needs k > 1 (k = 1 selects the limit region)")
    return bool(margin_ogd(complex(lam), k) > 0)


def stable_ogd_limit(lam) -> bool:
    return stable_ogd(lam, 1.0)


def stable_hb(lam, beta: float) -> bool:
    return bool(margin_hb(complex(lam), beta) > 0)


def stable_nag(lam, beta: float) -> bool:
    return bool(margin_nag(complex(lam), beta) > 0)


def char_poly(family: Family, lam: complex, param: float) -> np.ndarray:
    """Per-eigenvalue characteristic polynomial of the linearized update."""
    lam = complex(lam)
    if family is Family.GDA:
        return np.array([1.0, -(1 + lam)])
    if family is Family.EG:
        return np.array([1.0, -(1 + (lam + lam * lam) / param)])
    if family is Family.OGD:
        return np.array([1.0, -(1 + param * lam), lam])
    if family is Family.HB:
        return np.array([1.0, -(param + 1 + lam), param])
    if family is Family.NAG:
        return np.array([1.0, -(1 + param) * (1 + lam), param * (1 + lam)])
    raise ValueError(f"no scalar characteristic polynomial for {family}")


def margin(family: Family, lam, param: float | None = None):
    if family is Family.GDA:
        return margin_gda(lam)
    if family is Family.EG:
        return margin_eg(lam, param)
    if family is Family.OGD:
        return margin_ogd(lam, param)
    if family is Family.HB:
        return margin_hb(lam, param)
    if family is Family.NAG:
        return margin_nag(lam, param)
    if family is Family.PAST_EG:
        return margin_ogd(lam, 1 + 1 / param)
    raise ValueError(family)


def spec_param(spec: AlgorithmSpec) -> float | None:
    fam = spec.family
    if fam is Family.EG:
        return math.inf if spec.limit else spec.beta
    if fam is Family.OGD:
        return 1.0 if spec.limit else spec.k
    if fam in (Family.HB, Family.NAG, Family.PAST_EG):
        return spec.beta
    return None


# ---------------------------------------------------------------------------
# update Jacobians


def update_jacobian(spec: AlgorithmSpec, H: np.ndarray) -> np.ndarray:
    """Jacobian of one update in the state layout used by ``dynamics``."""
    N = H.shape[0]
    I = np.eye(N)
    Z = np.zeros((N, N))
    fam = spec.family
    if spec.limit:
        raise ValueError("limit regimes have no finite update map")
    if fam is Family.GDA:
        return I + H
    if fam is Family.EG:
        return I + H / spec.beta + H @ H / spec.beta
    if fam is Family.HB:
        return np.block([[(1 + spec.beta) * I + H, -spec.beta * I], [I, Z]])
    if fam is Family.NAG:
        return np.block([[(1 + spec.beta) * (I + H), -spec.beta * (I + H)], [I, Z]])
    if fam is Family.OGD:
        return np.block([[I + spec.k * H, -H], [I, Z]])
    if fam is Family.PAST_EG:
        return np.block([[I + H / spec.beta, H @ H / spec.beta], [I, H]])
    raise AssertionError(fam)


def alternating_jacobian(spec: AlgorithmSpec, H: np.ndarray, n: int) -> np.ndarray:
    """Explicit update Jacobian of alternating GDA (state z) or OGD (state (z_t, z_{t-1}))."""
    N = H.shape[0]
    Hxx, Hxy = H[:n, :n], H[:n, n:]
    Hyx, Hyy = H[n:, :n], H[n:, n:]
    Ix, Iy = np.eye(n), np.eye(N - n)
    if spec.family is Family.GDA:
        rx = np.hstack([Ix + Hxx, Hxy])
        ry = Hyx @ rx + np.hstack([np.zeros_like(Hyx), Iy + Hyy])
        return np.vstack([rx, ry])
    if spec.family is Family.OGD:
        k = spec.k
        Zx = np.zeros_like(Hyx)
        rx = np.hstack([Ix + k * Hxx, k * Hxy, -Hxx, -Hxy])
        ry = k * Hyx @ rx + np.hstack([-Hyx, Iy + k * Hyy, Zx, -Hyy])
        top = np.vstack([rx, ry])
        return np.vstack([top, np.hstack([np.eye(N), np.zeros((N, N))])])
    raise ValueError("alternating updates exist for GDA and OGD only")


def _poly_by_dft(fn: Callable[[complex], complex], degree: int) -> np.ndarray:
    """Coefficients (highest first) of a polynomial of known degree from its values."""
    M = degree + 1
    w = np.exp(2j * np.pi * np.arange(M) / M)
    vals = np.array([fn(p) for p in w])
    asc = np.fft.fft(vals) / M
    return asc[::-1]


def alternating_char_poly(spec: AlgorithmSpec, A, B, C) -> np.ndarray:
    """Characteristic polynomial of alternating GDA (degree N) or OGD (degree 2N)."""
    A, B, C = np.atleast_2d(A), np.atleast_2d(B), np.atleast_2d(C)
    n, m = A.shape[0], B.shape[0]
    N = n + m
    a1, a2 = spec.alpha1, spec.alpha2

    def M(lam):
        return np.block([[-a1 * A, -a1 * C], [a2 * lam * C.T, a2 * B]])

    I = np.eye(N)
    if spec.family is Family.GDA:
        coeffs = _poly_by_dft(lambda l: np.linalg.det((l - 1) * I - M(l)), N)
    elif spec.family is Family.OGD:
        k = spec.k
        coeffs = _poly_by_dft(lambda l: np.linalg.det((l - 1) * l * I - (k * l - 1) * M(l)), 2 * N)
    else:
        raise ValueError("alternating updates exist for GDA and OGD only")
    coeffs = coeffs.real
    coeffs[np.abs(coeffs) < 1e-13 * np.max(np.abs(coeffs))] = 0.0
    return coeffs / coeffs[0]


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class StabilityVerdict:
    eigenvalues: np.ndarray
    per_eigenvalue_pass: list[bool]
    margins: list[float]
    stable: bool
    spectral_radius_of_update: float | None
    method: str                      # "Predicate" / "AugmentedJacobian" / "Both"
    agreement: bool
    marginal: bool
    spec: str = ""
    update_roots: np.ndarray | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "spec": self.spec,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "per_eigenvalue_pass": [bool(b) for b in self.per_eigenvalue_pass],
            "margins": [float(x) for x in self.margins],
            "marginal_flags": [abs(x) <= MARGIN_BAND for x in self.margins],
            "stable": bool(self.stable),
            "spectral_radius_of_update": self.spectral_radius_of_update,
            "method": self.method,
            "agreement": bool(self.agreement),
            "marginal": bool(self.marginal),
        }
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def stability_from_H(spec: AlgorithmSpec, H: np.ndarray, n: int | None = None,
                     blocks: tuple | None = None) -> StabilityVerdict:
    """Verdict for a given ``H`` (``n`` = size of the x block, needed for alternating modes)."""
    try:
        lam = la.general_eig(H)
    except la.NonConvergence as exc:
        raise SpectrumFailure(str(exc)) from exc
    lam = np.sort_complex(lam)
    if spec.alternating:
        if n is None:
            raise ValueError("alternating modes need the x-block size")
        if blocks is None:
            a1, a2 = spec.alpha1, spec.alpha2
            blocks = (-H[:n, :n] / a1, H[n:, n:] / a2, -H[:n, n:] / a1)
        A, B, C = blocks
        coeffs = alternating_char_poly(spec, A, B, C)
        pred = schur_real(coeffs)
        roots = la.companion_roots(coeffs)
        margins = [1 - float(abs(r)) for r in roots]
        J = alternating_jacobian(spec, H, n)
        rho = la.spectral_radius(J)
        marginal = any(abs(x) <= MARGIN_BAND for x in margins) or abs(rho - 1) <= MARGIN_BAND
        agree = (pred == (rho < 1)) or marginal
        return StabilityVerdict(lam, [x > 0 for x in margins], margins, pred, rho, "Both", agree,
                                marginal, spec.describe(), roots)
    param = spec_param(spec)
    margins = [float(margin(spec.family, complex(z), param)) for z in lam]
    pred = all(x > 0 for x in margins)
    marginal = any(abs(x) <= MARGIN_BAND for x in margins)
    if spec.limit:
        return StabilityVerdict(lam, [x > 0 for x in margins], margins, pred, None, "Predicate", True,
                                marginal, spec.describe(),
                                notes=["limit regime: no finite update map to cross-check"])
    J = update_jacobian(spec, H)
    rho = la.spectral_radius(J)
    marginal = marginal or abs(rho - 1) <= MARGIN_BAND
    agree = (pred == (rho < 1)) or marginal
    return StabilityVerdict(lam, [x > 0 for x in margins], margins, pred, rho, "Both", agree, marginal,
                            spec.describe())


def exponential_stability(spec: AlgorithmSpec, oracle: SmoothGameOracle, point,
                          stationary_tol: float = 1e-8) -> StabilityVerdict:
    from .optimality import first_order_check

    fo = first_order_check(oracle, point, stationary_tol)
    notes = []
    if not fo.stationary:
        msg = "point is not stationary; the linearization is not a fixed-point Jacobian"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    Hj = jacobian_H(oracle, point, spec.alpha1, spec.alpha2)
    x, y = oracle.split(point)
    Hs = oracle.hessian(x, y)
    n = oracle.n
    blocks = (Hs[:n, :n], Hs[n:, n:], Hs[:n, n:])
    v = stability_from_H(spec, Hj.matrix, n, blocks)
    v.notes.extend(notes)
    return v


# ---------------------------------------------------------------------------
# regions in the lambda plane


DEFAULT_WINDOW = (-2.5, 0.5, -1.5, 1.5)


def _threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("MINIMAXLAB_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass
class Raster:
    re: np.ndarray
    im: np.ndarray
    mask: np.ndarray         # (len(im), len(re)) strictly stable pixels
    margin: np.ndarray       # signed margins


def region_raster(family: Family | str, param: float | None = None, window=DEFAULT_WINDOW,
                  resolution=(801, 801), threads: int | None = None) -> Raster:
    """Per-pixel stability predicate over a rectangle of the lambda plane.

    For EG ``param = inf`` is the beta -> inf limit; for OGD ``param = 1``
    is the k -> 1+ limit.
    """
    fam = Family.parse(family) if isinstance(family, str) else family
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nre, nim = resolution
    if nre < 2 or nim < 2:
        raise ValueError("resolution must be at least 2 per axis")
    re = np.linspace(window[0], window[1], nre)
    im = np.linspace(window[2], window[3], nim)

    def row(j):
        return margin(fam, re + 1j * im[j], param)

    with ThreadPoolExecutor(_threads(threads)) as ex:
        rows = list(ex.map(row, range(nim)))
    mg = np.vstack([np.broadcast_to(r, re.shape) for r in rows]).astype(float)
    return Raster(re, im, mg > 0, mg)


RASTER_COLUMNS = ("gda", "eg_b1", "ogd_k2", "hb_b", "nag_b")


def raster_table(window=DEFAULT_WINDOW, resolution=(801, 801), momentum_beta: float = 0.4,
                 threads: int | None = None) -> dict[str, Raster]:
    return {
        "gda": region_raster(Family.GDA, None, window, resolution, threads),
        "eg_b1": region_raster(Family.EG, 1.0, window, resolution, threads),
        "ogd_k2": region_raster(Family.OGD, 2.0, window, resolution, threads),
        "hb_b": region_raster(Family.HB, momentum_beta, window, resolution, threads),
        "nag_b": region_raster(Family.NAG, momentum_beta, window, resolution, threads),
    }


def write_raster_csv(path_or_fh, rasters: dict[str, Raster]) -> None:
    names = list(rasters)
    first = rasters[names[0]]
    own = isinstance(path_or_fh, (str, os.PathLike))
    fh = open(path_or_fh, "w", newline="") if own else path_or_fh
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re", "im"] + names)
        masks = [rasters[k].mask for k in names]
        for j, y in enumerate(first.im):
            for i, x in enumerate(first.re):
                w.writerow([f"{x:.17g}", f"{y:.17g}"] + [int(mk[j, i]) for mk in masks])
    finally:
        if own:
            fh.close()


def nesting_check(family: Family | str, param_pairs: Sequence[tuple[float, float]],
                  sample_count: int = 10_000, seed: int = 42, radius: float = 3.0) -> tuple[bool, int]:
    """Check region nesting on random lambda samples.

    EG pairs ``(b1, b2)`` with ``b1 > b2``: stable at b2 implies stable at b1.
    OGD pairs ``(k1, k2)`` with ``k1 > k2``: stable at k1 implies stable at k2.
    Samples whose margin lies inside the boundary band are skipped.
    """
    fam = Family.parse(family) if isinstance(family, str) else family
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-radius, radius, sample_count) + 1j * rng.uniform(-radius, radius, sample_count)
    bad = 0
    for p1, p2 in param_pairs:
        if not p1 > p2:
            raise ValueError("pairs must be ordered with the first parameter larger")
        if fam is Family.EG:
            small, big = margin_eg(lam, p2), margin_eg(lam, p1)
        elif fam is Family.OGD:
            small, big = margin_ogd(lam, p1), margin_ogd(lam, p2)
        else:
            raise ValueError("nesting is stated for EG and OGD")
        ok = (np.abs(small) > MARGIN_BAND) & (np.abs(big) > MARGIN_BAND)
        bad += int(np.sum(ok & (small > 0) & (big <= 0)))
    return bad == 0, bad


# ---------------------------------------------------------------------------
# spectra at saddle and minimax points


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real: float
    saddle_bound_holds: bool | None


def saddle_spectrum_check(oracle: SmoothGameOracle, point, alpha1: float, alpha2: float,
                          tol: float = 1e-9, assert_saddle: bool = True) -> SpectrumReport:
    """Largest real part of ``Sp(H)``; at local saddle points it is at most 0."""
    lam = la.general_eig(jacobian_H(oracle, point, alpha1, alpha2).matrix)
    mr = float(np.max(lam.real))
    return SpectrumReport(lam, mr, (mr <= tol) if assert_saddle else None)


def loc_sadl_game(z: complex, alpha1: float = 1.0, alpha2: float = 1.0):
    """1+1 quadratic with a saddle at the origin whose ``H_{a1,a2}`` has eigenvalue ``z``.

    Needs ``Re(z) <= 0``.
    """
    from .quadratic_games import QuadraticGame

    z = complex(z)
    if z.real > 0:
        raise ValueError("local saddle spectra lie in the closed left half plane")
    gamma = alpha2 / alpha1
    w = z / alpha1
    u, v = -w.real, abs(w.imag)
    return QuadraticGame.one_dim(u, -u / gamma, v / math.sqrt(gamma))


def loc_min_max_game(z: complex, alpha1: float = 1.0, alpha2: float = 1.0):
    """1+1 quadratic with a local minimax point at the origin and ``z`` in ``Sp(H_{a1,a2})``.

    Solves ``a1 a - a2 b = -2u`` and ``a1 a2 (c^2 - a b) = u^2 + v^2`` with
    ``b = -s < 0``; the reduced curvature ``a + c^2 / s`` is then
    ``(u^2 + v^2) / (a1 a2 s) >= 0``.
    """
    from .quadratic_games import QuadraticGame

    z = complex(z)
    u, v = z.real, z.imag
    s = max(1.0, -2 * u / alpha2)
    a = (-2 * u - alpha2 * s) / alpha1
    c2 = (u * u + v * v) / (alpha1 * alpha2) - a * s
    return QuadraticGame.one_dim(a, -s, math.sqrt(max(c2, 0.0)))


def strict_minimax_two_timescale_search(oracle: SmoothGameOracle, point,
                                        gamma_grid=None, alpha_grid=None) -> tuple[float, float]:
    """Find ``(gamma0, alpha0)`` with EG(beta=1) and OGD(k=2) stable on the grid beyond them.

    Stable means every sampled ``gamma >= gamma0`` and ``alpha2 <= alpha0``
    (with ``alpha1 = alpha2 / gamma``) gives stable verdicts for both.
    """
    from .optimality import SecondOrderVerdict, second_order_invertible

    rep = second_order_invertible(oracle, point)
    if rep.verdict is not SecondOrderVerdict.SUFFICIENT_STRICT_LOCAL_MINIMAX:
        raise ValueError(f"point is not a strict local minimax point ({rep.verdict.value})")
    gammas = np.sort(np.asarray(gamma_grid if gamma_grid is not None else np.geomspace(1, 1e3, 13)))
    alphas = np.sort(np.asarray(alpha_grid if alpha_grid is not None else np.geomspace(1e-3, 1, 13)))
    x, y = oracle.split(point)
    Hs = oracle.hessian(x, y)
    n = oracle.n
    ok = np.zeros((len(gammas), len(alphas)), dtype=bool)
    for i, g in enumerate(gammas):
        for j, a2 in enumerate(alphas):
            a1 = a2 / g
            H = np.vstack([-a1 * Hs[:n], a2 * Hs[n:]])
            lam = la.general_eig(H)
            ok[i, j] = bool(np.all(margin_eg(lam, 1.0) > 0) and np.all(margin_ogd(lam, 2.0) > 0))
    for i in range(len(gammas)):
        best = None
        for j in range(len(alphas)):
            if ok[i:, : j + 1].all():
                best = j
        if best is not None:
            return float(gammas[i]), float(alphas[best])
    raise NotFound("no stable (gamma, alpha) cell on the grid")
