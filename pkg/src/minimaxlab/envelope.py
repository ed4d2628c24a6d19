"""Numeric local envelopes, active sets and Danskin derivatives.

Everything here is sized for desk-scale fixtures: at most two dimensions
on the inner (maximizing) side unless the oracle brings its own inner
maximizer.  Inner maxima are found by a dense grid followed by projected
ascent, so every reported envelope value is an attained payoff value and
therefore a lower bound on the true maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Sequence

import numpy as np

from .linalg_core import DimensionMismatch, sym_eig


class UnsupportedDim(ValueError):
    pass


class NotLocalMax(ValueError):
    pass


def _stack(*cols):
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


@dataclass(frozen=True)
class SmoothGameOracle:
    """A twice-differentiable payoff ``f(x, y)``.

    ``f``, ``grad_x`` and ``grad_y`` must broadcast over leading axes of
    ``x`` (shape ``(..., n)``) and ``y`` (shape ``(..., m)``).  The Hessian
    blocks are evaluated at single points.  ``inner_max``, if given, maps
    ``(x, Neighborhood)`` to ``(value, argmax_points)`` and lifts the
    ``m <= 2`` restriction.
    """

    n: int
    m: int
    f: Callable
    grad_x: Callable
    grad_y: Callable
    hess_xx: Callable
    hess_xy: Callable
    hess_yy: Callable
    label: str = ""
    inner_max: Callable | None = None

    def value(self, x, y):
        return self.f(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def hessian(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        hxx = np.asarray(self.hess_xx(x, y), dtype=float).reshape(self.n, self.n)
        hxy = np.asarray(self.hess_xy(x, y), dtype=float).reshape(self.n, self.m)
        hyy = np.asarray(self.hess_yy(x, y), dtype=float).reshape(self.m, self.m)
        return np.block([[hxx, hxy], [hxy.T, hyy]])

    def mirrored(self) -> "SmoothGameOracle":
        """``g(y, x) = -f(x, y)``: the maximizing player becomes the minimizer."""
        o = self
        return SmoothGameOracle(
            n=o.m, m=o.n,
            f=lambda y, x: -o.f(x, y),
            grad_x=lambda y, x: -o.grad_y(x, y),
            grad_y=lambda y, x: -o.grad_x(x, y),
            hess_xx=lambda y, x: -np.asarray(o.hess_yy(x, y), dtype=float).reshape(o.m, o.m),
            hess_xy=lambda y, x: -np.asarray(o.hess_xy(x, y), dtype=float).reshape(o.n, o.m).T,
            hess_yy=lambda y, x: -np.asarray(o.hess_xx(x, y), dtype=float).reshape(o.n, o.n),
            label=f"mirror({o.label})",
        )

    def split(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float).reshape(-1)
        if z.size != self.n + self.m:
            raise DimensionMismatch(f"point must have {self.n + self.m} entries, got {z.size}")
        return z[: self.n], z[self.n:]


def quadratic_oracle(game, label: str = "") -> SmoothGameOracle:
    """Wrap a :class:`QuadraticGame` as a smooth oracle."""
    from . import quadratic_games as qg

    return SmoothGameOracle(
        n=game.n, m=game.m,
        f=lambda x, y: qg.evaluate(game, x, y),
        grad_x=lambda x, y: qg.grad(game, x, y)[0],
        grad_y=lambda x, y: qg.grad(game, x, y)[1],
        hess_xx=lambda x, y: game.A,
        hess_xy=lambda x, y: game.C,
        hess_yy=lambda x, y: game.B,
        label=label or "quadratic",
    )


@dataclass(frozen=True)
class Neighborhood:
    """A ball of radius ``radius`` around ``center``.

    ``shape`` is ``"l2"``, ``"linf"`` or ``"eigen"``; the eigenspace box
    is aligned with the eigenvectors of ``matrix``.
    """

    center: np.ndarray
    radius: float
    shape: str = "linf"
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise ValueError("radius must be finite and non-negative")
        if self.shape not in ("l2", "linf", "eigen"):
            raise ValueError(f"unknown neighborhood shape {self.shape!r}")
        if self.shape == "eigen":
            if self.matrix is None:
                raise ValueError("eigenspace neighborhood needs a reference matrix")
            object.__setattr__(self, "_U", sym_eig(self.matrix).eigenvectors)

    @property
    def dim(self) -> int:
        return self.center.size

    def with_radius(self, r: float) -> "Neighborhood":
        return replace(self, radius=float(r))

    def _frame(self):
        return self._U if self.shape == "eigen" else None

    def project(self, y: np.ndarray) -> np.ndarray:
        d = y - self.center
        r = self.radius
        if self.shape == "linf" or self.dim == 1:
            return self.center + np.clip(d, -r, r)
        if self.shape == "l2":
            nrm = np.linalg.norm(d, axis=-1, keepdims=True)
            return self.center + d * np.minimum(1.0, r / np.maximum(nrm, 1e-300))
        U = self._frame()
        return self.center + np.clip(d @ U, -r, r) @ U.T

    def contains(self, y, slack: float = 1e-12) -> bool:
        d = np.asarray(y, dtype=float) - self.center
        tol = slack * (1.0 + self.radius)
        if self.shape == "l2":
            return bool(np.linalg.norm(d) <= self.radius + tol)
        if self.shape == "eigen":
            d = d @ self._frame()
        return bool(np.max(np.abs(d)) <= self.radius + tol) if d.size else True

    def grid(self, res: int) -> np.ndarray:
        """Points of a symmetric tensor grid clipped to the neighborhood."""
        if self.dim > 2:
            raise UnsupportedDim("grid search is limited to two inner dimensions")
        h = (res - 1) // 2
        u = (np.arange(2 * h + 1) - h) / h * self.radius
        if self.dim == 1:
            return self.center + u[:, None]
        U1, U2 = np.meshgrid(u, u, indexing="ij")
        pts = np.stack([U1.ravel(), U2.ravel()], axis=-1)
        if self.shape == "l2":
            pts = pts[np.einsum("ij,ij->i", pts, pts) <= self.radius ** 2 * (1 + 1e-12)]
        elif self.shape == "eigen":
            pts = pts @ self._frame().T
        return self.center + pts


@dataclass(frozen=True)
class EnvelopeConfig:
    grid: int = 401
    ascent_steps: int = 50
    restarts: int = 8
    step_frac: float = 0.1
    dedup: float = 1e-3          # relative to the radius
    active_tol: float = 1e-13    # relative to 1 + |envelope|
    chunk: int = 4_000_000       # max payoff evaluations per batch


DEFAULT_CONFIG = EnvelopeConfig()


@dataclass
class InnerMax:
    value: np.ndarray        # (k,)
    argmax: np.ndarray       # (k, m)
    grid_pts: np.ndarray     # (N, m)
    grid_vals: np.ndarray    # (k, N)
    refined: np.ndarray      # (k, restarts, m)
    refined_vals: np.ndarray  # (k, restarts)


def _ascent(oracle, X, Y, nbhd, cfg):
    """Projected normalized-gradient ascent; X (k, n), Y (k, r, m)."""
    Xb = X[:, None, :]
    vals = oracle.f(Xb, Y)
    step = np.full(vals.shape, cfg.step_frac * nbhd.radius)
    for _ in range(cfg.ascent_steps):
        g = oracle.grad_y(Xb, Y)
        gn = np.linalg.norm(g, axis=-1, keepdims=True)
        direction = np.where(gn > 0, g / np.where(gn > 0, gn, 1.0), 0.0)
        cand = nbhd.project(Y + step[..., None] * direction)
        cv = oracle.f(Xb, cand)
        better = cv > vals
        Y = np.where(better[..., None], cand, Y)
        vals = np.where(better, cv, vals)
        step = np.where(better, step * 1.2, step * 0.5)
    return Y, vals


def inner_max_batch(oracle: SmoothGameOracle, X, nbhd: Neighborhood,
                    cfg: EnvelopeConfig = DEFAULT_CONFIG) -> InnerMax:
    """Inner maximization over ``nbhd`` for every row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != oracle.n or nbhd.dim != oracle.m:
        raise DimensionMismatch("point or neighborhood dimension does not match the oracle")
    k = X.shape[0]
    if nbhd.radius == 0:
        c = np.broadcast_to(nbhd.center, (k, oracle.m)).copy()
        v = np.asarray(oracle.f(X, c), dtype=float).reshape(k)
        return InnerMax(v, c, nbhd.center[None, :], v[:, None], c[:, None, :], v[:, None])
    if oracle.m > 2:
        if oracle.inner_max is None:
            raise UnsupportedDim(f"inner dimension {oracle.m} needs a registered inner maximizer")
        vals, arg = zip(*(oracle.inner_max(x, nbhd) for x in X))
        arg = np.array([np.atleast_2d(a)[0] for a in arg])
        v = np.array(vals, dtype=float)
        return InnerMax(v, arg, arg[:1], v[:, None], arg[:, None, :], v[:, None])
    pts = nbhd.grid(cfg.grid)
    rows = max(1, cfg.chunk // len(pts))
    gv = np.empty((k, len(pts)))
    for s in range(0, k, rows):
        gv[s:s + rows] = oracle.f(X[s:s + rows, None, :], pts[None, :, :])
    r = min(cfg.restarts, len(pts))
    top = np.argpartition(-gv, r - 1, axis=1)[:, :r]
    Y0 = pts[top]
    Y, rv = _ascent(oracle, X, Y0, nbhd, cfg)
    best_grid = gv.max(axis=1)
    best_ref = rv.max(axis=1)
    use_ref = best_ref > best_grid
    arg = np.where(use_ref[:, None], Y[np.arange(k), rv.argmax(axis=1)], pts[gv.argmax(axis=1)])
    return InnerMax(np.maximum(best_grid, best_ref), arg, pts, gv, Y, rv)


def local_envelope(oracle: SmoothGameOracle, x, nbhd: Neighborhood,
                   cfg: EnvelopeConfig = DEFAULT_CONFIG) -> float:
    """``max_{y in nbhd} f(x, y)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(inner_max_batch(oracle, x[None, :], nbhd, cfg).value[0])


def envelope_values(oracle, X, nbhd, cfg: EnvelopeConfig = DEFAULT_CONFIG) -> np.ndarray:
    return inner_max_batch(oracle, X, nbhd, cfg).value


def lower_envelope(oracle: SmoothGameOracle, y, nbhd: Neighborhood,
                   cfg: EnvelopeConfig = DEFAULT_CONFIG) -> float:
    """``min_{x in nbhd} f(x, y)``."""
    return -local_envelope(oracle.mirrored(), y, nbhd, cfg)


@dataclass
class ActiveSetSample:
    points: np.ndarray
    values: np.ndarray
    tol: float


def active_set(oracle: SmoothGameOracle, x_star, nbhd: Neighborhood, tol: float | None = None,
               cfg: EnvelopeConfig = DEFAULT_CONFIG) -> ActiveSetSample:
    """Sampled maximizers of ``f(x_star, .)`` over ``nbhd``."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    im = inner_max_batch(oracle, x_star[None, :], nbhd, cfg)
    best = float(im.value[0])
    if tol is None:
        tol = cfg.active_tol * (1.0 + abs(best))
    pts = np.concatenate([im.grid_pts, im.refined[0]])
    vals = np.concatenate([im.grid_vals[0], im.refined_vals[0]])
    keep = vals >= best - tol
    pts, vals = pts[keep], vals[keep]
    # greedy dedup, best values first
    order = np.argsort(-vals, kind="stable")
    res = cfg.dedup * max(nbhd.radius, 1e-300)
    chosen: list[int] = []
    for i in order:
        if all(np.max(np.abs(pts[i] - pts[j])) > res for j in chosen):
            chosen.append(i)
            if len(chosen) >= 5000:
                break
    chosen.sort(key=lambda i: tuple(pts[i]))
    return ActiveSetSample(pts[chosen], vals[chosen], float(tol))


def danskin_dd(oracle: SmoothGameOracle, x_star, nbhd: Neighborhood, t,
               cfg: EnvelopeConfig = DEFAULT_CONFIG) -> float:
    """Directional derivative of the local envelope at ``x_star`` along ``t``."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    act = active_set(oracle, x_star, nbhd, cfg=cfg)
    g = oracle.grad_x(x_star[None, :], act.points)
    return float(np.max(g @ t))


def envelope_difference_quotient(oracle, x_star, nbhd, t, alphas=(1e-2, 1e-3, 1e-4),
                                 cfg: EnvelopeConfig = DEFAULT_CONFIG) -> tuple[float, np.ndarray]:
    """One-sided difference quotients of the envelope and their linear extrapolation to 0."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    alphas = np.asarray(alphas, dtype=float)
    X = np.vstack([x_star] + [x_star + a * t for a in alphas])
    env = envelope_values(oracle, X, nbhd, cfg)
    q = (env[1:] - env[0]) / alphas
    if len(alphas) == 1:
        return float(q[0]), q
    slope, intercept = np.polyfit(alphas, q, 1)
    return float(intercept), q


def default_directions(n: int, count: int = 16) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    rng = np.random.default_rng(0)
    d = rng.standard_normal((count * n, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _shell_points(center: np.ndarray, radii, count: int, rng=None) -> np.ndarray:
    """Points on spheres of the given radii (``count`` per sphere when dim >= 2)."""
    d = center.size
    if d == 1:
        dirs = np.array([[1.0], [-1.0]])
    elif d == 2:
        th = 2 * np.pi * (np.arange(count) + 0.5) / count
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    else:
        rng = rng or np.random.default_rng(0)
        dirs = rng.standard_normal((count, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.concatenate([center + r * dirs for r in radii])


@dataclass
class LocalMaxCheck:
    status: str              # "yes" / "no" / "inconclusive"
    excess: float            # max sampled f(x*, y) - f(x*, y*)
    tol: float
    witness: np.ndarray | None = None


def check_local_max(oracle: SmoothGameOracle, x_star, y_star, radius: float = 0.1,
                    samples: int = 256, rel_tol: float = 1e-9) -> LocalMaxCheck:
    """Sampled test that ``y_star`` locally maximizes ``f(x_star, .)``."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    m = y_star.size
    if m == 1:
        n_r, per = samples // 2, 2
    elif m == 2:
        n_r, per = 16, samples // 16
    else:
        n_r, per = 8, samples // 8
    radii = radius * np.geomspace(1.0, 1e-3, n_r)
    Y = _shell_points(y_star, radii, per)
    f0 = float(oracle.f(x_star, y_star))
    vals = oracle.f(x_star[None, :], Y)
    tol = rel_tol * (1.0 + abs(f0))
    i = int(np.argmax(vals))
    excess = float(vals[i] - f0)
    if excess <= tol / 10:
        return LocalMaxCheck("yes", excess, tol)
    if excess > tol:
        return LocalMaxCheck("no", excess, tol, Y[i])
    return LocalMaxCheck("inconclusive", excess, tol, Y[i])


@dataclass
class CriticalPartition:
    positive: list[np.ndarray]
    critical: list[np.ndarray]
    dd: dict[float, np.ndarray]      # epsilon -> derivative per direction
    directions: np.ndarray
    monotone: bool


def critical_directions(oracle: SmoothGameOracle, x_star, y_star, eps_list=(0.5, 0.25, 0.1),
                        directions=None, tol: float = 1e-5, shape: str = "linf",
                        cfg: EnvelopeConfig = DEFAULT_CONFIG) -> CriticalPartition:
    """Split unit directions into those with positive envelope slope and critical ones."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    lm = check_local_max(oracle, x_star, y_star, radius=max(eps_list))
    if lm.status == "no":
        raise NotLocalMax(f"y* is not a local maximizer; witness {lm.witness}")
    if directions is None:
        directions = default_directions(oracle.n)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    eps_sorted = sorted(float(e) for e in eps_list)
    dd: dict[float, np.ndarray] = {}
    for e in eps_sorted:
        nb = Neighborhood(y_star, e, shape)
        act = active_set(oracle, x_star, nb, cfg=cfg)
        g = oracle.grad_x(x_star[None, :], act.points)
        dd[e] = np.max(g @ directions.T, axis=0)
    monotone = all(
        np.all(dd[a] <= dd[b] + tol) for a, b in zip(eps_sorted, eps_sorted[1:])
    )
    crit_mask = np.all(np.stack([dd[e] for e in eps_sorted]) < tol, axis=0)
    positive = [directions[i] for i in range(len(directions)) if not crit_mask[i]]
    critical = [directions[i] for i in range(len(directions)) if crit_mask[i]]
    return CriticalPartition(positive, critical, dd, directions, bool(monotone))


def second_order_necessary_term(oracle: SmoothGameOracle, x_star, y_star, t,
                                shells=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                                angles: int = 64, scale: float = 1.0, finest: int = 2) -> float:
    """``t' f_xx t`` plus half the shell approximation of the limsup term.

    The limsup over ``z -> y*`` of ``max(<f_x(x*, z), t>, 0)^2 / (f(x*, y*) - f(x*, z))``
    is replaced by its maximum over the ``finest`` smallest shells.  A
    difference at rounding level counts as zero, and the ratio is then 0.
    """
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    try:
        hxx = np.asarray(oracle.hess_xx(x_star, y_star), dtype=float).reshape(oracle.n, oracle.n)
        f0 = float(oracle.f(x_star, y_star))
        radii = sorted((scale * s for s in shells), reverse=True)[-finest:]
        Z = _shell_points(y_star, radii, angles)
        gz = oracle.grad_x(x_star[None, :], Z) @ t
        fz = oracle.f(x_star[None, :], Z)
    except (ArithmeticError, ValueError):
        return -math.inf
    diff = f0 - fz
    noise = 64 * np.finfo(float).eps * (abs(f0) + np.abs(fz))
    inv = np.where(np.abs(diff) > noise, 1.0 / np.where(np.abs(diff) > noise, diff, 1.0), 0.0)
    terms = np.maximum(gz, 0.0) ** 2 * inv
    lim = float(np.max(terms)) if terms.size else 0.0
    return float(t @ hxx @ t) + 0.5 * lim


# ---------------------------------------------------------------------------
# definition checks


@dataclass
class Verdict:
    status: str                      # "yes" / "no" / "inconclusive"
    witness: np.ndarray | None = None
    evidence: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"verdict": self.status, "evidence": _plain(self.evidence)}
        if self.witness is not None:
            d["witness"] = np.asarray(self.witness, dtype=float).tolist()
        return d


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _x_samples(x_star: np.ndarray, radius: float) -> np.ndarray:
    n = x_star.size
    if n == 1:
        lin = radius * np.arange(1, 17) / 16
        small = radius * np.array([1e-2, 1e-3, 1e-4])
        r = np.concatenate([lin, small])
        return x_star + np.concatenate([r, -r])[:, None]
    if n == 2:
        return _shell_points(x_star, radius * np.array([1.0, 0.5, 0.1, 0.01]), 32)
    return _shell_points(x_star, radius * np.array([1.0, 0.5, 0.1, 0.01]), 64)


def _radius_for(x_radius, eps: float, zero_radius: float) -> float:
    if x_radius is None:
        r = 0.5 * eps
    elif callable(x_radius):
        r = float(x_radius(eps))
    else:
        r = float(x_radius)
    return r if r > 0 else zero_radius


def envelope_min_test(oracle: SmoothGameOracle, x_star, y_star, eps: float, radius: float,
                      shape: str = "linf", matrix=None, rel_tol: float = 1e-9,
                      cfg: EnvelopeConfig = DEFAULT_CONFIG) -> Verdict:
    """Sampled test that ``x_star`` locally minimizes the envelope of radius ``eps``."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    nb = Neighborhood(y_star, eps, shape, matrix)
    X = np.vstack([x_star[None, :], _x_samples(x_star, radius)])
    env = envelope_values(oracle, X, nb, cfg)
    e0 = float(env[0])
    tol = rel_tol * (1.0 + abs(e0))
    gap = env[1:] - e0
    i = int(np.argmin(gap))
    ev = {"eps": eps, "x_radius": radius, "envelope_at_point": e0, "min_gap": float(gap[i])}
    if gap[i] >= -tol / 10:
        return Verdict("yes", None, ev)
    if gap[i] < -tol:
        return Verdict("no", X[1 + i], ev)
    return Verdict("inconclusive", X[1 + i], ev)


def verify_local_minimax(oracle: SmoothGameOracle, point, eps_list=(0.1, 0.05, 0.01),
                         x_radius=None, cfg: EnvelopeConfig = DEFAULT_CONFIG,
                         shape: str = "linf", zero_radius: float = 0.05) -> Verdict:
    """Sampled check of the local minimax definition at ``point``.

    ``x_radius`` is the x-neighborhood radius: a number, a callable of
    epsilon, or None for ``eps / 2``.  The definition only asks for some
    x-neighborhood per epsilon, so the caller supplies one.
    """
    x_star, y_star = oracle.split(point)
    positive = [e for e in eps_list if e > 0]
    lm = check_local_max(oracle, x_star, y_star, radius=max(positive) if positive else 0.1)
    evidence: dict[str, Any] = {
        "inner_local_max": {"status": lm.status, "excess": lm.excess, "tol": lm.tol},
        "per_eps": [],
    }
    if lm.status == "no":
        evidence["failed"] = "inner_local_max"
        w = np.concatenate([x_star, lm.witness])
        return Verdict("no", w, evidence)
    statuses = [lm.status]
    for e in sorted(eps_list, reverse=True):
        r = _radius_for(x_radius, e, zero_radius)
        v = envelope_min_test(oracle, x_star, y_star, e, r, shape, cfg=cfg)
        evidence["per_eps"].append({"status": v.status, **v.evidence})
        if v.status == "no":
            evidence["failed"] = f"envelope_min at eps={e}"
            return Verdict("no", np.concatenate([v.witness, y_star]), evidence)
        statuses.append(v.status)
    return Verdict("yes" if all(s == "yes" for s in statuses) else "inconclusive", None, evidence)


def _side_passes(oracle, x_star, y_star, eps_list, x_radius, shape, matrix, cfg, zero_radius):
    results = []
    for e in eps_list:
        if e == 0:
            lm = check_local_max(oracle.mirrored(), y_star, x_star, radius=zero_radius)
            # x_star minimizes f(., y_star) locally
            results.append((0.0, lm.status, {"excess": lm.excess}))
            continue
        r = _radius_for(x_radius, e, zero_radius)
        v = envelope_min_test(oracle, x_star, y_star, e, r, shape, matrix, cfg=cfg)
        results.append((float(e), v.status, v.evidence))
    at_zero = [s for e, s, _ in results if e == 0]
    positive = [s for e, s, _ in results if e > 0]
    if at_zero and at_zero[0] == "yes":
        ok = "yes"
    elif positive and all(s == "yes" for s in positive):
        ok = "yes"
    elif any(s == "inconclusive" for _, s, _ in results):
        ok = "inconclusive"
    else:
        ok = "no"
    return ok, results


def verify_lrp(oracle: SmoothGameOracle, point, eps_list=(0.1, 0.05, 0.01), delta_list=None,
               cfg: EnvelopeConfig = DEFAULT_CONFIG, shape: str = "linf",
               matrices: tuple | None = None, zero_radius: float = 0.05) -> Verdict:
    """Sampled check of the local robust point definition.

    The x-side asks that ``x*`` minimize the upper envelope around ``y*``;
    the y-side is the same test on the mirrored payoff.  A side passes
    when it passes at radius 0 (if listed) or at every positive radius.
    ``delta_list`` gives the opposite player's neighborhood radius for
    each entry of ``eps_list`` (or a callable/number, as ``x_radius``).
    """
    x_star, y_star = oracle.split(point)
    if delta_list is not None and not callable(delta_list) and np.ndim(delta_list) == 1:
        table = dict(zip((float(e) for e in eps_list), (float(d) for d in delta_list)))

        def radius(e):
            return table[float(e)]
    else:
        radius = delta_list
    mx, my = matrices if matrices is not None else (None, None)
    # the x-side neighborhood lives in y-space, so it takes B's frame
    x_ok, x_res = _side_passes(oracle, x_star, y_star, eps_list, radius, shape, my, cfg, zero_radius)
    y_ok, y_res = _side_passes(oracle.mirrored(), y_star, x_star, eps_list, radius, shape, mx,
                               cfg, zero_radius)
    ev = {
        "x_side": {"status": x_ok, "per_eps": [{"eps": e, "status": s, **d} for e, s, d in x_res]},
        "y_side": {"status": y_ok, "per_eps": [{"eps": e, "status": s, **d} for e, s, d in y_res]},
        "shape": shape,
    }
    if x_ok == "yes" and y_ok == "yes":
        return Verdict("yes", None, ev)
    if x_ok == "no" or y_ok == "no":
        return Verdict("no", None, ev)
    return Verdict("inconclusive", None, ev)


# ---------------------------------------------------------------------------
# global values by brute force


def global_minimax_grid(oracle: SmoothGameOracle, lo: float = -3.0, hi: float = 3.0,
                        step: float = 0.005) -> tuple[float, np.ndarray]:
    """Minimize ``max_y f(x, y)`` over a 1+1 dimensional box grid."""
    if oracle.n != 1 or oracle.m != 1:
        raise UnsupportedDim("grid oracle handles one-dimensional players only")
    g = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    F = oracle.f(g[:, None, None], g[None, :, None])
    up = F.max(axis=1)
    val = up.min()
    return float(val), g[np.isclose(up, val, rtol=0, atol=1e-12)]


def global_maximin_grid(oracle: SmoothGameOracle, lo: float = -3.0, hi: float = 3.0,
                        step: float = 0.005) -> tuple[float, np.ndarray]:
    """Maximize ``min_x f(x, y)``; returns the value and the optimal ``(x, y)`` pairs."""
    if oracle.n != 1 or oracle.m != 1:
        raise UnsupportedDim("grid oracle handles one-dimensional players only")
    g = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    F = oracle.f(g[:, None, None], g[None, :, None])
    low = F.min(axis=0)
    val = low.max()
    js = np.flatnonzero(np.isclose(low, val, rtol=0, atol=1e-12))
    pairs = []
    for j in js:
        for i in np.flatnonzero(np.isclose(F[:, j], val, rtol=0, atol=1e-12)):
            pairs.append((g[i], g[j]))
    return float(val), np.array(pairs)


def finite_difference_check(oracle: SmoothGameOracle, probes: int = 100, box: float = 1.0,
                            h: float = 1e-5, seed: int = 0,
                            sampler: Callable | None = None) -> float:
    """Largest relative error of gradients and Hessians against central differences."""
    rng = np.random.default_rng(seed)
    n, m = oracle.n, oracle.m
    worst = 0.0

    def rel(a, b):
        return float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b))))

    for _ in range(probes):
        z = sampler(rng) if sampler else rng.uniform(-box, box, n + m)
        x, y = z[:n], z[n:]
        E = np.eye(n + m)
        fd_g = np.array([
            (oracle.f(*_split(z + h * e, n)) - oracle.f(*_split(z - h * e, n))) / (2 * h) for e in E
        ])
        g = np.concatenate([oracle.grad_x(x, y), oracle.grad_y(x, y)])
        worst = max(worst, rel(fd_g, g))

        def G(w):
            a, b = _split(w, n)
            return np.concatenate([oracle.grad_x(a, b), oracle.grad_y(a, b)])

        fd_h = np.array([(G(z + h * e) - G(z - h * e)) / (2 * h) for e in E])
        worst = max(worst, rel(0.5 * (fd_h + fd_h.T), oracle.hessian(x, y)))
    return worst


def _split(z, n):
    return z[:n], z[n:]
