"""Gradient dynamics for two-player games: GDA, HB, NAG, EG, past-EG and OGD.

All methods are written in terms of the vector field
``v(z) = (-alpha1 * df/dx, alpha2 * df/dy)``.  Two-step methods need a
previous iterate; the first step of those is a plain GDA step.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .envelope import SmoothGameOracle
from .linalg_core import DimensionMismatch


class NonPositiveBeta(ValueError):
    pass


class Family(enum.Enum):
    GDA = "GDA"
    HB = "HB"
    NAG = "NAG"
    EG = "EG"
    PAST_EG = "PastEG"
    OGD = "OGD"

    @classmethod
    def parse(cls, s: str) -> "Family":
        key = s.replace("-", "").replace("_", "").lower()
        for f in cls:
            if f.value.lower() == key:
                return f
        raise ValueError(f"unknown algorithm family {s!r}")


TWO_STEP = (Family.HB, Family.NAG, Family.OGD)


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm family and hyperparameters.

    ``beta`` is the momentum for HB/NAG and the extra-gradient ratio for
    EG/PastEG; ``k`` is the OGD coefficient.  ``limit=True`` marks the
    limiting regimes EG with beta -> inf and OGD with k -> 1+, which have
    closed-form stability regions but cannot be simulated.
    """

    family: Family
    alpha1: float
    alpha2: float
    beta: float = 0.0
    k: float = 2.0
    alternating: bool = False
    limit: bool = False

    def __post_init__(self):
        if isinstance(self.family, str):
            object.__setattr__(self, "family", Family.parse(self.family))
        if not (self.alpha1 > 0 and self.alpha2 > 0):
            raise ValueError("step sizes must be positive")
        fam = self.family
        if self.alternating and fam not in (Family.GDA, Family.OGD):
            raise ValueError("alternating updates are available for GDA and OGD only")
        if self.limit and fam not in (Family.EG, Family.OGD):
            raise ValueError("only EG and OGD have limit variants")
        if fam in (Family.EG, Family.PAST_EG) and not self.limit and not self.beta > 0:
            raise NonPositiveBeta("extra-gradient ratio beta must be positive")
        if fam is Family.OGD and not self.limit and not self.k > 1:
            raise ValueError("OGD needs k > 1")

    @property
    def gamma(self) -> float:
        return self.alpha2 / self.alpha1

    def describe(self) -> str:
        mode = ", alternating" if self.alternating else ""
        if self.family in (Family.EG, Family.PAST_EG):
            par = "beta=inf" if self.limit else f"beta={self.beta:g}"
        elif self.family is Family.OGD:
            par = "k=1+" if self.limit else f"k={self.k:g}"
        elif self.family in (Family.HB, Family.NAG):
            par = f"beta={self.beta:g}"
        else:
            par = ""
        parts = [f"a1={self.alpha1:g}", f"a2={self.alpha2:g}"] + ([par] if par else [])
        return f"{self.family.value}({', '.join(parts)}{mode})"


def ogd_from_past_eg(beta: float) -> float:
    """OGD coefficient equivalent to past-EG with ratio ``beta``."""
    if not beta > 0:
        raise NonPositiveBeta("beta must be positive")
    return 1.0 + 1.0 / beta


def vector_field(oracle: SmoothGameOracle, z, alpha1: float, alpha2: float) -> np.ndarray:
    x, y = oracle.split(z)
    gx = np.asarray(oracle.grad_x(x, y), dtype=float).reshape(-1)
    gy = np.asarray(oracle.grad_y(x, y), dtype=float).reshape(-1)
    return np.concatenate([-alpha1 * gx, alpha2 * gy])


@dataclass
class DynState:
    z: np.ndarray
    z_prev: np.ndarray | None = None
    h_prev: np.ndarray | None = None   # previous half step of past-EG

    def vector(self, spec: AlgorithmSpec) -> np.ndarray:
        """Flattened state in the layout used by the augmented Jacobians."""
        fam = spec.family
        if fam is Family.PAST_EG:
            return np.concatenate([self.z, self.h_prev])
        if fam in TWO_STEP:
            return np.concatenate([self.z, self.z_prev])
        return self.z.copy()

    @classmethod
    def from_vector(cls, spec: AlgorithmSpec, s: np.ndarray, dim: int) -> "DynState":
        s = np.asarray(s, dtype=float)
        if spec.family is Family.PAST_EG:
            return cls(s[:dim].copy(), None, s[dim:].copy())
        if spec.family in TWO_STEP:
            return cls(s[:dim].copy(), s[dim:].copy())
        return cls(s[:dim].copy())


def init_state(spec: AlgorithmSpec, z0) -> DynState:
    z0 = np.asarray(z0, dtype=float).reshape(-1).copy()
    if not np.all(np.isfinite(z0)):
        raise ValueError("initial point must be finite")
    if spec.family is Family.PAST_EG:
        return DynState(z0, None, z0.copy())
    return DynState(z0)


def _alt_gda(spec, oracle, z):
    n = oracle.n
    x, y = z[:n], z[n:]
    x1 = x - spec.alpha1 * np.asarray(oracle.grad_x(x, y), dtype=float)
    y1 = y + spec.alpha2 * np.asarray(oracle.grad_y(x1, y), dtype=float)
    return np.concatenate([x1, y1])


def step(spec: AlgorithmSpec, oracle: SmoothGameOracle, state: DynState) -> DynState:
    """One update of the algorithm."""
    if spec.limit:
        raise ValueError(f"{spec.describe()} is a limiting regime and cannot be iterated")
    a1, a2 = spec.alpha1, spec.alpha2
    z = state.z
    if z.size != oracle.n + oracle.m:
        raise DimensionMismatch("state dimension does not match the oracle")

    def v(w):
        return vector_field(oracle, w, a1, a2)

    fam = spec.family
    if spec.alternating:
        if state.z_prev is None or fam is Family.GDA:
            nxt = _alt_gda(spec, oracle, z)
            return DynState(nxt, z.copy() if fam is Family.OGD else None)
        n = oracle.n
        x, y = z[:n], z[n:]
        xp, yp = state.z_prev[:n], state.z_prev[n:]
        k = spec.k
        x1 = x - k * a1 * np.asarray(oracle.grad_x(x, y)) + a1 * np.asarray(oracle.grad_x(xp, yp))
        y1 = y + k * a2 * np.asarray(oracle.grad_y(x1, y)) - a2 * np.asarray(oracle.grad_y(x, yp))
        return DynState(np.concatenate([x1, y1]), z.copy())

    if fam is Family.GDA:
        return DynState(z + v(z))
    if fam is Family.EG:
        half = z + v(z)
        return DynState(z + v(half) / spec.beta)
    if fam is Family.PAST_EG:
        half = z + v(state.h_prev)
        return DynState(z + v(half) / spec.beta, None, half)
    if state.z_prev is None:
        return DynState(z + v(z), z.copy())
    zp = state.z_prev
    if fam is Family.HB:
        return DynState(z + v(z) + spec.beta * (z - zp), z.copy())
    if fam is Family.NAG:
        look = z + spec.beta * (z - zp)
        return DynState(look + v(look), z.copy())
    if fam is Family.OGD:
        return DynState(z + spec.k * v(z) - v(zp), z.copy())
    raise AssertionError(fam)


@dataclass
class TrajectoryRecord:
    iterates: np.ndarray            # (T+1, n+m)
    vector_field_norms: np.ndarray  # (T+1,)
    converged: bool
    diverged: bool
    iterations_used: int
    stop_tol: float
    n: int
    final_distance_to_target: float | None = None
    half_iterates: np.ndarray | None = None

    def stagnated(self, fraction: float = 0.1) -> bool:
        """Residual above ``stop_tol`` throughout the final ``fraction`` of the run."""
        T = len(self.vector_field_norms)
        tail = self.vector_field_norms[int(T * (1 - fraction)):]
        return bool(tail.size and np.all(tail > self.stop_tol))

    @property
    def failed_to_converge(self) -> bool:
        return self.diverged or (not self.converged and self.stagnated())

    def to_csv(self, fh=None) -> str:
        out = fh or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        dim = self.iterates.shape[1]
        m = dim - self.n
        w.writerow(["iter"] + [f"x{i+1}" for i in range(self.n)] + [f"y{j+1}" for j in range(m)] + ["vnorm"])
        for t, (z, vn) in enumerate(zip(self.iterates, self.vector_field_norms)):
            w.writerow([t] + [repr(float(c)) for c in z] + [repr(float(vn))])
        return out.getvalue() if fh is None else ""

    def to_dict(self, include_iterates: bool = False) -> dict:
        d = {
            "converged": self.converged,
            "diverged": self.diverged,
            "iterations_used": self.iterations_used,
            "final_point": self.iterates[-1].tolist(),
            "final_vector_field_norm": float(self.vector_field_norms[-1]),
            "stop_tol": self.stop_tol,
        }
        if self.final_distance_to_target is not None:
            d["final_distance_to_target"] = self.final_distance_to_target
        if include_iterates:
            d["iterates"] = self.iterates.tolist()
            d["vector_field_norms"] = self.vector_field_norms.tolist()
        return d

    def to_json(self, include_iterates: bool = True) -> str:
        return json.dumps(self.to_dict(include_iterates), sort_keys=True)


def simulate(spec: AlgorithmSpec, oracle: SmoothGameOracle, z0, max_iters: int = 10_000,
             stop_tol: float = 1e-8, divergence_bound: float | None = None,
             target=None, record_half: bool = False) -> TrajectoryRecord:
    """Iterate until ``||v(z)|| <= stop_tol``, divergence, or ``max_iters``."""
    state = init_state(spec, z0)
    if divergence_bound is None:
        divergence_bound = 1e8 * (1.0 + float(np.linalg.norm(state.z)))
    its = [state.z.copy()]
    halves = []
    vn = [float(np.linalg.norm(vector_field(oracle, state.z, spec.alpha1, spec.alpha2)))]
    converged = vn[0] <= stop_tol
    diverged = False
    t = 0
    while not converged and t < max_iters:
        state = step(spec, oracle, state)
        t += 1
        its.append(state.z.copy())
        if record_half and state.h_prev is not None:
            halves.append(state.h_prev.copy())
        nz = float(np.linalg.norm(state.z))
        if not math.isfinite(nz) or nz >= divergence_bound:
            diverged = True
            vn.append(math.inf)
            break
        vn.append(float(np.linalg.norm(vector_field(oracle, state.z, spec.alpha1, spec.alpha2))))
        converged = vn[-1] <= stop_tol
    dist = None
    if target is not None:
        dist = float(np.linalg.norm(its[-1] - np.asarray(target, dtype=float)))
    return TrajectoryRecord(np.array(its), np.array(vn), bool(converged), diverged, t, stop_tol,
                            oracle.n, dist, np.array(halves) if record_half else None)


def fitted_update_matrix(spec: AlgorithmSpec, oracle: SmoothGameOracle, base=None) -> np.ndarray:
    """One-step update matrix fitted from ``dim + 1`` probes of the state map.

    For quadratic games the update is affine in the state and the fit is
    exact up to rounding.  Alternating OGD uses the state ``(z_t, z_{t-1})``.
    """
    dim = oracle.n + oracle.m
    two = spec.family in TWO_STEP or spec.family is Family.PAST_EG
    sdim = 2 * dim if two else dim
    base = np.zeros(sdim) if base is None else np.asarray(base, dtype=float)

    def F(s):
        st = DynState.from_vector(spec, s, dim)
        if spec.alternating and spec.family is Family.OGD:
            st = DynState(s[:dim].copy(), s[dim:].copy())
        nxt = step(spec, oracle, st)
        if spec.alternating and spec.family is Family.OGD:
            return np.concatenate([nxt.z, nxt.z_prev])
        return nxt.vector(spec)

    f0 = F(base)
    cols = [F(base + e) - f0 for e in np.eye(sdim)]
    return np.array(cols).T


def with_params(spec: AlgorithmSpec, **kw) -> AlgorithmSpec:
    return replace(spec, **kw)
