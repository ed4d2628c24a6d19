import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gamegen import saddle_clauses, structured_game
from minimaxlab import linalg_core as la
from minimaxlab.quadratic_games import (
    QuadraticGame,
    classify,
    envelope_1d,
    evaluate,
    grad,
    mirror,
    stationary_set,
    upper_envelope_quadratic,
)

NO_LOCAL_SADDLE = QuadraticGame.one_dim(-2, 0, 1)
BILINEAR = QuadraticGame.one_dim(0, 0, 1)
GLP = QuadraticGame.one_dim(-2, 2, 1)
SEPARABLE = QuadraticGame.one_dim(-2, 2, 0)
FAILURE_LRP = QuadraticGame.homogeneous(np.diag([-2.0, 0.0]), np.diag([0.0, 2.0]), np.eye(2))

games = st.builds(
    lambda seed, n, m: structured_game(np.random.default_rng(seed), n, m),
    st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.integers(1, 3),
)


# --- construction ------------------------------------------------------------

def test_dimension_checks():
    with pytest.raises(la.DimensionMismatch):
        QuadraticGame(np.eye(2), np.eye(1), np.ones((1, 1)), np.zeros(2), np.zeros(1))
    with pytest.raises(la.DimensionMismatch):
        QuadraticGame(np.eye(2), np.eye(1), np.ones((2, 1)), np.zeros(3), np.zeros(1))
    with pytest.raises(ValueError):
        QuadraticGame.homogeneous([[1.0, 2.0], [0.0, 1.0]], [[0.0]], [[1.0], [0.0]])


def test_dict_round_trip():
    g = structured_game(np.random.default_rng(3), 2, 3, linear="free")
    h = QuadraticGame.from_dict(g.to_dict())
    for f in "ABCab":
        np.testing.assert_array_equal(getattr(g, f), getattr(h, f))
    assert g.c == h.c


# --- evaluation --------------------------------------------------------------

def test_evaluate_examples():
    assert evaluate(NO_LOCAL_SADDLE, [1.0], [1.0]) == pytest.approx(0.0)
    assert evaluate(BILINEAR, [2.0], [3.0]) == pytest.approx(6.0)
    g = QuadraticGame(np.eye(2), -np.eye(1), np.ones((2, 1)), [1.0, 2.0], [3.0], 5.0)
    assert evaluate(g, [0.0, 0.0], [0.0]) == pytest.approx(2.5)


def test_grad_examples():
    gx, gy = grad(NO_LOCAL_SADDLE, [1.0], [1.0])
    np.testing.assert_allclose([gx[0], gy[0]], [-1.0, 1.0])
    gx, gy = grad(BILINEAR, [2.0], [3.0])
    np.testing.assert_allclose([gx[0], gy[0]], [3.0, 2.0])
    gx, gy = grad(FAILURE_LRP, np.zeros(2), np.zeros(2))
    assert not gx.any() and not gy.any()


@given(games)
def test_grad_matches_finite_differences(g):
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-1, 1, g.n), rng.uniform(-1, 1, g.m)
    gx, gy = grad(g, x, y)
    h = 1e-6
    for i in range(g.n):
        e = np.zeros(g.n)
        e[i] = h
        fd = (evaluate(g, x + e, y) - evaluate(g, x - e, y)) / (2 * h)
        assert fd == pytest.approx(gx[i], abs=1e-5 * (1 + abs(gx[i])))
    for j in range(g.m):
        e = np.zeros(g.m)
        e[j] = h
        fd = (evaluate(g, x, y + e) - evaluate(g, x, y - e)) / (2 * h)
        assert fd == pytest.approx(gy[j], abs=1e-5 * (1 + abs(gy[j])))


def test_evaluate_dimension_mismatch():
    with pytest.raises(la.DimensionMismatch):
        evaluate(BILINEAR, [1.0, 2.0], [1.0])


# --- stationary sets ---------------------------------------------------------

def test_stationary_set_examples():
    s = stationary_set(NO_LOCAL_SADDLE)
    assert s.dim == 0 and np.allclose(s.basepoint, 0)
    s = stationary_set(BILINEAR)
    assert s.dim == 0 and np.allclose(s.basepoint, 0)
    shifted = QuadraticGame([[2.0]], [[-2.0]], [[0.0]], [2.0], [0.0])
    s = stationary_set(shifted)
    assert s.dim == 0 and np.allclose(s.basepoint, [-1.0, 0.0])
    gx, gy = grad(shifted, s.basepoint[:1], s.basepoint[1:])
    assert abs(gx[0]) < 1e-12 and abs(gy[0]) < 1e-12


def test_stationary_set_empty_when_out_of_range():
    g = QuadraticGame([[0.0]], [[0.0]], [[0.0]], [1.0], [0.0])
    assert stationary_set(g).empty


@given(games)
def test_stationary_basis_is_orthonormal(g):
    s = stationary_set(g)
    if not s.empty:
        np.testing.assert_allclose(s.basis.T @ s.basis, np.eye(s.dim), atol=1e-10)
        np.testing.assert_allclose(g.K @ s.basepoint + g.r, 0, atol=1e-7 * (1 + np.abs(g.r).max()))


# --- classification examples -------------------------------------------------

def test_classify_no_local_saddle():
    rep = classify(NO_LOCAL_SADDLE)
    assert rep.local_minimax.exists and rep.global_minimax.exists
    assert rep.local_minimax.set.contains([0.0, 0.0])
    assert not rep.saddle.exists


def test_classify_onedq_only_global_minimax():
    for a, b, c in [(-2, -2, 2), (-1, -1, 2)]:
        rep = classify(QuadraticGame.one_dim(a, b, c))
        assert rep.global_minimax.exists
        assert not rep.global_maximin.exists and not rep.saddle.exists


def test_classify_bilinear():
    rep = classify(BILINEAR)
    gm = rep.global_minimax.set
    # {0} x R
    assert gm.dim == 1 and gm.contains([0.0, 5.0]) and not gm.contains([1.0, 0.0])
    assert rep.local_minimax.set.dim == 0 and rep.local_minimax.set.contains([0.0, 0.0])
    assert rep.saddle.exists and rep.saddle.set.dim == 0


def test_classify_bilinear_rank_deficient_global_set():
    C = np.array([[1.0, 0.0], [0.0, 0.0]])
    rep = classify(QuadraticGame.homogeneous(np.zeros((2, 2)), np.zeros((2, 2)), C))
    # null(C^T) x R^2 has dimension 1 + 2
    assert rep.global_minimax.set.dim == 3
    # local minimax points are stationary: null(C^T) x null(C)
    assert rep.local_minimax.set.dim == 2


def test_classify_glp_and_failure_lrp_and_separable():
    rep = classify(GLP)
    assert rep.lrp.exists and not rep.local_minimax.exists and not rep.local_maximin.exists
    assert "eigenspace" in rep.lrp.note
    assert classify(FAILURE_LRP).lrp.exists
    assert not classify(SEPARABLE).lrp.exists


def test_classify_zero_game_everything_exists():
    rep = classify(QuadraticGame.one_dim(0, 0, 0))
    for concept in (rep.global_minimax, rep.local_minimax, rep.global_maximin,
                    rep.local_maximin, rep.saddle, rep.lrp):
        assert concept.exists
    assert rep.stationary.dim == 2


def test_condition_trace_records_witnesses():
    rep = classify(NO_LOCAL_SADDLE)
    names = [name for name, _, _ in rep.condition_trace]
    assert any(name.startswith("minimax: B <= 0") for name in names)
    assert any(name.startswith("saddle: A >= 0") for name in names)
    d = dict((name, (ok, w)) for name, ok, w in rep.condition_trace)
    assert d["saddle: A >= 0 (min eig)"] == (False, -2.0)


# --- mirror -------------------------------------------------------------------

@given(games)
def test_mirror_is_an_involution(g):
    h = mirror(mirror(g))
    for f in "ABCab":
        np.testing.assert_array_equal(getattr(g, f), getattr(h, f))
    assert h.c == g.c


@given(games)
def test_mirror_swaps_minimax_and_maximin(g):
    r, s = classify(g), classify(mirror(g))
    assert r.global_minimax.exists == s.global_maximin.exists
    assert r.global_maximin.exists == s.global_minimax.exists
    assert r.local_minimax.exists == s.local_maximin.exists
    if s.local_maximin.exists:
        assert r.local_minimax.set.is_subset_of(s.local_maximin.set.swapped(g.m))
        assert s.local_maximin.set.swapped(g.m).is_subset_of(r.local_minimax.set)


def test_mirror_examples():
    r, s = classify(BILINEAR), classify(mirror(BILINEAR))
    assert r.global_minimax.set.dim == s.global_maximin.set.dim == 1
    s = classify(mirror(NO_LOCAL_SADDLE))
    assert s.local_maximin.exists and s.local_maximin.set.contains([0.0, 0.0])
    assert not s.local_minimax.exists


# --- envelopes ----------------------------------------------------------------

def test_envelope_1d_examples():
    assert envelope_1d(-2, 2, 1, "upper", 0.5, 0.1) == pytest.approx(0.29)
    assert envelope_1d(-2, 2, 1, "lower", 0.5, 0.1) == pytest.approx(-0.29)
    g = QuadraticGame.one_dim(-1.3, 0.7, 0.4)
    assert envelope_1d(-1.3, 0.7, 0.4, "upper", 0.0, 0.3) == pytest.approx(evaluate(g, [0.3], [0.0]))
    with pytest.raises(la.DimensionMismatch):
        envelope_1d(np.eye(2), 1, 1, "upper", 0.1, 0.0)


lattice = st.sampled_from(np.arange(-2, 2.01, 0.25).tolist())


@given(lattice, lattice, lattice, st.sampled_from([0.1, 0.5]), st.floats(-1, 1), st.sampled_from(["upper", "lower"]))
def test_envelope_1d_matches_grid(a, b, c, eps, frac, kind):
    p = frac * eps
    s = np.linspace(-eps, eps, 20001)
    if kind == "upper":
        vals = a * p * p / 2 + c * p * s + b * s * s / 2
        grid = vals.max()
    else:
        vals = a * s * s / 2 + c * s * p + b * p * p / 2
        grid = vals.min()
    assert envelope_1d(a, b, c, kind, eps, p) == pytest.approx(grid, abs=1e-6)


def test_upper_envelope_examples():
    env = upper_envelope_quadratic(NO_LOCAL_SADDLE)
    assert env.finite
    assert env.domain().dim == 0 and env([0.0]) == 0.0
    assert env([0.1]) == np.inf
    g = QuadraticGame.one_dim(-2, -2, 1)
    env = upper_envelope_quadratic(g)
    ys = np.linspace(-5, 5, 200001)
    for x in (-0.7, 0.3, 1.1):
        assert env([x]) == pytest.approx(evaluate(g, np.full((ys.size, 1), x), ys[:, None]).max(), abs=1e-8)
        assert env([x]) == pytest.approx((-2 + 0.5) * x * x / 2)
    g = QuadraticGame.homogeneous(np.diag([1.0, -3.0]), -np.eye(2), np.zeros((2, 2)))
    x = np.array([0.4, -0.2])
    assert upper_envelope_quadratic(g)(x) == pytest.approx(0.5 * x @ g.A @ x)
    assert not upper_envelope_quadratic(GLP).finite


# --- invariants over random games --------------------------------------------

@settings(max_examples=500)
@given(games)
def test_saddle_equivalences(g):
    clauses, rep, _ = saddle_clauses(g)
    values = set(clauses.values())
    assert len(values) == 1, clauses
    assert rep.saddle.exists == clauses["definite_and_range"]


@settings(max_examples=300)
@given(games)
def test_local_minimax_exists_iff_global(g):
    rep = classify(g)
    assert rep.global_minimax.exists == rep.local_minimax.exists
    if rep.local_minimax.exists:
        assert rep.local_minimax.set.is_subset_of(rep.global_minimax.set)
        assert rep.local_minimax.set.is_subset_of(rep.stationary)
        assert rep.stationary.is_subset_of(rep.local_minimax.set)
    assert rep.global_maximin.exists == rep.local_maximin.exists


# Brute force for 1+1 games.  A y-box of the same size as the x-box clips the
# inner maximizer near the x-edges and invents minima there, so x ranges over
# [-2.5, 2.5] while y ranges over [-R, R] with R = 20 and 25.  A minimax point
# exists when the grid value does not move with R and is attained inside
# |x| <= 2.4 (otherwise the envelope keeps decreasing towards the edge).

_XS = np.round(np.arange(-2.5, 2.5001, 0.01), 10)
_YS = np.round(np.arange(-25, 25.0001, 0.01), 10)
_Y20 = np.abs(_YS) <= 20 + 1e-9
_INTERIOR = np.abs(_XS) <= 2.4 + 1e-9


def _grid_minimax(g):
    F = evaluate(g, _XS[:, None, None], _YS[None, :, None])
    env25 = F.max(axis=1)
    env20 = F[:, _Y20].max(axis=1)
    i = int(np.argmin(env25))
    v = env25[i]
    stable = abs(v - env20.min()) <= 0.05
    interior = env25[_INTERIOR].min() <= v + 1e-9 * (1 + abs(v))
    return stable and interior, _XS[i]


half = st.sampled_from(np.arange(-2, 2.01, 0.5).tolist())


@settings(max_examples=150)
@given(half, half, half, half, half)
def test_brute_force_envelope_oracle(a, b, c, alpha, beta):
    g = QuadraticGame([[a]], [[b]], [[c]], [alpha], [beta])
    rep = classify(g)
    for concept, game, k in ((rep.global_minimax, g, 0), (rep.global_maximin, mirror(g), 1)):
        if concept.exists:
            assume(np.linalg.norm(concept.set.basepoint) <= 2)
        grid_exists, xhat = _grid_minimax(game)
        assert grid_exists == concept.exists, (a, b, c, alpha, beta)
        if concept.exists and concept.set.dim == 0:
            assert abs(xhat - concept.set.basepoint[k]) <= 0.02 + 1e-9


def test_lrp_one_dimensional_sweep():
    grid = np.arange(-2, 2.0001, 0.25)
    for a in grid:
        for b in grid:
            for c in grid:
                expect = (c == 0 and a >= 0 >= b) or (c != 0 and c * c >= a * b)
                assert classify(QuadraticGame.one_dim(a, b, c)).lrp.exists == expect, (a, b, c)


@given(games)
def test_report_serializes(g):
    d = classify(g).to_dict()
    assert set(d) >= {"stationary", "global_minimax", "local_minimax", "global_maximin",
                      "local_maximin", "saddle", "lrp", "condition_trace"}
    assert d["saddle"]["exists"] == (d["global_minimax"]["exists"] and d["global_maximin"]["exists"])
