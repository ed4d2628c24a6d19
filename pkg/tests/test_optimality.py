import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamegen import structured_game
from minimaxlab import fixtures
from minimaxlab.envelope import quadratic_oracle, verify_local_minimax
from minimaxlab.linalg_core import Definiteness
from minimaxlab.optimality import (
    NotStationary,
    SecondOrderVerdict,
    first_order_check,
    local_saddle_check,
    second_order_invertible,
)
from minimaxlab.quadratic_games import QuadraticGame, classify, mirror

O = {fid: fx.oracle for fid, fx in fixtures.REGISTRY.items()}


def swap_point(z, n):
    z = np.asarray(z, dtype=float)
    return np.concatenate([z[n:], z[:n]])


# --- first order ------------------------------------------------------------------

def test_first_order_examples():
    assert first_order_check(O["no_local_saddle"], [0.0, 0.0]).stationary
    o = O["stationary_global_no_local"]
    assert first_order_check(o, [0.0, 0.0]).stationary
    for x in (1.0, -1.0):
        r = first_order_check(o, [x, 0.0])
        assert not r.stationary and r.grad_y_norm == pytest.approx(1.0)
    assert first_order_check(O["local_non_global"], [1 / np.sqrt(3), 0.0]).stationary


# --- second order ---------------------------------------------------------------

def test_second_order_necessary_fails_when_yy_positive():
    r = second_order_invertible(O["stationary_global_no_local"], [0.0, 0.0])
    assert r.verdict is SecondOrderVerdict.NECESSARY_FAILS
    assert r.yy_definiteness is Definiteness.POSITIVE_DEFINITE


def test_second_order_sufficient_with_schur_value():
    r = second_order_invertible(O["local_non_global"], [1 / np.sqrt(3), 0.0])
    assert r.verdict is SecondOrderVerdict.SUFFICIENT_STRICT_LOCAL_MINIMAX
    assert r.schur_complement[0, 0] == pytest.approx(2 * np.sqrt(3))
    assert verify_local_minimax(O["local_non_global"], [1 / np.sqrt(3), 0.0]).status == "yes"


def test_second_order_degenerate_yy():
    r = second_order_invertible(O["no_local_saddle"], [0.0, 0.0])
    assert r.verdict is SecondOrderVerdict.DEGENERATE_YY
    assert r.schur_complement is None and r.schur_definiteness is None


def test_second_order_necessary_holds_on_boundary():
    # B = -1, A = C^2/B: Schur complement exactly zero
    o = quadratic_oracle(QuadraticGame.one_dim(-1.0, -1.0, 1.0))
    r = second_order_invertible(o, [0.0, 0.0])
    assert r.verdict is SecondOrderVerdict.NECESSARY_HOLDS
    assert r.schur_definiteness is Definiteness.ZERO


def test_second_order_requires_stationary_point():
    with pytest.raises(NotStationary):
        second_order_invertible(O["stationary_global_no_local"], [1.0, 0.0])


def test_report_serializes():
    d = second_order_invertible(O["local_non_global"], [1 / np.sqrt(3), 0.0]).to_dict()
    assert d["verdict"] == "SufficientStrictLocalMinimax"
    assert d["yy_definiteness"] == Definiteness.NEGATIVE_DEFINITE.value


# --- local saddle ---------------------------------------------------------------

def test_local_saddle_examples():
    assert local_saddle_check(O["bilinear"], [0.0, 0.0]).status == "yes"
    v = local_saddle_check(O["no_local_saddle"], [0.0, 0.0])
    assert v.status == "no" and v.witness[0] != 0 and v.witness[1] == 0
    assert local_saddle_check(O["glp"], [0.0, 0.0]).status == "no"


# --- properties -------------------------------------------------------------------

def strict_minimax_game(rng, n, m):
    G = rng.uniform(-1, 1, (m, m))
    B = -(G @ G.T + 0.3 * np.eye(m))
    C = rng.uniform(-2, 2, (n, m))
    H = rng.uniform(-1, 1, (n, n))
    A = C @ np.linalg.solve(B, C.T) + H @ H.T + 0.3 * np.eye(n)
    A = 0.5 * (A + A.T)
    return QuadraticGame(A, B, C, rng.uniform(-1, 1, n), rng.uniform(-1, 1, m), 0.0)


def test_sufficient_condition_agrees_with_definition(seed):
    rng = np.random.default_rng(seed)
    agree = 0
    for _ in range(100):
        n, m = rng.integers(1, 3), rng.integers(1, 3)
        g = strict_minimax_game(rng, n, m)
        o = quadratic_oracle(g)
        z = classify(g).stationary.basepoint
        r = second_order_invertible(o, z)
        # the inner maximizer -B^{-1} C' x stays inside the eps-box only while
        # |x| <= eps * lambda_min(-B) / ||C||, so the x-radius has to scale with that
        c = np.linalg.eigvalsh(-g.B).min() / (1 + np.linalg.norm(g.C, 2))
        v = verify_local_minimax(o, z, x_radius=lambda e: 0.5 * c * e)
        assert r.verdict is SecondOrderVerdict.SUFFICIENT_STRICT_LOCAL_MINIMAX
        assert v.status == "yes", v.evidence
        agree += 1
    assert agree == 100


@settings(max_examples=40)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2), st.integers(1, 2))
def test_local_saddle_implies_minimax_and_maximin(seed, n, m):
    rng = np.random.default_rng(seed)
    g = structured_game(rng, n, m, kind=("saddle", "bilinear", "lowrank")[seed % 3], linear="range")
    rep = classify(g)
    if rep.stationary.empty:
        return
    o = quadratic_oracle(g)
    z = rep.stationary.basepoint
    if local_saddle_check(o, z).status != "yes":
        return
    assert verify_local_minimax(o, z).status == "yes"
    assert verify_local_minimax(o.mirrored(), swap_point(z, n)).status == "yes"


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_second_order_mirror_symmetry(seed, n, m):
    # the minimax report of the mirrored game is the maximin report of the original,
    # i.e. f_xx > 0 and f_yy - f_yx f_xx^{-1} f_xy < 0, computed here with plain numpy
    rng = np.random.default_rng(seed)
    g = structured_game(rng, n, m, linear="zero")
    o = quadratic_oracle(g)
    r = second_order_invertible(o.mirrored(), np.zeros(n + m))
    rq = second_order_invertible(quadratic_oracle(mirror(g)), np.zeros(n + m))
    assert r.verdict is rq.verdict
    eA = np.linalg.eigvalsh(g.A)
    scale = 1.0 + np.linalg.norm(g.A, 2)
    if np.min(np.abs(eA)) <= 1e-6 * scale:
        return
    S = g.B - g.C.T @ np.linalg.solve(g.A, g.C)
    eS = np.linalg.eigvalsh(0.5 * (S + S.T))
    margin = 1e-6 * (1 + np.abs(eS).max())
    if np.min(np.abs(eS)) <= margin:
        return
    strict = eA.min() > 0 and eS.max() < 0
    expected = (SecondOrderVerdict.SUFFICIENT_STRICT_LOCAL_MINIMAX if strict
                else SecondOrderVerdict.NECESSARY_FAILS)
    assert r.verdict is expected
    np.testing.assert_allclose(r.schur_complement, -S, atol=1e-8 * (1 + np.abs(S).max()))
    # mirroring twice gives back the original report
    r2 = second_order_invertible(o.mirrored().mirrored(), np.zeros(n + m))
    assert r2.verdict is second_order_invertible(o, np.zeros(n + m)).verdict
