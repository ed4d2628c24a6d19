import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from minimaxlab import linalg_core as la
from minimaxlab.linalg_core import Definiteness

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def symmetric(draw, max_dim=8):
    k = draw(st.integers(1, max_dim))
    M = draw(arrays(float, (k, k), elements=finite))
    return 0.5 * (M + M.T)


@st.composite
def low_rank(draw):
    """Matrices of a chosen rank whose nonzero singular values lie in [0.1, 3].

    Near the rank cutoff the Penrose identities only hold to about
    cond(M) * eps, so the domain keeps singular values clear of it.
    """
    rows = draw(st.integers(1, 4))
    cols = draw(st.integers(1, 4))
    rank = draw(st.integers(0, min(rows, cols)))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    Q1, _ = np.linalg.qr(rng.standard_normal((rows, rows)))
    Q2, _ = np.linalg.qr(rng.standard_normal((cols, cols)))
    s = draw(arrays(float, rank, elements=st.floats(0.1, 3)))
    return (Q1[:, :rank] * s) @ Q2[:, :rank].T


# --- sym_eig ---------------------------------------------------------------

def test_sym_eig_diagonal():
    d = la.sym_eig(np.diag([2.0, -1.0]))
    np.testing.assert_allclose(d.eigenvalues, [2, -1])
    np.testing.assert_allclose(np.abs(d.eigenvectors), np.eye(2), atol=1e-12)


def test_sym_eig_swap_matrix():
    np.testing.assert_allclose(la.sym_eig([[0, 1], [1, 0]]).eigenvalues, [1, -1], atol=1e-12)


def test_sym_eig_random_5x5_reconstructs(rng):
    M = rng.standard_normal((5, 5))
    M = M + M.T
    d = la.sym_eig(M)
    assert np.linalg.norm(d.reconstruct() - M) <= 1e-9 * np.linalg.norm(M)


def test_sym_eig_rejects_nan():
    with pytest.raises(la.NonFinite):
        la.sym_eig([[1.0, np.nan], [np.nan, 0.0]])


@given(symmetric())
def test_sym_eig_reconstruction_and_orthonormality(M):
    d = la.sym_eig(M)
    U = d.eigenvectors
    scale = max(np.linalg.norm(M), 1e-300)
    assert np.linalg.norm(d.reconstruct() - M) <= 1e-9 * scale + 1e-300
    assert np.abs(U.T @ U - np.eye(len(M))).max() <= 1e-10
    assert np.all(np.diff(d.eigenvalues) <= 0)
    np.testing.assert_allclose(d.eigenvalues, np.linalg.eigvalsh(M)[::-1], atol=1e-10 * (1 + scale))


# --- pinv / projectors -----------------------------------------------------

def test_pinv_examples():
    np.testing.assert_array_equal(la.pinv(np.zeros((2, 3))), np.zeros((3, 2)))
    np.testing.assert_allclose(la.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    P = la.pinv([[1.0], [1.0]])
    np.testing.assert_allclose(P, [[0.5, 0.5]])


@given(low_rank())
def test_pinv_penrose_identities(M):
    P = la.pinv(M)
    np.testing.assert_allclose(M @ P @ M, M, atol=1e-8)
    np.testing.assert_allclose(P @ M @ P, P, atol=1e-8)
    np.testing.assert_allclose(M @ P, (M @ P).T, atol=1e-8)
    np.testing.assert_allclose(P @ M, (P @ M).T, atol=1e-8)


def test_null_projector_examples():
    np.testing.assert_allclose(la.null_projector([[0.0]]), [[1.0]])
    np.testing.assert_allclose(la.null_projector([[1.0]]), [[0.0]])
    P = la.null_projector([[1.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(P, np.diag([0.0, 1.0]))


@given(low_rank())
def test_null_projector_annihilates_and_is_idempotent(L):
    P = la.null_projector(L)
    np.testing.assert_allclose(P @ L, 0, atol=1e-8)
    np.testing.assert_allclose(P @ P, P, atol=1e-8)
    np.testing.assert_allclose(P, P.T, atol=1e-12)


# --- positive / negative parts ---------------------------------------------

def test_pos_neg_parts_examples():
    Sp, Sn = la.pos_neg_parts(np.diag([-2.0, 0.0]))
    np.testing.assert_allclose(Sp, 0)
    np.testing.assert_allclose(Sn, np.diag([-2.0, 0.0]))
    Sp, Sn = la.pos_neg_parts(np.diag([0.0, 2.0]))
    np.testing.assert_allclose(Sp, np.diag([0.0, 2.0]))
    np.testing.assert_allclose(Sn, 0)
    Sp, Sn = la.pos_neg_parts(np.diag([3.0, -1.0]))
    np.testing.assert_allclose(Sp, np.diag([3.0, 0.0]))
    np.testing.assert_allclose(Sn, np.diag([0.0, -1.0]))


@given(symmetric(max_dim=5))
def test_pos_neg_parts_properties(S):
    Sp, Sn = la.pos_neg_parts(S)
    np.testing.assert_allclose(Sp @ Sn, 0, atol=1e-8)
    assert np.linalg.eigvalsh(Sp).min() >= -1e-9
    assert np.linalg.eigvalsh(Sn).max() <= 1e-9
    np.testing.assert_allclose(Sp + Sn, S, atol=1e-8 * (1 + np.abs(S).max()))
    # |S| = Sp - Sn has eigenvalues |lambda|
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(Sp - Sn)),
                               np.sort(np.abs(np.linalg.eigvalsh(S))), atol=1e-8)


# --- definiteness / range --------------------------------------------------

@pytest.mark.parametrize("M,expected", [
    (np.diag([1.0, 2.0]), Definiteness.POSITIVE_DEFINITE),
    (np.diag([0.0, 1.0]), Definiteness.POSITIVE_SEMI),
    (np.diag([1.0, -1.0]), Definiteness.INDEFINITE),
    (np.diag([-1.0, 0.0]), Definiteness.NEGATIVE_SEMI),
    (np.diag([-1.0, -3.0]), Definiteness.NEGATIVE_DEFINITE),
    (np.zeros((2, 2)), Definiteness.ZERO),
])
def test_definiteness(M, expected):
    assert la.definiteness(M) is expected


def test_zero_is_both_semidefinite():
    d = la.definiteness(np.zeros((3, 3)))
    assert d.is_psd and d.is_nsd


def test_in_range_examples():
    M = np.diag([1.0, 0.0])
    assert la.in_range(M, [1.0, 0.0])
    assert not la.in_range(M, [0.0, 1.0])
    for v in ([1.0, -2.0], [0.3, 7.0]):
        assert la.in_range([[0, 1], [1, 0]], v)
    with pytest.raises(la.DimensionMismatch):
        la.in_range(M, [1.0, 2.0, 3.0])


# --- nonsymmetric eigenvalues ---------------------------------------------

def test_general_eig_examples():
    w = np.sort_complex(la.general_eig([[2, -1], [1, 0]]))
    np.testing.assert_allclose(w, [1, 1], atol=1e-7)
    w = np.sort_complex(la.general_eig([[2, -1], [2, 0]]))
    np.testing.assert_allclose(w, [1 - 1j, 1 + 1j], atol=1e-12)
    np.testing.assert_allclose(np.sort(la.general_eig(np.diag([3.0, -5.0])).real), [-5, 3])


def _newton_refine(coeffs, z):
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(50):
        d = dp(z)
        if d == 0:
            break
        z = z - p(z) / d
    return z


@given(st.integers(1, 4), st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_general_eig_matches_refined_roots(deg, vals):
    coeffs = np.array([1.0] + vals[:deg])
    comp = np.zeros((deg, deg))
    comp[0, :] = -coeffs[1:]
    comp[1:, :-1] = np.eye(deg - 1)
    w = la.general_eig(comp)
    p = np.poly1d(coeffs)
    for z in w:
        ref = _newton_refine(coeffs, z)
        # simple roots converge to the exact root; clustered roots are limited by conditioning
        if abs(np.poly1d(coeffs).deriv()(ref)) > 1e-3:
            assert abs(ref - z) <= 1e-7
        assert abs(p(z)) <= 1e-7 * (1 + np.abs(coeffs).sum() * (1 + abs(z)) ** deg)


def test_charpoly_matches_numpy(rng):
    M = rng.standard_normal((4, 4))
    np.testing.assert_allclose(la.charpoly(M), np.poly(M), atol=1e-10)


def test_spectral_radius():
    assert la.spectral_radius([[0, 1], [-1, 0]]) == pytest.approx(1.0)
    assert la.spectral_radius(np.zeros((0, 0))) == 0.0
