import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiefel_xform.errors import DimensionError, NotPositiveDefinite, RankDeficient
from stiefel_xform.linalg import (
    Frame,
    SpdMatrix,
    cholesky_upper,
    frame_completion,
    gram,
    orth_complement_frame,
    polar_decompose,
    principal_minors,
    spd_sqrt,
)

RNG = np.random.default_rng(1234)


def random_spd(m, rng=RNG):
    g = rng.standard_normal((m + 2, m))
    return g.T @ g + 0.1 * np.eye(m)


class TestGram:
    def test_identity_columns(self):
        v = np.eye(3)[:, :2]
        assert np.allclose(gram(v), np.eye(2))

    def test_column_vector(self):
        assert np.allclose(gram(np.array([[3.0], [4.0]])), [[25.0]])

    def test_matches_triple_loop(self):
        x = RNG.standard_normal((4, 2))
        g = gram(x)
        brute = np.zeros((2, 2))
        for i in range(2):
            for j in range(2):
                for r in range(4):
                    brute[i, j] += x[r, i] * x[r, j]
        assert np.max(np.abs(g - brute)) <= 1e-14
        assert np.array_equal(g, g.T)


class TestCholesky:
    def test_identity(self):
        assert np.allclose(cholesky_upper(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        assert np.allclose(cholesky_upper(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction(self):
        g = RNG.standard_normal((5, 3))
        r = g.T @ g
        t = cholesky_upper(r)
        assert np.all(np.diag(t) > 0)
        assert np.allclose(t, np.triu(t))
        assert np.max(np.abs(t.T @ t - r)) <= 1e-12 * np.max(np.abs(r))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_upper(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestPrincipalMinors:
    def test_identity(self):
        assert np.allclose(principal_minors(np.eye(3)), [1.0, 1.0, 1.0])

    def test_diagonal(self):
        assert np.allclose(principal_minors(np.diag([4.0, 9.0])), [4.0, 36.0])

    def test_cholesky_cross_check(self):
        r = random_spd(3)
        minors = principal_minors(r)
        t = np.diag(cholesky_upper(r))
        prefix = np.cumprod(t ** 2)
        assert np.max(np.abs(minors / prefix - 1.0)) <= 1e-10

    def test_determinant_is_last(self):
        r = random_spd(4)
        assert principal_minors(r)[-1] == pytest.approx(np.linalg.det(r), rel=1e-10)


class TestPolarDecompose:
    def test_frame_input(self):
        v0 = np.eye(4)[:, :2]
        frame, r = polar_decompose(v0)
        assert np.allclose(frame.mat, v0)
        assert np.allclose(r.mat, np.eye(2))

    def test_scaled_axis(self):
        x = np.array([[2.0], [0.0], [0.0]])
        frame, r = polar_decompose(x)
        assert np.allclose(frame.mat, [[1.0], [0.0], [0.0]])
        assert np.allclose(r.mat, [[4.0]])

    def test_reconstruction(self):
        x = RNG.standard_normal((5, 2))
        frame, r = polar_decompose(x)
        back = frame.mat @ spd_sqrt(r.mat)
        assert np.max(np.abs(back - x)) <= 1e-10 * np.max(np.abs(x))

    def test_rank_deficient(self):
        x = np.ones((4, 2))
        with pytest.raises(RankDeficient):
            polar_decompose(x)


class TestFrameCompletion:
    def test_canonical_frame_gives_identity(self):
        u0 = np.zeros((5, 2))
        u0[3:, :] = np.eye(2)
        assert np.allclose(frame_completion(u0), np.eye(5))

    def test_two_dim(self):
        g = frame_completion(np.array([[1.0], [0.0]]))
        assert np.max(np.abs(g.T @ g - np.eye(2))) <= 1e-12
        assert np.allclose(g[:, 1], [1.0, 0.0])

    def test_defining_properties(self):
        u = polar_decompose(RNG.standard_normal((5, 2)))[0].mat
        g = frame_completion(u)
        n, k = 5, 2
        u0 = np.zeros((n, k))
        u0[n - k:, :] = np.eye(k)
        assert np.max(np.abs(g.T @ g - np.eye(n))) <= 1e-10
        assert np.max(np.abs(g @ u0 - u)) <= 1e-10
        # last k columns are u itself; leading block spans the complement
        assert np.max(np.abs(g[:, n - k:] - u)) <= 1e-12
        assert np.max(np.abs(g[:, : n - k].T @ u)) <= 1e-10

    def test_gram_of_completion(self):
        u = polar_decompose(RNG.standard_normal((6, 3)))[0].mat
        assert np.max(np.abs(gram(frame_completion(u)) - np.eye(6))) <= 1e-10


class TestOrthComplement:
    def test_canonical(self):
        u0 = np.zeros((5, 2))
        u0[3:, :] = np.eye(2)
        expect = np.zeros((5, 3))
        expect[:3, :] = np.eye(3)
        assert np.allclose(orth_complement_frame(u0), expect)

    def test_axis(self):
        w = orth_complement_frame(np.array([[0.0], [0.0], [1.0]]))
        assert w.shape == (3, 2)
        assert np.allclose(w[2, :], 0.0)
        assert np.max(np.abs(w.T @ w - np.eye(2))) <= 1e-12

    def test_random(self):
        u = polar_decompose(RNG.standard_normal((6, 2)))[0].mat
        w = orth_complement_frame(u)
        assert np.max(np.abs(w.T @ u)) <= 1e-10
        assert np.max(np.abs(w.T @ w - np.eye(4))) <= 1e-10

    def test_random_policy_still_orthonormal(self):
        u = polar_decompose(RNG.standard_normal((5, 2)))[0].mat
        w = orth_complement_frame(u, policy="random", rng=np.random.default_rng(3))
        assert np.max(np.abs(w.T @ u)) <= 1e-10
        assert np.max(np.abs(w.T @ w - np.eye(3))) <= 1e-10

    def test_full_frame_rejected(self):
        with pytest.raises(DimensionError):
            orth_complement_frame(np.eye(3))


class TestWrapperTypes:
    def test_frame_rejects_non_orthonormal(self):
        with pytest.raises(RankDeficient):
            Frame(np.ones((3, 2)))

    def test_frame_orthonormalize(self):
        f = Frame.orthonormalize(RNG.standard_normal((4, 2)))
        assert np.max(np.abs(f.mat.T @ f.mat - np.eye(2))) <= 1e-10

    def test_frame_needs_tall_matrix(self):
        with pytest.raises(DimensionError):
            Frame(np.eye(2)[:1, :])

    def test_spd_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix(np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_spd_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_frame_is_read_only(self):
        f = Frame(np.eye(3)[:, :1])
        with pytest.raises(ValueError):
            f.mat[0, 0] = 2.0


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 6),
    m=st.integers(1, 4),
    seed=st.integers(0, 10_000),
)
def test_polar_roundtrip_property(n, m, seed):
    # singular values bounded away from zero: the 1e-10 reconstruction
    # contract presumes inputs comfortably inside the rank test
    m = min(m, n)
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, m)))
    w, _ = np.linalg.qr(rng.standard_normal((m, m)))
    x = u @ np.diag(rng.uniform(0.3, 3.0, size=m)) @ w.T
    frame, r = polar_decompose(x)
    back = frame.mat @ spd_sqrt(r.mat)
    assert np.max(np.abs(back - x)) <= 1e-10 * max(1.0, np.max(np.abs(x)))


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 4), seed=st.integers(0, 10_000))
def test_minors_match_cholesky_property(m, seed):
    r = random_spd(m, np.random.default_rng(seed))
    minors = principal_minors(r)
    prefix = np.cumprod(np.diag(cholesky_upper(r)) ** 2)
    assert np.max(np.abs(minors / prefix - 1.0)) <= 1e-10
