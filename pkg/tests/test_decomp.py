import numpy as np
import pytest

from wtd import decomp
from wtd.errors import DomainError, MajorizationError, RankDeficient

from conftest import (
    assert_exact_upper_triangular,
    assert_unitary,
    complex_gaussian,
    rel_residual,
)


def random_feasible_target(rng, sigma, mixes=6):
    """Random diagonal majorized by sigma: averaging of log-values under a
    random convex combination of permutations (doubly stochastic mixing)."""
    logs = np.log(sigma)
    n = logs.size
    weights = rng.dirichlet(np.ones(mixes))
    mixed = np.zeros(n)
    for w in weights:
        mixed += w * rng.permutation(logs)
    return np.exp(mixed)


class TestQr:
    def test_identity(self):
        f = decomp.qr(np.eye(3))
        assert np.allclose(f.u, np.eye(3), atol=1e-12)
        assert np.allclose(f.t, np.eye(3), atol=1e-12)
        assert np.allclose(f.v, np.eye(3))

    def test_positive_diagonal_matrix(self):
        f = decomp.qr(np.diag([3.0, 2.0]))
        assert np.allclose(f.u, np.eye(2), atol=1e-12)
        assert np.allclose(f.t, np.diag([3.0, 2.0]), atol=1e-12)

    def test_random_rectangular(self, rng):
        a = complex_gaussian(rng, 4, 3)
        f = decomp.qr(a)
        assert rel_residual(f.reconstruct(), a) <= 1e-9
        assert_unitary(f.u)
        assert_exact_upper_triangular(f.t)
        assert np.all(f.diagonal > 0)
        assert np.allclose(f.v, np.eye(3))

    def test_rank_deficient(self, rng):
        col = complex_gaussian(rng, 4, 1)
        a = np.concatenate([col, 2 * col, complex_gaussian(rng, 4, 1)], axis=1)
        with pytest.raises(RankDeficient):
            decomp.qr(a)

    def test_wide_rejected(self, rng):
        with pytest.raises(DomainError):
            decomp.qr(complex_gaussian(rng, 2, 3))


class TestQl:
    def test_identity(self):
        f = decomp.ql(np.eye(2))
        assert np.allclose(f.u, np.eye(2), atol=1e-12)
        assert np.allclose(f.l, np.eye(2), atol=1e-12)

    def test_exchange_matrix(self):
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        f = decomp.ql(a)
        assert np.allclose(f.diagonal, [1.0, 1.0], atol=1e-12)
        assert np.allclose(np.abs(f.u), a, atol=1e-12)
        assert rel_residual(f.reconstruct(), a) <= 1e-9

    def test_random_square(self, rng):
        a = complex_gaussian(rng, 3, 3)
        f = decomp.ql(a)
        assert rel_residual(f.reconstruct(), a) <= 1e-9
        assert_unitary(f.u)
        above = np.triu(np.ones((3, 3)), 1).astype(bool)
        assert np.all(f.l[above] == 0.0)
        assert np.all(f.diagonal > 0)

    def test_random_tall(self, rng):
        a = complex_gaussian(rng, 5, 3)
        f = decomp.ql(a)
        assert rel_residual(f.reconstruct(), a) <= 1e-9
        assert_unitary(f.u)
        assert np.all(f.diagonal > 0)


class TestSvd:
    def test_diagonal(self):
        f = decomp.svd(np.diag([4.0, 1.0]))
        assert np.allclose(f.diagonal, [4.0, 1.0], atol=1e-12)

    def test_unitary_input(self, rng):
        q = decomp.haar_unitary(4, rng)
        f = decomp.svd(q)
        assert np.allclose(f.diagonal, np.ones(4), atol=1e-9)

    def test_random_matches_eigenvalues(self, rng):
        a = complex_gaussian(rng, 5, 3)
        f = decomp.svd(a)
        # Independent route: eigenvalues of the Gram matrix.
        expected = np.sqrt(np.sort(np.linalg.eigvalsh(a.conj().T @ a))[::-1])
        assert np.allclose(f.diagonal, expected, rtol=1e-9, atol=1e-12)
        assert rel_residual(f.reconstruct(), a) <= 1e-9
        assert np.all(np.diff(f.diagonal) <= 1e-12)


class TestMajorizes:
    def test_basic_true(self):
        assert decomp.majorizes([4.0, 1.0], [2.0, 2.0])

    def test_basic_false(self):
        assert not decomp.majorizes([2.0, 2.0], [4.0, 1.0])

    def test_equal_vectors(self):
        assert decomp.majorizes([3.0, 3.0, 3.0], [3.0, 3.0, 3.0])

    def test_product_mismatch(self):
        assert not decomp.majorizes([4.0, 1.0], [2.0, 2.5])

    def test_order_insensitive(self):
        assert decomp.majorizes([1.0, 4.0], [2.0, 2.0])

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            decomp.majorizes([1.0, -2.0], [1.0, 2.0])


class TestGtd:
    def test_svd_is_extremal_case(self, rng):
        a = complex_gaussian(rng, 4, 4)
        sigma = np.linalg.svd(a, compute_uv=False)
        f = decomp.gtd(a, sigma)
        off = f.t - np.diag(np.diag(f.t))
        assert np.max(np.abs(off)) <= 1e-8 * sigma[0]
        assert rel_residual(f.reconstruct(), a) <= 1e-9

    def test_geometric_mean_target(self):
        f = decomp.gtd(np.diag([4.0, 1.0]), np.array([2.0, 2.0]))
        a = np.diag([4.0, 1.0]).astype(complex)
        assert np.allclose(f.diagonal, [2.0, 2.0], rtol=1e-10)
        assert rel_residual(f.reconstruct(), a) <= 1e-9
        assert_unitary(f.u)
        assert_unitary(f.v)

    def test_infeasible_prefix(self):
        with pytest.raises(MajorizationError) as err:
            decomp.gtd(np.diag([4.0, 1.0]), np.array([8.0, 0.5]))
        assert err.value.prefix_index == 1

    def test_random_feasible(self, rng):
        for rows, cols in [(3, 3), (5, 4), (6, 6), (8, 5)]:
            a = complex_gaussian(rng, rows, cols)
            sigma = np.linalg.svd(a, compute_uv=False)
            target = random_feasible_target(rng, sigma)
            f = decomp.gtd(a, target)
            assert np.allclose(f.diagonal, target, rtol=1e-8)
            assert rel_residual(f.reconstruct(), a) <= 1e-9
            assert_unitary(f.u)
            assert_unitary(f.v)
            assert_exact_upper_triangular(f.t)

    def test_unsorted_target_order_preserved(self, rng):
        a = complex_gaussian(rng, 4, 4)
        sigma = np.linalg.svd(a, compute_uv=False)
        target = random_feasible_target(rng, sigma)
        target = target[np.argsort(target)]  # ascending, deliberately unsorted
        f = decomp.gtd(a, target)
        assert np.allclose(f.diagonal, target, rtol=1e-8)

    def test_boundary_violation_detected(self, rng):
        # Scaling the largest value up 1% (and the smallest down, to keep the
        # product) breaks the first prefix inequality.
        for _ in range(5):
            a = complex_gaussian(rng, 5, 5)
            sigma = np.linalg.svd(a, compute_uv=False)
            bad = sigma.copy()
            bad[0] *= 1.01
            bad[-1] /= 1.01
            with pytest.raises(MajorizationError):
                decomp.gtd(a, bad)


class TestGmd:
    def test_two_by_two(self):
        f = decomp.gmd(np.diag([4.0, 1.0]))
        assert np.allclose(f.diagonal, [2.0, 2.0], rtol=1e-10)

    def test_unitary_input(self, rng):
        q = decomp.haar_unitary(3, rng)
        f = decomp.gmd(q)
        assert np.allclose(f.t, np.eye(3), atol=1e-9)

    def test_random_constant_diagonal(self, rng):
        a = complex_gaussian(rng, 4, 4)
        f = decomp.gmd(a)
        d = f.diagonal
        assert (d.max() - d.min()) / d.min() <= 1e-7
        assert rel_residual(f.reconstruct(), a) <= 1e-9


class TestGsvValues:
    def test_identical_pair(self, rng):
        a = complex_gaussian(rng, 4, 3)
        mu = decomp.gsv_values(a, a)
        assert np.allclose(mu, np.ones(3), atol=1e-9)

    def test_scalar_multiple(self, rng):
        a2 = complex_gaussian(rng, 3, 3)
        mu = decomp.gsv_values(2.0 * a2, a2)
        assert np.allclose(mu, np.full(3, 2.0), rtol=1e-9)

    def test_matches_generalized_eigenvalues(self, rng):
        a1 = complex_gaussian(rng, 5, 3)
        a2 = complex_gaussian(rng, 4, 3)
        mu = decomp.gsv_values(a1, a2)
        # Independent route: plain generalized eigenvalues of the Gram pair.
        import scipy.linalg
        vals = scipy.linalg.eigvals(a1.conj().T @ a1, a2.conj().T @ a2)
        expected = np.sqrt(np.sort(np.real(vals))[::-1])
        assert np.allclose(mu, expected, rtol=1e-8)
        assert np.all(np.diff(mu) <= 1e-12)

    def test_singular_second_matrix(self, rng):
        col = complex_gaussian(rng, 4, 1)
        a2 = np.concatenate([col, col], axis=1)
        with pytest.raises(RankDeficient):
            decomp.gsv_values(complex_gaussian(rng, 4, 2), a2)


class TestGsvdDiagonal:
    def test_identity_pair(self):
        f = decomp.gsvd_diagonal(np.eye(2), np.eye(2))
        assert np.allclose(np.diag(f.l1), np.full(2, 1 / np.sqrt(2)), rtol=1e-12)
        assert np.allclose(np.diag(f.l2), np.full(2, 1 / np.sqrt(2)), rtol=1e-12)
        assert np.allclose(f.u1 @ f.l1 @ f.x.conj().T, np.eye(2), atol=1e-12)

    def test_ratios_match_gsv(self, rng):
        a1 = np.concatenate([np.diag([2.0, 1.0]), np.eye(2)], axis=0)
        a2 = np.concatenate([np.eye(2), np.eye(2)], axis=0)
        f = decomp.gsvd_diagonal(a1, a2)
        assert np.allclose(f.gsv, decomp.gsv_values(a1, a2), rtol=1e-9)

    def test_random_pair_invariants(self, rng):
        a1 = complex_gaussian(rng, 5, 3)
        a2 = complex_gaussian(rng, 4, 3)
        f = decomp.gsvd_diagonal(a1, a2)
        assert rel_residual(f.u1 @ f.l1 @ f.x.conj().T, a1) <= 1e-9
        assert rel_residual(f.u2 @ f.l2 @ f.x.conj().T, a2) <= 1e-9
        norm = f.l1.conj().T @ f.l1 + f.l2.conj().T @ f.l2
        assert np.max(np.abs(norm - np.eye(3))) <= 1e-9
        assert_unitary(f.u1)
        assert_unitary(f.u2)
        assert np.all(np.diff(f.gsv) <= 1e-12)


class TestGsvdTriangular:
    def test_identical_pair(self, rng):
        a = complex_gaussian(rng, 4, 3)
        jt = decomp.gsvd_triangular(a, a)
        assert np.allclose(jt.diag_ratios, np.ones(3), rtol=1e-9)

    def test_known_two_by_two(self, rng):
        a1 = complex_gaussian(rng, 2, 2)
        a2 = complex_gaussian(rng, 2, 2)
        jt = decomp.gsvd_triangular(a1, a2)
        assert np.allclose(jt.diag_ratios, decomp.gsv_values(a1, a2), rtol=1e-8)

    def test_random_pair_invariants(self, rng):
        a1 = complex_gaussian(rng, 5, 3)
        a2 = complex_gaussian(rng, 4, 3)
        jt = decomp.gsvd_triangular(a1, a2)
        assert rel_residual(jt.u1 @ jt.t1 @ jt.va.conj().T, a1) <= 1e-9
        assert rel_residual(jt.u2 @ jt.t2 @ jt.va.conj().T, a2) <= 1e-9
        assert np.allclose(jt.diag_ratios, decomp.gsv_values(a1, a2), rtol=1e-8)
        assert np.all(np.diff(jt.diag_ratios) <= 1e-10)
        assert_unitary(jt.va)
        assert_exact_upper_triangular(jt.t1)
        assert_exact_upper_triangular(jt.t2)
        assert np.all(jt.diag1 > 0)
        assert np.all(jt.diag2 > 0)


class TestJointTriangularize:
    def test_identity_right_factor(self, rng):
        a1 = complex_gaussian(rng, 4, 3)
        a2 = complex_gaussian(rng, 5, 3)
        jt = decomp.joint_triangularize(a1, a2, np.eye(3))
        assert np.allclose(jt.t1, decomp.qr(a1).t, atol=1e-12)
        assert np.allclose(jt.t2, decomp.qr(a2).t, atol=1e-12)

    def test_gsvd_right_factor_reproduces_ratios(self, rng):
        a1 = complex_gaussian(rng, 4, 3)
        a2 = complex_gaussian(rng, 5, 3)
        va = decomp.gsvd_triangular(a1, a2).va
        jt = decomp.joint_triangularize(a1, a2, va)
        assert np.allclose(jt.diag_ratios, decomp.gsv_values(a1, a2), rtol=1e-8)

    def test_determinant_identity(self, rng):
        a1 = complex_gaussian(rng, 4, 3)
        a2 = complex_gaussian(rng, 5, 3)
        va = decomp.haar_unitary(3, rng)
        jt = decomp.joint_triangularize(a1, a2, va)
        for diag, a in [(jt.diag1, a1), (jt.diag2, a2)]:
            _, logdet = np.linalg.slogdet(a.conj().T @ a)
            assert np.isclose(2 * np.sum(np.log(diag)), logdet, rtol=1e-8, atol=1e-10)

    def test_non_unitary_rejected(self, rng):
        a1 = complex_gaussian(rng, 4, 3)
        a2 = complex_gaussian(rng, 5, 3)
        with pytest.raises(DomainError):
            decomp.joint_triangularize(a1, a2, 1.5 * np.eye(3))


class TestProperties:
    def test_gtd_existence_boundary(self, rng):
        # Feasibility of the construction must agree with the majorization
        # test on both sides of the boundary.
        for _ in range(20):
            a = complex_gaussian(rng, 5, 5)
            sigma = np.linalg.svd(a, compute_uv=False)
            target = random_feasible_target(rng, sigma)
            feasible = decomp.majorizes(sigma, target)
            try:
                decomp.gtd(a, target)
                built = True
            except MajorizationError:
                built = False
            assert built == feasible

    def test_diagonal_product_conservation(self, rng):
        a = complex_gaussian(rng, 5, 4)
        for _ in range(10):
            va = decomp.haar_unitary(4, rng)
            d = decomp.qr(a @ va).diagonal
            _, logdet = np.linalg.slogdet(a.conj().T @ a)
            assert np.isclose(2 * np.sum(np.log(d)), logdet, rtol=1e-8, atol=1e-10)

    def test_gsv_extremality(self, rng):
        a1 = complex_gaussian(rng, 5, 3)
        a2 = complex_gaussian(rng, 4, 3)
        mu = decomp.gsv_values(a1, a2)
        for _ in range(100):
            va = decomp.haar_unitary(3, rng)
            jt = decomp.joint_triangularize(a1, a2, va)
            assert decomp.majorizes(mu, jt.diag_ratios, rel_tol=1e-8)

    def test_gsv_ratio_inversion(self, rng):
        a1 = complex_gaussian(rng, 5, 4)
        a2 = complex_gaussian(rng, 6, 4)
        fwd = decomp.gsv_values(a1, a2)
        bwd = decomp.gsv_values(a2, a1)
        assert np.allclose(fwd * bwd[::-1], np.ones(4), rtol=1e-8)

    def test_unitarity_and_shape_across_sizes(self, rng):
        for rows, cols in [(2, 2), (4, 3), (6, 6), (8, 5)]:
            a = complex_gaussian(rng, rows, cols)
            f = decomp.qr(a)
            assert_unitary(f.u)
            assert_exact_upper_triangular(f.t)
            g = decomp.svd(a)
            assert_unitary(g.u)
            assert_unitary(g.v)
