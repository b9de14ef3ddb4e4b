from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ortho_group

from conftest import random_symmetric, symmetric_matrices
from ricci_pinch.exterior import (
    PForm,
    SymmetricEndomorphism,
    apply_derivation,
    compound_matrix,
    derivation_matrix,
    eigen_coframe,
    enumerate_multi_indices,
    from_frame,
    t_matrix,
    t_operator,
    t_spectrum_in_eigenbasis,
    to_frame,
)


def derivation_by_complex_step(a, p):
    """d/dt of the p-th compound of (I + tA) at t = 0, via the complex step.

    (A^[p] theta_I)(e_J) = d/dt det((I + tA)[I, J]), so this is the transpose
    of the derivation matrix; independent of the slot-sum assembly.
    """
    h = 1e-30
    n = a.shape[0]
    idx = np.array(enumerate_multi_indices(n, p)) - 1
    m = np.eye(n) + 1j * h * a
    sub = m[idx[:, None, :, None], idx[None, :, None, :]]
    return (np.linalg.det(sub).imag / h).T


class TestMultiIndices:
    def test_small_case(self):
        assert enumerate_multi_indices(3, 2) == [(1, 2), (1, 3), (2, 3)]

    def test_top_degree(self):
        assert enumerate_multi_indices(4, 4) == [(1, 2, 3, 4)]

    @pytest.mark.parametrize("n,p", [(6, 3), (7, 1), (12, 6), (5, 5)])
    def test_count_sorted_unique(self, n, p):
        idx = enumerate_multi_indices(n, p)
        assert len(idx) == comb(n, p)
        assert idx == sorted(set(idx))
        assert all(all(a < b for a, b in zip(i, i[1:])) for i in idx)
        assert all(1 <= i[0] and i[-1] <= n for i in idx)

    @pytest.mark.parametrize("n,p", [(3, 0), (3, 4), (0, 1)])
    def test_out_of_range(self, n, p):
        with pytest.raises(ValueError):
            enumerate_multi_indices(n, p)


class TestSymmetricEndomorphism:
    def test_symmetrises(self):
        a = SymmetricEndomorphism([[1.0, 2.0], [0.0, 3.0]])
        assert np.array_equal(a.matrix, a.matrix.T)
        assert a.matrix[0, 1] == 1.0

    @given(symmetric_matrices())
    def test_reconstruction(self, m):
        a = SymmetricEndomorphism(m)
        q, mu = a.eigenvectors, a.eigenvalues
        assert np.allclose((q * mu) @ q.T, a.matrix, atol=1e-12 * (1 + np.linalg.norm(m)))
        assert np.all(np.diff(mu) >= 0)

    def test_immutable(self):
        a = SymmetricEndomorphism(np.eye(3))
        with pytest.raises(ValueError):
            a.matrix[0, 0] = 2.0

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros(3), [[np.nan]]])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(ValueError):
            SymmetricEndomorphism(bad)


class TestPForm:
    def test_coefficient_count_checked(self):
        with pytest.raises(ValueError):
            PForm(4, 2, np.zeros(5))

    def test_basis_evaluation(self):
        # theta_(1,3)(e1, e3) = 1 and antisymmetry
        w = PForm.basis(4, (1, 3))
        e = np.eye(4)
        assert w(e[0], e[2]) == pytest.approx(1.0)
        assert w(e[2], e[0]) == pytest.approx(-1.0)
        assert w(e[0], e[1]) == 0.0

    def test_bad_index(self):
        with pytest.raises(ValueError):
            PForm.basis(4, (3, 1))


class TestDerivation:
    def test_identity_scales_by_degree(self, rng):
        for p in (1, 2, 3):
            w = PForm(5, p, rng.standard_normal(comb(5, p)))
            out = apply_derivation(SymmetricEndomorphism(np.eye(5)), w)
            assert np.allclose(out.coeffs, p * w.coeffs)

    def test_zero_operator(self, rng):
        w = PForm(4, 2, rng.standard_normal(6))
        assert np.allclose(apply_derivation(SymmetricEndomorphism(np.zeros((4, 4))), w).coeffs, 0.0)

    def test_diagonal_example(self):
        a = SymmetricEndomorphism(np.diag([2.0, 3.0, 5.0]))
        out = apply_derivation(a, PForm.basis(3, (1, 2)))
        assert np.allclose(out.coeffs, [5.0, 0.0, 0.0])

    def test_degree_one_is_the_matrix(self, rng):
        m = random_symmetric(rng, 5)
        assert np.allclose(derivation_matrix(SymmetricEndomorphism(m), 1), m, atol=1e-13)

    @pytest.mark.parametrize("n,p", [(4, 2), (5, 2), (5, 3), (6, 3), (7, 2)])
    def test_matches_complex_step_oracle(self, rng, n, p):
        m = random_symmetric(rng, n)
        got = derivation_matrix(SymmetricEndomorphism(m), p)
        assert np.allclose(got, derivation_by_complex_step(m, p), atol=1e-12)

    @given(symmetric_matrices(min_n=3, max_n=6), st.integers(1, 3))
    def test_self_adjoint(self, m, p):
        p = min(p, m.shape[0])
        d = derivation_matrix(SymmetricEndomorphism(m), p)
        assert np.allclose(d, d.T, atol=1e-12 * (1 + np.abs(d).max()))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_derivation(SymmetricEndomorphism(np.eye(3)), PForm.basis(4, (1, 2)))


class TestTOperator:
    @pytest.mark.parametrize("n,p", [(4, 2), (6, 3), (5, 1)])
    def test_identity(self, rng, n, p):
        w = PForm(n, p, rng.standard_normal(comb(n, p)))
        out = t_operator(SymmetricEndomorphism(np.eye(n)), w)
        assert np.allclose(out.coeffs, p * (n - p) * w.coeffs)

    def test_zero(self):
        out = t_operator(SymmetricEndomorphism(np.zeros((4, 4))), PForm.basis(4, (2, 4)))
        assert np.allclose(out.coeffs, 0.0)

    def test_diagonal_example(self):
        a = SymmetricEndomorphism(np.diag([2.0, 3.0, 5.0]))
        out = t_operator(a, PForm.basis(3, (1, 3)))
        assert np.allclose(out.coeffs, [0.0, 21.0, 0.0])

    def test_matrix_agrees_with_operator(self, rng):
        a = SymmetricEndomorphism(random_symmetric(rng, 5))
        w = PForm(5, 2, rng.standard_normal(10))
        assert np.allclose(t_matrix(a, 2) @ w.coeffs, t_operator(a, w).coeffs, atol=1e-12)

    def test_basis_covariance(self, rng):
        # rotating both A and the form commutes with T
        n, p = 5, 2
        a = SymmetricEndomorphism(random_symmetric(rng, n))
        w = PForm(n, p, rng.standard_normal(comb(n, p)))
        r = ortho_group.rvs(n, random_state=3)
        c = compound_matrix(r, p)
        rotated = SymmetricEndomorphism(r @ a.matrix @ r.T)
        lhs = t_operator(rotated, PForm(n, p, c @ w.coeffs)).coeffs
        rhs = c @ t_operator(a, w).coeffs
        assert np.allclose(lhs, rhs, atol=1e-10)


class TestSpectrum:
    def test_identity(self):
        vals = [v for _, v in t_spectrum_in_eigenbasis(SymmetricEndomorphism(np.eye(4)), 2)]
        assert np.allclose(vals, 4.0)

    def test_traceless_example(self):
        # the standard basis already diagonalises diag(1, -1, 0, 0)
        a = SymmetricEndomorphism(np.diag([1.0, -1.0, 0.0, 0.0]))
        diag = dict(zip(enumerate_multi_indices(4, 2), np.diag(t_matrix(a, 2))))
        assert diag[(1, 2)] == pytest.approx(0.0)
        assert diag[(1, 3)] == pytest.approx(-1.0)
        closed = sorted(v for _, v in t_spectrum_in_eigenbasis(a, 2))
        assert closed == pytest.approx(sorted(diag.values()))

    def test_diagonal_in_eigen_coframe(self, rng):
        a = SymmetricEndomorphism(random_symmetric(rng, 6))
        t = t_matrix(a, 3, eigen_coframe(a))
        expected = [v for _, v in t_spectrum_in_eigenbasis(a, 3)]
        assert np.allclose(np.diag(t), expected, atol=1e-10)
        assert np.abs(t - np.diag(np.diag(t))).max() < 1e-10

    @given(symmetric_matrices(min_n=2, max_n=5))
    def test_eigenvalues_match_brute_force(self, m):
        a = SymmetricEndomorphism(m)
        for p in range(1, min(3, a.n) + 1):
            brute = np.linalg.eigvalsh(t_matrix(a, p))
            closed = sorted(v for _, v in t_spectrum_in_eigenbasis(a, p))
            assert np.allclose(brute, closed, atol=1e-9 * (1 + np.abs(m).max()) ** 2)


class TestFrames:
    def test_round_trip(self, rng):
        q = ortho_group.rvs(5, random_state=1)
        w = PForm(5, 3, rng.standard_normal(10))
        back = from_frame(5, 3, to_frame(w, q), q)
        assert np.allclose(back.coeffs, w.coeffs)

    def test_compound_is_orthogonal(self):
        q = ortho_group.rvs(6, random_state=2)
        c = compound_matrix(q, 3)
        assert np.allclose(c @ c.T, np.eye(20), atol=1e-12)

    def test_to_frame_evaluates_on_frame_vectors(self, rng):
        q = ortho_group.rvs(4, random_state=5)
        w = PForm(4, 2, rng.standard_normal(6))
        coeffs = to_frame(w, q)
        # coefficient of (1, 3) is w(q_1, q_3)
        assert coeffs[1] == pytest.approx(w(q[:, 0], q[:, 2]))
