import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ricci_pinch.pinching import (
    PinchingParams,
    Status,
    bound_b,
    bound_identity_residual,
    classify,
    even_dimension_bound,
    final_constant,
    k_range_ok,
    lambda_value,
    odd_dimension_bound,
    theorem1_k_range_ok,
)

H_GRID = [round(0.1 * i, 10) for i in range(51)]


def admissible(n_values=range(4, 13)):
    return [(n, k) for n in n_values for k in range(2, n // 2 + 1)]


@st.composite
def params(draw):
    n = draw(st.integers(4, 12))
    k = draw(st.integers(2, n // 2))
    h = draw(st.floats(0, 20, allow_nan=False))
    return PinchingParams(n, k, h)


def b_high_precision(n, k, h):
    mpmath.mp.dps = 40
    n, k, h = mpmath.mpf(n), mpmath.mpf(k), mpmath.mpf(h)
    return n * (k - 1) / k + n * (k - 1) * h * (n * h + mpmath.sqrt(n * n * h * h + 4 * k * (n - k))) / (2 * k * k)


class TestParams:
    @pytest.mark.parametrize("n,k,h", [(3, 2, 0.0), (8, 1, 0.0), (8, 5, 0.0), (8, 3, -0.1), (8, 3, math.inf)])
    def test_rejects(self, n, k, h):
        with pytest.raises(ValueError):
            PinchingParams(n, k, h)

    def test_rejects_non_integer(self):
        with pytest.raises(ValueError):
            PinchingParams(8.5, 3, 0.0)

    def test_boundary_k_accepted(self):
        assert PinchingParams(8, 4, 0.0).k == 4


class TestBound:
    def test_trivial_value(self):
        assert bound_b(PinchingParams(4, 2, 0.0)) == 2.0

    @pytest.mark.parametrize("n,k", admissible())
    def test_matches_high_precision(self, n, k):
        for h in (0.0, 0.3, 2.5, 5.0):
            exact = b_high_precision(n, k, h)
            assert bound_b(PinchingParams(n, k, h)) == pytest.approx(float(exact), rel=1e-14)

    @given(params())
    def test_at_least_h_zero_value(self, p):
        assert bound_b(p) >= p.n * (p.k - 1) / p.k

    @pytest.mark.parametrize("n,k", admissible())
    def test_increasing_in_h(self, n, k):
        vals = [bound_b(PinchingParams(n, k, h)) for h in H_GRID]
        assert np.all(np.diff(vals) > 0)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_even_specialisation(self, k):
        n = 2 * k
        for h in H_GRID:
            b = bound_b(PinchingParams(n, k, h))
            assert even_dimension_bound(n, h) == pytest.approx(b, rel=1e-12)

    @pytest.mark.parametrize("n", [5, 7, 9, 11])
    def test_odd_specialisation(self, n):
        k = (n - 1) // 2
        for h in H_GRID:
            b = bound_b(PinchingParams(n, k, h))
            assert odd_dimension_bound(n, h) == pytest.approx(b, rel=1e-12)


class TestLambda:
    def test_trivial_value(self):
        assert lambda_value(PinchingParams(4, 2, 0.0)) == 1.0

    def test_derived_value(self):
        assert lambda_value(PinchingParams(9, 4, 0.0)) == pytest.approx(math.sqrt(5) / 2, rel=1e-15)

    @given(params())
    def test_is_positive_root(self, p):
        lam = lambda_value(p)
        roots = np.roots([p.k, -p.n * p.H, -(p.n - p.k)])
        assert lam > 0
        assert lam == pytest.approx(roots.real.max(), rel=1e-10)
        assert abs(p.k * lam**2 - p.n * p.H * lam - (p.n - p.k)) <= 1e-12 * (1 + p.n * p.H * lam + p.k * lam**2)

    @pytest.mark.parametrize("n,k", admissible())
    def test_h_zero(self, n, k):
        assert lambda_value(PinchingParams(n, k, 0.0)) == pytest.approx(math.sqrt((n - k) / k), rel=1e-12)


class TestIdentities:
    @pytest.mark.parametrize("n,k", admissible())
    def test_bound_identity_on_grid(self, n, k):
        for h in H_GRID:
            p = PinchingParams(n, k, h)
            assert abs(bound_identity_residual(p)) <= 1e-12 * (1 + bound_b(p))

    @pytest.mark.parametrize("n,k", admissible())
    def test_final_constant_vanishes(self, n, k):
        for h in H_GRID:
            assert abs(final_constant(PinchingParams(n, k, h))) <= 1e-12 * (1 + bound_b(PinchingParams(n, k, h)))


class TestClassify:
    def test_strict(self):
        v = classify(3.0, PinchingParams(4, 2, 0.0))
        assert v.status is Status.STRICT
        assert v.margin == pytest.approx(1.0)

    def test_equality(self):
        assert classify(2.0, PinchingParams(4, 2, 0.0)).status is Status.EQUALITY

    def test_violated(self):
        assert classify(1.9, PinchingParams(4, 2, 0.0)).status is Status.VIOLATED

    @pytest.mark.parametrize("tol", [0.0, -1e-9, math.nan])
    def test_bad_tol(self, tol):
        with pytest.raises(ValueError):
            classify(2.0, PinchingParams(4, 2, 0.0), tol)

    @given(params(), st.floats(-5, 5, allow_nan=False), st.floats(1e-12, 1e-3))
    def test_verdict_matches_margin(self, p, offset, tol):
        v = classify(bound_b(p) + offset, p, tol)
        if v.margin > tol:
            assert v.status is Status.STRICT
        elif v.margin < -tol:
            assert v.status is Status.VIOLATED
        else:
            assert v.status is Status.EQUALITY

    def test_status_strings(self):
        assert [s.value for s in Status] == ["Strict", "Equality", "Violated"]


class TestRanges:
    @pytest.mark.parametrize("n,k,expected", [(8, 3, True), (8, 4, False), (9, 4, False), (9, 3, True), (6, 2, True)])
    def test_theorem_range(self, n, k, expected):
        assert theorem1_k_range_ok(n, k) is expected

    @pytest.mark.parametrize("n,k,expected", [(4, 2, True), (8, 4, True), (9, 4, True), (9, 5, False), (3, 2, False)])
    def test_definition_range(self, n, k, expected):
        assert k_range_ok(n, k) is expected
