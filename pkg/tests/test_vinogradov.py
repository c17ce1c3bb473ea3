"""Mean-value counting J_k(P), the stochastic integral I_k(P), and the
explicit-constant bound checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyrand.distributions import lattice_uniform, uniform_interval
from polyrand.polynomials import VinogradovPolynomial
from polyrand.vinogradov import (
    InfeasibleSize,
    concentration_sup,
    ik_estimate,
    ik_uniform_importance,
    jk_count,
    jk_unit_cell_quadrature,
    remark3_check,
    verify_theorem7,
    verify_theorem8,
    verify_theorem9,
    verify_theorem10,
    vinogradov_constants,
    weyl_sum,
)


class TestWeylSum:
    def test_zero_polynomial_gives_P(self):
        f = VinogradovPolynomial(3, (0.0, 0.0, 0.0))
        assert weyl_sum(10, f) == pytest.approx(10.0)

    def test_integer_coefficients_give_P(self):
        # e^{2 pi i f(x)} = 1 for integer f(x)
        f = VinogradovPolynomial(2, (3.0, 2.0))
        assert weyl_sum(7, f) == pytest.approx(7.0)

    @given(
        st.integers(1, 30),
        st.lists(st.floats(-1, 1), min_size=1, max_size=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_trivial_bound(self, P, coeffs):
        f = VinogradovPolynomial(len(coeffs), tuple(coeffs))
        assert abs(weyl_sum(P, f)) <= P + 1e-9


class TestJkCount:
    @pytest.mark.parametrize("P", range(1, 7))
    @pytest.mark.parametrize("m", range(1, 5))
    @pytest.mark.parametrize("k", range(1, 4))
    def test_enumerate_equals_histogram(self, P, m, k):
        a = jk_count(P, m, k, method="enumerate").count
        b = jk_count(P, m, k, method="signature_histogram").count
        assert a == b

    @pytest.mark.parametrize("P", range(1, 11))
    def test_k1_closed_form(self, P):
        assert jk_count(P, 3, 1).count == P

    @pytest.mark.parametrize("P", range(1, 11))
    def test_k2_closed_form(self, P):
        # power sums of order 1..m >= 2 force multiset equality:
        # P^2 ordered diagonal pairs plus P(P-1) swapped ones
        # [TRIVIAL] closed form for the k=2 system
        assert jk_count(P, 3, 2).count == 2 * P * P - P

    def test_diagonal_bounds(self):
        c = jk_count(5, 3, 3)
        assert 5**3 <= c.count <= 5**6

    def test_infeasible_enumerate_raises(self):
        with pytest.raises(InfeasibleSize):
            jk_count(50, 3, 4, method="enumerate")

    @pytest.mark.parametrize("P", [2, 3, 4])
    @pytest.mark.parametrize("k", [1, 2])
    def test_unit_cell_quadrature_exact(self, P, k):
        J = jk_count(P, 3, k).count
        q = jk_unit_cell_quadrature(P, 3, k)
        assert q == pytest.approx(J, rel=1e-6)


class TestTheorem7:
    def test_constants(self):
        delta, log_c = vinogradov_constants(3, 1)
        assert delta == pytest.approx(2.0)
        # log c_1 = 6*3*log(3) + 4*3*4*log(6)
        # [PAPER] explicit constant formula at m=3, tau=1
        assert log_c == pytest.approx(18 * math.log(3) + 48 * math.log(6))
        delta3, _ = vinogradov_constants(3, 3)
        assert delta3 == pytest.approx(6.0 * (1.0 - (2.0 / 3.0) ** 3))

    def test_bound_holds_on_grid(self):
        rep = verify_theorem7(range(2, 21), 3, 1)
        assert rep.all_pass
        assert rep.meta["k"] == 3
        # growth exponent of J_3(P) for m=3 sits between k and 2k - delta
        assert 3.0 <= rep.meta["slope"] <= 4.0


class TestIkEstimate:
    def test_remark3_identity(self):
        for P in (2, 3, 4):
            for k in (1, 2):
                rep = remark3_check(P, 3, k)
                assert rep.all_pass, (P, k)

    def test_lattice_matches_identity_by_mc(self):
        P, m, k = 3, 3, 2
        expected = 2**m * float(P) ** (-2 * k) * jk_count(P, m, k).count
        est = ik_estimate(lattice_uniform(P), P, m, k, n_mc=60_000, seed=0)
        assert abs(est.value - expected) <= 4.0 * est.std_error
        assert est.std_error < 0.3 * expected

    def test_importance_uniform_small_P_matches_direct(self):
        # at P = 2 the plain estimator still resolves the integral, so
        # the two independent estimators must agree
        P, m, k = 2.0, 2, 3
        imp, imp_se = ik_uniform_importance(P, m, k, n_mc=40_000, seed=1)
        direct = ik_estimate(
            uniform_interval(-P, P), P, m, k, n_mc=20_000, seed=2, n_inner=4_000
        )
        assert abs(imp - direct.value) <= 4.0 * math.hypot(imp_se, direct.std_error)

    def test_theorem9_bound(self):
        rep = verify_theorem9(32.0, 3, 2, n_mc=8_000, seed=0)
        assert rep.all_pass
        # [PAPER] explicit bound at m=3, b=2, P=32
        assert rep.meta["bound"] == pytest.approx(2.0**48 * 32.0**-9 * 4.0)

    def test_theorem10_ratio(self):
        rep = verify_theorem10(
            lambda P: lattice_uniform(int(P)), [2.0, 4.0, 8.0], 3, 2, n_mc=4_000, seed=0
        )
        assert rep.all_pass


class TestConcentration:
    def test_lattice_exact(self):
        # the half-open window (a, a+1] holds exactly one lattice point
        assert concentration_sup(lattice_uniform(5)) == pytest.approx(0.2)

    def test_uniform_exact_and_empirical_agree(self):
        d = uniform_interval(-2, 2)
        assert concentration_sup(d) == pytest.approx(0.25)
        emp = concentration_sup(d, method="empirical", n=200_000, seed=0)
        assert emp == pytest.approx(0.25, abs=0.01)

    def test_theorem8_stability(self):
        rep = verify_theorem8(
            lambda P: lattice_uniform(int(P)), [4.0, 8.0, 16.0], 3, 1, 4_000, 0
        )
        assert rep.all_pass
