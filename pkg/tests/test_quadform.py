"""Gaussian quadratic forms |Y - a|^2: head density, tilt weight,
CF-inversion density and tails, and the two-sided sandwich."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2, ncx2

from polyrand.quadform import (
    HilbertGaussianSpec,
    c1_constant,
    density_p,
    fk_upper_bounds,
    noncentral_fk,
    tail_prob,
    tilt_weight,
    verify_theorem15,
    verify_theorem16,
)

GEO_SPEC = HilbertGaussianSpec(k=4, head_sigma_sq=1.0, tail_sigma_sq=(0.25,), geo_ratio=0.5)
SHIFT_SPEC = HilbertGaussianSpec(
    k=4,
    head_sigma_sq=1.0,
    head_shift=(1.0, 0.5, 0.5, 0.5),
    tail_sigma_sq=(0.25,),
    tail_shift=(0.2,),
    geo_ratio=0.5,
)


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            HilbertGaussianSpec(k=0, head_sigma_sq=1.0)
        with pytest.raises(ValueError):
            HilbertGaussianSpec(k=2, head_sigma_sq=1.0, tail_sigma_sq=(1.5,))
        with pytest.raises(ValueError):
            HilbertGaussianSpec(k=2, head_sigma_sq=1.0, head_shift=(1.0,))

    def test_json_roundtrip_and_unknown_keys(self):
        spec2 = HilbertGaussianSpec.from_json(GEO_SPEC.to_json())
        assert spec2 == GEO_SPEC
        with pytest.raises(ValueError):
            HilbertGaussianSpec.from_json('{"k": 3, "head_sigma_sq": 1, "bogus": 2}')

    def test_expected_tail_geometric_closed_form(self):
        # 1/4 + 1/8 + ... = 1/2
        assert GEO_SPEC.expected_tail == pytest.approx(0.5)

    def test_eigen_arrays_cover_tail(self):
        sig, a = GEO_SPEC.eigen_arrays()
        assert sig[:4].tolist() == [1.0] * 4
        assert sig[4:].sum() == pytest.approx(0.5, rel=1e-12)


class TestTiltWeight:
    def test_quarter_ratio_product(self):
        # sigma_j^2 = 4^{-(j-k)} sigma_1^2, a = 0:
        # W = prod_{i>=1} (1 - 4^{-i})^{-1/2}
        spec = HilbertGaussianSpec(
            k=3, head_sigma_sq=1.0, tail_sigma_sq=(0.25,), geo_ratio=0.25
        )
        want = np.prod([(1 - 4.0**-i) ** -0.5 for i in range(1, 60)])
        tf = tilt_weight(spec)
        assert tf.W == pytest.approx(want, rel=1e-9)
        # [DERIVED] independent mpmath product of (1 - 4^-i)^(-1/2)
        assert tf.W == pytest.approx(1.20514, abs=5e-5)

    def test_k3_thresholds(self):
        # single tail term sigma_4^2 = 1/2: ER = 1/2, u0 = 12, u* = 58.8
        spec = HilbertGaussianSpec(k=3, head_sigma_sq=1.0, tail_sigma_sq=(0.5,))
        tf = tilt_weight(spec)
        assert tf.ER == pytest.approx(0.5)
        assert tf.u0 == pytest.approx(2 * 3 * (1 - 0.5) ** -2 * 0.5)
        assert tf.u_star == pytest.approx(4.9 * tf.u0)  # shifts are zero

    def test_k4_geometric_scenario(self):
        tf = tilt_weight(GEO_SPEC)
        assert tf.ER == pytest.approx(0.5)
        assert tf.u0 == pytest.approx(2 * 4 * (4.0 / 3.0) ** 2 * 0.5)
        assert tf.u_double_star == pytest.approx(5.625 * 9 / 1 * tf.u0)
        # [PAPER] exact threshold for this spectrum
        assert tf.u_double_star == pytest.approx(360.0)

    def test_w_at_least_one(self):
        assert tilt_weight(GEO_SPEC).W >= 1.0
        assert tilt_weight(SHIFT_SPEC).W > tilt_weight(GEO_SPEC).W


class TestHeadDensity:
    @pytest.mark.parametrize("k,lam", [(3, 0.0), (4, 2.5), (5, 0.7), (3, 40.0)])
    @pytest.mark.parametrize("u", [0.3, 2.0, 9.0, 60.0])
    def test_matches_scipy(self, k, lam, u):
        s = 1.3
        mine = noncentral_fk(u, k, s, lam)
        ref = (ncx2.pdf(u / s, k, lam / s) if lam else chi2.pdf(u / s, k)) / s
        assert mine == pytest.approx(ref, rel=1e-11)

    def test_normalization_and_mean(self):
        from scipy.integrate import quad

        k, s, lam = 4, 0.8, 1.7
        total, _ = quad(lambda u: noncentral_fk(u, k, s, lam), 0, 200, limit=400)
        mean, _ = quad(lambda u: u * noncentral_fk(u, k, s, lam), 0, 400, limit=400)
        assert total == pytest.approx(1.0, abs=1e-9)
        assert mean == pytest.approx(k * s + lam, rel=1e-8)

    def test_c1_constant(self):
        assert c1_constant(3) == pytest.approx(3.0 / math.sqrt(math.pi))

    @pytest.mark.parametrize("k", [3, 4, 5])
    @pytest.mark.parametrize("abar", [0.5, 2.0])
    def test_upper_bounds_dominate(self, k, abar):
        u_grid = np.linspace(1e-3, 50.0, 400)
        for u in u_grid:
            f = noncentral_fk(float(u), k, 1.0, abar * abar)
            ba, bb = fk_upper_bounds(float(u), k, 1.0, abar)
            assert f <= ba * (1 + 1e-9), (k, abar, u)
            assert f <= bb * (1 + 1e-9), (k, abar, u)


class TestDensityInversion:
    def test_matches_scipy_for_finite_spec(self):
        # head only: exact noncentral chi-square
        spec = HilbertGaussianSpec(k=3, head_sigma_sq=1.0, head_shift=(1.0, 0.0, 0.0))
        for u in [0.5, 3.0, 10.0, 40.0]:
            p, err = density_p(spec, u)
            assert p == pytest.approx(ncx2.pdf(u, 3, 1.0), rel=1e-9)

    def test_inversion_vs_tilted_mc(self):
        p, perr = density_p(GEO_SPEC, 12.0)
        pm, pmse = density_p(GEO_SPEC, 12.0, method="mc_kde", seed=0, n_samples=400_000)
        assert abs(p - pm) <= 3.5 * (perr + pmse)

    def test_far_tail_relative_precision(self):
        spec = HilbertGaussianSpec(k=4, head_sigma_sq=1.0)
        u = 80.0
        p, err = density_p(spec, u)
        assert p == pytest.approx(chi2.pdf(u, 4), rel=1e-9)
        assert err < 1e-6 * p


class TestTails:
    def test_tail_matches_scipy(self):
        spec = HilbertGaussianSpec(k=4, head_sigma_sq=1.0)
        for r in [1.0, 2.5, 5.0]:
            pr, _ = tail_prob(spec, r)
            assert pr == pytest.approx(chi2.sf(r * r, 4), rel=1e-8)

    def test_tail_vs_mc(self):
        pr, _ = tail_prob(SHIFT_SPEC, 4.0)
        mc, se = tail_prob(SHIFT_SPEC, 4.0, method="mc", seed=0, n_samples=400_000)
        assert abs(pr - mc) <= 3.5 * se

    @given(st.floats(0.8, 4.0))
    @settings(max_examples=20, deadline=None)
    def test_tail_decreasing(self, r):
        a, _ = tail_prob(GEO_SPEC, r)
        b, _ = tail_prob(GEO_SPEC, r + 0.25)
        assert b <= a * (1 + 1e-9)


class TestSandwich:
    def test_empty_tail_statistic_is_one(self):
        spec = HilbertGaussianSpec(k=4, head_sigma_sq=1.0)
        tf = tilt_weight(spec)
        assert tf.W == pytest.approx(1.0)
        rep = verify_theorem15(spec, [400.0, 500.0])
        assert rep.all_pass
        for row in rep.rows:
            assert row.statistic == pytest.approx(1.0, abs=1e-8)

    def test_geometric_tail_within_sandwich(self):
        tf = tilt_weight(GEO_SPEC)
        grid = np.linspace(tf.u_double_star, 3 * tf.u_double_star, 4)
        rep = verify_theorem15(GEO_SPEC, grid)
        assert rep.all_pass
        assert 0.11875 <= rep.min_statistic
        assert rep.max_statistic <= 1.05

    def test_k3_path(self):
        spec = HilbertGaussianSpec(
            k=3, head_sigma_sq=1.0, head_shift=(0.5, 0.0, 0.0), tail_sigma_sq=(0.3, 0.2)
        )
        tf = tilt_weight(spec)
        rep = verify_theorem15(spec, [tf.u_star, 2 * tf.u_star])
        assert rep.all_pass

    def test_mc_cross_check_flag(self):
        rep = verify_theorem15(GEO_SPEC, [20.0, 40.0], seed=1, mc_samples=200_000)
        assert rep.meta["mc_cross_check"] is True


class TestTailEnvelope:
    def test_positive_finite_and_stable_under_refinement(self):
        tf = tilt_weight(SHIFT_SPEC)
        abar = math.sqrt(SHIFT_SPEC.abar_sq(4))
        r_min = 1.0 / abar + 2 * abar + math.sqrt(tf.u_double_star)
        coarse = np.linspace(1.05 * r_min, 1.6 * r_min, 5)
        fine = np.linspace(1.05 * r_min, 1.6 * r_min, 9)
        rep_c = verify_theorem16(SHIFT_SPEC, coarse)
        rep_f = verify_theorem16(SHIFT_SPEC, fine)
        assert rep_c.all_pass and rep_f.all_pass
        ratio_c = rep_c.meta["max_min_ratio"]
        ratio_f = rep_f.meta["max_min_ratio"]
        assert math.isfinite(ratio_c)
        assert abs(ratio_f - ratio_c) / ratio_c < 0.2

    def test_inadmissible_rows_excluded(self):
        rep = verify_theorem16(SHIFT_SPEC, [1.0, 2.0])
        assert len(rep.rows) == 0
        assert rep.meta["excluded"] == 2
