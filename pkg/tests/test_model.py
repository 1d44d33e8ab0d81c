import math

import pytest
from hypothesis import given, settings, strategies as st

from bequest_opt import (
    DomainError,
    MarketParams,
    Regime,
    ValidationError,
    classify_regime,
    derive_constants,
    ell_func,
    find_c2,
    g_func,
)
from bequest_opt.model import _c2_imbalance

from cases import ref_params


def valid_params(draw):
    r = draw(st.floats(0.005, 0.08))
    excess = draw(st.floats(0.01, 0.08))
    sigma = draw(st.floats(0.05, 0.5))
    lam = draw(st.floats(0.005, 0.2))
    h = draw(st.floats(1e-6, 1.0))
    b = draw(st.floats(0.1, 10.0))
    c = draw(st.floats(0.0, 0.2))
    return MarketParams(r=r, mu=r + excess, sigma=sigma, lam=lam, h=h, b=b, c=c)


params_strategy = st.composite(valid_params)()


class TestValidation:
    def test_rejects_bad_fields_by_name(self):
        good = dict(r=0.03, mu=0.06, sigma=0.2, lam=0.04, h=0.05, b=1.0, c=0.02)
        for field, value in [("mu", 0.03), ("sigma", 0.0), ("lam", 0.0),
                             ("b", 0.0), ("r", -0.01), ("h", -0.1), ("c", -1.0)]:
            with pytest.raises(ValidationError, match=field):
                MarketParams(**{**good, field: value})

    def test_mu_equal_r_rejected(self):
        with pytest.raises(ValidationError, match="mu"):
            MarketParams(r=0.03, mu=0.03, sigma=0.2, lam=0.04, h=0.05, b=1.0, c=0.0)

    def test_positive_consumption_needs_positive_rate(self):
        with pytest.raises(ValidationError, match="c must be zero"):
            MarketParams(r=0.0, mu=0.03, sigma=0.2, lam=0.04, h=0.05, b=1.0, c=0.01)

    def test_zero_rate_zero_consumption_allowed(self):
        p = MarketParams(r=0.0, mu=0.03, sigma=0.2, lam=0.04, h=0.05, b=1.0, c=0.0)
        d = derive_constants(p)
        assert 0.0 < d.q < 1.0
        assert math.isinf(d.p0)


class TestDerivedConstants:
    def test_reference_thresholds(self):
        d = derive_constants(ref_params(c=0.02))
        assert round(d.c1, 4) == 0.0736
        assert round(d.c2, 4) == 0.0629
        assert d.m == pytest.approx(0.01125, abs=1e-15)
        assert d.h_cut == pytest.approx(0.0290909090909, abs=1e-12)

    def test_safe_level_zero_consumption(self):
        d = derive_constants(ref_params(c=0.0))
        assert d.w_s == pytest.approx(0.625, abs=1e-15)

    def test_safe_level_branches(self):
        # below r*b the premium enters the safe level; above it does not
        assert derive_constants(ref_params(c=0.02)).w_s == pytest.approx(0.875)
        assert derive_constants(ref_params(c=0.05)).w_s == pytest.approx(0.05 / 0.03)

    def test_c2_only_above_premium_cut(self):
        assert derive_constants(ref_params(c=0.02, h=0.02)).c2 is None
        assert derive_constants(ref_params(c=0.02, h=0.05)).c2 is not None

    @given(params_strategy)
    @settings(max_examples=200, deadline=None)
    def test_exponent_orderings(self, p):
        d = derive_constants(p)
        assert d.alpha2 < 0.0 < d.q < 1.0 < d.alpha1 < d.beta1
        assert d.beta2 < 0.0
        assert d.p > 1.0
        assert d.p0 > 1.0

    @given(params_strategy)
    @settings(max_examples=200, deadline=None)
    def test_exponent_ratio_identities(self, p):
        d = derive_constants(p)
        assert abs(d.p - d.beta1 / (d.beta1 - 1.0)) <= 1e-12 * d.p
        assert abs(d.p0 - d.alpha1 / (d.alpha1 - 1.0)) <= 1e-12 * d.p0

    @given(params_strategy)
    @settings(max_examples=200, deadline=None)
    def test_cheap_premium_puts_c1_below_rb(self, p):
        d = derive_constants(p)
        if p.h <= d.h_cut:
            assert d.c1 <= p.r * p.b * (1.0 + 1e-12)
        if d.c2 is not None:
            assert p.r * p.b < d.c2 <= d.c1


class TestFindC2:
    def test_reference_value(self):
        p = ref_params(c=0.02)
        d = derive_constants(p)
        assert round(find_c2(p, d), 4) == 0.0629

    def test_back_substitution_residual(self):
        p = ref_params(c=0.02)
        d = derive_constants(p)
        assert abs(_c2_imbalance(d.c2, p, d)) < 1e-10

    def test_domain_error_at_cut(self):
        p = ref_params(c=0.02)
        d = derive_constants(p)
        at_cut = MarketParams(r=p.r, mu=p.mu, sigma=p.sigma, lam=p.lam,
                              h=d.h_cut, b=p.b, c=p.c)
        with pytest.raises(DomainError):
            find_c2(at_cut, derive_constants(at_cut))


class TestGAndEll:
    def test_g_positive_at_both_exponents(self):
        p = ref_params(c=0.02)
        d = derive_constants(p)
        assert g_func(d.beta1, p, d) > 0.0
        assert g_func(d.beta2, p, d) > 0.0

    def test_g_vanishes_at_zero_premium(self):
        p = ref_params(c=0.02, h=0.0)
        d = derive_constants(p)
        assert d.beta1 == pytest.approx(d.alpha1, rel=1e-14)
        assert abs(g_func(d.beta1, p, d)) < 1e-15

    def test_direct_evaluation(self):
        p = ref_params(c=0.02)
        d = derive_constants(p)
        expected = p.r - (p.r + p.h) * d.beta1 / d.alpha1 + p.h * d.beta1
        assert g_func(d.beta1, p, d) == expected
        expected_ell = d.beta2 - (p.h * d.beta2 / p.lam + 1.0) * d.alpha1
        assert ell_func(d.alpha1, d.beta2, p) == expected_ell

    def test_ell_vanishes_at_zero_premium(self):
        p = ref_params(c=0.02, h=0.0)
        d = derive_constants(p)
        assert abs(ell_func(d.alpha1, d.beta1, p)) < 1e-14

    @given(params_strategy)
    @settings(max_examples=200, deadline=None)
    def test_g_and_ell_sign_pattern(self, p):
        d = derive_constants(p)
        assert g_func(d.beta1, p, d) > 0.0
        assert g_func(d.beta2, p, d) > 0.0
        assert ell_func(d.alpha1, d.beta1, p) < 0.0
        assert ell_func(d.alpha1, d.beta2, p) < 0.0
        assert ell_func(d.alpha2, d.beta1, p) > 0.0
        assert ell_func(d.alpha2, d.beta2, p) < 0.0


class TestClassification:
    def test_reference_examples(self):
        p = ref_params(c=0.02)
        assert classify_regime(p, derive_constants(p)) \
            is Regime.BUY_LEVEL_BELOW_BEQUEST_C_LOW
        p = ref_params(c=0.05)
        assert classify_regime(p, derive_constants(p)) is Regime.BUY_LEVEL_ABOVE_RB
        p = ref_params(c=0.0)
        assert classify_regime(p, derive_constants(p)) is Regime.ZERO_CONSUMPTION
        p = ref_params(c=0.02, h=0.0)
        assert classify_regime(p, derive_constants(p)) is Regime.RUIN_LIMIT_H_ZERO
        p = ref_params(c=0.02, h=0.02)
        assert classify_regime(p, derive_constants(p)) \
            is Regime.FULL_INSURANCE_BELOW_SAFE

    def test_boundary_c_at_c1_routes_to_full_insurance(self):
        p = ref_params(c=0.02, h=0.02)
        d = derive_constants(p)
        boundary = MarketParams(r=p.r, mu=p.mu, sigma=p.sigma, lam=p.lam,
                                h=p.h, b=p.b, c=d.c1)
        assert classify_regime(boundary, derive_constants(boundary)) \
            is Regime.FULL_INSURANCE_BELOW_SAFE

    @given(params_strategy)
    @settings(max_examples=300, deadline=None)
    def test_total_and_single_valued(self, p):
        regime = classify_regime(p, derive_constants(p))
        assert isinstance(regime, Regime)
