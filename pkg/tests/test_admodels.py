import math

import pytest
from numpy.testing import assert_allclose

from sepad import exprfn as E
from sepad.admodels import (CoeffTable, R_n, beta_profile, binomial_transform,
                            calR_derivatives, coeff_table, coeff_table_s1,
                            constant_beta, custom_radial, general_family,
                            phi_closed_form, radial_R, _alpha_rows)
from sepad.cmcheck import cm_test, phi_from_R
from sepad.errors import DomainError
from sepad.specfun import MLSpec, gamma_recip, ml_eval, pochhammer

from conftest import laplace_quadrature


class TestRadialR:
    def test_constant(self):
        assert radial_R(constant_beta(0.5), 4.0) == 0.5

    def test_family_halving(self):
        assert radial_R(general_family(0.0, 1.0, 1.0), 1.0) == 0.5

    def test_family_collapse(self):
        m = general_family(0.3, 0.3, 0.8)
        for x in (0.2, 1.0, 7.0):
            assert_allclose(radial_R(m, x), x ** -0.3, rtol=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            radial_R(constant_beta(0.5), 0.0)

    def test_beta_cap(self):
        with pytest.raises(DomainError):
            constant_beta(1.2)
        with pytest.raises(DomainError):
            general_family(0.5, 1.3, 1.0)


class TestBetaProfile:
    def test_constant(self):
        assert beta_profile(constant_beta(0.3), 2.0) == 0.3

    def test_family_centre_limit(self):
        m = general_family(0.2, 0.9, 0.6)
        assert_allclose(beta_profile(m, 1e-6), 0.2, atol=1e-5)

    def test_family_transition_midpoint(self):
        m = general_family(0.2, 0.9, 0.6, ra=2.0)
        assert_allclose(beta_profile(m, 2.0), 0.55, rtol=1e-13)

    def test_custom_matches_family(self):
        b1, b2, s = 0.1, 0.7, 0.5
        zeta = (b2 - b1) / s
        expr = E.parse_expr(f"x^(-{b1}) * pow(1 + x^{s}, -{zeta})")
        mc = custom_radial(expr)
        mg = general_family(b1, b2, s)
        for r in (0.3, 1.0, 2.5):
            assert_allclose(beta_profile(mc, r), beta_profile(mg, r), rtol=1e-10)


class TestRn:
    def test_constant_beta_values(self):
        m = constant_beta(0.5)
        assert_allclose(R_n(m, 2, 1.0), 0.75, rtol=1e-15)   # (1/2)(3/2)
        assert R_n(m, 0, 4.0) == radial_R(m, 4.0)

    def test_family_first_row_closed(self):
        # s=1, b1=0, b2=1: R_(1)(x) = (1+x)^{-2}
        m = general_family(0.0, 1.0, 1.0)
        assert_allclose(R_n(m, 1, 1.0), 0.25, rtol=1e-14)

    def test_beta_one_rows_vanish(self):
        m = constant_beta(1.0)
        assert R_n(m, 0, 2.0) == 0.5
        for n in (1, 2, 5):
            assert R_n(m, n, 2.0) == 0.0

    @pytest.mark.parametrize("n", [1, 3, 6, 8])
    def test_family_vs_symbolic(self, n):
        b1, b2, s = 0.3, 0.9, 0.7
        zeta = (b2 - b1) / s
        m = general_family(b1, b2, s)
        expr = E.mul(E.pow_(E.X, -b1),
                     E.pow_(E.add(E.const(1.0), E.pow_(E.X, s)), -zeta))
        for x in (0.5, 1.0, 2.0):
            sym = E.nth_derivative(E.mul(E.pow_(E.X, float(n)), expr), n).eval(x)
            assert_allclose(R_n(m, n, x), sym, rtol=1e-9)

    def test_rescaling_is_transparent(self):
        # R_(n) with transition radius ra equals the unit-scale rows at x/ra^2
        m1 = general_family(0.1, 0.8, 0.6, ra=3.0)
        m0 = general_family(0.1, 0.8, 0.6, ra=1.0)
        for n in (0, 2, 4):
            assert_allclose(R_n(m1, n, 4.5), R_n(m0, n, 0.5), rtol=1e-13)


class TestCoeffTable:
    def test_row_zero(self):
        t = coeff_table(0.3, 0.8, 0.6, 0)
        assert t.a_tilde == (1.0,) and t.t_tilde == (1.0,)

    def test_s1_ratio_property(self):
        # t_{n,k}/(1-b1)_n = (1-b2)_k/(1-b1)_k
        b1, b2, n = 0.2, 0.8, 3
        t = coeff_table(b1, b2, 1.0, n)
        base = pochhammer(1.0 - b1, n, "rising")
        for k in range(n + 1):
            plain = t.t_tilde[k] / math.comb(n, k)
            expect = base * pochhammer(1.0 - b2, k, "rising") / pochhammer(1.0 - b1, k, "rising")
            assert_allclose(plain, expect, rtol=1e-11)

    def test_s1_closed_table_matches(self):
        a = coeff_table(0.2, 0.8, 1.0, 5)
        b = coeff_table_s1(0.2, 0.8, 5)
        assert_allclose(a.t_tilde, b.t_tilde, rtol=1e-10)
        assert_allclose(a.a_tilde, b.a_tilde, rtol=1e-10, atol=1e-12)

    def test_binomial_transform_involution(self):
        seq = [1.0, 0.4, -0.3, 2.2, 0.05, -1.7]
        twice = binomial_transform(binomial_transform(seq))
        assert_allclose(twice, seq, rtol=1e-12, atol=1e-13)

    def test_round_trip_through_transform(self):
        n = 8
        t = coeff_table(0.15, 0.85, 0.45, n)
        a_plain = [((-1.0) ** k) * t.a_tilde[k] / math.comb(n, k) for k in range(n + 1)]
        t_plain = binomial_transform(a_plain)
        back = binomial_transform(t_plain)
        assert_allclose(back, a_plain, rtol=1e-10, atol=1e-10)
        t_expect = [t.t_tilde[k] / math.comb(n, k) for k in range(n + 1)]
        assert_allclose(t_plain, t_expect, rtol=1e-9, atol=1e-9)

    def test_recurrence_matches_finite_differences(self):
        # the explicit alternating sums lose digits on the small trailing
        # coefficients as n grows; compare against the row scale there
        rows = _alpha_rows(0.2, 0.8, 0.6, 10)
        for n in (3, 7):
            ct = coeff_table(0.2, 0.8, 0.6, n)
            assert_allclose(rows[n], ct.a_tilde, rtol=1e-10, atol=1e-12)
        ct10 = coeff_table(0.2, 0.8, 0.6, 10)
        scale = max(abs(v) for v in rows[10])
        assert_allclose(rows[10], ct10.a_tilde, rtol=1e-6, atol=1e-7 * scale)

    def test_order_cap(self):
        with pytest.raises(DomainError):
            coeff_table(0.1, 0.5, 0.5, 30)

    def test_s1_nonnegative_rows(self):
        # all t~ >= 0 for beta1, beta2 <= 1 at s = 1
        for b1 in (-1.0, -0.2, 0.3, 0.9):
            for b2 in (-0.8, 0.1, 0.7, 1.0):
                t = coeff_table(b1, b2, 1.0, 8)
                assert min(t.t_tilde) >= -1e-9 * max(abs(v) for v in t.t_tilde)

    def test_chu_vandermonde(self):
        # sum_k (-1)^k C(n,k) (b)_k/(c)_k = (c-b)_n/(c)_n
        for n, b, c in ((4, 0.7, 1.3), (6, -0.2, 2.1)):
            lhs = sum(((-1.0) ** k) * math.comb(n, k)
                      * pochhammer(b, k, "rising") / pochhammer(c, k, "rising")
                      for k in range(n + 1))
            rhs = pochhammer(c - b, n, "rising") / pochhammer(c, n, "rising")
            assert_allclose(lhs, rhs, rtol=1e-10)

    def test_tau_nonnegative_sampled(self):
        # tau_n(y) = sum t~_{n,k} y^k >= 0 for y > 0 at s = 1
        for b1, b2 in ((0.9, -0.5), (-1.0, 1.0), (0.5, 0.5)):
            t = coeff_table(b1, b2, 1.0, 8)
            for y in (0.01, 0.5, 3.0, 40.0):
                val = sum(c * y ** k for k, c in enumerate(t.t_tilde))
                assert val >= -1e-9


class TestPhiClosedForm:
    def test_constant_beta(self):
        v = phi_closed_form(constant_beta(0.4), 2.0)
        assert v.atom_weight == 0.0
        assert_allclose(v.regular, 2.0 ** -0.4 * gamma_recip(0.6), rtol=1e-14)

    def test_kummer_collapse(self):
        # s=1, beta2=1: phi(t) = t^{-b1} e^{-t}/Gamma(1-b1)
        b1, t = 0.3, 1.7
        v = phi_closed_form(general_family(b1, 1.0, 1.0), t)
        assert_allclose(v.regular, t ** (-b1) * math.exp(-t) * gamma_recip(1.0 - b1),
                        rtol=1e-12)

    def test_atom_for_radial_orbit_limit(self):
        m = general_family(1.0, 1.0, 0.5)
        v = phi_closed_form(m, 1.0)
        assert v.atom_weight == 1.0
        # regular part: t^{-1} E^0_{0.5,0}(-sqrt t) = 0 identically (zeta = 0)
        assert v.regular == 0.0
        m2 = general_family(1.0, 0.5, 0.5)
        v2 = phi_closed_form(m2, 1.0)
        assert v2.atom_weight == 1.0
        assert_allclose(v2.regular, ml_eval(MLSpec(-1.0, 0.5, 0.0), -1.0), rtol=1e-12)

    def test_custom_rejected(self):
        with pytest.raises(DomainError):
            phi_closed_form(custom_radial(E.parse_expr("x^-0.5")), 1.0)

    @pytest.mark.parametrize("b1,b2,s", [(0.0, 0.5, 0.5), (0.3, 1.0, 1.0),
                                         (-0.5, 0.5, 1.0), (0.5, 0.9, 0.7)])
    def test_laplace_coherence(self, b1, b2, s):
        # L[phi](w) + atom = R(1/w)/w at sampled w
        m = general_family(b1, b2, s)
        for w in (0.5, 1.0, 2.0, 5.0):
            lhs = laplace_quadrature(lambda t: phi_closed_form(m, t).regular, w)
            rhs = radial_R(m, 1.0 / w) / w
            assert_allclose(lhs, rhs, rtol=1e-6)

    def test_laplace_coherence_with_atom(self):
        m = general_family(1.0, 0.4, 0.6)
        w = 2.0
        lhs = laplace_quadrature(lambda t: phi_closed_form(m, t).regular, w) \
            + phi_closed_form(m, 1.0).atom_weight
        rhs = radial_R(m, 1.0 / w) / w
        assert_allclose(lhs, rhs, rtol=1e-6)


class TestPostWidderAgreement:
    # algebraically decaying members: a fixed-order approximant cannot track
    # the exponential tails of the beta2 = 1 collapse at large t
    @pytest.mark.parametrize("b1,b2,s", [(0.0, 0.5, 0.5), (-0.5, 0.5, 1.0), (0.5, 0.8, 0.6)])
    def test_phi_from_rows_approaches_closed_form(self, b1, b2, s):
        m = general_family(b1, b2, s)
        for t in (0.1, 1.0, 10.0):
            approx = phi_from_R(m, t, 64)
            exact = phi_closed_form(m, t).regular
            assert_allclose(approx, exact, rtol=1e-2)

    def test_exponential_collapse_tracked_at_moderate_t(self):
        m = general_family(0.3, 1.0, 1.0)
        for t in (0.1, 1.0):
            assert_allclose(phi_from_R(m, t, 64), phi_closed_form(m, t).regular, rtol=1e-2)


class TestCalR:
    def test_s2_second_derivative_sign(self):
        # beta2=1, s=2:  calR''(w) < 0 for w^2 < 1/2
        m = general_family(0.0, 1.0, 2.0)
        d = calR_derivatives(m)
        assert d.eval_deriv(2, 0.5) < 0.0
        assert d.eval_deriv(2, 1.0) > 0.0

    def test_family_within_regime_is_cm(self):
        assert cm_test(calR_derivatives(general_family(0.2, 0.8, 0.7)), 8).passed
        assert cm_test(calR_derivatives(constant_beta(0.6)), 8).passed
