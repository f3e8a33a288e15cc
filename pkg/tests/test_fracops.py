import math

import pytest
from numpy.testing import assert_allclose

from sepad import exprfn as E
from sepad.errors import BoundarySingularity, DomainError
from sepad.fracops import frac_derivative, power_rule, rl_integral, rl_signed
from sepad.specfun import gamma_recip

X = E.X


def exact_power(alpha, lam, x):
    return math.gamma(alpha) * gamma_recip(alpha + lam) * x ** (alpha + lam - 1.0)


class TestIntegral:
    def test_order_zero_identity(self):
        f = E.parse_expr("exp(-x)")
        assert rl_integral(f, 0.0, 0.0, 1.3) == f.eval(1.3)

    def test_constant(self):
        assert_allclose(rl_integral(E.const(1.0), 0.0, 1.0, 2.0), 2.0, rtol=1e-15)

    def test_half_order_of_one(self):
        # I^{1/2} 1 at x=1: 1/Gamma(3/2) = 2/sqrt(pi)
        got = rl_integral(E.const(1.0), 0.0, 0.5, 1.0)
        assert_allclose(got, 2.0 / math.sqrt(math.pi), rtol=1e-14)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            rl_integral(E.const(1.0), 0.0, 0.5, -1.0)
        with pytest.raises(DomainError):
            rl_integral(E.const(1.0), 2.0, 0.5, 2.0)

    @pytest.mark.parametrize("alpha,lam", [
        (1.0, 0.5), (0.5, 0.5), (0.3, 1.2), (2.5, 0.3), (1.7, 0.8), (0.05, 0.4),
    ])
    def test_quadrature_path_matches_power_rule(self, alpha, lam):
        # bare callable with an exponent hint dodges the symbolic fast path
        g = lambda y: y ** (alpha - 1.0)
        got = rl_integral(g, 0.0, lam, 1.5, endpoint_exponent=alpha - 1.0)
        assert_allclose(got, exact_power(alpha, lam, 1.5), rtol=1e-9)

    def test_probed_exponent_path(self):
        got = rl_integral(lambda y: y ** (-0.5), 0.0, 0.5, 1.0)
        assert_allclose(got, exact_power(0.5, 0.5, 1.0), rtol=1e-9)

    def test_nonintegrable_endpoint(self):
        with pytest.raises(DomainError):
            rl_integral(E.pow_(X, -1.2), 0.0, 0.5, 1.0)

    def test_vanishes_at_terminal(self):
        f = E.parse_expr("exp(-x)")
        assert abs(rl_integral(f, 0.0, 0.7, 1e-6)) < 1e-4

    def test_limit_law(self):
        # I^xi f(x) / x^xi -> f(0)/Gamma(xi+1) as x -> 0+
        f = E.parse_expr("exp(-x)")
        for xi in (0.4, 1.0, 1.7):
            x = 1e-4
            got = rl_integral(f, 0.0, xi, x) / x ** xi
            assert_allclose(got, gamma_recip(xi + 1.0), rtol=1e-3)


class TestDerivative:
    def test_integer_order_is_symbolic(self):
        assert_allclose(frac_derivative(E.pow_(X, 2.0), 0.0, 1.0, 3.0), 6.0, rtol=1e-15)

    def test_half_order_of_sqrt(self):
        got = frac_derivative(E.pow_(X, 0.5), 0.0, 0.5, 1.0)
        assert_allclose(got, math.sqrt(math.pi) / 2.0, rtol=1e-12)

    def test_power_at_gamma_pole_is_zero(self):
        # D^0.7 x^{-0.3} = Gamma(0.7)/Gamma(0) x^{-1} = 0
        assert frac_derivative(E.pow_(X, -0.3), 0.0, 0.7, 2.0) == 0.0

    def test_boundary_singularity(self):
        # log(x) has no finite value at the terminal
        with pytest.raises(BoundarySingularity):
            frac_derivative(E.log_(X), 0.0, 0.5, 1.0)

    def test_quadrature_path_vs_power_rule(self):
        # force the integral path with an ML-atom-wrapped power
        # D^0.6 [x^1.5] via the shifted form on a non-power expression:
        f = E.mul(E.pow_(X, 1.5), E.exp_(E.mul(E.const(0.0), X)))  # collapses to x^1.5
        got = frac_derivative(f, 0.0, 0.6, 2.0)
        assert_allclose(got, exact_power(2.5, -0.6, 2.0), rtol=1e-12)

    def test_lemma_vanishing_boundary_orders(self):
        # f = x^3 has f(0)=f'(0)=f''(0)=0, so D^{2+d} f -> 0 at the terminal,
        # decaying like x^{1-d}
        f = E.pow_(X, 3.0)
        for d in (0.25, 0.5, 0.75):
            v1 = frac_derivative(f, 0.0, 2.0 + d, 1e-4)
            v2 = frac_derivative(f, 0.0, 2.0 + d, 1e-8)
            assert abs(v2) < abs(v1)
            assert_allclose(v2 / v1, (1e-8 / 1e-4) ** (1.0 - d), rtol=1e-8)


class TestSignedDispatch:
    def test_dispatch(self):
        f = E.pow_(X, 1.0)
        assert rl_signed(f, 0.0, 1.0, 2.0) == rl_integral(f, 0.0, 1.0, 2.0)
        assert rl_signed(f, 0.0, -1.0, 2.0) == frac_derivative(f, 0.0, 1.0, 2.0)

    def test_round_trip(self):
        # D^1 I^1 f = f for f = x
        f = E.pow_(X, 1.0)
        inner = rl_signed(f, 0.0, 1.0, 2.0)          # x^2/2 at 2 -> 2
        composed = E.mul(E.const(0.5), E.pow_(X, 2.0))
        assert_allclose(rl_signed(composed, 0.0, -1.0, 2.0), f.eval(2.0), rtol=1e-14)
        assert_allclose(inner, 2.0, rtol=1e-14)


# I^lam e^{-x} about 0 has the closed atom form x^lam E^1_{1,1+lam}(-x)
def _int_exp(lam):
    return E.mul(E.pow_(X, lam), E.ml_atom(1.0, 1.0, 1.0 + lam, 1.0, 1.0))


class TestComposition:
    FUNCS = {
        "one": E.const(1.0),
        "x": E.pow_(X, 1.0),
        "sqrt": E.pow_(X, 0.5),
        "expneg": E.parse_expr("exp(-x)"),
    }

    @pytest.mark.parametrize("xi", [0.3, 0.5, 1.2])
    @pytest.mark.parametrize("lam", [0.3, 0.5, 1.2])
    def test_semigroup(self, xi, lam):
        # I^xi I^lam f = I^{xi+lam} f
        for name, f in self.FUNCS.items():
            for x in (0.7, 1.8, 3.0):
                inner = lambda y, f=f: rl_integral(f, 0.0, lam, y) if y > 0 else 0.0
                lt = f.leading_term_at_zero()
                hint = lam + (lt[1] if lt else 0.0)
                lhs = rl_integral(inner, 0.0, xi, x, endpoint_exponent=hint)
                rhs = rl_integral(f, 0.0, xi + lam, x)
                assert_allclose(lhs, rhs, rtol=1e-7, atol=1e-12,
                                err_msg=f"{name} at x={x}")

    # pairs keep the shifted-form boundary derivatives finite:
    # I^lam f behaves like x^lam at the terminal, so ceil(xi) - 1 <= lam
    @pytest.mark.parametrize("xi,lam", [
        (0.3, 0.5), (0.5, 0.5), (1.0, 0.5), (0.8, 1.2), (1.7, 1.2),
    ])
    def test_mixed_composition(self, xi, lam):
        # D^xi(I^lam f) = I^{lam-xi} f (xi <= lam) or D^{xi-lam} f (xi >= lam)
        composed = _int_exp(lam)
        f = E.parse_expr("exp(-x)")
        for x in (0.9, 2.2):
            lhs = frac_derivative(composed, 0.0, xi, x)
            rhs = rl_signed(f, 0.0, lam - xi, x)
            assert_allclose(lhs, rhs, rtol=1e-6, err_msg=f"x={x}")

    def test_shifted_form_boundary_singularity(self):
        # D^{1.2} of a function ~ x^{0.5} needs f'(0), which is unbounded
        with pytest.raises(BoundarySingularity):
            frac_derivative(_int_exp(0.5), 0.0, 1.2, 1.0)

    def test_integral_then_derivative_boundary_terms(self):
        # I^xi D^lam f = I^{xi-lam} f - C^+_{xi,1} D^{lam-1}f(0) x^{xi-1};
        # for f = x^{0.3}, lam = 1.3 both sides vanish identically, with the
        # boundary term exactly cancelling the power-rule part.
        xi, lam = 0.6, 1.3
        f = E.pow_(X, 0.3)
        lhs = 0.0  # D^{1.3} x^{0.3} = Gamma(1.3)/Gamma(0) x^{-1} = 0 identically
        assert frac_derivative(f, 0.0, lam, 1.7) == 0.0
        direct = rl_signed(f, 0.0, xi - lam, 1.7)
        c_plus = gamma_recip(1.0 + xi - 1.0)
        boundary = c_plus * math.gamma(1.3) * 1.7 ** (xi - 1.0)
        assert_allclose(direct - boundary, lhs, atol=1e-12)

    def test_pochhammer_form_of_coefficients(self):
        # C^+_{xi,k} = 1/Gamma(1+xi-k) = (xi)_k^- / Gamma(1+xi)
        from sepad.specfun import pochhammer

        for xi in (0.6, 1.4, 2.2):
            for k in (1, 2):
                lhs = gamma_recip(1.0 + xi - k)
                rhs = pochhammer(xi, k, "falling") * gamma_recip(1.0 + xi)
                assert_allclose(lhs, rhs, rtol=1e-13)


def test_auxiliary_scaling_identity():
    # (x^2 d/dx)^n (x f) = x^{n+1} d^n(x^n f)/dx^n, n <= 4
    f = E.parse_expr("exp(-x)")
    for n in range(1, 5):
        t = E.mul(X, f)
        for _ in range(n):
            t = E.mul(E.pow_(X, 2.0), t.diff())
        lhs = t.eval(1.7)
        rhs = E.mul(E.pow_(X, float(n + 1)),
                    E.nth_derivative(E.mul(E.pow_(X, float(n)), f), n)).eval(1.7)
        assert_allclose(lhs, rhs, rtol=1e-10)


def test_power_rule_requires_positive_alpha():
    with pytest.raises(DomainError):
        power_rule(1.0, -0.2, 0.5, 1.0)
