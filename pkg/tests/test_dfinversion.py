import math

import pytest
from numpy.testing import assert_allclose

from sepad import exprfn as E
from sepad.admodels import beta_profile, constant_beta, general_family
from sepad.cmcheck import cm_sequence_test
from sepad.consistency import SeparableAD
from sepad.dfinversion import (PowerLawDF, RadialOrbitDF, ad_from_powerlaw,
                               df_transform_quadrature, eddington_invert,
                               moment_F_mu, moment_oracle_quadrature,
                               oracle_ad_from_df, oracle_ad_quadrature,
                               radial_orbit_invert, velocity_moment)
from sepad.errors import DomainError
from sepad.fracops import rl_signed


class TestEddington:
    def test_quadratic_half(self):
        # beta = 1/2, P = psi^2: g(E) = E/pi^2
        P = E.parse_expr("x^2")
        for ef in (0.2, 0.7):
            assert_allclose(eddington_invert(P, 0.5, ef), ef / math.pi ** 2, rtol=1e-13)

    def test_linear_half(self):
        P = E.parse_expr("x")
        assert_allclose(eddington_invert(P, 0.5, 0.4), 1.0 / (2.0 * math.pi ** 2), rtol=1e-13)

    def test_negative_for_too_soft_potential(self):
        # P = psi^eta with eta + beta < 1/2 flips the gamma sign
        P = E.parse_expr("x^0.2")
        assert eddington_invert(P, 0.2, 0.5) < 0.0

    def test_beta_cap(self):
        with pytest.raises(DomainError):
            eddington_invert(E.parse_expr("x"), 1.0, 0.5)


class TestRadialOrbit:
    def test_linear(self):
        # P = psi: f(E) = 2 sqrt(E/pi)
        for ef in (0.25, 0.64):
            assert_allclose(radial_orbit_invert(E.parse_expr("x"), ef),
                            2.0 * math.sqrt(ef / math.pi), rtol=1e-13)

    def test_constant(self):
        c = 0.7
        f = radial_orbit_invert(E.parse_expr("0.7"), 0.49)
        assert_allclose(f, c * 0.49 ** -0.5 / math.sqrt(math.pi), rtol=1e-13)
        assert f >= 0.0

    def test_sign_change(self):
        P = E.parse_expr("x - x^2")
        assert radial_orbit_invert(P, 0.1) > 0.0
        assert radial_orbit_invert(P, 0.95) < 0.0


class TestForwardOracle:
    def test_powerlaw_closed_vs_quadrature(self):
        for a, b in ((0.0, 0.0), (1.0, 0.5), (2.5, -0.5)):
            df = PowerLawDF(a, b)
            got = oracle_ad_quadrature(df, 0.8, 1.3)
            assert_allclose(got, oracle_ad_from_df(df, 0.8, 1.3), rtol=1e-12)

    def test_radial_orbit_ad(self):
        # f = 1: N = I^{1/2} 1 / x = 2 sqrt(psi/pi) / x
        df = RadialOrbitDF(E.parse_expr("1"))
        got = oracle_ad_from_df(df, 0.49, 2.0)
        assert_allclose(got, 2.0 * math.sqrt(0.49 / math.pi) / 2.0, rtol=1e-12)

    @pytest.mark.parametrize("a", [0.0, 1.0, 2.5])
    @pytest.mark.parametrize("b", [-0.5, 0.0, 0.5])
    def test_round_trip(self, a, b):
        df = PowerLawDF(a, b)
        ad = ad_from_powerlaw(df)
        for frac in (0.1, 0.5, 0.9):
            ef = frac * ad.psi_max
            assert_allclose(eddington_invert(ad.P, b, ef), ef ** a, rtol=1e-5)

    def test_section_transform_identity(self):
        # x * D^{1/4} N equals the kernel transform with power -mu-1/2
        df = PowerLawDF(1.0, 0.5)
        ad = ad_from_powerlaw(df)
        psi, x, mu = 0.8, 1.3, 0.25
        lhs = x * rl_signed(ad.P, 0.0, -mu, psi) * x ** (-df.beta)
        rhs = (2.0 ** (1.0 + mu) * math.pi ** 1.5 / math.gamma(0.5 - mu)
               * df_transform_quadrature(df, psi, x, kernel_power=-mu - 0.5))
        assert_allclose(lhs, rhs, rtol=1e-4)


class TestMoments:
    def test_mu_zero_example(self):
        # beta = 0, P = psi: F_0 = D^{1/2} P = 2 sqrt(psi/pi)
        ad = SeparableAD(E.parse_expr("x"), constant_beta(0.0))
        got = moment_F_mu(ad, 0.0, 0.36, 1.7)
        assert_allclose(got, 2.0 * math.sqrt(0.36 / math.pi), rtol=1e-13)

    def test_mu_one_example(self):
        # beta = 0, P = psi^2: F_1 = I^{1/2}P * R_(1) with R = 1
        ad = SeparableAD(E.parse_expr("x^2"), constant_beta(0.0))
        got = moment_F_mu(ad, 1.0, 0.5, 1.0)
        expect = math.gamma(3.0) / math.gamma(3.5) * 0.5 ** 2.5
        assert_allclose(got, expect, rtol=1e-13)

    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 2.0])
    def test_chain_matches_quadrature(self, mu):
        for a, b in ((1.0, 0.5), (0.0, 0.0), (2.5, -0.5)):
            df = PowerLawDF(a, b)
            ad = ad_from_powerlaw(df)
            chain = moment_F_mu(ad, mu, 0.8, 1.3)
            quad = moment_oracle_quadrature(df, mu, 0.8, 1.3)
            assert_allclose(chain, quad, rtol=1e-6)

    def test_negative_order_branch(self):
        df = PowerLawDF(1.0, 0.0)
        ad = ad_from_powerlaw(df)
        chain = moment_F_mu(ad, -0.5, 0.8, 1.3)
        quad = moment_oracle_quadrature(df, -0.5, 0.8, 1.3)
        assert_allclose(chain, quad, rtol=1e-6)

    def test_moment_positivity(self):
        df = PowerLawDF(1.5, 0.25)
        ad = ad_from_powerlaw(df)
        for mu in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0):
            assert moment_F_mu(ad, mu, 0.7, 2.0) >= 0.0

    def test_hausdorff_sequence(self):
        # F_mu / psi^{mu+1} is a completely monotone sequence for mu = 0..8
        df = PowerLawDF(1.0, 0.5)
        ad = ad_from_powerlaw(df)
        psi, x = 0.8, 1.3
        seq = [moment_F_mu(ad, float(mu), psi, x) / psi ** (mu + 1.0) for mu in range(9)]
        assert cm_sequence_test(seq, 4).passed


class TestVelocityMoments:
    def test_zeroth_is_density(self):
        ad = SeparableAD(E.parse_expr("x^2"), constant_beta(0.3))
        psi, x = 0.7, 1.9
        got = velocity_moment(ad, 0, 0, psi, x)
        assert_allclose(got, psi ** 2 * x ** -0.3, rtol=1e-14)

    def test_radial_pressure(self):
        # k=1, n=0, P = psi^2, beta = 0: m_{1,0} = psi^3/3
        ad = SeparableAD(E.parse_expr("x^2"), constant_beta(0.0))
        assert_allclose(velocity_moment(ad, 1, 0, 0.9, 1.0), 0.9 ** 3 / 3.0, rtol=1e-13)

    def test_anisotropy_from_moment_ratio(self):
        # beta(r) = 1 - m_{0,1}/(2 m_{1,0})
        m = general_family(0.1, 0.8, 0.6, ra=1.5)
        ad = SeparableAD(E.parse_expr("x^2"), m)
        psi, x = 0.7, 1.9
        ratio = 1.0 - velocity_moment(ad, 0, 1, psi, x) / (2.0 * velocity_moment(ad, 1, 0, psi, x))
        assert_allclose(ratio, beta_profile(m, math.sqrt(x)), rtol=1e-8)
