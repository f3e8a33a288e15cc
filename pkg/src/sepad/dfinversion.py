"""Distribution functions from separable augmented densities, and back.

The generalized Eddington inversion recovers, for a constant-anisotropy
density P(Psi) r^{-2beta},

    F(E, L^2) = g(E) L^{-2beta},
    g(E) = D^{3/2-beta} P(E) / (2^{3/2-beta} pi^{3/2} Gamma(1-beta)),

whose non-negativity is the exact consistency criterion for beta < 1 (for
beta = 1 the radial-orbit model inverts through a half-order derivative).
A small test-df zoo provides the forward direction in closed form, which
makes round trips and moment identities checkable against quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import beta as beta_fn

from .admodels import RadialModel, R_n, radial_R
from .config import DEFAULTS
from .consistency import SeparableAD
from .errors import DomainError
from .exprfn import Expr, mul, pow_, const, X
from .fracops import rl_integral, rl_signed
from .specfun import gamma_recip, pochhammer

__all__ = [
    "PowerLawDF", "RadialOrbitDF",
    "eddington_invert", "radial_orbit_invert",
    "moment_F_mu", "velocity_moment",
    "oracle_ad_from_df", "oracle_ad_quadrature", "ad_from_powerlaw",
    "df_transform_quadrature", "moment_oracle_quadrature",
]


@dataclass(frozen=True)
class PowerLawDF:
    """F(E, L^2) = coef * E^a * L^{-2 beta} on E in [0, psi_max]."""

    a: float
    beta: float
    coef: float = 1.0

    def __post_init__(self):
        if self.a <= -1.0:
            raise DomainError("energy exponent must exceed -1 for integrability")
        if self.beta >= 1.0:
            raise DomainError("angular-momentum exponent requires beta < 1")

    def value(self, E: float, L2: float) -> float:
        if E < 0.0:
            return 0.0
        return self.coef * E ** self.a * L2 ** (-self.beta)


@dataclass(frozen=True)
class RadialOrbitDF:
    """F(E, L^2) = f(E) delta(L^2) / (sqrt2 pi^{3/2}): pure radial orbits."""

    f: Expr


def eddington_invert(P: Expr, beta: float, E: float, e0: float = 0.0) -> float:
    """g(E) of the constant-anisotropy inversion, beta < 1."""
    if beta >= 1.0:
        raise DomainError("eddington_invert requires beta < 1; use radial_orbit_invert")
    if E <= e0:
        raise DomainError("binding energy must exceed the floor")
    order = 1.5 - beta
    num = rl_signed(P, e0, -order, E)
    denom = 2.0 ** order * math.pi ** 1.5 * math.gamma(1.0 - beta)
    return num / denom


def radial_orbit_invert(P: Expr, E: float, e0: float = 0.0) -> float:
    """f(E) = D^{1/2} P(E) for the beta = 1 model N = P(Psi)/r^2."""
    if E <= e0:
        raise DomainError("binding energy must exceed the floor")
    return rl_signed(P, e0, -0.5, E)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def _radial_factor(R: RadialModel, mu: float, x: float) -> float:
    """D^mu(x^mu R) for mu >= 0, or I^{-mu}(x^{mu} R) for mu < 0."""
    if mu == round(mu) and mu >= 0.0:
        return R_n(R, int(round(mu)), x)
    if R.kind == "constant":
        b = R.beta
        # I^{-mu} x^{mu-b} about 0 = Gamma(1+mu-b)/Gamma(1-b) x^{-b}
        if 1.0 + mu - b <= 0.0:
            raise DomainError("radial factor diverges: mu - beta <= -1")
        rg = gamma_recip(1.0 + mu - b)
        if rg == 0.0:
            return 0.0
        return math.gamma(1.0 + mu - b) * gamma_recip(1.0 - b) * x ** (-b)
    expr = _radial_expr(R)
    xmu = mul(pow_(X, mu), expr)
    return rl_signed(xmu, 0.0, -mu, x)


def _radial_expr(R: RadialModel) -> Expr:
    if R.kind == "custom":
        return R.expr
    if R.kind == "constant":
        return pow_(X, -R.beta)
    xh = mul(const(R.ra ** -2.0), X)
    return mul(pow_(xh, -R.beta1),
               pow_(mul(const(1.0), _one_plus_pow(xh, R.s)), -R.zeta))


def _one_plus_pow(u: Expr, s: float) -> Expr:
    from .exprfn import add
    return add(const(1.0), pow_(u, s))


def moment_F_mu(ad: SeparableAD, mu: float, psi: float, x: float) -> float:
    """Moment of the df along the zero-radial-velocity section,

        F_mu = (2 pi)^{3/2} / (2 x)^{mu+1} * int_0^{2xPsi} dL^2 L^{2mu} F(...),

    evaluated through the separable operator chain: a fractional operator in
    Psi applied to P times D^mu(x^mu R) (or its integral form for mu < 0).
    """
    if psi <= ad.e0:
        raise DomainError("psi must exceed the energy floor")
    if mu >= 0.5:
        pf = rl_signed(ad.P, ad.e0, mu - 0.5, psi)
    else:
        pf = rl_signed(ad.P, ad.e0, -(0.5 - mu), psi)
    rf = _radial_factor(ad.R, mu, x)
    return pf * rf


def velocity_moment(ad: SeparableAD, k: int, n: int, psi: float, x: float) -> float:
    """Even augmented velocity moment for a separable density:

        m_{k,n} = 2^{k+n} (1/2)_k * I^{k+n} P * R_(n)(x).
    """
    if k < 0 or n < 0:
        raise DomainError("moment orders must be non-negative")
    if k + n == 0:
        return ad.P.eval(psi) * radial_R(ad.R, x)
    pf = rl_signed(ad.P, ad.e0, float(k + n), psi)
    return 2.0 ** (k + n) * pochhammer(0.5, k, "rising") * pf * R_n(ad.R, n, x)


# ---------------------------------------------------------------------------
# the forward direction: augmented densities of test dfs
# ---------------------------------------------------------------------------

def ad_from_powerlaw(df: PowerLawDF, psi_max: float = 1.0) -> SeparableAD:
    """The separable AD generated by a power-law df, in closed form:

        N = coef * 2^{3/2-b} pi B(1-b, 1/2) B(a+1, 3/2-b)
                 * Psi^{a+3/2-b} x^{-b}.
    """
    a, b = df.a, df.beta
    c = df.coef * 2.0 ** (1.5 - b) * math.pi * beta_fn(1.0 - b, 0.5) * beta_fn(a + 1.0, 1.5 - b)
    from .admodels import constant_beta

    P = mul(const(c), pow_(X, a + 1.5 - b))
    return SeparableAD(P, constant_beta(b), psi_max=psi_max)


def oracle_ad_from_df(df, psi: float, x: float) -> float:
    """N(Psi, x) of a zoo df: closed form for power laws, a half-order
    integral for the radial-orbit df."""
    if isinstance(df, PowerLawDF):
        ad = ad_from_powerlaw(df, psi_max=max(psi, 1.0))
        return ad.P.eval(psi) * x ** (-df.beta)
    if isinstance(df, RadialOrbitDF):
        return rl_integral(df.f, 0.0, 0.5, psi) / x
    raise DomainError("unknown test df")


def df_transform_quadrature(df: PowerLawDF, psi: float, x: float,
                            kernel_power: float = -0.5, mu_L: float = 0.0,
                            n_nodes: int = 80) -> float:
    """Tensor quadrature of  iint_T K^s L^{2 mu_L} F(E, L^2) dE dL^2  over
    the accessible wedge T, with K = 2(Psi - E) - L^2/x.

    Substituting L^2 = 2x(Psi-E) v and E = Psi w turns the kernel edge and
    the df's declared envelope E^a L^{-2 beta} into Gauss-Jacobi weights in
    v and w; the remaining regular df factor is evaluated at the nodes.
    """
    from .fracops import _jacobi  # shared cached nodes

    a, b = df.a, df.beta
    s = kernel_power
    if s <= -1.0 or a <= -1.0:
        raise DomainError("kernel or energy exponent not integrable")
    pv = mu_L - b
    if pv <= -1.0:
        raise DomainError("L^2 exponent not integrable")
    pw = s + pv + 1.0

    def regular(E: float, L2: float) -> float:
        return df.value(E, L2) * E ** (-a) * L2 ** b

    nodes_v, wts_v = _jacobi(n_nodes, s, pv)
    nodes_w, wts_w = _jacobi(n_nodes, pw, a)
    total = 0.0
    for uw, ww in zip(nodes_w, wts_w):
        w = 0.5 * (uw + 1.0)
        E = psi * w
        row = 0.0
        for uv, wv in zip(nodes_v, wts_v):
            v = 0.5 * (uv + 1.0)
            L2 = 2.0 * x * psi * (1.0 - w) * v
            row += wv * regular(E, L2)
        total += ww * row
    total *= 0.5 ** (s + pv + 2.0 + pw + a)  # both [-1,1] -> [0,1] maps
    pref = 2.0 ** (s + mu_L - b + 1.0) * x ** (mu_L - b + 1.0)
    pref *= psi ** (s + mu_L - b + a + 2.0)
    return pref * total


def oracle_ad_quadrature(df: PowerLawDF, psi: float, x: float,
                         n_nodes: int = 80) -> float:
    """N(Psi, x) = (2 pi / x) * iint_T K^{-1/2} F dE dL^2 by quadrature."""
    return (2.0 * math.pi / x) * df_transform_quadrature(
        df, psi, x, kernel_power=-0.5, mu_L=0.0, n_nodes=n_nodes)


def moment_oracle_quadrature(df: PowerLawDF, mu: float, psi: float, x: float,
                             n_nodes: int = 96) -> float:
    """F_mu by direct quadrature of the section integral

        F_mu = (2 pi)^{3/2} Psi^{mu+1} int_0^1 y^mu F(Psi(1-y), 2 x Psi y) dy,

    with the y^{mu-beta} and (1-y)^a envelopes absorbed into the weight.
    """
    from .fracops import _jacobi

    a, b = df.a, df.beta
    pv = mu - b
    if pv <= -1.0 or a <= -1.0:
        raise DomainError("section integral not integrable")
    nodes, wts = _jacobi(n_nodes, a, pv)
    acc = 0.0
    for u, w in zip(nodes, wts):
        y = 0.5 * (u + 1.0)
        E = psi * (1.0 - y)
        L2 = 2.0 * x * psi * y
        acc += w * df.value(E, L2) * E ** (-a) * L2 ** b
    acc *= 0.5 ** (a + pv + 1.0)
    pref = (2.0 * math.pi) ** 1.5 * psi ** (mu + 1.0 + a) * (2.0 * x * psi) ** (-b)
    return pref * acc
