"""Radial parts R(r^2) of separable augmented densities.

Built-in kinds:

* constant anisotropy:  R(x) = x^{-beta},  beta <= 1;
* the monotone-anisotropy family
      R(x) = x^{-beta1} (1 + x^s)^{-zeta},   s*zeta = beta2 - beta1,
  with beta1, beta2 <= 1, after rescaling x by the transition radius r_a^2;
* a free-form expression as an escape hatch.

The derivative sequence R_(n)(x) = d^n[x^n R]/dx^n is the object every
consistency check consumes.  For the family it is a finite sum

    R_(n)(x) = sum_k  a~_{n,k} x^{s k - beta1} (1 + x^s)^{-(zeta + k)},

whose coefficient rows follow a first-order recurrence; that recurrence is
subtraction-free for beta2 >= beta1, which keeps rows usable far beyond the
point where the explicit finite-difference formula loses all precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import exprfn
from .config import DEFAULTS
from .errors import DomainError
from .exprfn import Expr, nth_derivative
from .specfun import MLSpec, gamma_recip, ml_eval, pochhammer

__all__ = [
    "RadialModel", "constant_beta", "general_family", "custom_radial",
    "CoeffTable", "coeff_table", "binomial_transform",
    "radial_R", "beta_profile", "R_n", "PhiValue", "phi_closed_form",
    "calR_derivatives", "scaled_Rn_derivatives",
]


@dataclass(frozen=True)
class RadialModel:
    """Radius part of a separable augmented density."""

    kind: str                      # "constant" | "general" | "custom"
    beta: float = 0.0              # constant kind
    beta1: float = 0.0             # general kind
    beta2: float = 0.0
    s: float = 1.0
    ra: float = 1.0
    expr: Expr | None = None       # custom kind

    def __post_init__(self):
        if self.kind == "constant":
            if self.beta > 1.0:
                raise DomainError("constant anisotropy requires beta <= 1")
        elif self.kind == "general":
            if self.beta1 > 1.0 or self.beta2 > 1.0:
                raise DomainError("the family requires beta1, beta2 <= 1")
            if self.s <= 0.0 or self.ra <= 0.0:
                raise DomainError("the family requires s > 0 and r_a > 0")
        elif self.kind == "custom":
            if self.expr is None:
                raise DomainError("custom radial model needs an expression")
        else:
            raise DomainError(f"unknown radial kind {self.kind!r}")

    @property
    def zeta(self) -> float:
        return (self.beta2 - self.beta1) / self.s

    @property
    def atom_at_zero(self) -> bool:
        """True when R ~ x^{-1} at the centre, so the inverse transform of
        w -> R(1/w)/w carries a Dirac atom at t = 0."""
        if self.kind == "constant":
            return self.beta == 1.0
        if self.kind == "general":
            return self.beta1 == 1.0
        return False

    def beta_central(self) -> float:
        """Limit of the anisotropy parameter at r -> 0."""
        if self.kind == "constant":
            return self.beta
        if self.kind == "general":
            return self.beta1
        lt = self.expr.leading_term_at_zero()
        if lt is None:
            raise DomainError("cannot determine the central anisotropy of this expression")
        return -lt[1]


def constant_beta(beta: float) -> RadialModel:
    return RadialModel("constant", beta=beta)


def general_family(beta1: float, beta2: float, s: float, ra: float = 1.0) -> RadialModel:
    return RadialModel("general", beta1=beta1, beta2=beta2, s=s, ra=ra)


def custom_radial(expr: Expr) -> RadialModel:
    return RadialModel("custom", expr=expr)


# ---------------------------------------------------------------------------
# coefficient machinery
# ---------------------------------------------------------------------------

def binomial_transform(seq: list[float]) -> list[float]:
    """b_k = sum_m (-1)^m C(k,m) a_m; involutionary."""
    out = []
    for k in range(len(seq)):
        acc = 0.0
        c = 1.0
        for m in range(k + 1):
            if m > 0:
                c *= (k - m + 1) / m
            acc += ((-1.0) ** m) * c * seq[m]
        out.append(acc)
    return out


@dataclass(frozen=True)
class CoeffTable:
    """Row n of the derivative-sequence coefficients for the family.

    a_tilde multiplies u^k with u = x^s/(1+x^s); t_tilde multiplies y^k with
    y = x^s after pulling out a single (1+x^s)^{-(zeta+n)} factor.
    """

    n: int
    beta1: float
    beta2: float
    s: float
    a_tilde: tuple[float, ...]
    t_tilde: tuple[float, ...]


def _poch_rising(a: float, n: int) -> float:
    return pochhammer(a, n, "rising")


def coeff_table(beta1: float, beta2: float, s: float, n: int) -> CoeffTable:
    """Coefficients by the explicit finite-difference formula,

        a~_{n,m} = (zeta)_m sum_{k<=m} (-1)^k (1 - beta1 + s k)_n / (k! (m-k)!),

    the m-th forward difference of the degree-n polynomial (1-beta1+sx)_n
    at x = 0.  Alternating sums of Pochhammer values limit the usable n in
    floating point; larger orders go through the recurrence path used by
    R_n, which this table cross-checks at small n.
    """
    if n < 0 or s <= 0.0:
        raise DomainError("coeff_table needs n >= 0 and s > 0")
    if n > 24:
        raise DomainError("explicit finite differences are unreliable past n = 24; "
                          "use the recurrence-backed R_n instead")
    zeta = (beta2 - beta1) / s
    a_rows = []
    for m in range(n + 1):
        acc = 0.0
        for k in range(m + 1):
            term = ((-1.0) ** k) * _poch_rising(1.0 - beta1 + s * k, n)
            term /= math.factorial(k) * math.factorial(m - k)
            acc += term
        a_rows.append(_poch_rising(zeta, m) * acc)
    # t~_{n,m} = 1/(n-m)! * sum_k (n-k)!/(m-k)! a~_{n,k}
    t_rows = []
    for m in range(n + 1):
        acc = 0.0
        for k in range(m + 1):
            acc += math.factorial(n - k) / math.factorial(m - k) * a_rows[k]
        t_rows.append(acc / math.factorial(n - m))
    return CoeffTable(n, beta1, beta2, s, tuple(a_rows), tuple(t_rows))


def coeff_table_s1(beta1: float, beta2: float, n: int) -> CoeffTable:
    """Closed ratios for s = 1:  t_{n,k}/(1-beta1)_n = (1-beta2)_k/(1-beta1)_k."""
    if beta1 >= 1.0:
        raise DomainError("the closed s=1 ratios need beta1 < 1")
    base = _poch_rising(1.0 - beta1, n)
    t_rows = []
    c = 1.0
    for k in range(n + 1):
        if k > 0:
            c *= (n - k + 1) / k  # C(n,k)
        t_rows.append(c * base * _poch_rising(1.0 - beta2, k) / _poch_rising(1.0 - beta1, k))
    # invert the binomial transform to recover a~
    t_plain = []
    c = 1.0
    for k in range(n + 1):
        if k > 0:
            c *= (n - k + 1) / k
        t_plain.append(t_rows[k] / c)
    a_plain = binomial_transform(t_plain)
    a_rows = []
    c = 1.0
    for k in range(n + 1):
        if k > 0:
            c *= (n - k + 1) / k
        a_rows.append(((-1.0) ** k) * c * a_plain[k])
    return CoeffTable(n, beta1, beta2, 1.0, tuple(a_rows), tuple(t_rows))


@lru_cache(maxsize=256)
def _alpha_rows(beta1: float, beta2: float, s: float, n_max: int) -> tuple[tuple[float, ...], ...]:
    """Rows a~_{n,.} for n <= n_max via the stable recurrence

        a~_{n+1,k} = (n+1-beta1+sk) a~_{n,k} - s(zeta+k-1) a~_{n,k-1},

    which is subtraction-free whenever beta2 >= beta1 (signs alternate with
    k so both contributions agree in sign).
    """
    zeta = (beta2 - beta1) / s
    rows = [(1.0,)]
    for n in range(n_max):
        prev = rows[-1]
        nxt = []
        for k in range(n + 2):
            v = 0.0
            if k <= n:
                v += (n + 1.0 - beta1 + s * k) * prev[k]
            if 1 <= k <= n + 1:
                v -= s * (zeta + k - 1.0) * prev[k - 1]
            nxt.append(v)
        rows.append(tuple(nxt))
    return tuple(rows)


@lru_cache(maxsize=256)
def _tau_rows(beta1: float, beta2: float, s: float, n_max: int) -> tuple[tuple[float, ...], ...]:
    """Rows t~_{n,.} of the single-denominator form

        R_(n)(x) = (1+y)^{-(zeta+n)} x^{-beta1} sum_k t~_{n,k} y^k,  y = x^s,

    via t~_{n+1,k} = (n+1-beta1+sk) t~_{n,k} + (n+1-beta2-s(n-k+1)) t~_{n,k-1}.
    All coefficients are non-negative at s = 1, which makes this the stable
    evaluation for y >> 1 where the u-form cancels catastrophically.
    """
    rows = [(1.0,)]
    for n in range(n_max):
        prev = rows[-1]
        nxt = []
        for k in range(n + 2):
            v = 0.0
            if k <= n:
                v += (n + 1.0 - beta1 + s * k) * prev[k]
            if 1 <= k <= n + 1:
                v += (n + 1.0 - beta2 - s * (n - k + 1.0)) * prev[k - 1]
            nxt.append(v)
        rows.append(tuple(nxt))
    return tuple(rows)


# ---------------------------------------------------------------------------
# model evaluation
# ---------------------------------------------------------------------------

def radial_R(model: RadialModel, x: float) -> float:
    """R(x) at x = r^2 > 0."""
    if x <= 0.0:
        raise DomainError("radial_R needs x > 0")
    if model.kind == "constant":
        return x ** (-model.beta)
    if model.kind == "general":
        xh = x / model.ra ** 2
        return xh ** (-model.beta1) * (1.0 + xh ** model.s) ** (-model.zeta)
    return model.expr.eval(x)


def beta_profile(model: RadialModel, r: float) -> float:
    """Anisotropy parameter beta(r) = -dlog R(r^2)/dlog r^2."""
    if r <= 0.0:
        raise DomainError("beta_profile needs r > 0")
    if model.kind == "constant":
        return model.beta
    if model.kind == "general":
        w = (r / model.ra) ** (2.0 * model.s)
        return (model.beta1 + model.beta2 * w) / (1.0 + w)
    x = r * r
    return -x * nth_derivative(model.expr, 1).eval(x) / model.expr.eval(x)


def R_n(model: RadialModel, n: int, x: float, scaled_by_factorial: bool = False) -> float:
    """R_(n)(x) = d^n[x^n R]/dx^n, optionally divided by n!.

    Constant kind: (1-beta)_n x^{-beta} exactly.  Family kind: coefficient
    rows via the recurrence, combined in log magnitude so that orders up to
    the configured cap stay finite.  Custom kind: symbolic differentiation.
    """
    if n < 0:
        raise DomainError("R_n needs n >= 0")
    if x <= 0.0:
        raise DomainError("R_n needs x > 0")
    if model.kind == "constant":
        b = model.beta
        if scaled_by_factorial:
            if b == 1.0:
                return x ** (-1.0) if n == 0 else 0.0
            lg = math.lgamma(n + 1.0 - b) - math.lgamma(1.0 - b) - math.lgamma(n + 1.0)
            return math.exp(lg) * x ** (-b)
        return _poch_rising(1.0 - b, n) * x ** (-b)
    if model.kind == "general":
        if n > DEFAULTS.coeff_table_cap:
            raise DomainError(f"derivative order {n} above the table cap")
        xh = x / model.ra ** 2
        y = xh ** model.s
        if y <= 1.0:
            # Horner in u = y/(1+y); alternating, but |u| <= 1/2 here
            u = y / (1.0 + y)
            row = _alpha_rows(model.beta1, model.beta2, model.s, n)[n]
            acc = 0.0
            for k in range(n, -1, -1):
                acc = acc * u + row[k]
            acc *= radial_R(model, x)
        else:
            # single-denominator form, stable for large y
            row = _tau_rows(model.beta1, model.beta2, model.s, n)[n]
            acc = 0.0
            for k in range(n, -1, -1):
                acc = acc * y + row[k]
            acc *= xh ** (-model.beta1) * (1.0 + y) ** (-(model.zeta + n))
        if not scaled_by_factorial:
            return acc
        if acc == 0.0:
            return 0.0
        lg = math.log(abs(acc)) - math.lgamma(n + 1.0)
        return math.copysign(math.exp(lg), acc)
    expr = exprfn.mul(exprfn.pow_(exprfn.X, float(n)), model.expr)
    val = nth_derivative(expr, n, DEFAULTS.diff_cap).eval(x)
    return val / math.factorial(n) if scaled_by_factorial else val


class _RnFromModel:
    """eval_deriv adapter for x -> R_(k)(x) scaled by x^c, using the exact
    term structure x^a (1+x^s)^g of the family (and plain powers for the
    constant kind), which differentiates to any order without growth."""

    def __init__(self, model: RadialModel, k: int, c: float):
        self.model = model
        self.k = k
        self.c = c
        if model.kind == "constant":
            coef = _poch_rising(1.0 - model.beta, k)
            self.fam = _AlgebraicFamily(1.0, {(c - model.beta, 0.0): coef})
        elif model.kind == "general":
            # single-denominator rows: milder cancellation across the grid
            rows = _tau_rows(model.beta1, model.beta2, model.s, k)
            terms = {}
            zeta = model.zeta
            for j, t in enumerate(rows[k]):
                if t != 0.0:
                    key = (c + model.s * j - model.beta1, -(zeta + k))
                    terms[key] = terms.get(key, 0.0) + t
            self.fam = _AlgebraicFamily(model.s, terms)
        else:
            base = exprfn.mul(exprfn.pow_(exprfn.X, float(k)), model.expr)
            rk = nth_derivative(base, k, DEFAULTS.diff_cap)
            self.expr = exprfn.mul(exprfn.pow_(exprfn.X, c), rk)
            self.fam = None

    def eval_deriv(self, n: int, x: float) -> float:
        if self.fam is not None:
            return self.fam.eval_deriv(n, x)
        return nth_derivative(self.expr, n, DEFAULTS.diff_cap).eval(x)


class _AlgebraicFamily:
    """Finite sums  sum coef * x^a (1+x^s)^g  closed under differentiation.

    d/dx [x^a (1+x^s)^g] = a x^{a-1}(1+x^s)^g + g s x^{a+s-1}(1+x^s)^{g-1},
    so derivative rows live on a lattice and never grow beyond linearly.
    """

    def __init__(self, s: float, terms: dict):
        self.s = s
        self._rows = [dict(terms)]

    def _row(self, n: int) -> dict:
        while len(self._rows) <= n:
            cur = self._rows[-1]
            nxt: dict = {}
            for (a, g), coef in cur.items():
                if a != 0.0:
                    key = (round(a - 1.0, 10), round(g, 10))
                    nxt[key] = nxt.get(key, 0.0) + coef * a
                if g != 0.0:
                    key = (round(a + self.s - 1.0, 10), round(g - 1.0, 10))
                    nxt[key] = nxt.get(key, 0.0) + coef * g * self.s
            self._rows.append(nxt)
        return self._rows[n]

    def eval_deriv(self, n: int, x: float) -> float:
        row = self._row(n)
        xs = x ** self.s
        base = 1.0 + xs
        return math.fsum(coef * x ** a * base ** g for (a, g), coef in row.items())


def scaled_Rn_derivatives(model: RadialModel, k: int, c: float) -> _RnFromModel:
    """Derivative oracle for x^c R_(k)(x)."""
    return _RnFromModel(model, k, c)


class _CalR:
    """eval_deriv adapter for the reciprocal-argument transform
    calR(w) = R(1/w)/w, using calR^(n)(w) = (-1)^n w^{-(n+1)} R_(n)(1/w)."""

    def __init__(self, model: RadialModel):
        self.model = model

    def eval_deriv(self, n: int, w: float) -> float:
        if w <= 0.0:
            raise DomainError("calR derivatives need w > 0")
        sign = -1.0 if n % 2 else 1.0
        return sign * w ** (-(n + 1.0)) * R_n(self.model, n, 1.0 / w)


def calR_derivatives(model: RadialModel) -> _CalR:
    """Derivative oracle for w -> R(1/w)/w."""
    return _CalR(model)


# ---------------------------------------------------------------------------
# the inverse transform phi(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiValue:
    """phi(t) split into its regular part and the weight of a Dirac atom
    at t = 0 (present exactly when the model carries the x^{-1} behaviour)."""

    regular: float
    atom_weight: float


def phi_closed_form(model: RadialModel, t: float) -> PhiValue:
    """Closed-form phi(t), the inverse Laplace transform of R(1/w)/w.

    Constant kind: t^{-beta}/Gamma(1-beta).  Family kind:
    tau^{-beta1} E^zeta_{s,1-beta1}(-tau^s) at tau = t/r_a^2; for beta1 = 1
    the regular part uses the second index 0 (whose leading series term
    vanishes) and a Dirac atom of weight r_a^2 sits at t = 0.
    """
    if t <= 0.0:
        raise DomainError("phi_closed_form needs t > 0")
    if model.kind == "constant":
        atom = 1.0 if model.atom_at_zero else 0.0
        reg = t ** (-model.beta) * gamma_recip(1.0 - model.beta)
        return PhiValue(reg, atom)
    if model.kind == "general":
        atom = model.ra ** 2 if model.atom_at_zero else 0.0
        tau = t / model.ra ** 2
        spec = MLSpec(model.zeta, model.s, 1.0 - model.beta1)
        reg = tau ** (-model.beta1) * ml_eval(spec, -(tau ** model.s))
        return PhiValue(reg, atom)
    raise DomainError("no closed-form transform for custom radial expressions")
