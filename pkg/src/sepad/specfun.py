"""Gamma-family primitives and the three-parameter Mittag-Leffler function.

The central object is

    E^lam_{p,b}(z) = sum_{k>=0} (lam)_k / Gamma(p*k + b) * z^k / k!     (p > 0),

an entire function of z.  Both indices may be awkward: b <= 0 is allowed
(terms sitting on gamma poles vanish through the reciprocal gamma), and lam
may be negative, in which case integer -lam truncates the series to a
polynomial while fractional -lam needs a split evaluation to stay accurate
for large negative arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import rgamma as _rgamma, roots_jacobi

from .config import DEFAULTS
from .errors import DomainError, NonConvergence

__all__ = [
    "MLSpec",
    "gamma_recip",
    "pochhammer",
    "ml_eval",
    "ml_derivative",
    "ml_neg_order_split",
]


def gamma_recip(x: float) -> float:
    """1/Gamma(x); exactly 0 at the poles x = 0, -1, -2, ..."""
    return float(_rgamma(x))


def pochhammer(a: float, n: int, direction: str = "rising") -> float:
    """Pochhammer product of length n.

    rising:  a (a+1) ... (a+n-1)
    falling: a (a-1) ... (a-n+1)
    """
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    out = 1.0
    if direction == "rising":
        for j in range(n):
            out *= a + j
    elif direction == "falling":
        for j in range(n):
            out *= a - j
    else:
        raise DomainError(f"unknown direction {direction!r}")
    return out


def _log_rising(a: float, n: int) -> float:
    """log of (a)_n^+ for a > 0, overflow-free."""
    return math.lgamma(a + n) - math.lgamma(a)


@dataclass(frozen=True)
class MLSpec:
    """Parameter triple (lam, p, b) of the generalized Mittag-Leffler function."""

    lam: float
    p: float
    b: float

    def __post_init__(self):
        if not (self.p > 0.0):
            raise DomainError("MLSpec requires p > 0 (series diverges otherwise)")
        for f in (self.lam, self.p, self.b):
            if not math.isfinite(f):
                raise DomainError("MLSpec parameters must be finite")

    def shifted(self, n: int) -> "MLSpec":
        """Index shift (lam, b) -> (lam + n, b + p*n) produced by differentiation."""
        return MLSpec(self.lam + n, self.p, self.b + self.p * n)


def _is_nonpos_int(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) < tol


# ---------------------------------------------------------------------------
# series / asymptotic / split branches
# ---------------------------------------------------------------------------

def _log_rgamma(w: float) -> tuple[float, float, bool]:
    """(sign, log magnitude, is_zero) of 1/Gamma(w), valid far beyond the
    range where the reciprocal gamma itself under- or overflows.

    For w <= 0 the reflection 1/Gamma(w) = Gamma(1-w) sin(pi w)/pi is used
    with the sine argument reduced modulo 2 first.
    """
    if w > 0.0:
        return 1.0, -math.lgamma(w), False
    if w == math.floor(w):
        return 1.0, -math.inf, True
    s = math.sin(math.pi * math.fmod(w, 2.0))
    return math.copysign(1.0, s), math.lgamma(1.0 - w) + math.log(abs(s)) - math.log(math.pi), False


class _LogPoch:
    """Running (a)_k^+ in sign/log-magnitude form; exact zero detection."""

    __slots__ = ("a", "sign", "logmag", "zero")

    def __init__(self, a: float):
        self.a = a
        self.sign = 1.0
        self.logmag = 0.0
        self.zero = False

    def step(self, k: int) -> None:
        """Multiply in the factor (a + k - 1), moving (a)_{k-1} to (a)_k."""
        f = self.a + (k - 1)
        if f == 0.0:
            self.zero = True
            return
        if f < 0.0:
            self.sign = -self.sign
        self.logmag += math.log(abs(f))


def _series(lam: float, p: float, b: float, z: float, rtol: float,
            max_terms: int) -> tuple[float, float]:
    """Direct power series with Kahan compensation.

    Each term is assembled in log magnitude -- (lam)_k and z^k/k! overflow
    separately long before their gamma-divided product does.  Returns
    (sum, roundoff_estimate).  The stopping rule requires three consecutive
    terms below rtol*|sum| past the magnitude peak, because for z < 0 the
    terms first grow before the alternation starts to cancel.
    """
    total = 0.0
    comp = 0.0
    lz = math.log(abs(z))
    sz = 1.0 if z > 0.0 else -1.0
    poch = _LogPoch(lam)
    lfact = 0.0
    max_abs = 0.0
    small_run = 0
    growing = True
    prev_abs = math.inf
    k = 0
    while k < max_terms:
        if k > 0:
            poch.step(k)
            lfact += math.log(k)
            if poch.zero:
                break  # lam was a non-positive integer: exact termination
        sg, lrg, rg_zero = _log_rgamma(p * k + b)
        if not rg_zero:
            lt = poch.logmag + k * lz - lfact + lrg
            if lt > 700.0:
                raise NonConvergence(
                    f"series term exceeds double range (lam={lam}, p={p}, b={b}, z={z})")
            term = poch.sign * (sz ** k) * sg * math.exp(lt)
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            a = abs(term)
        else:
            a = 0.0
        max_abs = max(max_abs, a)
        if a > prev_abs:
            growing = True
        elif a < prev_abs:
            growing = False
        prev_abs = a
        if not growing and a <= rtol * max(abs(total), 1e-300):
            small_run += 1
            if small_run >= 3:
                break
        else:
            small_run = 0
        k += 1
    else:
        raise NonConvergence(
            f"Mittag-Leffler series hit the {max_terms}-term cap "
            f"(lam={lam}, p={p}, b={b}, z={z})")
    # each term is assembled from lgamma values of size O(100), so it carries
    # ~1e-14 relative noise; cancellation then scales that by the peak term
    roundoff = 1e-14 * max_abs * max(1.0, math.sqrt(k + 1.0))
    return total, roundoff


def _kummer(lam: float, b: float, zneg: float, rtol: float, max_terms: int) -> float:
    """E^lam_{1,b}(-Z) = e^{-Z} * sum_k (b-lam)_k Z^k / (k! Gamma(b+k)).

    The transformed series is cancellation-free for b >= lam and only mildly
    alternating otherwise, so it is stable for any Z >= 0.
    """
    Z = -zneg
    if Z == 0.0:
        return gamma_recip(b)
    total = 0.0
    comp = 0.0
    lz = math.log(Z)
    poch = _LogPoch(b - lam)
    lfact = 0.0
    k = 0
    scale = 0.0  # running log offset keeping partial sums inside double range
    growing = True
    prev_lt = math.inf
    small_run = 0
    while k < max_terms:
        if k > 0:
            poch.step(k)
            lfact += math.log(k)
            if poch.zero:
                break
        sg, lrg, rg_zero = _log_rgamma(b + k)
        if not rg_zero:
            lt_abs = poch.logmag + k * lz - lfact + lrg
            lt = lt_abs - scale
            if lt > 600.0:
                total *= math.exp(600.0 - lt)
                comp = 0.0
                scale += lt - 600.0
                lt = 600.0
            term = poch.sign * sg * math.exp(lt)
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            if lt_abs > prev_lt:
                growing = True
            elif lt_abs < prev_lt:
                growing = False
            prev_lt = lt_abs
            if not growing and abs(term) <= rtol * max(abs(total), 1e-300):
                small_run += 1
                if small_run >= 3:
                    break
            else:
                small_run = 0
        k += 1
    else:
        raise NonConvergence("Kummer-transformed series hit the term cap")
    # fold e^{-Z} and the scale offset in log space
    if total == 0.0:
        return 0.0
    lr = math.log(abs(total)) + scale - Z
    if lr < -745.0:
        return 0.0
    return math.copysign(math.exp(lr), total) if lr < 700.0 else math.copysign(math.inf, total)


def _asymptotic(lam: float, p: float, b: float, Z: float) -> tuple[float, float]:
    """Algebraic expansion of E^lam_{p,b}(-Z) for large Z > 0.

    E(-Z) ~ sum_k (-1)^k (lam)_k / (k! Gamma(b - p lam - p k)) Z^{-lam-k}.

    Individual term magnitudes dip whenever b - p(lam+k) passes near a
    gamma pole, so truncation follows the three-term running envelope of
    |t_k| rather than raw minima.  The returned error estimate combines the
    envelope minimum with the exponentially small component of E(-Z) that
    no algebraic expansion can represent (empirically below ~e^{-0.4 x}
    relative, x = Z^{1/p}, across 0 < p <= 1).
    """
    terms: list[float] = []
    mags: list[float] = []
    poch = _LogPoch(lam)
    lfact = 0.0
    lz = math.log(Z)
    exact = False
    env_min = math.inf
    k = 0
    while k < 400:
        if k > 0:
            poch.step(k)
            lfact += math.log(k)
            if poch.zero:
                exact = True
                break
        sg, lrg, rg_zero = _log_rgamma(b - p * (lam + k))
        if rg_zero:
            terms.append(0.0)
            mags.append(0.0)
        else:
            lt = poch.logmag - lfact + lrg - (lam + k) * lz
            if lt > 690.0:
                break
            a = math.exp(lt) if lt > -745.0 else 0.0
            terms.append(poch.sign * ((-1.0) ** k) * sg * a)
            mags.append(a)
            env = max(mags[max(0, k - 2): k + 1])
            if env > 0.0:
                env_min = min(env_min, env)
                if env > 1e4 * env_min:
                    break
        k += 1
    if exact:
        return math.fsum(terms), 0.0
    if not terms:
        return 0.0, math.inf
    envelopes = [max(mags[max(0, j - 2): j + 1]) for j in range(len(mags))]
    kstar = min(range(len(envelopes)), key=lambda j: (envelopes[j], j))
    val = math.fsum(terms[: kstar + 1])
    x = Z ** (1.0 / p)
    floor = 3.0 * abs(val) * math.exp(-0.4 * min(x, 1e6))
    return val, max(envelopes[kstar], floor)


def _poly_neg_int(xi: int, p: float, b: float, z: float) -> float:
    """Exact terminating polynomial for E^{-xi}_{p,b}(z), integer xi >= 0."""
    total = 0.0
    poch = 1.0  # (-xi)_k
    zk = 1.0
    for k in range(xi + 1):
        if k > 0:
            poch *= -xi + (k - 1)
            zk *= z / k
        total += poch * zk * gamma_recip(p * k + b)
    return total


def _neg_frac_large(xi: float, p: float, b: float, Z: float, rtol: float) -> float:
    """E^{-xi}_{p,b}(-Z) for fractional xi > 0 and large Z, via

        E^{-xi}_{p,b}(-Z) = sum_{k<m} C(xi,k) Z^k / Gamma(b+pk)
            + (1-eps)_m Z^m/(m-1)! * int_0^1 (1-u)^{m-1} E^eps_{p,b+pm}(-Z u) du

    with m = ceil(xi) and eps = m - xi in (0,1).  The integrand has positive
    upper index, so every evaluation is well-conditioned.
    """
    m = math.ceil(xi)
    eps = m - xi
    total = 0.0
    binom = 1.0  # C(xi, k)
    for k in range(m):
        if k > 0:
            binom *= (xi - (k - 1)) / k
        total += binom * Z ** k * gamma_recip(b + p * k)
    inner = MLSpec(eps, p, b + p * m)

    def g(u: float) -> float:
        return ml_eval(inner, -Z * u, rtol=rtol)

    # panels: series-regime [0, u0] resolved geometrically, then the weighted tail
    u0 = min(0.5, 10.0 / Z)
    integral = 0.0
    # geometric Legendre panels on [0, 0.5]
    edges = [0.0]
    e = u0
    while e < 0.5:
        edges.append(e)
        e *= 8.0
    edges.append(0.5)
    xs, ws = _leggauss_cached(48)
    for a_, b_ in zip(edges[:-1], edges[1:]):
        h = 0.5 * (b_ - a_)
        c = 0.5 * (b_ + a_)
        acc = 0.0
        for xi_, wi_ in zip(xs, ws):
            u = c + h * xi_
            acc += wi_ * (1.0 - u) ** (m - 1) * g(u)
        integral += h * acc
    # Jacobi panel on [0.5, 1] absorbing (1-u)^{m-1}
    nodes, wts = roots_jacobi(64, m - 1, 0.0)
    for u_, w_ in zip(nodes, wts):
        u = 0.75 + 0.25 * u_  # map [-1,1] -> [0.5, 1]
        integral += w_ * 0.25 ** m * g(u)  # (1-u) = 0.25*(1-u_), weight absorbed
    scale = math.exp(_log_rising(1.0 - eps, m) - math.lgamma(m)) * Z ** m
    return total + scale * integral


@lru_cache(maxsize=4096)
def _leggauss_cached(n: int):
    import numpy as np

    x, w = np.polynomial.legendre.leggauss(n)
    return tuple(x.tolist()), tuple(w.tolist())


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def ml_eval(spec: MLSpec, z: float, rtol: float | None = None) -> float:
    """Evaluate E^lam_{p,b}(z) to rtol where the conditioning permits.

    Branches: exact polynomial for non-positive-integer lam; Kummer-transformed
    series for p = 1; direct Kahan series otherwise, with an adaptive crossover
    to the algebraic asymptotic expansion (lam > 0, p <= 1) or to a
    polynomial-plus-integral split (fractional lam < 0) for negative arguments
    beyond the series' well-conditioned range.  The series peaks near
    exp(|z|^{1/p}) for z < 0, so the crossover is governed by |z|^{1/p}.
    Raises NonConvergence when no branch produces a usable value.
    """
    if rtol is None:
        rtol = DEFAULTS.eps_ml
    if not math.isfinite(z):
        raise DomainError("ml_eval needs finite z")
    lam, p, b = spec.lam, spec.p, spec.b
    if z == 0.0:
        return gamma_recip(b)
    if _is_nonpos_int(lam):
        return _poly_neg_int(int(round(-lam)), p, b, z)
    if p == 1.0 and z < 0.0:
        # the Kummer transform terminates exactly when b - lam is a
        # non-positive integer and stays cheap up to moderate |z|; beyond
        # that the algebraic expansion wins (its omitted exponential part
        # is ~ e^{z}, negligible there)
        if _is_nonpos_int(b - lam) or -z <= 30.0:
            return _kummer(lam, b, z, rtol, DEFAULTS.ml_max_terms)
        val, err = _asymptotic(lam, 1.0, b, -z)
        if err <= rtol * max(abs(val), 1e-300) or -z > 700.0:
            return val
        return _kummer(lam, b, z, rtol, DEFAULTS.ml_max_terms)
    if z < 0.0 and p <= 1.0:
        Z = -z
        growth = Z ** (1.0 / p)  # log of the series peak, roughly
        if lam < 0.0 and growth > 14.0:
            return _neg_frac_large(-lam, p, b, Z, rtol)
        if lam > 0.0 and growth >= 15.0:
            val, err = _asymptotic(lam, p, b, Z)
            if err <= rtol * max(abs(val), 1e-300):
                return val
    val, roundoff = _series(lam, p, b, z, rtol, DEFAULTS.ml_max_terms)
    if roundoff <= rtol * max(abs(val), 1e-300):
        return val
    if lam > 0.0 and p <= 1.0 and z < 0.0:
        # cancellation ate into the series; the expansion may still be better
        va, ea = _asymptotic(lam, p, b, -z)
        if ea < roundoff:
            val, roundoff = va, ea
    # best-effort return up to a sanity bound, past which the value carries
    # no usable information (the error estimates err on the safe side by a
    # couple of orders, so values returned here are in practice far better)
    if roundoff > 1e-3 * max(abs(val), 1e-10):
        raise NonConvergence(
            f"series cancellation leaves {roundoff:.2e} absolute error "
            f"(value {val:.3e}; lam={lam}, p={p}, b={b}, z={z})")
    return val


def ml_derivative(spec: MLSpec, z: float, n: int) -> float:
    """n-th derivative of E^lam_{p,b}(-z) with respect to z, z >= 0:

        d^n/dz^n E^lam_{p,b}(-z) = (-1)^n (lam)_n^+ E^{lam+n}_{p,b+pn}(-z).
    """
    if n < 0:
        raise DomainError("derivative order must be >= 0")
    if n == 0:
        return ml_eval(spec, -z)
    sign = -1.0 if n % 2 else 1.0
    return sign * pochhammer(spec.lam, n, "rising") * ml_eval(spec.shifted(n), -z)


def ml_neg_order_split(spec: MLSpec, z: float) -> float:
    """E^{-xi}_{p,b}(z) via the explicit head/tail split, xi = -lam >= 0.

    Integer xi gives the exact (xi+1)-term polynomial.  Fractional xi splits
    off the first floor(xi)+1 polynomial terms,

        sum_{k<=mu} C(xi,k) (-z)^k / Gamma(pk+b),    mu = floor(xi),

    and sums the remaining entire tail with prefactor
    (delta)_{mu+1} (-z)^{mu+1} where delta = xi - mu.  Agrees with ml_eval
    on the same spec and argument.
    """
    xi = -spec.lam
    if xi < 0.0:
        raise DomainError("ml_neg_order_split requires lam <= 0")
    p, b = spec.p, spec.b
    if _is_nonpos_int(spec.lam):
        return _poly_neg_int(int(round(xi)), p, b, z)
    mu = math.floor(xi)
    delta = xi - mu
    head = 0.0
    binom = 1.0
    for k in range(mu + 1):
        if k > 0:
            binom *= (xi - (k - 1)) / k
        head += binom * (-z) ** k * gamma_recip(p * k + b)
    bhat = p * (mu + 1) + b
    pref = pochhammer(delta, mu + 1, "rising") * (-z) ** (mu + 1)
    if z == 0.0:
        return head
    tail = 0.0
    lz = math.log(abs(z))
    sz = 1.0 if z > 0.0 else -1.0
    poch = _LogPoch(1.0 - delta)
    lfact = math.lgamma(mu + 2)  # log (k + mu + 1)! at k = 0
    k = 0
    while k < DEFAULTS.ml_max_terms:
        if k > 0:
            poch.step(k)
            lfact += math.log(k + mu + 1)
            if poch.zero:
                break
        sg, lrg, rg_zero = _log_rgamma(p * k + bhat)
        if not rg_zero:
            lt = poch.logmag + k * lz - lfact + lrg
            term = poch.sign * (sz ** k) * sg * math.exp(min(lt, 700.0))
            tail += term
            if abs(term) <= DEFAULTS.eps_ml * max(abs(tail), 1e-300) and k > abs(z):
                break
        k += 1
    else:
        raise NonConvergence("tail series hit the term cap")
    return head + pref * tail
