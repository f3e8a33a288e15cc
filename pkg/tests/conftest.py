"""Shared oracle helpers: high-precision references computed on demand."""

import math

import mpmath as mp
import pytest


def ml_reference(lam: float, p: float, b: float, z: float) -> float:
    """Reference E^lam_{p,b}(z) from the defining series at a working
    precision matched to the cancellation, exp(|z|^{1/p}) for z < 0."""
    growth = abs(z) ** (1.0 / p) if z != 0 else 0.0
    dps = int(growth * 0.4343) + 60
    if dps > 3000:
        raise ValueError("reference series would need too many digits")
    with mp.workdps(dps):
        lam_, p_, b_, z_ = mp.mpf(lam), mp.mpf(p), mp.mpf(b), mp.mpf(z)
        s = mp.mpf(0)
        poch = mp.mpf(1)
        for k in range(1000000):
            t = poch * z_ ** k / mp.factorial(k) * mp.rgamma(p_ * k + b_)
            s += t
            poch *= lam_ + k
            if k > 80 and abs(t) < mp.mpf(10) ** (-dps + 10):
                break
        return float(s)


def richardson_second_derivative(f, x: float, h: float = 1e-4) -> float:
    """Central second difference with one Richardson sweep."""
    def d2(hh):
        return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh)

    a = d2(h)
    b = d2(h / 2.0)
    return (4.0 * b - a) / 3.0


def richardson_first_derivative(f, x: float, h: float = 1e-4) -> float:
    def d1(hh):
        return (f(x + hh) - f(x - hh)) / (2.0 * hh)

    a = d1(h)
    b = d1(h / 2.0)
    return (4.0 * b - a) / 3.0


def laplace_quadrature(f, w: float) -> float:
    """int_0^infty e^{-w t} f(t) dt via tanh-sinh quadrature (mpmath).

    Panels are scaled by the decay length 1/w; the truncated tail beyond
    t = 200/w is below e^{-200} of the integrand scale.
    """
    g = lambda t: mp.e ** (-w * t) * f(float(t))
    with mp.workdps(30):
        val = mp.quad(g, [0, 1.0 / w, 10.0 / w, 50.0 / w, 200.0 / w])
    return float(val)


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(20260809)
