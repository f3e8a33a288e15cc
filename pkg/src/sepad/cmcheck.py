"""Complete-monotonicity scans and Post-Widder Laplace inversion.

A smooth f on (0, inf) is completely monotonic (cm) when (-1)^n f^(n)(x) >= 0
for every order n and every x > 0.  Sampling can refute that with a witness
but can only confirm it to a finite order, so a passing verdict always
records the order it was checked to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import DEFAULTS, GridSpec
from .errors import DifferentiationDepthExceeded, DomainError, SepadError
from .exprfn import Expr, ExprDerivatives, nth_derivative

__all__ = ["CMVerdict", "cm_test", "cm_sequence_test", "post_widder", "phi_from_R"]


@dataclass(frozen=True)
class CMVerdict:
    """Outcome of a sign-pattern scan.

    status "pass" means every checked (order, point) satisfied the
    alternating-sign condition -- necessarily a finite-order statement.
    "fail" is conclusive and carries a witness (order, point, value).
    "inconclusive" means some points could not be evaluated and no
    witness was found.
    """

    status: str
    max_order_checked: int
    witness: tuple[int, float, float] | None = None
    min_margin: float = math.inf
    skipped: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def as_dict(self) -> dict:
        d = {
            "status": self.status,
            "max_order_checked": self.max_order_checked,
            "min_margin": self.min_margin,
        }
        if self.witness is not None:
            n, x, v = self.witness
            d["witness"] = {"n": n, "x": x, "value": v}
        if self.skipped:
            d["skipped_points"] = len(self.skipped)
        return d


def _wrap_derivatives(f, n_max: int):
    if isinstance(f, Expr):
        if n_max > DEFAULTS.diff_cap:
            raise DifferentiationDepthExceeded(
                f"cm scan to order {n_max} exceeds the symbolic cap {DEFAULTS.diff_cap}")
        return ExprDerivatives(f)
    if hasattr(f, "eval_deriv"):
        return f
    raise DomainError("cm_test needs an expression or an object with eval_deriv(n, x)")


def cm_test(f, n_max: int | None = None, grid=None, eps_abs: float | None = None) -> CMVerdict:
    """Scan (-1)^n f^(n)(x) >= 0 for n <= n_max over the grid.

    The tolerance scales with the magnitude of the order-n values on the
    grid, since high-order derivatives accumulate roundoff.  Points whose
    evaluation fails are skipped (recorded), never silently passed.
    """
    if n_max is None:
        n_max = DEFAULTS.cm_order
    if grid is None:
        grid = DEFAULTS.cm_grid
    if eps_abs is None:
        eps_abs = DEFAULTS.eps_abs
    pts = grid.points() if isinstance(grid, GridSpec) else list(grid)
    d = _wrap_derivatives(f, n_max)

    min_margin = math.inf
    skipped = []
    for n in range(n_max + 1):
        sign = -1.0 if n % 2 else 1.0
        vals = []
        for xp in pts:
            try:
                vals.append((xp, sign * d.eval_deriv(n, xp)))
            except SepadError:
                skipped.append((n, xp))
        if not vals:
            continue
        scale = max(1.0, max(abs(v) for _, v in vals))
        tol = eps_abs * scale
        for xp, v in vals:
            min_margin = min(min_margin, v)
            if v < -tol:
                return CMVerdict("fail", n, witness=(n, xp, v if sign > 0 else -v),
                                 min_margin=min_margin, skipped=tuple(skipped))
    status = "pass" if not skipped else "inconclusive"
    return CMVerdict(status, n_max, min_margin=min_margin, skipped=tuple(skipped))


def cm_sequence_test(a, k_max: int, eps_abs: float | None = None) -> CMVerdict:
    """Completely monotone sequence check: (-1)^k Delta^k a_j >= 0.

    Delta is the forward difference; the scan covers k <= k_max and all j
    with j + k inside the sequence.
    """
    if eps_abs is None:
        eps_abs = DEFAULTS.eps_abs
    seq = [float(v) for v in a]
    if k_max > len(seq) - 1:
        raise DomainError("sequence too short for the requested difference order")
    scale = max(1.0, max(abs(v) for v in seq))
    diffs = seq[:]
    min_margin = math.inf
    for k in range(k_max + 1):
        sign = -1.0 if k % 2 else 1.0
        for j, v in enumerate(diffs):
            m = sign * v
            min_margin = min(min_margin, m)
            if m < -eps_abs * scale:
                return CMVerdict("fail", k, witness=(k, float(j), v), min_margin=min_margin)
        diffs = [diffs[j + 1] - diffs[j] for j in range(len(diffs) - 1)]
    return CMVerdict("pass", k_max, min_margin=min_margin)


def post_widder(F, t: float, n: int) -> float:
    """n-th Post-Widder approximant of the inverse Laplace transform:

        phi_n(t) = (-1)^n / n! * (n/t)^{n+1} * F^(n)(n/t),

    which tends to phi(t) as n grows when F is the transform of phi.  The
    factorial scaling is folded in log domain; n! overflows a double near
    n = 171 otherwise.
    """
    if t <= 0.0:
        raise DomainError("post_widder needs t > 0")
    if n < 0:
        raise DomainError("approximant order must be >= 0")
    xq = n / t if n > 0 else 1.0 / t
    if isinstance(F, Expr):
        dn = nth_derivative(F, n).eval(xq)
    elif hasattr(F, "eval_deriv"):
        dn = F.eval_deriv(n, xq)
    else:
        raise DomainError("post_widder needs an expression or eval_deriv object")
    if dn == 0.0:
        return 0.0
    if not math.isfinite(dn):
        raise OverflowError("derivative evaluation overflowed")
    sign = math.copysign(1.0, dn) * (-1.0 if n % 2 else 1.0)
    ln = math.log(abs(dn)) + (n + 1) * math.log(xq) - math.lgamma(n + 1)
    if ln > 700.0:
        raise OverflowError("Post-Widder scaling overflowed")
    return sign * math.exp(ln)


def phi_from_R(model, t: float, n: int) -> float:
    """n-th approximant of the inverse transform of w -> R(1/w)/w:

        phi_n(t) = R_(n)(t/n) / n!,

    where R_(n)(x) = d^n[x^n R]/dx^n.  Uses the model's high-order
    derivative machinery, so n is not limited by the symbolic cap for
    the built-in radial families.
    """
    from .admodels import R_n  # local import to avoid a cycle

    if t <= 0.0 or n <= 0:
        raise DomainError("phi_from_R needs t > 0 and n >= 1")
    val = R_n(model, n, t / n, scaled_by_factorial=True)
    return val
