"""Phase-space consistency verdicts for separable augmented densities.

Given N(Psi, r^2) = P(Psi) R(r^2), the engine combines

* necessary conditions -- the derivative sequence R_(n) >= 0 (equivalently
  w -> R(1/w)/w completely monotonic) and fractional derivatives of P
  non-negative up to the order 3/2 - beta0 fixed by the central anisotropy;
* sufficient conditions -- a proven threshold order lambda* for the radial
  family plus D^lambda* P >= 0 with vanishing boundary values of P at 0 --

into a three-valued report: Inconsistent carries a concrete witness,
Consistent means a sufficiency branch passed in full, and anything in
between stays honestly Inconclusive.

The necessary conditions of order mu > 1/2 presume the convergence of the
moment integrals they are derived from.  For potential parts behaving like
Psi^{p0} at the centre the candidate distribution is integrable only when
p0 > 1/2 - beta0; below that the interior orders are reported but not
enforced (caveat `mu-interior-unverifiable`), while mu <= 1/2 and the
endpoint order are always binding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .admodels import RadialModel, R_n, calR_derivatives, scaled_Rn_derivatives
from .cmcheck import CMVerdict, cm_test
from .config import DEFAULTS, GridSpec, psi_grid
from .errors import DomainError, SepadError
from .exprfn import Expr, limit_at_zero, nth_derivative
from .fracops import rl_signed

__all__ = [
    "SeparableAD", "VerdictOptions", "ConsistencyReport", "PotentialCheck",
    "necessary_radial", "necessary_potential", "sufficiency_threshold",
    "sufficient_potential", "sufficient_radial", "verdict",
]

CAVEAT_FINITE_ORDER = "finite-order-scan"
CAVEAT_MU_SUPPRESSED = "mu-interior-unverifiable"
CAVEAT_S_GT_1 = "s-above-1-no-proven-sufficiency"
CAVEAT_RESTRICTIVE = "restrictive-threshold-unproven-regime"
CAVEAT_E0 = "nonzero-energy-floor-sufficiency-skipped"
CAVEAT_BETA0_PROBED = "central-anisotropy-probed-numerically"
CAVEAT_NEAR_ZERO = "near-zero-margin"
CAVEAT_EVAL = "evaluation-failures-during-scan"
CAVEAT_BOUNDARY = "sufficiency-boundary-condition-failed"
CAVEAT_GRID_FAIL = "sufficiency-grid-condition-failed"
CAVEAT_NO_THRESHOLD = "no-proven-sufficiency-threshold"


@dataclass(frozen=True)
class SeparableAD:
    """Separable augmented density P(Psi) R(r^2) with energy floor e0."""

    P: Expr
    R: RadialModel
    psi_max: float = 1.0
    e0: float = 0.0

    def __post_init__(self):
        if self.psi_max <= 0.0:
            raise DomainError("psi_max must be positive")
        if not math.isfinite(self.e0):
            raise DomainError("the energy floor must be finite")


@dataclass(frozen=True)
class VerdictOptions:
    n_max: int = 8                 # derivative orders for the radial scans
    k_max: int = 6                 # R_(k) rows for the radial sufficiency scan
    x_grid: GridSpec = field(default_factory=lambda: DEFAULTS.cm_grid)
    psi_points: int = 48
    eps_abs: float = DEFAULTS.eps_abs
    eps_fail: float = DEFAULTS.eps_fail
    lambda_suff: float | None = None   # override for custom radial parts


@dataclass(frozen=True)
class PotentialCheck:
    mu: float
    enforced: bool
    status: str                    # "pass" | "fail" | "error"
    min_margin: float
    witness_psi: float | None = None

    def as_dict(self) -> dict:
        d = {"mu": self.mu, "enforced": self.enforced, "status": self.status,
             "min_margin": self.min_margin}
        if self.witness_psi is not None:
            d["witness"] = {"type": "potential", "mu": self.mu,
                            "psi": self.witness_psi, "value": self.min_margin}
        return d


@dataclass(frozen=True)
class ConsistencyReport:
    verdict: str                   # "consistent" | "inconsistent" | "inconclusive"
    necessary_radial: CMVerdict
    necessary_potential: tuple[PotentialCheck, ...]
    sufficient: dict | None
    caveats: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "necessary": {
                "radial": self.necessary_radial.as_dict(),
                "potential": [c.as_dict() for c in self.necessary_potential],
            },
            "sufficient": self.sufficient,
            "caveats": list(self.caveats),
        }


# ---------------------------------------------------------------------------
# necessary side
# ---------------------------------------------------------------------------

def necessary_radial(R: RadialModel, n_max: int | None = None, grid=None,
                     eps_abs: float | None = None) -> CMVerdict:
    """R_(n)(x) >= 0 on the grid for n <= n_max, and the reciprocal-argument
    transform w -> R(1/w)/w completely monotonic to the same order.  Both
    statements are equivalent pointwise; scanning them on their natural
    grids catches failures on either end of the radius range."""
    if n_max is None:
        n_max = DEFAULTS.cm_order
    if grid is None:
        grid = DEFAULTS.cm_grid
    if eps_abs is None:
        eps_abs = DEFAULTS.eps_abs
    pts = grid.points() if isinstance(grid, GridSpec) else list(grid)

    min_margin = math.inf
    for n in range(n_max + 1):
        vals = [(x, R_n(R, n, x)) for x in pts]
        scale = max(1.0, max(abs(v) for _, v in vals))
        for x, v in vals:
            min_margin = min(min_margin, v)
            if v < -eps_abs * scale:
                return CMVerdict("fail", n, witness=(n, x, v), min_margin=min_margin)
    cal = cm_test(calR_derivatives(R), n_max, grid, eps_abs)
    if cal.failed:
        return cal
    status = cal.status
    return CMVerdict(status, n_max, min_margin=min(min_margin, cal.min_margin),
                     skipped=cal.skipped)


def _probe_beta0(R: RadialModel) -> tuple[float, bool]:
    """Central anisotropy limit; True when it came from a numeric probe."""
    try:
        return R.beta_central(), False
    except DomainError:
        pass
    expr = R.expr
    d1 = nth_derivative(expr, 1)
    vals = []
    for x in (1e-4, 1e-5, 1e-6):
        vals.append(-x * d1.eval(x) / expr.eval(x))
    # Aitken extrapolation of the three probes
    d21, d10 = vals[2] - vals[1], vals[1] - vals[0]
    denom = d21 - d10
    est = vals[2] - d21 * d21 / denom if denom != 0.0 else vals[2]
    return est, True


def necessary_potential(ad: SeparableAD, psi_pts=None, eps_abs: float | None = None,
                        eps_fail: float | None = None) -> tuple[list[PotentialCheck], list[str]]:
    """Fractional-derivative conditions D^mu P >= 0 on the potential grid.

    mu runs over quarter steps up to, and always including, the endpoint
    3/2 - beta0.  Orders mu <= 1/2 are unconditionally necessary; interior
    orders above 1/2 bind only when the centre exponent of P keeps the
    candidate distribution integrable (see the module docstring).
    """
    if eps_abs is None:
        eps_abs = DEFAULTS.eps_abs
    if eps_fail is None:
        eps_fail = DEFAULTS.eps_fail
    if psi_pts is None:
        psi_pts = psi_grid(ad.psi_max).points()
    beta0, probed = _probe_beta0(ad.R)
    endpoint = 1.5 - beta0
    mus = [0.25 * k for k in range(int(math.floor(endpoint / 0.25)) + 1)]
    if not any(abs(m - endpoint) < 1e-9 for m in mus):
        mus.append(endpoint)

    lt = ad.P.leading_term_at_zero()
    p0 = lt[1] if lt is not None else None
    caveats = []
    if probed:
        caveats.append(CAVEAT_BETA0_PROBED)

    checks: list[PotentialCheck] = []
    any_suppressed = False
    any_error = False
    for mu in mus:
        is_endpoint = abs(mu - endpoint) < 1e-9
        enforced = mu <= 0.5 + 1e-12 or is_endpoint
        if not enforced:
            enforced = p0 is not None and p0 > endpoint - 1.0 + 1e-12
            if not enforced:
                any_suppressed = True
        try:
            vals = [(psi, rl_signed(ad.P, ad.e0, -mu, psi)) for psi in psi_pts]
        except SepadError:
            any_error = True
            checks.append(PotentialCheck(mu, enforced, "error", math.nan))
            continue
        scale = max(1.0, max(abs(v) for _, v in vals))
        wmin = min(vals, key=lambda t: t[1])
        margin = wmin[1]
        # a suppressed negative is recorded through its margin, never binding
        status = "fail" if (enforced and margin < -eps_fail * scale) else "pass"
        checks.append(PotentialCheck(mu, enforced, status, margin,
                                     witness_psi=wmin[0] if status == "fail" else None))
        if abs(margin) <= eps_abs * scale and CAVEAT_NEAR_ZERO not in caveats:
            caveats.append(CAVEAT_NEAR_ZERO)
    if any_suppressed:
        caveats.append(CAVEAT_MU_SUPPRESSED)
    if any_error:
        caveats.append(CAVEAT_EVAL)
    return checks, caveats


# ---------------------------------------------------------------------------
# sufficient side
# ---------------------------------------------------------------------------

def sufficiency_threshold(R: RadialModel) -> tuple[float | None, list[str]]:
    """Smallest proven order lambda* such that D^lambda* P >= 0 plus the
    boundary conditions guarantee a non-negative distribution, per regime:

    constant beta            : 3/2 - beta       (necessary and sufficient)
    family, beta1 <= beta2   : 3/2 - beta1
    family, beta2 <= 1 - s   : 3/2 - beta2
    family, 1-s < b2 < b1 < 1: 3/2 - (beta1 - s)    [restrictive]
    s > 1 or custom          : none proven
    """
    if R.kind == "constant":
        return 1.5 - R.beta, []
    if R.kind == "general":
        if R.s > 1.0:
            return None, [CAVEAT_S_GT_1]
        b1, b2, s = R.beta1, R.beta2, R.s
        if b1 <= b2:
            return 1.5 - b1, []
        if b2 <= 1.0 - s:
            return 1.5 - b2, []
        return 1.5 - (b1 - s), [CAVEAT_RESTRICTIVE]
    return None, [CAVEAT_NO_THRESHOLD]


def sufficient_potential(P: Expr, lam: float, psi_pts=None, psi_max: float = 1.0,
                         eps_abs: float | None = None,
                         eps_fail: float | None = None) -> tuple[bool, dict]:
    """D^lam P >= 0 on the grid plus P(0) = ... = P^{(floor(lam)-1)}(0) = 0.

    Below lam = 1 the boundary list is empty.  An unbounded derivative at
    the origin counts as a boundary failure, not an error: the condition
    asks for the value zero.
    """
    if lam < 0.0:
        raise DomainError("sufficiency order must be >= 0")
    if eps_abs is None:
        eps_abs = DEFAULTS.eps_abs
    if eps_fail is None:
        eps_fail = DEFAULTS.eps_fail
    if psi_pts is None:
        psi_pts = psi_grid(psi_max).points()

    boundary_ok = True
    boundary_vals = []
    for k in range(int(math.floor(lam))):
        try:
            v = limit_at_zero(nth_derivative(P, k, DEFAULTS.diff_cap))
        except SepadError:
            v = math.nan
        boundary_vals.append(v)
        if not (abs(v) <= eps_abs):
            boundary_ok = False

    grid_ok = True
    margin = math.inf
    witness = None
    try:
        vals = [(psi, rl_signed(P, 0.0, -lam, psi)) for psi in psi_pts]
        scale = max(1.0, max(abs(v) for _, v in vals))
        for psi, v in vals:
            if v < margin:
                margin, witness = v, psi
        grid_ok = margin >= -eps_fail * scale
    except SepadError as exc:
        grid_ok = False
        witness = repr(exc)

    ok = boundary_ok and grid_ok
    evidence = {
        "lambda": lam,
        "boundary_ok": boundary_ok,
        "boundary_values": boundary_vals,
        "grid_ok": grid_ok,
        "grid_min_margin": margin if margin is not math.inf else None,
    }
    if not grid_ok and witness is not None:
        evidence["witness"] = witness
    return ok, evidence


def sufficient_radial(R: RadialModel, lam: float, k_max: int | None = None,
                      n_max: int | None = None, grid=None,
                      eps_abs: float | None = None) -> tuple[bool, dict]:
    """x^{3/2-lam} R_(k)(x) completely monotonic for every k <= k_max."""
    if k_max is None:
        k_max = 6
    if n_max is None:
        n_max = DEFAULTS.cm_order
    rows = {}
    ok = True
    for k in range(k_max + 1):
        v = cm_test(scaled_Rn_derivatives(R, k, 1.5 - lam), n_max, grid, eps_abs)
        rows[k] = v
        if v.failed:
            ok = False
            break
    evidence = {
        "lambda": lam,
        "k_checked": sorted(rows),
        "rows": {k: v.as_dict() for k, v in rows.items()},
    }
    return ok, evidence


# ---------------------------------------------------------------------------
# the verdict
# ---------------------------------------------------------------------------

def verdict(ad: SeparableAD, opts: VerdictOptions | None = None) -> ConsistencyReport:
    """Three-valued consistency verdict for a separable augmented density."""
    if opts is None:
        opts = VerdictOptions()
    caveats: list[str] = [CAVEAT_FINITE_ORDER]

    nr = necessary_radial(ad.R, opts.n_max, opts.x_grid, opts.eps_abs)
    psi_pts = psi_grid(ad.psi_max, opts.psi_points).points()
    np_checks, np_caveats = necessary_potential(ad, psi_pts, opts.eps_abs, opts.eps_fail)
    caveats.extend(c for c in np_caveats if c not in caveats)

    if nr.failed or any(c.status == "fail" for c in np_checks):
        return ConsistencyReport("inconsistent", nr, tuple(np_checks), None, tuple(caveats))

    lam_star, thr_caveats = sufficiency_threshold(ad.R)
    caveats.extend(c for c in thr_caveats if c not in caveats)
    if lam_star is None and opts.lambda_suff is not None:
        lam_star = opts.lambda_suff

    if lam_star is None:
        return ConsistencyReport("inconclusive", nr, tuple(np_checks), None, tuple(caveats))
    if ad.e0 != 0.0:
        caveats.append(CAVEAT_E0)
        return ConsistencyReport("inconclusive", nr, tuple(np_checks), None, tuple(caveats))

    sp_ok, sp_ev = sufficient_potential(ad.P, lam_star, psi_pts, ad.psi_max,
                                        opts.eps_abs, opts.eps_fail)
    sufficient = {"lambda": lam_star, "potential": sp_ev, "radial": None}
    radial_ok = True
    if ad.R.kind == "custom":
        radial_ok, sr_ev = sufficient_radial(ad.R, lam_star, opts.k_max,
                                             opts.n_max, opts.x_grid, opts.eps_abs)
        sufficient["radial"] = sr_ev

    if nr.status == "inconclusive":
        caveats.append(CAVEAT_EVAL)
        return ConsistencyReport("inconclusive", nr, tuple(np_checks), sufficient, tuple(caveats))

    if sp_ok and radial_ok:
        return ConsistencyReport("consistent", nr, tuple(np_checks), sufficient, tuple(caveats))

    if not sp_ev.get("boundary_ok", True):
        caveats.append(CAVEAT_BOUNDARY)
    if not sp_ev.get("grid_ok", True) or not radial_ok:
        caveats.append(CAVEAT_GRID_FAIL)
    return ConsistencyReport("inconclusive", nr, tuple(np_checks), sufficient, tuple(caveats))
