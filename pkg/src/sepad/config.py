"""Central numerical defaults.

Every tolerance, grid and order used by the verdict machinery lives here so
that a report can echo the exact configuration it was produced with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class GridSpec:
    """A 1-D evaluation grid, log- or linearly spaced over (lo, hi]."""

    lo: float
    hi: float
    count: int = 40
    spacing: str = "log"  # "log" | "linear"

    def points(self) -> list[float]:
        if self.count == 1:
            return [self.hi]
        if self.spacing == "log":
            if self.lo <= 0.0:
                raise ValueError("log spacing needs lo > 0")
            la, lb = math.log(self.lo), math.log(self.hi)
            return [math.exp(la + (lb - la) * i / (self.count - 1)) for i in range(self.count)]
        step = (self.hi - self.lo) / (self.count - 1)
        return [self.lo + step * i for i in range(self.count)]

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Defaults:
    """Numerical knobs, exposed as one immutable bundle."""

    eps_ml: float = 1e-12          # relative target for Mittag-Leffler evaluation
    eps_abs: float = 1e-10         # absolute slack for sign checks
    eps_fail: float = 1e-8         # relative margin below which a check hard-fails
    ml_max_terms: int = 10000
    ml_z_switch: float = 30.0      # |z| beyond which the power series is abandoned
    quad_nodes: int = 64
    quad_nodes_check: int = 96
    quad_tol: float = 1e-10
    diff_cap: int = 16             # symbolic differentiation order cap
    cm_order: int = 8
    cm_grid: GridSpec = field(default_factory=lambda: GridSpec(1e-3, 1e3, 40, "log"))
    coeff_table_cap: int = 128

    def as_dict(self) -> dict:
        d = asdict(self)
        return d


DEFAULTS = Defaults()


def psi_grid(psi_max: float, count: int = 48) -> GridSpec:
    """Default potential-side grid: log-spaced over (1e-3, 1] * psi_max."""
    return GridSpec(1e-3 * psi_max, psi_max, count, "log")
