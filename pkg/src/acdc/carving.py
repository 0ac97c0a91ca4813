"""Per-stage alpha selection by matching a slope target.

Each stage solves nu = d/domega az_factor(omega, alpha) at the node's
dominant class ratio omega_y. The slope g(alpha) rises from 0 and decays
back toward 0, so a target below the peak brackets up to two roots; the
larger one is returned, which is what makes alpha shrink as omega_y shrinks
along the chain and grow as nu is lowered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CarvingRangeError

EXACT_ROOT = "exact_root"
PEAK_FALLBACK = "peak_fallback"

_MAX_BISECT = 500


@dataclass(frozen=True)
class CarvingConfig:
    nu: float
    alpha_min: float = 1.0 + 1e-6
    alpha_max: float = 512.0
    tolerance: float = 1e-12
    grid_points: int = 1024

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.alpha_min <= 1.0:
            raise ValueError("alpha_min must exceed 1")
        if self.alpha_max <= self.alpha_min:
            raise ValueError("alpha_max must exceed alpha_min")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


@dataclass(frozen=True)
class CarvingSolution:
    alpha: float
    kind: str  # EXACT_ROOT | PEAK_FALLBACK
    residual: float


def az_factor_slope(omega, alpha):
    """Analytic derivative of az_factor in its first argument:
    alpha * (omega**(alpha-1) - (1-omega)**(alpha-1)).

    Accepts arrays for alpha. omega must lie strictly inside (0, 1); the
    endpoints are poles for alpha < 1.
    """
    if not 0.0 < omega < 1.0:
        raise ValueError("omega must lie strictly inside (0, 1)")
    if np.any(np.asarray(alpha) <= 0):
        raise ValueError("alpha must be positive")
    return alpha * (omega ** (alpha - 1.0) - (1.0 - omega) ** (alpha - 1.0))


def omega_y(labels) -> float:
    """Dominant class ratio max(p, 1-p) of a node's label vector."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("empty node")
    p = float(np.mean(labels))
    return max(p, 1.0 - p)


def solve_alpha(omega: float, config: CarvingConfig) -> CarvingSolution:
    """Solve az_factor_slope(omega, alpha) = nu for alpha.

    Scans a log-spaced grid over [alpha_min, alpha_max]; if the slope crosses
    nu, the largest bracketed root is refined by bisection until the residual
    is within tolerance. If the slope never reaches nu, the grid argmax is
    returned flagged as PEAK_FALLBACK (the most balanced achievable zoom).

    At omega <= 0.5 the slope is identically zero by symmetry, so no alpha
    exists; that case raises and signals chain termination to the caller.
    """
    if omega <= 0.5:
        raise CarvingRangeError(
            f"omega={omega:.6g}: slope target is unreachable at or below 0.5"
        )
    if omega >= 1.0:
        raise CarvingRangeError("omega must be strictly below 1")
    grid = np.geomspace(config.alpha_min, config.alpha_max, config.grid_points)
    g = az_factor_slope(omega, grid)
    f = g - config.nu

    # exact hit on a grid point counts as a (zero-width) bracket
    bracket: tuple[float, float] | None = None
    for i in range(config.grid_points - 1):
        if f[i] == 0.0:
            bracket = (float(grid[i]), float(grid[i]))
        elif (f[i] < 0.0) != (f[i + 1] < 0.0):
            bracket = (float(grid[i]), float(grid[i + 1]))
    if f[-1] == 0.0:
        bracket = (float(grid[-1]), float(grid[-1]))

    if bracket is None:
        j = int(np.argmax(g))
        return CarvingSolution(
            float(grid[j]), PEAK_FALLBACK, float(abs(g[j] - config.nu))
        )

    a, b = bracket
    fa = float(az_factor_slope(omega, a) - config.nu)
    if abs(fa) <= config.tolerance:
        return CarvingSolution(a, EXACT_ROOT, abs(fa))
    for _ in range(_MAX_BISECT):
        m = 0.5 * (a + b)
        fm = float(az_factor_slope(omega, m) - config.nu)
        if abs(fm) <= config.tolerance:
            return CarvingSolution(m, EXACT_ROOT, abs(fm))
        if (fa < 0.0) == (fm < 0.0):
            a, fa = m, fm
        else:
            b = m
    raise ArithmeticError(
        f"bisection failed to reach residual {config.tolerance:g} "
        f"for omega={omega:.6g}, nu={config.nu:.6g}"
    )
