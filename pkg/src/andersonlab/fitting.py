"""Weighted least-squares fits of log-quantities against distance.

Exponential decay C * exp(-mu * r) is fitted as a line in (r, log y).
When standard errors are supplied, points whose mean sits below the
noise floor (mean < 10 * stderr) are dropped, and the remaining points
are weighted by the delta-method variance (stderr / mean)^2; the slope
standard error then comes from the weighted normal equations.  Without
standard errors an ordinary fit with residual-based errors is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

NOISE_FLOOR = 10.0
MIN_FIT_POINTS = 3


@dataclass(frozen=True)
class DecayFit:
    """Exponential decay parameters: y ~ exp(log_prefactor - rate * r)."""

    rate: float
    log_prefactor: float
    r_squared: float
    slope_stderr: float
    n_points: int

    @property
    def significance(self) -> float:
        """Fitted rate in units of its standard error."""
        if self.slope_stderr == 0:
            return np.inf if self.rate != 0 else 0.0
        return self.rate / self.slope_stderr


def fit_log_decay(distances, means, stderrs=None) -> DecayFit:
    """Fit log(mean) = log_prefactor - rate * distance.

    Returns the fit on the points surviving the noise-floor cut; raises
    FitError if fewer than MIN_FIT_POINTS remain or any surviving mean
    is non-positive.
    """
    x = np.asarray(distances, dtype=float)
    m = np.asarray(means, dtype=float)
    if stderrs is None:
        se = np.zeros_like(m)
    else:
        se = np.asarray(stderrs, dtype=float)
    keep = m > NOISE_FLOOR * se
    keep &= m > 0
    x, m, se = x[keep], m[keep], se[keep]
    if x.size < MIN_FIT_POINTS:
        raise FitError(
            f"only {x.size} usable points after the noise-floor cut "
            f"(need >= {MIN_FIT_POINTS})"
        )
    y = np.log(m)
    weighted = np.any(se > 0)
    if weighted:
        sy = np.where(se > 0, se / m, np.min(se[se > 0] / m[se > 0]))
        w = 1.0 / sy**2
    else:
        w = np.ones_like(y)
    wsum = np.sum(w)
    xb = np.sum(w * x) / wsum
    yb = np.sum(w * y) / wsum
    sxx = np.sum(w * (x - xb) ** 2)
    if sxx == 0:
        raise FitError("distances are all equal; no slope to fit")
    slope = np.sum(w * (x - xb) * (y - yb)) / sxx
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    ss_res = np.sum(w * resid**2)
    ss_tot = np.sum(w * (y - yb) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if weighted:
        slope_var = 1.0 / sxx
    else:
        dof = max(x.size - 2, 1)
        slope_var = (np.sum(resid**2) / dof) / np.sum((x - xb) ** 2)
    return DecayFit(
        rate=-slope,
        log_prefactor=intercept,
        r_squared=float(r2),
        slope_stderr=float(np.sqrt(slope_var)),
        n_points=int(x.size),
    )


def fit_line(x, y) -> tuple[float, float, float]:
    """Plain least squares; returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise FitError("need at least 2 points for a line")
    xb, yb = x.mean(), y.mean()
    sxx = np.sum((x - xb) ** 2)
    if sxx == 0:
        raise FitError("abscissae are all equal; no slope to fit")
    slope = np.sum((x - xb) * (y - yb)) / sxx
    intercept = yb - slope * xb
    ss_res = np.sum((y - intercept - slope * x) ** 2)
    ss_tot = np.sum((y - yb) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)
