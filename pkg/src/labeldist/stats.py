"""Simple linear regression with an exact two-sided t-test on the slope.

Used to validate metric-derived distances against Elo-derived human-judgment
distances; sample sizes there are small (tens of pairs), so the p-value uses
the exact Student-t tail rather than a normal approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

__all__ = ["RegressionReport", "ols_fit", "t_tail"]


@dataclass(frozen=True)
class RegressionReport:
    slope: float
    intercept: float
    r_squared: float
    p_value: float
    n: int


def t_tail(t: float, df: int) -> float:
    """Two-sided tail P(|T| >= |t|) of the Student-t distribution.

    Computed through the regularized incomplete beta function:
    P(|T| >= t) = I(df/2, 1/2; df / (df + t^2)).
    """
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def ols_fit(x, y) -> RegressionReport:
    """Least-squares line y = slope*x + intercept with R^2 and slope p-value.

    Requires n >= 3 and non-constant x. Constant y returns the
    no-relationship convention (slope 0, R^2 0, p 1) instead of an error.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"x and y must be equal-length 1-D sequences, got {x.shape} and {y.shape}")
    n = len(x)
    if n < 3:
        raise ValueError(f"need n >= 3 samples for a defined p-value, got {n}")
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    syy = float(((y - y_mean) ** 2).sum())
    if sxx == 0.0:
        raise ValueError("x is constant; the slope is undefined")
    if syy == 0.0:
        return RegressionReport(slope=0.0, intercept=float(y_mean), r_squared=0.0, p_value=1.0, n=n)
    sxy = float(((x - x_mean) * (y - y_mean)).sum())
    slope = sxy / sxx
    intercept = float(y_mean - slope * x_mean)
    ss_res = max(syy - slope * sxy, 0.0)
    r_squared = min(max(1.0 - ss_res / syy, 0.0), 1.0)
    if ss_res == 0.0:
        p_value = 0.0
    else:
        se = math.sqrt(ss_res / (n - 2) / sxx)
        p_value = t_tail(slope / se, n - 2)
    return RegressionReport(slope=float(slope), intercept=intercept, r_squared=r_squared, p_value=p_value, n=n)
