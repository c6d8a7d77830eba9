"""Welch two-sample t-test"""
# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2026, adaptrust contributors

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import t as student_t

from adaptrust.errors import StatisticsError

# Beyond this many degrees of freedom the normal quantiles are used.
NORMAL_APPROX_DF = 100
_NORMAL_QUANTILE = {0.975: 1.96, 0.95: 1.645}

ALTERNATIVES = ("two-sided", "greater")


class TTestResult(NamedTuple):
    """Outcome of a Welch test of sample a against sample b"""
    t: float
    df: float
    significant: bool
    p_value: float
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    alternative: str = "two-sided"


def critical_value(df: float, quantile: float = 0.975) -> float:
    """Student-t quantile, normal approximation when df > 100."""

    if df > NORMAL_APPROX_DF:
        return _NORMAL_QUANTILE[quantile]
    return float(student_t.ppf(quantile, df))


def welch_t_test(
        sample_a: Sequence[float], sample_b: Sequence[float],
        alternative: str = "two-sided") -> TTestResult:
    """Compare the means of two samples at the 95% level without assuming equal variances.

    alternative "two-sided" tests mean_a != mean_b, "greater" tests mean_a > mean_b.
    """

    if alternative not in ALTERNATIVES:
        raise ValueError(f"unknown alternative '{alternative}', expected one of {ALTERNATIVES}")

    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatisticsError(f"both samples need at least 2 values, got {len(a)} and {len(b)}")

    mean_a, mean_b = float(np.mean(a)), float(np.mean(b))
    var_a, var_b = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))

    se_a, se_b = var_a / len(a), var_b / len(b)
    pooled = se_a + se_b
    if pooled <= 0.0:
        raise StatisticsError("both samples have zero variance")

    t_value = (mean_a - mean_b) / math.sqrt(pooled)
    df = pooled ** 2 / (se_a ** 2 / (len(a) - 1) + se_b ** 2 / (len(b) - 1))

    if alternative == "greater":
        significant = t_value > critical_value(df, 0.95)
        p_value = float(student_t.sf(t_value, df))
    else:
        significant = abs(t_value) > critical_value(df, 0.975)
        p_value = float(2.0 * student_t.sf(abs(t_value), df))

    return TTestResult(t_value, df, bool(significant), p_value, mean_a, mean_b, var_a, var_b, alternative)


def standard_error(sample: Sequence[float]) -> float:
    """Standard error of a sample mean."""

    values = np.asarray(sample, dtype=float)
    if len(values) < 2:
        raise StatisticsError("standard error needs at least 2 values")
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))
