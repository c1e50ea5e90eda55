#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Small statistical helpers shared by the Monte Carlo experiments.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
import math

import numpy as np
from scipy import stats

from downclosed import DownClosedInputError


class MeanEstimate(collections.namedtuple(
        "MeanEstimate", ["mean", "ci_low", "ci_high", "std", "count"])):
    """
    Sample mean with a two sided Student-t confidence interval.

    >>> est = estimate_mean([1.0, 1.0, 1.0])
    >>> est.mean, est.ci_low, est.ci_high
    (1.0, 1.0, 1.0)
    """
    def overlaps(self, other):
        return not (self.ci_high < other.ci_low or
                    other.ci_high < self.ci_low)


def estimate_mean(values, confidence=0.95):
    """
    Mean and confidence interval of a sample.

    :param values: Iterable of numbers (floats or Fractions).
    :param confidence: Two sided confidence level.
    """
    values = np.asarray([float(_i) for _i in values], dtype=np.float64)
    if not len(values):
        raise DownClosedInputError("Cannot estimate a mean from zero "
                                   "samples.")
    mean = float(values.mean())
    if len(values) == 1:
        return MeanEstimate(mean, mean, mean, 0.0, 1)
    std = float(values.std(ddof=1))
    if std == 0.0:
        return MeanEstimate(mean, mean, mean, 0.0, len(values))
    half = float(stats.t.ppf(0.5 + confidence / 2.0, len(values) - 1)) * \
        std / math.sqrt(len(values))
    return MeanEstimate(mean, mean - half, mean + half, std, len(values))


def ratio_of_means(numerator, denominator):
    """
    Ratio of two means. 0/0 is reported as 1 (nothing to gain either way),
    x/0 as infinity.
    """
    if denominator == 0:
        return 1.0 if numerator == 0 else float("inf")
    return float(numerator) / float(denominator)


def chi_square_uniformity(counts):
    """
    p-value of a chi-square goodness-of-fit test against the uniform law.
    """
    counts = np.asarray(counts, dtype=np.float64)
    return float(stats.chisquare(counts).pvalue)


def binomial_sigma(probability, trials):
    """
    Standard deviation of a frequency estimated from ``trials`` Bernoulli
    draws with the given success probability.
    """
    if trials <= 0:
        raise DownClosedInputError("At least one trial is required.")
    return math.sqrt(probability * (1.0 - probability) / trials)


def fit_slope(x, y):
    """
    Least-squares slope of ``y`` against ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2:
        raise DownClosedInputError("A slope needs at least two points.")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


class GapStats(collections.namedtuple(
        "GapStats", ["benchmark", "contenders", "best", "ratio",
                     "ratio_low", "ratio_high", "lower_bound", "trials"])):
    """
    Benchmark mean against the best of several contenders.

    ``ratio_low``/``ratio_high`` combine the endpoints of both confidence
    intervals and bracket the ratio conservatively. ``lower_bound`` is set
    when the contenders only lower-bound the quantity they stand for.
    """
    def separated_below(self, other):
        """
        True if this ratio's interval lies strictly below ``other``'s.
        """
        return self.ratio_high < other.ratio_low


def summarize_gap(rows, benchmark_key, contender_keys, lower_bound=False):
    """
    Builds :class:`GapStats` from per-trial dictionaries.
    """
    if not rows:
        raise DownClosedInputError("Cannot summarize zero trials.")
    benchmark = estimate_mean([_i[benchmark_key] for _i in rows])
    contenders = collections.OrderedDict(
        (_k, estimate_mean([_i[_k] for _i in rows]))
        for _k in contender_keys)
    best = max(contenders, key=lambda _k: contenders[_k].mean)
    top = contenders[best]
    return GapStats(
        benchmark=benchmark, contenders=contenders, best=best,
        ratio=ratio_of_means(benchmark.mean, top.mean),
        ratio_low=ratio_of_means(benchmark.ci_low, top.ci_high),
        ratio_high=ratio_of_means(benchmark.ci_high, top.ci_low),
        lower_bound=lower_bound, trials=len(rows))
