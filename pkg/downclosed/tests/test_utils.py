#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Test cases for the keyed randomness, the statistics helpers and the logger.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import math
import os

from hypothesis import given
from hypothesis import strategies as st
import numpy as np
import pytest

from downclosed import DownClosedInputError
from downclosed.tools import keyed_random, stats_helpers
from downclosed.tools.colored_logger import ColoredLogger


@given(st.integers(0, 2 ** 70), st.integers(0, 2 ** 64 - 1))
def test_scalar_and_array_hashes_agree(seed, index):
    scalar = keyed_random.keyed_hash(seed, "family", index)
    array = keyed_random.keyed_hash_array((seed, "family"), [index])
    assert int(array[0]) == scalar


def test_keyed_draws():
    assert keyed_random.keyed_hash(1, "a") != keyed_random.keyed_hash(1, "b")
    # Large integers are split into limbs without colliding.
    assert keyed_random.keyed_hash(2 ** 64) != keyed_random.keyed_hash(0, 1)
    with pytest.raises(ValueError):
        keyed_random.keyed_hash(-1)
    values = [keyed_random.keyed_uniform(3, "u", _i) for _i in range(1000)]
    assert all(0.0 <= _i < 1.0 for _i in values)
    draws = keyed_random.keyed_randbelow_array(
        7, (3, "d"), np.arange(5000, dtype=np.uint64))
    assert draws.dtype == np.int64
    assert draws.min() == 0 and draws.max() == 6
    assert [keyed_random.keyed_randbelow(7, 3, "d", _i)
            for _i in range(20)] == draws[:20].tolist()


def test_keyed_draws_look_uniform():
    draws = keyed_random.keyed_randbelow_array(
        10, (11, "chi"), np.arange(20000, dtype=np.uint64))
    counts = np.bincount(draws, minlength=10)
    assert stats_helpers.chi_square_uniformity(counts) > 1e-4


def test_derived_seeds():
    seed = keyed_random.derive_seed(5, "trial", 2)
    assert 0 <= seed < 2 ** 63
    assert seed == keyed_random.derive_seed(5, "trial", 2)
    assert seed != keyed_random.derive_seed(5, "trial", 3)
    a = keyed_random.seeded_random(5, "x").random()
    b = keyed_random.seeded_random(5, "x").random()
    assert a == b
    a = keyed_random.seeded_generator(5, "x").integers(0, 100, 10)
    b = keyed_random.seeded_generator(5, "x").integers(0, 100, 10)
    np.testing.assert_array_equal(a, b)


def test_estimate_mean():
    est = stats_helpers.estimate_mean([Fraction(1, 2), 1, Fraction(3, 2)])
    assert est.mean == 1.0 and est.count == 3
    assert est.ci_low < 1.0 < est.ci_high
    # Student-t with two degrees of freedom.
    assert est.ci_high - 1.0 == pytest.approx(4.302653 * 0.5 / math.sqrt(3),
                                              rel=1e-5)
    single = stats_helpers.estimate_mean([5])
    assert single.ci_low == single.ci_high == 5.0
    assert single.overlaps(est) is False
    assert est.overlaps(stats_helpers.estimate_mean([1.2, 1.3]))
    with pytest.raises(DownClosedInputError):
        stats_helpers.estimate_mean([])


def test_ratio_slope_and_sigma():
    assert stats_helpers.ratio_of_means(0, 0) == 1.0
    assert math.isinf(stats_helpers.ratio_of_means(1, 0))
    assert stats_helpers.ratio_of_means(3, 2) == 1.5
    assert stats_helpers.fit_slope([1, 2, 3], [2, 4, 6]) == \
        pytest.approx(2.0)
    with pytest.raises(DownClosedInputError):
        stats_helpers.fit_slope([1], [1])
    assert stats_helpers.binomial_sigma(0.5, 100) == pytest.approx(0.05)
    with pytest.raises(DownClosedInputError):
        stats_helpers.binomial_sigma(0.5, 0)


def test_summarize_gap():
    rows = [collections.OrderedDict([("hindsight", 2), ("a", 1), ("b", 2)]),
            collections.OrderedDict([("hindsight", 4), ("a", 1), ("b", 2)])]
    stats = stats_helpers.summarize_gap(rows, "hindsight", ["a", "b"])
    assert stats.best == "b"
    assert stats.ratio == 1.5
    assert stats.trials == 2
    assert list(stats.contenders.keys()) == ["a", "b"]
    assert stats.ratio_low <= stats.ratio <= stats.ratio_high
    tight = stats_helpers.summarize_gap(
        [{"x": 1, "y": 1}] * 3, "x", ["y"])
    loose = stats_helpers.summarize_gap(
        [{"x": 4, "y": 1}] * 3, "x", ["y"])
    assert tight.separated_below(loose)
    assert not loose.separated_below(tight)
    with pytest.raises(DownClosedInputError):
        stats_helpers.summarize_gap([], "x", ["y"])


def test_colored_logger(tmpdir, capsys):
    filename = os.path.join(str(tmpdir), "log.txt")
    logger = ColoredLogger(log_filename=filename, quiet=True)
    logger.info("hidden on screen")
    logger.debug("not logged at all")
    logger.warning("shown on screen")
    out, _ = capsys.readouterr()
    assert "hidden on screen" not in out
    assert "WARNING" in out and "shown on screen" in out
    logger.set_debug(True)
    logger.debug("now logged")
    logger.close()
    with open(filename, "rt") as fh:
        content = fh.read()
    assert "hidden on screen" in content
    assert "not logged at all" not in content
    assert "now logged" in content

    logger = ColoredLogger(debug=True)
    logger.debug("debug output")
    logger.error("something failed")
    out, _ = capsys.readouterr()
    assert "DEBUG: debug output" in out
    assert "ERROR: something failed" in out
    logger.close()
