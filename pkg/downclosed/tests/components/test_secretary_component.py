#!/usr/bin/env python
# -*- coding: utf-8 -*-
from fractions import Fraction
import math

import mock
import pytest

from downclosed import DownClosedInputError, xos
from downclosed.components.session import Session
from downclosed.constraints import ExplicitOracle

from downclosed.tests.testing_helpers import session, communicator  # NOQA


@pytest.fixture()
def instance(communicator):
    return communicator.instances.generate_secretary("partition", 12,
                                                     group_size=3, seed=5)


def test_runs(communicator, instance):
    rows = communicator.secretary.run(instance.f, instance.oracle, 10)
    assert len(rows) == 10
    assert list(rows[0].keys()) == [
        "seed", "branch", "degenerate", "selected", "value", "tau_alg",
        "drop_violations", "offline_opt", "ratio"]
    assert all(_i["offline_opt"] == 3 for _i in rows)
    assert all(0.0 <= _i["ratio"] <= 1.0 for _i in rows)
    # Every trial has its own order.
    assert len(set(_i["seed"] for _i in rows)) == 10
    # Runs only depend on the master seed.
    again = communicator.secretary.run(instance.f, instance.oracle, 10)
    assert [_i["value"] for _i in again] == [_i["value"] for _i in rows]

    summary = communicator.secretary.summarize(rows)
    assert summary["ratio"].count == 10
    assert 0.0 <= summary["ratio"].mean <= 1.0

    with pytest.raises(DownClosedInputError):
        communicator.secretary.run(instance.f, instance.oracle, 0)


def test_debug_mode_logs_phases(communicator, instance, tmpdir):
    with mock.patch("downclosed.components.secretary.SecretaryComponent."
                    "_log_phases") as patch:
        communicator.secretary.run(instance.f, instance.oracle, 3)
    assert patch.call_count == 0

    debug = Session(output_folder=str(tmpdir), threads=1, debug=True,
                    quiet=True)
    with mock.patch("downclosed.components.secretary.SecretaryComponent."
                    "_log_phases") as patch:
        rows = debug.comm.secretary.run(instance.f, instance.oracle, 3)
    assert patch.call_count == 3
    assert [_i[0][0] for _i in patch.call_args_list] == [0, 1, 2]
    assert all("phases" not in _i for _i in rows)


def test_comparing_the_variants(communicator, instance):
    a, b, overlapping = communicator.secretary.compare_variants(
        instance.f, instance.oracle, 8)
    assert a.count == b.count == 8
    assert overlapping == a.overlaps(b)


def test_claim_frequency(communicator, instance):
    result = communicator.secretary.claim_frequency(instance.f,
                                                    instance.oracle, 20)
    assert list(result.keys()) == ["frequency", "violations", "trials",
                                   "max_element_share"]
    assert result["trials"] == 20
    assert result["frequency"] == result["violations"] / 20.0
    # One element of the hidden group is a third of the optimum.
    assert result["max_element_share"] == pytest.approx(1.0 / 3.0)


def test_ratio_sweep(communicator):
    rows, slope = communicator.secretary.ratio_sweep([8, 16], 4)
    assert [_i["n"] for _i in rows] == [8, 16]
    assert rows[1]["inverse_log_n"] == 0.25
    assert slope is not None
    rows, slope = communicator.secretary.ratio_sweep([8], 2)
    assert slope is None


@pytest.mark.slow
@pytest.mark.parametrize("n", [30, 36, 42, 48, 54])
def test_variants_agree_on_single_set_instances(n, tmpdir):
    parallel = Session(output_folder=str(tmpdir), seed=1, threads=None,
                       quiet=True)
    f = xos.XosFunction([[1] * n])
    oracle = ExplicitOracle(n, [range(n)])
    a, b, overlapping = parallel.comm.secretary.compare_variants(
        f, oracle, 10000)
    assert a.count == b.count == 10000
    assert overlapping
    assert a.mean > 0


@pytest.mark.slow
def test_sample_optimum_rarely_falls_below_a_quarter(communicator):
    # Half of 300 elements are worth one, every element is feasible.
    n = 300
    f = xos.XosFunction([[_i % 2 for _i in range(n)]])
    oracle = ExplicitOracle(n, [range(n)])
    result = communicator.secretary.claim_frequency(f, oracle, 10000)
    assert result["max_element_share"] == Fraction(1, 150)
    assert result["max_element_share"] <= 1.0 / (4 * math.log2(n))
    assert result["trials"] == 10000
    assert result["frequency"] <= 0.01
