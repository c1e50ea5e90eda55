#!/usr/bin/env python
# -*- coding: utf-8 -*-
from fractions import Fraction

import mock
import pytest

from downclosed import DownClosedCapacityError, DownClosedInvariantError
from downclosed import oracles
from downclosed.components.communicator import Communicator
from downclosed.components.oracles import OraclesComponent
from downclosed.constraints import ExplicitOracle
from downclosed.tests.testing_helpers import (small_probing_params,
                                              small_prophet_params)
from downclosed.xos import XosFunction

from downclosed.tests.testing_helpers import session, communicator  # NOQA


def test_offline(communicator):
    f = XosFunction([[1, Fraction(1, 2), 0], [0, Fraction(1, 4), 2]])
    oracle = ExplicitOracle(3, [[0, 1], [2]])
    result = communicator.oracles.offline(f, oracle)
    assert result["selection"] == (2,)
    assert result["value"] == 2


def test_construction_oracles(communicator):
    prophet = communicator.prophet.generate(small_prophet_params(), seed=3)
    result = communicator.oracles.online_prophet(prophet)
    assert list(result.keys()) == ["hindsight", "optimal-online"]
    assert result["hindsight"] >= result["optimal-online"] > 0

    probing = communicator.probing.generate(small_probing_params(), seed=2)
    result = communicator.oracles.adaptive_probing(probing)
    assert result["gap"] >= 1
    assert result["adaptive"] >= result["nonadaptive"]


def test_capacity_is_configurable():
    comm = Communicator()
    comm_session = mock.MagicMock()
    comm.register("session", comm_session)
    OraclesComponent(comm, "oracles", cap=oracles.TinyInstanceCap(2, 4,
                                                                   100, 2))
    f = XosFunction([[1, 1, 1]])
    with pytest.raises(DownClosedCapacityError):
        comm.oracles.offline(f, ExplicitOracle(3, [[0, 1, 2]]))


def test_crosscheck(communicator):
    assert communicator.oracles.crosscheck(25) == 0

    query = oracles.random_query(0, 0)
    mismatch = (0, query, (1, None), (2, None))
    with mock.patch("downclosed.oracles.crosscheck_solvers") as patch:
        patch.return_value = [mismatch]
        with pytest.raises(DownClosedInvariantError) as e:
            communicator.oracles.crosscheck(10)
        assert "disagree" in str(e.value)
        assert communicator.oracles.crosscheck(
            10, raise_on_mismatch=False) == 1
    assert patch.call_count == 2
