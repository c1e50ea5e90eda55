#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os

import pytest

from downclosed import DownClosedInputError
from downclosed.file_handling.instance_file import SecretaryInstance
from downclosed.tests.testing_helpers import (small_probing_params,
                                              small_prophet_params)

from downclosed.tests.testing_helpers import session, communicator  # NOQA


def test_generating_secretary_instances(communicator):
    instance = communicator.instances.generate_secretary("random", 10,
                                                         clauses=4)
    assert isinstance(instance, SecretaryInstance)
    assert instance.f.n == instance.oracle.n == 10
    assert len(instance.f.clauses) == 4
    # Seeds are derived from the session.
    assert communicator.instances.generate_secretary("random", 10,
                                                     clauses=4) == instance

    partition = communicator.instances.generate_secretary("partition", 16)
    # Default groups of ceil(log2 n) elements.
    assert max(len(_i) for _i in partition.oracle.sets) == 4

    with pytest.raises(DownClosedInputError):
        communicator.instances.generate_secretary("matroid", 10)
    with pytest.raises(DownClosedInputError):
        communicator.instances.generate_secretary("random", 0)


def test_saving_and_loading(communicator, tmpdir):
    instance = communicator.instances.generate_secretary("random", 6)
    filename = communicator.instances.save_secretary(
        instance.f, instance.oracle, "instance.json")
    assert filename == os.path.join(str(tmpdir), "instance.json")
    assert communicator.instances.load_secretary(filename) == instance

    construction = communicator.prophet.generate(small_prophet_params(),
                                                 seed=4)
    filename = communicator.instances.save_descriptor(
        "prophet", construction, "prophet.json")
    kind, loaded = communicator.instances.load(filename)
    assert kind == "prophet"
    assert loaded.seed == 4 and loaded.params == construction.params
    lazy = communicator.instances.load_construction(filename, "prophet",
                                                    materialize=False)
    assert not lazy.materialized

    # Kind mismatches are input errors.
    with pytest.raises(DownClosedInputError):
        communicator.instances.load_secretary(filename)
    with pytest.raises(DownClosedInputError):
        communicator.instances.load_construction(filename, "probing")
    with pytest.raises(DownClosedInputError):
        communicator.instances.load_construction(
            os.path.join(str(tmpdir), "instance.json"), "prophet")


def test_generating_constructions(communicator):
    instance = communicator.instances.generate_construction(
        "probing", small_probing_params())
    assert instance.materialized
    assert instance.seed == communicator.session.derive_seed(
        "probing-instance")
    with pytest.raises(DownClosedInputError):
        communicator.instances.generate_construction(
            "matroid", small_probing_params())
