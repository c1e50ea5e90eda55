#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os

import pytest

from downclosed import DownClosedInputError
from downclosed.components.communicator import Communicator
from downclosed.components.component import Component
from downclosed.components.session import Session
from downclosed.tools.keyed_random import derive_seed

from downclosed.tests.testing_helpers import session, communicator  # NOQA


def test_session_registers_all_components(communicator):
    assert dir(communicator) == ["experiments", "instances", "oracles",
                                 "probing", "prophet", "secretary",
                                 "session"]
    assert "Components registered with communicator" in str(communicator)
    assert "prophet: <ProphetComponent 'prophet'>" in str(communicator)
    assert repr(communicator.oracles) == "<OraclesComponent 'oracles'>"


def test_component_proxies_hide_private_members(communicator):
    assert "derive_seed" in dir(communicator.session)
    assert "comm" not in dir(communicator.session)
    with pytest.raises(AttributeError):
        communicator.session._Session__setup_components
    with pytest.raises(AttributeError):
        communicator.session.does_not_exist
    with pytest.raises(AttributeError) as e:
        communicator.unknown_component
    assert "not known to communicator" in str(e.value)


def test_components_register_once():
    comm = Communicator()
    Component(comm, "dummy")
    with pytest.raises(ValueError):
        Component(comm, "dummy")
    with pytest.raises(TypeError):
        Component(object(), "other")


def test_session_settings(tmpdir):
    session = Session(output_folder=str(tmpdir), seed="12", threads=None,
                      strict=True, quiet=True)
    assert session.seed == 12
    assert session.threads is None
    text = str(session)
    assert "Master seed: 12" in text
    assert "Threads: all cores" in text
    assert "Strict mode" in text
    assert session.derive_seed("tag", 3) == derive_seed(12, "tag", 3)

    with pytest.raises(DownClosedInputError):
        Session(output_folder=str(tmpdir), seed="twelve", quiet=True)
    with pytest.raises(DownClosedInputError):
        Session(output_folder=str(tmpdir), threads=0, quiet=True)

    filename = os.path.join(str(tmpdir), "a_file")
    with open(filename, "wt") as fh:
        fh.write("x")
    with pytest.raises(DownClosedInputError) as e:
        Session(output_folder=filename, quiet=True)
    assert "is a file" in str(e.value)


def test_output_filenames(session, tmpdir):
    filename = session.get_output_filename(os.path.join("a", "b.csv"))
    assert filename == os.path.join(str(tmpdir), "a", "b.csv")
    assert os.path.isdir(os.path.join(str(tmpdir), "a"))
    absolute = os.path.join(str(tmpdir), "c.csv")
    assert session.get_output_filename(absolute) == absolute


def test_trial_map_and_progress(session):
    trial_map = session.get_trial_map()
    assert trial_map(pow, [(2, 3), (3, 2)]) == [8, 9]
    assert list(session.progress(iter(range(5)), 5)) == list(range(5))
