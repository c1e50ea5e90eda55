#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Utility functionality for the downclosed test suite.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from collections import namedtuple
from fractions import Fraction
import copy
import inspect
import os
import pytest
import sys

from downclosed.components.session import Session
from downclosed.scripts import downclosed_cli

# Data path.
DATA = os.path.join(os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe()))), "data")


@pytest.fixture
def session(tmpdir):
    """
    Fixture returning a quiet session writing into a temporary directory.
    """
    return Session(output_folder=str(tmpdir), seed=1, threads=1, quiet=True)


@pytest.fixture
def communicator(session):
    return session.comm


@pytest.fixture
def cli(tmpdir, request, capsys):
    """
    Fixture for being able to easily test the command line interface.

    Usage:
        stdout = cli.run("downclosed prophet verify --trials 100")

    The exit code of the last invocation is available as ``cli.exit_code``.
    """
    Output = namedtuple("Output", ["stdout", "stderr"])
    request.exit_code = None
    request.folder = str(tmpdir)

    def run(command):
        old_dir = os.getcwd()
        old_argv = copy.deepcopy(sys.argv)
        try:
            # All output files end up in the temporary directory.
            os.chdir(str(tmpdir))
            components = command.split()
            if components[0] != "downclosed":
                msg = "Invalid downclosed CLI command."
                raise Exception(msg)
            sys.argv = components
            capsys.readouterr()
            request.exit_code = 0
            try:
                downclosed_cli.main()
            except SystemExit as e:
                request.exit_code = e.code
        finally:
            # Reset environment
            os.chdir(old_dir)
            sys.argv = old_argv
        return Output(*capsys.readouterr())

    request.run = run
    return request


def small_prophet_params(**kwargs):
    """
    A desk prophet construction small enough for the exact oracles.
    """
    from downclosed.prophet import ProphetParams
    defaults = dict(L=2, p=7, branching=[2, 2], subset_sizes=[1, 1],
                    activation_prob=Fraction(1, 2))
    defaults.update(kwargs)
    return ProphetParams(**defaults)


def small_probing_params(**kwargs):
    """
    A desk probing construction small enough for the exact oracles.
    """
    from downclosed.probing import ProbingParams
    defaults = dict(L=2, p=101, arities=[2, 2], depths=[1, 1],
                    activation_prob=Fraction(1, 2))
    defaults.update(kwargs)
    return ProbingParams(**defaults)
