#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
downclosed - online selection under downward-closed constraints.

Secretary algorithm for XOS objectives, the layered hardness constructions
for prophet inequalities and stochastic probing, and the exact oracles used
to check them on tiny instances.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import inspect
import os
from subprocess import Popen, PIPE
import warnings

# Attempt to make sure the number of OpenBLAS threads is correct.
os.environ["OPENBLAS_NUM_THREADS"] = "1"


class DownClosedError(Exception):
    """
    Base exception class for downclosed.
    """
    exit_code = 1


class DownClosedInputError(DownClosedError):
    """
    Raised for malformed inputs: element ids out of range, infeasible
    starting sets, schema violations in instance or config files.
    """
    exit_code = 2


class DegenerateInstanceError(DownClosedInputError):
    """
    Raised when the pre-sample carries no value at all so normalization is
    impossible. Callers fall back to the single-choice branch.
    """
    pass


class DownClosedCapacityError(DownClosedError):
    """
    Raised whenever a configured cap would be exceeded. Nothing is ever
    silently truncated.
    """
    exit_code = 3


class DownClosedInvariantError(DownClosedError):
    """
    Raised when a checked structural or algorithmic invariant fails.
    """
    exit_code = 4


class DownClosedContractError(DownClosedInvariantError):
    """
    Raised when an online policy tries to make an infeasible selection.
    """
    pass


class DownClosedWarning(UserWarning):
    """
    Base warning class for downclosed.
    """
    pass


# Determine the version. Using git.
__root_path = os.path.abspath(os.path.dirname(os.path.dirname(inspect.getfile(
    inspect.currentframe()))))
try:
    p = Popen(['git', 'describe', '--dirty', '--abbrev=4', '--always',
               '--tags'], cwd=__root_path, stdout=PIPE, stderr=PIPE)
    p.stderr.close()
    line = p.stdout.readline().decode()
    p.stdout.close()
    p.wait()
    __version__ = line.strip() or "UNDEFINED"
except Exception:
    warnings.warn("Could not determine the downclosed version. Is git "
                  "installed?", DownClosedWarning)
    __version__ = "UNDEFINED"
