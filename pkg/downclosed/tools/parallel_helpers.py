#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Helpers for embarrassingly parallel trial loops using joblib. All functions
work just fine when running on one core.

Results always come back in the order of the input items, no matter which
worker finishes first.

:license:
    GNU Lesser General Public License, Version 3
    (http://www.gnu.org/copyleft/lesser.html)
"""
import collections
import colorama
import functools
import inspect
import os
import sys
import traceback
import warnings

import joblib


class FunctionInfo(collections.namedtuple(
    "FunctionInfo", ["func_args", "result", "warnings", "exception",
                     "traceback"])):
    """
    Namedtuple used to collect information about a function execution.

    It has the following fields: ``func_args``, ``result``, ``warnings``,
    ``exception``, and ``traceback``.
    """
    pass


def function_info(traceback_limit=10):
    """
    Decorator collecting information during the execution of a function.

    It returns a FunctionInfo named tuple with the following fields:

    * ``func_args``: Dictionary containing all the functions arguments and
      values.
    * ``result``: The return value of the function. Will be None if an
      exception has been raised.
    * ``warnings``: A list with all warnings the function raised.
    * ``exception``: The exception the function raised. Will be None, if no
      exception has been raised.
    * ``traceback``: The full traceback in case an exception occured as a
      string.
      A traceback object is not serializable thus a string is used.

    >>> @function_info()
    ... def test(a, b=2):
    ...     return a // b
    >>> info = test(4, 1)
    >>> info.func_args
    {'a': 4, 'b': 1}
    >>> info.result
    4

    ``warnings`` is empty if no warning has been raised.

    >>> info.warnings
    []

    ``exception`` and ``traceback`` are ``None`` if the function completed
    successfully.

    >>> info.exception
    >>> info.traceback
    """
    def _function_info(f):
        @functools.wraps(f)
        def wrapper(*args, **kwargs):
            with warnings.catch_warnings(record=True) as w:
                warnings.simplefilter("always")
                result = None
                exception = None
                tb = None
                bound = inspect.signature(f).bind(*args, **kwargs)
                bound.apply_defaults()
                func_args = dict(bound.arguments)
                try:
                    result = f(*args, **kwargs)
                except Exception as e:
                    exc_info = sys.exc_info()
                    stack = traceback.extract_stack(limit=traceback_limit)
                    tb = traceback.extract_tb(exc_info[2])
                    full_tb = stack[:-1] + tb
                    exc_line = traceback.format_exception_only(*exc_info[:2])
                    tb = "Traceback (%i levels - most recent call last):\n" % \
                        traceback_limit
                    tb += "".join(traceback.format_list(full_tb))
                    tb += "\n"
                    tb += "".join(exc_line)
                    exception = e

            return FunctionInfo(
                func_args=func_args,
                result=result,
                exception=exception,
                warnings=list(w),
                traceback=tb)

        return wrapper
    return _function_info


def _execute_wrapped_function(func, parameters):
    """
    Helper function to execute the same function but wrapped with the
    function_info decorator.

    This is necessary as a function needs to be importable, otherwise pickle
    does not work with it.
    """
    return function_info()(func)(**parameters)


def available_threads():
    return max(1, os.cpu_count() or 1)


def parallel_map(function, items, threads=1):
    """
    Calls a function once for each item and returns the list of
    :class:`FunctionInfo` objects in item order.

    :param function: The function to be executed for each item. Must be
        importable for ``threads > 1``.
    :param items: A list of dictionaries so that ``function(**item)`` works.
    :param threads: Number of worker processes. ``None`` uses all cores.
    """
    items = list(items)
    if threads is None:
        threads = available_threads()
    if threads <= 1 or len(items) <= 1:
        return [_execute_wrapped_function(function, _i) for _i in items]
    return joblib.Parallel(n_jobs=threads)(
        joblib.delayed(_execute_wrapped_function)(function, _i)
        for _i in items)


def serial_map(function, arguments):
    return [function(*_i) for _i in arguments]


def trial_map(function, arguments, threads=1):
    """
    Drop-in replacement for the ``trial_map`` hook of the estimators: maps
    ``function`` over positional argument tuples, re-raising the first
    exception.
    """
    arguments = list(arguments)
    if threads is None:
        threads = available_threads()
    if threads <= 1 or len(arguments) <= 1:
        return serial_map(function, arguments)
    return joblib.Parallel(n_jobs=threads)(
        joblib.delayed(function)(*_i) for _i in arguments)


def summarize_function_infos(results, get_name, logfile=None):
    """
    Counts failures and warnings of a list of :class:`FunctionInfo` objects
    and optionally writes the details to a logfile.

    :returns: Tuple ``(successful, with_warnings, failed)``.
    """
    successful_count = 0
    warning_count = 0
    failed_count = 0

    lines = []
    for result in results:
        lines.append("\n============\nItem: %s" % get_name(result.func_args))
        if result.exception:
            failed_count += 1
            lines.append("\n")
            lines.append(result.traceback)
        elif result.warnings:
            warning_count += 1
            for w in result.warnings:
                lines.append("\nWarning: %s\n" % str(w.message))
        else:
            successful_count += 1
            lines.append(" - SUCCESS")

    if logfile is not None:
        with open(logfile, "wt") as fh:
            fh.write("".join(lines))

    print("\nFinished processing %i items.\n" % len(results))
    print("\t%s%i items failed.%s" %
          (colorama.Fore.RED, failed_count, colorama.Fore.RESET))
    print("\t%s%i items raised warnings.%s" %
          (colorama.Fore.YELLOW, warning_count, colorama.Fore.RESET))
    print("\t%s%i items finished without errors or warnings.%s" %
          (colorama.Fore.GREEN, successful_count, colorama.Fore.RESET))
    if logfile is not None:
        print("\nLogfile written to '%s'." % os.path.relpath(logfile))
    return successful_count, warning_count, failed_count
