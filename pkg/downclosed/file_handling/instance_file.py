#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Reading and writing instance files.

Instances are stored as JSON. Rational numbers are written as
``[numerator, denominator]`` integer pairs so nothing is lost to floating
point. A secretary instance looks like this::

    {
      "clauses": [
        [[1, 1], [1, 2], [0, 1]]
      ],
      "format": "downclosed-instance",
      "kind": "secretary",
      "maximal_sets": [
        [0, 1],
        [2]
      ],
      "n": 3,
      "version": 1
    }

The hardness constructions are far too big to be written out. They are
stored as descriptors (``kind`` is ``"prophet"`` or ``"probing"``) holding
the construction parameters, the seed and a structural digest that is
checked whenever the instance is regenerated.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import json
import os

from downclosed import DownClosedInputError, DownClosedInvariantError
from downclosed.constraints import ExplicitOracle
from downclosed.xos import XosFunction

FORMAT_NAME = "downclosed-instance"
FORMAT_VERSION = 1

SECRETARY = "secretary"
PROPHET = "prophet"
PROBING = "probing"
INSTANCE_KINDS = (SECRETARY, PROPHET, PROBING)


class SecretaryInstance(collections.namedtuple(
        "SecretaryInstance", ["f", "oracle"])):
    """
    An explicit secretary instance: XOS objective plus maximal-set family.
    """
    pass


class InstanceDescriptor(collections.namedtuple(
        "InstanceDescriptor", ["kind", "params", "seed", "digest"])):
    """
    Reproducible description of a hardness construction.
    """
    pass


def _fail(source, field, msg):
    raise DownClosedInputError("%s: field '%s': %s" % (source, field, msg))


def _fraction_to_json(value):
    value = Fraction(value)
    return [value.numerator, value.denominator]


def _fraction_from_json(value, source, field):
    if isinstance(value, bool):
        _fail(source, field, "expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, list) or len(value) != 2 or \
            not all(isinstance(_i, int) and not isinstance(_i, bool)
                    for _i in value):
        _fail(source, field, "expected an integer or a [numerator, "
                             "denominator] pair, got %r" % (value,))
    if value[1] <= 0:
        _fail(source, field, "the denominator must be positive")
    return Fraction(value[0], value[1])


def _dumps(data):
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def dumps_secretary_instance(f, oracle):
    """
    Canonical text of an explicit instance. Element ids within a maximal set
    are written sorted; the order of the sets is kept.
    """
    if f.n != oracle.n:
        raise DownClosedInputError(
            "Objective and constraint disagree on the ground set size "
            "(%i vs. %i)." % (f.n, oracle.n))
    return _dumps({
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": SECRETARY,
        "n": f.n,
        "clauses": [[_fraction_to_json(_j) for _j in clause]
                    for clause in f.clauses],
        "maximal_sets": [sorted(_i) for _i in oracle.maximal_sets()]})


def dumps_descriptor(kind, instance, digest=None):
    """
    Canonical text of a construction descriptor.

    :param kind: ``"prophet"`` or ``"probing"``.
    :param instance: A generated instance of the matching kind.
    :param digest: Its structural digest; computed if not given.
    """
    if kind not in (PROPHET, PROBING):
        raise DownClosedInputError("Descriptors exist for prophet and "
                                   "probing instances only, not '%s'." % kind)
    if digest is None:
        digest = _digest_function(kind)(instance)
    return _dumps({
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "params": instance.params.to_dict(),
        "seed": instance.seed,
        "digest": digest})


def _digest_function(kind):
    if kind == PROPHET:
        from downclosed.prophet import structural_digest
    else:
        from downclosed.probing import structural_digest
    return structural_digest


def _parse_header(data, source):
    if not isinstance(data, dict):
        _fail(source, "<root>", "expected a JSON object")
    if data.get("format") != FORMAT_NAME:
        _fail(source, "format", "expected '%s', got %r" %
              (FORMAT_NAME, data.get("format")))
    if data.get("version") != FORMAT_VERSION:
        _fail(source, "version", "unsupported version %r" %
              (data.get("version"),))
    kind = data.get("kind")
    if kind not in INSTANCE_KINDS:
        _fail(source, "kind", "expected one of %s, got %r" %
              (", ".join(INSTANCE_KINDS), kind))
    return kind


def _parse_secretary(data, source):
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        _fail(source, "n", "expected a non-negative integer")
    clauses = data.get("clauses")
    if not isinstance(clauses, list):
        _fail(source, "clauses", "expected a list of clauses")
    parsed = []
    for _i, clause in enumerate(clauses):
        if not isinstance(clause, list) or len(clause) != n:
            _fail(source, "clauses[%i]" % _i,
                  "expected a list of %i entries" % n)
        parsed.append([_fraction_from_json(value, source,
                                           "clauses[%i][%i]" % (_i, _j))
                       for _j, value in enumerate(clause)])
    sets = data.get("maximal_sets")
    if not isinstance(sets, list):
        _fail(source, "maximal_sets", "expected a list of element lists")
    for _i, s in enumerate(sets):
        if not isinstance(s, list):
            _fail(source, "maximal_sets[%i]" % _i, "expected a list")
        for _j, element in enumerate(s):
            if not isinstance(element, int) or isinstance(element, bool) or \
                    not 0 <= element < n:
                _fail(source, "maximal_sets[%i][%i]" % (_i, _j),
                      "element id %r outside of [0, %i)" % (element, n))
        if len(set(s)) != len(s):
            _fail(source, "maximal_sets[%i]" % _i, "duplicate element ids")
    for _i, first in enumerate(sets):
        for _j, second in enumerate(sets):
            if _i != _j and set(first) <= set(second):
                raise DownClosedInvariantError(
                    "%s: field 'maximal_sets': antichain violation, set %i "
                    "is contained in set %i." % (source, _i, _j))
    try:
        f = XosFunction(parsed, n=n)
    except DownClosedInputError as e:
        _fail(source, "clauses", str(e))
    return SecretaryInstance(f=f, oracle=ExplicitOracle(n, sets,
                                                        strict=True))


def _parse_descriptor(kind, data, source):
    params = data.get("params")
    if not isinstance(params, dict):
        _fail(source, "params", "expected an object")
    seed = data.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail(source, "seed", "expected an integer")
    digest = data.get("digest")
    if digest is not None and not isinstance(digest, str):
        _fail(source, "digest", "expected a hex string")
    if kind == PROPHET:
        from downclosed.prophet import ProphetParams as Params
    else:
        from downclosed.probing import ProbingParams as Params
    try:
        params = Params.from_dict(params)
    except DownClosedInputError as e:
        _fail(source, "params", str(e))
    return InstanceDescriptor(kind=kind, params=params, seed=seed,
                              digest=digest)


def loads_instance(text, source="<string>"):
    """
    Parses instance file content.

    :returns: A :class:`SecretaryInstance` or an
        :class:`InstanceDescriptor`.
    """
    try:
        data = json.loads(text)
    except ValueError as e:
        raise DownClosedInputError(
            "%s: not valid JSON (line %s, column %s): %s" % (
                source, getattr(e, "lineno", "?"), getattr(e, "colno", "?"),
                getattr(e, "msg", str(e))))
    kind = _parse_header(data, source)
    if kind == SECRETARY:
        return _parse_secretary(data, source)
    return _parse_descriptor(kind, data, source)


def read_instance_file(filename):
    if not os.path.exists(filename):
        raise DownClosedInputError("Instance file '%s' does not exist." %
                                   filename)
    with open(filename, "rt") as fh:
        return loads_instance(fh.read(), source=filename)


def write_text(filename, text):
    with open(filename, "wt", newline="\n") as fh:
        fh.write(text)


def regenerate(descriptor, materialize=None):
    """
    Rebuilds the construction a descriptor points to and checks its digest.
    """
    if descriptor.kind == PROPHET:
        from downclosed.prophet import gen_prophet_instance as generate
    else:
        from downclosed.probing import gen_probing_instance as generate
    instance = generate(descriptor.params, descriptor.seed,
                        materialize=materialize)
    if descriptor.digest is not None:
        digest = _digest_function(descriptor.kind)(instance)
        if digest != descriptor.digest:
            raise DownClosedInvariantError(
                "Structural digest mismatch for the %s instance with seed "
                "%i: stored %s, regenerated %s." % (
                    descriptor.kind, descriptor.seed, descriptor.digest,
                    digest))
    return instance
