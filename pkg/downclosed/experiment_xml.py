#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Functionality to deal with experiment configuration XML files.

An experiment file looks like this::

    <?xml version='1.0' encoding='UTF-8'?>
    <experiment>
      <kind>prophet</kind>
      <operation>simulate</operation>
      <parameters>
        <L>2</L>
        <p>10000</p>
        <branching>4,4</branching>
      </parameters>
      <sweep name="L">
        <value>2</value>
        <value>3</value>
      </sweep>
      <trials>2000</trials>
      <seed>1</seed>
      <output>prophet_gap.csv</output>
      <threads>4</threads>
      <strict>false</strict>
      <plot>true</plot>
    </experiment>

Provenance sidecars wrap the ``experiment`` element, so they can be fed
back in as configuration.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from collections import OrderedDict
from fractions import Fraction
import os

from lxml import etree
from lxml.builder import E

from downclosed import DownClosedInputError

KINDS = ("secretary", "prophet", "probing", "oracle")


def parse_value(text):
    """
    Converts a parameter string: integers, rationals and comma separated
    lists thereof. Everything else stays a string.

    >>> parse_value("4,4"), parse_value("1/4"), parse_value("desk")
    ([4, 4], Fraction(1, 4), 'desk')
    """
    text = (text or "").strip()
    if "," in text:
        return [parse_value(_i) for _i in text.split(",") if _i.strip()]
    for converter in (int, Fraction):
        try:
            return converter(text)
        except (ValueError, ZeroDivisionError):
            continue
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def format_value(value):
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(_i) for _i in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


class ExperimentConfig(object):
    """
    A fully serializable experiment description.
    """
    def __init__(self, kind, operation, parameters=None, instance_file=None,
                 trials=1, seed=0, sweep=None, output="results.csv",
                 threads=None, strict=False, plot=False, comments=None):
        if kind not in KINDS:
            raise DownClosedInputError(
                "Unknown experiment kind '%s'. Available: %s" %
                (kind, ", ".join(KINDS)))
        self.kind = kind
        self.operation = operation
        self.parameters = OrderedDict(parameters or {})
        self.instance_file = instance_file
        self.trials = int(trials)
        self.seed = int(seed)
        self.sweep = OrderedDict(sweep or {})
        self.output = output
        self.threads = None if threads is None else int(threads)
        self.strict = bool(strict)
        self.plot = bool(plot)
        self.comments = list(comments or [])
        if self.trials < 1:
            raise DownClosedInputError("An experiment needs at least one "
                                       "trial, got %i." % self.trials)
        if self.threads is not None and self.threads < 1:
            raise DownClosedInputError("Threads must be positive.")

    def __eq__(self, other):
        if not isinstance(other, type(self)):
            return False
        return self.__dict__ == other.__dict__

    def __ne__(self, other):
        return not self.__eq__(other)

    @classmethod
    def from_file(cls, filename):
        if not os.path.exists(filename):
            raise DownClosedInputError("File '%s' not found." % filename)
        try:
            root = etree.parse(filename).getroot()
        except etree.XMLSyntaxError as e:
            raise DownClosedInputError(
                "Experiment file '%s' is not valid XML: %s" % (filename, e))
        return cls._from_element(root, filename)

    @classmethod
    def from_string(cls, string):
        try:
            root = etree.fromstring(string.encode("utf-8")
                                    if isinstance(string, str) else string)
        except etree.XMLSyntaxError as e:
            raise DownClosedInputError("Invalid experiment XML: %s" % e)
        return cls._from_element(root, "<string>")

    @classmethod
    def _from_element(cls, root, source):
        if root.tag == "provenance":
            root = root.find("experiment")
        if root is None or root.tag != "experiment":
            raise DownClosedInputError(
                "'%s' contains no 'experiment' element." % source)

        def get(name, default=None, required=False):
            item = root.find(name)
            if item is None or item.text is None:
                if required:
                    raise DownClosedInputError(
                        "'%s', line %s: missing required element '%s'." %
                        (source, root.sourceline, name))
                return default
            return item.text.strip()

        parameters = OrderedDict()
        params_element = root.find("parameters")
        if params_element is not None:
            for child in params_element:
                if not isinstance(child.tag, str):
                    continue
                parameters[child.tag] = parse_value(child.text)

        sweep = OrderedDict()
        for item in root.findall("sweep"):
            name = item.get("name")
            if not name:
                raise DownClosedInputError(
                    "'%s', line %s: sweep without a 'name' attribute." %
                    (source, item.sourceline))
            sweep[name] = [parse_value(_i.text) for _i in
                           item.findall("value")]

        try:
            return cls(
                kind=get("kind", required=True),
                operation=get("operation", required=True),
                parameters=parameters,
                instance_file=get("instance_file"),
                trials=int(get("trials", 1)),
                seed=int(get("seed", 0)),
                sweep=sweep,
                output=get("output", "results.csv"),
                threads=get("threads"),
                strict=get("strict", "false").lower() == "true",
                plot=get("plot", "false").lower() == "true",
                comments=[_i.text for _i in root.findall("comment")
                          if _i.text])
        except ValueError as e:
            raise DownClosedInputError("'%s': %s" % (source, e))

    def to_element(self):
        children = [E.kind(self.kind), E.operation(self.operation)]
        children.extend(E.comment(_i) for _i in self.comments)
        if self.instance_file:
            children.append(E.instance_file(self.instance_file))
        if self.parameters:
            children.append(E.parameters(*[
                E(_k, format_value(_v)) for _k, _v in
                self.parameters.items()]))
        for name, values in self.sweep.items():
            children.append(E.sweep(*[E.value(format_value(_i))
                                      for _i in values], name=name))
        children.extend([
            E.trials(str(self.trials)), E.seed(str(self.seed)),
            E.output(self.output)])
        if self.threads is not None:
            children.append(E.threads(str(self.threads)))
        children.extend([
            E.strict(format_value(self.strict)),
            E.plot(format_value(self.plot))])
        return E.experiment(*children)

    def to_xml_string(self):
        return etree.tostring(self.to_element(), pretty_print=True,
                              xml_declaration=True, encoding="UTF-8")

    def write(self, filename):
        with open(filename, "wb") as fh:
            fh.write(self.to_xml_string())

    def sweep_points(self):
        """
        Parameter dictionaries for every point of the sweep (the cartesian
        product of all sweep lists on top of the fixed parameters).
        """
        points = [OrderedDict(self.parameters)]
        for name, values in self.sweep.items():
            points = [OrderedDict(list(_p.items()) + [(name, _v)])
                      for _p in points for _v in values]
        return points

    def __str__(self):
        ret_str = (
            "Experiment '{self.kind} {self.operation}'\n"
            "\tTrials: {self.trials} | Seed: {self.seed} | "
            "Threads: {threads}\n"
            "\tOutput: {self.output}{strict}{plot}\n").format(
            self=self, strict=" (strict)" if self.strict else "",
            threads="all cores" if self.threads is None else self.threads,
            plot=" (with plot)" if self.plot else "")
        if self.parameters:
            ret_str += "\tParameters: %s\n" % ", ".join(
                "%s=%s" % (_k, format_value(_v))
                for _k, _v in self.parameters.items())
        for name, values in self.sweep.items():
            ret_str += "\tSweep %s: %s\n" % (name, format_value(values))
        return ret_str


def provenance_xml(config, library_version, wall_time, csv_sha256,
                   schema):
    """
    Sidecar document: the configuration plus what is needed to check a
    re-run.

    :param schema: Name and version of the CSV column layout.
    """
    root = E.provenance(
        E.library_version(library_version),
        E.csv_schema(schema),
        E.wall_time("%.3f" % wall_time),
        E.csv_sha256(csv_sha256),
        config.to_element())
    return etree.tostring(root, pretty_print=True, xml_declaration=True,
                          encoding="UTF-8")
