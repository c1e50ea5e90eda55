#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Instance component: generating, loading and saving instances.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from downclosed import DownClosedInputError
from downclosed.file_handling import instance_file

from .component import Component

GENERATORS = ("random", "partition")


class InstancesComponent(Component):
    """
    Component dealing with instance files and instance generation.

    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    """
    def __init__(self, communicator, component_name):
        super(InstancesComponent, self).__init__(communicator,
                                                 component_name)

    def load(self, filename, materialize=None):
        """
        Loads an instance file.

        Secretary files come back as
        :class:`~downclosed.file_handling.instance_file.SecretaryInstance`.
        Descriptors are regenerated, digest checked, and returned as
        ``(kind, instance)``.
        """
        content = instance_file.read_instance_file(filename)
        if isinstance(content, instance_file.SecretaryInstance):
            self.comm.session.logger.debug(
                "Loaded secretary instance '%s': %s, %s." % (
                    filename, content.f, content.oracle))
            return content
        instance = instance_file.regenerate(content, materialize=materialize)
        self.comm.session.logger.debug(
            "Regenerated %s instance from '%s' (digest %s)." % (
                content.kind, filename, content.digest or "not stored"))
        return content.kind, instance

    def load_secretary(self, filename):
        content = self.load(filename)
        if not isinstance(content, instance_file.SecretaryInstance):
            raise DownClosedInputError(
                "'%s' holds a %s descriptor, not a secretary instance." %
                (filename, content[0]))
        return content

    def load_construction(self, filename, kind, materialize=None):
        content = self.load(filename, materialize=materialize)
        if isinstance(content, instance_file.SecretaryInstance) or \
                content[0] != kind:
            raise DownClosedInputError(
                "'%s' does not hold a %s descriptor." % (filename, kind))
        return content[1]

    def save_secretary(self, f, oracle, filename):
        filename = self.comm.session.get_output_filename(filename)
        instance_file.write_text(
            filename, instance_file.dumps_secretary_instance(f, oracle))
        self.comm.session.logger.info("Wrote secretary instance to '%s'." %
                                      filename)
        return filename

    def save_descriptor(self, kind, instance, filename):
        filename = self.comm.session.get_output_filename(filename)
        instance_file.write_text(
            filename, instance_file.dumps_descriptor(kind, instance))
        self.comm.session.logger.info("Wrote %s descriptor to '%s'." %
                                      (kind, filename))
        return filename

    def generate_secretary(self, generator, n, clauses=3, group_size=None,
                           seed=None):
        """
        Creates an explicit secretary instance.

        :param generator: ``"random"`` draws ``clauses`` random dyadic
            clauses and a random antichain of three maximal sets,
            ``"partition"`` builds the hidden-group family with groups of
            ``group_size`` elements (default ``ceil(log2 n)``).
        :returns: :class:`instance_file.SecretaryInstance`.
        """
        from downclosed.constraints import ExplicitOracle
        from downclosed import xos

        if seed is None:
            seed = self.comm.session.derive_seed("secretary-instance", n)
        if n < 1:
            raise DownClosedInputError("Need at least one element.")
        if generator == "random":
            from downclosed.tools.keyed_random import seeded_random
            f = xos.random_xos_instance(n, clauses, seed)
            rng = seeded_random(seed, "random-family", n)
            sets = [[_i for _i in range(n) if rng.random() < 0.5]
                    for _ in range(3)]
            oracle = ExplicitOracle(n, sets)
        elif generator == "partition":
            if group_size is None:
                group_size = max(1, (n - 1).bit_length())
            f, groups = xos.partition_instance(n, group_size, seed)
            oracle = ExplicitOracle(n, groups)
        else:
            raise DownClosedInputError(
                "Unknown generator '%s'. Available: %s" %
                (generator, ", ".join(GENERATORS)))
        return instance_file.SecretaryInstance(f=f, oracle=oracle)

    def generate_construction(self, kind, params, seed=None,
                              materialize=None):
        """
        Generates a prophet or probing hardness instance.
        """
        if seed is None:
            seed = self.comm.session.derive_seed(kind + "-instance")
        if kind == instance_file.PROPHET:
            from downclosed.prophet import gen_prophet_instance
            instance = gen_prophet_instance(params, seed,
                                            materialize=materialize)
        elif kind == instance_file.PROBING:
            from downclosed.probing import gen_probing_instance
            instance = gen_probing_instance(params, seed,
                                            materialize=materialize)
        else:
            raise DownClosedInputError("Unknown construction '%s'." % kind)
        self.comm.session.logger.info("Generated %s (seed %i)." %
                                      (params, seed))
        return instance
