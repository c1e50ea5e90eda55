#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Oracle component: exhaustive reference answers for tiny instances.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections

from downclosed import DownClosedInvariantError
from downclosed import oracles

from .component import Component


class OraclesComponent(Component):
    """
    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    :param cap: The :class:`~downclosed.oracles.TinyInstanceCap` to enforce.
    """
    def __init__(self, communicator, component_name,
                 cap=oracles.DEFAULT_CAP):
        self.cap = cap
        super(OraclesComponent, self).__init__(communicator, component_name)

    def offline(self, f, oracle):
        """
        Exhaustive offline optimum of an explicit secretary instance.
        """
        selection, value = oracles.brute_force_offline_opt(f, oracle,
                                                           self.cap)
        return collections.OrderedDict([
            ("selection", tuple(sorted(selection))), ("value", value)])

    def online_prophet(self, instance):
        from downclosed.prophet import to_tiny_problem
        problem = to_tiny_problem(instance)
        return collections.OrderedDict([
            ("hindsight", oracles.expected_hindsight(problem, self.cap)),
            ("optimal-online",
             oracles.optimal_online_prophet(problem, self.cap))])

    def adaptive_probing(self, instance):
        from downclosed.probing import to_tiny_problem
        problem = to_tiny_problem(instance)
        nonadaptive, probed = oracles.optimal_nonadaptive_probing(problem,
                                                                  self.cap)
        return collections.OrderedDict([
            ("adaptive", oracles.optimal_adaptive_probing(problem, self.cap)),
            ("nonadaptive", nonadaptive),
            ("gap", oracles.adaptivity_gap(problem, self.cap))])

    def crosscheck(self, queries, raise_on_mismatch=True):
        """
        Compares the polynomial constrained optimum solvers with the
        exhaustive oracle on random queries.

        :returns: Number of disagreements.
        """
        logger = self.comm.session.logger
        mismatches = oracles.crosscheck_solvers(
            queries, self.comm.session.derive_seed("crosscheck"), self.cap)
        for index, query, fast, slow in mismatches[:5]:
            logger.error("Query %i (%s optimum): solver %s, oracle %s." % (
                index, query.kind, fast, slow))
        if mismatches and raise_on_mismatch:
            raise DownClosedInvariantError(
                "The solvers disagree with the exhaustive oracle on %i of "
                "%i queries." % (len(mismatches), queries))
        logger.info("%i of %i queries agree with the exhaustive oracle." %
                    (queries - len(mismatches), queries))
        return len(mismatches)
