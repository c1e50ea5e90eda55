#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Probing component: code verification, adaptive greedy statistics and
adaptivity gap estimates on the block tree construction.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections

from downclosed import DownClosedInvariantError
from downclosed import probing

from .component import Component


class ProbingComponent(Component):
    """
    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    """
    def __init__(self, communicator, component_name):
        super(ProbingComponent, self).__init__(communicator, component_name)

    def get_params(self, **kwargs):
        return probing.ProbingParams.from_dict(
            dict((_k, _v) for _k, _v in kwargs.items() if _v is not None))

    def generate(self, params, seed=None, materialize=None):
        return self.comm.instances.generate_construction(
            "probing", params, seed=seed, materialize=materialize)

    def verify(self, instance, pairs, raise_on_violation=False):
        """
        Checks the overlap bounds between root-leaf paths and caterpillars.

        :returns: List of
            :class:`~downclosed.probing.ProbingIntersectionReport`.
        """
        logger = self.comm.session.logger
        reports = probing.verify_probing_code(
            instance, pairs, self.comm.session.derive_seed("probing-verify"))
        for report in reports:
            logger.info(
                "Layer %i: %i pairs, max cross-block overlap %s (bound %i), "
                "max same-block overlap %s (bound %i)." % (
                    report.layer, report.pairs, report.max_cross,
                    report.bound_cross, report.max_same, report.bound_same))
        violations = sum(_i.violations for _i in reports)
        if violations:
            msg = "%i sampled pairs exceed their overlap bound." % violations
            if raise_on_violation:
                raise DownClosedInvariantError(msg)
            logger.warning(msg)
        return reports

    def greedy_statistics(self, instance, trials):
        """
        Per level success frequency of adaptive greedy against the binomial
        model.
        """
        rows = probing.adaptive_step_statistics(
            instance, trials, self.comm.session.derive_seed("greedy-check"))
        outliers = [_i["level"] for _i in rows if not _i["within_3_sigma"]]
        if outliers:
            self.comm.session.logger.warning(
                "Levels %s are more than three sigma off the binomial "
                "model." % ", ".join(str(_i) for _i in outliers))
        return rows

    def simulate(self, params, trials, caterpillars, seed=None):
        """
        Adaptive greedy against the best of ``caterpillars`` sampled
        non-adaptive strategies.

        :param seed: Seed of instance and realizations. Derived from the
            session if not given.
        :returns: Tuple ``(GapStats, rows)``.
        """
        session = self.comm.session
        if seed is None:
            seed = session.derive_seed("probing-simulate")
        session.logger.info("Simulating %i trials of %s with %i "
                            "caterpillars." % (trials, params, caterpillars))
        stats, rows = probing.estimate_adaptivity_gap(
            params, trials, caterpillars, seed,
            trial_map=session.get_trial_map())
        if stats.lower_bound:
            session.logger.warning(
                "Not every caterpillar was evaluated exactly. The reported "
                "ratio may overestimate the adaptivity gap.")
        session.logger.info(
            "Adaptive mean %.4f, best caterpillar '%s' mean %.4f, ratio "
            "%.3f [%.3f, %.3f]." % (
                stats.benchmark.mean, stats.best,
                stats.contenders[stats.best].mean, stats.ratio,
                stats.ratio_low, stats.ratio_high))
        return stats, rows

    def exact_gap(self, instance):
        """
        Exact optimal adaptive and non-adaptive values of a tiny instance.
        """
        from downclosed import oracles

        problem = probing.to_tiny_problem(instance)
        adaptive = oracles.optimal_adaptive_probing(problem)
        nonadaptive, probed = oracles.optimal_nonadaptive_probing(problem)
        if nonadaptive > adaptive:
            raise DownClosedInvariantError(
                "The non-adaptive optimum exceeds the adaptive one.")
        return collections.OrderedDict([
            ("adaptive", adaptive), ("nonadaptive", nonadaptive),
            ("gap", oracles.adaptivity_gap(problem)),
            ("probed", tuple(problem.elements[_i] for _i in sorted(probed)))])
