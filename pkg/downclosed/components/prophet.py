#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Prophet component: code verification and Monte Carlo simulation of the
layered hardness construction.

:license: GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections

from downclosed import DownClosedInputError, DownClosedInvariantError
from downclosed import prophet

from .component import Component


class ProphetComponent(Component):
    """
    :param communicator: The communicator instance.
    :param component_name: The name of this component for the communicator.
    """
    def __init__(self, communicator, component_name):
        super(ProphetComponent, self).__init__(communicator, component_name)

    def get_params(self, **kwargs):
        """
        Builds :class:`~downclosed.prophet.ProphetParams`, dropping ``None``
        values so defaults apply.
        """
        return prophet.ProphetParams.from_dict(
            dict((_k, _v) for _k, _v in kwargs.items() if _v is not None))

    def generate(self, params, seed=None, materialize=None):
        return self.comm.instances.generate_construction(
            "prophet", params, seed=seed, materialize=materialize)

    def verify(self, instance, pairs, raise_on_violation=False):
        """
        Samples node pairs of every layer and checks the intersection
        bounds of the codes.

        :returns: List of :class:`~downclosed.prophet.IntersectionReport`.
        """
        logger = self.comm.session.logger
        reports = prophet.verify_prophet_code(
            instance, pairs, self.comm.session.derive_seed("prophet-verify"))
        for report in reports:
            logger.info(
                "Layer %i: %i pairs, max shared %s (bound %i), max shared "
                "across parents %s (bound %i)." % (
                    report.layer, report.pairs, report.max_same, report.bound,
                    report.max_different, report.bound_different))
        violations = sum(_i.violations for _i in reports)
        if violations:
            msg = "%i sampled pairs exceed their intersection bound." % \
                violations
            if raise_on_violation:
                raise DownClosedInvariantError(msg)
            logger.warning(msg)
        return reports

    def simulate(self, params, trials, policies=None, seed=None):
        """
        Hindsight optimum against the online policies on one instance.

        :param policies: Policy names, see
            :func:`~downclosed.prophet.policy_from_name`. Defaults to the
            standard set for ``params.L``.
        :param seed: Seed of instance and realizations. Derived from the
            session if not given.
        :returns: Tuple ``(GapStats, rows)``.
        """
        session = self.comm.session
        if seed is None:
            seed = session.derive_seed("prophet-simulate")
        if policies is not None:
            policies = [prophet.policy_from_name(_i) for _i in policies]
        session.logger.info("Simulating %i trials of %s." % (trials, params))
        stats, rows = prophet.estimate_prophet_gap(
            params, trials, seed,
            policies=policies, trial_map=session.get_trial_map(),
            debug=session.debug)
        session.logger.info(
            "Hindsight mean %.4f, best policy '%s' mean %.4f, ratio %.3f "
            "[%.3f, %.3f]." % (
                stats.benchmark.mean, stats.best,
                stats.contenders[stats.best].mean, stats.ratio,
                stats.ratio_low, stats.ratio_high))
        return stats, rows

    def exact_comparison(self, instance, policies=None):
        """
        Exact expected values of the hindsight optimum, the optimal online
        policy and every given policy on a tiny instance.

        :returns: Ordered dictionary name -> Fraction.
        """
        from downclosed import oracles

        problem = prophet.to_tiny_problem(instance)
        if policies is None:
            policies = prophet.default_policies(instance.L)
        else:
            policies = [prophet.policy_from_name(_i) if isinstance(_i, str)
                        else _i for _i in policies]
        result = collections.OrderedDict()
        result["hindsight"] = oracles.expected_hindsight(problem)
        result["optimal-online"] = oracles.optimal_online_prophet(problem)
        for policy in policies:
            result[str(policy)] = oracles.exact_policy_value(
                problem, self._policy_starter(instance, problem, policy))
        for name, value in result.items():
            if name in ("hindsight", "optimal-online"):
                continue
            if value > result["optimal-online"]:
                raise DownClosedInvariantError(
                    "Policy '%s' is worth %s which beats the optimal online "
                    "value %s." % (name, value, result["optimal-online"]))
        if result["optimal-online"] > result["hindsight"]:
            raise DownClosedInvariantError(
                "The optimal online value exceeds the hindsight optimum.")
        return result

    @staticmethod
    def _policy_starter(instance, problem, policy):
        if not problem.elements:
            raise DownClosedInputError("The instance has no elements.")

        def start():
            state = prophet.PathFeasibilityState(instance)

            def decide(position, value):
                element = problem.elements[position]
                if not policy.decide(element, instance.layer_of(element),
                                     value, state):
                    return False
                state.add(element)
                return True
            return decide
        return start
