#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Longer running checks over many random instances. Deselect them with

    py.test -m "not slow"

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from fractions import Fraction
import functools
import itertools

import pytest

from downclosed import oracles, probing, prophet, secretary, xos
from downclosed.constraints import ExplicitOracle
from downclosed.tests.testing_helpers import (small_probing_params,
                                              small_prophet_params)
from downclosed.tools import parallel_helpers
from downclosed.tools.keyed_random import derive_seed


@pytest.mark.slow
def test_solvers_match_the_exhaustive_oracle_on_many_queries():
    assert oracles.crosscheck_solvers(1000, seed=2024) == []


@pytest.mark.slow
def test_secretary_selections_stay_feasible():
    for instance_seed in range(10):
        n = 12 + instance_seed
        f = xos.random_xos_instance(n, 3, instance_seed)
        oracle = ExplicitOracle(n, [list(range(_i, min(_i + 3, n)))
                                    for _i in range(0, n, 3)])
        for trial in range(200):
            record = secretary.run_secretary_pipeline(
                f, oracle, derive_seed(instance_seed, "safety", trial))
            assert oracle.is_feasible(record.selection)
            assert record.value == f.value(record.selection)[0]


@pytest.mark.slow
@pytest.mark.parametrize("branching", [[2, 2], [3, 4], [2, 3, 2]])
def test_hindsight_optimum_equals_path_enumeration(branching):
    L = len(branching)
    params = small_prophet_params(L=L, p=11, branching=branching,
                                  subset_sizes=[2] * L)
    instance = prophet.gen_prophet_instance(params, 5)
    paths = list(itertools.product(*[range(_i) for _i in branching]))
    for seed in range(100):
        realization = prophet.sample_realization(instance, seed)
        assert prophet.hindsight_opt(instance, realization) == max(
            prophet.path_value(instance, realization, _i) for _i in paths)


def _policy_starter(instance, problem, policy):
    """
    Adapts an online policy to the ``decide(position, value)`` protocol of
    the exact policy evaluation.
    """
    def start():
        state = prophet.PathFeasibilityState(instance)

        def decide(position, value):
            element = problem.elements[position]
            if not policy.decide(element, instance.layer_of(element), value,
                                 state):
                return False
            state.add(element)
            return True
        return decide
    return start


@pytest.mark.slow
@pytest.mark.parametrize("overrides", [
    dict(),
    dict(subset_sizes=[2, 2]),
    dict(L=3, branching=[2, 2, 2], subset_sizes=[1, 1, 1])])
def test_online_policies_are_bounded_by_the_optimal_online_value(overrides):
    params = small_prophet_params(**overrides)
    for seed in range(3):
        instance = prophet.gen_prophet_instance(params, seed)
        problem = prophet.to_tiny_problem(instance)
        hindsight = oracles.expected_hindsight(problem)
        online = oracles.optimal_online_prophet(problem)
        assert online <= hindsight
        for policy in prophet.default_policies(params.L):
            value = oracles.exact_policy_value(
                problem, _policy_starter(instance, problem, policy))
            assert 0 < value <= online


@pytest.mark.slow
def test_probing_code_has_no_violations_with_a_large_alphabet():
    params = probing.ProbingParams(2, 10 ** 7, depths=[3, 3])
    instance = probing.gen_probing_instance(params, 3, materialize=False)
    reports = probing.verify_probing_code(instance, 10 ** 5, 2)
    assert [_i.layer for _i in reports] == [1, 2]
    for report in reports:
        assert report.cross_union_bound < 1e-6
        assert report.same_union_bound < 1e-6
        assert report.pairs == 10 ** 5
        assert report.cross_violations == 0
        assert report.same_violations == 0
    # A single block at the first layer only allows same-block pairs.
    assert reports[0].cross_histogram == {}
    assert sum(reports[1].cross_histogram.values()) == 5 * 10 ** 4


@pytest.mark.slow
def test_adaptive_greedy_matches_the_binomial_model():
    params = probing.ProbingParams(2, 10 ** 6 + 3)
    instance = probing.gen_probing_instance(params, 1)
    rows = probing.adaptive_step_statistics(instance, 10 ** 4, 5)
    assert len(rows) == 2
    assert all(_i["within_3_sigma"] for _i in rows)

    params = probing.ProbingParams(2, 10 ** 6 + 3, activation_prob=1)
    instance = probing.gen_probing_instance(params, 1)
    assert probing.run_adaptive_greedy(instance, 0).value == 2


@pytest.mark.slow
def test_adaptivity_gap_grows_with_the_number_of_layers():
    trial_map = functools.partial(parallel_helpers.trial_map, threads=None)
    gaps = []
    for L in (2, 3):
        params = probing.ProbingParams(L, 10 ** 6 + 3)
        stats, _ = probing.estimate_adaptivity_gap(params, 2000, 16, 7,
                                                   trial_map=trial_map)
        assert stats.trials == 2000
        assert stats.ratio >= 1
        gaps.append(stats)
    assert gaps[0].separated_below(gaps[1])


@pytest.mark.slow
@pytest.mark.parametrize("params", [
    probing.ProbingParams(1, 10 ** 6 + 3, arities=[4], depths=[1],
                          activation_prob=Fraction(1, 2)),
    small_probing_params(p=10 ** 6 + 3),
    small_probing_params(arities=[2, 3], p=10 ** 6 + 3)])
def test_reported_adaptivity_gap_matches_exhaustive_evaluation(params):
    instance = probing.gen_probing_instance(params, 4)
    problem = probing.to_tiny_problem(instance)
    q = params.activation_prob
    caterpillars, exhaustive = probing.sample_caterpillars(instance, 64, 0)
    assert exhaustive
    # Every caterpillar is evaluated over every activation pattern.
    best = Fraction(0)
    for caterpillar in caterpillars:
        probed = sorted(set(probing.caterpillar_elements(instance,
                                                         caterpillar)))
        total = Fraction(0)
        for pattern in itertools.product([False, True], repeat=len(probed)):
            weight = Fraction(1)
            for _j in pattern:
                weight *= q if _j else 1 - q
            active = [_i for _i, _j in zip(probed, pattern) if _j]
            value, _ = probing.exact_inner_value(instance, active)
            total += weight * value
        best = max(best, total)
    nonadaptive, _ = oracles.optimal_nonadaptive_probing(problem)
    adaptive = oracles.optimal_adaptive_probing(problem)
    assert nonadaptive == best
    assert adaptive >= nonadaptive > 0
    assert oracles.adaptivity_gap(problem) == adaptive / best
