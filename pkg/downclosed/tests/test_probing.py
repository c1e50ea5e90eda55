#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Test cases for the block construction used by the probing experiments.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from fractions import Fraction
import itertools
import random

import mock
import numpy as np
import pytest

from downclosed import DownClosedCapacityError, DownClosedInputError
from downclosed import oracles, probing
from downclosed.tests.testing_helpers import small_probing_params
from downclosed.tools import stats_helpers


def _all_addresses(params):
    for depth in range(1, params.total_depth + 1):
        for address in itertools.product(
                *[range(params.level_arity(_i)) for _i in range(depth)]):
            yield address


def test_params_validation():
    with pytest.raises(DownClosedInputError):
        probing.ProbingParams(0, 101)
    with pytest.raises(DownClosedInputError):
        probing.ProbingParams(2, 101, mode="exact")
    with pytest.raises(DownClosedInputError) as e:
        probing.ProbingParams(2, 10 ** 5, mode=probing.ASYMPTOTIC)
    assert "p > 524288" in str(e.value)
    with pytest.raises(DownClosedInputError):
        probing.ProbingParams(2, 10 ** 6, mode=probing.ASYMPTOTIC,
                              depths=[1, 1])
    with pytest.raises(DownClosedInputError):
        small_probing_params(depths=[1, 1, 1])
    with pytest.raises(DownClosedInputError):
        small_probing_params(arities=[0, 2])
    with pytest.raises(DownClosedInputError) as e:
        small_probing_params(family_sizes=[1, 1])
    assert "code vectors" in str(e.value)


def test_levels_of_the_concatenated_tree():
    params = probing.ProbingParams(2, 101, arities=[2, 3], depths=[1, 2])
    assert params.total_depth == 3
    assert [params.level(_i) for _i in range(3)] == [(1, 0), (2, 0), (2, 1)]
    assert [params.level_arity(_i) for _i in range(3)] == [2, 3, 3]
    assert params.level_edge_count(2) == 18
    assert params.total_nodes() == 27
    assert params.layer_start(2) == 1
    assert params.block_count(2) == 2
    assert params.element_value(2) == Fraction(1, 2)
    assert probing.ProbingParams.from_dict(params.to_dict()) == params
    # Desk defaults: arity L**2 and depth 1.
    default = probing.ProbingParams(3, 101)
    assert [default.arity(_i) for _i in default.layers] == [9, 9, 9]
    assert default.total_depth == 3


def test_edges_of_one_block_share_code_coordinates():
    params = probing.ProbingParams(2, 101, arities=[2, 2], depths=[1, 2])
    instance = probing.gen_probing_instance(params, 5)
    a = instance.element_of_edge((0, 0, 0))
    b = instance.element_of_edge((0, 1, 1))
    assert (a.layer, a.height) == (b.layer, b.height) == (2, 1)
    assert a.first == b.first
    assert instance.decode(a.id) == a
    with pytest.raises(DownClosedInputError):
        instance.element_of_edge(())
    with pytest.raises(DownClosedInputError):
        instance.element_of_edge((2,))
    with pytest.raises(DownClosedInputError):
        instance.element_of_edge((0, 0, 0, 0))
    with pytest.raises(DownClosedInputError):
        instance.decode(3 * 101 ** 2)


def test_materialized_elements_match_lazy_lookups():
    params = probing.ProbingParams(2, 101, arities=[2, 3], depths=[1, 2])
    instance = probing.gen_probing_instance(params, 2)
    assert instance.materialized
    assert len(instance.tree) == 27
    for address in _all_addresses(params):
        level = len(address) - 1
        assert instance.level_elements[level][instance.ordinal(address)] == \
            instance.element_of_edge(address).id


def test_node_cap_and_asymptotic_instances():
    params = small_probing_params(node_cap=3)
    instance = probing.gen_probing_instance(params, 0)
    assert not instance.materialized
    with pytest.raises(DownClosedCapacityError):
        probing.gen_probing_instance(params, 0, materialize=True)
    with pytest.raises(DownClosedCapacityError):
        instance.inner_oracle()

    params = probing.ProbingParams(2, 10 ** 6, mode=probing.ASYMPTOTIC)
    with pytest.raises(DownClosedCapacityError):
        probing.gen_probing_instance(params, 0, materialize=True)
    instance = probing.gen_probing_instance(params, 0)
    assert instance.element_of_edge((3,)).layer == 1
    assert instance.element_of_edge((0,) * 20).layer == 2
    transcript = probing.run_adaptive_greedy(instance, 1)
    assert len(transcript.probes) == 20 * 4
    assert len(transcript.inner_path) == 20


def test_edge_codes_are_uniform():
    params = probing.ProbingParams(2, 11, arities=[100, 100], depths=[1, 1])
    instance = probing.gen_probing_instance(params, 6, materialize=False)
    seconds = [instance.element_of_edge((_i, _j)).second
               for _i in range(100) for _j in range(100)]
    counts = np.bincount(seconds, minlength=11)
    assert len(counts) == 11
    assert stats_helpers.chi_square_uniformity(counts) > 0.001


def test_structural_digest_is_stable():
    params = small_probing_params()
    a = probing.gen_probing_instance(params, 4)
    b = probing.gen_probing_instance(params, 4, materialize=False)
    c = probing.gen_probing_instance(params, 5)
    assert probing.structural_digest(a) == probing.structural_digest(b)
    assert probing.structural_digest(a) != probing.structural_digest(c)


def test_outer_feasibility():
    assert probing.is_outer_feasible([(0, 0), (0, 1), (1,)])
    assert not probing.is_outer_feasible([(0, 0, 0), (0, 1, 0)])
    assert probing.is_outer_feasible([])


def test_caterpillars():
    instance = probing.gen_probing_instance(small_probing_params(), 1)
    caterpillar = probing.Caterpillar.from_spine(instance, (1, 0))
    assert caterpillar.edges() == ((0,), (1,), (1, 0), (1, 1))
    assert probing.is_outer_feasible(caterpillar.edges())
    ids = probing.caterpillar_elements(instance, caterpillar)
    assert instance.outer_oracle().is_feasible(ids)
    with pytest.raises(DownClosedInputError):
        probing.Caterpillar.from_spine(instance, (1,))

    spine = probing.random_spine(instance, random.Random(3))
    assert len(spine) == 2 and all(_i in (0, 1) for _i in spine)
    assert len(list(probing.all_spines(instance))) == 4


def test_sample_caterpillars():
    instance = probing.gen_probing_instance(small_probing_params(), 1)
    caterpillars, exhaustive = probing.sample_caterpillars(instance, 16, 0)
    assert exhaustive and len(caterpillars) == 4
    caterpillars, exhaustive = probing.sample_caterpillars(instance, 2, 0)
    assert not exhaustive
    assert caterpillars[0].spine == (0, 0)
    assert len(set(caterpillars)) == 2


def test_adaptive_greedy():
    instance = probing.gen_probing_instance(
        small_probing_params(activation_prob=1), 1)
    transcript = probing.run_adaptive_greedy(instance, 0)
    assert transcript.value == 2
    assert transcript.inner_path == (0, 0)
    assert len(transcript.probes) == 4
    assert probing.is_outer_feasible([_i[0] for _i in transcript.probes])

    instance = probing.gen_probing_instance(
        small_probing_params(activation_prob=0), 1)
    transcript = probing.run_adaptive_greedy(instance, 0)
    assert transcript.value == 0
    assert all(_i[2] == 0 for _i in transcript.probes)


def test_adaptive_step_statistics():
    instance = probing.gen_probing_instance(
        small_probing_params(activation_prob=1), 1)
    rows = probing.adaptive_step_statistics(instance, 10, 0)
    assert [_i["level"] for _i in rows] == [0, 1]
    assert all(_i["frequency"] == 1.0 and _i["model"] == 1.0 for _i in rows)
    assert all(_i["within_3_sigma"] for _i in rows)

    # A large alphabet keeps sibling edges on distinct elements.
    instance = probing.gen_probing_instance(
        small_probing_params(p=10 ** 6 + 3), 1)
    rows = probing.adaptive_step_statistics(instance, 2000, 0)
    assert [_i["level"] for _i in rows] == [0, 1]
    assert all(0.0 < _i["frequency"] < 1.0 for _i in rows)
    assert all(abs(_i["active_fraction"] - 0.5) < 0.05 for _i in rows)
    assert all(_i["within_3_sigma"] for _i in rows)
    with pytest.raises(DownClosedInputError):
        probing.adaptive_step_statistics(instance, 0, 0)


def _exact_greedy_value(instance, problem):
    """
    Expected adaptive greedy value, summed over every activation pattern of
    the elements of ``problem``.
    """
    q = instance.params.activation_prob
    total = Fraction(0)
    for pattern in itertools.product([False, True],
                                     repeat=len(problem.elements)):
        active = np.array([_i for _i, _j in zip(problem.elements, pattern)
                           if _j], dtype=np.int64)
        weight = Fraction(1)
        for _j in pattern:
            weight *= q if _j else 1 - q

        def is_active(self, element_ids):
            return np.isin(np.asarray(element_ids, dtype=np.int64), active)

        with mock.patch.object(probing.ProbingRealization, "is_active",
                               is_active):
            total += weight * probing.run_adaptive_greedy(instance, 0).value
    return total


@pytest.mark.parametrize("params", [
    probing.ProbingParams(1, 10 ** 6 + 3, arities=[4], depths=[1],
                          activation_prob=Fraction(1, 2)),
    small_probing_params(p=10 ** 6 + 3)])
def test_adaptive_greedy_against_the_optimal_adaptive_policy(params):
    instance = probing.gen_probing_instance(params, 2)
    problem = probing.to_tiny_problem(instance)
    greedy = _exact_greedy_value(instance, problem)
    optimal = oracles.optimal_adaptive_probing(problem)
    assert 0 < greedy <= optimal
    assert greedy >= Fraction(9, 10) * optimal


def test_exact_inner_value():
    instance = probing.gen_probing_instance(small_probing_params(), 1)
    everything = [_j for _i in instance.level_elements for _j in _i.tolist()]
    value, path = probing.exact_inner_value(instance, everything)
    assert value == 2 and len(path) == 2
    value, path = probing.exact_inner_value(instance, [])
    assert value == 0
    # A single level one element is worth its layer's value.
    element = instance.element_of_edge((1, 1)).id
    value, path = probing.exact_inner_value(instance, [element])
    assert value == 1
    assert instance.element_of_edge(path).id == element


def test_nonadaptive_evaluation():
    params = small_probing_params()
    instance = probing.gen_probing_instance(params, 1)
    caterpillar = probing.Caterpillar.from_spine(instance, (0, 1))
    result = probing.eval_nonadaptive(instance, caterpillar, 20, 0)
    assert not result.lower_bound
    assert len(result.values) == 20
    assert 0 <= result.estimate.mean <= 2
    again = probing.eval_nonadaptive(instance, list(caterpillar.edges()),
                                     20, 0)
    assert again.values == result.values

    lazy = probing.gen_probing_instance(params, 1, materialize=False)
    bound = probing.eval_nonadaptive(lazy, caterpillar, 20, 0)
    assert bound.lower_bound
    assert all(_i <= _j for _i, _j in zip(bound.values, result.values))

    with pytest.raises(DownClosedInputError):
        probing.eval_nonadaptive(instance, [(0, 0), (1, 0)], 5, 0)
    with pytest.raises(DownClosedInputError):
        probing.eval_nonadaptive(instance, caterpillar, 0, 0)


def test_verification_on_small_codes():
    instance = probing.gen_probing_instance(small_probing_params(), 0)
    reports = probing.verify_probing_code(instance, 40, 0)
    assert [_i.layer for _i in reports] == [1, 2]
    # A single block at the first layer only allows same-block pairs.
    assert reports[0].cross_histogram == {}
    assert all(_i.pairs == 40 for _i in reports)
    assert all(_i.violations == 0 for _i in reports)
    with pytest.raises(DownClosedInputError):
        probing.verify_probing_code(instance, 0, 0)


def test_verification_catches_a_tiny_alphabet():
    params = probing.ProbingParams(2, 2, arities=[2, 2], depths=[1, 6])
    instance = probing.gen_probing_instance(params, 0, materialize=False)
    reports = probing.verify_probing_code(instance, 1000, 0)
    assert reports[1].bound_cross == 4
    assert reports[1].max_cross > 4
    assert reports[1].cross_violations > 0


def test_tiny_problem_conversion():
    instance = probing.gen_probing_instance(small_probing_params(), 0)
    problem = probing.to_tiny_problem(instance)
    assert len(problem.values) == len(problem.elements) <= 6
    assert set(problem.values) <= {Fraction(1)}
    for inner in problem.inner_sets:
        assert any(inner <= _i for _i in problem.outer_sets)


def test_gap_estimate_is_reproducible():
    params = small_probing_params()
    stats, rows = probing.estimate_adaptivity_gap(params, 10, 8, 3)
    _, rows_again = probing.estimate_adaptivity_gap(params, 10, 8, 3)
    assert rows == rows_again
    assert list(rows[0].keys()) == ["adaptive", "caterpillar-0",
                                    "caterpillar-1", "caterpillar-2",
                                    "caterpillar-3"]
    assert not stats.lower_bound
    assert stats.trials == 10
    with pytest.raises(DownClosedInputError):
        probing.estimate_adaptivity_gap(params, 0, 8, 3)
    with pytest.raises(DownClosedInputError):
        probing.estimate_adaptivity_gap(params, 10, 0, 3)
