#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Exhaustive reference solvers for tiny instances.

Every function here enumerates its search space verbatim and refuses inputs
above the configured :class:`TinyInstanceCap` instead of truncating.

>>> problem = TinyProphetProblem(values=(1,), probabilities=(Fraction(1, 3),),
...                              maximal_sets=(frozenset([0]),),
...                              elements=(0,))
>>> optimal_online_prophet(problem)
Fraction(1, 3)

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import itertools

from downclosed import DownClosedCapacityError, DownClosedContractError, \
    DownClosedInputError
from downclosed.prophet import TinyProphetProblem
from downclosed.probing import TinyProbingProblem
from downclosed.secretary import ConstrainedOptResult, tie_break_key
from downclosed.xos import ZERO, all_subsets, as_fraction


class TinyInstanceCap(collections.namedtuple(
        "TinyInstanceCap", ["max_elements", "max_maximal_sets",
                            "max_states", "max_probe_elements"])):
    """
    Size limits of the exhaustive oracles.
    """
    pass


DEFAULT_CAP = TinyInstanceCap(max_elements=15, max_maximal_sets=64,
                              max_states=10 ** 6, max_probe_elements=8)

LEQ = "leq"
EXACT = "exact"


class ConstrainedQuery(collections.namedtuple(
        "ConstrainedQuery",
        ["kind", "f", "oracle", "A", "tau_A", "C", "I", "I_lower",
         "tau_lower", "visible"])):
    """
    A constrained optimum query. ``kind`` is ``"leq"`` for the all-scales
    optimum (``I`` is the capped index set) and ``"exact"`` for the
    scale-``C`` optimum (``I`` is the current index set).
    """
    pass


def leq_query(I, A, tau_A, C, f, oracle, visible=None):
    return ConstrainedQuery(LEQ, f, oracle, frozenset(A), as_fraction(tau_A),
                            as_fraction(C), frozenset(I), frozenset(), ZERO,
                            visible)


def exact_query(I_cur, A, tau_A, C, I_lower, tau_lower, f, oracle,
                visible=None):
    return ConstrainedQuery(EXACT, f, oracle, frozenset(A),
                            as_fraction(tau_A), as_fraction(C),
                            frozenset(I_cur), frozenset(I_lower),
                            as_fraction(tau_lower), visible)


def _check_size(n, cap, what="elements"):
    if n > cap.max_elements:
        raise DownClosedCapacityError(
            "The oracle handles at most %i %s, got %i (max_elements)." %
            (cap.max_elements, what, n))


def _check_family(oracle, cap):
    sets = oracle.maximal_sets()
    if len(sets) > cap.max_maximal_sets:
        raise DownClosedCapacityError(
            "The oracle handles at most %i maximal sets, got %i "
            "(max_maximal_sets)." % (cap.max_maximal_sets, len(sets)))
    return sets


def brute_force_offline_opt(f, oracle, cap=DEFAULT_CAP):
    """
    Best feasible set and its value, by enumerating all subsets and clauses.
    Ties are broken like the polynomial solvers.

    :returns: Tuple ``(set, value)``.
    """
    _check_size(f.n, cap)
    _check_family(oracle, cap)
    best, best_key = (frozenset(), ZERO), None
    for subset in all_subsets(range(f.n)):
        if not oracle.is_feasible(subset):
            continue
        for j in range(len(f.clauses)):
            value = f.clause_sum(j, subset)
            key = tie_break_key(value, j, subset)
            if best_key is None or key > best_key:
                best, best_key = (subset, value), key
    return best


def brute_force_constrained_opt(query, cap=DEFAULT_CAP):
    """
    Answers a :class:`ConstrainedQuery` by enumerating every subset, clause
    and witness that satisfies the definition.
    """
    f, oracle = query.f, query.oracle
    _check_size(f.n, cap)
    _check_family(oracle, cap)
    f.check_elements(query.A | query.I | query.I_lower)
    if not oracle.is_feasible(query.A):
        raise DownClosedInputError("The selected set is infeasible.")
    visible = frozenset(query.visible) if query.visible is not None else None

    def v(j, t):
        if visible is not None and t not in visible:
            return ZERO
        return f.clauses[j][t]

    admissible = [j for j in range(len(f.clauses))
                  if sum((v(j, _t) for _t in query.A), ZERO) >= query.tau_A]
    if query.kind == LEQ:
        return _brute_leq(query, admissible, v)
    elif query.kind == EXACT:
        return _brute_exact(query, admissible, v)
    raise DownClosedInputError("Unknown query kind '%s'." % query.kind)


def _brute_leq(query, admissible, v):
    oracle, A, I, C = query.oracle, query.A, query.I, query.C
    rest = [_t for _t in range(query.f.n) if _t not in A]
    best, best_key = None, None
    for extra in all_subsets(rest):
        selection = A | extra
        if not oracle.is_feasible(selection):
            continue
        for j in admissible:
            if any(v(j, _t) > C for _t in selection & I):
                continue
            value = sum((v(j, _t) for _t in selection), ZERO)
            key = tie_break_key(value, j, selection)
            if best_key is None or key > best_key:
                best, best_key = (selection, j, value), key
    if best is None:
        return ConstrainedOptResult(A, None, frozenset(), ZERO)
    return ConstrainedOptResult(best[0], best[1], frozenset(), best[2])


def _brute_exact(query, admissible, v):
    oracle, A, C = query.oracle, query.A, query.C
    best, best_key = None, None
    for j in admissible:
        current = [_t for _t in query.I if v(j, _t) == C]
        lower = [_t for _t in query.I_lower if v(j, _t) * 2 <= C]
        for selection in all_subsets(current):
            for witness in all_subsets(lower):
                if sum((v(j, _t) for _t in witness), ZERO) < query.tau_lower:
                    continue
                if not oracle.is_feasible(A | selection | witness):
                    continue
                value = C * len(selection)
                key = tie_break_key(value, j, selection, witness)
                if best_key is None or key > best_key:
                    best, best_key = (selection, j, witness, value), key
    if best is None:
        return ConstrainedOptResult(frozenset(), None, frozenset(), ZERO)
    return ConstrainedOptResult(*best)


def _outcomes(probabilities):
    """
    Every activation pattern with its probability.
    """
    for pattern in itertools.product((False, True),
                                     repeat=len(probabilities)):
        weight = Fraction(1)
        for active, q in zip(pattern, probabilities):
            weight *= q if active else 1 - q
        if weight:
            yield pattern, weight


def _best_inner(values, sets, active):
    return max((sum((values[_i] for _i in s if _i in active), ZERO)
                for s in sets), default=ZERO)


def expected_hindsight(problem, cap=DEFAULT_CAP):
    """
    Exact expected hindsight optimum of a :class:`TinyProphetProblem`.
    """
    _check_size(len(problem.values), cap)
    if len(problem.maximal_sets) > cap.max_maximal_sets:
        raise DownClosedCapacityError(
            "The oracle handles at most %i maximal sets (max_maximal_sets)."
            % cap.max_maximal_sets)
    values = [as_fraction(_i) for _i in problem.values]
    probabilities = [as_fraction(_i) for _i in problem.probabilities]
    total = ZERO
    for pattern, weight in _outcomes(probabilities):
        active = set(_i for _i, _j in enumerate(pattern) if _j)
        total += weight * _best_inner(values, problem.maximal_sets, active)
    return total


def optimal_online_prophet(problem, cap=DEFAULT_CAP):
    """
    Expected value of the optimal online policy, by backward induction over
    (arrival position, maximal sets consistent with the selection).
    """
    if not isinstance(problem, TinyProphetProblem):
        raise DownClosedInputError("Expected a TinyProphetProblem.")
    n = len(problem.values)
    _check_size(n, cap)
    if len(problem.maximal_sets) > cap.max_maximal_sets:
        raise DownClosedCapacityError(
            "The oracle handles at most %i maximal sets (max_maximal_sets)."
            % cap.max_maximal_sets)
    values = [as_fraction(_i) for _i in problem.values]
    probabilities = [as_fraction(_i) for _i in problem.probabilities]
    sets = list(problem.maximal_sets)
    containing = [frozenset(_j for _j, _s in enumerate(sets) if _i in _s)
                  for _i in range(n)]
    memo = {}

    def solve(position, consistent):
        if position == n:
            return ZERO
        key = (position, consistent)
        if key in memo:
            return memo[key]
        if len(memo) >= cap.max_states:
            raise DownClosedCapacityError(
                "The online dynamic program exceeded %i states "
                "(max_states)." % cap.max_states)
        skip = solve(position + 1, consistent)
        take = skip
        remaining = consistent & containing[position]
        if remaining and values[position] > 0:
            take = max(skip, values[position] +
                       solve(position + 1, remaining))
        q = probabilities[position]
        result = q * take + (1 - q) * skip
        memo[key] = result
        return result

    return solve(0, frozenset(range(len(sets))))


def exact_policy_value(problem, start_policy, cap=DEFAULT_CAP):
    """
    Exact expected value of an online policy on a
    :class:`TinyProphetProblem`, by running it on every activation pattern.

    :param start_policy: Callable returning a fresh
        ``decide(position, value)`` function for one run. ``decide`` is
        called in arrival order and returns whether to select.
    """
    if not isinstance(problem, TinyProphetProblem):
        raise DownClosedInputError("Expected a TinyProphetProblem.")
    _check_size(len(problem.values), cap)
    values = [as_fraction(_i) for _i in problem.values]
    probabilities = [as_fraction(_i) for _i in problem.probabilities]
    sets = list(problem.maximal_sets)
    total = ZERO
    for pattern, weight in _outcomes(probabilities):
        decide = start_policy()
        selected = set()
        gained = ZERO
        for position, active in enumerate(pattern):
            value = values[position] if active else ZERO
            if not decide(position, value):
                continue
            selected.add(position)
            if not any(selected <= _s for _s in sets):
                raise DownClosedContractError(
                    "The policy selected arrival %i which makes the "
                    "selection infeasible." % position)
            gained += value
        total += weight * gained
    return total


def _check_probing(problem, cap):
    if not isinstance(problem, TinyProbingProblem):
        raise DownClosedInputError("Expected a TinyProbingProblem.")
    if len(problem.values) > cap.max_probe_elements:
        raise DownClosedCapacityError(
            "The probing oracles handle at most %i elements, got %i "
            "(max_probe_elements)." % (cap.max_probe_elements,
                                       len(problem.values)))
    return ([as_fraction(_i) for _i in problem.values],
            [as_fraction(_i) for _i in problem.probabilities])


def optimal_adaptive_probing(problem, cap=DEFAULT_CAP):
    """
    Expected value of the optimal adaptive probing policy: exhaustive
    recursion over probe choices and outcomes, memoized on the probed set
    and the active subset of it.
    """
    values, probabilities = _check_probing(problem, cap)
    outer = list(problem.outer_sets)
    inner = list(problem.inner_sets)
    memo = {}

    def probe_allowed(probed):
        return any(probed <= _i for _i in outer)

    def solve(probed, active):
        key = (probed, active)
        if key in memo:
            return memo[key]
        if len(memo) >= cap.max_states:
            raise DownClosedCapacityError(
                "The probing dynamic program exceeded %i states "
                "(max_states)." % cap.max_states)
        best = _best_inner(values, inner, active)
        for element in range(len(values)):
            if element in probed or not probe_allowed(probed | {element}):
                continue
            extended = probed | {element}
            q = probabilities[element]
            value = q * solve(extended, active | {element}) + \
                (1 - q) * solve(extended, active)
            best = max(best, value)
        memo[key] = best
        return best

    return solve(frozenset(), frozenset())


def optimal_nonadaptive_probing(problem, cap=DEFAULT_CAP):
    """
    Best expected value of probing one outer-feasible set up front. Probing
    more never hurts, so only maximal outer sets are considered.

    :returns: Tuple ``(value, probed set)``.
    """
    values, probabilities = _check_probing(problem, cap)
    best, best_set = None, frozenset()
    for outer in problem.outer_sets:
        members = sorted(outer)
        total = ZERO
        for pattern, weight in _outcomes([probabilities[_i]
                                          for _i in members]):
            active = set(_i for _i, _j in zip(members, pattern) if _j)
            total += weight * _best_inner(values, problem.inner_sets, active)
        if best is None or total > best:
            best, best_set = total, frozenset(outer)
    return (best if best is not None else ZERO), best_set


def adaptivity_gap(problem, cap=DEFAULT_CAP):
    """
    Exact ratio of the optimal adaptive to the optimal non-adaptive value.
    """
    adaptive = optimal_adaptive_probing(problem, cap)
    nonadaptive, _ = optimal_nonadaptive_probing(problem, cap)
    if nonadaptive == 0:
        return Fraction(1) if adaptive == 0 else None
    return adaptive / nonadaptive


def random_query(seed, index, max_elements=12, max_sets=4, max_clauses=3):
    """
    A random constrained optimum query on a small dyadic instance, either
    kind with equal probability. Used to cross-check the solvers.
    """
    from downclosed.constraints import ExplicitOracle
    from downclosed.tools.keyed_random import seeded_random
    from downclosed.xos import XosFunction

    rng = seeded_random(seed, "random-query", index)
    n = rng.randint(3, max_elements)
    scales = [Fraction(1, 2 ** _i) for _i in range(3)]
    f = XosFunction([[rng.choice(scales + [ZERO]) for _ in range(n)]
                     for _ in range(rng.randint(1, max_clauses))], n=n)
    oracle = ExplicitOracle(n, [[_t for _t in range(n) if rng.random() < 0.6]
                                for _ in range(rng.randint(1, max_sets))])
    host = sorted(rng.choice(oracle.sets))
    A = frozenset(_t for _t in host if rng.random() < 0.3)
    tau_A = rng.choice([ZERO, f.clause_sum(rng.randrange(len(f)), A)])
    C = rng.choice(scales)
    visible = None
    if rng.random() < 0.3:
        visible = frozenset(_t for _t in range(n) if rng.random() < 0.7)
    rest = [_t for _t in range(n) if _t not in A]
    rng.shuffle(rest)
    if rng.random() < 0.5:
        return leq_query(frozenset(_t for _t in range(n)
                                   if rng.random() < 0.5),
                         A, tau_A, C, f, oracle, visible)
    cut = rng.randint(0, len(rest))
    I_cur, I_lower = frozenset(rest[:cut]), frozenset(rest[cut:])
    tau_lower = rng.choice([ZERO, C / 2, C])
    return exact_query(I_cur, A, tau_A, C, I_lower, tau_lower, f, oracle,
                       visible)


def solve_query(query):
    """
    Answers a :class:`ConstrainedQuery` with the polynomial solvers.
    """
    from downclosed.secretary import solve_opt_c, solve_opt_leq_c

    if query.kind == LEQ:
        return solve_opt_leq_c(query.I, query.A, query.tau_A, query.C,
                               query.f, query.oracle, visible=query.visible)
    return solve_opt_c(query.I, query.A, query.tau_A, query.C,
                       query.I_lower, query.tau_lower, query.f, query.oracle,
                       visible=query.visible)


def crosscheck_solvers(queries, seed, cap=DEFAULT_CAP):
    """
    Compares the polynomial solvers with exhaustive enumeration on random
    queries.

    :returns: List of ``(index, query, solver result, oracle result)`` for
        every disagreement.
    """
    if queries < 1:
        raise DownClosedInputError("At least one query is required.")
    mismatches = []
    for index in range(queries):
        query = random_query(seed, index)
        fast = solve_query(query)
        slow = brute_force_constrained_opt(query, cap)
        if fast != slow:
            mismatches.append((index, query, fast, slow))
    return mismatches
