#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
The single-log secretary algorithm for XOS objectives under explicit
downward-closed constraints.

The stream of ``n`` (a multiple of three) arrivals is split into thirds: the
current sample ``I1``, the lower sample ``I2`` and the real elements ``I3``.
Scales are processed from 1 downwards. In every phase the best sample
solution that respects the selection so far protects the value sitting at
lower scales and real elements carrying the phase's label are accepted if
they belong to the best scale-``C`` completion of the remaining current
sample.

Both constrained optima are found by looping over (clause, maximal set)
pairs. Within a fixed pair the best set is simply every admissible element
of the maximal set since values are non-negative and the family is
downward-closed.

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import math
import warnings

from downclosed import (DownClosedInputError, DownClosedInvariantError,
                        DownClosedWarning, DegenerateInstanceError)
from downclosed.constraints import ExplicitOracle
from downclosed.tools.keyed_random import (keyed_randbelow, seeded_generator,
                                           seeded_random)
from downclosed import xos
from downclosed.xos import ZERO, scale_ladder

INVARIANT_DIVISOR = 1000
DENSITY_FACTOR = 100


class ConstrainedOptResult(collections.namedtuple(
        "ConstrainedOptResult", ["selection", "clause", "witness", "value"])):
    """
    Result of one of the constrained optimum queries.

    ``clause`` is ``None`` for the sentinel returned when no clause and
    maximal set satisfy the side constraints. ``witness`` is the lower
    scale witness set ``T`` and always empty for the all-scales optimum.
    """
    @property
    def is_sentinel(self):
        return self.clause is None


class PhaseDiagnostics(collections.namedtuple(
        "PhaseDiagnostics",
        ["scale", "opt_value", "opt_c_count", "alg_before", "alg_c_count",
         "tau_alg", "tau_below", "invariant_lhs", "density_threshold",
         "density_applies", "drop_violation"])):
    """
    Bookkeeping for one scale phase.

    * ``opt_value`` - value of the all-scales sample optimum at phase start.
    * ``opt_c_count`` - number of its lower sample elements at exactly the
      phase scale.
    * ``alg_before``/``alg_c_count`` - selection size at phase start and
      number of selections made during the phase.
    * ``invariant_lhs`` - ``tau_alg + opt_value / (1000 log2 n)`` at phase
      start.
    * ``density_threshold`` - ``100 log2 n (alg_before + 1)``, the count above
      which the phase is expected to select a logarithmic share.
    * ``drop_violation`` - the invariant dropped by more than
      ``scale * opt_c_count`` going into the next phase.
    """
    pass


class SecretaryRunRecord(collections.namedtuple(
        "SecretaryRunRecord",
        ["selection", "value", "tau_alg", "phases", "branch", "seed",
         "selection_log", "degenerate"])):
    """
    Outcome of one secretary run. ``selection_log`` lists
    ``(element, scale)`` pairs in selection order.
    """
    pass


class StreamPartition(object):
    """
    Splits an arrival order into current sample, lower sample and real part.

    >>> p = StreamPartition([5, 4, 3, 2, 1, 0])
    >>> p.current, p.lower, p.real
    ((5, 4), (3, 2), (1, 0))
    >>> p.bar(1), p.current_suffix(0), p.real_suffix(0)
    (1, (4,), (0,))
    """
    def __init__(self, order):
        order = tuple(int(_i) for _i in order)
        n = len(order)
        if n < 3 or n % 3:
            raise DownClosedInputError(
                "The stream length must be a positive multiple of three, "
                "got %i." % n)
        if sorted(order) != list(range(n)):
            raise DownClosedInputError("The arrival order must be a "
                                       "permutation of [0, n).")
        self.order = order
        self.n = n
        self.third = n // 3
        self.current = order[:self.third]
        self.lower = order[self.third:2 * self.third]
        self.real = order[2 * self.third:]

    def bar(self, t):
        """
        The real element paired with the ``t``-th current sample element.
        """
        return self.order[t + 2 * self.third]

    def current_suffix(self, t):
        return self.current[t + 1:]

    def real_suffix(self, t):
        return self.real[t + 1:]


def tie_break_key(value, clause, selection, witness=()):
    """
    Sort key implementing the infinitesimal perturbation: larger value
    first, then smaller clause index, then larger sets and finally the
    lexicographically smaller sorted id list. The witness set is compared
    the same way after the selection.

    >>> a = tie_break_key(1, 0, {0, 1})
    >>> b = tie_break_key(1, 0, {0, 2})
    >>> a > b
    True
    """
    return (value, -clause if clause is not None else 1,
            len(selection), tuple(-_i for _i in sorted(selection)),
            len(witness), tuple(-_i for _i in sorted(witness)))


def _value_getter(f, visible):
    if visible is None:
        return lambda clause, t: f.clauses[clause][t]
    visible = frozenset(visible)
    return lambda clause, t: f.clauses[clause][t] if t in visible else ZERO


def _require_explicit(oracle):
    if not isinstance(oracle, ExplicitOracle):
        raise DownClosedInputError(
            "Constrained optima require an explicit maximal set family, got "
            "a %s constraint." % oracle.kind)


def _check_query(f, oracle, A, *index_sets):
    """
    Validates a query and returns the maximal sets hosting ``A``.
    """
    _require_explicit(oracle)
    if f.n != oracle.n:
        raise DownClosedInputError(
            "Function and constraint disagree on the ground set size "
            "(%i vs %i)." % (f.n, oracle.n))
    f.check_elements(A)
    for index_set in index_sets:
        f.check_elements(index_set)
    hosts = oracle.sets_containing(A)
    if not hosts:
        raise DownClosedInputError("The selected set is infeasible.")
    return hosts


def solve_opt_leq_c(I, A, tau_A, C, f, oracle, visible=None):
    """
    Best set ``S`` containing ``A`` and clause ``j`` such that
    ``sum_A v_j >= tau_A`` and every element of ``S`` that lies in ``I`` has
    ``v_j <= C``.

    :param I: Capped index set.
    :param A: Current selection. Must be feasible.
    :param tau_A: Threshold the selection has to keep under the clause.
    :param C: Scale cap.
    :param f: :class:`~downclosed.xos.XosFunction`.
    :param oracle: :class:`~downclosed.constraints.ExplicitOracle`.
    :param visible: Optional set of elements whose values may be read. All
        other values count as zero.
    :returns: :class:`ConstrainedOptResult`. The sentinel ``(A, None, {}, 0)``
        is returned if no clause satisfies the threshold.

    >>> f = xos.XosFunction([[Fraction(1, 2), Fraction(1, 4), 1, 1]])
    >>> oracle = ExplicitOracle(4, [[0, 1], [2, 3]])
    >>> result = solve_opt_leq_c(range(4), set(), 0, Fraction(1, 2),
    ...                          f, oracle)
    >>> sorted(result.selection), result.value
    ([0, 1], Fraction(3, 4))
    """
    A = frozenset(A)
    I = frozenset(I)
    tau_A = xos.as_fraction(tau_A)
    C = xos.as_fraction(C)
    hosts = _check_query(f, oracle, A, I)
    value_of = _value_getter(f, visible)

    best, best_key = None, None
    for j in range(len(f.clauses)):
        if sum((value_of(j, _t) for _t in A), ZERO) < tau_A:
            continue
        if any(value_of(j, _t) > C for _t in A & I):
            continue
        for host in hosts:
            selection = frozenset(
                _t for _t in host
                if _t in A or _t not in I or value_of(j, _t) <= C)
            value = sum((value_of(j, _t) for _t in selection), ZERO)
            key = tie_break_key(value, j, selection)
            if best_key is None or key > best_key:
                best, best_key = (selection, j, value), key
    if best is None:
        return ConstrainedOptResult(A, None, frozenset(), ZERO)
    return ConstrainedOptResult(best[0], best[1], frozenset(), best[2])


def solve_opt_c(I_cur, A, tau_A, C, I_lower, tau_lower, f, oracle,
                visible=None):
    """
    Largest set ``S`` of current elements worth exactly ``C`` under a clause
    ``j`` for which a lower scale witness ``T`` exists: every witness
    element is worth at most ``C/2``, the witness is worth at least
    ``tau_lower`` and ``A``, ``S`` and ``T`` fit into one feasible set.

    The witness returned is every eligible lower element of the hosting
    maximal set. An empty selection is a valid result.
    """
    A = frozenset(A)
    I_cur = frozenset(I_cur)
    I_lower = frozenset(I_lower)
    if I_cur & I_lower:
        raise DownClosedInputError("Current and lower index sets overlap.")
    tau_A = xos.as_fraction(tau_A)
    tau_lower = xos.as_fraction(tau_lower)
    C = xos.as_fraction(C)
    hosts = _check_query(f, oracle, A, I_cur, I_lower)
    value_of = _value_getter(f, visible)
    half = C / 2

    best, best_key = None, None
    for j in range(len(f.clauses)):
        if sum((value_of(j, _t) for _t in A), ZERO) < tau_A:
            continue
        for host in hosts:
            witness = frozenset(
                _t for _t in host & I_lower if value_of(j, _t) <= half)
            if sum((value_of(j, _t) for _t in witness), ZERO) < tau_lower:
                continue
            selection = frozenset(
                _t for _t in host & I_cur if value_of(j, _t) == C)
            value = C * len(selection)
            key = tie_break_key(value, j, selection, witness)
            if best_key is None or key > best_key:
                best, best_key = (selection, j, witness, value), key
    if best is None:
        return ConstrainedOptResult(frozenset(), None, frozenset(), ZERO)
    return ConstrainedOptResult(*best)


def check_opt_c_contract(result, C, tau_lower, A, f, oracle):
    """
    Post-hoc check of the scale-``C`` optimum's defining constraints.
    """
    if result.is_sentinel:
        return True
    clause = f.clauses[result.clause]
    if any(clause[_t] != C for _t in result.selection):
        raise DownClosedInvariantError(
            "A selected element is not worth exactly the phase scale.")
    if any(clause[_t] * 2 > C for _t in result.witness):
        raise DownClosedInvariantError(
            "A witness element is worth more than half the phase scale.")
    if sum((clause[_t] for _t in result.witness), ZERO) < tau_lower:
        raise DownClosedInvariantError("The witness is worth too little.")
    if not oracle.is_feasible(set(A) | result.selection | result.witness):
        raise DownClosedInvariantError("The combined set is infeasible.")
    return True


def assign_labels(n, ladder, seed):
    """
    One label per real index, drawn uniformly from the ladder.

    >>> ladder = scale_ladder(4)
    >>> assign_labels(12, ladder, 3) == assign_labels(12, ladder, 3)
    True
    >>> len(assign_labels(12, ladder, 3))
    4
    """
    if n < 3:
        raise DownClosedInputError("Labels need n >= 3, got %i." % n)
    rng = seeded_generator(seed, "labels", n)
    draws = rng.integers(0, len(ladder), size=n // 3)
    return tuple(ladder[int(_i)] for _i in draws)


class _SecretaryState(object):
    """
    Mutable phase state shared by both algorithm variants.
    """
    def __init__(self, f, oracle, partition, ladder, labels):
        if len(labels) != partition.third:
            raise DownClosedInputError(
                "Expected %i labels, got %i." % (partition.third,
                                                 len(labels)))
        self.f = f
        self.oracle = oracle
        self.partition = partition
        self.ladder = ladder
        self.labels = labels
        self.alg = frozenset()
        self.tau_alg = ZERO
        self.selection_log = []
        self.phases = []
        self.log_n = math.log2(partition.n)
        self.lower = frozenset(partition.lower)
        self.sample_visible = frozenset(partition.lower)
        self.arrived = set(partition.current) | set(partition.lower)
        self._pending_lhs = None

    def start_phase(self, C):
        opt = solve_opt_leq_c(self.lower, self.alg, self.tau_alg, C, self.f,
                              self.oracle,
                              visible=self.sample_visible | self.alg)
        if opt.is_sentinel:
            opt_c_count, tau_below = 0, ZERO
        else:
            clause = self.f.clauses[opt.clause]
            in_lower = opt.selection & self.lower
            opt_c_count = sum(1 for _t in in_lower if clause[_t] == C)
            tau_below = sum((clause[_t] for _t in in_lower
                             if clause[_t] * 2 <= C), ZERO)
        lhs = self.tau_alg + opt.value / (INVARIANT_DIVISOR * self.log_n)
        self._close_previous(lhs)
        threshold = DENSITY_FACTOR * self.log_n * (len(self.alg) + 1)
        self.phases.append(dict(
            scale=C, opt_value=opt.value, opt_c_count=opt_c_count,
            alg_before=len(self.alg), alg_c_count=0,
            tau_alg=self.tau_alg, tau_below=tau_below, invariant_lhs=lhs,
            density_threshold=threshold,
            density_applies=opt_c_count > threshold,
            drop_violation=False))
        return tau_below

    def _close_previous(self, lhs):
        if not self.phases:
            return
        previous = self.phases[-1]
        allowed = previous["scale"] * previous["opt_c_count"]
        if lhs < previous["invariant_lhs"] - allowed:
            previous["drop_violation"] = True
            warnings.warn(
                "Invariant dropped from %s to %s after the phase at scale "
                "%s." % (float(previous["invariant_lhs"]), float(lhs),
                         previous["scale"]), DownClosedWarning)

    def consider(self, t, real, C, tau_below):
        """
        Accepts ``real`` if it belongs to the scale-``C`` optimum over itself
        and the remaining current sample.
        """
        self.arrived.add(real)
        candidates = frozenset(self.partition.current_suffix(t)) | {real}
        result = solve_opt_c(candidates, self.alg, self.tau_alg, C,
                             self.lower, tau_below, self.f, self.oracle,
                             visible=self.arrived)
        if real not in result.selection:
            return False
        self.alg = self.alg | {real}
        self.tau_alg += C
        self.selection_log.append((real, C))
        self.phases[-1]["alg_c_count"] += 1
        if not self.oracle.is_feasible(self.alg):
            raise DownClosedInvariantError(
                "Selecting element %i made the selection infeasible." % real)
        return True

    def finish(self, branch, seed):
        self._close_previous(self.tau_alg)
        value, _ = self.f.value(self.alg)
        if self.tau_alg > value:
            raise DownClosedInvariantError(
                "The collected scales (%s) exceed the selection's value "
                "(%s)." % (self.tau_alg, value))
        return SecretaryRunRecord(
            selection=self.alg, value=value, tau_alg=self.tau_alg,
            phases=tuple(PhaseDiagnostics(**_i) for _i in self.phases),
            branch=branch, seed=seed,
            selection_log=tuple(self.selection_log), degenerate=False)


def run_secretary(f, oracle, order, ladder=None, seed=0, labels=None):
    """
    The implementable algorithm: every label hit pops the next real
    arrival. Hits beyond the end of the stream are skipped.

    :param f: Preprocessed :class:`~downclosed.xos.XosFunction`.
    :param oracle: :class:`~downclosed.constraints.ExplicitOracle`.
    :param order: Arrival order, a permutation of ``[0, n)``.
    :param ladder: Scale ladder, by default the one for ``n``.
    :param seed: Seed of the label draw.
    :param labels: Optional explicit labels, one per real index.
    """
    partition = StreamPartition(order)
    ladder = ladder if ladder is not None else scale_ladder(partition.n)
    labels = labels if labels is not None else \
        assign_labels(partition.n, ladder, seed)
    state = _SecretaryState(f, oracle, partition, ladder, labels)
    real_cursor = -1
    for C in ladder:
        tau_below = state.start_phase(C)
        for t in range(partition.third):
            if labels[t] != C:
                continue
            real_cursor += 1
            if real_cursor >= partition.third:
                continue
            state.consider(t, partition.real[real_cursor], C, tau_below)
    return state.finish(xos.MAIN, seed)


def run_ideal_secretary(f, oracle, order, ladder=None, seed=0, labels=None):
    """
    The analysis variant: every phase re-scans the real part and looks at
    the real element paired with each labelled index.
    """
    partition = StreamPartition(order)
    ladder = ladder if ladder is not None else scale_ladder(partition.n)
    labels = labels if labels is not None else \
        assign_labels(partition.n, ladder, seed)
    state = _SecretaryState(f, oracle, partition, ladder, labels)
    # All real elements count as arrived; this variant ignores arrival
    # order by construction.
    state.arrived.update(partition.real)
    for C in ladder:
        tau_below = state.start_phase(C)
        for t in range(partition.third):
            if labels[t] == C:
                state.consider(t, partition.bar(t), C, tau_below)
    return state.finish(xos.MAIN, seed)


def single_choice_secretary(values):
    """
    Classic single-choice rule: observe the first ``floor(n/e)`` values, then
    take the first value strictly larger than all of them.

    :returns: Index of the selected arrival or ``None``.

    >>> single_choice_secretary([5])
    0
    >>> single_choice_secretary([1, 3, 2, 4]) is None
    False
    >>> single_choice_secretary([2, 2, 2, 2]) is None
    True
    """
    values = list(values)
    sample = int(math.floor(len(values) / math.e))
    threshold = max(values[:sample]) if sample else None
    for _i in range(sample, len(values)):
        if threshold is None or values[_i] > threshold:
            return _i
    return None


def random_order(n, seed, tag="order"):
    order = list(range(n))
    seeded_random(seed, tag, n).shuffle(order)
    return order


def _insert_dummies(order, first_dummy, count, seed):
    order = list(order)
    for _i in range(count):
        position = keyed_randbelow(len(order) + 1, seed, "dummy-position", _i)
        order.insert(position, first_dummy + _i)
    return order


def _single_choice_record(f, oracle, order, rounded, seed, degenerate):
    singles = rounded.singleton_values()
    index = single_choice_secretary(singles[_i] for _i in order)
    selection = frozenset()
    if index is not None and oracle.is_feasible({order[index]}):
        selection = frozenset([order[index]])
    value, _ = f.value(selection)
    return SecretaryRunRecord(
        selection=selection, value=value, tau_alg=ZERO, phases=(),
        branch=xos.SINGLE_CHOICE, seed=seed, selection_log=(),
        degenerate=degenerate)


def run_secretary_pipeline(f, oracle, seed, order=None, coin=None,
                           ideal=False):
    """
    The complete online algorithm on an arbitrary instance.

    Entries are rounded to powers of two and a fair coin picks either the
    single-choice rule on singleton values or the main algorithm. The main
    branch uses the first half of the stream as a pre-sample to normalize
    the second half, pads it to a multiple of three and runs the
    implementable algorithm on it. The returned value is measured with the
    original function.

    :param order: Arrival order; drawn from the seed if not given.
    :param coin: Forces the branch (truthy means single-choice).
    :param ideal: Run the analysis variant instead.
    """
    n = f.n
    order = list(order) if order is not None else random_order(n, seed)
    if sorted(order) != list(range(n)):
        raise DownClosedInputError("The arrival order must be a permutation "
                                   "of [0, n).")
    if coin is None:
        coin = keyed_randbelow(2, seed, "coin")
    rounded = f.rounded()
    if coin or n < 2:
        return _single_choice_record(f, oracle, order, rounded, seed, False)
    _require_explicit(oracle)

    half = n // 2
    presample, rest = order[:half], order[half:]
    singles = rounded.singleton_values()
    sub_f = rounded.restrict(rest)
    try:
        prepared, report = xos.preprocess(
            sub_f, [singles[_i] for _i in presample], coin=False, n=n)
    except DegenerateInstanceError:
        return _single_choice_record(f, oracle, order, rounded, seed, True)

    sub_oracle = oracle.restrict(rest).with_ground_set(prepared.n)
    sub_order = _insert_dummies(range(len(rest)), len(rest),
                                report.dummy_count, seed)
    runner = run_ideal_secretary if ideal else run_secretary
    record = runner(prepared, sub_oracle, sub_order,
                    scale_ladder(n), seed)
    selection = frozenset(rest[_i] for _i in record.selection
                          if _i < len(rest))
    if not oracle.is_feasible(selection):
        raise DownClosedInvariantError(
            "The mapped selection is infeasible in the original family.")
    value, _ = f.value(selection)
    return record._replace(
        selection=selection, value=value,
        selection_log=tuple((rest[_i], _c) for _i, _c in record.selection_log
                            if _i < len(rest)))


def offline_optimum(f, oracle):
    """
    Hindsight optimum ``max_T f(T)`` over feasible ``T``.
    """
    return solve_opt_leq_c((), (), 0, 1, f, oracle)


def max_element_share(f, oracle):
    """
    Largest share of the offline optimum carried by a single element of the
    optimal set under the optimal clause.
    """
    opt = offline_optimum(f, oracle)
    if opt.is_sentinel or opt.value == 0:
        return ZERO
    clause = f.clauses[opt.clause]
    return max(clause[_t] for _t in opt.selection) / opt.value


def claim_sample_optimum_frequency(f, oracle, trials, seed):
    """
    Frequency of random orders whose first third has an optimum below a
    quarter of the global one.

    :returns: Tuple ``(frequency, violations, trials)``.
    """
    if trials <= 0:
        raise DownClosedInputError("At least one trial is required.")
    total = offline_optimum(f, oracle).value
    violations = 0
    for trial in range(trials):
        order = random_order(f.n, seed, "sample-optimum-%i" % trial)
        first_third = frozenset(order[:f.n // 3])
        sample_opt = solve_opt_leq_c((), (), 0, 1, f, oracle,
                                     visible=first_third)
        if sample_opt.value * 4 < total:
            violations += 1
    return float(violations) / trials, violations, trials
