#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
XOS valuations over a ground set ``[n]`` and the standard preprocessing
pipeline used by the secretary algorithm.

Values are exact :class:`fractions.Fraction` instances. After preprocessing
every non-zero clause entry is a power of two on the scale ladder, so the
equality tests the algorithm branches on are exact.

>>> f = XosFunction([[1, 0], [0, 1]])
>>> f.value({0, 1})
(Fraction(1, 1), 0)
>>> f.value(set())
(Fraction(0, 1), 0)

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import itertools

from downclosed import (DownClosedInputError, DegenerateInstanceError,
                        DownClosedInvariantError)
from downclosed.tools.keyed_random import seeded_random

ZERO = Fraction(0)
ONE = Fraction(1)

SINGLE_CHOICE = "single-choice"
MAIN = "main"


def as_fraction(value):
    """
    Converts ints, strings, ``(numerator, denominator)`` pairs and floats to
    a Fraction. Floats are converted exactly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise DownClosedInputError(
                "Rationals must be (numerator, denominator) pairs, got %r." %
                (value,))
        return Fraction(int(value[0]), int(value[1]))
    return Fraction(value)


def round_down_to_power_of_two(value):
    """
    Largest power of two not exceeding a positive value; zero stays zero.

    >>> round_down_to_power_of_two(Fraction(7, 10))
    Fraction(1, 2)
    >>> round_down_to_power_of_two(Fraction(1, 2))
    Fraction(1, 2)
    >>> round_down_to_power_of_two(3)
    Fraction(2, 1)
    """
    value = as_fraction(value)
    if value < 0:
        raise DownClosedInputError("Values must be non-negative.")
    if value == 0:
        return ZERO
    exponent = value.numerator.bit_length() - value.denominator.bit_length()
    candidate = Fraction(2) ** exponent
    if candidate > value:
        candidate /= 2
    elif candidate * 2 <= value:
        candidate *= 2
    return candidate


def is_power_of_two(value):
    value = as_fraction(value)
    return value > 0 and round_down_to_power_of_two(value) == value


class XosFunction(object):
    """
    An XOS function ``f(S) = max_j sum_{i in S} v[j][i]`` given by an
    explicit, ordered family of non-negative clauses.

    :param clauses: Iterable of clause vectors. Entries may be anything
        :func:`as_fraction` understands.
    :param n: Ground set size. Inferred from the clauses if not given; must
        be given for an empty clause family.
    """
    def __init__(self, clauses, n=None):
        clauses = [tuple(as_fraction(_j) for _j in clause)
                   for clause in clauses]
        if n is None:
            if not clauses:
                raise DownClosedInputError(
                    "The ground set size must be given for an empty clause "
                    "family.")
            n = len(clauses[0])
        for _i, clause in enumerate(clauses):
            if len(clause) != n:
                raise DownClosedInputError(
                    "Clause %i has %i entries but the ground set has %i "
                    "elements." % (_i, len(clause), n))
            if any(_j < 0 for _j in clause):
                raise DownClosedInputError(
                    "Clause %i has a negative entry." % _i)
        self.n = int(n)
        self.clauses = tuple(clauses)

    def __len__(self):
        return len(self.clauses)

    def __eq__(self, other):
        return isinstance(other, XosFunction) and \
            self.n == other.n and self.clauses == other.clauses

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.n, self.clauses))

    def __str__(self):
        return "XOS function on %i elements with %i clause%s" % (
            self.n, len(self.clauses), "" if len(self.clauses) == 1 else "s")

    def check_elements(self, elements):
        """
        Raises an input error if any element id is outside of ``[n]``.
        """
        for _i in elements:
            if not 0 <= _i < self.n:
                raise DownClosedInputError(
                    "Element %s is outside of the ground set [0, %i)." %
                    (_i, self.n))

    def clause_sum(self, clause_index, elements):
        clause = self.clauses[clause_index]
        return sum((clause[_i] for _i in elements), ZERO)

    def value(self, elements):
        """
        Value of a set together with the index of a maximizing clause. Ties
        go to the smallest clause index; the empty family gives ``(0, 0)``.
        """
        elements = list(elements)
        self.check_elements(elements)
        best_value, best_index = ZERO, 0
        for _i in range(len(self.clauses)):
            value = self.clause_sum(_i, elements)
            if value > best_value:
                best_value, best_index = value, _i
        return best_value, best_index

    def singleton_values(self):
        """
        ``f({i})`` for every element, the value an online observer sees for a
        lone element.
        """
        if not self.clauses:
            return [ZERO] * self.n
        return [max(clause[_i] for clause in self.clauses)
                for _i in range(self.n)]

    def map_entries(self, func):
        return XosFunction([[func(_j) for _j in clause]
                            for clause in self.clauses], n=self.n)

    def rounded(self):
        """
        Every clause entry rounded down to a power of two.
        """
        return self.map_entries(round_down_to_power_of_two)

    def restrict(self, elements):
        """
        The function restricted to ``elements``, re-indexed densely in the
        given order.
        """
        elements = list(elements)
        self.check_elements(elements)
        return XosFunction([[clause[_i] for _i in elements]
                            for clause in self.clauses], n=len(elements))

    def pad_to_multiple_of_three(self):
        """
        Appends zero-valued dummy elements until ``n`` is divisible by three.

        :returns: Tuple of the padded function and the number of dummies.
        """
        dummy_count = (-self.n) % 3
        if not dummy_count:
            return self, 0
        clauses = [list(clause) + [ZERO] * dummy_count
                   for clause in self.clauses]
        return XosFunction(clauses, n=self.n + dummy_count), dummy_count

    def masked(self, visible):
        """
        Copy with all entries of elements outside ``visible`` set to zero.
        """
        visible = set(visible)
        return XosFunction([[_v if _i in visible else ZERO
                             for _i, _v in enumerate(clause)]
                            for clause in self.clauses], n=self.n)

    def is_monotone_on(self, small, large):
        return self.value(small)[0] <= self.value(large)[0]

    def is_subadditive_on(self, first, second):
        union = set(first) | set(second)
        return self.value(union)[0] <= \
            self.value(first)[0] + self.value(second)[0]


class ScaleLadder(object):
    """
    Descending powers of two ``1, 1/2, ..., 2**-ceil(2 log2 n)``.

    >>> [str(_i) for _i in scale_ladder(4)]
    ['1', '1/2', '1/4', '1/8', '1/16']
    """
    def __init__(self, n, exponent):
        self.n = n
        self.exponent = exponent
        self.scales = tuple(Fraction(1, 2 ** _i)
                            for _i in range(exponent + 1))

    def __len__(self):
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)

    def __getitem__(self, item):
        return self.scales[item]

    def __contains__(self, item):
        return item in self.scales

    def __eq__(self, other):
        return isinstance(other, ScaleLadder) and \
            self.scales == other.scales

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "ScaleLadder(n=%i, smallest=1/%i)" % (
            self.n, 2 ** self.exponent)

    def index(self, scale):
        return self.scales.index(scale)

    @property
    def smallest(self):
        return self.scales[-1]


def scale_ladder(n):
    """
    The scale ladder for a ground set of size ``n``.

    ``ceil(2 log2 n)`` is the smallest ``k`` with ``2**k >= n**2``, which is
    what ``(n*n - 1).bit_length()`` computes without floating point.

    >>> len(scale_ladder(1000)), scale_ladder(1000).smallest
    (21, Fraction(1, 1048576))
    """
    n = int(n)
    if n < 2:
        raise DownClosedInputError("The scale ladder needs n >= 2, got %i." %
                                   n)
    return ScaleLadder(n, (n * n - 1).bit_length())


class PreprocessReport(collections.namedtuple(
        "PreprocessReport", ["branch", "a_star", "dropped_mass",
                             "dropped_mass_per_clause", "dummy_count"])):
    """
    Outcome of :func:`preprocess`.

    ``a_star`` is the top pre-sample value used for normalization,
    ``dropped_mass`` the total rounded value zeroed by the ``a_*/n**2``
    floor over all clauses and ``dummy_count`` the zero elements appended so
    that the ground set size is a multiple of three.
    """
    pass


def normalize_entry(value, a_star, n):
    """
    Maps one clause entry through the normalization and rounds it down to a
    power of two.

    >>> a_star = Fraction(4, 5)
    >>> [str(normalize_entry(_i, a_star, 10)) for _i in
    ...  (2, Fraction(2, 5), Fraction(1, 10 ** 6))]
    ['1', '1/2', '0']
    """
    value = as_fraction(value)
    if value < a_star / (n * n):
        return ZERO
    if value > a_star:
        return ONE
    return round_down_to_power_of_two(value / a_star)


def preprocess(f, presample_values, coin, n=None):
    """
    The standard preprocessing.

    Clause entries are first rounded down to powers of two. With ``coin``
    set the run goes to the single-choice branch and the rounded function is
    returned as is. Otherwise the pre-sample's top value ``a_*`` normalizes
    every entry (zero below ``a_*/n**2``, ``a/a_*`` in between, one above
    ``a_*``), the result is rounded down to powers of two again and dummy
    elements pad ``n`` to a multiple of three.

    :param f: The :class:`XosFunction`.
    :param presample_values: Values observed for the pre-sample elements.
    :param coin: Truthy selects the single-choice branch.
    :param n: The ``n`` of the ``a_*/n**2`` floor. Defaults to ``f.n``.
    :returns: Tuple ``(function, PreprocessReport)``.
    """
    n = f.n if n is None else int(n)
    rounded = f.rounded()
    if coin:
        return rounded, PreprocessReport(
            branch=SINGLE_CHOICE, a_star=None, dropped_mass=ZERO,
            dropped_mass_per_clause=(), dummy_count=0)

    presample_values = [as_fraction(_i) for _i in presample_values]
    if not presample_values:
        raise DownClosedInputError("The main branch requires a non-empty "
                                   "pre-sample.")
    a_star = max(presample_values)
    if a_star <= 0:
        raise DegenerateInstanceError(
            "All pre-sample values are zero; fall back to the single-choice "
            "branch.")

    floor = a_star / (n * n)
    per_clause = []
    for clause in rounded.clauses:
        per_clause.append(sum((_v for _v in clause if 0 < _v < floor), ZERO))
    normalized = rounded.map_entries(
        lambda _v: normalize_entry(_v, a_star, n))
    padded, dummy_count = normalized.pad_to_multiple_of_three()
    return padded, PreprocessReport(
        branch=MAIN, a_star=a_star, dropped_mass=sum(per_clause, ZERO),
        dropped_mass_per_clause=tuple(per_clause), dummy_count=dummy_count)


def random_xos_instance(n, clause_count, seed, scales=None,
                        zero_probability=0.25):
    """
    A random XOS function with dyadic entries, used by tests and sweeps.

    :param scales: Values to draw non-zero entries from. Defaults to the
        first four rungs of the scale ladder.
    """
    rng = seeded_random(seed, "random-xos", n, clause_count)
    scales = list(scales) if scales is not None else \
        [Fraction(1, 2 ** _i) for _i in range(4)]
    clauses = []
    for _ in range(clause_count):
        clauses.append([ZERO if rng.random() < zero_probability
                        else rng.choice(scales) for _ in range(n)])
    return XosFunction(clauses, n=n)


def partition_instance(n, group_size, seed, background=None):
    """
    A hard partition-style family: the ground set is cut into disjoint groups
    of ``group_size`` elements, each group is one maximal feasible set, one
    hidden group has all elements worth 1 and every other element is worth
    1 with probability ``background`` (default ``1/group_size``).

    :returns: Tuple ``(XosFunction, list of maximal sets)``.
    """
    if group_size < 1 or n < group_size:
        raise DownClosedInputError("Need 1 <= group_size <= n.")
    rng = seeded_random(seed, "partition-instance", n, group_size)
    background = Fraction(1, group_size) if background is None else \
        as_fraction(background)
    groups = [list(range(_i, min(_i + group_size, n)))
              for _i in range(0, n, group_size)]
    hidden = rng.randrange(len(groups))
    clause = [ZERO] * n
    for _i, group in enumerate(groups):
        for element in group:
            if _i == hidden or rng.random() < background:
                clause[element] = ONE
    return XosFunction([clause], n=n), [frozenset(_i) for _i in groups]


def all_subsets(elements):
    """
    Every subset of ``elements`` as a frozenset, smallest first.
    """
    elements = list(elements)
    for size in range(len(elements) + 1):
        for combination in itertools.combinations(elements, size):
            yield frozenset(combination)


def check_rounding_factor(original, rounded, elements):
    """
    Asserts that rounding lost at most a factor of two on ``elements`` in
    every clause.
    """
    for _i in range(len(original.clauses)):
        before = original.clause_sum(_i, elements)
        after = rounded.clause_sum(_i, elements)
        if after * 2 < before:
            raise DownClosedInvariantError(
                "Rounding lost more than a factor of two on clause %i." % _i)
    return True
