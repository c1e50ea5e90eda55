#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Hard prophet instances built from layered trees and double random codes.

The instance is a rooted tree with ``L + 1`` layers. Every node at layer
``l >= 1`` owns one element from each of its layer's buckets. Which element
is fixed by two code families over the alphabet ``[p]``: the first family
has one vector per parent node, the second one vector per child index.
Children of one parent share the first vector and therefore only collide
where their second vectors agree, children of different parents collide
only where both families agree.

Nothing is stored up front. Node element sets are computed on demand from a
keyed pseudorandom function of ``(seed, family, layer, index, bucket)`` so
that arbitrarily large trees can be explored lazily. Small instances can be
materialized to obtain an explicit tree.

>>> params = ProphetParams(2, 10 ** 5, mode=ASYMPTOTIC)
>>> [params.r(_i) for _i in (1, 2)], [params.d(_i) for _i in (1, 2)]
([4, 16], [2, 8])
>>> params.activation_prob, params.branching(1)
(Fraction(1, 2), 256)

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from abc import ABCMeta, abstractmethod

import bisect
import collections
from fractions import Fraction
import hashlib
import json
import math
import re

import numpy as np

from downclosed import (DownClosedInputError, DownClosedCapacityError,
                        DownClosedContractError, DownClosedInvariantError)
from downclosed.constraints import RootedTree, TreePathOracle
from downclosed.tools.keyed_random import (derive_seed, keyed_randbelow,
                                           keyed_randbelow_array,
                                           keyed_uniform_array, MASK64,
                                           seeded_generator, seeded_random)
from downclosed.tools.parallel_helpers import serial_map
from downclosed.tools.stats_helpers import summarize_gap

ASYMPTOTIC = "asymptotic"
DESK = "desk"
MODES = (ASYMPTOTIC, DESK)

DEFAULT_DESK_BRANCHING = 4
DEFAULT_NODE_CAP = 10 ** 5
DEFAULT_CHILD_SCAN = 64


def _as_list(value, length, name):
    if value is None:
        return None
    if isinstance(value, int):
        return [value] * length
    value = [int(_i) for _i in value]
    if len(value) != length:
        raise DownClosedInputError(
            "'%s' needs one entry per layer (%i), got %i." %
            (name, length, len(value)))
    return value


class ProphetParams(object):
    """
    Parameters of the layered construction.

    :param L: Number of layers below the root.
    :param p: Alphabet size of the codes.
    :param mode: ``"asymptotic"`` uses the asymptotic branching
        ``r_L ** d_l`` (only usable lazily), ``"desk"`` the given per-layer
        branching.
    :param branching: Desk mode children per node, per layer or a single
        int. Defaults to 4.
    :param subset_sizes: Desk mode bucket count per layer, i.e. the size of
        every node's element set. Defaults to ``r_l``.
    :param first_family_sizes: Desk mode size of the first code family per
        layer. Defaults to the number of parents at that layer.
    :param activation_prob: Probability that an element is active. Defaults
        to ``2 / L**2`` capped at one.
    :param node_cap: Largest node count that may be materialized.
    :param duplicate_second_family: Makes child 1 reuse child 0's second
        vector. Only useful to check that the distance verification catches
        broken codes.
    :param permute_arrivals: Shuffle the arrival order within each layer
        instead of the default ascending element order.
    """
    def __init__(self, L, p, mode=DESK, branching=None, subset_sizes=None,
                 first_family_sizes=None, activation_prob=None,
                 node_cap=DEFAULT_NODE_CAP, duplicate_second_family=False,
                 permute_arrivals=False):
        self.L = int(L)
        self.p = int(p)
        if self.L < 1:
            raise DownClosedInputError("At least one layer is required.")
        if self.p < 2:
            raise DownClosedInputError("The alphabet needs p >= 2.")
        if mode not in MODES:
            raise DownClosedInputError("Unknown mode '%s'. Available: %s" %
                                       (mode, ", ".join(MODES)))
        self.mode = mode
        self.node_cap = int(node_cap)
        self.duplicate_second_family = bool(duplicate_second_family)
        self.permute_arrivals = bool(permute_arrivals)

        if activation_prob is None:
            activation_prob = min(Fraction(1), Fraction(2, self.L ** 2))
        self.activation_prob = Fraction(activation_prob)
        if not 0 <= self.activation_prob <= 1:
            raise DownClosedInputError("The activation probability must lie "
                                       "in [0, 1].")

        if mode == ASYMPTOTIC:
            if branching is not None or subset_sizes is not None or \
                    first_family_sizes is not None:
                raise DownClosedInputError(
                    "Branching and family sizes are fixed in asymptotic "
                    "mode; use desk mode to override them.")
            if 8 * self.r(self.L) ** 3 >= self.p:
                raise DownClosedInputError(
                    "Asymptotic mode requires r_L**3 < p/8, i.e. p > %i." %
                    (8 * self.r(self.L) ** 3))
            self._branching = [self.r(self.L) ** self.d(_i)
                               for _i in self.layers]
            self._subset_sizes = [self.r(_i) for _i in self.layers]
            self._first_sizes = [self.r(self.L) ** self.d_before(_i)
                                 for _i in self.layers]
        else:
            self._branching = _as_list(
                branching if branching is not None else
                DEFAULT_DESK_BRANCHING, self.L, "branching")
            self._subset_sizes = _as_list(subset_sizes, self.L,
                                          "subset_sizes") or \
                [self.r(_i) for _i in self.layers]
            self._first_sizes = _as_list(first_family_sizes, self.L,
                                         "first_family_sizes") or \
                [self.parent_count(_i) for _i in self.layers]
            if any(_i < 1 for _i in self._branching + self._subset_sizes):
                raise DownClosedInputError("Branching and subset sizes must "
                                           "be positive.")
        for layer in self.layers:
            if self.first_family_size(layer) < self.parent_count(layer):
                raise DownClosedInputError(
                    "Layer %i has %i parents but only %i first-family "
                    "vectors." % (layer, self.parent_count(layer),
                                  self.first_family_size(layer)))

    @property
    def layers(self):
        return range(1, self.L + 1)

    def r(self, layer):
        return self.L ** (2 * layer)

    def d(self, layer):
        return self.L ** (2 * layer - 1)

    def d_before(self, layer):
        return self.L ** (2 * layer - 2)

    def branching(self, layer):
        return self._branching[layer - 1]

    def subset_size(self, layer):
        return self._subset_sizes[layer - 1]

    def first_family_size(self, layer):
        return self._first_sizes[layer - 1]

    def parent_count(self, layer):
        """
        Number of nodes at layer ``layer - 1``.
        """
        return math.prod(self._branching[:layer - 1])

    def node_count(self, layer):
        return math.prod(self._branching[:layer])

    def total_nodes(self):
        return 1 + sum(self.node_count(_i) for _i in self.layers)

    def offset(self, layer):
        return sum(self.universe_size(_i) for _i in range(1, layer))

    def universe_size(self, layer):
        return self.p ** 2 * self.subset_size(layer)

    def element_value(self, layer):
        return Fraction(1, self.subset_size(layer))

    def to_dict(self):
        """
        Serializable description. Asymptotic parameters are implied by
        ``L`` and ``p``.
        """
        result = collections.OrderedDict([
            ("L", self.L), ("p", self.p), ("mode", self.mode),
            ("activation_prob", [self.activation_prob.numerator,
                                 self.activation_prob.denominator])])
        if self.mode == DESK:
            result["branching"] = list(self._branching)
            result["subset_sizes"] = list(self._subset_sizes)
            result["first_family_sizes"] = list(self._first_sizes)
        result["node_cap"] = self.node_cap
        result["duplicate_second_family"] = self.duplicate_second_family
        result["permute_arrivals"] = self.permute_arrivals
        return result

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "activation_prob" in data and \
                isinstance(data["activation_prob"], list):
            data["activation_prob"] = Fraction(*data["activation_prob"])
        try:
            return cls(**data)
        except TypeError as e:
            raise DownClosedInputError("Invalid prophet parameters: %s" % e)

    def __eq__(self, other):
        return isinstance(other, ProphetParams) and \
            self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __str__(self):
        return "Prophet construction, %s mode, L=%i, p=%i" % (
            self.mode, self.L, self.p)


def check_connection_inequality(L):
    """
    Checks ``d_1 + ... + d_l <= L**(2l)`` for every layer, the condition that
    lets every layer-``l`` node receive its own first-family vector at layer
    ``l + 1``.

    >>> check_connection_inequality(3)[1]
    (2, 30, 81, True)
    """
    rows = []
    for layer in range(1, L + 1):
        lhs = sum(L ** (2 * _i - 1) for _i in range(1, layer + 1))
        rhs = L ** (2 * layer)
        rows.append((layer, lhs, rhs, lhs <= rhs))
    return rows


class ProphetInstance(object):
    """
    A (possibly lazy) instance of the layered construction.

    Nodes are addressed by their path of child indices from the root. Use
    :func:`gen_prophet_instance` to build one.
    """
    def __init__(self, params, seed):
        self.params = params
        self.seed = int(seed)
        self.tree = None
        self.subsets = None
        self.arrival = None
        self._element_nodes = None
        # Exclusive upper element id of every layer's universe.
        self._ends = [params.offset(_i) + params.universe_size(_i)
                      for _i in params.layers]

    @property
    def L(self):
        return self.params.L

    @property
    def materialized(self):
        return self.tree is not None

    def __str__(self):
        return "%s, seed %i (%s)" % (
            self.params, self.seed,
            "materialized, %i nodes" % len(self.tree) if self.materialized
            else "lazy")

    # Code families.
    def first_vectors(self, layer, indices):
        """
        First-family vectors for the given indices, shape
        ``(len(indices), subset_size)``.
        """
        return self._family("first", layer, indices)

    def second_vectors(self, layer, child_indices):
        child_indices = np.asarray(child_indices, dtype=np.int64)
        if self.params.duplicate_second_family:
            child_indices = np.where(child_indices == 1, 0, child_indices)
        return self._family("second", layer, child_indices)

    def _family(self, name, layer, indices):
        size = self.params.subset_size(layer)
        indices = [int(_i) for _i in np.atleast_1d(indices)]
        if any(_i > MASK64 for _i in indices):
            return np.array([[keyed_randbelow(self.params.p, self.seed, name,
                                              layer, _i, _j)
                              for _j in range(size)] for _i in indices],
                            dtype=np.int64)
        return keyed_randbelow_array(
            self.params.p, (self.seed, name, layer),
            np.asarray(indices, dtype=np.uint64)[:, None],
            np.arange(size, dtype=np.uint64)[None, :])

    def elements_from_codes(self, layer, first, second):
        """
        Element ids of the bucket-wise pairs ``(first[i], second[i])``.
        """
        p = self.params.p
        buckets = np.arange(first.shape[-1], dtype=np.int64)
        return (self.params.offset(layer) + buckets * p * p +
                first * p + second)

    def node_subset(self, path):
        """
        Sorted element ids of the node at the end of ``path``.
        """
        path = tuple(int(_i) for _i in path)
        layer = len(path)
        self.check_path(path)
        if not layer:
            return np.zeros(0, dtype=np.int64)
        parent = self.ordinal(path[:-1])
        first = self.first_vectors(layer, [parent])[0]
        second = self.second_vectors(layer, [path[-1]])[0]
        return self.elements_from_codes(layer, first, second)

    def check_path(self, path):
        if len(path) > self.L:
            raise DownClosedInputError("Paths have at most %i steps." %
                                       self.L)
        for layer, child in enumerate(path, start=1):
            if not 0 <= child < self.params.branching(layer):
                raise DownClosedInputError(
                    "Child index %i is out of range at layer %i." %
                    (child, layer))

    def ordinal(self, path):
        """
        Mixed radix rank of a node among the nodes of its layer.
        """
        ordinal = 0
        for layer, child in enumerate(path, start=1):
            ordinal = ordinal * self.params.branching(layer) + child
        return ordinal

    def layer_of(self, element):
        element = int(element)
        layer = bisect.bisect_right(self._ends, element) + 1
        if element < 0 or layer > self.L:
            raise DownClosedInputError(
                "Element %i is not part of the instance." % element)
        return layer

    def decode(self, element):
        """
        ``(layer, bucket, first coordinate, second coordinate)`` of an
        element id.
        """
        layer = self.layer_of(element)
        p = self.params.p
        local = int(element) - self.params.offset(layer)
        bucket, rest = divmod(local, p * p)
        return layer, bucket, rest // p, rest % p

    # Materialization.
    def materialize(self):
        if self.materialized:
            return self
        total = self.params.total_nodes()
        if total > self.params.node_cap:
            hint = "use desk mode with a smaller branching" if \
                self.params.mode == ASYMPTOTIC else \
                "reduce the branching or raise the node cap"
            raise DownClosedCapacityError(
                "The instance has %i nodes which exceeds the node cap of %i; "
                "%s or explore it lazily." % (total, self.params.node_cap,
                                              hint))
        subsets = {}
        parents = [-1]
        node_elements = [()]
        previous = [0]
        for layer in self.params.layers:
            count = self.params.parent_count(layer)
            branching = self.params.branching(layer)
            first = self.first_vectors(layer, np.arange(count))
            second = self.second_vectors(layer, np.arange(branching))
            ids = self.elements_from_codes(
                layer, first[:, None, :], second[None, :, :])
            subsets[layer] = ids.reshape(count * branching, -1)
            current = []
            for parent in previous:
                for _ in range(branching):
                    parents.append(parent)
                    current.append(len(parents) - 1)
            node_elements.extend(
                frozenset(_i.tolist()) for _i in subsets[layer])
            previous = current
        self.subsets = subsets
        self.tree = RootedTree(parents, node_elements)
        arrival = []
        for layer in reversed(self.params.layers):
            elements = np.unique(subsets[layer])
            if self.params.permute_arrivals:
                elements = seeded_generator(
                    self.seed, "arrival", layer).permutation(elements)
            arrival.append(elements)
        self.arrival = np.concatenate(arrival)
        return self

    def require_materialized(self, what):
        if not self.materialized:
            raise DownClosedCapacityError(
                "%s needs a materialized instance; this one has %i nodes "
                "(cap %i). Use the greedy descent lower bound instead." %
                (what, self.params.total_nodes(), self.params.node_cap))

    def layer_first_node(self, layer):
        """
        Tree id of the first node at ``layer`` (nodes are numbered breadth
        first).
        """
        return sum(self.params.node_count(_i) for _i in range(layer))

    def oracle(self):
        self.require_materialized("The path oracle")
        return TreePathOracle(self.tree, n=self.ground_set_size())

    def ground_set_size(self):
        return self.params.offset(self.L) + self.params.universe_size(self.L)

    def element_nodes(self):
        """
        Map from element id to the array of tree node ids containing it.
        """
        self.require_materialized("The element index")
        if self._element_nodes is None:
            index = collections.defaultdict(list)
            for layer in self.params.layers:
                first = self.layer_first_node(layer)
                for _i, row in enumerate(self.subsets[layer]):
                    for element in row.tolist():
                        index[element].append(first + _i)
            self._element_nodes = dict(
                (_i, np.array(_j, dtype=np.int64))
                for _i, _j in index.items())
        return self._element_nodes

    def leaf_ancestors(self):
        """
        Array of shape ``(leaves, L + 1)`` with the tree id of every leaf's
        ancestor at each layer.
        """
        self.require_materialized("The leaf table")
        leaves = self.tree.leaves()
        return np.array([self.tree.path_to_root(_i)[::-1] for _i in leaves],
                        dtype=np.int64)


def gen_prophet_instance(params, seed, materialize=None):
    """
    Builds an instance. Desk mode instances are materialized by default,
    asymptotic ones stay lazy. Requesting materialization above the
    node cap is a capacity error.
    """
    instance = ProphetInstance(params, seed)
    if materialize is None:
        materialize = params.mode == DESK
    if materialize:
        instance.materialize()
    return instance


def structural_digest(instance, sample_nodes=256):
    """
    SHA-256 over the parameters, the seed and the element sets of the first
    ``sample_nodes`` nodes of every layer.
    """
    h = hashlib.sha256()
    h.update(json.dumps(instance.params.to_dict(), sort_keys=True).encode())
    h.update(str(instance.seed).encode())
    for layer in instance.params.layers:
        count = min(instance.params.node_count(layer), sample_nodes)
        branching = instance.params.branching(layer)
        for ordinal in range(count):
            parent, child = divmod(ordinal, branching)
            first = instance.first_vectors(layer, [parent])[0]
            second = instance.second_vectors(layer, [child])[0]
            ids = instance.elements_from_codes(layer, first, second)
            h.update(np.ascontiguousarray(ids, dtype="<i8").tobytes())
    return h.hexdigest()


class Realization(object):
    """
    Activation of every element, a keyed coin per element id.

    >>> params = ProphetParams(2, 50, branching=[2, 2], subset_sizes=[2, 2],
    ...                        activation_prob=1)
    >>> instance = gen_prophet_instance(params, 1)
    >>> bool(sample_realization(instance, 5).is_active(instance.arrival).all())
    True
    """
    def __init__(self, instance, seed, activation_prob=None):
        self.instance = instance
        self.seed = int(seed)
        self.activation_prob = Fraction(
            instance.params.activation_prob if activation_prob is None
            else activation_prob)

    def is_active(self, elements):
        elements = np.asarray(elements, dtype=np.uint64)
        if self.activation_prob >= 1:
            return np.ones(elements.shape, dtype=bool)
        if self.activation_prob <= 0:
            return np.zeros(elements.shape, dtype=bool)
        return keyed_uniform_array((self.seed, "active"), elements) < \
            float(self.activation_prob)

    def value(self, element):
        if not self.is_active([element])[0]:
            return Fraction(0)
        return self.instance.params.element_value(
            self.instance.layer_of(element))

    def active_elements(self, elements):
        elements = np.asarray(elements, dtype=np.int64)
        return elements[self.is_active(elements)]


def sample_realization(instance, seed):
    return Realization(instance, seed)


def layer_weights(params):
    """
    Integer weights ``lcm / subset_size`` making per-layer values integral.
    """
    lcm = math.lcm(*[params.subset_size(_i) for _i in params.layers])
    return lcm, dict((_i, lcm // params.subset_size(_i))
                     for _i in params.layers)


def hindsight_opt(instance, realization):
    """
    Exact best root-leaf path value, computed bottom-up over the
    materialized tree.
    """
    instance.require_materialized("The hindsight optimum")
    params = instance.params
    lcm, weights = layer_weights(params)
    best = None
    for layer in reversed(params.layers):
        counts = realization.is_active(instance.subsets[layer]).sum(axis=1)
        own = counts.astype(np.int64) * weights[layer]
        if best is not None:
            own = own + best.reshape(len(own), -1).max(axis=1)
        best = own
    return Fraction(int(best.max()), lcm)


def path_value(instance, realization, path):
    """
    Realized value of the union along a root-leaf path given as child
    indices.
    """
    total = Fraction(0)
    for layer in range(1, len(path) + 1):
        subset = instance.node_subset(path[:layer])
        total += Fraction(int(realization.is_active(subset).sum()),
                          instance.params.subset_size(layer))
    return total


def greedy_descent(instance, realization, child_scan=DEFAULT_CHILD_SCAN):
    """
    Walks from the root to a leaf, always moving to the child (among the
    first ``child_scan``) with the most active elements. Works on lazy
    instances and lower-bounds the hindsight optimum.

    :returns: Tuple ``(value, path)``.
    """
    path = []
    total = Fraction(0)
    for layer in instance.params.layers:
        branching = min(instance.params.branching(layer), child_scan)
        parent = instance.ordinal(path)
        first = instance.first_vectors(layer, [parent])[0]
        second = instance.second_vectors(layer, np.arange(branching))
        ids = instance.elements_from_codes(layer, first[None, :], second)
        counts = realization.is_active(ids).sum(axis=1)
        child = int(np.argmax(counts))
        path.append(child)
        total += Fraction(int(counts[child]),
                          instance.params.subset_size(layer))
    return total, tuple(path)


class PathFeasibilityState(object):
    """
    Incremental feasibility of a selection: tracks the leaves whose root-leaf
    path still covers everything selected so far.
    """
    def __init__(self, instance):
        self.instance = instance
        self.leaf_ancestors = instance.leaf_ancestors()
        self.element_nodes = instance.element_nodes()
        self.viable = np.ones(len(self.leaf_ancestors), dtype=bool)
        self.selected = []

    def _mask(self, element):
        nodes = self.element_nodes.get(int(element))
        if nodes is None:
            return np.zeros_like(self.viable)
        layer = self.instance.layer_of(element)
        return self.viable & np.isin(self.leaf_ancestors[:, layer], nodes)

    def can_add(self, element):
        return bool(self._mask(element).any())

    def add(self, element):
        mask = self._mask(element)
        if not mask.any():
            raise DownClosedContractError(
                "Selecting element %i makes the selection infeasible." %
                element)
        self.viable = mask
        self.selected.append(int(element))


class OnlinePolicy(object, metaclass=ABCMeta):
    """
    An online policy sees every element once, in arrival order, together
    with its realized value and decides irrevocably.
    """
    name = None

    @abstractmethod
    def decide(self, element, layer, value, state):
        """
        :param element: Element id.
        :param layer: Layer of the element.
        :param value: Realized value (zero when inactive).
        :param state: :class:`PathFeasibilityState` of the selection.
        :return: bool, whether to select the element.
        """
        pass

    def __str__(self):
        return self.name


class GreedyCommitPolicy(OnlinePolicy):
    """
    Takes every active element that keeps the selection feasible.
    """
    name = "greedy-commit"

    def decide(self, element, layer, value, state):
        return value > 0 and state.can_add(element)


class LayerThresholdPolicy(OnlinePolicy):
    """
    Greedy, but ignores elements worth less than ``threshold``.
    """
    def __init__(self, threshold):
        self.threshold = Fraction(threshold)
        self.name = "layer-threshold(%s)" % self.threshold

    def decide(self, element, layer, value, state):
        return value > 0 and value >= self.threshold and \
            state.can_add(element)


class SkipSmallLayersPolicy(OnlinePolicy):
    """
    Greedy, but ignores the ``count`` deepest (least valuable) layers.
    """
    def __init__(self, count):
        self.count = int(count)
        self.name = "skip-small-layers(%i)" % self.count

    def decide(self, element, layer, value, state):
        if layer > state.instance.L - self.count:
            return False
        return value > 0 and state.can_add(element)


def policy_from_name(name):
    """
    Parses policy names such as ``greedy-commit``, ``layer-threshold(1/4)``
    or ``skip-small-layers(1)``.

    >>> str(policy_from_name("layer-threshold(1/4)"))
    'layer-threshold(1/4)'
    """
    match = re.match(r"^\s*([a-z\-]+)\s*(?:\((.*)\))?\s*$", name)
    if not match:
        raise DownClosedInputError("Cannot parse policy '%s'." % name)
    kind, argument = match.groups()
    try:
        if kind == "greedy-commit" and not argument:
            return GreedyCommitPolicy()
        elif kind == "layer-threshold" and argument:
            return LayerThresholdPolicy(Fraction(argument))
        elif kind == "skip-small-layers" and argument:
            return SkipSmallLayersPolicy(int(argument))
    except ValueError:
        pass
    raise DownClosedInputError(
        "Unknown policy '%s'. Available: greedy-commit, layer-threshold(t), "
        "skip-small-layers(k)" % name)


def default_policies(L):
    policies = [GreedyCommitPolicy()]
    if L > 1:
        policies.append(SkipSmallLayersPolicy(1))
        policies.append(LayerThresholdPolicy(Fraction(1, L ** 2)))
    return policies


def run_online_policy(instance, realization, policy, debug=False):
    """
    Feeds the arrival sequence to ``policy``.

    :param debug: Audit feasibility of the selection with the path oracle
        after every acceptance.
    :returns: Tuple ``(value, selected elements)``.
    """
    instance.require_materialized("Online simulation")
    state = PathFeasibilityState(instance)
    oracle = instance.oracle() if debug else None
    active = realization.is_active(instance.arrival)
    total = Fraction(0)
    for element, is_active in zip(instance.arrival.tolist(), active.tolist()):
        layer = instance.layer_of(element)
        value = instance.params.element_value(layer) if is_active \
            else Fraction(0)
        if not policy.decide(element, layer, value, state):
            continue
        if not state.can_add(element):
            raise DownClosedContractError(
                "Policy '%s' selected element %i which makes the selection "
                "infeasible." % (policy, element))
        state.add(element)
        total += value
        if oracle is not None and not oracle.is_feasible(state.selected):
            raise DownClosedInvariantError(
                "Feasibility audit failed after selecting element %i." %
                element)
    return total, tuple(state.selected)


class IntersectionReport(collections.namedtuple(
        "IntersectionReport",
        ["layer", "pairs", "same_histogram", "different_histogram",
         "max_same", "max_different", "bound", "bound_different",
         "same_violations", "different_violations", "union_bound"])):
    """
    Shared element counts of sampled node pairs at one layer.

    ``bound`` applies to every pair, ``bound_different`` to pairs with
    different parents. ``union_bound`` is the probability bound on a single
    violation implied by a union bound over the code's coordinates.
    """
    @property
    def violations(self):
        return self.same_violations + self.different_violations


def _count_shared(instance, layer, parents_a, children_a, parents_b,
                  children_b):
    first_a = instance.first_vectors(layer, parents_a)
    first_b = instance.first_vectors(layer, parents_b)
    second_a = instance.second_vectors(layer, children_a)
    second_b = instance.second_vectors(layer, children_b)
    same = (first_a == first_b) & (second_a == second_b)
    return same.sum(axis=1)


def _union_bound(base, exponent):
    if base >= 1:
        return 1.0
    return math.exp(exponent * math.log(base)) if base > 0 else 0.0


def verify_prophet_code(instance, pair_budget, seed, batch=2048):
    """
    Samples pairs of distinct nodes per layer, half with a shared parent and
    half with different parents, and counts their shared elements.

    :returns: List with one :class:`IntersectionReport` per layer.
    """
    if pair_budget < 1:
        raise DownClosedInputError("The pair budget must be at least 1.")
    params = instance.params
    reports = []
    for layer in params.layers:
        rng = seeded_random(seed, "prophet-pairs", layer)
        branching = params.branching(layer)
        parents = params.parent_count(layer)
        same, different = collections.Counter(), collections.Counter()
        can_same = branching >= 2
        can_different = parents >= 2
        todo_same = pair_budget // 2 if can_different else pair_budget
        todo_same = todo_same if can_same else 0
        todo_different = pair_budget - todo_same if can_different else 0

        def draw(count, same_parent):
            rows = []
            for _ in range(count):
                if same_parent:
                    parent = rng.randrange(parents)
                    a, b = rng.sample(range(branching), 2)
                    rows.append((parent, a, parent, b))
                else:
                    a, b = _distinct_pair(rng, parents)
                    rows.append((a, rng.randrange(branching),
                                 b, rng.randrange(branching)))
            return rows

        for todo, counter, same_parent in ((todo_same, same, True),
                                           (todo_different, different,
                                            False)):
            while todo > 0:
                rows = draw(min(batch, todo), same_parent)
                todo -= len(rows)
                columns = list(zip(*rows))
                counts = _count_shared(instance, layer, *columns)
                counter.update(int(_i) for _i in counts)

        bound, bound_different = params.d(layer), params.d_before(layer)
        reports.append(IntersectionReport(
            layer=layer, pairs=sum(same.values()) + sum(different.values()),
            same_histogram=dict(same), different_histogram=dict(different),
            max_same=max(same) if same else None,
            max_different=max(different) if different else None,
            bound=bound, bound_different=bound_different,
            same_violations=sum(_j for _i, _j in same.items() if _i > bound),
            different_violations=sum(
                _j for _i, _j in different.items()
                if _i > bound_different),
            union_bound=_union_bound(params.r(params.L) ** 3 / params.p,
                                     params.d_before(layer))))
    return reports


def _distinct_pair(rng, count):
    a = rng.randrange(count)
    b = rng.randrange(count - 1)
    return a, b + 1 if b >= a else b


class TinyProphetProblem(collections.namedtuple(
        "TinyProphetProblem",
        ["values", "probabilities", "maximal_sets", "elements"])):
    """
    Explicit small prophet problem: arrival ``i`` is worth ``values[i]`` with
    probability ``probabilities[i]`` and zero otherwise; ``maximal_sets``
    hold arrival positions.
    """
    pass


def to_tiny_problem(instance):
    """
    Converts a materialized instance into a :class:`TinyProphetProblem` over
    its arrival sequence.
    """
    instance.require_materialized("The explicit conversion")
    position = dict((_j, _i) for _i, _j in
                    enumerate(instance.arrival.tolist()))
    maximal = instance.oracle().maximal_sets()
    q = instance.params.activation_prob
    values = [instance.params.element_value(instance.layer_of(_i))
              for _i in instance.arrival.tolist()]
    return TinyProphetProblem(
        values=tuple(values), probabilities=tuple([q] * len(values)),
        maximal_sets=tuple(frozenset(position[_j] for _j in _i)
                           for _i in maximal),
        elements=tuple(instance.arrival.tolist()))


def prophet_trial(instance, policies, trial_seed, debug=False):
    """
    One Monte Carlo trial: a fresh realization scored by the hindsight
    optimum and by every policy.

    :returns: Ordered dictionary with the hindsight value first.
    """
    realization = sample_realization(instance, trial_seed)
    row = collections.OrderedDict()
    row["hindsight"] = hindsight_opt(instance, realization)
    for policy in policies:
        value, _ = run_online_policy(instance, realization, policy,
                                     debug=debug)
        if debug and value > row["hindsight"]:
            raise DownClosedInvariantError(
                "Policy '%s' beat the hindsight optimum." % policy)
        row[str(policy)] = value
    return row


def estimate_prophet_gap(params, trials, seed, policies=None,
                         trial_map=None, debug=False):
    """
    Monte Carlo estimate of hindsight optimum versus the best online policy
    on one instance drawn from ``params``.

    :param trial_map: Callable ``trial_map(function, argument_tuples)``
        returning results in argument order. Runs serially if not given.
    :returns: Tuple of :class:`~downclosed.tools.stats_helpers.GapStats` and
        the per-trial rows.
    """
    if trials < 1:
        raise DownClosedInputError("Cannot estimate a gap from zero trials.")
    instance = gen_prophet_instance(params, derive_seed(seed, "instance"))
    policies = policies if policies is not None else \
        default_policies(params.L)
    arguments = [(instance, policies, derive_seed(seed, "realization", _i),
                  debug) for _i in range(trials)]
    trial_map = trial_map or serial_map
    rows = trial_map(prophet_trial, arguments)
    return summarize_gap(rows, "hindsight",
                         [str(_i) for _i in policies]), rows
