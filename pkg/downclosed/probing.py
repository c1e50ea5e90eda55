#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Hard stochastic probing instances: a meta-tree of blocks.

Every layer ``l`` of the meta-tree is made of blocks, complete ``a_l``-ary
trees of depth ``rho_l``. Splicing the blocks gives the concatenated tree of
depth ``D = rho_1 + ... + rho_L``. Edges are addressed by their child index
tuple from the root. An edge at layer ``l`` and height ``h`` is mapped to the
element ``(vector[h], x_e)`` of the height's own universe ``[p] x [p]``
where ``vector`` is the block's code vector and ``x_e`` an independent
uniform draw for the edge.

Probing is constrained to caterpillars (a root-leaf spine plus every edge
leaving a spine node), selection to root-leaf paths.

Like the prophet construction everything is computed on demand from a keyed
pseudorandom function; small instances can be materialized.

>>> params = ProbingParams(2, 10 ** 6, mode=ASYMPTOTIC)
>>> params.depth(1), params.depth(2), params.arity(1)
(4, 16, 4)
>>> params.block_count(2), params.family_size(2)
(256, 65536)

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import collections
from fractions import Fraction
import hashlib
import itertools
import json
import math

import numpy as np

from downclosed import (DownClosedInputError, DownClosedCapacityError,
                        DownClosedInvariantError)
from downclosed.constraints import (CaterpillarOracle, RootedTree,
                                    TreePathOracle)
from downclosed.tools.keyed_random import (derive_seed, keyed_randbelow,
                                           keyed_randbelow_array,
                                           keyed_uniform_array, MASK64,
                                           seeded_generator, seeded_random)
from downclosed.tools.parallel_helpers import serial_map
from downclosed.tools.stats_helpers import (binomial_sigma, estimate_mean,
                                            summarize_gap)

ASYMPTOTIC = "asymptotic"
DESK = "desk"
MODES = (ASYMPTOTIC, DESK)

DEFAULT_DESK_DEPTH = 1
DEFAULT_NODE_CAP = 10 ** 5
DEFAULT_PATH_SAMPLES = 32


class ProbingParams(object):
    """
    Parameters of the block construction.

    :param L: Number of meta-tree layers.
    :param p: Alphabet size.
    :param mode: ``"asymptotic"`` fixes arity ``L**2`` and depths
        ``L**(2l)``, ``"desk"`` takes the overrides below.
    :param arities: Desk mode block arity per layer, default ``L**2``.
    :param depths: Desk mode block depth per layer, default 1.
    :param family_sizes: Desk mode code family size per layer, default the
        block count of the layer.
    :param activation_prob: Defaults to ``2 / L**2`` capped at one.
    :param node_cap: Largest node count that may be materialized.
    """
    def __init__(self, L, p, mode=DESK, arities=None, depths=None,
                 family_sizes=None, activation_prob=None,
                 node_cap=DEFAULT_NODE_CAP):
        self.L = int(L)
        self.p = int(p)
        if self.L < 1 or self.p < 2:
            raise DownClosedInputError("Need L >= 1 and p >= 2.")
        if mode not in MODES:
            raise DownClosedInputError("Unknown mode '%s'. Available: %s" %
                                       (mode, ", ".join(MODES)))
        self.mode = mode
        self.node_cap = int(node_cap)
        if activation_prob is None:
            activation_prob = min(Fraction(1), Fraction(2, self.L ** 2))
        self.activation_prob = Fraction(activation_prob)
        if not 0 <= self.activation_prob <= 1:
            raise DownClosedInputError("The activation probability must lie "
                                       "in [0, 1].")

        if mode == ASYMPTOTIC:
            if arities is not None or depths is not None or \
                    family_sizes is not None:
                raise DownClosedInputError(
                    "Block shapes are fixed in asymptotic mode; use desk "
                    "mode to override them.")
            if 8 * self.r(self.L) ** 4 >= self.p:
                raise DownClosedInputError(
                    "Asymptotic mode requires r_L**4 < p/8, i.e. p > %i." %
                    (8 * self.r(self.L) ** 4))
            self._arities = [self.L ** 2] * self.L
            self._depths = [self.r(_i) for _i in self.layers]
            self._family_sizes = [self.r(self.L) ** self.d_before(_i)
                                  for _i in self.layers]
        else:
            self._arities = self._per_layer(arities, self.L ** 2, "arities")
            self._depths = self._per_layer(depths, DEFAULT_DESK_DEPTH,
                                           "depths")
            if any(_i < 1 for _i in self._arities + self._depths):
                raise DownClosedInputError("Arities and depths must be "
                                           "positive.")
            if family_sizes is None:
                self._family_sizes = [self.block_count(_i)
                                      for _i in self.layers]
            else:
                self._family_sizes = self._per_layer(family_sizes, None,
                                                     "family_sizes")
        for layer in self.layers:
            if self.family_size(layer) < self.block_count(layer):
                raise DownClosedInputError(
                    "Layer %i has %i blocks but only %i code vectors." %
                    (layer, self.block_count(layer), self.family_size(layer)))
        self.total_depth = sum(self._depths)
        self._level_layer = []
        for layer in self.layers:
            for height in range(self.depth(layer)):
                self._level_layer.append((layer, height))

    def _per_layer(self, value, default, name):
        if value is None:
            value = default
        if isinstance(value, int):
            return [value] * self.L
        value = [int(_i) for _i in value]
        if len(value) != self.L:
            raise DownClosedInputError(
                "'%s' needs one entry per layer (%i), got %i." %
                (name, self.L, len(value)))
        return value

    @property
    def layers(self):
        return range(1, self.L + 1)

    def r(self, layer):
        return self.L ** (2 * layer)

    def d(self, layer):
        return self.L ** (2 * layer - 1)

    def d_before(self, layer):
        return self.L ** (2 * layer - 2)

    def arity(self, layer):
        return self._arities[layer - 1]

    def depth(self, layer):
        return self._depths[layer - 1]

    def family_size(self, layer):
        return self._family_sizes[layer - 1]

    def layer_start(self, layer):
        """
        Tree depth at which the blocks of ``layer`` start.
        """
        return sum(self._depths[:layer - 1])

    def block_count(self, layer):
        return math.prod(self.arity(_i) ** self.depth(_i)
                         for _i in range(1, layer))

    def level(self, level):
        """
        ``(layer, height)`` of the edges at tree level ``level`` (0-based,
        root edges are level 0).
        """
        return self._level_layer[level]

    def level_arity(self, level):
        return self.arity(self.level(level)[0])

    def level_edge_count(self, level):
        """
        Number of edges at ``level`` in the concatenated tree.
        """
        return math.prod(self.level_arity(_i) for _i in range(level + 1))

    def total_nodes(self):
        return 1 + sum(self.level_edge_count(_i)
                       for _i in range(self.total_depth))

    def element_value(self, layer):
        return Fraction(1, self.depth(layer))

    def to_dict(self):
        result = collections.OrderedDict([
            ("L", self.L), ("p", self.p), ("mode", self.mode),
            ("activation_prob", [self.activation_prob.numerator,
                                 self.activation_prob.denominator])])
        if self.mode == DESK:
            result["arities"] = list(self._arities)
            result["depths"] = list(self._depths)
            result["family_sizes"] = list(self._family_sizes)
        result["node_cap"] = self.node_cap
        return result

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if isinstance(data.get("activation_prob"), list):
            data["activation_prob"] = Fraction(*data["activation_prob"])
        try:
            return cls(**data)
        except TypeError as e:
            raise DownClosedInputError("Invalid probing parameters: %s" % e)

    def __eq__(self, other):
        return isinstance(other, ProbingParams) and \
            self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __str__(self):
        return "Probing construction, %s mode, L=%i, p=%i" % (
            self.mode, self.L, self.p)


class ProbeElement(collections.namedtuple(
        "ProbeElement", ["layer", "height", "first", "second", "id"])):
    """
    Element assigned to an edge: a pair in ``[p] x [p]`` of the universe of
    its layer and height, plus a global integer id.
    """
    pass


class ProbingInstance(object):
    """
    A (possibly lazy) probing instance. Build with
    :func:`gen_probing_instance`.
    """
    def __init__(self, params, seed):
        self.params = params
        self.seed = int(seed)
        self.tree = None
        self.level_elements = None
        self._vectors = {}

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

    def check_address(self, address):
        address = tuple(int(_i) for _i in address)
        if not 1 <= len(address) <= self.params.total_depth:
            raise DownClosedInputError(
                "Edge addresses have between 1 and %i steps, got %i." %
                (self.params.total_depth, len(address)))
        for level, child in enumerate(address):
            if not 0 <= child < self.params.level_arity(level):
                raise DownClosedInputError(
                    "Child index %i is out of range at tree level %i." %
                    (child, level))
        return address

    def ordinal(self, address):
        """
        Mixed radix rank of the node reached by ``address`` among the nodes
        of its depth.
        """
        ordinal = 0
        for level, child in enumerate(address):
            ordinal = ordinal * self.params.level_arity(level) + child
        return ordinal

    def block_vector(self, layer, block):
        key = (layer, block)
        if key not in self._vectors:
            self._vectors[key] = tuple(
                keyed_randbelow(self.params.p, self.seed, "family", layer,
                                block, _h)
                for _h in range(self.params.depth(layer)))
        return self._vectors[key]

    def block_vectors(self, layer, blocks):
        """
        Vectorized code vectors, shape ``(len(blocks), depth)``.
        """
        blocks = np.asarray(blocks)
        if blocks.size and int(blocks.max()) > MASK64:
            return np.array([self.block_vector(layer, int(_i))
                             for _i in blocks], dtype=np.int64)
        return keyed_randbelow_array(
            self.params.p, (self.seed, "family", layer),
            blocks.astype(np.uint64)[:, None],
            np.arange(self.params.depth(layer), dtype=np.uint64)[None, :])

    def edge_draws(self, depth, ordinals):
        """
        ``x_e`` for the edges at tree depth ``depth`` (1-based) with the
        given node ordinals.
        """
        ordinals = np.asarray(ordinals)
        if ordinals.size and int(ordinals.max()) > MASK64:
            return np.array([keyed_randbelow(self.params.p, self.seed, "edge",
                                             depth, int(_i))
                             for _i in ordinals.reshape(-1)],
                            dtype=np.int64).reshape(ordinals.shape)
        return keyed_randbelow_array(self.params.p, (self.seed, "edge", depth),
                                     ordinals.astype(np.uint64))

    def element_id(self, level, first, second):
        p = self.params.p
        return level * p * p + first * p + second

    def element_of_edge(self, address):
        """
        The element assigned to the edge at the end of ``address``.

        >>> instance = gen_probing_instance(
        ...     ProbingParams(2, 101, arities=[2, 2], depths=[1, 2]), 3)
        >>> element = instance.element_of_edge((1, 0, 1))
        >>> element.layer, element.height
        (2, 1)
        """
        address = self.check_address(address)
        level = len(address) - 1
        layer, height = self.params.level(level)
        start = self.params.layer_start(layer)
        block = self.ordinal(address[:start])
        first = self.block_vector(layer, block)[height]
        second = keyed_randbelow(self.params.p, self.seed, "edge",
                                 len(address), self.ordinal(address))
        element = ProbeElement(layer, height, first, second,
                               self.element_id(level, first, second))
        if self.decode(element.id) != element:
            raise DownClosedInvariantError(
                "Element %i left the universe of its layer and height." %
                element.id)
        return element

    def decode(self, element_id):
        p = self.params.p
        level, rest = divmod(int(element_id), p * p)
        if not 0 <= level < self.params.total_depth:
            raise DownClosedInputError("Element %i is not part of the "
                                       "instance." % element_id)
        layer, height = self.params.level(level)
        return ProbeElement(layer, height, rest // p, rest % p,
                            int(element_id))

    def value_if_active(self, element_id):
        return self.params.element_value(self.decode(element_id).layer)

    def ground_set_size(self):
        return self.params.total_depth * self.params.p ** 2

    # Materialization.
    def materialize(self):
        if self.materialized:
            return self
        total = self.params.total_nodes()
        if total > self.params.node_cap:
            raise DownClosedCapacityError(
                "The concatenated tree has %i nodes which exceeds the node "
                "cap of %i; use smaller desk depths or evaluate lazily." %
                (total, self.params.node_cap))
        level_elements = []
        parents = [-1]
        node_elements = [()]
        previous = [0]
        for level in range(self.params.total_depth):
            layer, height = self.params.level(level)
            arity = self.params.arity(layer)
            count = self.params.level_edge_count(level)
            ordinals = np.arange(count, dtype=np.int64)
            blocks = ordinals // arity ** (height + 1)
            first = self.block_vectors(layer, np.unique(blocks))
            first = first[np.searchsorted(np.unique(blocks), blocks), height]
            second = self.edge_draws(level + 1, ordinals)
            ids = self.element_id(level, first, second)
            level_elements.append(ids)
            current = []
            for parent in previous:
                for _ in range(arity):
                    parents.append(parent)
                    current.append(len(parents) - 1)
            node_elements.extend((int(_i),) for _i in ids)
            previous = current
        self.level_elements = level_elements
        self.tree = RootedTree(parents, node_elements)
        return self

    def require_materialized(self, what):
        if not self.materialized:
            raise DownClosedCapacityError(
                "%s needs a materialized instance; this one has %i nodes "
                "(cap %i)." % (what, self.params.total_nodes(),
                               self.params.node_cap))

    def inner_oracle(self):
        self.require_materialized("The path oracle")
        return TreePathOracle(self.tree, n=self.ground_set_size())

    def outer_oracle(self):
        self.require_materialized("The caterpillar oracle")
        return CaterpillarOracle(self.tree, n=self.ground_set_size())


def gen_probing_instance(params, seed, materialize=None):
    """
    Builds an instance. Desk instances are materialized by default if they
    fit under the node cap, asymptotic ones always stay lazy.
    """
    instance = ProbingInstance(params, seed)
    if materialize is None:
        materialize = params.mode == DESK and \
            params.total_nodes() <= params.node_cap
    if materialize:
        if params.mode == ASYMPTOTIC:
            raise DownClosedCapacityError(
                "Asymptotic probing instances can only be explored "
                "lazily.")
        instance.materialize()
    return instance


def structural_digest(instance, sample_edges=256):
    """
    SHA-256 over parameters, seed and the elements of the first
    ``sample_edges`` edges of every tree level.
    """
    h = hashlib.sha256()
    h.update(json.dumps(instance.params.to_dict(), sort_keys=True).encode())
    h.update(str(instance.seed).encode())
    for level in range(instance.params.total_depth):
        count = min(instance.params.level_edge_count(level), sample_edges)
        layer, height = instance.params.level(level)
        arity = instance.params.arity(layer)
        ordinals = np.arange(count, dtype=np.int64)
        blocks = ordinals // arity ** (height + 1)
        first = np.array([instance.block_vector(layer, int(_i))[height]
                          for _i in blocks], dtype=np.int64)
        ids = instance.element_id(level, first,
                                  instance.edge_draws(level + 1, ordinals))
        h.update(np.ascontiguousarray(ids, dtype="<i8").tobytes())
    return h.hexdigest()


class Caterpillar(object):
    """
    A root-leaf spine together with all edges leaving a spine node.
    """
    def __init__(self, spine, legs):
        self.spine = tuple(spine)
        self.legs = tuple(legs)

    @classmethod
    def from_spine(cls, instance, spine):
        spine = instance.check_address(spine)
        if len(spine) != instance.params.total_depth:
            raise DownClosedInputError(
                "A spine has to reach a leaf (%i steps), got %i." %
                (instance.params.total_depth, len(spine)))
        legs = []
        for level in range(len(spine)):
            for child in range(instance.params.level_arity(level)):
                legs.append(spine[:level] + (child,))
        return cls(spine, legs)

    def edges(self):
        return self.legs

    def __eq__(self, other):
        return isinstance(other, Caterpillar) and self.spine == other.spine \
            and self.legs == other.legs

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.spine)

    def __str__(self):
        return "Caterpillar along %s" % (self.spine,)


def random_spine(instance, rng):
    """
    Uniformly random root-leaf spine. ``rng`` is a :class:`random.Random`.
    """
    return tuple(rng.randrange(instance.params.level_arity(_i))
                 for _i in range(instance.params.total_depth))


def all_spines(instance):
    return itertools.product(*[range(instance.params.level_arity(_i))
                               for _i in range(instance.params.total_depth)])


def is_outer_feasible(edges):
    """
    A set of edge addresses fits into a caterpillar iff the parents of all
    edges lie on one root-leaf path.

    >>> is_outer_feasible([(0,), (1,), (0, 1), (0, 0, 1)])
    True
    >>> is_outer_feasible([(0, 1), (1, 0)])
    False
    """
    parents = sorted(set(tuple(_i[:-1]) for _i in edges), key=len)
    return all(_j[:len(_i)] == _i for _i, _j in zip(parents[:-1],
                                                      parents[1:]))


class ProbeTranscript(collections.namedtuple(
        "ProbeTranscript", ["probes", "policy", "value", "inner_path"])):
    """
    Probes as ``(address, element id, observed value)`` triples, the policy
    name, the final inner value and the inner path achieving it.
    """
    pass


class ProbingRealization(object):
    """
    Keyed activation coin per element id.
    """
    def __init__(self, instance, seed, activation_prob=None):
        self.instance = instance
        self.seed = int(seed)
        self.activation_prob = Fraction(
            instance.params.activation_prob if activation_prob is None
            else activation_prob)

    def is_active(self, element_ids):
        element_ids = np.asarray(element_ids, dtype=np.uint64)
        if self.activation_prob >= 1:
            return np.ones(element_ids.shape, dtype=bool)
        if self.activation_prob <= 0:
            return np.zeros(element_ids.shape, dtype=bool)
        return keyed_uniform_array((self.seed, "active"), element_ids) < \
            float(self.activation_prob)

    def value(self, element_id):
        if not self.is_active([element_id])[0]:
            return Fraction(0)
        return self.instance.value_if_active(element_id)


def run_adaptive_greedy(instance, seed):
    """
    From the root probe every child edge of the current node and walk along
    the first active one (the first edge if none is active) until a leaf is
    reached. The value is the sum over the active spine elements.
    """
    realization = ProbingRealization(instance, seed)
    address = ()
    probes = []
    total = Fraction(0)
    for level in range(instance.params.total_depth):
        arity = instance.params.level_arity(level)
        chosen = 0
        found = False
        for child in range(arity):
            element = instance.element_of_edge(address + (child,))
            value = realization.value(element.id)
            probes.append((address + (child,), element.id, value))
            if value > 0 and not found:
                chosen, found = child, True
                total += value
        address = address + (chosen,)
    return ProbeTranscript(tuple(probes), "adaptive-greedy", total, address)


def adaptive_step_statistics(instance, trials, seed):
    """
    Per tree level: frequency with which adaptive greedy found an active
    child, the realized active fraction ``q`` among probed children and the
    binomial model ``1 - (1 - q)**arity`` with its standard deviation.

    :returns: List of dictionaries, one per level.
    """
    if trials < 1:
        raise DownClosedInputError("At least one trial is required.")
    depth = instance.params.total_depth
    successes = np.zeros(depth)
    active = np.zeros(depth)
    probed = np.zeros(depth)
    for trial in range(trials):
        transcript = run_adaptive_greedy(
            instance, derive_seed(seed, "adaptive", trial))
        found = np.zeros(depth, dtype=bool)
        for address, _, value in transcript.probes:
            level = len(address) - 1
            probed[level] += 1
            active[level] += value > 0
            found[level] |= value > 0
        successes += found
    rows = []
    for level in range(depth):
        layer, height = instance.params.level(level)
        arity = instance.params.level_arity(level)
        q = active[level] / probed[level]
        model = 1.0 - (1.0 - q) ** arity
        sigma = binomial_sigma(model, trials)
        frequency = successes[level] / trials
        rows.append(collections.OrderedDict([
            ("level", level), ("layer", layer), ("height", height),
            ("frequency", float(frequency)), ("active_fraction", float(q)),
            ("model", float(model)), ("sigma", float(sigma)),
            ("within_3_sigma", bool(abs(frequency - model) <= 3 * sigma))]))
    return rows


def _weights(params):
    lcm = math.lcm(*[params.depth(_i) for _i in params.layers])
    return lcm, [lcm // params.depth(params.level(_i)[0])
                 for _i in range(params.total_depth)]


def exact_inner_value(instance, selected_ids):
    """
    Best root-leaf path value over the materialized tree when exactly the
    elements in ``selected_ids`` count (the active probed ones).

    :returns: Tuple ``(value, path)``.
    """
    instance.require_materialized("Exact inner maximization")
    params = instance.params
    lcm, weights = _weights(params)
    selected = np.array(sorted(set(int(_i) for _i in selected_ids)),
                        dtype=np.int64)
    best, choice = None, []
    for level in reversed(range(params.total_depth)):
        ids = instance.level_elements[level]
        own = np.isin(ids, selected).astype(np.int64) * weights[level]
        if best is not None:
            below = best.reshape(len(own), -1)
            choice.append(below.argmax(axis=1))
            own = own + below.max(axis=1)
        best = own
    arity = params.level_arity(0)
    root_best = best.reshape(1, arity)
    path = [int(root_best.argmax())]
    node = path[0]
    for level, picks in enumerate(reversed(choice), start=1):
        step = int(picks[node])
        path.append(step)
        node = node * params.level_arity(level) + step
    return Fraction(int(root_best.max()), lcm), tuple(path)


def restricted_inner_value(instance, caterpillar, selected_ids, rng,
                           path_samples=DEFAULT_PATH_SAMPLES):
    """
    Lazy lower bound of the best inner value: the spine, every path leaving
    the spine through one leg and continuing along first children, and
    ``path_samples`` random root-leaf paths.
    """
    selected = set(int(_i) for _i in selected_ids)
    depth = instance.params.total_depth
    spine = caterpillar.spine
    candidates = [spine]
    for level in range(depth):
        for child in range(instance.params.level_arity(level)):
            if child != spine[level]:
                candidates.append(spine[:level] + (child,) +
                                  (0,) * (depth - level - 1))
    candidates.extend(random_spine(instance, rng)
                      for _ in range(path_samples))
    best, best_path = Fraction(0), spine
    for path in candidates:
        total = Fraction(0)
        for level in range(depth):
            element = instance.element_of_edge(path[:level + 1])
            if element.id in selected:
                total += instance.params.element_value(element.layer)
        if total > best:
            best, best_path = total, path
    return best, best_path


class NonAdaptiveEstimate(collections.namedtuple(
        "NonAdaptiveEstimate", ["estimate", "values", "lower_bound"])):
    pass


def caterpillar_elements(instance, caterpillar):
    return [instance.element_of_edge(_i).id for _i in caterpillar.edges()]


def eval_nonadaptive(instance, caterpillar, trials, seed,
                     path_samples=DEFAULT_PATH_SAMPLES):
    """
    Monte Carlo value of probing a fixed caterpillar and then picking the
    best root-leaf path among the active probed elements. Exact on
    materialized instances, a lower bound otherwise.

    :param caterpillar: :class:`Caterpillar` or a list of edge addresses.
    """
    if trials < 1:
        raise DownClosedInputError("At least one trial is required.")
    if not isinstance(caterpillar, Caterpillar):
        edges = [instance.check_address(_i) for _i in caterpillar]
        if not is_outer_feasible(edges):
            raise DownClosedInputError("The probed edges do not fit into a "
                                       "caterpillar.")
        spine = max((_i[:-1] for _i in edges), key=len)
        spine = spine + (0,) * (instance.params.total_depth - len(spine))
        caterpillar = Caterpillar(spine, edges)
    probed = np.array(caterpillar_elements(instance, caterpillar),
                      dtype=np.int64)
    rng = seeded_random(seed, "inner-paths")
    values = []
    for trial in range(trials):
        realization = ProbingRealization(
            instance, derive_seed(seed, "nonadaptive", trial))
        selected = probed[realization.is_active(probed)]
        if instance.materialized:
            value, _ = exact_inner_value(instance, selected)
        else:
            value, _ = restricted_inner_value(instance, caterpillar, selected,
                                              rng, path_samples)
        values.append(value)
    return NonAdaptiveEstimate(estimate_mean(values), tuple(values),
                               not instance.materialized)


class ProbingIntersectionReport(collections.namedtuple(
        "ProbingIntersectionReport",
        ["layer", "pairs", "cross_histogram", "same_histogram", "max_cross",
         "max_same", "bound_cross", "bound_same", "cross_violations",
         "same_violations", "cross_union_bound", "same_union_bound"])):
    """
    Per layer overlap statistics of sampled (path, caterpillar) pairs.

    Cross-block pairs count heights with a shared element, same-block pairs
    count shared elements below the point where path and spine diverge.
    """
    @property
    def violations(self):
        return self.cross_violations + self.same_violations


def _bound(base, exponent):
    if base >= 1:
        return 1.0
    return math.exp(exponent * math.log(base)) if base > 0 else 0.0


def _overlaps(instance, layer, blocks_path, blocks_cat, path_digits,
              spine_digits):
    """
    Boolean array ``(pairs, depth)``: does the path element at each height
    occur among the caterpillar's edges at that height.
    """
    params = instance.params
    arity = params.arity(layer)
    start = params.layer_start(layer)
    first_path = instance.block_vectors(layer, blocks_path)
    first_cat = instance.block_vectors(layer, blocks_cat)
    node_path = blocks_path.astype(np.int64)
    node_spine = blocks_cat.astype(np.int64)
    result = np.zeros(path_digits.shape, dtype=bool)
    for height in range(params.depth(layer)):
        depth = start + height + 1
        legs = node_spine[:, None] * arity + np.arange(arity)[None, :]
        node_path = node_path * arity + path_digits[:, height]
        x_path = instance.edge_draws(depth, node_path)
        x_legs = instance.edge_draws(depth, legs)
        same_first = first_path[:, height] == first_cat[:, height]
        result[:, height] = same_first & (x_legs == x_path[:, None]).any(
            axis=1)
        node_spine = node_spine * arity + spine_digits[:, height]
    return result


def verify_probing_code(instance, pair_budget, seed, batch=4096):
    """
    Samples, per layer, pairs of a block path and a caterpillar in a
    different block (cross-block) and in the same block (same-block).

    :returns: List of :class:`ProbingIntersectionReport`, one per layer.
    """
    if pair_budget < 1:
        raise DownClosedInputError("The pair budget must be at least 1.")
    params = instance.params
    if params.total_nodes() > MASK64 // 2:
        raise DownClosedCapacityError(
            "Sampled verification needs node ordinals below 2**63; the "
            "instance has %i nodes." % params.total_nodes())
    reports = []
    r_L = params.r(params.L)
    for layer in params.layers:
        rng = seeded_generator(seed, "probing-pairs", layer)
        blocks = params.block_count(layer)
        arity, depth = params.arity(layer), params.depth(layer)
        cross, same = collections.Counter(), collections.Counter()
        todo_cross = pair_budget // 2 if blocks >= 2 else 0
        todo_same = pair_budget - todo_cross
        while todo_cross > 0 or todo_same > 0:
            if todo_cross > 0:
                count = min(batch, todo_cross)
                todo_cross -= count
                a = rng.integers(0, blocks, size=count)
                b = (a + rng.integers(1, blocks, size=count)) % blocks
                overlap = _overlaps(
                    instance, layer, a, b,
                    rng.integers(0, arity, size=(count, depth)),
                    rng.integers(0, arity, size=(count, depth)))
                cross.update(overlap.sum(axis=1).tolist())
            if todo_same > 0:
                count = min(batch, todo_same)
                todo_same -= count
                a = rng.integers(0, blocks, size=count)
                path = rng.integers(0, arity, size=(count, depth))
                spine = rng.integers(0, arity, size=(count, depth))
                # Half of the pairs share a random prefix of the spine.
                keep = rng.integers(0, depth + 1, size=count)
                prefix = np.arange(depth)[None, :] < keep[:, None]
                path = np.where(prefix, spine, path)
                overlap = _overlaps(instance, layer, a, a, path, spine)
                diverged = np.cumsum(path != spine, axis=1) > 0
                first_divergence = np.argmax(path != spine, axis=1)
                beyond = diverged & (np.arange(depth)[None, :] >
                                     first_divergence[:, None])
                same.update((overlap & beyond).sum(axis=1).tolist())
        bound_cross, bound_same = params.d_before(layer), params.d(layer)
        reports.append(ProbingIntersectionReport(
            layer=layer, pairs=sum(cross.values()) + sum(same.values()),
            cross_histogram=dict(cross), same_histogram=dict(same),
            max_cross=max(cross) if cross else None,
            max_same=max(same) if same else None,
            bound_cross=bound_cross, bound_same=bound_same,
            cross_violations=sum(_j for _i, _j in cross.items()
                                 if _i > bound_cross),
            same_violations=sum(_j for _i, _j in same.items()
                                if _i > bound_same),
            cross_union_bound=_bound(r_L ** 3 / params.p, bound_cross + 1),
            same_union_bound=_bound(r_L ** 4 / params.p, bound_same + 1)))
    return reports


def sample_caterpillars(instance, count, seed):
    """
    ``count`` distinct caterpillars: the first-child spine followed by
    random ones. All caterpillars are returned if there are at most
    ``count``.

    :returns: Tuple ``(caterpillars, exhaustive)``.
    """
    total = math.prod(instance.params.level_arity(_i)
                      for _i in range(instance.params.total_depth))
    if total <= count:
        return [Caterpillar.from_spine(instance, _i)
                for _i in all_spines(instance)], True
    rng = seeded_random(seed, "caterpillars")
    spines = [(0,) * instance.params.total_depth]
    seen = set(spines)
    while len(spines) < count:
        spine = random_spine(instance, rng)
        if spine not in seen:
            seen.add(spine)
            spines.append(spine)
    return [Caterpillar.from_spine(instance, _i) for _i in spines], False


def probing_trial(instance, caterpillars, trial_seed,
                  path_samples=DEFAULT_PATH_SAMPLES):
    """
    One realization scored by adaptive greedy and by every caterpillar.
    """
    row = collections.OrderedDict()
    row["adaptive"] = run_adaptive_greedy(instance, trial_seed).value
    realization = ProbingRealization(instance, trial_seed)
    rng = seeded_random(trial_seed, "inner-paths")
    for index, caterpillar in enumerate(caterpillars):
        probed = np.array(caterpillar_elements(instance, caterpillar),
                          dtype=np.int64)
        selected = probed[realization.is_active(probed)]
        if instance.materialized:
            value, _ = exact_inner_value(instance, selected)
        else:
            value, _ = restricted_inner_value(instance, caterpillar,
                                              selected, rng, path_samples)
        row["caterpillar-%i" % index] = value
    return row


def estimate_adaptivity_gap(params, trials, caterpillar_samples, seed,
                            trial_map=None):
    """
    Mean adaptive greedy value against the best of the sampled caterpillars.
    Every realization is shared by all policies.

    :returns: Tuple of :class:`~downclosed.tools.stats_helpers.GapStats` and
        the per-trial rows. ``lower_bound`` is set unless every caterpillar
        was evaluated exactly.
    """
    if trials < 1:
        raise DownClosedInputError("Cannot estimate a gap from zero trials.")
    if caterpillar_samples < 1:
        raise DownClosedInputError("At least one caterpillar is required.")
    instance = gen_probing_instance(params, derive_seed(seed, "instance"))
    caterpillars, exhaustive = sample_caterpillars(
        instance, caterpillar_samples, seed)
    arguments = [(instance, caterpillars, derive_seed(seed, "trial", _i))
                 for _i in range(trials)]
    rows = (trial_map or serial_map)(probing_trial, arguments)
    keys = ["caterpillar-%i" % _i for _i in range(len(caterpillars))]
    lower_bound = not (exhaustive and instance.materialized)
    return summarize_gap(rows, "adaptive", keys, lower_bound=lower_bound), \
        rows


class TinyProbingProblem(collections.namedtuple(
        "TinyProbingProblem",
        ["values", "probabilities", "outer_sets", "inner_sets",
         "elements"])):
    """
    Explicit small probing problem over element positions
    ``0 .. len(values) - 1``.
    """
    pass


def to_tiny_problem(instance):
    """
    Converts a materialized instance into a :class:`TinyProbingProblem`.
    """
    instance.require_materialized("The explicit conversion")
    elements = sorted(set(int(_j) for _i in instance.level_elements
                          for _j in _i.tolist()))
    position = dict((_j, _i) for _i, _j in enumerate(elements))
    q = instance.params.activation_prob

    def relabel(sets):
        return tuple(frozenset(position[_j] for _j in _i) for _i in sets)

    return TinyProbingProblem(
        values=tuple(instance.value_if_active(_i) for _i in elements),
        probabilities=tuple([q] * len(elements)),
        outer_sets=relabel(instance.outer_oracle().maximal_sets()),
        inner_sets=relabel(instance.inner_oracle().maximal_sets()),
        elements=tuple(elements))
