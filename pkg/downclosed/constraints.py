#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Downward-closed feasibility constraints.

Three kinds are supported: explicit families of maximal sets, root-leaf
paths of a rooted tree whose edges carry element sets and caterpillars
(root-leaf spines plus every edge hanging off a spine node) of such a tree.

>>> oracle = ExplicitOracle(5, [[1, 2], [3, 4]])
>>> oracle.is_feasible({1, 2}), oracle.is_feasible({1, 3})
(True, False)
>>> oracle.is_feasible(set())
True

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
from abc import ABCMeta, abstractmethod

import collections

from downclosed import DownClosedInputError, DownClosedCapacityError

DEFAULT_ENUMERATION_CAP = 10 ** 6

EXPLICIT = "explicit"
TREE_PATH = "tree-path"
CATERPILLAR = "caterpillar"


def antichain(sets):
    """
    Removes duplicates and every set strictly contained in another one while
    keeping the order of first appearance.

    >>> [sorted(_i) for _i in antichain([{1}, {1, 2}, {3}, {1, 2}])]
    [[1, 2], [3]]
    """
    sets = [frozenset(_i) for _i in sets]
    result = []
    seen = set()
    for candidate in sets:
        if candidate in seen:
            continue
        seen.add(candidate)
        if any(candidate < other for other in sets):
            continue
        result.append(candidate)
    return result


class FeasibilityOracle(object, metaclass=ABCMeta):
    """
    Abstract base class of all downward-closed set systems over ``[n]``.
    """
    kind = None

    def __init__(self, n):
        self.n = int(n)

    def check_elements(self, elements):
        for _i in elements:
            if not 0 <= _i < self.n:
                raise DownClosedInputError(
                    "Element %s is outside of the ground set [0, %i)." %
                    (_i, self.n))

    @abstractmethod
    def is_feasible(self, elements):
        """
        Determines whether a set of element ids is feasible.

        :param elements: Iterable of element ids in ``[0, n)``.
        :return: bool
        """
        pass

    @abstractmethod
    def maximal_sets(self, cap=DEFAULT_ENUMERATION_CAP):
        """
        The antichain of maximal feasible sets as a list of frozensets.

        :param cap: Maximum number of sets to enumerate before giving up
            with a :class:`~downclosed.DownClosedCapacityError`.
        """
        pass

    @abstractmethod
    def __str__(self):
        pass

    def __ne__(self, other):
        return not self.__eq__(other)


class ExplicitOracle(FeasibilityOracle):
    """
    A downward-closed family given by its maximal sets.

    :param n: Ground set size.
    :param sets: Iterable of element id iterables. Non-maximal members are
        dropped unless ``strict`` is set in which case they are an error.
    :param strict: Refuse families that are not antichains.
    """
    kind = EXPLICIT

    def __init__(self, n, sets, strict=False):
        super(ExplicitOracle, self).__init__(n)
        sets = [frozenset(int(_j) for _j in _i) for _i in sets]
        for _i, s in enumerate(sets):
            if any(not 0 <= _j < self.n for _j in s):
                raise DownClosedInputError(
                    "Maximal set %i contains elements outside of [0, %i)." %
                    (_i, self.n))
        reduced = antichain(sets)
        if strict and len(reduced) != len(sets):
            for _i, first in enumerate(sets):
                for _j, second in enumerate(sets):
                    if _i != _j and first <= second:
                        raise DownClosedInputError(
                            "The maximal set family is not an antichain: set "
                            "%i is contained in set %i." % (_i, _j))
        if not reduced:
            reduced = [frozenset()]
        self.sets = tuple(reduced)

    def __eq__(self, other):
        return isinstance(other, ExplicitOracle) and \
            self.n == other.n and self.sets == other.sets

    def __hash__(self):
        return hash((self.n, self.sets))

    def __str__(self):
        return "Explicit family with %i maximal set%s on %i elements" % (
            len(self.sets), "" if len(self.sets) == 1 else "s", self.n)

    def is_feasible(self, elements):
        elements = frozenset(elements)
        self.check_elements(elements)
        return any(elements <= _i for _i in self.sets)

    def maximal_sets(self, cap=DEFAULT_ENUMERATION_CAP):
        if len(self.sets) > cap:
            raise DownClosedCapacityError(
                "The family has %i maximal sets which exceeds the enumeration "
                "cap of %i." % (len(self.sets), cap))
        return list(self.sets)

    def sets_containing(self, elements):
        elements = frozenset(elements)
        return [_i for _i in self.sets if elements <= _i]

    def restrict(self, elements):
        """
        The family induced on ``elements``, re-indexed densely in the given
        order.
        """
        elements = list(elements)
        self.check_elements(elements)
        index = dict((_j, _i) for _i, _j in enumerate(elements))
        return ExplicitOracle(
            len(elements),
            [[index[_j] for _j in s if _j in index] for s in self.sets])

    def with_ground_set(self, n):
        """
        Same family over a larger ground set. The added elements belong to
        no maximal set.
        """
        if n < self.n:
            raise DownClosedInputError("Cannot shrink the ground set.")
        return ExplicitOracle(n, self.sets)


class RootedTree(object):
    """
    A rooted tree whose edges carry element sets. Node 0 is the root and
    edge ``v`` is the edge from ``parents[v]`` to ``v``.

    >>> tree = RootedTree.complete(2, 2)
    >>> len(tree), tree.leaves()
    (7, [3, 4, 5, 6])
    >>> tree.path_to_root(5)
    [5, 2, 0]
    """
    def __init__(self, parents, node_elements):
        parents = [int(_i) for _i in parents]
        if not parents or parents[0] != -1:
            raise DownClosedInputError("Node 0 must be the root.")
        if len(node_elements) != len(parents):
            raise DownClosedInputError(
                "Every node needs an element set, the root an empty one.")
        self.parents = tuple(parents)
        self.node_elements = tuple(frozenset(_i) for _i in node_elements)
        children = [[] for _ in parents]
        depth = [0] * len(parents)
        for node in range(1, len(parents)):
            parent = parents[node]
            if not 0 <= parent < node:
                raise DownClosedInputError(
                    "Parent of node %i must be an earlier node." % node)
            children[parent].append(node)
            depth[node] = depth[parent] + 1
        self.children = tuple(tuple(_i) for _i in children)
        self.depth = tuple(depth)
        element_nodes = collections.defaultdict(list)
        for node, elements in enumerate(self.node_elements):
            for element in elements:
                element_nodes[element].append(node)
        self.element_nodes = dict(
            (_i, tuple(_j)) for _i, _j in element_nodes.items())
        self.injective = all(len(_i) == 1 for _i in element_nodes.values())

    @classmethod
    def complete(cls, arity, depth, node_elements=None):
        """
        The complete ``arity``-ary tree of the given depth in breadth first
        numbering. Unless given, edge ``v`` carries the single element
        ``v - 1``.
        """
        parents = [-1]
        frontier = [0]
        for _ in range(depth):
            next_frontier = []
            for node in frontier:
                for _ in range(arity):
                    parents.append(node)
                    next_frontier.append(len(parents) - 1)
            frontier = next_frontier
        if node_elements is None:
            node_elements = [()] + [(_i - 1,) for _i in range(1, len(parents))]
        return cls(parents, node_elements)

    def __len__(self):
        return len(self.parents)

    def __eq__(self, other):
        return isinstance(other, RootedTree) and \
            self.parents == other.parents and \
            self.node_elements == other.node_elements

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.parents, self.node_elements))

    def leaves(self):
        return [_i for _i, _j in enumerate(self.children) if not _j]

    def path_to_root(self, node):
        path = [node]
        while self.parents[path[-1]] != -1:
            path.append(self.parents[path[-1]])
        return path

    def is_ancestor(self, ancestor, node):
        """
        True if ``ancestor`` lies on the path from ``node`` to the root
        (a node is its own ancestor).
        """
        while self.depth[node] > self.depth[ancestor]:
            node = self.parents[node]
        return node == ancestor

    def is_chain(self, nodes):
        """
        True if the nodes are pairwise ancestor-related, i.e. all of them lie
        on one root-leaf path.
        """
        nodes = sorted(set(nodes), key=lambda _i: self.depth[_i])
        return all(self.is_ancestor(_i, _j) for _i, _j in
                   zip(nodes[:-1], nodes[1:]))

    def root_leaf_paths(self, cap=DEFAULT_ENUMERATION_CAP):
        """
        All root-leaf paths as node lists starting at the root.
        """
        leaves = self.leaves()
        if len(leaves) > cap:
            raise DownClosedCapacityError(
                "The tree has %i root-leaf paths which exceeds the "
                "enumeration cap of %i." % (len(leaves), cap))
        return [self.path_to_root(_i)[::-1] for _i in leaves]

    def path_elements(self, path):
        return frozenset().union(*[self.node_elements[_i] for _i in path])

    def caterpillar_elements(self, path):
        """
        Elements of the spine ``path`` together with all its legs: the
        edges to every child of every spine node.
        """
        result = set()
        for node in path:
            for child in self.children[node]:
                result.update(self.node_elements[child])
        return frozenset(result)

    def ground_set_size(self):
        elements = [_j for _i in self.node_elements for _j in _i]
        return max(elements) + 1 if elements else 0


class _TreeOracle(FeasibilityOracle):
    def __init__(self, tree, n=None):
        super(_TreeOracle, self).__init__(
            tree.ground_set_size() if n is None else n)
        self.tree = tree

    def __eq__(self, other):
        return type(self) is type(other) and self.n == other.n and \
            self.tree == other.tree

    def __hash__(self):
        return hash((self.kind, self.n, self.tree))

    def __str__(self):
        return "%s constraint on a tree with %i nodes and %i elements" % (
            self.kind, len(self.tree), self.n)

    @abstractmethod
    def _covered(self, path):
        pass

    @abstractmethod
    def _chain_nodes(self, nodes):
        pass

    def is_feasible(self, elements):
        elements = frozenset(elements)
        self.check_elements(elements)
        if not elements:
            return True
        if any(_i not in self.tree.element_nodes for _i in elements):
            return False
        if self.tree.injective:
            nodes = [self.tree.element_nodes[_i][0] for _i in elements]
            return self.tree.is_chain(self._chain_nodes(nodes))
        return self._search(0, [0], elements)

    def _search(self, node, path, remaining):
        # Depth first over root-leaf paths; stops as soon as one covers.
        if not self.tree.children[node]:
            return remaining <= self._covered(path)
        for child in self.tree.children[node]:
            path.append(child)
            if self._search(child, path, remaining):
                path.pop()
                return True
            path.pop()
        return False

    def maximal_sets(self, cap=DEFAULT_ENUMERATION_CAP):
        return antichain(self._covered(_i)
                         for _i in self.tree.root_leaf_paths(cap=cap))


class TreePathOracle(_TreeOracle):
    """
    A set is feasible if it is contained in the union of the edge sets
    along some root-leaf path.

    >>> oracle = TreePathOracle(RootedTree.complete(2, 3))
    >>> oracle.is_feasible({0, 2}), oracle.is_feasible({0, 1})
    (True, False)
    >>> len(oracle.maximal_sets())
    8
    """
    kind = TREE_PATH

    def _covered(self, path):
        return self.tree.path_elements(path)

    def _chain_nodes(self, nodes):
        return nodes


class CaterpillarOracle(_TreeOracle):
    """
    A set is feasible if it is contained in some caterpillar: a root-leaf
    spine plus all edges leaving a spine node.

    >>> oracle = CaterpillarOracle(RootedTree.complete(2, 2))
    >>> oracle.is_feasible({0, 1, 2, 3}), oracle.is_feasible({2, 4})
    (True, False)
    """
    kind = CATERPILLAR

    def _covered(self, path):
        return self.tree.caterpillar_elements(path)

    def _chain_nodes(self, nodes):
        # Edges hang off spine nodes, so their parents have to form a chain.
        return [self.tree.parents[_i] for _i in nodes]
