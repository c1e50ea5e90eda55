#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Keyed pseudorandomness.

Every random quantity in downclosed is a pure function of a key: the master
seed, a purpose tag and a handful of integer indices. Lazily materialized
constructions ask for codeword coordinates or edge labels only when a policy
touches them, and two calls with the same key always agree.

The mixing function is SplitMix64. The scalar functions work on Python
integers, the ``*_array`` variants on numpy ``uint64`` arrays; both produce
bit-identical results.

>>> keyed_hash(7, "layer", 3) == keyed_hash(7, "layer", 3)
True
>>> keyed_hash(7, "layer", 3) == keyed_hash(7, "layer", 4)
False
>>> int(keyed_hash_array((7, "layer"), [3, 4])[1]) == keyed_hash(7, "layer", 4)
True

:license:
    GNU General Public License, Version 3
    (http://www.gnu.org/copyleft/gpl.html)
"""
import hashlib
import random

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MUL_1 = 0xBF58476D1CE4E5B9
_MUL_2 = 0x94D049BB133111EB

_TWO_POW_MINUS_53 = 1.0 / float(1 << 53)


def _splitmix(z):
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL_2) & MASK64
    return z ^ (z >> 31)


def _splitmix_array(z):
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL_1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL_2)
    return z ^ (z >> np.uint64(31))


def _words(part):
    """
    Turns one key component into a list of 64 bit words.

    Strings are hashed, small non-negative integers are a single word and
    larger integers are split into limbs prefixed by their count.
    """
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return [int.from_bytes(digest[:8], "little")]
    part = int(part)
    if part < 0:
        raise ValueError("Keys must be non-negative integers or strings.")
    if part <= MASK64:
        return [part]
    limbs = []
    while part:
        limbs.append(part & MASK64)
        part >>= 64
    return [len(limbs) | (1 << 63)] + limbs


def keyed_hash(*key):
    """
    Hashes an arbitrary key of strings and non-negative integers to a
    64 bit integer.
    """
    h = 0
    for part in key:
        for word in _words(part):
            h = _splitmix(h ^ word)
    return h


def keyed_hash_array(prefix, *arrays):
    """
    Vectorized counterpart of :func:`keyed_hash`.

    ``keyed_hash_array(prefix, a, b)[i]`` equals
    ``keyed_hash(*prefix, a[i], b[i])`` as long as all array entries are
    smaller than 2**64. The arrays are broadcast against each other.

    :param prefix: Tuple with the scalar leading key components.
    """
    h0 = keyed_hash(*prefix)
    arrays = np.broadcast_arrays(
        *[np.asarray(_i, dtype=np.uint64) for _i in arrays])
    shape = arrays[0].shape if arrays else ()
    h = np.full(shape, h0, dtype=np.uint64).reshape(-1)
    for a in arrays:
        h = _splitmix_array(h ^ a.reshape(-1))
    return h.reshape(shape)


def keyed_uniform(*key):
    """
    Uniform float in [0, 1) determined by the key.
    """
    return (keyed_hash(*key) >> 11) * _TWO_POW_MINUS_53


def keyed_uniform_array(prefix, *arrays):
    h = keyed_hash_array(prefix, *arrays)
    return (h >> np.uint64(11)).astype(np.float64) * _TWO_POW_MINUS_53


def keyed_randbelow(bound, *key):
    """
    Integer in ``range(bound)`` determined by the key.
    """
    return keyed_hash(*key) % bound


def keyed_randbelow_array(bound, prefix, *arrays):
    return (keyed_hash_array(prefix, *arrays) %
            np.uint64(bound)).astype(np.int64)


def derive_seed(master_seed, tag, *index):
    """
    Derives a child seed from (master seed, purpose tag, index...).

    The result fits into 63 bits so it can seed both :mod:`random` and
    :func:`numpy.random.default_rng`.

    >>> derive_seed(1, "trial", 0) == derive_seed(1, "trial", 0)
    True
    >>> derive_seed(1, "trial", 0) == derive_seed(1, "labels", 0)
    False
    """
    return keyed_hash(master_seed, tag, *index) >> 1


def seeded_random(master_seed, tag, *index):
    """
    A :class:`random.Random` instance seeded from a derived seed. Handy when
    arbitrarily large integers have to be drawn.
    """
    return random.Random(derive_seed(master_seed, tag, *index))


def seeded_generator(master_seed, tag, *index):
    """
    A numpy generator seeded from a derived seed.
    """
    return np.random.default_rng(derive_seed(master_seed, tag, *index))
