import random

import pytest

from sweepbdd import (
    Bdd,
    FALSE_UID,
    Node,
    TRUE_UID,
    uid,
)
from sweepbdd.oracle import Oracle


@pytest.fixture
def fig_bdd():
    """The two-node BDD for x0 OR NOT x1: its node file is
    [{(0,0), (1,0), T}; {(1,0), T, F}]."""
    return Bdd(
        [
            Node(uid(0, 0), uid(1, 0), TRUE_UID),
            Node(uid(1, 0), TRUE_UID, FALSE_UID),
        ],
        uid(0, 0),
    )


@pytest.fixture
def oracle():
    return Oracle()


def rand_function(rng: random.Random, orc: Oracle, max_vars: int = 8):
    """A random function as (oracle ref, labels): pick a label subset, then
    a random truth table over it."""
    k = rng.randint(1, max_vars)
    labels = sorted(rng.sample(range(max_vars), k))
    bits = rng.getrandbits(1 << k)
    ref = orc.from_truth_table(bits, labels)
    return ref, labels


def rand_bdd(rng: random.Random, orc: Oracle, max_vars: int = 8):
    ref, labels = rand_function(rng, orc, max_vars)
    return orc.to_bdd(ref), labels


def arcfile_parts(a):
    """Value view of an ArcFile for equality checks."""
    return (
        [tuple(r) for r in a.internal],
        [tuple(r) for r in a.terminal],
        a.root,
        tuple(a.levels),
    )


def all_assignments(labels):
    labels = list(labels)
    for i in range(1 << len(labels)):
        yield {lbl: bool((i >> j) & 1) for j, lbl in enumerate(labels)}
