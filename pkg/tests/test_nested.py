import itertools
import random

import pytest

from sweepbdd import (
    AND,
    Bdd,
    FALSE_UID,
    NestingPolicy,
    Node,
    OR,
    Stats,
    TRUE_UID,
    gc_sweep,
    make_const,
    nested_sweep,
    product_sweep,
    terminal,
    transpose,
    uid,
)
from sweepbdd.core import NIL
from sweepbdd.nested import MISSING, normalize_targets
from sweepbdd.oracle import Oracle, truth_table, tt_exists

from conftest import rand_function


def oracle_exists(orc, ref, xs):
    return orc.to_bdd(orc.df_exists(ref, frozenset(xs)))


def all_policies(levels, op=OR):
    for ta, bo, rs in itertools.product((True, False), repeat=3):
        yield NestingPolicy(
            tuple(levels),
            op,
            terminal_arcs=ta,
            bail_out=bo,
            use_root_sorter=rs,
        )


def test_single_nesting_level_xor_shape(oracle):
    # quantifying the deepest level of x0 XOR x1 ors both cofactors: T
    ref = oracle.df_apply(oracle.var(0), oracle.var(1), (False, True, True, False))
    f = oracle.to_bdd(ref)
    out = nested_sweep(transpose(f), NestingPolicy((1,), OR))
    assert out == make_const(True)
    assert out == oracle_exists(oracle, ref, {1})


def test_absorbing_collapse():
    # every request at the nesting level hits the absorbing terminal
    f = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), uid(1, 1)),
            Node(uid(1, 0), FALSE_UID, TRUE_UID),
            Node(uid(1, 1), TRUE_UID, FALSE_UID),
        ],
        uid(0, 0),
    )
    out = nested_sweep(transpose(f), NestingPolicy((1,), OR))
    assert out == make_const(True)


def test_copies_above_and_below(oracle):
    # nesting level in the middle; levels above and below survive untouched
    rng = random.Random(97)
    for _ in range(40):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant or len(labels) < 2:
            continue
        x = labels[len(labels) // 2]
        got = nested_sweep(transpose(f), NestingPolicy((x,), OR))
        assert got == oracle_exists(oracle, ref, {x})


def test_multiple_nesting_levels(oracle):
    rng = random.Random(101)
    for _ in range(60):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        k = rng.randint(1, min(4, len(labels)))
        xs = sorted(rng.sample(labels, k))
        got = nested_sweep(transpose(f), NestingPolicy(tuple(xs), OR))
        assert got == oracle_exists(oracle, ref, xs)


def test_forall_via_and(oracle):
    rng = random.Random(103)
    for _ in range(30):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = sorted(rng.sample(labels, min(2, len(labels))))
        got = nested_sweep(transpose(f), NestingPolicy(tuple(xs), AND))
        want = oracle.to_bdd(oracle.df_exists(ref, frozenset(xs), conjunct=True))
        assert got == want


def test_toggle_matrix_is_bit_identical(oracle):
    rng = random.Random(107)
    for _ in range(30):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = sorted(rng.sample(labels, min(3, len(labels))))
        results = {
            nested_sweep(transpose(f), pol) for pol in all_policies(xs)
        }
        assert len(results) == 1
        assert results.pop() == oracle_exists(oracle, ref, xs)


def test_sweep_accounting_identity(oracle):
    rng = random.Random(109)
    for _ in range(30):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = sorted(rng.sample(labels, min(3, len(labels))))
        stats = Stats()
        nested_sweep(transpose(f), NestingPolicy(tuple(xs), OR), stats)
        assert (
            stats.inner_sweeps_invoked + stats.inner_sweeps_skipped == len(xs)
        )
        assert stats.requests_modifying <= stats.requests_total
        assert stats.requests_terminal <= stats.requests_total


def test_skip_path_runs_on_untouched_levels():
    # quantified level absent from the function: all requests preserve, the
    # sweep is skipped, the output is the input
    f = Bdd(
        [
            Node(uid(0, 0), uid(2, 0), TRUE_UID),
            Node(uid(2, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    stats = Stats()
    out = nested_sweep(transpose(f), NestingPolicy((1,), OR), stats)
    assert out == f
    assert stats.inner_sweeps_skipped == 1
    assert stats.inner_sweeps_invoked == 0


def test_bail_out_gc_on_last_level(oracle):
    # the level-1 node ors an internal subtree with T: the shortcut kills
    # the subtree, so the final sweep must be the reachability copy, not a
    # skip, or dead nodes would survive
    f = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), uid(2, 0)),
            Node(uid(1, 0), uid(2, 0), TRUE_UID),
            Node(uid(2, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    ref = oracle.from_bdd(f)
    stats = Stats()
    got = nested_sweep(transpose(f), NestingPolicy((1,), OR), stats)
    assert got == oracle_exists(oracle, ref, {1})
    assert stats.inner_sweeps_invoked == 1  # ran as gc, not skipped
    # and with bail-out off the op sweep gives the identical file
    assert got == nested_sweep(
        transpose(f), NestingPolicy((1,), OR, bail_out=False)
    )


def test_multi_rooted_inner_sweep(oracle):
    # two level-1 nodes force the request pool to seed a multi-rooted inner
    # sweep; no algorithm change is needed
    f = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), uid(1, 1)),
            Node(uid(1, 0), uid(2, 0), uid(3, 0)),
            Node(uid(1, 1), uid(3, 0), uid(2, 0)),
            Node(uid(2, 0), FALSE_UID, uid(3, 0)),
            Node(uid(3, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    ref = oracle.from_bdd(f)
    for xs in ({1}, {1, 2}, {2}, {1, 2, 3}):
        got = nested_sweep(transpose(f), NestingPolicy(tuple(xs), OR))
        assert got == oracle_exists(oracle, ref, xs)


def test_route_terminal_resolution_rules():
    # or: F is neutral, T absorbs
    resolved, tup, killed = normalize_targets(OR, (FALSE_UID, TRUE_UID))
    assert resolved == TRUE_UID and not killed
    resolved, tup, killed = normalize_targets(OR, (TRUE_UID, uid(3, 0)))
    assert resolved == TRUE_UID and killed
    resolved, tup, killed = normalize_targets(OR, (FALSE_UID, FALSE_UID))
    assert resolved == FALSE_UID
    # neutral terminal drops; duplicates merge; result is sorted
    resolved, tup, _ = normalize_targets(OR, (uid(4, 1), FALSE_UID, uid(3, 0), uid(4, 1)))
    assert resolved is None and tup == (uid(3, 0), uid(4, 1))
    # and: duals
    resolved, _, killed = normalize_targets(AND, (FALSE_UID, uid(3, 0)))
    assert resolved == FALSE_UID and killed
    resolved, tup, _ = normalize_targets(AND, (TRUE_UID, uid(3, 0)))
    assert resolved is None and tup == (uid(3, 0),)


def test_gc_sweep_copies_reachable(oracle):
    rng = random.Random(113)
    for _ in range(20):
        ref, _ = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        from sweepbdd import reduce

        out = gc_sweep([(f.root, MISSING, NIL, False)], f.nodes)
        assert reduce(out) == f
        # unreachable second subtree is dropped
        g_nodes = list(f.nodes)
        extra = Node(uid(20, 0), FALSE_UID, TRUE_UID)
        g_nodes.append(extra)
        out = gc_sweep([(f.root, MISSING, NIL, False)], g_nodes)
        assert out.node_count() == f.node_count()


def test_gc_equals_product_when_everything_preserved(oracle):
    from sweepbdd import reduce

    rng = random.Random(127)
    for _ in range(20):
        ref, _ = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        seeds = [(f.root, MISSING, NIL, False)]
        a = gc_sweep(seeds, f.nodes)
        b = product_sweep(f.nodes, seeds, OR)
        assert reduce(a) == reduce(b)
