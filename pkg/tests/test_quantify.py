import itertools
import random

import pytest

from sweepbdd import (
    AND,
    Bdd,
    FALSE_UID,
    Node,
    OR,
    QuantConfig,
    Stats,
    TRANSPOSITIONS,
    TRUE_UID,
    apply,
    exists,
    exists_one_by_one,
    forall,
    forall_one_by_one,
    make_const,
    make_var,
    quantify_single,
    reduce,
    transpose,
    transpose_deepest,
    transpose_partial,
    transpose_prune_top,
    transpose_repeated_partial,
    uid,
)
from sweepbdd.oracle import Oracle, truth_table, tt_exists, tt_forall

from conftest import arcfile_parts, rand_function


def oracle_exists(orc, ref, xs, conjunct=False):
    return orc.to_bdd(orc.df_exists(ref, frozenset(xs), conjunct))


def test_exists_trivia():
    assert exists(make_const(True), {0, 5}) == make_const(True)
    assert exists(make_const(False), {1}) == make_const(False)
    f = make_var(2)
    assert exists(f, set()) == f
    assert exists(f, {7}) == f  # disjoint from the support


def test_exists_drops_conjoined_var(oracle):
    f = apply(make_var(0), make_var(1), AND)
    assert exists(f, {1}) == make_var(0)
    assert forall(f, {1}) == make_const(False)


def test_quantify_single_fixture(fig_bdd):
    assert quantify_single(fig_bdd, 1) == make_const(True)
    assert quantify_single(fig_bdd, 7) == fig_bdd  # absent level unchanged


def test_quantify_single_matches_oracle(oracle):
    rng = random.Random(131)
    for _ in range(60):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        i = rng.choice(labels)
        assert quantify_single(f, i) == oracle_exists(oracle, ref, {i})


def test_one_by_one_fold_equals_exists(oracle):
    rng = random.Random(137)
    for _ in range(50):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        k = rng.randint(0, min(4, len(labels)))
        xs = set(rng.sample(labels, k))
        assert exists_one_by_one(f, xs) == exists(f, xs)
        assert forall_one_by_one(f, xs) == forall(f, xs)


def test_exists_matches_truth_table_projection(oracle):
    rng = random.Random(139)
    for _ in range(60):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        k = rng.randint(0, min(4, len(labels)))
        xs = set(rng.sample(labels, k))
        bits = truth_table(f, labels)
        got = exists(f, xs)
        assert truth_table(got, labels) == tt_exists(bits, labels, xs)
        got_all = forall(f, xs)
        assert truth_table(got_all, labels) == tt_forall(bits, labels, xs)


def test_policy_soundness_matrix(oracle):
    rng = random.Random(149)
    for _ in range(25):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        k = rng.randint(1, min(4, len(labels)))
        xs = set(rng.sample(labels, k))
        want = oracle_exists(oracle, ref, xs)
        for pol in TRANSPOSITIONS:
            got = exists(f, xs, QuantConfig(transposition=pol))
            assert got == want, pol


def test_prune_top_rewires(oracle):
    # node {alpha, T} on a quantified level collapses to T for its parents
    f = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), uid(2, 0)),
            Node(uid(1, 0), uid(2, 0), TRUE_UID),
            Node(uid(2, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    a = transpose_prune_top(f, {1})
    assert 1 not in a.var_levels()
    assert reduce(a) == oracle_exists(oracle, oracle.from_bdd(f), {1})
    # node {alpha, F} is skipped to alpha
    g = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), TRUE_UID),
            Node(uid(1, 0), uid(2, 0), FALSE_UID),
            Node(uid(2, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    a = transpose_prune_top(g, {1})
    assert 1 not in a.var_levels()
    assert reduce(a) == oracle_exists(oracle, oracle.from_bdd(g), {1})


def test_prune_top_disjoint_is_plain_transpose(oracle):
    rng = random.Random(151)
    for _ in range(20):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = {lbl for lbl in range(8) if lbl not in labels}
        assert arcfile_parts(transpose_prune_top(f, xs)) == arcfile_parts(
            transpose(f)
        )


def test_prune_top_internal_children_keep_node(oracle):
    # both children internal: pruning cannot fire and the node survives in
    # the transposed output, left for the nested sweep
    f = Bdd(
        [
            Node(uid(0, 0), uid(1, 0), uid(3, 0)),
            Node(uid(1, 0), uid(2, 0), uid(3, 0)),
            Node(uid(2, 0), FALSE_UID, uid(3, 0)),
            Node(uid(3, 0), FALSE_UID, TRUE_UID),
        ],
        uid(0, 0),
    )
    a = transpose_prune_top(f, {1})
    assert 1 in a.var_levels()
    assert exists(f, {1}, QuantConfig(transposition="prune_top")) == exists(f, {1})


def test_deepest_var_single_level_equals_quantify_single(oracle):
    rng = random.Random(157)
    for _ in range(30):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        x = rng.choice(labels)
        got = exists(f, {x}, QuantConfig(transposition="deepest_var"))
        assert got == quantify_single(f, x)


def test_deepest_var_picks_max(oracle):
    f = oracle.to_bdd(
        oracle.df_apply(
            oracle.var(1),
            oracle.df_apply(oracle.var(3), oracle.var(5), OR.table),
            AND.table,
        )
    )
    a, remaining = transpose_deepest(f, {1, 5, 7})
    assert 5 not in a.var_levels()
    assert remaining == (1,)


def test_partial_request_algebra():
    from sweepbdd.nested import normalize_targets

    # (F, a) x (a, b) -> tuple (a, b), no fresh node needed
    a, b = uid(5, 0), uid(5, 1)
    resolved, tup, _ = normalize_targets(OR, (FALSE_UID, a, a, b))
    assert resolved is None and tup == (a, b)
    # T anywhere resolves the whole request
    resolved, _, _ = normalize_targets(OR, (a, TRUE_UID, b, FALSE_UID))
    assert resolved == TRUE_UID


def test_partial_creates_split_node(oracle):
    # two distinct level-1 nodes with four distinct internal children force
    # a 4-tuple, so the sweep re-emits a level-1 node with the two halves
    nodes = [
        Node(uid(0, 0), uid(1, 0), uid(1, 1)),
        Node(uid(1, 0), uid(2, 0), uid(2, 1)),
        Node(uid(1, 1), uid(2, 2), uid(2, 3)),
        Node(uid(2, 0), FALSE_UID, TRUE_UID),
        Node(uid(2, 1), TRUE_UID, FALSE_UID),
        Node(uid(2, 2), uid(3, 0), FALSE_UID),
        Node(uid(2, 3), FALSE_UID, uid(3, 0)),
        Node(uid(3, 0), FALSE_UID, TRUE_UID),
    ]
    f = Bdd(nodes, uid(0, 0))
    a, remaining = transpose_partial(f, {0, 1})
    assert remaining == (1,)  # level 0 resolved, level 1 re-emitted
    assert exists(f, {0, 1}, QuantConfig(transposition="partial")) == (
        oracle_exists(oracle, oracle.from_bdd(f), {0, 1})
    )


def test_partial_obeys_product_bound(oracle):
    rng = random.Random(163)
    for _ in range(30):
        ref, labels = rand_function(rng, oracle, 7)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = set(rng.sample(labels, min(3, len(labels))))
        stats = Stats()
        a, _ = transpose_partial(f, xs, stats=stats)
        n = f.node_count()
        assert a.node_count() <= n * n + 2
        assert stats.requests_total <= 2 * n * n + 2


def test_repeated_partial_delta_one_is_partial(oracle):
    rng = random.Random(167)
    for _ in range(20):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = set(rng.sample(labels, min(3, len(labels))))
        a1, r1 = transpose_partial(f, xs)
        a2, r2 = transpose_repeated_partial(f, xs, epsilon=0.5, delta=1)
        assert arcfile_parts(a1) == arcfile_parts(a2) and r1 == r2


def test_repeated_partial_exits_when_done(oracle):
    f = apply(make_var(0), make_var(1), AND)
    a, remaining = transpose_repeated_partial(f, {0, 1}, 0.5, 10)
    assert remaining == ()


def test_config_validation():
    with pytest.raises(ValueError):
        QuantConfig(transposition="bogus")
    with pytest.raises(ValueError):
        QuantConfig(epsilon=0)
    with pytest.raises(ValueError):
        QuantConfig(delta=0)


def test_full_toggle_and_policy_grid_small(oracle):
    rng = random.Random(173)
    for _ in range(5):
        ref, labels = rand_function(rng, oracle, 6)
        f = oracle.to_bdd(ref)
        if f.is_constant:
            continue
        xs = set(rng.sample(labels, min(3, len(labels))))
        want = oracle_exists(oracle, ref, xs)
        assert exists_one_by_one(f, xs) == want
        for pol in TRANSPOSITIONS:
            for ta, bo, rs in itertools.product((True, False), repeat=3):
                cfg = QuantConfig(
                    transposition=pol,
                    terminal_arcs=ta,
                    bail_out=bo,
                    use_root_sorter=rs,
                )
                assert exists(f, xs, cfg) == want
