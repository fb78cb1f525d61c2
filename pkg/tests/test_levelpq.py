import random

import pytest

from sweepbdd import HeapLevelPQ, LevelPQ, label_of, uid


def lv(e):
    return e[0] >> 40


def test_pull_order_within_level():
    q = LevelPQ(lv)
    for u in (uid(2, 0), uid(1, 3), uid(1, 0)):
        q.push((u,))
    assert q.setup_next_level() == 1
    assert q.pull() == (uid(1, 0),)
    assert q.pull() == (uid(1, 3),)
    assert q.empty_level()
    assert q.setup_next_level() == 2
    assert q.pull() == (uid(2, 0),)


def test_empty_queue_reports_exhaustion():
    q = LevelPQ(lv)
    assert q.setup_next_level() is None
    assert q.setup_next_level(stop_label=4) == 4
    assert q.empty_level()


@pytest.mark.parametrize("cls", [LevelPQ, HeapLevelPQ])
@pytest.mark.parametrize("descending", [False, True])
def test_pull_all_equals_sort_oracle(cls, descending):
    rng = random.Random(31)
    items = [
        (uid(rng.randrange(20), rng.randrange(1000)), rng.randrange(100))
        for _ in range(10**5)
    ]
    q = cls(lv, descending=descending, arity=2)
    for e in items:
        q.push(e)
    got = []
    while True:
        if q.setup_next_level() is None:
            break
        while not q.empty_level():
            got.append(q.pull())
    expected = sorted(items, key=lambda e: (-lv(e), e) if descending else (lv(e), e))
    # grouping by level then element order == global sort grouped by level
    if descending:
        expected = sorted(items)
        by_level = {}
        for e in expected:
            by_level.setdefault(lv(e), []).append(e)
        expected = [
            e for lbl in sorted(by_level, reverse=True) for e in by_level[lbl]
        ]
    assert got == expected


@pytest.mark.parametrize("cls", [LevelPQ, HeapLevelPQ])
def test_monotonicity_violation_is_assertion(cls):
    q = cls(lv)
    q.push((uid(1, 0),))
    q.setup_next_level()
    with pytest.raises(AssertionError):
        q.push((uid(1, 5),))
    with pytest.raises(AssertionError):
        q.push((uid(0, 0),))


def test_bucket_and_heap_agree():
    rng = random.Random(37)
    items = [(uid(rng.randrange(8), rng.randrange(50)), i) for i in range(2000)]
    seqs = []
    for cls in (LevelPQ, HeapLevelPQ):
        q = cls(lv, arity=2)
        for e in items:
            q.push(e)
        got = []
        while q.setup_next_level() is not None:
            while not q.empty_level():
                got.append(q.pull())
        seqs.append(got)
    assert seqs[0] == seqs[1]


def test_merge_with_sorted_side_list():
    # merging queue output with a pre-sorted side list per level equals one
    # globally sorted per-level stream
    rng = random.Random(41)
    queued = [(uid(rng.randrange(6), rng.randrange(30)), 0) for _ in range(500)]
    side = sorted(
        (uid(rng.randrange(6), rng.randrange(30)), 1) for _ in range(300)
    )
    q = LevelPQ(lv, arity=2)
    for e in queued:
        q.push(e)
    merged = []
    si = 0
    while True:
        nxt = q.next_level()
        side_lvl = lv(side[si]) if si < len(side) else None
        if nxt is None and side_lvl is None:
            break
        lvl = min(x for x in (nxt, side_lvl) if x is not None)
        q.setup_next_level(stop_label=lvl)
        while si < len(side) and lv(side[si]) == lvl or not q.empty_level():
            take_side = si < len(side) and lv(side[si]) == lvl and (
                q.empty_level() or side[si] <= q.peek()
            )
            if take_side:
                merged.append(side[si])
                si += 1
            elif not q.empty_level():
                merged.append(q.pull())
            else:
                break
    by_level = {}
    for e in queued + list(side):
        by_level.setdefault(lv(e), []).append(e)
    expected = [e for lbl in sorted(by_level) for e in sorted(by_level[lbl])]
    assert merged == expected


def test_size_tracks_pushes_minus_pulls():
    q = LevelPQ(lv)
    for i in range(5):
        q.push((uid(3, i),))
    assert len(q) == 5
    q.setup_next_level()
    q.pull()
    assert len(q) == 4
