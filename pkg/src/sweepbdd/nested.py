"""Nested sweeping: one outer bottom-up sweep accumulating the results of
inner top-down/bottom-up sweeps at designated nesting levels.

The routing contract, processed bottom-up with x_j the deepest still-pending
nesting level and x_i the next shallower one:

  * Below x_j the outer sweep reduces normally; a reduced arc s -> t goes to
    the outer forwarding queue when top(s) >= x_j, and otherwise becomes a
    1-target subtree-preserving request for the x_j sweep.
  * At x_j itself every arc into a level node becomes the 2-target request
    s -> (low, high), shortcut through the op's terminal rules.
  * The inner top-down sweep runs the op product over the accumulated deep
    file, seeded by the sorted request pool; its bottom-up half routes each
    reduced arc by the source level: below x_j stays inside the sweep, in
    [x_i, x_j) returns to the outer queue, above x_i seeds the next pool.
  * The inner result replaces the accumulated deep file wholesale, which is
    also what makes the preserving requests double as mark-and-sweep GC.

Optimisations (all on by default, all differentially tested to be
output-invariant): terminal results bypass every pending nesting level; an
all-preserving pool skips its sweep outright unless an earlier top-terminal
shortcut may have orphaned subtrees and no later sweep remains, in which
case a plain reachability copy runs instead of the op product; and the pool
is a sort-once list merged on the fly with the inner queue rather than an
eagerly ordered structure.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import (
    Bdd,
    FALSE_UID,
    NIL,
    Node,
    Stats,
    is_terminal,
    label_of,
    make_const,
    terminal,
    terminal_value,
    uid,
)
from .levelpq import LevelPQ
from .storage import ArcFile, MemoryPolicy, RecordFile
from .sweep import (
    BinOp,
    OR,
    _Cursor,
    canonicalize_level,
    gather_level_slots,
    pair_level_slots,
)

# second-target slot of a 1-target request record
MISSING = -2

ORIGIN_OUTER = 0
ORIGIN_INNER = 1


@dataclass(frozen=True)
class NestingPolicy:
    """Which levels get an inner sweep, with which operator, and which of
    the three optimisations stay enabled."""

    nesting_levels: tuple[int, ...]
    op: BinOp = OR
    terminal_arcs: bool = True
    bail_out: bool = True
    use_root_sorter: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "nesting_levels", tuple(sorted(set(self.nesting_levels)))
        )


def normalize_targets(op: BinOp, items: Iterable[int]):
    """Fold terminal members into an op-product target tuple.

    Returns (resolved_terminal_uid | None, sorted tuple of distinct internal
    uids, killed) where `killed` says an absorbing terminal dropped at least
    one internal sibling (the subtree may now be garbage).
    """
    absorbing = op.absorbing_value
    neutral = op.neutral_value
    assert absorbing is not None and neutral is not None, (
        "quantification needs an op with absorbing and neutral terminals"
    )
    internals = []
    absorbed = False
    for u in items:
        if u >= FALSE_UID:
            if bool(u & 1) == absorbing:
                absorbed = True
        else:
            internals.append(u)
    if absorbed:
        return terminal(absorbing), (), bool(internals)
    if not internals:
        return terminal(neutral), (), False
    internals = sorted(set(internals))
    return None, tuple(internals), False


def product_sweep(
    nodes: Sequence[Node],
    seeds: list[tuple],
    op: BinOp,
    *,
    quantified: frozenset = frozenset(),
    prune: frozenset = frozenset(),
    allow_quad: bool = False,
    count_or: bool = False,
    policy: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> ArcFile:
    """Top-down sweep over one node file with 1- and 2-target requests.

    1-target requests copy subtrees; 2-target requests build the op
    product.  A request reaching a level in `quantified` folds its low and
    high expansions into one target tuple (no node emitted unless the tuple
    still has 3-4 members after pruning, in which case a fresh node at that
    level splits it in half).  Levels in `prune` only collapse nodes with an
    absorbing terminal child and skip past nodes with a neutral one.

    Seeds are (t0, t1|MISSING, source, is_high) records; requests with equal
    target tuples are expanded once and fan out to every parent.
    """
    cursor = _Cursor(nodes)
    seeds = sorted(r[:4] for r in seeds)
    assert all(r[0] < FALSE_UID for r in seeds), "terminal seeds must be peeled"
    pq = LevelPQ(lambda e: e[0] >> 40, arity=4, policy=policy)
    internal = RecordFile(3, policy)
    term_arcs: list[tuple] = []
    counts: dict[int, int] = {}
    root_slot: Optional[int] = None
    si = 0

    def bump(modifying: bool, resolved: bool) -> None:
        if stats is None:
            return
        stats.requests_total += 1
        if modifying:
            stats.requests_modifying += 1
        if resolved:
            stats.requests_terminal += 1
        if count_or:
            stats.or_requests_total += 1

    def resolve_to(parents, c: int) -> None:
        nonlocal root_slot
        for src, ih in parents:
            if src == NIL:
                root_slot = c
            else:
                term_arcs.append((src, ih, c))

    def push_request(t0: int, t1: int, src: int, ih: int) -> None:
        pq.push((t0, t1, src, ih))
        if stats is not None:
            stats.arcs_pushed_inner += 1

    while si < len(seeds) or pq.has_pending():
        nxt = pq.next_level()
        if si < len(seeds):
            seed_lvl = seeds[si][0] >> 40
            lvl = seed_lvl if nxt is None else min(nxt, seed_lvl)
        else:
            lvl = nxt
        pq.setup_next_level(stop_label=lvl)
        pq2: list = []  # (wait_uid, t0, t1, low0, high0, parents)
        next_id = 0

        def emit_node(parents) -> int:
            nonlocal next_id
            u = uid(lvl, next_id)
            next_id += 1
            nonlocal root_slot
            for src, ih in sorted(parents):
                if src == NIL:
                    root_slot = u
                else:
                    internal.append((src, ih, u))
            return u

        def branch(u: int, flag: bool, side: list[int]) -> None:
            resolved, tup, _ = normalize_targets(op, side)
            if resolved is not None:
                bump(False, True)
                term_arcs.append((u, flag, resolved))
            else:
                t1 = tup[1] if len(tup) == 2 else MISSING
                push_request(tup[0], t1, u, flag)

        def expand(t0, t1, parents, d0, d1) -> None:
            # d0/d1: (low, high) for targets on this level, None if carried
            if prune and lvl in prune:
                assert t1 == MISSING and d0 is not None
                lo, hi = d0
                absorbing = terminal(op.absorbing_value)
                neutral = terminal(op.neutral_value)
                if lo == absorbing or hi == absorbing:
                    bump(False, True)
                    resolve_to(parents, absorbing)
                elif lo == neutral:
                    for src, ih in parents:
                        push_request(hi, MISSING, src, ih)
                elif hi == neutral:
                    for src, ih in parents:
                        push_request(lo, MISSING, src, ih)
                else:
                    u = emit_node(parents)
                    branch(u, False, [lo])
                    branch(u, True, [hi])
                return
            lows: list[int] = []
            highs: list[int] = []
            for t, d in ((t0, d0), (t1, d1)):
                if t == MISSING:
                    continue
                if d is None:
                    lows.append(t)
                    highs.append(t)
                else:
                    lows.append(d[0])
                    highs.append(d[1])
            if lvl in quantified:
                resolved, tup, _ = normalize_targets(op, lows + highs)
                if resolved is not None:
                    resolve_to(parents, resolved)
                elif len(tup) <= 2:
                    t1n = tup[1] if len(tup) == 2 else MISSING
                    for src, ih in parents:
                        push_request(tup[0], t1n, src, ih)
                else:
                    # partially quantified 3-4 tuple: re-emit a node on this
                    # (still to be quantified) level with the two halves
                    assert allow_quad, "3+ targets need the quad request mode"
                    u = emit_node(parents)
                    half = 2
                    branch(u, False, list(tup[:half]))
                    branch(u, True, list(tup[half:]))
            else:
                u = emit_node(parents)
                branch(u, False, lows)
                branch(u, True, highs)

        while True:
            have_req = (
                si < len(seeds) and seeds[si][0] >> 40 == lvl
            ) or not pq.empty_level()
            if not have_req and not pq2:
                break
            req_seek = None
            if have_req:
                cand = []
                if si < len(seeds) and seeds[si][0] >> 40 == lvl:
                    cand.append(seeds[si])
                if not pq.empty_level():
                    cand.append(pq.peek())
                req_seek = min(cand)[0]
            if pq2 and (req_seek is None or pq2[0][0] <= req_seek):
                wait, t0, t1, lo0, hi0, parents = heapq.heappop(pq2)
                n = cursor.advance_to(wait)
                expand(t0, t1, parents, (lo0, hi0), (n[1], n[2]))
                continue
            # pull the least request from the merged seed/queue streams and
            # absorb its duplicates from both
            best = None
            if si < len(seeds) and seeds[si][0] >> 40 == lvl:
                best = seeds[si]
            if not pq.empty_level() and (best is None or pq.peek() < best):
                best = pq.peek()
            key = best[:2]
            parents = []
            while si < len(seeds) and seeds[si][:2] == key:
                parents.append(seeds[si][2:4])
                si += 1
            while not pq.empty_level() and pq.peek()[:2] == key:
                e = pq.pull()
                parents.append(e[2:4])
            t0, t1 = key
            bump(t1 != MISSING, False)
            n0 = cursor.advance_to(t0)
            if t1 != MISSING and t1 < FALSE_UID and t1 >> 40 == lvl:
                heapq.heappush(pq2, (t1, t0, t1, n0[1], n0[2], parents))
            else:
                expand(t0, t1, parents, (n0[1], n0[2]), None)
        if next_id:
            counts[lvl] = next_id
            if stats is not None:
                stats.note_width(next_id)

    term_arcs.sort()
    term_file = RecordFile(3, policy)
    term_file.extend(term_arcs)
    return ArcFile(
        internal.finalize(),
        term_file.finalize(),
        root_slot,
        tuple(sorted(counts.items())),
    )


# ---------------------------------------------------------------------------
# The nested sweep proper
# ---------------------------------------------------------------------------


class _Pool:
    """Pending requests for the next inner sweep.

    With the root sorter enabled, entries accumulate unordered and are
    sorted once when the sweep is seeded; disabled, a heap keeps them
    eagerly ordered.  Both drain to the identical sequence.
    """

    def __init__(self, sort_once: bool):
        self._sort_once = sort_once
        self._items: list[tuple] = []

    def add(self, rec: tuple) -> None:
        if self._sort_once:
            self._items.append(rec)
        else:
            heapq.heappush(self._items, rec)

    def __len__(self) -> int:
        return len(self._items)

    def drain(self) -> list[tuple]:
        if self._sort_once:
            self._items.sort()
            out, self._items = self._items, []
            return out
        out = []
        while self._items:
            out.append(heapq.heappop(self._items))
        return out


class _NestedRun:
    def __init__(
        self,
        a: ArcFile,
        policy: NestingPolicy,
        stats: Stats | None,
        mem: MemoryPolicy | None,
    ):
        assert policy.nesting_levels, "nested_sweep needs nesting levels"
        self.a = a
        self.policy = policy
        self.op = policy.op
        self.stats = stats or Stats()
        self.mem = mem
        self.pending: list[int] = list(policy.nesting_levels)  # ascending
        self.pq_up = LevelPQ(lambda e: e[0] >> 40, descending=True, policy=mem)
        self.pool = _Pool(policy.use_root_sorter)
        self.deep: dict[int, list[Node]] = {}
        self.dead = False
        self.final_root: Optional[int] = None

    # -- routing ----------------------------------------------------------

    def _emit_up(self, src: int, ih: int, t: int) -> None:
        if src == NIL:
            assert self.final_root is None, "root resolved twice"
            self.final_root = t
        else:
            self.pq_up.push((src, ih, t))
            self.stats.arcs_pushed_outer += 1

    def _route(self, src: int, ih: int, t: int, origin: int) -> None:
        """Send a reduced arc to the outer queue, the final root slot, or
        the pool of the deepest still-pending nesting level it crosses."""
        if t >= FALSE_UID and self.policy.terminal_arcs:
            self._emit_up(src, ih, t)
            return
        if self.pending and src >> 40 < self.pending[-1]:
            self.pool.add((t, MISSING, src, ih, origin))
            self.stats.arcs_pushed_inner += 1
        else:
            self._emit_up(src, ih, t)

    # -- main loop ----------------------------------------------------------

    def execute(self) -> Bdd:
        a = self.a
        if is_terminal(a.root):
            assert a.arc_count() == 0
            return make_const(terminal_value(a.root))
        term_rev = a.terminal.reader(reverse=True)
        int_rev = a.internal.reader(reverse=True)
        root_label = label_of(a.root)
        levels = sorted(
            {lbl for lbl, _ in a.levels} | set(self.pending), reverse=True
        )
        for lvl in levels:
            self.pq_up.setup_next_level(stop_label=lvl)
            slots = gather_level_slots(lvl, self.pq_up, term_rev)
            if self.pending and lvl == self.pending[-1]:
                self._nesting_level(lvl, slots, int_rev, root_label)
            else:
                triples = pair_level_slots(slots)
                mapping, nodes = canonicalize_level(lvl, triples)
                if nodes:
                    self.deep[lvl] = nodes
                self.stats.note_width(len(nodes))
                while True:
                    rec = int_rev.peek()
                    if rec is None or label_of(rec[2]) != lvl:
                        break
                    src, ih, tgt = int_rev.next()
                    self._route(src, ih, mapping[tgt], ORIGIN_OUTER)
                if lvl == root_label:
                    self._route(NIL, False, mapping[a.root], ORIGIN_OUTER)

        assert not self.pending
        assert len(self.pool) == 0, "request pool leaked"
        assert not self.pq_up.has_pending(), "outer queue leaked"
        assert self.final_root is not None
        out: list[Node] = []
        for lbl in sorted(self.deep):
            out.extend(self.deep[lbl])
        if is_terminal(self.final_root):
            assert not out, "dead nodes survived a terminal collapse"
            return make_const(terminal_value(self.final_root))
        return Bdd(out, self.final_root)

    # -- one nesting level ------------------------------------------------

    def _nesting_level(self, lvl, slots, int_rev, root_label) -> None:
        op = self.op
        stats = self.stats
        children = {src: (lo, hi) for src, lo, hi in pair_level_slots(slots)}

        def form_request(src: int, ih: int, old: int) -> None:
            lo, hi = children[old]
            resolved, tup, killed = normalize_targets(op, (lo, hi))
            if killed:
                self.dead = True
            if resolved is not None:
                stats.requests_total += 1
                stats.requests_terminal += 1
                stats.or_requests_total += 1
                if self.policy.terminal_arcs:
                    self._emit_up(src, ih, resolved)
                else:
                    self.pool.add((resolved, MISSING, src, ih, ORIGIN_OUTER))
            else:
                t1 = tup[1] if len(tup) == 2 else MISSING
                self.pool.add((tup[0], t1, src, ih, ORIGIN_OUTER))
                stats.arcs_pushed_inner += 1

        while True:
            rec = int_rev.peek()
            if rec is None or label_of(rec[2]) != lvl:
                break
            src, ih, tgt = int_rev.next()
            form_request(src, ih, tgt)
        if lvl == root_label:
            form_request(NIL, False, self.a.root)

        self.pending.pop()
        seeds = self.pool.drain()
        self.pool = _Pool(self.policy.use_root_sorter)

        # terminal-target entries ride along one nesting level at a time
        # when the bypass is off; peel them here with the updated routing
        sweep_seeds = []
        for e in seeds:
            if e[0] >= FALSE_UID:
                assert e[1] == MISSING
                self._route(e[2], e[3], e[0], e[4])
            else:
                sweep_seeds.append(e)

        modifying = any(e[1] != MISSING for e in sweep_seeds)
        if self.policy.bail_out and not modifying:
            if self.dead and not self.pending:
                self._run_inner(lvl, sweep_seeds, gc=True)
            else:
                stats.inner_sweeps_skipped += 1
                for e in sweep_seeds:
                    self._route(e[2], e[3], e[0], e[4])
        else:
            self._run_inner(lvl, sweep_seeds, gc=False)
        self._note_live()

    def _run_inner(self, xj: int, seeds: list[tuple], gc: bool) -> None:
        self.stats.inner_sweeps_invoked += 1
        if gc:
            assert all(e[1] == MISSING for e in seeds)
        flat: list[Node] = []
        for lbl in sorted(self.deep):
            flat.extend(self.deep[lbl])
        inner = product_sweep(
            flat,
            seeds,
            self.op,
            count_or=not gc,
            policy=self.mem,
            stats=self.stats,
        )
        self.deep = self._inner_reduce(inner, xj)
        self.dead = False

    def _inner_reduce(self, inner: ArcFile, xj: int) -> dict[int, list[Node]]:
        """Bottom-up reduction of the inner file; arcs crossing x_j are
        routed back to the outer sweep or onward to the next pool."""
        stats = self.stats
        pq_in = LevelPQ(lambda e: e[0] >> 40, descending=True, policy=self.mem)
        term_rev = inner.terminal.reader(reverse=True)
        int_rev = inner.internal.reader(reverse=True)
        new_deep: dict[int, list[Node]] = {}
        root_label = label_of(inner.root) if inner.root is not None else None
        for lvl, _count in sorted(inner.levels, reverse=True):
            assert lvl > xj, "inner file node above its nesting level"
            pq_in.setup_next_level(stop_label=lvl)
            slots = gather_level_slots(lvl, pq_in, term_rev)
            mapping, nodes = canonicalize_level(lvl, pair_level_slots(slots))
            if nodes:
                new_deep[lvl] = nodes
            stats.note_width(len(nodes))
            while True:
                rec = int_rev.peek()
                if rec is None or label_of(rec[2]) != lvl:
                    break
                src, ih, tgt = int_rev.next()
                t = mapping[tgt]
                if src >> 40 > xj:
                    pq_in.push((src, ih, t))
                    stats.arcs_pushed_outer += 1
                else:
                    assert src >> 40 < xj or src == NIL, (
                        "arc source exactly at the nesting level"
                    )
                    self._route(src, ih, t, ORIGIN_INNER)
            if root_label == lvl:
                self._route(NIL, False, mapping[inner.root], ORIGIN_INNER)
        assert not pq_in.has_pending(), "inner queue leaked"
        assert term_rev.peek() is None and int_rev.peek() is None
        # requests whose sources sit above x_j but whose targets resolved to
        # terminals during the sweep never enter the level loop above
        return new_deep

    def _note_live(self) -> None:
        n_deep = sum(len(v) for v in self.deep.values())
        self.stats.note_live_bytes(
            self.a.byte_size()
            + n_deep * 24
            + len(self.pq_up) * 24
            + len(self.pool) * 40
        )


def nested_sweep(
    a: ArcFile,
    policy: NestingPolicy,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
) -> Bdd:
    """Reduce a transposed OBDD while applying policy.op across the children
    of every node on a nesting level; see the module docstring for the
    routing contract."""
    return _NestedRun(a, policy, stats, mem).execute()


def gc_sweep(
    roots: list[tuple],
    nodes: Sequence[Node],
    *,
    op: BinOp = OR,
    policy: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> ArcFile:
    """Reachability copy: re-emit, transposed, exactly the sub-DAG reachable
    from the given 1-target requests."""
    assert all(r[1] == MISSING for r in roots)
    return product_sweep(nodes, roots, op, policy=policy, stats=stats)
