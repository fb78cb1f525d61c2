"""The Apply-Reduce tandem.

Apply unfolds the binary product construction top-down, deferring every
recursive step through a levelized priority queue until the nodes it needs
come up in the merged level-order scan of both inputs.  Requests to the same
(t1, t2) pair are merged, so the queue doubles as the computation cache and
the output is a DAG, not a tree.  The arcs come out grouped by target, i.e.
already transposed, which is exactly the form the bottom-up Reduce needs.

Reduce walks levels deepest-first, resolves each node's children from the
forwarding queue and the terminal-arc stream, applies the two reduction
rules, and forwards final uids to the parents.  Ids are assigned per level
in (low, high) order so the output file is a pure function of the Boolean
function it represents; every bit-exactness test in the suite leans on this.
"""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Optional

from .core import (
    Bdd,
    FALSE_UID,
    NIL,
    Node,
    Stats,
    format_uid,
    is_terminal,
    label_of,
    make_const,
    terminal,
    terminal_value,
    uid,
)
from .levelpq import LevelPQ
from .storage import ArcFile, MemoryPolicy, RecordFile


@dataclass(frozen=True)
class BinOp:
    """A binary Boolean operator as a truth table.

    `table[2a + b]` is op(a, b).  The absorbing/neutral shortcut predicates
    are derived from the table, so they cannot disagree with it.
    """

    name: str
    table: tuple[bool, bool, bool, bool]

    def value(self, a: bool, b: bool) -> bool:
        return self.table[2 * bool(a) + bool(b)]

    def left_absorbing(self, v: bool) -> bool:
        """op(v, x) is constant over x."""
        return self.table[2 * v] == self.table[2 * v + 1]

    def right_absorbing(self, v: bool) -> bool:
        return self.table[v] == self.table[2 + v]

    @property
    def absorbing_value(self) -> Optional[bool]:
        """Terminal value that forces the result, e.g. true for or."""
        for v in (False, True):
            if (
                self.left_absorbing(v)
                and self.right_absorbing(v)
                and self.value(v, v) == v
            ):
                return v
        return None

    @property
    def neutral_value(self) -> Optional[bool]:
        """Terminal value that drops out, e.g. false for or."""
        for v in (False, True):
            if (
                self.value(v, False) == False  # noqa: E712
                and self.value(v, True) == True  # noqa: E712
                and self.value(False, v) == False  # noqa: E712
                and self.value(True, v) == True  # noqa: E712
            ):
                return v
        return None


OR = BinOp("or", (False, True, True, True))
AND = BinOp("and", (False, False, False, True))
XOR = BinOp("xor", (False, True, True, False))
IMP = BinOp("imp", (True, True, False, True))

OPS = {op.name: op for op in (OR, AND, XOR, IMP)}


class _Cursor:
    """Forward-only exact-seek over a uid-sorted node sequence.

    The current record stays readable until the cursor moves past it, so
    several requests anchored on the same node cost a single read.
    """

    __slots__ = ("_nodes", "_pos", "reads")

    def __init__(self, nodes):
        self._nodes = nodes
        self._pos = 0
        self.reads = 0

    def advance_to(self, u: int) -> Node:
        nodes = self._nodes
        pos = self._pos
        while pos < len(nodes) and nodes[pos][0] < u:
            pos += 1
        if pos != self._pos:
            self._pos = pos
        n = nodes[pos]
        assert n[0] == u, f"node {format_uid(u)} missing from input"
        self.reads += 1
        return n


def apply_unreduced(
    f: Bdd,
    g: Bdd,
    op: BinOp,
    policy: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> ArcFile:
    """Top-down product construction of op(f, g) as a transposed OBDD.

    Requests are processed in ascending (min-target, max-target) order;
    duplicates to the same (t1, t2) pair expand once and fan out to all of
    their parents.  Terminal operands shortcut per the op's truth table;
    constants never reach this function (see `apply`).
    """
    assert not f.is_constant and not g.is_constant
    table = op.table
    rf = _Cursor(f.nodes)
    rg = _Cursor(g.nodes)
    pq = LevelPQ(lambda e: e[0] >> 40, arity=6, policy=policy)
    internal = RecordFile(3, policy)
    term = RecordFile(3, policy)
    counts: dict[int, int] = {}
    root_slot: Optional[int] = None

    r1, r2 = f.root, g.root
    pq.push((min(r1, r2), max(r1, r2), r1, r2, NIL, False))
    if stats is not None:
        stats.arcs_pushed_inner += 1

    while True:
        lvl = pq.setup_next_level()
        if lvl is None:
            break
        pq2: list = []  # (wait_uid, t1, t2, lo_first, hi_first, parents)
        next_id = 0

        def emit(parents, flo, fhi, glo, ghi):
            nonlocal next_id, root_slot
            u = uid(lvl, next_id)
            next_id += 1
            for src, ih in sorted(parents):
                if src == NIL:
                    root_slot = u
                else:
                    internal.append((src, ih, u))
            for flag, c1, c2 in ((False, flo, glo), (True, fhi, ghi)):
                t1_term = c1 >= FALSE_UID
                t2_term = c2 >= FALSE_UID
                if t1_term and t2_term:
                    term.append((u, flag, terminal(table[2 * (c1 & 1) + (c2 & 1)])))
                elif t1_term and op.left_absorbing(bool(c1 & 1)):
                    term.append((u, flag, terminal(table[2 * (c1 & 1)])))
                elif t2_term and op.right_absorbing(bool(c2 & 1)):
                    term.append((u, flag, terminal(table[c2 & 1])))
                else:
                    pq.push((min(c1, c2), max(c1, c2), c1, c2, u, flag))
                    if stats is not None:
                        stats.arcs_pushed_inner += 1

        while not pq.empty_level() or pq2:
            take2 = bool(pq2) and (
                pq.empty_level() or pq2[0][0] <= pq.peek()[0]
            )
            if take2:
                wait, t1, t2, lo1, hi1, parents = heappop(pq2)
                if wait == t2:
                    n = rg.advance_to(t2)
                    emit(parents, lo1, hi1, n[1], n[2])
                else:
                    n = rf.advance_to(t1)
                    emit(parents, n[1], n[2], lo1, hi1)
                continue
            e = pq.pull()
            parents = [(e[4], e[5])]
            while not pq.empty_level() and pq.peek()[:4] == e[:4]:
                dup = pq.pull()
                parents.append((dup[4], dup[5]))
            _, _, t1, t2 = e[:4]
            if stats is not None:
                stats.requests_total += 1
            on1 = t1 < FALSE_UID and label_of(t1) == lvl
            on2 = t2 < FALSE_UID and label_of(t2) == lvl
            if on1 and on2:
                if t1 == t2:
                    n1 = rf.advance_to(t1)
                    n2 = rg.advance_to(t2)
                    emit(parents, n1[1], n1[2], n2[1], n2[2])
                elif t1 < t2:
                    n1 = rf.advance_to(t1)
                    heappush(pq2, (t2, t1, t2, n1[1], n1[2], parents))
                else:
                    n2 = rg.advance_to(t2)
                    heappush(pq2, (t1, t1, t2, n2[1], n2[2], parents))
            elif on1:
                n1 = rf.advance_to(t1)
                emit(parents, n1[1], n1[2], t2, t2)
            else:
                n2 = rg.advance_to(t2)
                emit(parents, t1, t1, n2[1], n2[2])
        if next_id:
            counts[lvl] = next_id

    assert root_slot is not None
    return ArcFile(
        internal.finalize(),
        term.finalize(),
        root_slot,
        tuple(sorted(counts.items())),
    )


# ---------------------------------------------------------------------------
# Reduce
# ---------------------------------------------------------------------------


def gather_level_slots(level: int, pq: LevelPQ, term_rev) -> list[tuple]:
    """Child slots for this level: forwarded uids plus terminal arcs, as
    (source, is_high, child) sorted ascending."""
    slots = []
    while True:
        rec = term_rev.peek()
        if rec is None or label_of(rec[0]) != level:
            break
        slots.append(term_rev.next())
    while not pq.empty_level():
        slots.append(pq.pull())
    slots.sort()
    return slots


def pair_level_slots(slots: list[tuple]) -> list[tuple]:
    """Zip the slot list into (source, low, high) triples; every source
    must contribute exactly one low and one high slot."""
    triples = []
    for i in range(0, len(slots), 2):
        s0, f0, c0 = slots[i]
        if i + 1 >= len(slots):
            raise ValueError(f"dangling arc slot for {format_uid(s0)}")
        s1, f1, c1 = slots[i + 1]
        if s0 != s1 or f0 or not f1:
            raise ValueError(f"malformed arc multiplicities at {format_uid(s0)}")
        triples.append((s0, c0, c1))
    return triples


def canonicalize_level(level: int, triples: list[tuple]):
    """Apply rule 1 (suppress redundant nodes) and rule 2 (merge duplicates,
    assign dense ids in (low, high) order).  Returns the old-uid mapping and
    the level's output nodes."""
    mapping: dict[int, int] = {}
    survivors = []
    for src, lo, hi in triples:
        if lo == hi:
            mapping[src] = lo
        else:
            survivors.append((lo, hi, src))
    survivors.sort()
    nodes: list[Node] = []
    prev = None
    current = None
    for lo, hi, src in survivors:
        if (lo, hi) != prev:
            current = uid(level, len(nodes))
            nodes.append(Node(current, lo, hi))
            prev = (lo, hi)
        mapping[src] = current
    return mapping, nodes


def reduce(
    a: ArcFile,
    policy: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> Bdd:
    """Bottom-up reduction of a transposed OBDD into the canonical Bdd."""
    if a.root is None:
        raise ValueError("reduce needs a rooted arc file")
    if is_terminal(a.root):
        assert a.arc_count() == 0
        return make_const(terminal_value(a.root))
    pq = LevelPQ(lambda e: e[0] >> 40, descending=True, policy=policy)
    term_rev = a.terminal.reader(reverse=True)
    int_rev = a.internal.reader(reverse=True)
    parts: list[list[Node]] = []
    final_root: Optional[int] = None
    root_label = label_of(a.root)

    for lvl, _count in sorted(a.levels, reverse=True):
        pq.setup_next_level(stop_label=lvl)
        slots = gather_level_slots(lvl, pq, term_rev)
        triples = pair_level_slots(slots)
        mapping, nodes = canonicalize_level(lvl, triples)
        if nodes:
            parts.append(nodes)
        if stats is not None:
            stats.note_width(len(nodes))
        while True:
            rec = int_rev.peek()
            if rec is None or label_of(rec[2]) != lvl:
                break
            src, ih, tgt = int_rev.next()
            pq.push((src, ih, mapping[tgt]))
            if stats is not None:
                stats.arcs_pushed_outer += 1
        if lvl == root_label:
            final_root = mapping[a.root]

    assert final_root is not None
    assert not pq.has_pending(), "reduce queue not drained"
    assert term_rev.peek() is None and int_rev.peek() is None
    out: list[Node] = []
    for nodes in reversed(parts):
        out.extend(nodes)
    if is_terminal(final_root):
        assert not out
        return make_const(terminal_value(final_root))
    return Bdd(out, final_root)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def apply(
    f: Bdd,
    g: Bdd,
    op: BinOp,
    policy: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> Bdd:
    """op(f, g) as a canonical Bdd.  Constant operands resolve through the
    op's shortcut tables without starting a sweep."""
    if f.is_constant and g.is_constant:
        return make_const(op.value(f.value, g.value))
    if f.is_constant:
        h0, h1 = op.value(f.value, False), op.value(f.value, True)
        if h0 == h1:
            return make_const(h0)
        return g if (h0, h1) == (False, True) else negate(g)
    if g.is_constant:
        h0, h1 = op.value(False, g.value), op.value(True, g.value)
        if h0 == h1:
            return make_const(h0)
        return f if (h0, h1) == (False, True) else negate(f)
    return reduce(apply_unreduced(f, g, op, policy, stats), policy, stats)


def negate(f: Bdd) -> Bdd:
    """NOT f by swapping terminal child slots in a linear pass.

    Swapping can flip the (low, high) order inside a level, so ids are
    reassigned level by level to keep the file canonical; not(not(f)) is
    then bit-exactly f.
    """
    if f.is_constant:
        return make_const(not f.value)
    by_level: dict[int, list[Node]] = {}
    for n in f.nodes:
        by_level.setdefault(label_of(n.uid), []).append(n)
    final = {FALSE_UID: terminal(True), terminal(True): FALSE_UID}
    out: list[Node] = []
    for lbl in sorted(by_level, reverse=True):
        rows = sorted(
            (final.get(n.low, n.low), final.get(n.high, n.high), n.uid)
            for n in by_level[lbl]
        )
        for i, (lo, hi, old) in enumerate(rows):
            u = uid(lbl, i)
            final[old] = u
            out.append(Node(u, lo, hi))
    out.sort()
    return Bdd(out, final[f.root])
