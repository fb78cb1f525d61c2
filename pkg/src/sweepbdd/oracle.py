"""A small conventional depth-first BDD engine used as ground truth.

Hash-consed unique table, memoized apply, and the textbook recursive
multi-variable exists.  Deliberately unoptimized and hard-capped in size: it
exists so that every streaming operation can be checked bit-for-bit against
an independent implementation, with exhaustive truth tables as the final
arbiter when the two disagree.
"""

from __future__ import annotations

from typing import Iterable

from .core import (
    Bdd,
    Node,
    is_terminal,
    label_of,
    make_const,
    terminal,
    terminal_value,
    uid,
)

NODE_CAP = 10**6


class Oracle:
    """Unique-table BDD manager.  References are ints: 0 and 1 are the
    terminals, larger ints index internal nodes."""

    FALSE = 0
    TRUE = 1

    def __init__(self):
        self._nodes: list[tuple[int, int, int]] = [None, None]  # ref -> (label, lo, hi)
        self._unique: dict[tuple[int, int, int], int] = {}
        self._apply_cache: dict[tuple, int] = {}
        self._exists_cache: dict[tuple, int] = {}

    # -- construction -------------------------------------------------

    def node(self, label: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (label, lo, hi)
        ref = self._unique.get(key)
        if ref is None:
            if len(self._nodes) >= NODE_CAP:
                raise MemoryError("oracle node cap exceeded")
            ref = len(self._nodes)
            self._nodes.append(key)
            self._unique[key] = ref
        return ref

    def var(self, i: int) -> int:
        return self.node(i, self.FALSE, self.TRUE)

    def nvar(self, i: int) -> int:
        return self.node(i, self.TRUE, self.FALSE)

    def label(self, ref: int) -> int:
        return self._nodes[ref][0]

    def low(self, ref: int) -> int:
        return self._nodes[ref][1]

    def high(self, ref: int) -> int:
        return self._nodes[ref][2]

    # -- operations -----------------------------------------------------

    def df_apply(self, f: int, g: int, table: tuple[bool, bool, bool, bool]) -> int:
        """Shannon recursion with memoization; `table` is op(a,b) indexed
        by 2a+b."""
        if f <= 1 and g <= 1:
            return int(table[2 * f + g])
        key = (f, g, table)
        hit = self._apply_cache.get(key)
        if hit is not None:
            return hit
        lf = self.label(f) if f > 1 else None
        lg = self.label(g) if g > 1 else None
        if lg is None or (lf is not None and lf <= lg):
            top = lf
        else:
            top = lg
        f0, f1 = (self.low(f), self.high(f)) if lf == top else (f, f)
        g0, g1 = (self.low(g), self.high(g)) if lg == top else (g, g)
        r = self.node(
            top,
            self.df_apply(f0, g0, table),
            self.df_apply(f1, g1, table),
        )
        self._apply_cache[key] = r
        return r

    def df_not(self, f: int) -> int:
        if f <= 1:
            return 1 - f
        return self.node(
            self.label(f), self.df_not(self.low(f)), self.df_not(self.high(f))
        )

    def df_exists(self, v: int, xs: frozenset[int], conjunct: bool = False) -> int:
        """The recursive multi-variable quantification, literally:
        terminals return themselves, children are resolved first, and the
        root variable is either rebuilt or folded with or (and when
        `conjunct`, for the universal dual)."""
        if v <= 1:
            return v
        key = (v, xs, conjunct)
        hit = self._exists_cache.get(key)
        if hit is not None:
            return hit
        exi0 = self.df_exists(self.low(v), xs, conjunct)
        exi1 = self.df_exists(self.high(v), xs, conjunct)
        if self.label(v) not in xs:
            r = self.node(self.label(v), exi0, exi1)
        elif conjunct:
            r = self.df_apply(exi0, exi1, (False, False, False, True))
        else:
            r = self.df_apply(exi0, exi1, (False, True, True, True))
        self._exists_cache[key] = r
        return r

    # -- conversion -------------------------------------------------------

    def to_bdd(self, ref: int) -> Bdd:
        """Emit the reachable subgraph as a levelized node file with dense
        ids assigned per level in (low, high) order — the same canonical
        numbering the streaming reduce produces."""
        if ref <= 1:
            return make_const(bool(ref))
        by_level: dict[int, set[int]] = {}
        seen = set()
        stack = [ref]
        while stack:
            r = stack.pop()
            if r <= 1 or r in seen:
                continue
            seen.add(r)
            by_level.setdefault(self.label(r), set()).add(r)
            stack.append(self.low(r))
            stack.append(self.high(r))
        final: dict[int, int] = {
            self.FALSE: terminal(False),
            self.TRUE: terminal(True),
        }
        nodes: list[Node] = []
        for lbl in sorted(by_level, reverse=True):
            rows = sorted(
                (final[self.low(r)], final[self.high(r)], r)
                for r in by_level[lbl]
            )
            for i, (lo, hi, r) in enumerate(rows):
                u = uid(lbl, i)
                final[r] = u
                nodes.append(Node(u, lo, hi))
        nodes.sort()
        return Bdd(nodes, final[ref])

    def from_bdd(self, f: Bdd) -> int:
        """Import an engine Bdd (assumed ordered) into the unique table."""
        if f.is_constant:
            return int(f.value)
        refs: dict[int, int] = {
            terminal(False): self.FALSE,
            terminal(True): self.TRUE,
        }
        for n in reversed(f.nodes):
            refs[n.uid] = self.node(label_of(n.uid), refs[n.low], refs[n.high])
        return refs[f.root]

    def from_truth_table(self, bits: int, labels: list[int]) -> int:
        """Build the function whose truth table over `labels` (ascending) is
        the bit vector `bits`; bit index i has labels[j] set iff bit j of i."""

        def build(pos: int, index: int) -> int:
            if pos == len(labels):
                return int((bits >> index) & 1)
            lo = build(pos + 1, index)
            hi = build(pos + 1, index | (1 << pos))
            return self.node(labels[pos], lo, hi)

        return build(0, 0)

    def eval(self, ref: int, assignment) -> bool:
        while ref > 1:
            ref = (
                self.high(ref)
                if assignment[self.label(ref)]
                else self.low(ref)
            )
        return bool(ref)


def truth_table(f: Bdd, labels: Iterable[int]) -> int:
    """Truth table of `f` over the given labels as a bit vector packed into
    an int: bit i is f under the assignment where labels[j] is set iff bit j
    of i is set.  `labels` must cover the support of f."""
    labels = list(labels)
    support = set(f.var_levels())
    if not support <= set(labels):
        raise ValueError("labels must cover the function's support")
    bits = 0
    for i in range(1 << len(labels)):
        a = {lbl: bool((i >> j) & 1) for j, lbl in enumerate(labels)}
        if f.evaluate(a):
            bits |= 1 << i
    return bits


def tt_exists(bits: int, labels: list[int], xs: Iterable[int]) -> int:
    """Project a truth table: OR (over each quantified label's two halves)."""
    for x in xs:
        if x not in labels:
            continue
        j = labels.index(x)
        bits = _tt_fold(bits, len(labels), j, lambda a, b: a | b)
    return bits


def tt_forall(bits: int, labels: list[int], xs: Iterable[int]) -> int:
    for x in xs:
        if x not in labels:
            continue
        j = labels.index(x)
        bits = _tt_fold(bits, len(labels), j, lambda a, b: a & b)
    return bits


def _tt_fold(bits: int, nvars: int, j: int, op) -> int:
    stride = 1 << j
    mask = 0
    for i in range(1 << nvars):
        if not (i >> j) & 1:
            mask |= 1 << i
    lo = bits & mask
    hi = (bits >> stride) & mask
    folded = op(lo, hi)
    return folded | (folded << stride)
