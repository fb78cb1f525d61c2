"""Core node identities, records and the immutable BDD handle.

The engine never uses pointers or a shared node table.  A node is named by a
*uid*: a (level, index) pair packed into one 64-bit word, with the two
terminals living in a reserved region above every internal uid.  The packing
makes the total order over nodes a plain integer comparison:

    internal (label, id)  <  internal (label', id')   iff (label, id) < (label', id')
    every internal uid    <  FALSE_UID  <  TRUE_UID

A `Bdd` is an immutable, levelized node file: records sorted ascending by
uid, ids dense per level, plus per-level counts and a root.  Engine sweeps
always produce the reduced canonical form (no duplicate or redundant nodes,
ids assigned per level in (low, high) order), so two Bdds represent the same
Boolean function exactly when they compare equal field by field.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

# Packing of a uid word: label in the top 24 bits, per-level index in the low
# 40 bits.  The all-ones label is the terminal region, so internal labels run
# up to MAX_LABEL - 1.  This is the one place these constants are defined.
LABEL_BITS = 24
ID_BITS = 40
MAX_LABEL = (1 << LABEL_BITS) - 1          # terminal sentinel label
MAX_ID = (1 << ID_BITS) - 1

FALSE_UID = MAX_LABEL << ID_BITS
TRUE_UID = FALSE_UID | 1

# Virtual parent of a root request; orders before every real uid.
NIL = -1


def uid(label: int, index: int) -> int:
    """Pack an internal uid from a level label and a per-level index."""
    if not 0 <= label < MAX_LABEL:
        raise ValueError(f"label {label} out of range [0, {MAX_LABEL})")
    if not 0 <= index <= MAX_ID:
        raise ValueError(f"id {index} out of range")
    return (label << ID_BITS) | index


def terminal(value: bool) -> int:
    return TRUE_UID if value else FALSE_UID


def is_terminal(u: int) -> bool:
    return u >= FALSE_UID


def terminal_value(u: int) -> bool:
    return u == TRUE_UID


def label_of(u: int) -> int:
    """Level label of a uid; MAX_LABEL for terminals, -1 for the NIL parent."""
    return u >> ID_BITS


def id_of(u: int) -> int:
    return u & MAX_ID


def cmp_uid(a: int, b: int) -> int:
    """Total order over uids: -1, 0 or 1.

    Internal uids compare lexicographically by (label, id); every internal
    uid precedes both terminals and false precedes true.  With the packed
    representation this is integer comparison.
    """
    return (a > b) - (a < b)


def format_uid(u: int) -> str:
    if u == NIL:
        return "nil"
    if is_terminal(u):
        return "T" if terminal_value(u) else "F"
    return f"({label_of(u)},{id_of(u)})"


class Node(NamedTuple):
    """One node record: uid followed by its low and high child uids."""

    uid: int
    low: int
    high: int


class Arc(NamedTuple):
    """One directed edge of a transposed OBDD, flagged low/high."""

    source: int
    is_high: bool
    target: int


class Bdd:
    """A reduced, levelized node file with a root, or a bare terminal.

    Immutable after construction and safe to share between threads for
    reading.  A constant function is an empty node file whose root is a
    terminal uid; there is no pseudo-node for terminals.
    """

    __slots__ = ("nodes", "levels", "root")

    def __init__(self, nodes: Iterable[Node], root: int, _validate: bool = True):
        self.nodes: tuple[Node, ...] = tuple(
            n if isinstance(n, Node) else Node(*n) for n in nodes
        )
        self.root = root
        counts: dict[int, int] = {}
        for n in self.nodes:
            counts[label_of(n.uid)] = counts.get(label_of(n.uid), 0) + 1
        self.levels: tuple[tuple[int, int], ...] = tuple(sorted(counts.items()))
        if _validate:
            self._check()

    def _check(self) -> None:
        if not self.nodes:
            if not is_terminal(self.root):
                raise ValueError("empty node file must have a terminal root")
            return
        if is_terminal(self.root):
            raise ValueError("terminal root with a nonempty node file")
        prev = NIL
        for n in self.nodes:
            if n.uid <= prev:
                raise ValueError("nodes not sorted ascending by uid")
            prev = n.uid
            lbl = label_of(n.uid)
            for child in (n.low, n.high):
                if not is_terminal(child) and label_of(child) <= lbl:
                    raise ValueError(
                        f"child {format_uid(child)} not below {format_uid(n.uid)}"
                    )

    # -- queries ----------------------------------------------------------

    @property
    def is_constant(self) -> bool:
        return is_terminal(self.root)

    @property
    def value(self) -> bool:
        """Value of a constant Bdd."""
        if not self.is_constant:
            raise ValueError("value() on a non-constant Bdd")
        return terminal_value(self.root)

    def node_count(self) -> int:
        return len(self.nodes)

    def width(self) -> int:
        """Largest number of nodes on any one level."""
        return max((c for _, c in self.levels), default=0)

    def var_levels(self) -> tuple[int, ...]:
        """Labels present in this Bdd, ascending."""
        return tuple(lbl for lbl, _ in self.levels)

    def evaluate(self, assignment: Mapping[int, bool]) -> bool:
        """Follow high/low per the assignment until a terminal.

        Raises KeyError if a visited level has no assignment.
        """
        u = self.root
        nodes = self.nodes
        # nodes are uid-sorted and tuples compare by prefix, so (u,) bisects
        # straight to the record with that uid
        while not is_terminal(u):
            n = nodes[bisect_left(nodes, (u,))]
            assert n.uid == u
            lbl = label_of(u)
            if lbl not in assignment:
                raise KeyError(f"no assignment for level {lbl}")
            u = n.high if assignment[lbl] else n.low
        return terminal_value(u)

    # -- dunder -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bdd):
            return NotImplemented
        return self.root == other.root and self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash((self.root, self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        if self.is_constant:
            return f"Bdd(<{format_uid(self.root)})>"
        return f"Bdd({len(self.nodes)} nodes, root={format_uid(self.root)})"


def make_const(value: bool) -> Bdd:
    """The constant function as an empty node file with a terminal root."""
    return Bdd((), terminal(value))


def make_var(i: int) -> Bdd:
    """The single-variable function x_i."""
    return Bdd([Node(uid(i, 0), FALSE_UID, TRUE_UID)], uid(i, 0))


def make_nvar(i: int) -> Bdd:
    """The negated single-variable function, NOT x_i."""
    return Bdd([Node(uid(i, 0), TRUE_UID, FALSE_UID)], uid(i, 0))


@dataclass
class Stats:
    """Monotone counters shared by every sweep, plus two gauges.

    One computation owns a Stats instance at a time; aggregating across
    computations is the caller's job.  requests count *distinct* requests
    processed (duplicates to the same target tuple are merged first), and
    arcs_pushed_outer/inner tally pushes into the bottom-up (reduce-side)
    and top-down (apply-side) queues respectively.
    """

    requests_total: int = 0
    requests_modifying: int = 0
    requests_terminal: int = 0
    inner_sweeps_invoked: int = 0
    inner_sweeps_skipped: int = 0
    arcs_pushed_outer: int = 0
    arcs_pushed_inner: int = 0
    or_requests_total: int = 0
    # gauges (still monotone): high-water marks, not event counts
    peak_live_bytes: int = 0
    peak_width: int = 0

    def note_live_bytes(self, n: int) -> None:
        if n > self.peak_live_bytes:
            self.peak_live_bytes = n

    def note_width(self, n: int) -> None:
        if n > self.peak_width:
            self.peak_width = n

    def as_dict(self) -> dict[str, int]:
        return {
            "requests_total": self.requests_total,
            "requests_modifying": self.requests_modifying,
            "requests_terminal": self.requests_terminal,
            "inner_sweeps_invoked": self.inner_sweeps_invoked,
            "inner_sweeps_skipped": self.inner_sweeps_skipped,
            "arcs_pushed_outer": self.arcs_pushed_outer,
            "arcs_pushed_inner": self.arcs_pushed_inner,
            "or_requests_total": self.or_requests_total,
            "peak_live_bytes": self.peak_live_bytes,
            "peak_width": self.peak_width,
        }


def write_dot(f: Bdd, out) -> None:
    """Write `f` in DOT format: variables as circles, terminals as boxes,
    high arcs solid and low arcs dashed.

    `out` is a writable text file object or a path.
    """
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "w", encoding="utf-8") as fh:
            write_dot(f, fh)
        return
    w = out.write
    w("digraph bdd {\n")
    w("  node [shape=box]; F [label=\"0\"]; T [label=\"1\"];\n")
    if f.is_constant:
        w(f"  root [shape=none, label=\"\"];\n")
        w(f"  root -> {'T' if f.value else 'F'};\n")
        w("}\n")
        return

    def name(u: int) -> str:
        if is_terminal(u):
            return "T" if terminal_value(u) else "F"
        return f"n{label_of(u)}_{id_of(u)}"

    by_level: dict[int, list[Node]] = {}
    for n in f.nodes:
        by_level.setdefault(label_of(n.uid), []).append(n)
    for lbl, nodes in sorted(by_level.items()):
        w("  { rank=same; ")
        for n in nodes:
            w(f"{name(n.uid)} [shape=circle, label=\"x{lbl}\"]; ")
        w("}\n")
    for n in f.nodes:
        w(f"  {name(n.uid)} -> {name(n.low)} [style=dashed];\n")
        w(f"  {name(n.uid)} -> {name(n.high)} [style=solid];\n")
    w("}\n")
