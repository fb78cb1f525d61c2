"""Sequential record streams, an external-capable sorter, and the
node-file/arc-file conversions.

Every stream holds fixed-arity tuples of 64-bit words.  A stream starts as a
plain in-memory list and silently converts itself to a block-buffered
temporary file once it outgrows the active :class:`MemoryPolicy` budget; the
reading interface (strictly sequential, forward or backward, with one record
of lookahead) is the same either way.  Sorters follow the same pattern with
an external merge once chunks have been spilled.

The transposed arc representation keeps two sub-streams: arcs between
internal nodes sorted by target (the transposition proper) and arcs into
terminals sorted by source, which is the order the bottom-up sweep consumes
them in.
"""

from __future__ import annotations

import heapq
import io
import os
import struct
import tempfile
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional

from .core import (
    Arc,
    Bdd,
    Node,
    NIL,
    format_uid,
    is_terminal,
    label_of,
    make_const,
    terminal_value,
)

TMPDIR_ENV = "SWEEPBDD_TMPDIR"

_WORD_MASK = (1 << 64) - 1
# Words 2^64-1 and 2^64-2 are unused by real uids (terminal ids are only 0
# and 1), so they encode the small negative sentinels (-1 NIL parent, -2
# missing-target) in two's complement on disk.
_SENTINEL_FLOOR = _WORD_MASK - 1


def _encode(value: int) -> int:
    return value & _WORD_MASK


def _decode(word: int) -> int:
    return word - (1 << 64) if word >= _SENTINEL_FLOOR else word


@dataclass
class MemoryPolicy:
    """Engine-wide switch between in-memory and file-backed streams.

    A stream or sorter spills to temporary files once it holds more than
    `budget_bytes` worth of records.  The default budget keeps desk-scale
    computations entirely in memory.
    """

    budget_bytes: int = 256 * 1024 * 1024
    block_bytes: int = 4096

    def tmpdir(self) -> str:
        return os.environ.get(TMPDIR_ENV) or tempfile.gettempdir()

    def spills(self, nbytes: int) -> bool:
        return nbytes > self.budget_bytes


_default_policy = MemoryPolicy()


def default_policy() -> MemoryPolicy:
    return _default_policy


def set_default_policy(policy: MemoryPolicy) -> None:
    global _default_policy
    _default_policy = policy


class Reader:
    """Sequential access to a finished stream: peek and next only."""

    __slots__ = ("_it", "_head")

    def __init__(self, it: Iterator[tuple]):
        self._it = it
        self._head = next(it, None)

    def peek(self) -> Optional[tuple]:
        return self._head

    def next(self) -> tuple:
        head = self._head
        if head is None:
            raise StopIteration
        self._head = next(self._it, None)
        return head

    def __iter__(self):
        while self._head is not None:
            yield self.next()


class RecordFile:
    """An append-only sequence of fixed-arity word tuples.

    Lives in memory until the policy budget is exceeded, then moves to a
    block-buffered temporary file.  After `finalize` the contents are
    immutable and can be read forward or backward.
    """

    def __init__(self, arity: int, policy: MemoryPolicy | None = None):
        self.arity = arity
        self._policy = policy or default_policy()
        self._mem: list[tuple] | None = []
        self._disk: _DiskStore | None = None
        self._count = 0
        self._final = False

    def append(self, rec: tuple) -> None:
        assert not self._final
        self._count += 1
        if self._mem is not None:
            self._mem.append(rec)
            if self._policy.spills(self._count * self.arity * 8):
                self._spill()
        else:
            self._disk.append(rec)

    def extend(self, recs: Iterable[tuple]) -> None:
        for r in recs:
            self.append(r)

    def _spill(self) -> None:
        self._disk = _DiskStore(self.arity, self._policy)
        for r in self._mem:
            self._disk.append(r)
        self._mem = None

    def finalize(self) -> "RecordFile":
        self._final = True
        if self._disk is not None:
            self._disk.flush()
        return self

    def __len__(self) -> int:
        return self._count

    def byte_size(self) -> int:
        return self._count * self.arity * 8

    @property
    def file_backed(self) -> bool:
        return self._disk is not None

    def reader(self, reverse: bool = False) -> Reader:
        if self._mem is not None:
            it = iter(reversed(self._mem)) if reverse else iter(self._mem)
            return Reader(it)
        self._disk.flush()
        return Reader(self._disk.iterate(reverse))

    def __iter__(self):
        return iter(self.reader())


class _DiskStore:
    """Block-buffered flat file of packed records."""

    def __init__(self, arity: int, policy: MemoryPolicy):
        self.arity = arity
        self._struct = struct.Struct("<%dQ" % arity)
        self._policy = policy
        fd, self._path = tempfile.mkstemp(
            suffix=".records", dir=policy.tmpdir()
        )
        self._fh = io.BufferedWriter(
            os.fdopen(fd, "wb", buffering=0), buffer_size=policy.block_bytes
        )
        self._count = 0

    def append(self, rec: tuple) -> None:
        self._fh.write(self._struct.pack(*[_encode(v) for v in rec]))
        self._count += 1

    def flush(self) -> None:
        if not self._fh.closed:
            self._fh.flush()

    def iterate(self, reverse: bool) -> Iterator[tuple]:
        rec_size = self._struct.size
        # whole records per block read
        per_block = max(1, self._policy.block_bytes // rec_size)
        with open(self._path, "rb", buffering=0) as fh:
            if not reverse:
                while True:
                    blob = fh.read(per_block * rec_size)
                    if not blob:
                        return
                    for off in range(0, len(blob), rec_size):
                        yield tuple(
                            _decode(w)
                            for w in self._struct.unpack_from(blob, off)
                        )
            else:
                end = self._count * rec_size
                while end > 0:
                    start = max(0, end - per_block * rec_size)
                    fh.seek(start)
                    blob = fh.read(end - start)
                    for off in range(len(blob) - rec_size, -1, -rec_size):
                        yield tuple(
                            _decode(w)
                            for w in self._struct.unpack_from(blob, off)
                        )
                    end = start

    def __del__(self):
        try:
            self._fh.close()
            os.unlink(self._path)
        except OSError:
            pass


class Sorter:
    """Stable sorter over fixed-arity word tuples with a memory budget.

    Items are buffered in memory; chunks are sorted and spilled to disk past
    the budget and merged on finalize.  Equal keys keep insertion order.
    """

    def __init__(
        self,
        arity: int,
        policy: MemoryPolicy | None = None,
        key: Callable[[tuple], tuple] | None = None,
    ):
        self.arity = arity
        self._policy = policy or default_policy()
        self._key = key
        self._items: list[tuple] = []
        self._chunks: list[_DiskStore] = []

    def push(self, rec: tuple) -> None:
        self._items.append(rec)
        if self._policy.spills(len(self._items) * self.arity * 8):
            self._spill_chunk()

    def __len__(self) -> int:
        return len(self._items) + sum(c._count for c in self._chunks)

    def _spill_chunk(self) -> None:
        self._items.sort(key=self._key)
        chunk = _DiskStore(self.arity, self._policy)
        for r in self._items:
            chunk.append(r)
        chunk.flush()
        self._chunks.append(chunk)
        self._items = []

    def finalize(self) -> Iterator[tuple]:
        """Emit all items in non-decreasing key order."""
        if not self._chunks:
            self._items.sort(key=self._key)
            return iter(self._items)
        if self._items:
            self._spill_chunk()
        streams = [c.iterate(reverse=False) for c in self._chunks]
        if self._key is None:
            return heapq.merge(*streams)
        return heapq.merge(*streams, key=self._key)


def sort_records(
    items: Iterable[tuple],
    key: Callable[[tuple], tuple] | None = None,
    arity: int = 3,
    policy: MemoryPolicy | None = None,
) -> list[tuple]:
    """Convenience wrapper over Sorter: sort under the policy budget."""
    s = Sorter(arity, policy, key)
    for r in items:
        s.push(r)
    return list(s.finalize())


# ---------------------------------------------------------------------------
# Arc files and the node-file conversions
# ---------------------------------------------------------------------------


class ArcFile:
    """A transposed OBDD.

    `internal` holds arcs between internal nodes sorted ascending by
    (target, source, is_high); `terminal` holds arcs into terminals sorted by
    (source, is_high).  `root` is the uid of the (unreduced) root node, a
    terminal uid if the whole graph collapsed to a constant, or None for the
    multi-rooted intermediate files of inner sweeps.  `levels` counts the
    unreduced nodes per level.
    """

    def __init__(
        self,
        internal: RecordFile,
        terminal: RecordFile,
        root: Optional[int],
        levels: tuple[tuple[int, int], ...],
    ):
        self.internal = internal
        self.terminal = terminal
        self.root = root
        self.levels = levels

    def node_count(self) -> int:
        return sum(c for _, c in self.levels)

    def arc_count(self) -> int:
        return len(self.internal) + len(self.terminal)

    def byte_size(self) -> int:
        return self.internal.byte_size() + self.terminal.byte_size()

    def var_levels(self) -> tuple[int, ...]:
        return tuple(lbl for lbl, _ in self.levels)

    def __repr__(self) -> str:
        root = format_uid(self.root) if self.root is not None else "-"
        return f"ArcFile({self.arc_count()} arcs, root={root})"


def transpose(f: Bdd, policy: MemoryPolicy | None = None) -> ArcFile:
    """Split every node into its two out-arcs and sort them by target.

    Emits exactly 2 * node_count(f) arcs.  Constants have no arcs to emit;
    callers must special-case them.
    """
    if f.is_constant:
        raise ValueError("cannot transpose a constant Bdd")
    internal = Sorter(3, policy, key=lambda a: (a[2], a[0], a[1]))
    term = RecordFile(3, policy)
    for u, lo, hi in f.nodes:
        for flag, child in ((False, lo), (True, hi)):
            if is_terminal(child):
                term.append(Arc(u, flag, child))
            else:
                internal.push(Arc(u, flag, child))
    ifile = RecordFile(3, policy)
    for rec in internal.finalize():
        ifile.append(Arc(*rec))
    out = ArcFile(ifile.finalize(), term.finalize(), f.root, f.levels)
    assert out.arc_count() == 2 * f.node_count()
    return out


def untranspose(a: ArcFile, policy: MemoryPolicy | None = None) -> Bdd:
    """Merge arcs back into a node file by sorting them on their source.

    The result is Bdd-shaped but not necessarily reduced.  Raises ValueError
    when some source does not have exactly one low and one high arc.
    """
    if a.root is None:
        raise ValueError("untranspose needs a rooted arc file")
    if is_terminal(a.root):
        return make_const(terminal_value(a.root))
    s = Sorter(3, policy, key=lambda r: (r[0], r[1]))
    for rec in a.internal:
        s.push(rec)
    for rec in a.terminal:
        s.push(rec)
    nodes: list[Node] = []
    it = iter(s.finalize())
    lo_arc = next(it, None)
    while lo_arc is not None:
        hi_arc = next(it, None)
        if (
            hi_arc is None
            or lo_arc[0] != hi_arc[0]
            or lo_arc[1]
            or not hi_arc[1]
        ):
            raise ValueError(
                f"source {format_uid(lo_arc[0])} lacks a low/high arc pair"
            )
        nodes.append(Node(lo_arc[0], lo_arc[2], hi_arc[2]))
        lo_arc = next(it, None)
    return Bdd(nodes, a.root)


# ---------------------------------------------------------------------------
# External on-disk layouts
# ---------------------------------------------------------------------------

_NODE_MAGIC = b"SBDDNODE"
_ARC_MAGIC = b"SBDDARCS"
_FLAG_BIT = 1 << 63


def save_bdd(f: Bdd, path) -> None:
    """Node file layout: magic, root word, node count, level count,
    (label, count) words per level, then 3 uid-words per node."""
    with open(path, "wb") as fh:
        fh.write(_NODE_MAGIC)
        header = [f.root, len(f.nodes), len(f.levels)]
        fh.write(struct.pack("<%dQ" % len(header), *header))
        for lbl, cnt in f.levels:
            fh.write(struct.pack("<2Q", lbl, cnt))
        pack = struct.Struct("<3Q").pack
        for n in f.nodes:
            fh.write(pack(n.uid, n.low, n.high))


def load_bdd(path) -> Bdd:
    with open(path, "rb") as fh:
        if fh.read(8) != _NODE_MAGIC:
            raise ValueError("not a node file")
        root, count, nlevels = struct.unpack("<3Q", fh.read(24))
        fh.read(16 * nlevels)
        unpack = struct.Struct("<3Q").unpack
        nodes = [Node(*unpack(fh.read(24))) for _ in range(count)]
    return Bdd(nodes, root)


def _pack_arc(rec: tuple) -> bytes:
    src, flag, tgt = rec
    # the top bit of the source word carries the flag, so serialized arc
    # files only admit source labels below 2^23
    if src & _FLAG_BIT or src == NIL:
        raise ValueError("source uid does not fit the packed arc format")
    return struct.pack("<2Q", src | (_FLAG_BIT if flag else 0), tgt)


def _unpack_arc(blob: bytes) -> Arc:
    w0, tgt = struct.unpack("<2Q", blob)
    return Arc(w0 & ~_FLAG_BIT, bool(w0 & _FLAG_BIT), tgt)


def save_arcfile(a: ArcFile, path) -> None:
    """Arc file layout: magic, root word, internal count, terminal count,
    level count, (label, count) per level, then the two arc sections as
    2-word records with is_high packed into the source's top bit."""
    if a.root is None:
        raise ValueError("cannot save a multi-rooted intermediate arc file")
    with open(path, "wb") as fh:
        fh.write(_ARC_MAGIC)
        fh.write(
            struct.pack(
                "<4Q", a.root, len(a.internal), len(a.terminal), len(a.levels)
            )
        )
        for lbl, cnt in a.levels:
            fh.write(struct.pack("<2Q", lbl, cnt))
        for rec in a.internal:
            fh.write(_pack_arc(rec))
        for rec in a.terminal:
            fh.write(_pack_arc(rec))


def load_arcfile(path, policy: MemoryPolicy | None = None) -> ArcFile:
    with open(path, "rb") as fh:
        if fh.read(8) != _ARC_MAGIC:
            raise ValueError("not an arc file")
        root, n_int, n_term, nlevels = struct.unpack("<4Q", fh.read(32))
        levels = tuple(
            struct.unpack("<2Q", fh.read(16)) for _ in range(nlevels)
        )
        internal = RecordFile(3, policy)
        for _ in range(n_int):
            internal.append(_unpack_arc(fh.read(16)))
        term = RecordFile(3, policy)
        for _ in range(n_term):
            term.append(_unpack_arc(fh.read(16)))
    return ArcFile(internal.finalize(), term.finalize(), root, levels)
