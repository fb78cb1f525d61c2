"""The levelized monotone priority queue driving every sweep.

Elements are pushed for a *future* level and pulled in sorted order once
that level has been set up.  Pushing at or before the current level is a
sweep bug, so it is a hard assertion failure rather than an error value.

The default backing is one bucket per level, sorted lazily by the storage
sorter on first access; sorting a batch once is cheaper than maintaining
heap order per push.  A classic heap implementation hides behind the same
interface for differential testing.
"""

from __future__ import annotations

import heapq
from typing import Callable, Optional

from .storage import MemoryPolicy, Sorter


class LevelPQ:
    """Bucket-per-level monotone queue.

    `level_of` maps an element to its level label; `descending` flips the
    level order for bottom-up sweeps (the next level is then the largest
    pending label, and "beyond the current level" means a smaller label).
    Elements within a level are emitted in plain tuple order.
    """

    def __init__(
        self,
        level_of: Callable[[tuple], int],
        descending: bool = False,
        arity: int = 3,
        policy: MemoryPolicy | None = None,
    ):
        self._level_of = level_of
        self._desc = descending
        self._arity = arity
        self._policy = policy
        self._buckets: dict[int, Sorter] = {}
        self._current: Optional[int] = None
        self._started = False
        self._level_items: list[tuple] = []
        self._level_pos = 0
        self._size = 0

    def _beyond(self, level: int) -> bool:
        if not self._started:
            return True
        if self._desc:
            return level < self._current
        return level > self._current

    def push(self, e: tuple) -> None:
        level = self._level_of(e)
        assert self._beyond(level), (
            f"monotonicity violation: push at level {level} while at "
            f"{self._current}"
        )
        bucket = self._buckets.get(level)
        if bucket is None:
            bucket = self._buckets[level] = Sorter(self._arity, self._policy)
        bucket.push(e)
        self._size += 1

    def next_level(self) -> Optional[int]:
        """Label of the closest nonempty future level, or None."""
        if not self._buckets:
            return None
        return max(self._buckets) if self._desc else min(self._buckets)

    def setup_next_level(self, stop_label: Optional[int] = None) -> Optional[int]:
        """Advance to the next nonempty level, or to `stop_label` if that
        comes first in sweep order.  Returns the new current level, or None
        when the queue is exhausted and no stop label was given."""
        assert self._level_pos >= len(self._level_items), "current level not drained"
        nxt = self.next_level()
        if nxt is None and stop_label is None:
            self._current = None
            return None
        if stop_label is None:
            level = nxt
        elif nxt is None:
            level = stop_label
        else:
            level = (
                max(stop_label, nxt) if self._desc else min(stop_label, nxt)
            )
        self._started = True
        self._current = level
        bucket = self._buckets.pop(level, None)
        if bucket is None:
            self._level_items = []
        else:
            self._level_items = list(bucket.finalize())
        self._level_pos = 0
        return level

    @property
    def current_level(self) -> Optional[int]:
        return self._current

    def empty_level(self) -> bool:
        return self._level_pos >= len(self._level_items)

    def peek(self) -> tuple:
        assert not self.empty_level(), "peek on a drained level"
        return self._level_items[self._level_pos]

    def pull(self) -> tuple:
        assert not self.empty_level(), "pull on a drained level"
        e = self._level_items[self._level_pos]
        self._level_pos += 1
        self._size -= 1
        return e

    def __len__(self) -> int:
        return self._size

    def has_pending(self) -> bool:
        return self._size > 0


class HeapLevelPQ:
    """Heap-backed variant with the same interface; for differential tests."""

    def __init__(
        self,
        level_of: Callable[[tuple], int],
        descending: bool = False,
        arity: int = 3,
        policy: MemoryPolicy | None = None,
    ):
        self._level_of = level_of
        self._desc = descending
        self._heap: list[tuple] = []
        self._current: Optional[int] = None
        self._started = False
        self._size = 0

    def _key(self, level: int):
        return -level if self._desc else level

    def push(self, e: tuple) -> None:
        level = self._level_of(e)
        if self._started:
            assert (level < self._current) if self._desc else (
                level > self._current
            ), "monotonicity violation"
        heapq.heappush(self._heap, (self._key(level), e))
        self._size += 1

    def next_level(self) -> Optional[int]:
        # skip entries already belonging to the drained current level
        if not self._heap:
            return None
        k = self._heap[0][0]
        return -k if self._desc else k

    def setup_next_level(self, stop_label: Optional[int] = None) -> Optional[int]:
        nxt = self.next_level()
        if nxt is None and stop_label is None:
            self._current = None
            return None
        if stop_label is None:
            level = nxt
        elif nxt is None:
            level = stop_label
        else:
            level = max(stop_label, nxt) if self._desc else min(stop_label, nxt)
        self._started = True
        self._current = level
        return level

    @property
    def current_level(self) -> Optional[int]:
        return self._current

    def empty_level(self) -> bool:
        return not self._heap or self._heap[0][0] != self._key(self._current)

    def peek(self) -> tuple:
        assert not self.empty_level()
        return self._heap[0][1]

    def pull(self) -> tuple:
        assert not self.empty_level()
        self._size -= 1
        return heapq.heappop(self._heap)[1]

    def __len__(self) -> int:
        return self._size

    def has_pending(self) -> bool:
        return self._size > 0
