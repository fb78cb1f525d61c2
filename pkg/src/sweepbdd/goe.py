"""Conway's Game of Life transition relations and the Garden-of-Eden check.

The relation couples a padded previous board of (rows+2) x (cols+2) cells
with the inner next board.  Next-state variables follow row-major order and
each inner cell's previous-state variable sits immediately before its
next-state variable; the remaining border cells of a row come right before
that row's first interleaved pair, left to right, with the full top border
row attached to the first inner row and the bottom one appended at the end.
This interleaving keeps the per-cell life constraints narrow so the
relation itself stays polynomial; the hardness of the problem only shows up
as growth while the previous-state variables are quantified away.

A configuration without a predecessor exists exactly when the existential
projection of the relation onto the next-state variables is not the
constant true function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import Bdd, Stats, make_const, make_nvar, make_var
from .quantify import QuantConfig, exists, exists_one_by_one
from .storage import MemoryPolicy
from .sweep import AND, OR, apply, negate

MAX_DESK_SIZE = 8


@dataclass(frozen=True)
class Grid:
    """Inner board dimensions; the previous board carries a 1-cell border."""

    n_r: int
    n_c: int

    def __post_init__(self):
        if not (1 <= self.n_r and 1 <= self.n_c):
            raise ValueError("grid dimensions must be positive")

    def prev_cells(self):
        for r in range(self.n_r + 2):
            for c in range(self.n_c + 2):
                yield r, c

    def inner_cells(self):
        for r in range(1, self.n_r + 1):
            for c in range(1, self.n_c + 1):
                yield r, c


class GoeVarMap:
    """Label layout for one transition relation.

    `prev[(r, c)]` covers the padded board, `next_[(r, c)]` the inner board.
    `mirror_rows=True` reuses one next-state label for each vertically
    mirrored cell pair, restricting the encoded image to symmetric boards.
    """

    def __init__(self, grid: Grid, mirror_rows: bool = False):
        self.grid = grid
        self.mirror_rows = mirror_rows
        self.prev: dict[tuple[int, int], int] = {}
        self.next_: dict[tuple[int, int], int] = {}
        nr, nc = grid.n_r, grid.n_c
        label = 0
        for c in range(nc + 2):
            self.prev[(0, c)] = label
            label += 1
        for r in range(1, nr + 1):
            self.prev[(r, 0)] = label
            label += 1
            self.prev[(r, nc + 1)] = label
            label += 1
            for c in range(1, nc + 1):
                self.prev[(r, c)] = label
                label += 1
                mirrored = (nr + 1 - r, c)
                if mirror_rows and mirrored < (r, c):
                    self.next_[(r, c)] = self.next_[mirrored]
                else:
                    self.next_[(r, c)] = label
                    label += 1
        for c in range(nc + 2):
            self.prev[(nr + 1, c)] = label
            label += 1
        self._end = label

    def prev_labels(self) -> set[int]:
        return set(self.prev.values())

    def next_labels(self) -> set[int]:
        return set(self.next_.values())

    def neighborhood(self, r: int, c: int) -> list[int]:
        """The nine previous-state labels around inner cell (r, c), in
        ascending label order."""
        return sorted(
            self.prev[(r + dr, c + dc)]
            for dr in (-1, 0, 1)
            for dc in (-1, 0, 1)
        )


def _exact_counts(labels: list[int], mem, stats) -> list[Bdd]:
    """exact-k predicates for k = 0..5 over the given cells, where bucket 5
    saturates (means "5 or more"); only 3 and 4 matter to life."""
    cap = 5
    counts = [make_const(k == 0) for k in range(cap + 1)]
    for lbl in labels:
        v = make_var(lbl)
        nv = make_nvar(lbl)
        nxt = []
        for k in range(cap):
            stay = apply(counts[k], nv, AND, mem, stats)
            if k == 0:
                nxt.append(stay)
            else:
                up = apply(counts[k - 1], v, AND, mem, stats)
                nxt.append(apply(stay, up, OR, mem, stats))
        # once saturated, stay saturated regardless of the cell
        up = apply(counts[cap - 1], v, AND, mem, stats)
        nxt.append(apply(counts[cap], up, OR, mem, stats))
        counts = nxt
    return counts


def cell_constraint(vmap: GoeVarMap, r: int, c: int, mem=None, stats=None) -> Bdd:
    """next(r,c) <-> life rule over the 9-cell neighborhood: counting the
    center among the live cells, a cell is alive next iff the count is
    exactly 3, or it is alive and the count is exactly 4."""
    hood = vmap.neighborhood(r, c)
    counts = _exact_counts(hood, mem, stats)
    center = make_var(vmap.prev[(r, c)])
    alive_next = apply(
        counts[3], apply(center, counts[4], AND, mem, stats), OR, mem, stats
    )
    nxt = make_var(vmap.next_[(r, c)])
    # x <-> y as not(x xor y) without a dedicated op
    both = apply(nxt, alive_next, AND, mem, stats)
    neither = apply(negate(nxt), negate(alive_next), AND, mem, stats)
    return apply(both, neither, OR, mem, stats)


def build_transition(
    grid: Grid,
    vmap: GoeVarMap | None = None,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> Bdd:
    """Conjunction of every inner cell's life constraint, row-major."""
    vmap = vmap or GoeVarMap(grid)
    rel = make_const(True)
    for r, c in grid.inner_cells():
        rel = apply(rel, cell_constraint(vmap, r, c, mem, stats), AND, mem, stats)
    return rel


def build_transition_symmetric(
    grid: Grid,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> tuple[Bdd, GoeVarMap]:
    """Variable-reuse variant: mirrored rows share next-state labels, so the
    image is restricted to vertically symmetric boards."""
    vmap = GoeVarMap(grid, mirror_rows=True)
    return build_transition(grid, vmap, mem, stats), vmap


def has_goe(
    grid: Grid,
    cfg: QuantConfig | None = None,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
    one_by_one: bool = False,
) -> bool:
    """True iff some next-state board has no predecessor: the projection of
    the transition relation onto next-state variables is not constant true."""
    vmap = GoeVarMap(grid)
    rel = build_transition(grid, vmap, mem, stats)
    if one_by_one:
        image = exists_one_by_one(rel, vmap.prev_labels(), stats, mem)
    else:
        image = exists(rel, vmap.prev_labels(), cfg, stats, mem)
    return not (image.is_constant and image.value)


def life_step(board: list[list[bool]]) -> list[list[bool]]:
    """Reference Life step: next inner board of a padded previous board.
    The board is (n_r+2) x (n_c+2); the result is n_r x n_c."""
    nr = len(board) - 2
    nc = len(board[0]) - 2
    out = []
    for r in range(1, nr + 1):
        row = []
        for c in range(1, nc + 1):
            n = sum(
                board[r + dr][c + dc]
                for dr in (-1, 0, 1)
                for dc in (-1, 0, 1)
                if (dr, dc) != (0, 0)
            )
            row.append(n == 3 or (board[r][c] and n == 2))
        out.append(row)
    return out
