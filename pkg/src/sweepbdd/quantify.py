"""Multi-variable exists/forall on top of nested sweeping, the
single-variable baseline, and the transposition policies for the initial
top-down phase.

All policies end in the same place: a transposed OBDD plus the set of
still-to-be-quantified levels, handed to the nested sweep.  The policies are
opt-in (plain transposition is the default) because their payoff is
workload-dependent; every one of them is differentially tested to produce a
bit-identical final result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Bdd, NIL, Stats, is_terminal, make_const, terminal_value
from .nested import MISSING, NestingPolicy, nested_sweep, product_sweep
from .storage import ArcFile, MemoryPolicy, transpose, untranspose
from .sweep import AND, OR, BinOp, reduce

TRANSPOSITIONS = (
    "plain",
    "prune_top",
    "deepest_var",
    "partial",
    "repeated_partial",
)


@dataclass(frozen=True)
class QuantConfig:
    """Quantification knobs: which transposition policy runs the first
    top-down phase, the repeated-partial stopping bounds, and the nested
    sweep toggles."""

    transposition: str = "plain"
    epsilon: float = 0.5
    delta: int = 2
    terminal_arcs: bool = True
    bail_out: bool = True
    use_root_sorter: bool = True

    def __post_init__(self):
        if self.transposition not in TRANSPOSITIONS:
            raise ValueError(f"unknown transposition {self.transposition!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.delta < 1:
            raise ValueError("delta must be at least 1")

    def nesting(self, levels: Iterable[int], op: BinOp) -> NestingPolicy:
        return NestingPolicy(
            tuple(levels),
            op,
            terminal_arcs=self.terminal_arcs,
            bail_out=self.bail_out,
            use_root_sorter=self.use_root_sorter,
        )


def _root_seed(f: Bdd) -> list[tuple]:
    return [(f.root, MISSING, NIL, False)]


def exists(
    f: Bdd,
    xs: Iterable[int],
    cfg: QuantConfig | None = None,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
) -> Bdd:
    """The canonical Bdd of EXISTS xs: f."""
    return _quantify(f, xs, OR, cfg, stats, mem)


def forall(
    f: Bdd,
    xs: Iterable[int],
    cfg: QuantConfig | None = None,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
) -> Bdd:
    """FORALL is exists with the dual operator; there is no separate path."""
    return _quantify(f, xs, AND, cfg, stats, mem)


def _quantify(f, xs, op, cfg, stats, mem) -> Bdd:
    cfg = cfg or QuantConfig()
    if f.is_constant:
        return f
    levels = sorted(set(xs) & set(f.var_levels()))
    if not levels:
        return f
    arc, remaining = _transpose_phase(f, levels, op, cfg, stats, mem)
    if arc.root is not None and is_terminal(arc.root):
        return make_const(terminal_value(arc.root))
    if not remaining:
        return reduce(arc, mem, stats)
    return nested_sweep(arc, cfg.nesting(remaining, op), stats, mem)


def _transpose_phase(f, levels, op, cfg, stats, mem):
    kind = cfg.transposition
    if kind == "plain":
        return transpose(f, mem), tuple(levels)
    if kind == "prune_top":
        arc = transpose_prune_top(f, levels, op, mem, stats)
    elif kind == "deepest_var":
        arc, _ = transpose_deepest(f, levels, op, mem, stats)
    elif kind == "partial":
        arc, _ = transpose_partial(f, levels, op, mem, stats)
    else:
        arc, _ = transpose_repeated_partial(
            f, levels, cfg.epsilon, cfg.delta, op, mem, stats
        )
    remaining = tuple(sorted(set(levels) & set(arc.var_levels())))
    return arc, remaining


# ---------------------------------------------------------------------------
# Transposition policies
# ---------------------------------------------------------------------------


def transpose_prune_top(
    f: Bdd,
    xs: Iterable[int],
    op: BinOp = OR,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
) -> ArcFile:
    """Transpose while collapsing to-be-quantified nodes with an absorbing
    terminal child and skipping past ones with a neutral terminal child.
    With no quantified level present this is the plain transposition."""
    if f.is_constant:
        raise ValueError("cannot transpose a constant Bdd")
    return product_sweep(
        f.nodes,
        _root_seed(f),
        op,
        prune=frozenset(xs),
        policy=mem,
        stats=stats,
    )


def transpose_deepest(
    f: Bdd,
    xs: Iterable[int],
    op: BinOp = OR,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
):
    """Resolve the deepest quantified level during the transposition itself,
    saving that level's entire nested sweep."""
    levels = set(xs) & set(f.var_levels())
    if not levels:
        raise ValueError("no quantified level present")
    deepest = max(levels)
    arc = product_sweep(
        f.nodes,
        _root_seed(f),
        op,
        quantified=frozenset((deepest,)),
        count_or=True,
        policy=mem,
        stats=stats,
    )
    return arc, tuple(sorted(set(xs) & set(arc.var_levels())))


def transpose_partial(
    f: Bdd,
    xs: Iterable[int],
    op: BinOp = OR,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
):
    """Partially resolve every quantified level in one sweep.

    Requests grow to sorted 4-tuples when two quantified nodes meet; an
    absorbing terminal member resolves the whole request, neutral members
    and duplicates are pruned, and tuples still longer than two re-emit a
    node on the quantified level with the two halves as children."""
    arc = product_sweep(
        f.nodes,
        _root_seed(f),
        op,
        quantified=frozenset(xs),
        allow_quad=True,
        count_or=True,
        policy=mem,
        stats=stats,
    )
    return arc, tuple(sorted(set(xs) & set(arc.var_levels())))


def transpose_repeated_partial(
    f: Bdd,
    xs: Iterable[int],
    epsilon: float = 0.5,
    delta: int = 2,
    op: BinOp = OR,
    mem: MemoryPolicy | None = None,
    stats: Stats | None = None,
):
    """Repeat partial quantification, untransposing by a source-sort between
    rounds, until the file grows past (1+epsilon) * node_count(f), delta
    rounds have run, or no quantified level is left."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if delta < 1:
        raise ValueError("delta must be at least 1")
    bound = (1 + epsilon) * f.node_count()
    src = f
    runs = 0
    while True:
        arc, remaining = transpose_partial(src, xs, op, mem, stats)
        runs += 1
        if (
            arc.root is not None
            and is_terminal(arc.root)
            or not remaining
            or runs >= delta
            or arc.node_count() > bound
        ):
            return arc, remaining
        src = untranspose(arc, mem)


def quantify_single(
    f: Bdd,
    i: int,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
    op: BinOp = OR,
) -> Bdd:
    """Existentially quantify one variable in a single Apply-Reduce pass:
    copy requests above level i, fold each level-i node into the (low, high)
    pair, run the 2-ary op product below, then reduce."""
    if f.is_constant or i not in f.var_levels():
        return f
    arc = product_sweep(
        f.nodes,
        _root_seed(f),
        op,
        quantified=frozenset((i,)),
        count_or=True,
        policy=mem,
        stats=stats,
    )
    if arc.root is not None and is_terminal(arc.root):
        return make_const(terminal_value(arc.root))
    return reduce(arc, mem, stats)


def exists_one_by_one(
    f: Bdd,
    xs: Iterable[int],
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
) -> Bdd:
    """Fold of quantify_single, deepest variable first; the baseline nested
    sweeping is measured against."""
    for i in sorted(set(xs), reverse=True):
        f = quantify_single(f, i, stats, mem)
    return f


def forall_one_by_one(
    f: Bdd,
    xs: Iterable[int],
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
) -> Bdd:
    for i in sorted(set(xs), reverse=True):
        f = quantify_single(f, i, stats, mem, op=AND)
    return f
