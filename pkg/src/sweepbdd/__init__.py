"""sweepbdd: an iterative BDD engine on levelized sorted streams.

Depth-first recursion and hash tables are replaced by priority-queue-driven
sweeps over immutable node files, culminating in nested sweeping for
multi-variable quantification.  Ships with a QCIR QBF solver and a
Game-of-Life Garden-of-Eden checker as end-to-end drivers.
"""

from .core import (
    Arc,
    Bdd,
    Node,
    Stats,
    cmp_uid,
    is_terminal,
    label_of,
    id_of,
    make_const,
    make_nvar,
    make_var,
    terminal,
    terminal_value,
    uid,
    write_dot,
    FALSE_UID,
    TRUE_UID,
    MAX_LABEL,
)
from .levelpq import HeapLevelPQ, LevelPQ
from .nested import NestingPolicy, gc_sweep, nested_sweep, product_sweep
from .quantify import (
    QuantConfig,
    TRANSPOSITIONS,
    exists,
    exists_one_by_one,
    forall,
    forall_one_by_one,
    quantify_single,
    transpose_deepest,
    transpose_partial,
    transpose_prune_top,
    transpose_repeated_partial,
)
from .storage import (
    ArcFile,
    MemoryPolicy,
    RecordFile,
    Sorter,
    default_policy,
    load_arcfile,
    load_bdd,
    save_arcfile,
    save_bdd,
    set_default_policy,
    sort_records,
    transpose,
    untranspose,
)
from .sweep import AND, IMP, OPS, OR, XOR, BinOp, apply, apply_unreduced, negate, reduce

__version__ = "0.1.0"

__all__ = [
    "AND",
    "Arc",
    "ArcFile",
    "Bdd",
    "BinOp",
    "FALSE_UID",
    "HeapLevelPQ",
    "IMP",
    "LevelPQ",
    "MAX_LABEL",
    "MemoryPolicy",
    "NestingPolicy",
    "Node",
    "OPS",
    "OR",
    "QuantConfig",
    "RecordFile",
    "Sorter",
    "Stats",
    "TRANSPOSITIONS",
    "TRUE_UID",
    "XOR",
    "apply",
    "apply_unreduced",
    "cmp_uid",
    "default_policy",
    "exists",
    "exists_one_by_one",
    "forall",
    "forall_one_by_one",
    "gc_sweep",
    "id_of",
    "is_terminal",
    "label_of",
    "load_arcfile",
    "load_bdd",
    "make_const",
    "make_nvar",
    "make_var",
    "negate",
    "nested_sweep",
    "product_sweep",
    "quantify_single",
    "reduce",
    "save_arcfile",
    "save_bdd",
    "set_default_policy",
    "sort_records",
    "terminal",
    "terminal_value",
    "transpose",
    "transpose_deepest",
    "transpose_partial",
    "transpose_prune_top",
    "transpose_repeated_partial",
    "uid",
    "untranspose",
    "write_dot",
]
