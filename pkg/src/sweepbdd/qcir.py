"""QCIR (QCIR-14, prenex subset) parsing and BDD-based QBF solving.

Accepted input::

    #QCIR-G14            (format comment, optional)
    exists(v1, v2, ...)  (prenex lines, any alternation)
    forall(...)
    output(lit)
    g1 = and(lit, ...)   (gates: and/or n-ary, xor binary, ite ternary)

Lines starting with '#' are comments; keywords are case-insensitive; gate
and variable names share one namespace of word characters.  The formula
must be closed (every matrix variable quantified exactly once) and gates
must be defined before use, which also rules out cycles.  Quantifier gates
inside the matrix and free() lines are rejected.

Solving builds each gate's Bdd bottom-up and then folds the prenex from the
innermost block outward; the prenex fold is where multi-variable
quantification earns its keep, since it typically dwarfs the matrix
construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .core import Bdd, Stats, make_const, make_nvar, make_var
from .quantify import QuantConfig, exists, exists_one_by_one, forall, forall_one_by_one
from .storage import MemoryPolicy
from .sweep import AND, OR, XOR, apply, negate

GATE_KINDS = ("and", "or", "xor", "ite")

_NAME = r"[A-Za-z0-9_.$]+"
_QUANT_RE = re.compile(rf"(exists|forall|free)\s*\(\s*([^)]*)\)\s*$", re.I)
_OUTPUT_RE = re.compile(rf"output\s*\(\s*(-?)\s*({_NAME})\s*\)\s*$", re.I)
_GATE_RE = re.compile(
    rf"({_NAME})\s*=\s*([A-Za-z]+)\s*\(\s*([^)]*)\)\s*$", re.I
)
_LIT_RE = re.compile(rf"^(-?)\s*({_NAME})$")


class QcirError(ValueError):
    """Parse or well-formedness error, carrying a 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


Literal = tuple[str, bool]  # (name, negated)


@dataclass
class Gate:
    name: str
    kind: str
    args: list[Literal]


@dataclass
class Circuit:
    prenex: list[tuple[str, list[str]]]
    output: Literal
    gates: list[Gate]

    @property
    def variables(self) -> list[str]:
        return [v for _, block in self.prenex for v in block]


def _parse_literal(tok: str, line: int) -> Literal:
    m = _LIT_RE.match(tok.strip())
    if not m:
        raise QcirError(f"bad literal {tok.strip()!r}", line)
    return m.group(2), m.group(1) == "-"


def parse_qcir(text: str) -> Circuit:
    prenex: list[tuple[str, list[str]]] = []
    gates: list[Gate] = []
    gate_names: set[str] = set()
    quantified: set[str] = set()
    output: Optional[Literal] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if output is None:
            m = _QUANT_RE.match(line)
            if m:
                kind = m.group(1).lower()
                if kind == "free":
                    raise QcirError(
                        "free variables are not supported; the formula must "
                        "be closed",
                        lineno,
                    )
                block = []
                body = m.group(2).strip()
                for tok in body.split(",") if body else []:
                    name, neg = _parse_literal(tok, lineno)
                    if neg:
                        raise QcirError("negated variable in prenex", lineno)
                    if name in quantified:
                        raise QcirError(
                            f"variable {name!r} quantified twice", lineno
                        )
                    quantified.add(name)
                    block.append(name)
                prenex.append((kind, block))
                continue
            m = _OUTPUT_RE.match(line)
            if m:
                output = (m.group(2), m.group(1) == "-")
                continue
            raise QcirError(
                "expected a quantifier block or output line before gate "
                "definitions",
                lineno,
            )
        m = _GATE_RE.match(line)
        if not m:
            raise QcirError(f"unparsable gate definition {line!r}", lineno)
        name, kind, body = m.group(1), m.group(2).lower(), m.group(3).strip()
        if ";" in body or kind in ("exists", "forall", "free"):
            raise QcirError(
                "quantifier gates are only supported in the prenex", lineno
            )
        if kind not in GATE_KINDS:
            raise QcirError(f"unsupported gate kind {kind!r}", lineno)
        if name in gate_names or name in quantified:
            raise QcirError(f"name {name!r} defined twice", lineno)
        args = [
            _parse_literal(tok, lineno)
            for tok in (body.split(",") if body else [])
        ]
        if kind == "xor" and len(args) != 2:
            raise QcirError("xor takes exactly two operands", lineno)
        if kind == "ite" and len(args) != 3:
            raise QcirError("ite takes exactly three operands", lineno)
        for ref, _neg in args:
            if ref not in gate_names and ref not in quantified:
                raise QcirError(
                    f"reference to undefined name {ref!r} (gates must be "
                    "defined before use)",
                    lineno,
                )
        gates.append(Gate(name, kind, args))
        gate_names.add(name)

    if output is None:
        raise QcirError("missing output(...) line")
    if output[0] not in gate_names and output[0] not in quantified:
        raise QcirError(f"output references undefined name {output[0]!r}")
    return Circuit(prenex, output, gates)


def parse_qcir_file(path) -> Circuit:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_qcir(fh.read())


def dfs_var_order(c: Circuit) -> dict[str, int]:
    """Label assignment from a depth-first walk of the circuit: variables
    get ascending labels in first-visit order starting at the output and
    descending through operands left to right; variables the matrix never
    reaches come last, in prenex order."""
    gates = {g.name: g for g in c.gates}
    order: dict[str, int] = {}
    visited_gates: set[str] = set()
    stack = [c.output[0]]
    while stack:
        name = stack.pop()
        g = gates.get(name)
        if g is None:
            if name not in order:
                order[name] = len(order)
            continue
        if name in visited_gates:
            continue
        visited_gates.add(name)
        stack.extend(ref for ref, _ in reversed(g.args))
    for v in c.variables:
        if v not in order:
            order[v] = len(order)
    return order


def merge_blocks(
    prenex: list[tuple[str, list[str]]],
) -> list[tuple[str, list[str]]]:
    """Concatenate maximal runs of adjacent same-quantifier blocks."""
    merged: list[tuple[str, list[str]]] = []
    for quant, block in prenex:
        if merged and merged[-1][0] == quant:
            merged[-1] = (quant, merged[-1][1] + list(block))
        else:
            merged.append((quant, list(block)))
    return merged


def solve(
    c: Circuit,
    cfg: QuantConfig | None = None,
    stats: Stats | None = None,
    mem: MemoryPolicy | None = None,
    one_by_one: bool = False,
) -> bool:
    """Decide a closed QBF: gate Bdds bottom-up, then the prenex folded
    innermost-first with exists/forall per block."""
    order = dfs_var_order(c)
    bdds: dict[str, Bdd] = {}

    def lit_bdd(lit: Literal) -> Bdd:
        name, neg = lit
        if name in bdds:
            b = bdds[name]
            return negate(b) if neg else b
        return make_nvar(order[name]) if neg else make_var(order[name])

    for g in c.gates:
        args = [lit_bdd(a) for a in g.args]
        if g.kind == "and":
            b = make_const(True)
            for x in args:
                b = apply(b, x, AND, mem, stats)
        elif g.kind == "or":
            b = make_const(False)
            for x in args:
                b = apply(b, x, OR, mem, stats)
        elif g.kind == "xor":
            b = apply(args[0], args[1], XOR, mem, stats)
        else:  # ite(c, t, e) = (c and t) or (not c and e)
            b = apply(
                apply(args[0], args[1], AND, mem, stats),
                apply(negate(args[0]), args[2], AND, mem, stats),
                OR,
                mem,
                stats,
            )
        bdds[g.name] = b

    matrix = lit_bdd(c.output)
    for quant, block in reversed(merge_blocks(c.prenex)):
        labels = {order[v] for v in block}
        if one_by_one:
            matrix = (
                exists_one_by_one(matrix, labels, stats, mem)
                if quant == "exists"
                else forall_one_by_one(matrix, labels, stats, mem)
            )
        elif quant == "exists":
            matrix = exists(matrix, labels, cfg, stats, mem)
        else:
            matrix = forall(matrix, labels, cfg, stats, mem)
    assert matrix.is_constant, "closed formula left free variables"
    return matrix.value
