"""CNF formulas with a symbolic variable registry, evaluation and DIMACS I/O."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable


class FormulaError(ValueError):
    pass


class DimacsError(FormulaError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


def name_str(name) -> str:
    """Render a structured name ('X', 1, 2) as X[1,2]."""
    if isinstance(name, tuple):
        tag, *idx = name
        return f"{tag}[{','.join(str(i) for i in idx)}]" if idx else str(tag)
    return str(name)


class VarRegistry:
    """Injective map from semantic names to dense variable ids 1..n."""

    def __init__(self):
        self._ids: dict = {}
        self._names: list = [None]

    @property
    def next_free(self) -> int:
        return len(self._names)

    def __len__(self) -> int:
        return len(self._names) - 1

    def register(self, name) -> int:
        if name in self._ids:
            raise FormulaError(f"variable {name_str(name)} already registered as {self._ids[name]}")
        vid = len(self._names)
        self._ids[name] = vid
        self._names.append(name)
        return vid

    def id(self, name) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise FormulaError(f"unknown variable {name_str(name)}") from None

    def get(self, name, default=None):
        return self._ids.get(name, default)

    def __contains__(self, name) -> bool:
        return name in self._ids

    def name(self, vid: int):
        if not 1 <= vid < len(self._names):
            raise FormulaError(f"variable id {vid} out of range")
        return self._names[vid]

    def items(self):
        for vid in range(1, len(self._names)):
            yield vid, self._names[vid]

    def semantic_map(self) -> str:
        return "".join(f"{vid} {name_str(nm)}\n" for vid, nm in self.items())


def register_var(registry: VarRegistry, name) -> int:
    return registry.register(name)


def make_clause(lits: Iterable[int]) -> tuple:
    """Sorted literal tuple; duplicates and tautologies are rejected."""
    lits = list(lits)
    s = set(lits)
    if len(s) != len(lits):
        raise FormulaError(f"duplicate literal in clause {lits}")
    if 0 in s:
        raise FormulaError("literal 0 in clause")
    for l in s:
        if -l in s:
            raise FormulaError(f"tautological clause {sorted(lits)}")
    return tuple(sorted(s))


@dataclass
class Formula:
    clauses: list = field(default_factory=list)
    registry: VarRegistry = field(default_factory=VarRegistry)
    meta: dict = field(default_factory=dict)

    @property
    def nvars(self) -> int:
        return len(self.registry)

    def add(self, lits) -> int:
        c = make_clause(lits)
        n = len(self.registry)
        for l in c:
            if abs(l) > n:
                raise FormulaError(f"literal {l} uses an unregistered variable")
        self.clauses.append(c)
        return len(self.clauses)

    def var(self, *name) -> int:
        return self.registry.id(tuple(name) if len(name) > 1 else name[0])

    def num_literals(self) -> int:
        return sum(len(c) for c in self.clauses)


def formula_from_clauses(clauses, nvars: int | None = None, meta=None) -> Formula:
    """Formula over anonymous variables v1..vn."""
    clauses = [make_clause(c) for c in clauses]
    if nvars is None:
        nvars = max((abs(l) for c in clauses for l in c), default=0)
    reg = VarRegistry()
    for i in range(1, nvars + 1):
        reg.register(("v", i))
    f = Formula(registry=reg, meta=dict(meta or {}))
    for c in clauses:
        if c and abs(c[-1]) > nvars or c and abs(c[0]) > nvars:
            raise FormulaError(f"clause {c} exceeds nvars={nvars}")
        f.clauses.append(c)
    return f


def eval_formula(formula: Formula, assignment) -> bool:
    missing = [v for v in range(1, formula.nvars + 1) if v not in assignment]
    if missing:
        raise FormulaError(f"assignment is missing variables {missing[:20]}")
    for c in formula.clauses:
        if not any(assignment[abs(l)] == (l > 0) for l in c):
            return False
    return True


def var_order(l: int):
    """Literals are written by variable index (x1 before -x2)."""
    return abs(l), l < 0


def dimacs_write(formula: Formula, sink=None) -> str:
    out = io.StringIO()
    out.write(f"p cnf {formula.nvars} {len(formula.clauses)}\n")
    for c in formula.clauses:
        out.write(" ".join(map(str, sorted(c, key=var_order))))
        out.write(" 0\n" if c else "0\n")
    text = out.getvalue()
    if sink is not None:
        sink.write(text)
    return text


def dimacs_bytes(formula: Formula) -> bytes:
    return dimacs_write(formula).encode("ascii")


def dimacs_read(source) -> Formula:
    text = source if isinstance(source, str) else source.read()
    header = None
    clauses = []
    cur: list = []
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(no, f"malformed header {s!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(no, f"malformed header {s!r}") from None
            continue
        if header is None:
            raise DimacsError(no, "clause before header")
        for tok in s.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(no, f"bad literal token {tok!r}") from None
            if lit == 0:
                try:
                    clauses.append(make_clause(cur))
                except FormulaError as e:
                    raise DimacsError(no, str(e)) from None
                cur = []
            else:
                if abs(lit) > header[0]:
                    raise DimacsError(no, f"literal {lit} exceeds declared {header[0]} variables")
                cur.append(lit)
    if header is None:
        raise DimacsError(0, "missing header")
    if cur:
        raise DimacsError(len(text.splitlines()), "unterminated clause")
    if len(clauses) != header[1]:
        raise DimacsError(0, f"header declares {header[1]} clauses, found {len(clauses)}")
    return formula_from_clauses(clauses, nvars=header[0])


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def fingerprint(formula: Formula) -> str:
    return f"{fnv1a64(dimacs_bytes(formula)):016x}"
