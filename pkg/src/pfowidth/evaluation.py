"""Bottom-up evaluation of pfo-formulas on finite structures.

Each subformula evaluates to the set of assignments to its free variables that
satisfy it, so the cost is governed by ``domain ** width``.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass

from .errors import ArityMismatch, FreeVariablesPresent, StructureError, UnknownRelation
from .formula import And, Atom, Exists, Forall, Formula, Or


@dataclass(frozen=True)
class Structure:
    domain_size: int
    relations: dict  # name -> (arity, frozenset of tuples)

    def __post_init__(self):
        if self.domain_size < 1:
            raise StructureError("domain must be nonempty")
        for name, (arity, rows) in self.relations.items():
            for row in rows:
                if len(row) != arity:
                    raise StructureError(f"{name}: tuple {row} does not have arity {arity}")
                for x in row:
                    if not 0 <= x < self.domain_size:
                        raise StructureError(f"{name}: element {x} outside domain 0..{self.domain_size - 1}")

    @property
    def domain(self) -> range:
        return range(self.domain_size)


@dataclass(frozen=True)
class AssignmentRelation:
    schema: tuple  # sorted variable names
    rows: frozenset  # tuples aligned with schema

    def sorted_rows(self) -> list:
        return sorted(self.rows)

    def as_dicts(self) -> list:
        return [dict(zip(self.schema, r)) for r in self.sorted_rows()]

    def __len__(self):
        return len(self.rows)


@dataclass
class EvalStats:
    max_rows: int = 0
    max_schema: int = 0
    nodes: int = 0
    total_rows: int = 0

    def record(self, rel: AssignmentRelation):
        self.nodes += 1
        self.total_rows += len(rel.rows)
        self.max_rows = max(self.max_rows, len(rel.rows))
        self.max_schema = max(self.max_schema, len(rel.schema))


# --- structure text format ------------------------------------------------------------


def parse_structure(text: str) -> Structure:
    domain = None
    relations = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "domain":
            if domain is not None or len(parts) != 2 or not parts[1].isdigit():
                raise StructureError(f"line {lineno}: expected a single 'domain <n>' line")
            domain = int(parts[1])
            continue
        if domain is None:
            raise StructureError(f"line {lineno}: 'domain <n>' must come first")
        if not parts[0].lstrip("-").isdigit():
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise StructureError(f"line {lineno}: expected '<relation> <arity>'")
            name, arity = parts[0], int(parts[1])
            if name in relations:
                raise StructureError(f"line {lineno}: relation {name} declared twice")
            relations[name] = (arity, set())
            current = name
            continue
        if current is None:
            raise StructureError(f"line {lineno}: tuple outside a relation block")
        arity, rows = relations[current]
        try:
            row = tuple(int(p) for p in parts)
        except ValueError:
            raise StructureError(f"line {lineno}: malformed tuple {line!r}") from None
        if len(row) != arity:
            raise ArityMismatch(f"line {lineno}: {current} has arity {arity} but tuple has {len(row)} entries")
        for x in row:
            if not 0 <= x < domain:
                raise StructureError(f"line {lineno}: element {x} outside domain 0..{domain - 1}")
        rows.add(row)
    if domain is None:
        raise StructureError("missing 'domain <n>' line")
    if domain < 1:
        raise StructureError("domain must be nonempty")
    return Structure(domain, {k: (a, frozenset(r)) for k, (a, r) in relations.items()})


def format_structure(s: Structure) -> str:
    lines = [f"domain {s.domain_size}"]
    for name in sorted(s.relations):
        arity, rows = s.relations[name]
        lines.append(f"{name} {arity}")
        lines += [" ".join(map(str, r)) for r in sorted(rows)]
    return "\n".join(lines) + "\n"


# --- evaluation -------------------------------------------------------------------------


def _lookup(s: Structure, atom: Atom):
    if atom.relation not in s.relations:
        raise UnknownRelation(f"relation {atom.relation} is not declared in the structure")
    arity, rows = s.relations[atom.relation]
    if arity != len(atom.args):
        raise ArityMismatch(f"{atom.relation} has arity {arity} but is used with {len(atom.args)} arguments")
    return rows


def _atom(s, atom):
    rows = _lookup(s, atom)
    schema = tuple(sorted(set(atom.args)))
    pos = {v: i for i, v in enumerate(schema)}
    if atom.negated:
        out = set()
        for values in itertools.product(s.domain, repeat=len(schema)):
            if tuple(values[pos[a]] for a in atom.args) not in rows:
                out.add(values)
        return AssignmentRelation(schema, frozenset(out))
    out = set()
    for row in rows:
        binding = {}
        for a, x in zip(atom.args, row):
            if binding.setdefault(a, x) != x:
                break
        else:
            out.add(tuple(binding[v] for v in schema))
    return AssignmentRelation(schema, frozenset(out))


def join(a: AssignmentRelation, b: AssignmentRelation) -> AssignmentRelation:
    schema = tuple(sorted(set(a.schema) | set(b.schema)))
    shared = [v for v in a.schema if v in b.schema]
    ai = [a.schema.index(v) for v in shared]
    bi = [b.schema.index(v) for v in shared]
    index = defaultdict(list)
    for row in b.rows:
        index[tuple(row[i] for i in bi)].append(row)
    place = {v: ("a", i) for i, v in enumerate(a.schema)}
    for i, v in enumerate(b.schema):
        place.setdefault(v, ("b", i))
    picks = [place[v] for v in schema]
    out = set()
    for ra in a.rows:
        for rb in index.get(tuple(ra[i] for i in ai), ()):
            out.add(tuple(ra[i] if side == "a" else rb[i] for side, i in picks))
    return AssignmentRelation(schema, frozenset(out))


def extend(a: AssignmentRelation, schema: tuple, domain: range) -> AssignmentRelation:
    """Cylindrify ``a`` to ``schema`` (a superset) by pairing rows with every domain value."""
    missing = [v for v in schema if v not in a.schema]
    if not missing:
        return a
    out = set()
    for row in a.rows:
        known = dict(zip(a.schema, row))
        for values in itertools.product(domain, repeat=len(missing)):
            full = {**known, **dict(zip(missing, values))}
            out.add(tuple(full[v] for v in schema))
    return AssignmentRelation(schema, frozenset(out))


def union(a, b, domain) -> AssignmentRelation:
    schema = tuple(sorted(set(a.schema) | set(b.schema)))
    return AssignmentRelation(schema, extend(a, schema, domain).rows | extend(b, schema, domain).rows)


def project_out(a: AssignmentRelation, var: str) -> AssignmentRelation:
    if var not in a.schema:
        return a
    i = a.schema.index(var)
    return AssignmentRelation(a.schema[:i] + a.schema[i + 1:], frozenset(r[:i] + r[i + 1:] for r in a.rows))


def for_all(a: AssignmentRelation, var: str, domain_size: int) -> AssignmentRelation:
    if var not in a.schema:
        return a
    i = a.schema.index(var)
    counts = defaultdict(int)
    for r in a.rows:
        counts[r[:i] + r[i + 1:]] += 1
    return AssignmentRelation(a.schema[:i] + a.schema[i + 1:],
                              frozenset(k for k, c in counts.items() if c == domain_size))


def evaluate(f: Formula, s: Structure, stats: EvalStats = None) -> AssignmentRelation:
    """Satisfying assignments of ``free_vars(f)``, computed bottom-up."""

    def go(node):
        if isinstance(node, Atom):
            rel = _atom(s, node)
        elif isinstance(node, And):
            rel = join(go(node.left), go(node.right))
        elif isinstance(node, Or):
            rel = union(go(node.left), go(node.right), s.domain)
        elif isinstance(node, Exists):
            rel = project_out(go(node.body), node.var)
        elif isinstance(node, Forall):
            rel = for_all(go(node.body), node.var, s.domain_size)
        else:
            raise TypeError(f"cannot evaluate {type(node).__name__}")
        if stats is not None:
            stats.record(rel)
        return rel

    return go(f)


def holds(f: Formula, s: Structure) -> bool:
    if f.free:
        raise FreeVariablesPresent(f"formula has free variables {sorted(f.free)}")
    return bool(evaluate(f, s).rows)
