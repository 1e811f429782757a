"""Brute-force reference implementations used to check the real algorithms.

Everything here is deliberately simple and exhaustive, sharing as little code
with the optimized modules as practical.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Mapping

from .errors import BudgetExceeded, TooLarge
from .evaluation import AssignmentRelation, Structure, evaluate
from .formula import (
    CONNECTIVES,
    QUANTIFIERS,
    SPLIT_CONNECTIVE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Or,
    all_vars,
    relations,
    rename_free,
    renaming_is_safe,
    replace_at,
    subformulas,
    with_children,
)
from .rules import RULES, enumerate_steps, apply_step
from .treewidth import Hypergraph

STRUCTURE_BUDGET = 24
NAIVE_BUDGET = 3 ** 6


def canonical_alpha(f: Formula) -> Formula:
    """Rename bound variables to ``_a0, _a1, ...`` by preorder binding position."""
    free = f.free
    counter = itertools.count()

    def fresh():
        while True:
            name = f"_a{next(counter)}"
            if name not in free:
                return name

    def go(node, env):
        if isinstance(node, Atom):
            return Atom(node.relation, tuple(env.get(a, a) for a in node.args), node.negated)
        if isinstance(node, QUANTIFIERS):
            new = fresh()
            return type(node)(new, go(node.body, {**env, node.var: new}))
        if isinstance(node, CONNECTIVES):
            return type(node)(go(node.left, env), go(node.right, env))
        return node

    return go(f, {})


@dataclass(frozen=True)
class ClosureBounds:
    max_steps: int = 20000  # states expanded
    max_size: int = 24  # nodes per formula
    max_frontier: int = 50000

    def __post_init__(self):
        if min(self.max_steps, self.max_size, self.max_frontier) < 1:
            raise ValueError("closure bounds must be positive")


@dataclass(frozen=True)
class ClosureResult:
    states: frozenset
    min_width: int
    status: str  # "complete" or "bounds-exhausted"
    witness: Formula = None  # a state of minimum width

    def __iter__(self):
        return iter((self.states, self.min_width, self.status))


_CLOSURE_RULES = tuple(r for r in RULES if r not in ("N", "Sup"))


def _sup_moves(f):
    """Splitup modulo renaming: the right quantifier is first renamed to the left one's variable."""
    for path, node in subformulas(f):
        if not isinstance(node, CONNECTIVES):
            continue
        l, r = node.left, node.right
        if not (isinstance(l, QUANTIFIERS) and type(l) is type(r) and SPLIT_CONNECTIVE[type(l)] is type(node)):
            continue
        if l.var != r.var:
            if l.var in all_vars(r.body) or not renaming_is_safe(r.body, r.var, l.var):
                continue
            r = type(r)(l.var, rename_free(r.body, r.var, l.var))
        merged = type(l)(l.var, type(node)(l.body, r.body))
        yield replace_at(f, path, merged)


def _width(f):
    return max(len(n.free) for _, n in subformulas(f))


def rewrite_closure(f: Formula, bounds: ClosureBounds = ClosureBounds()) -> ClosureResult:
    """Breadth-first search over all rule applications in both directions, except inserting quantifiers.

    Renaming is quotiented out by keeping states alpha-canonical.
    """
    start = canonical_alpha(f)
    seen = {start}
    queue = deque([start])
    best, best_width = start, _width(start)
    expanded = 0
    status = "complete"
    while queue:
        if expanded >= bounds.max_steps or len(queue) > bounds.max_frontier:
            status = "bounds-exhausted"
            break
        g = queue.popleft()
        expanded += 1
        successors = [apply_step(g, s) for s in enumerate_steps(g, _CLOSURE_RULES)]
        successors.extend(_sup_moves(g))
        for h in successors:
            h = canonical_alpha(h)
            if h in seen:
                continue
            if h.size > bounds.max_size:
                status = "bounds-exhausted"
                continue
            seen.add(h)
            queue.append(h)
            w = _width(h)
            if w < best_width:
                best, best_width = h, w
    return ClosureResult(frozenset(seen), best_width, status, best)


# --- structures -------------------------------------------------------------------------


def enum_structures(vocab: Mapping[str, int], max_domain: int) -> Iterator[Structure]:
    """Every structure over ``vocab`` with domain size 1..max_domain."""
    cells = sum(max_domain ** a for a in vocab.values())
    if cells > STRUCTURE_BUDGET:
        raise BudgetExceeded(f"{cells} tuple slots exceed the enumeration budget {STRUCTURE_BUDGET}")
    names = sorted(vocab)
    for d in range(1, max_domain + 1):
        universes = [list(itertools.product(range(d), repeat=vocab[n])) for n in names]
        for mask in itertools.product(*[range(2 ** len(u)) for u in universes]):
            rels = {}
            for n, u, m in zip(names, universes, mask):
                rels[n] = (vocab[n], frozenset(t for i, t in enumerate(u) if m >> i & 1))
            yield Structure(d, rels)


def semantically_equiv(f1: Formula, f2: Formula, max_domain: int = 2) -> bool:
    """Agreement on every structure up to ``max_domain`` elements (a bounded check, not a proof)."""
    vocab = dict(relations(f1))
    for name, arity in relations(f2).items():
        if vocab.setdefault(name, arity) != arity:
            return False
    schema = tuple(sorted(f1.free | f2.free))
    for s in enum_structures(vocab, max_domain):
        a = _on_schema(naive_or_fast(f1, s), schema, s)
        b = _on_schema(naive_or_fast(f2, s), schema, s)
        if a != b:
            return False
    return True


def naive_or_fast(f, s):
    if s.domain_size ** len(all_vars(f)) <= NAIVE_BUDGET:
        return naive_evaluate(f, s)
    return evaluate(f, s)


def _on_schema(rel, schema, s):
    missing = [v for v in schema if v not in rel.schema]
    out = set()
    for row in rel.rows:
        known = dict(zip(rel.schema, row))
        for values in itertools.product(range(s.domain_size), repeat=len(missing)):
            full = {**known, **dict(zip(missing, values))}
            out.add(tuple(full[v] for v in schema))
    return frozenset(out)


def naive_evaluate(f: Formula, s: Structure) -> AssignmentRelation:
    """Truth of ``f`` under every assignment of its free variables, by direct recursion."""
    if s.domain_size ** len(all_vars(f)) > NAIVE_BUDGET:
        raise BudgetExceeded("too many assignments for the naive evaluator")
    schema = tuple(sorted(f.free))

    def true(node, env):
        if isinstance(node, Atom):
            arity, rows = s.relations[node.relation]
            if arity != len(node.args):
                raise ValueError(f"arity mismatch for {node.relation}")
            return (tuple(env[a] for a in node.args) in rows) != node.negated
        if isinstance(node, And):
            return true(node.left, env) and true(node.right, env)
        if isinstance(node, Or):
            return true(node.left, env) or true(node.right, env)
        if isinstance(node, Exists):
            return any(true(node.body, {**env, node.var: d}) for d in range(s.domain_size))
        if isinstance(node, Forall):
            return all(true(node.body, {**env, node.var: d}) for d in range(s.domain_size))
        raise TypeError(type(node).__name__)

    rows = set()
    for values in itertools.product(range(s.domain_size), repeat=len(schema)):
        if true(f, dict(zip(schema, values))):
            rows.add(values)
    return AssignmentRelation(schema, frozenset(rows))


# --- treewidth ---------------------------------------------------------------------------


def brute_treewidth(h: Hypergraph) -> int:
    """Minimum over all elimination orderings of the largest later-neighbourhood."""
    vertices = sorted(h.vertices)
    if len(vertices) > 8:
        raise TooLarge("brute-force treewidth is limited to 8 vertices")
    base = {v: set() for v in vertices}
    for e in h.edges:
        for a in e:
            for b in e:
                if a != b:
                    base[a].add(b)
    best = 0 if not vertices else len(vertices) - 1
    for perm in itertools.permutations(vertices):
        adj = {v: set(n) for v, n in base.items()}
        worst = 0
        for v in perm:
            nb = adj.pop(v)
            worst = max(worst, len(nb))
            if worst >= best:
                break
            for a in nb:
                adj[a].discard(v)
                adj[a] |= nb - {a}
        best = min(best, worst)
    return best
