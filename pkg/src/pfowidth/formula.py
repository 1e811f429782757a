"""Positive first-order formulas: syntax trees, parsing, printing and basic measures.

Formulas are immutable. Every node caches its free-variable set, its size and
its hash on construction, so ``free_vars`` and hashing are O(1) and the
measures below are linear in the formula size.

Connectives are binary. ``R(x) & S(x) & T(x)`` parses as
``And(R(x), And(S(x), T(x)))`` and prints back without parentheses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence, Union

from .errors import FormulaSyntaxError, InvalidPath

Var = str
Path = tuple

VAR_RE = re.compile(r"[a-z_][A-Za-z0-9_]*\Z")
REL_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
KEYWORDS = frozenset({"exists", "forall"})


def _eq(self, other):
    if self is other:
        return True
    if type(self) is not type(other):
        return NotImplemented
    if self._hash != other._hash:
        return False
    return self._key() == other._key()


@dataclass(frozen=True, slots=True, eq=False)
class Atom:
    relation: str
    args: tuple
    negated: bool = False
    free: frozenset = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "free", frozenset(self.args))
        object.__setattr__(self, "size", 1)
        object.__setattr__(self, "_hash", hash(self._key()))

    def _key(self):
        return ("R", self.relation, self.args, self.negated)

    __eq__ = _eq

    def __hash__(self):
        return self._hash

    def __str__(self):
        return format_formula(self)

    @property
    def children(self):
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Hole:
    """Placeholder leaf of a holey formula; ``vars`` is its associated variable set."""

    index: int
    vars: frozenset = frozenset()
    free: frozenset = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vars", frozenset(self.vars))
        object.__setattr__(self, "free", self.vars)
        object.__setattr__(self, "size", 1)
        object.__setattr__(self, "_hash", hash(self._key()))

    def _key(self):
        return ("H", self.index, self.vars)

    __eq__ = _eq

    def __hash__(self):
        return self._hash

    def __str__(self):
        return format_formula(self)

    @property
    def children(self):
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class _Binary:
    left: "Formula"
    right: "Formula"
    free: frozenset = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free", self.left.free | self.right.free)
        object.__setattr__(self, "size", 1 + self.left.size + self.right.size)
        object.__setattr__(self, "_hash", hash(self._key()))

    def _key(self):
        return (self.symbol, self.left, self.right)

    __eq__ = _eq

    def __hash__(self):
        return self._hash

    def __str__(self):
        return format_formula(self)

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class And(_Binary):
    symbol = "&"


@dataclass(frozen=True, slots=True, eq=False)
class Or(_Binary):
    symbol = "|"


@dataclass(frozen=True, slots=True, eq=False)
class _Quantifier:
    var: str
    body: "Formula"
    free: frozenset = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free", self.body.free - {self.var})
        object.__setattr__(self, "size", 1 + self.body.size)
        object.__setattr__(self, "_hash", hash(self._key()))

    def _key(self):
        return (self.keyword, self.var, self.body)

    __eq__ = _eq

    def __hash__(self):
        return self._hash

    def __str__(self):
        return format_formula(self)

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True, slots=True, eq=False)
class Exists(_Quantifier):
    keyword = "exists"


@dataclass(frozen=True, slots=True, eq=False)
class Forall(_Quantifier):
    keyword = "forall"


@dataclass(frozen=True, slots=True, eq=False)
class Not:
    """Negation; only appears in input handed to :func:`nnf`."""

    body: "Formula"
    free: frozenset = field(init=False, repr=False)
    size: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "free", self.body.free)
        object.__setattr__(self, "size", 1 + self.body.size)
        object.__setattr__(self, "_hash", hash(self._key()))

    def _key(self):
        return ("!", self.body)

    __eq__ = _eq

    def __hash__(self):
        return self._hash

    def __str__(self):
        return format_formula(self)

    @property
    def children(self):
        return (self.body,)


Formula = Union[Atom, Hole, And, Or, Exists, Forall]
QUANTIFIERS = (Exists, Forall)
CONNECTIVES = (And, Or)
LEAVES = (Atom, Hole)

DUAL = {Exists: Forall, Forall: Exists, And: Or, Or: And}
# connective a quantifier can be pushed over (P rules) / split over (S rules)
PUSH_CONNECTIVE = {Exists: And, Forall: Or}
SPLIT_CONNECTIVE = {Exists: Or, Forall: And}


def with_children(node, children: Sequence):
    """Rebuild ``node`` with new children, keeping its label."""
    if isinstance(node, CONNECTIVES):
        left, right = children
        if left is node.left and right is node.right:
            return node
        return type(node)(left, right)
    if isinstance(node, QUANTIFIERS):
        (body,) = children
        if body is node.body:
            return node
        return type(node)(node.var, body)
    if isinstance(node, Not):
        return Not(children[0])
    if children:
        raise ValueError("leaves have no children")
    return node


# --- construction helpers -------------------------------------------------------


def conj(items: Sequence) -> Formula:
    """Right-folded conjunction of one or more formulas."""
    return _fold(And, items)


def disj(items: Sequence) -> Formula:
    return _fold(Or, items)


def _fold(cls, items):
    items = list(items)
    if not items:
        raise ValueError("cannot fold an empty sequence")
    result = items[-1]
    for item in reversed(items[:-1]):
        result = cls(item, result)
    return result


def quantify(cls, variables: Sequence[str], body: Formula) -> Formula:
    """``cls v1 cls v2 ... body`` with ``v1`` outermost."""
    for v in reversed(list(variables)):
        body = cls(v, body)
    return body


# --- traversal ------------------------------------------------------------------


def subformulas(f: Formula) -> Iterator[tuple]:
    """Yield ``(path, node)`` for every node, in preorder."""
    stack = [((), f)]
    while stack:
        path, node = stack.pop()
        yield path, node
        kids = node.children
        for i in range(len(kids) - 1, -1, -1):
            stack.append((path + (i,), kids[i]))


def postorder(f: Formula) -> Iterator[tuple]:
    """Yield ``(path, node)`` children-first, left to right."""
    stack = [((), f, False)]
    while stack:
        path, node, expanded = stack.pop()
        if expanded or not node.children:
            yield path, node
            continue
        stack.append((path, node, True))
        kids = node.children
        for i in range(len(kids) - 1, -1, -1):
            stack.append((path + (i,), kids[i], False))


def node_at(f: Formula, path: Sequence[int]) -> Formula:
    node = f
    for depth, step in enumerate(path):
        kids = node.children
        if not isinstance(step, int) or not 0 <= step < len(kids):
            raise InvalidPath(f"path {list(path)} leaves the formula at depth {depth}")
        node = kids[step]
    return node


def replace_at(f: Formula, path: Sequence[int], new: Formula) -> Formula:
    if not path:
        return new
    kids = list(f.children)
    step = path[0]
    if not isinstance(step, int) or not 0 <= step < len(kids):
        raise InvalidPath(f"path {list(path)} leaves the formula")
    kids[step] = replace_at(kids[step], path[1:], new)
    return with_children(f, kids)


def free_vars(f: Formula) -> frozenset:
    return f.free


def width(f: Formula) -> int:
    """Maximum number of free variables over all subformula occurrences."""
    return max(len(node.free) for _, node in subformulas(f))


def size(f: Formula) -> int:
    return f.size


def count_atoms(f: Formula) -> int:
    return sum(1 for _, n in subformulas(f) if isinstance(n, LEAVES))


def atoms(f: Formula) -> list:
    return [n for _, n in subformulas(f) if isinstance(n, Atom)]


def all_vars(f: Formula) -> set:
    """Every variable name occurring anywhere: free, bound or quantified."""
    names = set()
    for _, node in subformulas(f):
        if isinstance(node, QUANTIFIERS):
            names.add(node.var)
        elif isinstance(node, LEAVES):
            names |= node.free
    return names


def quantifier_paths(f: Formula) -> list:
    return [p for p, n in subformulas(f) if isinstance(n, QUANTIFIERS)]


def conjuncts(f: Formula) -> list:
    """Multiset (as a list, left to right) of maximal non-``And`` operands."""
    return _flatten(f, And)


def disjuncts(f: Formula) -> list:
    return _flatten(f, Or)


def _flatten(f, cls):
    out, stack = [], [f]
    while stack:
        node = stack.pop()
        if isinstance(node, cls):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def relations(f: Formula) -> dict:
    """Map relation name to arity; raises if a name is used with two arities."""
    vocab = {}
    for atom in atoms(f):
        arity = vocab.setdefault(atom.relation, len(atom.args))
        if arity != len(atom.args):
            raise ValueError(f"relation {atom.relation} used with arities {arity} and {len(atom.args)}")
    return vocab


def flip_polarity(f: Formula) -> Formula:
    """Swap exists/forall and and/or everywhere; leaves are untouched. Self-inverse."""
    if isinstance(f, LEAVES):
        return f
    if isinstance(f, CONNECTIVES):
        return DUAL[type(f)](flip_polarity(f.left), flip_polarity(f.right))
    return DUAL[type(f)](f.var, flip_polarity(f.body))


# --- renaming and standardization ----------------------------------------------


def rename_free(f: Formula, old: str, new: str) -> Formula:
    """Replace free occurrences of ``old`` by ``new``. Does not check for capture."""
    if old not in f.free or old == new:
        return f
    if isinstance(f, Atom):
        return Atom(f.relation, tuple(new if a == old else a for a in f.args), f.negated)
    if isinstance(f, Hole):
        return Hole(f.index, (f.vars - {old}) | {new})
    if isinstance(f, QUANTIFIERS):
        return type(f)(f.var, rename_free(f.body, old, new))
    return with_children(f, [rename_free(c, old, new) for c in f.children])


def renaming_is_safe(body: Formula, old: str, new: str) -> bool:
    """True iff renaming free ``old`` to ``new`` in ``body`` neither captures nor merges."""
    if new in body.free:
        return False

    def captured(node, shadowed):
        if old not in node.free:
            return False
        if isinstance(node, LEAVES):
            return shadowed
        if isinstance(node, QUANTIFIERS):
            return captured(node.body, shadowed or node.var == new)
        return any(captured(c, shadowed) for c in node.children)

    return not captured(body, False)


def is_standardized(f: Formula) -> bool:
    seen = set()
    for _, node in subformulas(f):
        if isinstance(node, QUANTIFIERS):
            if node.var in seen or node.var in f.free:
                return False
            seen.add(node.var)
    return True


def fresh_names(reserved, prefix="_q", start=0) -> Iterator[str]:
    k = start
    while True:
        name = f"{prefix}{k}"
        if name not in reserved:
            yield name
        k += 1


def _rename_all_bound(f, reserved):
    names = fresh_names(reserved)
    origin = {}

    def go(node, env):
        if isinstance(node, Atom):
            return Atom(node.relation, tuple(env.get(a, a) for a in node.args), node.negated)
        if isinstance(node, Hole):
            return Hole(node.index, {env.get(a, a) for a in node.vars})
        if isinstance(node, QUANTIFIERS):
            new = next(names)
            origin[new] = node.var
            return type(node)(new, go(node.body, {**env, node.var: new}))
        return with_children(node, [go(c, env) for c in node.children])

    return go(f, {}), origin


def standardize_with_map(f: Formula) -> tuple:
    """Standardize ``f`` and report which original name each quantified name came from.

    The k-th quantifier in preorder is renamed to the k-th unused name of the
    ``_q<k>`` pool. Input already written in that scheme is returned unchanged.
    """
    candidate, origin = _rename_all_bound(f, f.free)
    if candidate == f:
        return f, origin
    return _rename_all_bound(f, all_vars(f))


def standardize(f: Formula) -> Formula:
    return standardize_with_map(f)[0]


def standardize_steps(f: Formula) -> list:
    """The renaming steps ``(path, new_name)`` that turn ``f`` into ``standardize(f)``.

    Steps are in preorder and each is a legal renaming when replayed in order.
    """
    g = standardize(f)
    steps = []
    for (path, a), (_, b) in zip(subformulas(f), subformulas(g)):
        if isinstance(a, QUANTIFIERS) and a.var != b.var:
            steps.append((path, b.var))
    return steps


def restore_names(f: Formula, origin: Mapping[str, str]) -> Formula:
    """Rename quantified variables back to ``origin[name]`` wherever no capture results."""

    def go(node):
        if isinstance(node, LEAVES):
            return node
        if isinstance(node, QUANTIFIERS):
            var, body = node.var, node.body
            target = origin.get(var, var)
            if target != var and renaming_is_safe(body, var, target):
                body = rename_free(body, var, target)
                var = target
            return type(node)(var, go(body))
        return with_children(node, [go(c) for c in node.children])

    return go(f)


# --- negation normal form -------------------------------------------------------


def nnf(f) -> Formula:
    """Push negations to atoms; negated atoms become opaque ``negated`` atoms."""

    def go(node, neg):
        if isinstance(node, Not):
            return go(node.body, not neg)
        if isinstance(node, Atom):
            return Atom(node.relation, node.args, node.negated != neg) if neg else node
        if isinstance(node, Hole):
            if neg:
                raise ValueError("cannot negate a hole")
            return node
        if isinstance(node, CONNECTIVES):
            cls = DUAL[type(node)] if neg else type(node)
            return cls(go(node.left, neg), go(node.right, neg))
        cls = DUAL[type(node)] if neg else type(node)
        return cls(node.var, go(node.body, neg))

    return go(f, False)


# --- printing -------------------------------------------------------------------


def format_formula(f) -> str:
    """Deterministic text form; ``parse(format_formula(f)) == f``."""
    if isinstance(f, Atom):
        return ("!" if f.negated else "") + f"{f.relation}({','.join(f.args)})"
    if isinstance(f, Hole):
        return f"[{f.index}]"
    if isinstance(f, Not):
        inner = format_formula(f.body)
        return "!" + (inner if isinstance(f.body, (Atom, Not)) else f"({inner})")
    if isinstance(f, QUANTIFIERS):
        body = format_formula(f.body)
        if isinstance(f.body, CONNECTIVES):
            body = f"({body})"
        return f"{f.keyword} {f.var}. {body}"
    parts = []
    node = f
    while True:
        parts.append(_operand(node.left))
        if type(node.right) is type(f):
            node = node.right
            continue
        parts.append(_operand(node.right))
        break
    return f" {f.symbol} ".join(parts)


def _operand(node):
    text = format_formula(node)
    if isinstance(node, (Atom, Hole, Not)):
        return text
    return f"({text})"


# --- parsing --------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<hole>\[\s*[0-9]+\s*\])
  | (?P<punct>[().,&|!])
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, text, allow_negation, holes):
        self.text = text
        self.allow_negation = allow_negation
        self.holes = holes
        self.tokens = list(self._tokenize(text))
        self.pos = 0

    def _tokenize(self, text):
        line, line_start = 1, 0
        for m in _TOKEN_RE.finditer(text):
            kind, value = m.lastgroup, m.group()
            col = m.start() - line_start + 1
            if kind == "ws":
                for i, ch in enumerate(value):
                    if ch == "\n":
                        line += 1
                        line_start = m.start() + i + 1
                continue
            if kind == "bad":
                hint = ""
                if value == "=":
                    hint = " (equality is not supported)"
                elif value.isdigit():
                    hint = " (constants are not supported)"
                raise FormulaSyntaxError(f"unknown token {value!r}{hint}", line, col)
            yield kind, value, line, col
        yield "eof", "", line, len(text) - line_start + 1

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise FormulaSyntaxError(message, tok[2], tok[3])

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] not in ("punct",):
            shown = tok[1] or "end of input"
            self.error(f"expected {value!r} but found {shown!r}")
        return self.advance()

    def parse(self):
        f = self.formula()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def formula(self):
        kind, value, _, _ = self.peek()
        if kind == "ident" and value in KEYWORDS:
            return self.quant()
        return self.disj()

    def quant(self):
        _, keyword, _, _ = self.advance()
        tok = self.advance()
        if tok[0] != "ident" or tok[1] in KEYWORDS or not VAR_RE.match(tok[1]):
            self.error(f"expected a variable after {keyword!r}", tok)
        self.expect(".")
        body = self.formula()
        cls = Exists if keyword == "exists" else Forall
        return cls(tok[1], body)

    def disj(self):
        items = [self.conj()]
        while self.peek()[1] == "|" and self.peek()[0] == "punct":
            self.advance()
            items.append(self.conj())
        return disj(items)

    def conj(self):
        items = [self.unit()]
        while self.peek()[1] == "&" and self.peek()[0] == "punct":
            self.advance()
            items.append(self.unit())
        return conj(items)

    def unit(self):
        kind, value, _, _ = tok = self.peek()
        if kind == "punct" and value == "(":
            self.advance()
            f = self.formula()
            self.expect(")")
            return f
        if kind == "punct" and value == "!":
            self.advance()
            inner = self.unit()
            if isinstance(inner, Atom):
                return Atom(inner.relation, inner.args, not inner.negated)
            if not self.allow_negation:
                self.error("negation of a non-atomic formula needs NNF conversion", tok)
            return Not(inner)
        if kind == "ident" and value in KEYWORDS:
            return self.quant()
        if kind == "ident":
            return self.atom()
        if kind == "hole":
            if self.holes is None:
                self.error("holes are only allowed in holey formulas")
            self.advance()
            index = int(value.strip("[] \t\n"))
            if index not in self.holes:
                self.error(f"hole {index} has no association")
            return Hole(index, self.holes[index])
        shown = value or "end of input"
        self.error(f"unexpected {shown!r}")

    def atom(self):
        tok = self.advance()
        name = tok[1]
        if not REL_RE.match(name):
            self.error(f"invalid relation name {name!r}", tok)
        if self.peek()[1] != "(":
            self.error(f"expected '(' after relation {name!r}")
        self.advance()
        args = []
        while True:
            arg = self.advance()
            if arg[0] != "ident" or arg[1] in KEYWORDS or not VAR_RE.match(arg[1]):
                self.error(f"expected a variable, found {arg[1] or 'end of input'!r}"
                           " (constants are not supported)", arg)
            args.append(arg[1])
            sep = self.peek()
            if sep[1] == ",":
                self.advance()
                continue
            if sep[1] == ")":
                self.advance()
                break
            self.error(f"expected ',' or ')' but found {sep[1] or 'end of input'!r}")
        return Atom(name, tuple(args))


def parse(text: str) -> Formula:
    """Parse a pfo-formula. ``!`` is accepted only directly on atoms (negated marker)."""
    return _Parser(text, allow_negation=False, holes=None).parse()


def parse_fo(text: str):
    """Parse a first-order formula that may negate arbitrary subformulas; see :func:`nnf`."""
    return _Parser(text, allow_negation=True, holes=None).parse()


def parse_holey(text: str, association: Mapping[int, Sequence[str]]) -> Formula:
    """Parse a holey formula; ``[i]`` denotes hole ``i`` with variables ``association[i]``."""
    holes = {i: frozenset(vs) for i, vs in association.items()}
    f = _Parser(text, allow_negation=False, holes=holes).parse()
    indices = [n.index for _, n in subformulas(f) if isinstance(n, Hole)]
    if len(indices) != len(set(indices)):
        raise FormulaSyntaxError("a hole occurs more than once", 1, 1)
    return f
