"""Position-addressed application of the rewriting rules, plus traces.

Rule tags::

    A_assoc_right  (F o G) o H  ->  F o (G o H)
    A_assoc_left   F o (G o H)  ->  (F o G) o H
    C              F o G        ->  G o F
    O              Qx Qy F      ->  Qy Qx F
    Pdown          Ex(F & G)    ->  (Ex F) & G        x not free in G   (dual: Ax over |)
    Pup            inverse of Pdown; arg "left" lifts from the left operand,
                   "right" from the right one: F & (Ex G) -> Ex(F & G)
    N              Qx F         ->  Qy F[x:=y]        y occurs nowhere in F
    Sdown          Ex(F | G)    ->  (Ex F) | (Ex G)   (dual: Ax over &)
    Sup            (Ex F) | (Ex G) -> Ex(F | G)
    M              Qx F         ->  F                 x not free in F
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import InvalidPath, ReplayError, RuleNotApplicable
from .formula import (
    CONNECTIVES,
    PUSH_CONNECTIVE,
    QUANTIFIERS,
    SPLIT_CONNECTIVE,
    Formula,
    all_vars,
    node_at,
    rename_free,
    replace_at,
    subformulas,
)

RULES = ("A_assoc_left", "A_assoc_right", "C", "O", "Pdown", "Pup", "N", "Sdown", "Sup", "M")
T_RULES = frozenset({"A_assoc_left", "A_assoc_right", "C", "O", "Pdown", "Pup", "N"})
Y_RULES = frozenset({"Pdown", "Sdown", "M"})
SIDES = ("left", "right")


@dataclass(frozen=True)
class Step:
    rule: str
    path: tuple = ()
    arg: Optional[str] = None

    def __str__(self):
        return format_step(self)


def _check(rule, node, arg) -> Optional[str]:
    """Return None when the rule applies at ``node``, else the reason it does not."""
    if rule not in RULES:
        return f"unknown rule {rule!r}"
    if rule in ("A_assoc_left", "A_assoc_right", "C", "O", "Pdown", "Sdown", "Sup", "M"):
        if arg is not None:
            return "rule takes no argument"
    if rule == "C":
        return None if isinstance(node, CONNECTIVES) else "not a connective"
    if rule == "A_assoc_right":
        if isinstance(node, CONNECTIVES) and type(node.left) is type(node):
            return None
        return "needs a connective whose left operand has the same connective"
    if rule == "A_assoc_left":
        if isinstance(node, CONNECTIVES) and type(node.right) is type(node):
            return None
        return "needs a connective whose right operand has the same connective"
    if rule == "O":
        if isinstance(node, QUANTIFIERS) and type(node.body) is type(node):
            return None
        return "needs two stacked quantifiers of the same kind"
    if rule == "M":
        if not isinstance(node, QUANTIFIERS):
            return "not a quantifier"
        return None if node.var not in node.body.free else f"{node.var} is free in the body"
    if rule == "N":
        if not isinstance(node, QUANTIFIERS):
            return "not a quantifier"
        if not arg or not isinstance(arg, str):
            return "renaming needs a target variable"
        if arg == node.var:
            return "target equals the quantified variable"
        if arg in all_vars(node.body):
            return f"{arg} occurs in the body"
        return None
    if rule == "Pdown":
        if not isinstance(node, QUANTIFIERS):
            return "not a quantifier"
        if type(node.body) is not PUSH_CONNECTIVE[type(node)]:
            return "quantifier is not over its pushdown connective"
        if node.var in node.body.right.free:
            return f"{node.var} is free in the right operand"
        return None
    if rule == "Sdown":
        if not isinstance(node, QUANTIFIERS):
            return "not a quantifier"
        if type(node.body) is not SPLIT_CONNECTIVE[type(node)]:
            return "quantifier is not over its splitdown connective"
        return None
    if rule == "Pup":
        if arg not in SIDES:
            return "pushup needs side 'left' or 'right'"
        if not isinstance(node, CONNECTIVES):
            return "not a connective"
        lifted = node.left if arg == "left" else node.right
        other = node.right if arg == "left" else node.left
        if not isinstance(lifted, QUANTIFIERS) or PUSH_CONNECTIVE[type(lifted)] is not type(node):
            return f"{arg} operand is not a quantifier matching the connective"
        if lifted.var in other.free:
            return f"{lifted.var} is free in the other operand"
        return None
    if rule == "Sup":
        if not isinstance(node, CONNECTIVES):
            return "not a connective"
        l, r = node.left, node.right
        if not (isinstance(l, QUANTIFIERS) and type(l) is type(r)):
            return "operands are not quantifiers of the same kind"
        if SPLIT_CONNECTIVE[type(l)] is not type(node):
            return "quantifiers do not match the connective"
        if l.var != r.var:
            return "operands quantify different variables"
        return None
    return f"unknown rule {rule!r}"


def _rewrite(rule, node, arg):
    if rule == "C":
        return type(node)(node.right, node.left)
    if rule == "A_assoc_right":
        cls = type(node)
        return cls(node.left.left, cls(node.left.right, node.right))
    if rule == "A_assoc_left":
        cls = type(node)
        return cls(cls(node.left, node.right.left), node.right.right)
    if rule == "O":
        q = type(node)
        return q(node.body.var, q(node.var, node.body.body))
    if rule == "M":
        return node.body
    if rule == "N":
        return type(node)(arg, rename_free(node.body, node.var, arg))
    if rule == "Pdown":
        conn = node.body
        return type(conn)(type(node)(node.var, conn.left), conn.right)
    if rule == "Sdown":
        conn, q = node.body, type(node)
        return type(conn)(q(node.var, conn.left), q(node.var, conn.right))
    if rule == "Pup":
        conn = type(node)
        if arg == "left":
            q = node.left
            return type(q)(q.var, conn(q.body, node.right))
        q = node.right
        return type(q)(q.var, conn(node.left, q.body))
    if rule == "Sup":
        q = node.left
        return type(q)(q.var, type(node)(q.body, node.right.body))
    raise AssertionError(rule)


def applicable(rule: str, f: Formula, path: Sequence[int] = (), arg: Optional[str] = None) -> bool:
    return _check(rule, node_at(f, path), arg) is None


def apply(rule: str, f: Formula, path: Sequence[int] = (), arg: Optional[str] = None) -> Formula:
    path = tuple(path)
    try:
        node = node_at(f, path)
    except InvalidPath as exc:
        raise RuleNotApplicable(rule, path, str(exc)) from exc
    reason = _check(rule, node, arg)
    if reason is not None:
        raise RuleNotApplicable(rule, path, reason)
    return replace_at(f, path, _rewrite(rule, node, arg))


def apply_step(f: Formula, step: Step) -> Formula:
    return apply(step.rule, f, step.path, step.arg)


def replay(f: Formula, trace: Iterable[Step]) -> Formula:
    for i, step in enumerate(trace):
        try:
            f = apply_step(f, step)
        except RuleNotApplicable as exc:
            raise ReplayError(i, exc) from exc
    return f


def steps_at(node: Formula, path: tuple, rules: Iterable[str], rename_to: Optional[str] = None) -> Iterator[Step]:
    """Every applicable step at one node. ``N`` is offered only with ``rename_to``."""
    for rule in rules:
        if rule == "Pup":
            for side in SIDES:
                if _check(rule, node, side) is None:
                    yield Step(rule, path, side)
        elif rule == "N":
            if rename_to is not None and _check(rule, node, rename_to) is None:
                yield Step(rule, path, rename_to)
        elif _check(rule, node, None) is None:
            yield Step(rule, path)


def enumerate_steps(f: Formula, rules: Iterable[str] = RULES, rename_to: Optional[str] = None) -> list:
    """All applicable steps anywhere in ``f``, in preorder of positions."""
    rules = tuple(rules)
    out = []
    for path, node in subformulas(f):
        out.extend(steps_at(node, path, rules, rename_to))
    return out


# --- trace text format ------------------------------------------------------------

_STEP_RE = re.compile(r"^\s*(\w+)\s+path=\[([0-9,\s]*)\]\s+args=(\S+)\s*$")


def format_step(step: Step) -> str:
    path = ",".join(str(i) for i in step.path)
    return f"{step.rule} path=[{path}] args={step.arg if step.arg is not None else '-'}"


def parse_step(line: str) -> Step:
    m = _STEP_RE.match(line)
    if not m or m.group(1) not in RULES:
        raise ValueError(f"malformed trace line: {line!r}")
    path = tuple(int(p) for p in m.group(2).replace(" ", "").split(",") if p)
    arg = None if m.group(3) == "-" else m.group(3)
    return Step(m.group(1), path, arg)


def format_trace(trace: Iterable[Step]) -> str:
    return "".join(format_step(s) + "\n" for s in trace)


def parse_trace(text: str) -> list:
    return [parse_step(line) for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
