"""Deciding M, P-down and S-down applicability up to associativity, commutativity and reordering.

A quantifier ``Qx`` can be pushed down somewhere in its ACO class iff, after
skipping the chain of same-kind quantifiers below it, one reaches its pushdown
connective (``&`` under exists, ``|`` under forall) and some operand of the
flattened connective chain has no free ``x``. The witness trace realizes that
by reordering ``Qx`` down the chain, rotating the chosen operand to the right
of the top connective and then pushing down.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import PolarityMismatch, PreconditionViolated
from .formula import (
    CONNECTIVES,
    PUSH_CONNECTIVE,
    QUANTIFIERS,
    SPLIT_CONNECTIVE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Hole,
    Or,
    flip_polarity,
    node_at,
    postorder,
    subformulas,
)
from .rules import Step, apply_step, replay


@dataclass(frozen=True)
class YStepWitness:
    intermediate: Formula
    result: Formula
    rule: str
    step_path: tuple
    aco_trace: tuple = field(default=())

    @property
    def trace(self) -> tuple:
        """ACO moves followed by the Y step itself."""
        return tuple(self.aco_trace) + (Step(self.rule, self.step_path),)


def removable_quantifiers(f: Formula) -> list:
    """Paths of quantifiers binding nothing, in post-order."""
    return [p for p, n in postorder(f) if isinstance(n, QUANTIFIERS) and n.var not in n.body.free]


def _operand_paths(node, cls, prefix=()):
    """Paths (relative to ``node``) of the maximal non-``cls`` operands, left to right."""
    if type(node) is not cls:
        return [prefix]
    return _operand_paths(node.left, cls, prefix + (0,)) + _operand_paths(node.right, cls, prefix + (1,))


def _isolate_right(bits):
    """Steps (relative paths) that make the operand at ``bits`` the right child of the root.

    Only A and C moves are used; the operand's subtree is never touched.
    """
    bits = list(bits)
    steps = []
    while len(bits) > 1:
        if bits[0] == 0:
            if bits[1] == 1:
                steps.append(Step("C", (0,)))
            steps.append(Step("A_assoc_right", ()))
        else:
            if bits[1] == 0:
                steps.append(Step("C", (1,)))
            steps.append(Step("A_assoc_left", ()))
        bits = bits[:1] + bits[2:]
    if bits == [0]:
        steps.append(Step("C", ()))
    return steps


def _pushdown_at(f: Formula, path: tuple) -> Optional[YStepWitness]:
    v = node_at(f, path)
    q = type(v)
    depth, w = 0, v.body
    while type(w) is q:
        depth += 1
        w = w.body
    if type(w) is not PUSH_CONNECTIVE[q]:
        return None
    chosen = None
    for rel in _operand_paths(w, type(w)):
        if v.var not in node_at(w, rel).free:
            chosen = rel
            break
    if chosen is None:
        return None
    trace = [Step("O", path + (0,) * i) for i in range(depth)]
    at = path + (0,) * depth
    below = at + (0,)
    trace += [Step(s.rule, below + s.path, s.arg) for s in _isolate_right(chosen)]
    intermediate = replay(f, trace)
    step = Step("Pdown", at)
    return YStepWitness(intermediate, apply_step(intermediate, step), "Pdown", at, tuple(trace))


def find_pushdown_aco(f: Formula) -> Optional[YStepWitness]:
    """Witness for a pushdown somewhere in the ACO class of ``f``, checking lower quantifiers first."""
    if removable_quantifiers(f):
        raise PreconditionViolated("formula has a quantifier that binds nothing")
    for path, node in postorder(f):
        if isinstance(node, QUANTIFIERS):
            witness = _pushdown_at(f, path)
            if witness is not None:
                return witness
    return None


def find_splitdown(f: Formula, check=True) -> Optional[tuple]:
    """First quantifier (post-order) sitting directly on its splitdown connective."""
    if check:
        if removable_quantifiers(f):
            raise PreconditionViolated("formula has a quantifier that binds nothing")
        if find_pushdown_aco(f) is not None:
            raise PreconditionViolated("a pushdown is still possible in the ACO class")
    for path, node in postorder(f):
        if isinstance(node, QUANTIFIERS) and type(node.body) is SPLIT_CONNECTIVE[type(node)]:
            return path
    return None


def find_Y_step(f: Formula) -> Optional[YStepWitness]:
    """One step of M, P-down or S-down (tried in that order) on some ACO-variant of ``f``."""
    removable = removable_quantifiers(f)
    if removable:
        path = removable[0]
        return YStepWitness(f, apply_step(f, Step("M", path)), "M", path)
    witness = find_pushdown_aco(f)
    if witness is not None:
        return witness
    path = find_splitdown(f, check=False)
    if path is not None:
        return YStepWitness(f, apply_step(f, Step("Sdown", path)), "Sdown", path)
    return None


def polarity(h: Formula) -> Optional[str]:
    """``"exists-and"``, ``"forall-or"`` or None for a leaf; raises on mixed labels."""
    kinds = {type(n) for _, n in subformulas(h) if not isinstance(n, (Atom, Hole))}
    if not kinds:
        return None
    if kinds <= {Exists, And}:
        return "exists-and"
    if kinds <= {Forall, Or}:
        return "forall-or"
    raise PolarityMismatch("holey formula mixes both polarities")


def mset_T(h: Formula) -> Counter:
    """The multiset of variable sets invariant under the tree-decomposition rules.

    Leaves contribute their variable set; conjunction is multiset union; ``exists x``
    merges every set containing ``x`` into one and drops ``x``.
    """
    if polarity(h) == "forall-or":
        h = flip_polarity(h)

    def go(node):
        if isinstance(node, (Atom, Hole)):
            return Counter({node.free: 1})
        if isinstance(node, CONNECTIVES):
            return go(node.left) + go(node.right)
        inner = go(node.body)
        merged = frozenset()
        out = Counter()
        for s, k in inner.items():
            if node.var in s:
                merged |= s
            else:
                out[s] += k
        out[merged - {node.var}] += 1
        return out

    return go(h)
