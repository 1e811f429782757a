"""Normal forms in the system {P-down, S-down, M} on ACO classes, with termination potentials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .applicability import find_Y_step
from .errors import InternalInvariantViolation, StepBudgetExceeded
from .formula import (
    And,
    Exists,
    Forall,
    Formula,
    Or,
    QUANTIFIERS,
    all_vars,
    fresh_names,
    node_at,
    postorder,
    standardize_with_map,
    standardize_steps,
    subformulas,
)
from .rules import Step, apply_step


@dataclass(frozen=True)
class PotentialReport:
    step_index: int
    rule: str
    y_potential: int
    yprime_potential: int


class NormalForm(NamedTuple):
    formula: Formula
    trace: list
    reports: list
    names: dict  # quantified name in the result -> name in the input


def y_potential(f: Formula) -> int:
    """Sum over quantifier nodes of the squared number of atoms below them."""
    counts = {}
    total = 0
    for path, node in postorder(f):
        if node.children:
            counts[path] = sum(counts.pop(path + (i,)) for i in range(len(node.children)))
        else:
            counts[path] = 1
        if isinstance(node, QUANTIFIERS):
            total += counts[path] ** 2
    return total


def _blocks(ancestor, quantifier_kind) -> bool:
    if quantifier_kind is Forall:
        return isinstance(ancestor, And) or (isinstance(ancestor, Exists) and ancestor.var in ancestor.body.free)
    return isinstance(ancestor, Or) or (isinstance(ancestor, Forall) and ancestor.var in ancestor.body.free)


def local_potentials(f: Formula) -> dict:
    """Map each quantifier path to the number of counted connectives under its non-blocked ancestor."""
    nodes = dict(subformulas(f))
    ands, ors = {}, {}
    for path, node in postorder(f):
        kids = [path + (i,) for i in range(len(node.children))]
        ands[path] = sum(ands[k] for k in kids) + isinstance(node, And)
        ors[path] = sum(ors[k] for k in kids) + isinstance(node, Or)
    out = {}
    for path, node in nodes.items():
        if not isinstance(node, QUANTIFIERS):
            continue
        top = path
        while top and not _blocks(nodes[top[:-1]], type(node)):
            top = top[:-1]
        out[path] = ands[top] if isinstance(node, Forall) else ors[top]
    return out


def yprime_potential(f: Formula) -> int:
    """Sum over quantifier nodes of 3*p + (1 if p == 0 else 0), p the local potential."""
    return sum(3 * p + (p == 0) for p in local_potentials(f).values())


def normalize(f: Formula, budget: Optional[int] = None, check: bool = True) -> NormalForm:
    """Standardize ``f`` and apply Y steps until none applies to the ACO class.

    After every S-down the right copy of the split quantifier gets a fresh name,
    so intermediate formulas stay standardized. ``budget`` caps the number of
    Y steps; ``check`` asserts the potential decrease and the cubic step bound.
    """
    g, origin = standardize_with_map(f)
    names = dict(origin)
    trace = [Step("N", path, new) for path, new in standardize_steps(f)]
    reports = []
    fresh = fresh_names(all_vars(g) | set(all_vars(f)))
    limit = f.size ** 3
    potential = y_potential(g) if check else 0
    taken = 0
    while True:
        witness = find_Y_step(g)
        if witness is None:
            break
        if budget is not None and taken >= budget:
            raise StepBudgetExceeded(f"no normal form within {budget} steps")
        taken += 1
        trace.extend(witness.trace)
        g = witness.result
        if witness.rule == "Sdown":
            copy_path = witness.step_path + (1,)
            old = node_at(g, copy_path).var
            used = all_vars(g)
            new = next(fresh)
            while new in used:
                new = next(fresh)
            step = Step("N", copy_path, new)
            g = apply_step(g, step)
            trace.append(step)
            names[new] = names.get(old, old)
        if check:
            after = y_potential(g)
            if after >= potential:
                raise InternalInvariantViolation(
                    f"potential did not decrease on {witness.rule} step {taken}: {potential} -> {after}")
            potential = after
            if taken > limit:
                raise InternalInvariantViolation(f"more than |f|^3 = {limit} steps")
        reports.append(PotentialReport(taken, witness.rule, potential if check else y_potential(g),
                                       yprime_potential(g)))
    return NormalForm(g, trace, reports, {k: v for k, v in names.items() if k != v})


def y_normal_form(f: Formula, budget: Optional[int] = None) -> tuple:
    """``(normal form, trace from f, per-step potential reports)``; the trace replays from ``f``."""
    nf = normalize(f, budget)
    return nf.formula, nf.trace, nf.reports
