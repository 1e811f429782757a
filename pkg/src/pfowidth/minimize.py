"""Width minimization: decomposition-driven region rebuilding and the two-phase pipeline.

Phase one brings the formula to a normal form of {P-down, S-down, M} (module
``normalform``). Phase two rebuilds every region from a minimum-width tree
decomposition of its hypergraph, which yields a minimum-width member of the
class under the tree-decomposition rules.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidDecomposition, PolarityMismatch
from .formula import (
    QUANTIFIERS,
    And,
    Atom,
    Exists,
    Formula,
    Hole,
    conj,
    flip_polarity,
    is_standardized,
    quantify,
    restore_names,
    standardize_with_map,
    subformulas,
    width,
)
from .normalform import normalize
from .regions import RegionTree, holes, organize, plug, polarity_of, reassemble, region_hypergraph
from .treewidth import EXACT_THRESHOLD, TreeDecomposition, treewidth, validate


@dataclass
class MinimizeReport:
    input_width: int
    output_width: int
    normal_form_trace: list = field(default_factory=list)
    regions: list = field(default_factory=list)  # dicts: id, vertices, edges, tw, mode
    tw_mode: str = "exact"
    seconds: float = 0.0

    def to_json(self) -> dict:
        from .rules import format_step

        return {
            "schema": 1,
            "input_width": self.input_width,
            "output_width": self.output_width,
            "tw_mode": self.tw_mode,
            "normal_form_steps": len(self.normal_form_trace),
            "normal_form_trace": [format_step(s) for s in self.normal_form_trace],
            "regions": self.regions,
        }


# --- one region -------------------------------------------------------------------


def _quantified(h: Formula) -> list:
    return [n.var for _, n in subformulas(h) if isinstance(n, QUANTIFIERS)]


def region_to_formula(h: Formula, td: TreeDecomposition, check: bool = True) -> Formula:
    """Rebuild the standardized region skeleton ``h`` along ``td``.

    The result has the same holes and quantifiers, lies in the class of ``h``
    under the tree-decomposition rules without renaming, and has width at most
    the bag size of ``td``.
    """
    pol = polarity_of(h)
    if pol is None:
        return h
    flipped = pol == "forall-or"
    g = flip_polarity(h) if flipped else h
    kinds = {type(n) for _, n in subformulas(g) if not isinstance(n, (Atom, Hole))}
    if not kinds <= {Exists, And}:
        raise PolarityMismatch("region mixes both polarities")
    if check:
        problems = validate(region_hypergraph(g), td)
        if problems:
            raise InvalidDecomposition("; ".join(problems))
    result = _rebuild_top(g, td)
    return flip_polarity(result) if flipped else result


def _rooted(td: TreeDecomposition, root):
    """Parent map, children lists and depths of ``td`` rooted at ``root``."""
    nb = td.neighbors()
    children = {n: [] for n in td.bags}
    depth = {root: 0}
    queue = deque([root])
    while queue:
        n = queue.popleft()
        for m in sorted(nb[n]):
            if m not in depth:
                depth[m] = depth[n] + 1
                children[n].append(m)
                queue.append(m)
    return children, depth


def _subtree(children, start):
    out, stack = [], [start]
    while stack:
        n = stack.pop()
        out.append(n)
        stack.extend(children[n])
    return out


def _order_block(variables, hole_list):
    """Quantifier order: first occurrence in the holes (by index, then name), then by name."""
    seen, order = set(), []
    for hole in sorted(hole_list, key=lambda x: x.index):
        for v in sorted(hole.vars):
            if v in variables and v not in seen:
                seen.add(v)
                order.append(v)
    order += sorted(set(variables) - seen)
    return order


def _rebuild_top(g, td):
    free = g.free
    candidates = sorted(n for n, b in td.bags.items() if free <= b)
    if not candidates:
        raise InvalidDecomposition("no bag contains the free variables")
    root = candidates[0]
    children, depth = _rooted(td, root)
    hole_list = holes(g)
    return _rebuild(g, hole_list, set(_quantified(g)), td.bags, children, depth, root, top=True)


def _rebuild(original, hole_list, quantified, bags, children, depth, root, top=False):
    nodes = _subtree(children, root)
    home = {}
    for hole in hole_list:
        covering = [n for n in nodes if hole.vars <= bags[n]]
        if not covering:
            raise InvalidDecomposition(f"no bag covers hole {hole.index}")
        home[hole.index] = min(covering, key=lambda n: (depth[n], n))
    if all(home[h.index] == root for h in hole_list):
        if top:
            return original
        return _block(quantified, hole_list, [])

    groups = []
    for child in children[root]:
        below = set(_subtree(children, child))
        group = [h for h in hole_list if home[h.index] in below]
        if group:
            groups.append((child, group))
    used = set()
    parts = []
    for child, group in groups:
        vj = frozenset().union(*(h.vars for h in group))
        uj = {v for v in vj if v not in bags[root]} & quantified
        used |= uj
        sub_bags = {n: bags[n] & vj for n in _subtree(children, child)}
        part = _rebuild(None, group, uj, sub_bags, children, depth, child)
        parts.append((min(h.index for h in group), part))
    in_groups = {h.index for _, group in groups for h in group}
    rest = [h for h in hole_list if h.index not in in_groups]
    outer = quantified - used
    return _block(outer, rest, parts)


def _block(variables, hole_list, parts):
    """``exists U (holes & parts)`` with conjuncts ordered by their smallest hole index."""
    items = [(h.index, h) for h in hole_list] + list(parts)
    items.sort(key=lambda item: item[0])
    body = conj([f for _, f in items])
    return quantify(Exists, _order_block(variables, hole_list + [h for _, p in parts for h in holes(p)]), body)


# --- whole formulas ---------------------------------------------------------------


def _minimize_regions(t, mode, threshold, report, counter):
    if not isinstance(t, RegionTree):
        return t
    region_id = counter[0]
    counter[0] += 1
    fillers = {i: _minimize_regions(c, mode, threshold, report, counter) for i, c in t.children.items()}
    skeleton = t.skeleton
    h = flip_polarity(skeleton) if t.polarity == "forall-or" else skeleton
    graph = region_hypergraph(h)
    tw = treewidth(graph, mode, threshold)
    rebuilt = region_to_formula(h, tw.decomposition, check=False)
    if t.polarity == "forall-or":
        rebuilt = flip_polarity(rebuilt)
    if report is not None:
        report.append({
            "id": region_id,
            "polarity": t.polarity,
            "vertices": len(graph.vertices),
            "edges": len(graph.edges),
            "tw": tw.width,
            "mode": tw.mode,
        })
    return plug(rebuilt, fillers)


def _minimize_T(f, mode, threshold, report):
    g, origin = (f, {}) if is_standardized(f) else standardize_with_map(f)
    out = _minimize_regions(organize(g), mode, threshold, report, [0])
    return out, origin


def minimize_T(f: Formula, mode: str = "exact", threshold: int = EXACT_THRESHOLD) -> Formula:
    """A member of the tree-decomposition-rule class of ``f`` of minimum width (exact mode)."""
    return _minimize_T(f, mode, threshold, None)[0]


def minimize(f: Formula, mode: str = "exact", threshold: int = EXACT_THRESHOLD,
             restore: bool = True) -> tuple:
    """Minimum-width member of the class of ``f`` under all rules, with a report.

    ``restore`` renames quantified variables back to their input names where
    this creates no capture.
    """
    start = time.perf_counter()
    nf = normalize(f)
    regions = []
    out, origin = _minimize_T(nf.formula, mode, threshold, regions)
    if restore:
        names = {new: nf.names.get(old, old) for new, old in origin.items()} if origin else dict(nf.names)
        out = restore_names(out, names)
    report = MinimizeReport(
        input_width=width(f),
        output_width=width(out),
        normal_form_trace=nf.trace,
        regions=regions,
        tw_mode=mode,
        seconds=time.perf_counter() - start,
    )
    return out, report


# --- rewrite equivalence ------------------------------------------------------------


def _shape(node, free_root):
    """Signature of an organized node that ignores bound-variable names."""
    if isinstance(node, Atom):
        first = {}
        pattern = []
        for a in node.args:
            if a in free_root:
                pattern.append(("f", a))
            else:
                pattern.append(("b", first.setdefault(a, len(first))))
        return ("atom", node.relation, node.negated, tuple(pattern))
    kids = sorted(_shape(c, free_root) for c in node.children.values())
    return ("region", node.polarity, len(_quantified(node.skeleton)), tuple(kids))


class _Matcher:
    def __init__(self, free1, free2, bound2):
        self.free1 = free1
        self.free2 = free2
        self.bound2 = bound2
        self.env = {}
        self.inverse = {}
        self.allowed = {}

    def match(self, a, b):
        """Generator: yields once per consistent extension of the current bijection."""
        if isinstance(a, Atom) or isinstance(b, Atom):
            if not (isinstance(a, Atom) and isinstance(b, Atom)):
                return
            if (a.relation, a.negated, len(a.args)) != (b.relation, b.negated, len(b.args)):
                return
            yield from self._match_args(list(zip(a.args, b.args)))
            return
        if a.polarity != b.polarity or len(a.children) != len(b.children):
            return
        u1, u2 = _quantified(a.skeleton), _quantified(b.skeleton)
        if len(u1) != len(u2):
            return
        for x in u1:
            self.allowed[x] = frozenset(u2)
        kids1 = [a.children[i] for i in sorted(a.children)]
        kids2 = [b.children[i] for i in sorted(b.children)]
        shapes1 = [_shape(c, self.free1) for c in kids1]
        shapes2 = [_shape(c, self.free2) for c in kids2]
        for _ in self._match_children(kids1, shapes1, kids2, shapes2, [False] * len(kids2), 0):
            yield from self._close(u1, u2)
        for x in u1:
            self.allowed.pop(x, None)

    def _close(self, u1, u2):
        # quantifiers binding nothing pair up arbitrarily
        loose1 = [x for x in u1 if x not in self.env]
        loose2 = [y for y in u2 if y not in self.inverse]
        if len(loose1) != len(loose2):
            return
        for x, y in zip(loose1, loose2):
            self.env[x], self.inverse[y] = y, x
        yield
        for x, y in zip(loose1, loose2):
            del self.env[x], self.inverse[y]

    def _match_children(self, kids1, shapes1, kids2, shapes2, taken, i):
        if i == len(kids1):
            yield
            return
        tried = set()
        for j, c2 in enumerate(kids2):
            if taken[j] or shapes2[j] != shapes1[i]:
                continue
            # identical siblings are interchangeable
            key = reassemble(c2)
            if key in tried:
                continue
            tried.add(key)
            taken[j] = True
            for _ in self.match(kids1[i], c2):
                yield from self._match_children(kids1, shapes1, kids2, shapes2, taken, i + 1)
            taken[j] = False

    def _match_args(self, pairs):
        added = []
        ok = True
        for x, y in pairs:
            if x in self.free1:
                if x != y or y in self.bound2:
                    ok = False
                    break
            elif x in self.env:
                if self.env[x] != y:
                    ok = False
                    break
            else:
                if y not in self.allowed.get(x, ()) or y in self.inverse:
                    ok = False
                    break
                self.env[x], self.inverse[y] = y, x
                added.append(x)
        if ok:
            yield
        for x in added:
            del self.inverse[self.env.pop(x)]


def t_equivalent(f1: Formula, f2: Formula) -> bool:
    """Whether two standardized formulas lie in one class of the tree-decomposition rules.

    Such classes keep every region's polarity, quantified variables and holes,
    so the test is an isomorphism of region trees up to renaming bound variables.
    """
    if f1.free != f2.free:
        return False
    t1, t2 = organize(f1), organize(f2)
    if _shape(t1, f1.free) != _shape(t2, f2.free):
        return False
    bound2 = frozenset(_quantified(f2))
    matcher = _Matcher(f1.free, f2.free, bound2)
    return any(True for _ in matcher.match(t1, t2))


def rewrite_equiv(f1: Formula, f2: Formula) -> bool:
    """Whether ``f1`` and ``f2`` are interderivable with the rewriting rules."""
    if f1.free != f2.free:
        return False
    return t_equivalent(normalize(f1).formula, normalize(f2).formula)
