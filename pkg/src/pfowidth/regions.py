"""Organized formulas: maximal single-polarity regions, their holes and hypergraphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import AssociationMismatch, InvalidRegion
from .formula import And, Atom, Exists, Forall, Formula, Hole, Or, format_formula, with_children
from .treewidth import Hypergraph

POLARITY_LABELS = {"exists-and": (Exists, And), "forall-or": (Forall, Or)}


@dataclass(frozen=True, eq=True)
class RegionTree:
    skeleton: Formula  # holey formula; holes carry their variable sets
    polarity: str
    children: dict  # hole index (1-based, preorder) -> Atom or RegionTree

    @property
    def assoc(self) -> dict:
        return {h.index: h.vars for h in holes(self.skeleton)}

    @property
    def free(self) -> frozenset:
        return self.skeleton.free


Organized = Union[Atom, RegionTree]


def holes(h: Formula) -> list:
    """Holes in preorder."""
    out, stack = [], [h]
    while stack:
        node = stack.pop()
        if isinstance(node, Hole):
            out.append(node)
        stack.extend(reversed(node.children))
    return out


def polarity_of(node: Formula) -> Optional[str]:
    for name, labels in POLARITY_LABELS.items():
        if isinstance(node, labels):
            return name
    return None


def organize(f: Formula) -> Organized:
    """Split ``f`` into its top region and recursively organized hole fillers."""
    if isinstance(f, (Atom, Hole)):
        return f
    pol = polarity_of(f)
    labels = POLARITY_LABELS[pol]
    children = {}

    def carve(node):
        if isinstance(node, labels):
            return with_children(node, [carve(c) for c in node.children])
        index = len(children) + 1
        children[index] = organize(node)
        return Hole(index, node.free)

    skeleton = carve(f)
    return RegionTree(skeleton, pol, children)


def reassemble(t: Organized) -> Formula:
    if not isinstance(t, RegionTree):
        return t
    if isinstance(t.skeleton, Hole):
        raise InvalidRegion("a region skeleton must contain a connective or quantifier")
    fillers = {i: reassemble(c) for i, c in t.children.items()}
    return plug(t.skeleton, fillers)


def plug(h: Formula, fillers) -> Formula:
    """Substitute ``fillers[i]`` (a mapping) for hole ``i``, checking free variables against the association."""
    if isinstance(h, Hole):
        if h.index not in fillers:
            raise AssociationMismatch(f"no filler for hole {h.index}")
        filler = fillers[h.index]
        if filler.free != h.vars:
            raise AssociationMismatch(
                f"hole {h.index} expects {sorted(h.vars)} but filler has {sorted(filler.free)}")
        return filler
    if isinstance(h, Atom):
        return h
    return with_children(h, [plug(c, fillers) for c in h.children])


def regions(t: Organized) -> list:
    """All region trees, preorder; list position is the region id."""
    out = []

    def go(node):
        if isinstance(node, RegionTree):
            out.append(node)
            for i in sorted(node.children):
                go(node.children[i])

    go(t)
    return out


def region_hypergraph(h: Formula, assoc: Optional[Mapping[int, frozenset]] = None,
                      free: Optional[frozenset] = None) -> Hypergraph:
    """Vertices are the hole variables; edges are the hole sets plus the free-variable set."""
    edges = []
    for hole in holes(h):
        if assoc is None:
            edges.append(hole.vars)
        elif hole.index in assoc:
            edges.append(frozenset(assoc[hole.index]))
        else:
            raise AssociationMismatch(f"hole {hole.index} is undefined in the association")
    edges.append(frozenset(h.free if free is None else free))
    return Hypergraph((), edges)


def format_region_tree(t: Organized, indent: int = 0) -> str:
    pad = "  " * indent
    if not isinstance(t, RegionTree):
        return f"{pad}{format_formula(t)}\n"
    lines = [f"{pad}region {t.polarity}: {format_formula(t.skeleton)}\n"]
    for i, child in sorted(t.children.items()):
        lines.append(f"{pad}  [{i}] {{{','.join(sorted(t.assoc[i]))}}}\n")
        lines.append(format_region_tree(child, indent + 2))
    return "".join(lines)
