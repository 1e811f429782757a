"""Hypergraphs, tree decompositions and treewidth (exact and heuristic), with PACE file I/O.

Treewidth is computed on the primal graph, where every hyperedge becomes a clique.
The exact algorithm is the subset dynamic program over elimination orderings:
TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v) is the set
of vertices outside S + v reachable from v through S. States whose value already
reaches the min-fill upper bound are pruned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import InvalidDecomposition, TooLarge

EXACT_THRESHOLD = 18


@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset
    edges: tuple

    def __init__(self, vertices: Iterable = (), edges: Iterable = ()):
        unique = []
        for e in edges:
            e = frozenset(e)
            if e not in unique:
                unique.append(e)
        verts = frozenset(vertices).union(*unique) if unique else frozenset(vertices)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(unique))

    def order(self) -> list:
        return sorted(self.vertices)

    def adjacency(self) -> dict:
        adj = {v: set() for v in self.vertices}
        for e in self.edges:
            for u in e:
                adj[u] |= e - {u}
        return adj


@dataclass(frozen=True)
class TreeDecomposition:
    bags: dict  # node id -> frozenset of vertices
    edges: tuple = ()  # pairs of node ids

    @property
    def bagsize(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0)

    @property
    def width(self) -> int:
        return max(self.bagsize - 1, 0)

    def neighbors(self) -> dict:
        nb = {n: set() for n in self.bags}
        for a, b in self.edges:
            nb[a].add(b)
            nb[b].add(a)
        return nb


@dataclass(frozen=True)
class TwResult:
    width: int
    decomposition: TreeDecomposition
    mode: str  # "exact" or "heuristic"
    stats: dict = field(default_factory=dict, compare=False)


def validate(h: Hypergraph, td: TreeDecomposition) -> list:
    """All violated decomposition conditions, as human-readable strings."""
    problems = []
    nodes = set(td.bags)
    if not nodes:
        return ["tree: decomposition has no nodes"]
    for a, b in td.edges:
        if a not in nodes or b not in nodes:
            problems.append(f"tree: edge ({a}, {b}) references an unknown node")
    if not problems:
        if len(td.edges) != len(nodes) - 1 or len(_component(td.neighbors(), next(iter(nodes)), nodes)) != len(nodes):
            problems.append("tree: nodes and edges do not form a tree")
    for v in sorted(h.vertices):
        if not any(v in b for b in td.bags.values()):
            problems.append(f"vertex coverage: {v} is in no bag")
    for e in h.edges:
        if not any(e <= b for b in td.bags.values()):
            problems.append(f"edge coverage: no bag contains {{{', '.join(sorted(e))}}}")
    if not problems:
        nb = td.neighbors()
        for v in sorted(h.vertices | frozenset().union(*td.bags.values())):
            holding = {n for n, b in td.bags.items() if v in b}
            if holding and len(_component(nb, next(iter(holding)), holding)) != len(holding):
                problems.append(f"connectivity: bags containing {v} are not connected")
    return problems


def _component(nb, start, allowed):
    seen, stack = {start}, [start]
    while stack:
        n = stack.pop()
        for m in nb[n]:
            if m in allowed and m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def td_from_ordering(h: Hypergraph, ordering: list) -> TreeDecomposition:
    """Decomposition induced by eliminating vertices in ``ordering``; nodes are numbered by position."""
    if not ordering:
        return TreeDecomposition({0: frozenset()}, ())
    adj = {v: set(n) for v, n in h.adjacency().items()}
    pos = {v: i for i, v in enumerate(ordering)}
    bags, parent = {}, {}
    for i, v in enumerate(ordering):
        later = adj[v]
        bags[i] = frozenset(later | {v})
        for a in later:
            adj[a] |= later - {a}
            adj[a].discard(v)
        if later:
            parent[i] = min(pos[a] for a in later)
    edges = [(i, p) for i, p in sorted(parent.items())]
    roots = [i for i in range(len(ordering)) if i not in parent]
    edges += [(roots[k], roots[k + 1]) for k in range(len(roots) - 1)]
    return TreeDecomposition(bags, tuple(edges))


def _fill_in(adj, v):
    nb = sorted(adj[v])
    return sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])


def min_fill_ordering(h: Hypergraph) -> list:
    adj = {v: set(n) for v, n in h.adjacency().items()}
    order = []
    while adj:
        v = min(sorted(adj), key=lambda u: _fill_in(adj, u))
        nb = adj.pop(v)
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
        order.append(v)
    return order


def heuristic_td(h: Hypergraph) -> TwResult:
    td = td_from_ordering(h, min_fill_ordering(h))
    return TwResult(td.width, td, "heuristic")


def _components(h: Hypergraph) -> list:
    adj = h.adjacency()
    left, out = set(h.vertices), []
    for v in sorted(h.vertices):
        if v in left:
            comp = _component(adj, v, left)
            left -= comp
            out.append(sorted(comp))
    return out


def _exact_ordering(vertices: list, adj: dict, upper: int):
    """Optimal elimination ordering of one connected component, or None if ``upper`` is optimal."""
    n = len(vertices)
    index = {v: i for i, v in enumerate(vertices)}
    nbmask = [0] * n
    for v in vertices:
        for u in adj[v]:
            nbmask[index[v]] |= 1 << index[u]
    full = (1 << n) - 1

    def q_size(s, i):
        # vertices outside s + i reachable from i through s
        reach, frontier = 1 << i, 1 << i
        while frontier:
            nxt = 0
            m = frontier
            while m:
                low = m & -m
                nxt |= nbmask[low.bit_length() - 1]
                m ^= low
            nxt &= s & ~reach
            reach |= nxt
            frontier = nxt
        out = 0
        m = reach
        while m:
            low = m & -m
            out |= nbmask[low.bit_length() - 1]
            m ^= low
        return bin(out & ~s & ~(1 << i)).count("1")

    best = {0: -1}
    back = {}
    layer = [0]
    for _ in range(n):
        nxt = {}
        for s in layer:
            base = best[s]
            for i in range(n):
                bit = 1 << i
                if s & bit:
                    continue
                val = max(base, q_size(s, i))
                if val >= upper:
                    continue
                t = s | bit
                if t not in best or val < best[t]:
                    best[t] = val
                    back[t] = i
                    nxt[t] = True
        layer = list(nxt)
        if not layer:
            return None
    if full not in best:
        return None
    order, s = [], full
    while s:
        i = back[s]
        order.append(vertices[i])
        s &= ~(1 << i)
    order.reverse()
    return order


def exact_treewidth(h: Hypergraph, threshold: int = EXACT_THRESHOLD) -> TwResult:
    """Minimum-width decomposition; raises TooLarge above ``threshold`` vertices."""
    if len(h.vertices) > threshold:
        raise TooLarge(f"{len(h.vertices)} vertices exceed the exact threshold {threshold}; use heuristic mode")
    adj = h.adjacency()
    ordering = []
    for comp in _components(h):
        sub = Hypergraph(comp, [e & frozenset(comp) for e in h.edges if e & frozenset(comp)])
        guess = min_fill_ordering(sub)
        upper = td_from_ordering(sub, guess).bagsize - 1
        better = _exact_ordering(comp, adj, upper) if upper > 1 else None
        ordering.extend(better if better is not None else guess)
    td = td_from_ordering(h, ordering)
    return TwResult(td.width, td, "exact")


def treewidth(h: Hypergraph, mode: str = "exact", threshold: int = EXACT_THRESHOLD) -> TwResult:
    if mode == "exact":
        return exact_treewidth(h, threshold)
    if mode == "heuristic":
        return heuristic_td(h)
    raise ValueError(f"unknown treewidth mode {mode!r}")


def normalize_td(h: Hypergraph, td: TreeDecomposition) -> TreeDecomposition:
    """Contract every tree edge whose one bag is contained in the other."""
    problems = validate(h, td)
    if problems:
        raise InvalidDecomposition("; ".join(problems))
    bags = dict(td.bags)
    nb = td.neighbors()
    changed = True
    while changed:
        changed = False
        for a in sorted(bags):
            for b in sorted(nb[a]):
                if bags[a] <= bags[b]:
                    for c in nb[a] - {b}:
                        nb[c].discard(a)
                        nb[c].add(b)
                        nb[b].add(c)
                    nb[b].discard(a)
                    del nb[a], bags[a]
                    changed = True
                    break
            if changed:
                break
    ids = {old: new for new, old in enumerate(sorted(bags))}
    edges = sorted({tuple(sorted((ids[a], ids[b]))) for a in nb for b in nb[a]})
    return TreeDecomposition({ids[k]: v for k, v in bags.items()}, tuple(edges))


# --- PACE formats ---------------------------------------------------------------


def write_gr(h: Hypergraph) -> str:
    order = h.order()
    ids = {v: i + 1 for i, v in enumerate(order)}
    pairs = sorted({tuple(sorted((ids[a], ids[b]))) for e in h.edges for a in e for b in e if a != b})
    lines = [f"p tw {len(order)} {len(pairs)}"]
    lines += [f"c vertex {ids[v]} {v}" for v in order]
    for e in h.edges:
        if len(e) != 2:
            lines.append("c hyperedge" + "".join(f" {ids[v]}" for v in sorted(e, key=ids.get)))
    lines += [f"{a} {b}" for a, b in pairs]
    return "\n".join(lines) + "\n"


def read_gr(text: str) -> Hypergraph:
    n = None
    names, edges, declared = {}, [], []
    for raw in text.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "c":
            if len(parts) >= 4 and parts[1] == "vertex":
                names[int(parts[2])] = parts[3]
            elif len(parts) >= 2 and parts[1] == "hyperedge":
                declared.append([int(p) for p in parts[2:]])
                edges.append(declared[-1])
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "tw":
                raise ValueError(f"bad problem line: {raw!r}")
            n = int(parts[2])
            continue
        if n is None:
            raise ValueError("edge before the 'p tw' line")
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {raw!r}")
        edges.append([int(parts[0]), int(parts[1])])
    if n is None:
        raise ValueError("missing 'p tw' line")
    for e in edges:
        for i in e:
            if not 1 <= i <= n:
                raise ValueError(f"vertex {i} out of range 1..{n}")
    # pair lines inside a declared hyperedge only spell out its clique
    hyper = [set(e) for e in declared if len(e) > 2]
    edges = declared + [e for e in edges if e not in declared and not any(set(e) <= h for h in hyper)]
    name = lambda i: names.get(i, str(i))
    return Hypergraph([name(i) for i in range(1, n + 1)], [{name(i) for i in e} for e in edges])


def write_td(h: Hypergraph, td: TreeDecomposition) -> str:
    ids = {v: i + 1 for i, v in enumerate(h.order())}
    nodes = {old: new + 1 for new, old in enumerate(sorted(td.bags))}
    lines = [f"s td {len(nodes)} {td.bagsize} {len(ids)}"]
    for old in sorted(td.bags):
        lines.append(f"b {nodes[old]}" + "".join(f" {ids[v]}" for v in sorted(td.bags[old], key=ids.get)))
    lines += [f"{nodes[a]} {nodes[b]}" for a, b in td.edges]
    return "\n".join(lines) + "\n"


def read_td(text: str, h: Hypergraph) -> TreeDecomposition:
    names = {i + 1: v for i, v in enumerate(h.order())}
    bags, edges = {}, []
    for raw in text.splitlines():
        parts = raw.split()
        if not parts or parts[0] in ("c", "s"):
            continue
        if parts[0] == "b":
            bags[int(parts[1])] = frozenset(names[int(p)] for p in parts[2:])
        else:
            edges.append((int(parts[0]), int(parts[1])))
    return TreeDecomposition(bags, tuple(edges))
