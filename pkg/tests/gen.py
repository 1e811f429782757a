"""Random formula generators shared by the property tests and the acceptance suite."""

import random

from pfowidth.formula import And, Atom, Exists, Forall, Or


def random_formula(rng, atoms=3, variables=("x", "y", "z"), relations=(("R", 2), ("S", 1)),
                   quant_prob=0.5, sentence=False):
    """A random pfo-formula with exactly ``atoms`` atoms."""

    def atom():
        rel, arity = rng.choice(relations)
        return Atom(rel, tuple(rng.choice(variables) for _ in range(arity)))

    def wrap(f):
        while rng.random() < quant_prob:
            cls = rng.choice((Exists, Forall))
            pool = sorted(f.free) if f.free and rng.random() < 0.85 else list(variables)
            f = cls(rng.choice(pool), f)
        return f

    def build(k):
        if k == 1:
            return wrap(atom())
        a = rng.randint(1, k - 1)
        cls = rng.choice((And, Or))
        return wrap(cls(build(a), build(k - a)))

    f = build(atoms)
    if sentence:
        for v in sorted(f.free):
            f = rng.choice((Exists, Forall))(v, f)
    return f


def random_exists_and_sentence(rng, max_vars=8, max_atoms=6, relations=(("E", 2), ("R", 3), ("U", 1))):
    """A standardized sentence over exists/and in which every quantified variable occurs in an atom."""
    k = rng.randint(1, max_vars)
    variables = [f"v{i}" for i in range(k)]
    n_atoms = rng.randint(1, max_atoms)
    while True:
        atoms = []
        for _ in range(n_atoms):
            rel, arity = rng.choice(relations)
            atoms.append((rel, [rng.choice(variables) for _ in range(arity)]))
        used = {v for _, args in atoms for v in args}
        missing = [v for v in variables if v not in used]
        slots = [(i, j) for i, (_, args) in enumerate(atoms) for j in range(len(args))]
        if len(missing) > len(slots):
            n_atoms = min(max_atoms, n_atoms + 1)
            continue
        rng.shuffle(slots)
        for v, (i, j) in zip(missing, slots):
            atoms[i][1][j] = v
        if all(v in {a for _, args in atoms for a in args} for v in variables):
            break
    leaves = [Atom(rel, tuple(args)) for rel, args in atoms]

    # random binary tree with quantifiers placed on random ancestors of each variable's scope
    def build(items):
        if len(items) == 1:
            return items[0]
        cut = rng.randint(1, len(items) - 1)
        return And(build(items[:cut]), build(items[cut:]))

    tree = build(leaves)
    order = variables[:]
    rng.shuffle(order)
    for v in order:
        tree = _place_exists(rng, tree, v)
    return tree


def _place_exists(rng, f, v):
    """Insert ``exists v`` at a random node whose subtree contains every free ``v``."""
    candidates = []

    def collect(node, path):
        if v in node.free:
            candidates.append(path)
        for i, c in enumerate(node.children):
            if v in c.free and v in node.free and sum(v in d.free for d in node.children) == 1:
                collect(c, path + (i,))

    collect(f, ())
    # candidates run from the root down to the lowest covering node
    path = rng.choice(candidates)
    return _insert(f, path, v)


def _insert(f, path, v):
    if not path:
        return Exists(v, f)
    kids = list(f.children)
    kids[path[0]] = _insert(kids[path[0]], path[1:], v)
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, kids[0])
    return type(f)(*kids)


def random_structure(rng, vocab, domain, density=0.5):
    from pfowidth.evaluation import Structure
    import itertools

    relations = {}
    for name, arity in sorted(vocab.items()):
        rows = {t for t in itertools.product(range(domain), repeat=arity) if rng.random() < density}
        relations[name] = (arity, frozenset(rows))
    return Structure(domain, relations)


def rng_for(seed):
    return random.Random(seed)
