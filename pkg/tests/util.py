"""Shared builders and naive oracles for the test suite.

The oracles here re-derive answers from definitions (exhaustion over all
maps, all colorings, ...) and never call the search machinery they check.
"""

import itertools

from homkit.structures import Structure, make_signature

DIGRAPH = make_signature([("E", 2)])


def digraph(n, arcs=()):
    return Structure(DIGRAPH, n, {"E": arcs})


def clique(n):
    """Symmetric loopless complete digraph K_n."""
    return digraph(n, [(i, j) for i in range(n) for j in range(n) if i != j])


def dcycle(n):
    """Directed cycle on n vertices."""
    return digraph(n, [(i, (i + 1) % n) for i in range(n)])


def scycle(n):
    """Symmetric cycle on n vertices."""
    arcs = []
    for i in range(n):
        arcs += [(i, (i + 1) % n), ((i + 1) % n, i)]
    return digraph(n, arcs)


def dpath(k):
    """Directed path with k arcs (k+1 vertices)."""
    return digraph(k + 1, [(i, i + 1) for i in range(k)])


def spath(k):
    arcs = []
    for i in range(k):
        arcs += [(i, i + 1), (i + 1, i)]
    return digraph(k + 1, arcs)


def loop_vertex():
    return digraph(1, [(0, 0)])


def point():
    return digraph(1)


def naive_valid(a, b, m, mode_tag, noncollapse=(), free_tuples=()):
    """Definition-level check that map m is a mode_tag-homomorphism a -> b."""
    for (name, arity), ra, rb in zip(a.sig.symbols, a.rels, b.rels):
        for t in ra:
            if tuple(m[x] for x in t) not in rb:
                return False
    if mode_tag == "injective" and len(set(m)) != len(m):
        return False
    if mode_tag == "full":
        for (name, arity), ra, rb in zip(a.sig.symbols, a.rels, b.rels):
            for t in itertools.product(range(a.n), repeat=arity):
                if (name, t) in free_tuples:
                    continue
                if (t in ra) != (tuple(m[x] for x in t) in rb):
                    return False
    for x, y in noncollapse:
        if m[x] == m[y]:
            return False
    return True


def naive_homs(a, b, mode_tag="plain", noncollapse=(), free_tuples=()):
    """All valid maps by exhausting every one of |B|^|A| candidates."""
    out = []
    for m in itertools.product(range(b.n), repeat=a.n):
        if naive_valid(a, b, m, mode_tag, noncollapse, free_tuples):
            out.append(m)
    return out
