"""Reduction between forbidden-pattern languages and CSPs over block relations.

The basis signature has one relation per biconnected block occurring in
the pattern shadows (plus the generic one-tuple block of every base
symbol, so that rebuilding from block images is the identity).  The two
functors: `psi` records every block occurrence as a tuple; `theta`
replays block tuples as base tuples.  The derived forest family over the
basis signature captures pattern occurrences whose surroundings look
tree-like, which is exactly what high-girth instances provide.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import GuardExceededError, GirthTooSmallError
from .homs import all_homs, hom_exists
from .patterns import PatternFamily, pattern_color_map
from .shape import biconnected_components, shortest_cycle
from .structures import (
    Lift,
    Signature,
    Structure,
    canonical_form,
    canonical_perm,
    lift_canonical_form,
    quotient,
    relabel,
    shadow,
)

GPRIME_ASSEMBLY_CAP = 1 << 16


@dataclass(frozen=True)
class BasisSignature:
    """Block representatives and the relation symbols they name."""

    blocks: tuple  # canonical block Structures over the base signature
    beta: Signature  # one symbol per block, arity = block size
    lifted: Signature  # beta plus the family's lift symbols

    def block_symbol(self, i: int) -> str:
        return self.beta.symbols[i][0]


def build_basis(fam: PatternFamily) -> BasisSignature:
    """Blocks of all pattern shadows, plus one generic block per base symbol."""
    if not fam.is_monadic():
        raise ValueError("the reduction expects a monadic family")
    base = fam.base_sig
    reps = {}
    for p in fam.patterns:
        sh = shadow(p)
        for blk in biconnected_components(sh):
            if not blk.tuples:
                continue  # isolated points never matter for the functors
            s = blk.structure
            key = canonical_form(s)
            if key not in reps:
                reps[key] = relabel(s, canonical_perm(s))
    for name, ar in base.symbols:
        generic = Structure(base, ar, {name: [tuple(range(ar))]})
        key = canonical_form(generic)
        if key not in reps:
            reps[key] = relabel(generic, canonical_perm(generic))
    blocks = tuple(sorted(reps.values(), key=lambda s: (s.n, canonical_form(s)[2])))
    color_names = set(fam.sig.lift_names)
    prefix = "B"
    while any(f"{prefix}{i}" in color_names for i in range(len(blocks))):
        prefix += "_"
    beta = Signature(tuple((f"{prefix}{i}", b.n) for i, b in enumerate(blocks)))
    lifted = Signature(
        beta.symbols + tuple(fam.sig.lift_symbols()), frozenset(fam.sig.lift_names)
    )
    return BasisSignature(blocks, beta, lifted)


def psi(a: Structure, basis: BasisSignature) -> Structure:
    """Same universe; one beta-tuple per homomorphism of each block into `a`."""
    rels = {}
    for i, blk in enumerate(basis.blocks):
        rels[basis.block_symbol(i)] = {h.mapping for h in all_homs(blk, a)}
    return Structure(basis.beta, a.n, rels, a.element_names)


def theta(b: Structure, basis: BasisSignature) -> Structure:
    """Same universe; every beta-tuple replays its block's base tuples."""
    base = basis.blocks[0].sig if basis.blocks else None
    rels = {name: set() for name, _ in base.symbols}
    for i, blk in enumerate(basis.blocks):
        for t in b.rel(basis.block_symbol(i)):
            for si, tp in blk.all_tuples():
                rels[blk.sig.names[si]].add(tuple(t[x] for x in tp))
    return Structure(base, b.n, rels, b.element_names)


def _strip_colors(struct: Structure, to_sig: Signature) -> Structure:
    rels = {name: struct.rel(name) for name, _ in to_sig.base_symbols()}
    return Structure(to_sig.base(), struct.n, rels, struct.element_names)


def psi_lifted(a_lift: Lift, basis: BasisSignature) -> Lift:
    """psi on the shadow, colors carried along unchanged."""
    a = a_lift.struct
    sh = _strip_colors(a, a.sig)
    core = psi(sh, basis)
    rels = {name: core.rel(name) for name, _ in basis.beta.symbols}
    for name, _ in a.sig.lift_symbols():
        rels[name] = a.rel(name)
    return Lift(Structure(basis.lifted, a.n, rels, a.element_names), 1, a_lift.cover_mode)


def theta_lifted(b_lift: Lift, basis: BasisSignature) -> Lift:
    b = b_lift.struct
    sh = _strip_colors(b, b.sig)
    core = theta(sh, basis)
    rels = {name: core.rel(name) for name, _ in core.sig.symbols}
    for name, _ in b.sig.lift_symbols():
        rels[name] = b.rel(name)
    base_sig = basis.blocks[0].sig
    lifted_base = Signature(
        base_sig.symbols + tuple(b.sig.lift_symbols()), frozenset(b.sig.lift_names)
    )
    return Lift(Structure(lifted_base, b.n, rels, b.element_names), 1, b_lift.cover_mode)


def girth_threshold(fam: PatternFamily) -> int:
    return max((p.struct.n for p in fam.patterns), default=0)


def _color_compatible_partitions(p: Lift, fam: PatternFamily):
    """Set partitions of the pattern's universe collapsing equal colors only."""
    cmap = pattern_color_map(fam, p)
    if cmap is None:
        return
    color_of = {t[0]: c for t, c in cmap.items()}
    n = p.struct.n
    assign = [0] * n

    def rec(i, maxcls):
        if i == n:
            yield list(assign), maxcls + 1
            return
        for c in range(maxcls + 2):
            ok = True
            for j in range(i):
                if assign[j] == c and color_of.get(j) != color_of.get(i):
                    ok = False
                    break
            if ok:
                assign[i] = c
                yield from rec(i + 1, max(maxcls, c))

    if n == 0:
        yield [], 0
        return
    yield from rec(1, 0)


def _tuple_candidates(basis: BasisSignature, sym_name: str, t, n_core):
    """Ways to cover a base tuple by one block occurrence.

    A candidate is (block index, vector over the block's universe) whose
    entries are ('c', core element) or ('f', block position); consistent
    with some block tuple mapping onto `t`.
    """
    out = set()
    for bi, blk in enumerate(basis.blocks):
        positions = [
            tp for si, tp in blk.all_tuples() if blk.sig.names[si] == sym_name
        ]
        for bt in positions:
            m = {}
            ok = True
            for x, target in zip(bt, t):
                if m.get(x, target) != target:
                    ok = False
                    break
                m[x] = target
            if not ok:
                continue
            open_elems = [x for x in range(blk.n) if x not in m]
            for values in itertools.product(range(n_core + 1), repeat=len(open_elems)):
                vec = []
                for x in range(blk.n):
                    if x in m:
                        vec.append(("c", m[x]))
                    else:
                        v = values[open_elems.index(x)]
                        vec.append(("c", v) if v < n_core else ("f", x))
                out.add((bi, tuple(vec)))
    return sorted(out)


def build_gprime(fam: PatternFamily, basis: BasisSignature, cap: int = GPRIME_ASSEMBLY_CAP) -> PatternFamily:
    """Forest patterns over the basis signature marking pattern occurrences.

    Members come from color-compatible quotients of the patterns: each
    quotient tuple is covered by a block occurrence, pendant coordinates
    are fresh and colored every possible way, and cyclic assemblies are
    discarded.  Members receiving a homomorphism from another member are
    pruned.
    """
    if not fam.is_monadic():
        raise ValueError("the reduction expects a monadic family")
    colors = fam.colors()
    members = {}
    for p in fam.patterns:
        cmap = pattern_color_map(fam, p)
        if cmap is None:
            continue
        color_of = {t[0]: c for t, c in cmap.items()}
        sh = shadow(p)
        for assign, m in _color_compatible_partitions(p, fam):
            h = quotient(sh, assign, m)
            core_colors = {}
            for x in range(p.struct.n):
                if x in color_of:
                    core_colors[assign[x]] = color_of[x]
            h_tuples = sorted(h.all_tuples())
            choice_lists = []
            for si, t in h_tuples:
                cands = _tuple_candidates(basis, h.sig.names[si], t, m)
                choice_lists.append(cands)
            total = 1
            for cl in choice_lists:
                total *= max(len(cl), 1)
                if total > cap:
                    raise GuardExceededError("pattern assembly count exceeds the cap")
            if any(not cl for cl in choice_lists):
                continue
            for combo in itertools.product(*choice_lists):
                chosen = sorted(set(combo))
                # materialise: core elements first, then fresh slots per candidate
                fresh_index = {}
                for ci, (bi, vec) in enumerate(chosen):
                    for kind, v in vec:
                        if kind == "f":
                            fresh_index.setdefault((ci, v), m + len(fresh_index))
                n_total = m + len(fresh_index)
                rels = {name: set() for name, _ in basis.lifted.symbols}
                for ci, (bi, vec) in enumerate(chosen):
                    coords = []
                    for kind, v in vec:
                        coords.append(v if kind == "c" else fresh_index[(ci, v)])
                    rels[basis.block_symbol(bi)].add(tuple(coords))
                base_struct = Structure(basis.lifted, n_total, rels)
                if shortest_cycle(base_struct) is not None:
                    continue
                fresh_slots = sorted(fresh_index.values())
                for fresh_colors in itertools.product(range(len(colors)), repeat=len(fresh_slots)):
                    crels = {k: set(v) for k, v in rels.items()}
                    for x in range(m):
                        crels[colors[core_colors[x]]].add((x,))
                    for slot, c in zip(fresh_slots, fresh_colors):
                        crels[colors[c]].add((slot,))
                    lift = Lift(Structure(basis.lifted, n_total, crels), 1, "partition")
                    members.setdefault(lift_canonical_form(lift), lift)
                    if len(members) > cap:
                        raise GuardExceededError("member count exceeds the cap")
    pats = sorted(members.values(), key=lambda p: (p.struct.n, lift_canonical_form(p)))
    minimal = []
    for i, p in enumerate(pats):
        dominated = False
        for j, q in enumerate(pats):
            if i == j:
                continue
            if hom_exists(q.struct, p.struct) is not None:
                if hom_exists(p.struct, q.struct) is not None and i < j:
                    continue
                dominated = True
                break
        if not dominated:
            minimal.append(p)
    return PatternFamily(basis.lifted, tuple(minimal), "plain", 1)


def reduce_forward(a: Structure, fam: PatternFamily, basis=None, duality_caps=None):
    """(psi(a), derived family, base templates or None on a size cap)."""
    from .duality import forest_family_duals, dedup_hom_equivalent
    from .homs import core_of
    from .patterns import partition_power

    if basis is None:
        basis = build_basis(fam)
    gfam = build_gprime(fam, basis)
    image = psi(a, basis)
    try:
        duals = forest_family_duals([p.struct for p in gfam.patterns], **(duality_caps or {}))
        templates = tuple(
            dedup_hom_equivalent([core_of(partition_power(basis.beta, d)) for d in duals])
        )
    except GuardExceededError:
        templates = None
    return image, gfam, templates


def reduce_backward(b: Structure, fam: PatternFamily, basis=None) -> Structure:
    """theta(b), defended by the girth precondition."""
    if basis is None:
        basis = build_basis(fam)
    k = girth_threshold(fam)
    found = shortest_cycle(b, shorter_than=k + 1)
    if found is not None:
        raise GirthTooSmallError(
            f"input girth {found[0]} is not above the pattern-size threshold {k}",
            cycle=found[1],
        )
    return theta(b, basis)
