"""Forbidden-pattern languages over monadic (and r-ary) partition lifts.

A pattern family over a lifted signature fixes a matching mode; a base
structure belongs to the language iff some partition lift of it (every
r-tuple in exactly one lift relation) admits no pattern under that mode.
Membership search assigns lift classes to r-tuples and excludes the
assignment fragments induced by pattern occurrences ("nogoods").

Witnesses are partition lifts throughout: a covering witness can always
shed extra classes without creating pattern occurrences in plain and
injective modes, and the full-mode families produced by the formula
translations match exact classes, so partitions lose no generality here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import GuardExceededError, SignatureMismatchError
from .homs import all_homs, core_of, hom_exists, hom_images
from .shape import shortest_cycle
from .structures import (
    HomMode,
    Lift,
    Signature,
    Structure,
    disjoint_union,
    lift_canonical_form,
    quotient,
    shadow,
)

MEMBERSHIP_BITS_CAP = 48
NORMALIZE_CAP = 512
EXPAND_CAP = 4096


@dataclass(frozen=True)
class PatternFamily:
    """Finitely many forbidden lifts plus the matching mode."""

    sig: Signature
    patterns: tuple
    mode_tag: str = "plain"
    lift_arity: int = 1

    def __post_init__(self):
        if self.mode_tag not in ("plain", "injective", "full"):
            raise ValueError(f"unknown mode {self.mode_tag!r}")
        for p in self.patterns:
            if p.struct.sig != self.sig:
                raise SignatureMismatchError("pattern signature differs from family signature")

    @property
    def base_sig(self) -> Signature:
        return self.sig.base()

    def colors(self):
        return tuple(name for name, _ in self.sig.lift_symbols())

    def pattern_mode(self, p: Lift) -> HomMode:
        return HomMode(self.mode_tag, p.noncollapse, p.free_tuples)

    def is_monadic(self) -> bool:
        return self.lift_arity == 1 and all(ar == 1 for _, ar in self.sig.lift_symbols())


def pattern_color_map(fam: PatternFamily, p: Lift):
    """Map r-tuple -> color index for a pattern; None on a doubly-colored tuple."""
    colors = fam.colors()
    assignment = {}
    for ci, name in enumerate(colors):
        for t in p.struct.rel(name):
            if t in assignment:
                return None
            assignment[t] = ci
    return assignment


def make_partition_lift(fam: PatternFamily, a: Structure, coloring) -> Lift:
    """Build the lift of `a` whose r-tuples carry the given color indices."""
    colors = fam.colors()
    rels = {name: a.rel(name) for name, _ in a.sig.symbols}
    for name in colors:
        rels[name] = set()
    for t, ci in coloring.items():
        rels[colors[ci]].add(t)
    carrier = Structure(fam.sig, a.n, rels, a.element_names)
    return Lift(carrier, fam.lift_arity, "partition")


def lift_occurrence(fam: PatternFamily, p: Lift, witness: Lift):
    """Mode-respecting occurrence of pattern p inside a witness lift, or None.

    This is the independent validator for membership answers: it runs the
    generic searcher over the whole lifted signature.
    """
    return hom_exists(p.struct, witness.struct, fam.pattern_mode(p))


def fp_membership(a: Structure, fam: PatternFamily, bits_cap: int = MEMBERSHIP_BITS_CAP):
    """A partition lift of `a` avoiding every pattern, or None.

    Search space: one variable per r-tuple of `a`, one value per lift
    symbol; every mode-respecting occurrence of a pattern shadow
    contributes a forbidden assignment fragment.
    """
    if a.sig != fam.base_sig:
        raise SignatureMismatchError("structure signature differs from the family's base part")
    colors = fam.colors()
    if not colors:
        raise ValueError("family signature has no lift symbols")
    r = fam.lift_arity
    slots = list(itertools.product(range(a.n), repeat=r))
    import math

    if len(slots) * math.log2(len(colors)) > bits_cap:
        raise GuardExceededError(
            f"{len(colors)}^{len(slots)} colorings exceed the membership cap"
        )
    slot_index = {t: i for i, t in enumerate(slots)}

    nogoods = set()
    base_shadow = {}
    for p in fam.patterns:
        cmap = pattern_color_map(fam, p)
        if cmap is None:
            continue  # doubly-colored tuples never occur in a partition lift
        if fam.mode_tag == "full" and len(cmap) < p.struct.n ** r:
            # full-mode matching reflects the lift relations too: an
            # uncolored pattern tuple would need a colorless image, which a
            # partition lift never provides
            continue
        psh = base_shadow.get(id(p))
        if psh is None:
            psh = shadow(p)
            base_shadow[id(p)] = psh
        mode = fam.pattern_mode(p)
        for h in all_homs(psh, a, mode):
            frag = {}
            ok = True
            for t, ci in cmap.items():
                s = slot_index[h.apply_tuple(t)]
                if frag.get(s, ci) != ci:
                    ok = False  # two pattern tuples land on one slot with different colors
                    break
                frag[s] = ci
            if not ok:
                continue
            if not frag:
                return None  # an unconditional occurrence: no lift can avoid it
            nogoods.add(frozenset(frag.items()))

    # backtracking over slot colors with nogood counters
    ngs = [dict(g) for g in sorted(nogoods, key=sorted)]
    by_slot = [[] for _ in slots]
    for k, g in enumerate(ngs):
        for s in g:
            by_slot[s].append(k)
    remaining = [len(g) for g in ngs]
    dead = [False] * len(ngs)
    ncolors = len(colors)
    assignment = [-1] * len(slots)
    trail = []

    def assign(s, c):
        ops = []
        conflict = False
        for k in by_slot[s]:
            if dead[k]:
                continue
            if ngs[k][s] != c:
                dead[k] = True
                ops.append(("dead", k))
            else:
                remaining[k] -= 1
                ops.append(("rem", k))
                if remaining[k] == 0:
                    conflict = True
        trail.append(ops)
        return not conflict

    def undo():
        for op, k in trail.pop():
            if op == "dead":
                dead[k] = False
            else:
                remaining[k] += 1

    s = 0
    choice = [0] * (len(slots) + 1)
    while True:
        if s == len(slots):
            coloring = {slots[i]: assignment[i] for i in range(len(slots))}
            return make_partition_lift(fam, a, coloring)
        advanced = False
        while choice[s] < ncolors:
            c = choice[s]
            choice[s] += 1
            assignment[s] = c
            if assign(s, c):
                s += 1
                choice[s] = 0
                advanced = True
                break
            undo()
        if advanced:
            continue
        if s == 0:
            return None
        s -= 1
        undo()


def union_families(f1: PatternFamily, f2: PatternFamily) -> PatternFamily:
    """Family for the union language: pairwise disjoint unions of patterns."""
    if f1.sig != f2.sig or f1.mode_tag != f2.mode_tag or f1.lift_arity != f2.lift_arity:
        raise SignatureMismatchError("united families must share signature, mode and lift arity")
    pats = tuple(disjoint_union(p, q) for p in f1.patterns for q in f2.patterns)
    return PatternFamily(f1.sig, pats, f1.mode_tag, f1.lift_arity)


def _lift_images(p: Lift, r: int):
    """Homomorphic images of a pattern, as lifts (cover status recomputed)."""
    out = []
    for img in hom_images(p.struct):
        out.append(Lift(img, r, "none"))
    return out


def _is_vacuous(fam: PatternFamily, p: Lift) -> bool:
    return pattern_color_map(fam, p) is None


def normalize_family(fam: PatternFamily, cap: int = NORMALIZE_CAP) -> PatternFamily:
    """Image-closed, cored, homomorphism-minimal presentation of the family.

    Patterns whose tuples carry two lift classes can never occur in a
    partition lift and are dropped as vacuous.
    """
    if not fam.is_monadic():
        raise ValueError("normalize_family expects a monadic family")
    if fam.mode_tag != "plain":
        raise ValueError("normalize_family expects a plain-mode family")
    seen = {}
    for p in fam.patterns:
        if p.noncollapse or p.free_tuples:
            raise ValueError("expand partial constraints before normalizing")
        for img in _lift_images(p, fam.lift_arity):
            if _is_vacuous(fam, img):
                continue
            key = lift_canonical_form(img)
            if key not in seen:
                seen[key] = img
            if len(seen) > cap:
                raise GuardExceededError("image closure exceeds the normalization cap")
    cored = {}
    for img in seen.values():
        c = Lift(core_of(img.struct), fam.lift_arity, "none")
        cored.setdefault(lift_canonical_form(c), c)
    pats = sorted(cored.values(), key=lambda p: (p.struct.n, lift_canonical_form(p)))
    minimal = []
    for i, p in enumerate(pats):
        dominated = False
        for j, q in enumerate(pats):
            if i != j and hom_exists(q.struct, p.struct) is not None:
                # q maps into p; drop p unless they are hom-equivalent and
                # p is the earlier representative
                if hom_exists(p.struct, q.struct) is not None and i < j:
                    continue
                dominated = True
                break
        if not dominated:
            minimal.append(p)
    return PatternFamily(fam.sig, tuple(minimal), fam.mode_tag, fam.lift_arity)


@dataclass(frozen=True)
class DecisionOutcome:
    verdict: str  # 'finite_union_csp' | 'not_finite_union'
    templates: tuple | None = None
    witness: Lift | None = None
    witness_cycle: tuple | None = None
    note: str | None = None


def partition_power(sig_base: Signature, dual: Structure) -> Structure:
    """Base-signature template whose points are (element, chosen class) pairs.

    A partition lift maps into `dual` iff its shadow maps into this
    structure; uncolored dual elements cannot host a partition lift and
    drop out.
    """
    lifted_sig = dual.sig
    color_names = [name for name, _ in lifted_sig.lift_symbols()]
    points = []
    for x in range(dual.n):
        for name in color_names:
            if (x,) in dual.rel(name):
                points.append((x, name))
    index = {p: i for i, p in enumerate(points)}
    rels = {}
    for name, ar in sig_base.symbols:
        have = dual.rel(name)
        rels[name] = set()
        for cand in itertools.product(points, repeat=ar):
            if tuple(p[0] for p in cand) in have:
                rels[name].add(tuple(index[p] for p in cand))
    return Structure(sig_base, len(points), rels)


def decide_finite_union_csp(fam: PatternFamily, duality_caps=None) -> DecisionOutcome:
    """Is the language a finite union of CSPs?  Forest core patterns say yes.

    Positive verdicts come with base templates (shadows of the lifted
    duals); a cyclic core pattern in the normalized family is the negative
    witness.  If the dual construction hits a size cap the positive
    verdict is still returned, without templates.
    """
    from .duality import forest_family_duals, dedup_hom_equivalent, terminal_structure

    norm = normalize_family(fam)
    base = fam.base_sig
    if not norm.patterns:
        return DecisionOutcome(
            "finite_union_csp",
            templates=(terminal_structure(base),),
            note="degenerate: every structure belongs to the language",
        )
    for p in norm.patterns:
        found = shortest_cycle(p.struct)
        if found is not None:
            return DecisionOutcome(
                "not_finite_union", witness=p, witness_cycle=tuple(found[1])
            )
    kwargs = duality_caps or {}
    try:
        duals = forest_family_duals([p.struct for p in norm.patterns], **kwargs)
    except GuardExceededError as e:
        return DecisionOutcome("finite_union_csp", templates=None, note=f"duality cap: {e}")
    templates = dedup_hom_equivalent(
        [core_of(partition_power(base, d)) for d in duals]
    )
    return DecisionOutcome("finite_union_csp", templates=tuple(templates))


def corroborate_negative(fam: PatternFamily, template_size: int = 2, set_size: int = 2, max_n: int = 3):
    """Empirical support for a negative verdict: sweep tiny template sets.

    Returns the number of candidate sets tried; raises if any of them
    matches the language on all structures with at most max_n elements
    (which would contradict the verdict at this scale).
    """
    from .enumeration import all_structures

    base = fam.base_sig
    templates = list(all_structures(base, template_size))
    candidates = [[t] for t in templates]
    if set_size >= 2:
        candidates += [list(p) for p in itertools.combinations(templates, 2)]
    cache = {}
    for cand in candidates:
        ok, _ = verify_shadow_duality(fam, cand, max_n, cache=cache)
        if ok:
            raise AssertionError(
                f"a {len(cand)}-template set matches the language up to {max_n} elements"
            )
    return len(candidates)


def verify_shadow_duality(fam: PatternFamily, templates, max_n: int, cache=None):
    """Check: membership in the language iff a homomorphism into some template.

    Exhausts base structures with at most max_n elements up to isomorphism;
    returns (True, None) or (False, counterexample).
    """
    from .enumeration import structures_of_size

    templates = list(templates)
    base = fam.base_sig
    if cache is None:
        cache = {}
    lhs_memo = cache.setdefault("member", {})
    rhs_memo = cache.setdefault("tmpl", {})
    cache.setdefault("refs", []).extend([fam] + templates)
    fam_key = id(fam)
    for n in range(max_n + 1):
        for mask, a in structures_of_size(base, n):
            key = (n, mask)
            lhs = lhs_memo.get((fam_key, key))
            if lhs is None:
                lhs = fp_membership(a, fam) is not None
                lhs_memo[(fam_key, key)] = lhs
            rhs = False
            for d in templates:
                hit = rhs_memo.get((key, id(d)))
                if hit is None:
                    hit = hom_exists(a, d) is not None
                    rhs_memo[(key, id(d))] = hit
                if hit:
                    rhs = True
                    break
            if lhs != rhs:
                return False, a
    return True, None


def expand_partial_constraints(fam: PatternFamily, cap: int = EXPAND_CAP) -> PatternFamily:
    """Rewrite noncollapse pairs and free tuples into pure-mode patterns.

    Plain/injective families: a pattern with an unconstrained element pair
    splits into the collapsed quotient and the pair-constrained variant,
    until every pair is constrained; the result is the injective-mode
    family with constraints dropped.  Full families: each free tuple slot
    splits into present and absent variants.
    """
    if fam.mode_tag == "full":
        if any(p.noncollapse for p in fam.patterns):
            raise ValueError("noncollapse constraints are not expandable in full mode")
        if not any(p.free_tuples for p in fam.patterns):
            return fam
        queue = list(fam.patterns)
        done = []
        while queue:
            if len(queue) + len(done) > cap:
                raise GuardExceededError("partial-full expansion exceeds the cap")
            p = queue.pop()
            if not p.free_tuples:
                done.append(p)
                continue
            sym, t = min(p.free_tuples)
            rest = p.free_tuples - {(sym, t)}
            with_t = p.struct.with_relations({sym: p.struct.rel(sym) | {t}})
            without_t = p.struct.with_relations({sym: p.struct.rel(sym) - {t}})
            queue.append(Lift(with_t, p.lift_arity, p.cover_mode, p.noncollapse, rest))
            queue.append(Lift(without_t, p.lift_arity, p.cover_mode, p.noncollapse, rest))
        pats = _dedup_lifts(done)
        return PatternFamily(fam.sig, pats, "full", fam.lift_arity)

    if any(p.free_tuples for p in fam.patterns):
        raise ValueError("free tuples only make sense in full mode")
    if fam.mode_tag == "injective":
        # injective matching already separates every pair: constraints are
        # redundant and can simply be dropped
        pats = tuple(Lift(p.struct, p.lift_arity, p.cover_mode) for p in fam.patterns)
        return PatternFamily(fam.sig, pats, "injective", fam.lift_arity)
    if not any(p.noncollapse for p in fam.patterns):
        return fam
    queue = list(fam.patterns)
    done = []
    while queue:
        if len(queue) + len(done) > cap:
            raise GuardExceededError("partial-injective expansion exceeds the cap")
        p = queue.pop()
        n = p.struct.n
        missing = None
        for x in range(n):
            for y in range(x + 1, n):
                if (x, y) not in p.noncollapse:
                    missing = (x, y)
                    break
            if missing:
                break
        if missing is None:
            done.append(Lift(p.struct, p.lift_arity, p.cover_mode))
            continue
        x, y = missing
        queue.append(Lift(p.struct, p.lift_arity, p.cover_mode, p.noncollapse | {(x, y)}, frozenset()))
        # collapsed variant: identify y with x, constraints carried through images
        cmap = []
        for z in range(n):
            w = x if z == y else z
            cmap.append(w - 1 if w > y else w)
        q = quotient(p.struct, cmap, n - 1)
        carried = set()
        for u, v in p.noncollapse:
            cu, cv = cmap[u], cmap[v]
            if cu != cv:
                carried.add(tuple(sorted((cu, cv))))
            # a constrained pair forced together is contradictory: the
            # collapsed variant only exists because (x, y) was unconstrained,
            # so cu == cv can only happen via (x, y) itself
        queue.append(Lift(q, p.lift_arity, "none", frozenset(carried), frozenset()))
    pats = _dedup_lifts(done)
    return PatternFamily(fam.sig, pats, "injective", fam.lift_arity)


def _dedup_lifts(lifts):
    seen = {}
    for p in lifts:
        seen.setdefault(lift_canonical_form(p), p)
    return tuple(sorted(seen.values(), key=lambda p: (p.struct.n, lift_canonical_form(p))))
