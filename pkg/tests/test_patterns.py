import itertools

import pytest

from homkit.enumeration import all_structures
from homkit.homs import hom_equivalent, hom_exists
from homkit.patterns import (
    PatternFamily,
    corroborate_negative,
    decide_finite_union_csp,
    expand_partial_constraints,
    fp_membership,
    lift_occurrence,
    make_partition_lift,
    normalize_family,
    partition_power,
    union_families,
    verify_shadow_duality,
)
from homkit.structures import (
    Homomorphism,
    Lift,
    PLAIN,
    Structure,
    make_signature,
    pullback_lift,
    shadow,
)

from util import DIGRAPH, clique, dcycle, digraph, naive_homs

CSIG = make_signature([("E", 2), ("C1", 1), ("C2", 1), ("C3", 1)], lift=["C1", "C2", "C3"])
TSIG = make_signature([("E", 2), ("C", 1)], lift=["C"])
BSIG = make_signature([("E", 2), ("C1", 1), ("C2", 1)], lift=["C1", "C2"])


def mono_edge(sig, color, n_colors_sig=None):
    rels = {"E": [(0, 1)], color: [(0,), (1,)]}
    return Lift(Structure(sig, 2, rels), 1, "none")


def three_col_family():
    return PatternFamily(CSIG, tuple(mono_edge(CSIG, f"C{i}") for i in (1, 2, 3)), "plain", 1)


def two_col_family():
    return PatternFamily(BSIG, tuple(mono_edge(BSIG, f"C{i}") for i in (1, 2)), "plain", 1)


def triangle_free_family():
    tri = Lift(
        Structure(TSIG, 3, {"E": [(0, 1), (1, 2), (2, 0)], "C": [(0,), (1,), (2,)]}),
        1,
        "partition",
    )
    return PatternFamily(TSIG, (tri,), "plain", 1)


def naive_membership(a, fam):
    """Exhaust every coloring and every pattern map; no search machinery."""
    colors = fam.colors()
    slots = list(itertools.product(range(a.n), repeat=fam.lift_arity))
    for combo in itertools.product(range(len(colors)), repeat=len(slots)):
        coloring = dict(zip(slots, combo))
        witness = make_partition_lift(fam, a, coloring)
        bad = False
        for p in fam.patterns:
            maps = naive_homs(
                p.struct,
                witness.struct,
                fam.mode_tag,
                noncollapse=p.noncollapse,
                free_tuples=p.free_tuples,
            )
            if maps:
                bad = True
                break
        if not bad:
            return True
    return False


class TestMembership:
    def test_k3_has_witness_k4_does_not(self):
        fam = three_col_family()
        w = fp_membership(clique(3), fam)
        assert w is not None
        assert all(lift_occurrence(fam, p, w) is None for p in fam.patterns)
        assert fp_membership(clique(4), fam) is None

    def test_empty_family_any_witness(self):
        fam = PatternFamily(CSIG, (), "plain", 1)
        assert fp_membership(clique(4), fam) is not None

    def test_membership_agrees_with_naive(self):
        fams = [three_col_family(), two_col_family(), triangle_free_family()]
        pool = list(all_structures(DIGRAPH, 3))
        for fam in fams:
            for a in pool:
                assert (fp_membership(a, fam) is not None) == naive_membership(a, fam), (fam, a)

    def test_brute_force_3_coloring_agreement(self):
        fam = three_col_family()

        def brute(a):
            return a.n == 0 or any(
                all(c[x] != c[y] for x, y in a.rel("E"))
                for c in itertools.product(range(3), repeat=a.n)
            )

        for a in all_structures(DIGRAPH, 4):
            assert (fp_membership(a, fam) is not None) == brute(a)


class TestNormalize:
    def test_three_col_minimal_family(self):
        norm = normalize_family(three_col_family())
        assert len(norm.patterns) == 3
        assert all(p.struct.n == 2 for p in norm.patterns)

    def test_language_preserved(self):
        for fam in [three_col_family(), triangle_free_family()]:
            norm = normalize_family(fam)
            for a in all_structures(DIGRAPH, 3):
                assert (fp_membership(a, fam) is None) == (fp_membership(a, norm) is None)

    def test_rigid_pattern_family_is_fixpoint(self):
        tri = triangle_free_family()
        norm = normalize_family(tri)
        assert len(norm.patterns) == 1
        assert norm.patterns[0].struct.n == 3
        again = normalize_family(norm)
        assert [p.struct for p in again.patterns] == [p.struct for p in norm.patterns]

    def test_edge_plus_collapse_image(self):
        # a family listing a pattern and its loop image keeps only the edge
        p = mono_edge(BSIG, "C1")
        loop = Lift(Structure(BSIG, 1, {"E": [(0, 0)], "C1": [(0,)]}), 1, "none")
        fam = PatternFamily(BSIG, (p, loop), "plain", 1)
        norm = normalize_family(fam)
        assert len(norm.patterns) == 1
        assert norm.patterns[0].struct.n == 2


class TestUnion:
    def test_union_language_is_disjunction(self):
        f2, f3 = two_col_family(), None
        # build a 3-col family over BSIG? use 1-col vs 2-col over the same signature
        one_col = PatternFamily(BSIG, (mono_edge(BSIG, "C1"), mono_edge(BSIG, "C2")), "plain", 1)
        u = union_families(one_col, f2)
        for a in all_structures(DIGRAPH, 3):
            lhs = fp_membership(a, u) is not None
            rhs = (fp_membership(a, one_col) is not None) or (fp_membership(a, f2) is not None)
            assert lhs == rhs

    def test_union_with_always_false_family(self):
        f2 = two_col_family()
        never = PatternFamily(BSIG, (Lift(Structure(BSIG, 0), 1, "none"),), "plain", 1)
        for a in all_structures(DIGRAPH, 3):
            assert fp_membership(a, never) is None
        u = union_families(never, f2)
        for a in all_structures(DIGRAPH, 3):
            assert (fp_membership(a, u) is not None) == (fp_membership(a, f2) is not None)

    def test_union_idempotent_on_language(self):
        f2 = two_col_family()
        u = union_families(f2, f2)
        for a in all_structures(DIGRAPH, 3):
            assert (fp_membership(a, u) is not None) == (fp_membership(a, f2) is not None)


class TestDecide:
    def test_three_col_is_csp_of_k3(self):
        out = decide_finite_union_csp(three_col_family())
        assert out.verdict == "finite_union_csp"
        assert len(out.templates) == 1
        assert hom_equivalent(out.templates[0], clique(3))

    def test_two_col_is_csp_of_k2(self):
        out = decide_finite_union_csp(two_col_family())
        assert out.verdict == "finite_union_csp"
        assert len(out.templates) == 1
        assert hom_equivalent(out.templates[0], clique(2))

    def test_triangle_free_is_not(self):
        out = decide_finite_union_csp(triangle_free_family())
        assert out.verdict == "not_finite_union"
        assert out.witness is not None
        assert out.witness_cycle

    def test_empty_family_is_degenerate_positive(self):
        out = decide_finite_union_csp(PatternFamily(CSIG, (), "plain", 1))
        assert out.verdict == "finite_union_csp"
        assert out.templates[0].n == 1
        assert out.note

    def test_positive_verdicts_verify(self):
        for fam in [three_col_family(), two_col_family()]:
            out = decide_finite_union_csp(fam)
            ok, cex = verify_shadow_duality(fam, out.templates, 4)
            assert ok, cex


class TestShadowDuality:
    def test_three_col_vs_k3(self):
        ok, cex = verify_shadow_duality(three_col_family(), [clique(3)], 4)
        assert ok, cex

    def test_three_col_vs_k2_fails(self):
        ok, cex = verify_shadow_duality(three_col_family(), [clique(2)], 3)
        assert not ok
        # the counterexample is 3-colorable yet misses the candidate template
        assert fp_membership(cex, three_col_family()) is not None
        assert hom_exists(cex, clique(2)) is None
        # the canonical separating structure ends up detected too
        ok2, _ = verify_shadow_duality(three_col_family(), [clique(2)], 3)
        assert not ok2

    def test_triangle_free_negative_control(self):
        fam = triangle_free_family()
        # small template sweeps never produce a shadow duality
        for d in [clique(2), dcycle(3), digraph(3, [(0, 1), (0, 2), (1, 2)])]:
            ok, _ = verify_shadow_duality(fam, [d], 4)
            assert not ok, d

    def test_corroborate_negative_triangle_free(self):
        tried = corroborate_negative(triangle_free_family(), template_size=2, set_size=2, max_n=3)
        assert tried > 10

    def test_pullback_witnesses_validate(self):
        # membership witnesses produced by pulling back template homs are
        # accepted by the occurrence validator
        fam = three_col_family()
        out = decide_finite_union_csp(fam)
        duals = out.templates
        # rebuild the lifted template carrying one color per point
        from homkit.duality import forest_family_duals

        lifted_duals = forest_family_duals([p.struct for p in normalize_family(fam).patterns])
        for a in all_structures(DIGRAPH, 3):
            for d in lifted_duals:
                power = partition_power(fam.base_sig, d)
                f = hom_exists(a, power)
                if f is None:
                    continue
                # color a by the class component of the power template
                lifted_power = _power_lift(fam, d)
                g = Homomorphism(a, shadow(lifted_power), f.mapping)
                witness = pullback_lift(g, lifted_power)
                assert all(lift_occurrence(fam, p, witness) is None for p in fam.patterns)


def _power_lift(fam, dual):
    """The partition power of a lifted dual, colors retained."""
    base = partition_power(fam.base_sig, dual)
    color_names = fam.colors()
    points = []
    for x in range(dual.n):
        for name in color_names:
            if (x,) in dual.rel(name):
                points.append((x, name))
    rels = {name: base.rel(name) for name, _ in fam.base_sig.symbols}
    for name in color_names:
        rels[name] = {(i,) for i, (x, c) in enumerate(points) if c == name}
    return Lift(Structure(fam.sig, base.n, rels), 1, "partition")


class TestExpandPartial:
    def test_injective_expansion_single_pair(self):
        p = Lift(Structure(BSIG, 2, {"E": [(0, 1)], "C1": [(0,), (1,)]}), 1, "none")
        fam = PatternFamily(BSIG, (p,), "plain", 1)
        out = expand_partial_constraints(fam)
        assert out.mode_tag == "injective"
        assert len(out.patterns) == 2
        sizes = sorted(q.struct.n for q in out.patterns)
        assert sizes == [1, 2]

    def test_no_constraints_is_fixpoint(self):
        fam = two_col_family()
        assert expand_partial_constraints(fam) is fam

    def test_fully_constrained_plain_equals_injective_semantics(self):
        # marking every pair noncollapse makes plain matching injective; the
        # expansion then merely relabels the mode
        p = Lift(
            Structure(BSIG, 2, {"E": [(0, 1)], "C1": [(0,), (1,)]}),
            1,
            "none",
            noncollapse=frozenset({(0, 1)}),
        )
        fam = PatternFamily(BSIG, (p,), "plain", 1)
        out = expand_partial_constraints(fam)
        assert out.mode_tag == "injective"
        inj = PatternFamily(BSIG, (Lift(p.struct, 1, "none"),), "injective", 1)
        for a in all_structures(DIGRAPH, 3):
            assert (fp_membership(a, out) is not None) == (fp_membership(a, inj) is not None)

    def test_partial_injective_language_preserved(self):
        # one pattern with an explicit noncollapse pair
        p = Lift(
            Structure(BSIG, 2, {"E": [(0, 1)], "C1": [(0,), (1,)]}),
            1,
            "none",
            noncollapse=frozenset({(0, 1)}),
        )
        fam = PatternFamily(BSIG, (p,), "plain", 1)
        out = expand_partial_constraints(fam)
        assert out.mode_tag == "injective"
        for a in all_structures(DIGRAPH, 3):
            assert (fp_membership(a, fam) is not None) == (
                fp_membership(a, out) is not None
            ), a

    def test_full_mode_uncolored_pattern_is_vacuous(self):
        # fullness reflects lift relations: an uncolored element can never
        # match inside a partition lift, so the pattern constrains nothing
        p = Lift(Structure(BSIG, 1, {"E": [(0, 0)]}), 1, "none")
        fam = PatternFamily(BSIG, (p,), "full", 1)
        for a in all_structures(DIGRAPH, 3):
            got = fp_membership(a, fam)
            assert got is not None
            assert naive_membership(a, fam)
            assert all(lift_occurrence(fam, q, got) is None for q in fam.patterns)

    def test_full_expansion_free_tuple(self):
        p = Lift(
            Structure(BSIG, 1, {"C1": [(0,)]}),
            1,
            "none",
            free_tuples=frozenset({("E", (0, 0))}),
        )
        fam = PatternFamily(BSIG, (p,), "full", 1)
        out = expand_partial_constraints(fam)
        assert len(out.patterns) == 2
        assert not any(q.free_tuples for q in out.patterns)
        for a in all_structures(DIGRAPH, 3):
            assert (fp_membership(a, fam) is not None) == (fp_membership(a, out) is not None)
