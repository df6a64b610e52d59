import math

import pytest

from homkit.enumeration import all_structures
from homkit.homs import check_homomorphism, hom_exists
from homkit.shape import girth
from homkit.sparse import AttemptsExhaustedError, SparseParams, sparse_replace, verify_sparse
from homkit.structures import PLAIN, Homomorphism

from util import DIGRAPH, clique, dcycle, digraph, dpath, loop_vertex


class TestVerify:
    def test_c9_replaces_k3(self):
        ok, cex = verify_sparse(clique(3), dcycle(9), 2, 4)
        assert ok, cex

    def test_c4_fails_k3(self):
        ok, cex = verify_sparse(clique(3), dcycle(4), 2, 4)
        assert not ok
        clause, witness = cex
        assert clause == "small_targets"
        assert witness.n == 2  # the symmetric edge separates them

    def test_identity_always_verifies(self):
        for a in [clique(3), dpath(2), loop_vertex()]:
            g = girth(a)
            ell = 2 if g == math.inf else min(int(g), 4)
            ok, _ = verify_sparse(a, a, 2, ell)
            assert ok


class TestReplace:
    def test_acceptance_case_k3(self):
        b = sparse_replace(clique(3), SparseParams(target_size=2, min_girth=4, seed=0))
        ok, cex = verify_sparse(clique(3), b, 2, 4)
        assert ok, cex

    def test_already_sparse_is_identity(self):
        a = dpath(3)
        assert sparse_replace(a, SparseParams(2, 4, seed=0)) == a

    def test_loop_vertex_gets_loop_free_cover(self):
        b = sparse_replace(loop_vertex(), SparseParams(1, 2, seed=0))
        assert girth(b) >= 2
        ok, cex = verify_sparse(loop_vertex(), b, 1, 2)
        assert ok, cex

    def test_deterministic_in_seed(self):
        p = SparseParams(target_size=2, min_girth=4, seed=7)
        assert sparse_replace(clique(3), p) == sparse_replace(clique(3), p)
        p2 = SparseParams(target_size=2, min_girth=4, seed=8)
        # different seed may give a different (still certified) structure
        b2 = sparse_replace(clique(3), p2)
        assert verify_sparse(clique(3), b2, 2, 4)[0]

    def test_projection_certificate(self):
        b = sparse_replace(clique(3), SparseParams(2, 4, seed=0))
        n_fiber = b.n // 3
        proj = Homomorphism(b, clique(3), tuple(x // n_fiber for x in range(b.n)), PLAIN)
        ok, why = check_homomorphism(proj)
        assert ok, why

    def test_easy_direction_composes(self):
        # a -> c implies b -> c through the projection
        a = clique(3)
        b = sparse_replace(a, SparseParams(2, 4, seed=0))
        for c in all_structures(DIGRAPH, 2):
            if hom_exists(a, c) is not None:
                assert hom_exists(b, c) is not None

    def test_attempts_exhausted_reports(self):
        with pytest.raises(AttemptsExhaustedError) as exc:
            sparse_replace(
                clique(3),
                SparseParams(target_size=2, min_girth=4, seed=0, max_attempts=1, density=0.01),
            )
        assert exc.value.failures
