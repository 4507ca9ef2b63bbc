import itertools
from fractions import Fraction as F

import pytest

from koszulq.quadalg import opposite, presentation_exterior, presentation_symmetric, quadratic_dual
from koszulq.starprod import (
    AdmissibleGraph,
    StarProduct,
    UnsupportedOrder,
    WeightAssignment,
    WeightSolveError,
    diagonal_bivector,
    enumerate_graphs,
    evaluate_graph,
    presentation_from_star,
    solve_weights,
)
from koszulq.superpoly import Bivector, SuperPolynomial, is_poisson, schouten
from koszulq.trunc import TruncSeries


def x(n, i):
    return SuperPolynomial.x(n, i)


def xi(n, i):
    return SuperPolynomial.xi(n, i)


@pytest.fixture(scope="module")
def solved():
    tests = [diagonal_bivector(2, {(0, 1): F(1)}), diagonal_bivector(2, {(0, 1): F(-2)})]
    return solve_weights(tests, deg_cutoff=2)


class TestEnumerateGraphs:
    def test_k0(self):
        gs = enumerate_graphs(0)
        assert len(gs) == 1 and gs[0].encode() == "k0:"

    def test_k1_no_loops(self):
        gs = enumerate_graphs(1, include_loops=False)
        assert [g.encode() for g in gs] == ["k1:v1->(L,R)", "k1:v1->(R,L)"]

    def test_counts_with_loops_frozen(self):
        # regression values from the exhaustive enumerator
        assert len(enumerate_graphs(1)) == 6
        assert len(enumerate_graphs(2)) == 78
        assert len(enumerate_graphs(2, include_loops=False)) == 21

    def test_isomorphism_dedup(self):
        a = AdmissibleGraph(2, [("L", "R"), ("R", "L")])
        b = AdmissibleGraph(2, [("R", "L"), ("L", "R")])
        assert a == b

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedOrder):
            enumerate_graphs(3)

    def test_distinct_targets_enforced(self):
        with pytest.raises(ValueError):
            AdmissibleGraph(1, [("L", "L")])

    def test_encode_decode_roundtrip(self):
        for g in enumerate_graphs(2):
            assert AdmissibleGraph.decode(g.encode()) == g


class TestEvaluateGraph:
    def test_empty_graph_is_product(self):
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        g = AdmissibleGraph(0, [])
        assert evaluate_graph(g, alpha, x(2, 0), x(2, 1)) == x(2, 0) * x(2, 1)

    def test_wedge_contraction(self):
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        g = AdmissibleGraph(1, [("L", "R")])
        assert evaluate_graph(g, alpha, x(2, 0), x(2, 1)) == x(2, 0) * x(2, 1)
        assert evaluate_graph(g, alpha, x(2, 1), x(2, 0)) == -(x(2, 0) * x(2, 1))

    def test_loop_graph_regression(self):
        # contraction alpha^{ab} d_b alpha with the ledger's loop convention
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        g = AdmissibleGraph(1, [(0, "L")])
        assert evaluate_graph(g, alpha, x(2, 0), SuperPolynomial.one(2)) == -x(2, 0)

    def test_odd_values_symmetric(self):
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        g = AdmissibleGraph(1, [("L", "R")])
        v01 = evaluate_graph(g, alpha, xi(2, 0), xi(2, 1), odd=True)
        v10 = evaluate_graph(g, alpha, xi(2, 1), xi(2, 0), odd=True)
        assert v01 == v10 == xi(2, 0) * xi(2, 1)

    def test_generator_mismatch(self):
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        with pytest.raises(ValueError):
            evaluate_graph(AdmissibleGraph(0, []), alpha, x(3, 0), x(3, 1))


class TestSolveWeights:
    def test_zero_bivector_all_constraints_vacuous(self):
        w, rep = solve_weights([Bivector(SuperPolynomial.zero(2))], deg_cutoff=2)
        assert all(k.startswith("k1") for k in w.to_json())
        assert rep["solution_space_dim"] == rep["order2_unknowns"]

    def test_solution_exists_and_frozen_values(self, solved):
        w, rep = solved
        j = w.to_json()
        assert j["k1:v1->(L,R)"] == "1/2"
        assert j["k1:v1->(R,L)"] == "-1/2"
        assert j["k2:v1->(L,R);v2->(L,R)"] == "1/2"
        assert j["k2:v1->(L,R);v2->(L,v1)"] == "1/3"
        assert j["k2:v1->(L,R);v2->(R,v1)"] == "-1/3"
        assert rep["solution_space_dim"] > 0  # gauge freedom is real

    def test_defect_nonzero_before_solving(self):
        # with all k=2 weights zero the h^2 associativity defect is nonzero
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        w = WeightAssignment(WeightAssignment.k1_normalized())
        sp = StarProduct(alpha, w, 2)
        f, g, h = x(2, 0), x(2, 0), x(2, 1)
        defect = sp.star(sp.star(f, g), h) - sp.star(f, sp.star(g, h))
        assert defect

    def test_non_poisson_rejected(self):
        bad = Bivector(SuperPolynomial.monomial(2, (2, 0), (0, 1)) + SuperPolynomial.monomial(2, (0, 2), (0, 1)))
        if is_poisson(bad):
            pytest.skip("example unexpectedly Poisson")
        with pytest.raises(WeightSolveError):
            solve_weights([bad])

    def test_loops_forced_zero_also_solvable(self):
        tests = [diagonal_bivector(2, {(0, 1): F(1)})]
        w, rep = solve_weights(tests, deg_cutoff=2, restrict_loops_to_zero=True)
        assert all(not AdmissibleGraph.decode(k).has_loop() for k in w.to_json())


class TestStarProduct:
    def test_unitality(self, solved):
        w, _ = solved
        alpha = diagonal_bivector(2, {(0, 1): F(2)})
        one = SuperPolynomial.one(2)
        for odd in (False, True):
            sp = StarProduct(alpha, w, 2, odd=odd)
            args = [xi(2, 0) * xi(2, 1), xi(2, 0)] if odd else [x(2, 0) * x(2, 1), x(2, 1)]
            for f in args:
                assert sp.star(sp._embed(one), f) == sp._embed(f)
                assert sp.star(f, sp._embed(one)) == sp._embed(f)

    def test_grading_preserved(self, solved):
        w, _ = solved
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        sp = StarProduct(alpha, w, 2)
        prod = sp.star(x(2, 0) * x(2, 0), x(2, 1))
        assert {sum(xe) for (xe, _) in prod.terms} == {3}

    def test_diagonal_first_order(self, solved):
        w, _ = solved
        lam = F(3)
        sp = StarProduct(diagonal_bivector(2, {(0, 1): lam}), w, 2)
        prod = sp.star(x(2, 0), x(2, 1))
        coeff = prod.terms[((1, 1), ())]
        assert coeff.coeffs[0] == 1
        assert coeff.coeffs[1] == lam

    def test_first_order_commutator_is_twice_hkr(self, solved):
        w, _ = solved
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        sp = StarProduct(alpha, w, 2)
        f, g = x(2, 0) * x(2, 1), x(2, 1)
        comm = sp.star(f, g) - sp.star(g, f)
        # hkr(alpha)(f,g) = sum alpha^{ab} d_a f d_b g
        hkr_val = SuperPolynomial.zero(2)
        for a in range(2):
            for b in range(2):
                t = alpha.poly.partial_xi(a).partial_xi(b)
                if t:
                    hkr_val = hkr_val + t * f.partial_x(a) * g.partial_x(b)
        expected = sp._embed(hkr_val).scale(TruncSeries.hbar(2) * 2)
        diff = comm - expected
        assert all(c.coeffs[1] == 0 for c in diff.terms.values())

    def test_associativity_held_out(self, solved):
        w, _ = solved
        a3 = diagonal_bivector(3, {(0, 1): F(1), (0, 2): F(2), (1, 2): F(-1)})
        assert is_poisson(a3)
        nondiag = Bivector(
            SuperPolynomial.monomial(3, (1, 1, 0), (0, 1)) + SuperPolynomial.monomial(3, (1, 0, 1), (0, 2))
        )
        assert is_poisson(nondiag)
        for alpha in (a3, nondiag):
            for odd in (False, True):
                sp = StarProduct(alpha, w, 2, odd=odd)
                if odd:
                    args = [xi(3, 0), xi(3, 1), xi(3, 2), xi(3, 0) * xi(3, 1)]
                else:
                    args = [x(3, 0), x(3, 1), x(3, 2), x(3, 0) * x(3, 2)]
                for f, g, h in itertools.islice(itertools.product(args, repeat=3), 30):
                    assert not (sp.star(sp.star(f, g), h) - sp.star(f, sp.star(g, h)))


class TestPresentationFromStar:
    def test_zero_bivector_classical(self):
        w = WeightAssignment(WeightAssignment.k1_normalized())
        zero = Bivector(SuperPolynomial.zero(2))
        pS = presentation_from_star(StarProduct(zero, w, 2))
        pL = presentation_from_star(StarProduct(zero, w, 2, odd=True))
        assert pS.relations_same_module(presentation_symmetric(2, ring_order=2))
        assert pL.relations_same_module(presentation_exterior(2, ring_order=2))

    def test_diagonal_quantum_plane(self, solved):
        w, _ = solved
        lam = F(3)
        sp = StarProduct(diagonal_bivector(2, {(0, 1): lam}), w, 2)
        p = presentation_from_star(sp)
        assert len(p.relations) == 1
        # single relation x0 (x) x1 - q(h) x1 (x) x0 with q = 1 + 2*lam*h + ...
        (rel,) = p.relations
        c01, c10 = rel.get(1), rel.get(2)
        q = -c10 / c01 if c01 and c01.is_unit() else -c01 / c10
        assert q.coeffs[0] == 1
        assert abs(q.coeffs[1]) == 2 * lam

    def test_relation_counts(self, solved):
        w, _ = solved
        alpha = diagonal_bivector(3, {(0, 1): F(1), (0, 2): F(2), (1, 2): F(-1)})
        pS = presentation_from_star(StarProduct(alpha, w, 2))
        pL = presentation_from_star(StarProduct(alpha, w, 2, odd=True))
        assert len(pS.relations) == 3  # g(g-1)/2
        assert len(pL.relations) == 6  # g(g+1)/2

    def test_end_to_end_duality_strict(self, solved):
        w, _ = solved
        for alpha in (
            diagonal_bivector(2, {(0, 1): F(3)}),
            diagonal_bivector(3, {(0, 1): F(1), (0, 2): F(2), (1, 2): F(-1)}),
        ):
            pS = presentation_from_star(StarProduct(alpha, w, 2))
            pL = presentation_from_star(StarProduct(alpha, w, 2, odd=True))
            assert quadratic_dual(pS).relations_same_module(opposite(pL))

    def test_non_quadratic_rejected(self, solved):
        w, _ = solved
        cubic = Bivector(SuperPolynomial.monomial(2, (2, 1), (0, 1)))
        with pytest.raises(ValueError):
            presentation_from_star(StarProduct(cubic, w, 2))


def test_weight_serialization_roundtrip(solved):
    w, _ = solved
    w2 = WeightAssignment.from_json(w.to_json())
    assert w2.weights == w.weights
