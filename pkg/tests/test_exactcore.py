import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from koszulq import linalg
from koszulq.linalg import SparseMatrix, kernel_basis, rank, solve_linear, vec_from_list, vec_to_list
from koszulq.trunc import (
    NotASummand,
    TruncSeries,
    free_basis_from_spanning,
    module_contains,
    submodule_equal,
    trunc_kernel,
    trunc_solve,
)


def dense(rows):
    return SparseMatrix.from_dense(rows)


class TestKernelBasis:
    def test_zero_map_1x1(self):
        assert kernel_basis(dense([[0]])) == [{0: F(1)}]

    def test_identity_2x2(self):
        assert kernel_basis(dense([[1, 0], [0, 1]])) == []

    def test_rank_one(self):
        # hand Gaussian elimination: x1 + x2 = 0
        assert kernel_basis(dense([[1, 1], [2, 2]])) == [{0: F(1), 1: F(-1)}]

    def test_vectors_lie_in_kernel(self):
        rng = random.Random(0)
        for _ in range(30):
            r, c = rng.randint(1, 5), rng.randint(1, 5)
            m = dense([[rng.randint(-3, 3) for _ in range(c)] for _ in range(r)])
            for v in kernel_basis(m):
                assert not m.apply(v)


class TestSolveLinear:
    def test_identity(self):
        m = dense([[1, 0], [0, 1]])
        assert solve_linear(m, vec_from_list([3, -2])) == {0: F(3), 1: F(-2)}

    def test_underdetermined_pivot_rule(self):
        # free variable set to 0 -> (5, 0)
        assert solve_linear(dense([[1, 1]]), vec_from_list([5])) == {0: F(5)}

    def test_inconsistent(self):
        assert solve_linear(dense([[1], [1]]), vec_from_list([1, 2])) is None

    def test_solution_is_exact(self):
        rng = random.Random(1)
        for _ in range(40):
            r, c = rng.randint(1, 5), rng.randint(1, 5)
            m = dense([[rng.randint(-3, 3) for _ in range(c)] for _ in range(r)])
            x = vec_from_list([rng.randint(-3, 3) for _ in range(c)])
            rhs = m.apply(x)
            sol = solve_linear(m, rhs)
            assert sol is not None
            assert m.apply(sol) == rhs


@given(st.lists(st.lists(st.integers(-4, 4), min_size=1, max_size=4), min_size=1, max_size=4).filter(lambda rs: len({len(r) for r in rs}) == 1))
@settings(max_examples=150, deadline=None)
def test_rank_nullity(rows):
    m = dense(rows)
    assert rank(m) + len(kernel_basis(m)) == m.cols


def ts(coeffs, order=2):
    return TruncSeries(coeffs, order)


class TestTruncSeries:
    def test_ring_ops(self):
        a, b = ts([1, 2, 0]), ts([0, 1, 3])
        assert (a * b).coeffs == (F(0), F(1), F(5))
        assert (a + b).coeffs == (F(1), F(3), F(3))

    def test_unit_inverse(self):
        a = ts([2, 1, -1])
        assert (a * a.inverse()) == TruncSeries.const(1, 2)

    def test_non_unit(self):
        with pytest.raises(ZeroDivisionError):
            ts([0, 1, 0]).inverse()


class TestTruncKernel:
    def test_hbar_kernel(self):
        # N=1: kernel of [h] is the module generated by h
        ker = trunc_kernel(1, 1, {(0, 0): TruncSeries.hbar(1)}, order=1)
        assert ker
        assert submodule_equal(ker, [{0: TruncSeries.hbar(1)}], 1, 1)

    def test_unit_entry_injective(self):
        assert trunc_kernel(1, 1, {(0, 0): ts([1, 1, 0])}, order=2) == []

    def test_block_expansion_example(self):
        # N=1, [[1,-1],[h,-h]] -> kernel spanned by (1,1)
        one = TruncSeries.const(1, 1)
        h = TruncSeries.hbar(1)
        ker = trunc_kernel(2, 2, {(0, 0): one, (0, 1): -one, (1, 0): h, (1, 1): -h}, order=1)
        assert submodule_equal(ker, [{0: one, 1: one}], 2, 1)

    def test_kernel_at_order_zero_matches_rational(self):
        rng = random.Random(3)
        for _ in range(20):
            r, c = rng.randint(1, 4), rng.randint(1, 4)
            rows = [[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)]
            qk = kernel_basis(dense(rows))
            entries = {(i, j): TruncSeries.const(x, 0) for i, row in enumerate(rows) for j, x in enumerate(row) if x}
            tk = trunc_kernel(r, c, entries, order=0)
            qspan = [vec_to_list(v, c) for v in qk]
            tspan = [[x.at_zero() if i in v else F(0) for i, x in ((j, v.get(j, TruncSeries.const(0, 0))) for j in range(c))] for v in tk]
            assert linalg.same_row_space([vec_from_list(v) for v in qspan], [vec_from_list(v) for v in tspan])


class TestSubmoduleEqual:
    def test_reflexive(self):
        one = TruncSeries.const(1, 1)
        assert submodule_equal([{0: one}], [{0: one}], 2, 1)

    def test_hbar_mismatch(self):
        one = TruncSeries.const(1, 1)
        h = TruncSeries.hbar(1)
        assert not submodule_equal([{0: one, 1: h}], [{0: one}], 2, 1)

    def test_unit_rescaling(self):
        two = TruncSeries.const(2, 1)
        one = TruncSeries.const(1, 1)
        assert submodule_equal([{0: two}, {1: two}], [{0: one}, {1: one}], 2, 1)

    def test_equivalence_on_random_families(self):
        rng = random.Random(9)
        fams = []
        for _ in range(6):
            gens = []
            for _ in range(rng.randint(1, 2)):
                gens.append({i: TruncSeries([rng.randint(-2, 2) for _ in range(2)], 1) for i in range(3)})
            fams.append(gens)
        for a in fams:
            assert submodule_equal(a, a, 3, 1)
            for b in fams:
                assert submodule_equal(a, b, 3, 1) == submodule_equal(b, a, 3, 1)
        for a in fams:
            for b in fams:
                for c in fams:
                    if submodule_equal(a, b, 3, 1) and submodule_equal(b, c, 3, 1):
                        assert submodule_equal(a, c, 3, 1)


class TestFreeBasis:
    def test_summand_basis(self):
        one = TruncSeries.const(1, 2)
        h = TruncSeries.hbar(2)
        gens = [{0: one, 1: h}, {0: h, 1: h * h}]  # second = h * first
        basis = free_basis_from_spanning(gens, 2, 2)
        assert len(basis) == 1

    def test_torsion_detected(self):
        h = TruncSeries.hbar(2)
        with pytest.raises(NotASummand):
            free_basis_from_spanning([{0: h}], 1, 2)


def test_trunc_solve_roundtrip():
    rng = random.Random(4)
    for _ in range(15):
        r, c, N = rng.randint(1, 3), rng.randint(1, 3), 2
        entries = {}
        for i in range(r):
            for j in range(c):
                tsv = TruncSeries([rng.randint(-2, 2) for _ in range(N + 1)], N)
                if tsv:
                    entries[(i, j)] = tsv
        x = {j: TruncSeries([rng.randint(-2, 2) for _ in range(N + 1)], N) for j in range(c)}
        rhs = {}
        for (i, j), a in entries.items():
            if j in x:
                cur = rhs.get(i, TruncSeries.const(0, N))
                rhs[i] = cur + a * x[j]
        rhs = {i: v for i, v in rhs.items() if v}
        sol = trunc_solve(r, c, entries, rhs, N)
        assert sol is not None
        back = {}
        for (i, j), a in entries.items():
            if j in sol:
                cur = back.get(i, TruncSeries.const(0, N))
                back[i] = cur + a * sol[j]
        back = {i: v for i, v in back.items() if v}
        assert back == rhs
