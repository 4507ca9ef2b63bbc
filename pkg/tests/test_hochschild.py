import itertools
import random
from fractions import Fraction as F

import pytest

from koszulq.hochschild import (
    CutoffError,
    ExtCarrier,
    GradedCochain,
    PolyCarrier,
    brace,
    constant_cochain,
    cup,
    from_value_fn,
    gerstenhaber_bracket,
    hkr,
    hkr_dual,
    hkr_normalized,
    hoch_differential,
    identity_cochain,
    is_coboundary,
    maurer_cartan_check,
    multiplication_cochain,
)
from koszulq.starprod import StarProduct, WeightAssignment, diagonal_bivector, mc_cochain, solve_weights
from koszulq.superpoly import SuperPolynomial, schouten


def xs(n, i):
    return SuperPolynomial.x(n, i)


def xis(n, i):
    return SuperPolynomial.xi(n, i)


def rand_cochain(rng, carrier, p, shift, cutoff, density=3):
    comps = {}
    for total in range(cutoff + 1):
        for degs in itertools.product(range(total + 1), repeat=p):
            if sum(degs) != total or total + shift < 0:
                continue
            dims = [carrier.dim(d) for d in degs]
            rows = carrier.dim(total + shift)
            if rows == 0 or any(d == 0 for d in dims):
                continue
            cols = 1
            for d in dims:
                cols *= d
            m = {}
            for _ in range(density):
                r, c = rng.randrange(rows), rng.randrange(cols)
                v = rng.randint(-2, 2)
                if v:
                    m[(r, c)] = m.get((r, c), F(0)) + v
            m = {k: v for k, v in m.items() if v}
            if m:
                comps[degs] = m
    return GradedCochain(carrier, p, shift, cutoff, comps)


def total_deg(c):
    return c.arity + c.carrier.coh_shift_of(c.inner_shift)


@pytest.fixture(scope="module")
def carriers():
    return PolyCarrier(2), ExtCarrier(2)


class TestDifferential:
    def test_d_of_identity_is_multiplication(self, carriers):
        pc, _ = carriers
        assert hoch_differential(identity_cochain(pc, 4)) == multiplication_cochain(pc, 4)

    def test_hkr_cocycle(self):
        gamma = xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1)
        assert hoch_differential(hkr(gamma, 4)).is_zero()

    def test_d_squared_zero(self, carriers):
        rng = random.Random(7)
        for carrier in carriers:
            for p, s in ((0, 1), (1, 0), (1, 1), (2, -1), (2, 0)):
                c = rand_cochain(rng, carrier, p, s, 3)
                assert hoch_differential(hoch_differential(c)).is_zero()

    def test_cutoff_error(self):
        pc = PolyCarrier(2)
        c = identity_cochain(pc, 3)
        with pytest.raises(CutoffError):
            c.component((5,))


class TestCup:
    def test_unit(self):
        pc = PolyCarrier(2)
        one = constant_cochain(pc, SuperPolynomial.one(2), 4)
        b = hkr(xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1), 4)
        assert cup(one, b) == b
        assert cup(b, one) == b

    def test_values_p1(self):
        # cup of two p=1 cochains on (x0, x1) is the product of values:
        # hkr(xi0)(x0) * hkr(xi1)(x1) = 1 * 1, landing in degree 0
        h0, h1 = hkr(xis(2, 0), 4), hkr(xis(2, 1), 4)
        c = cup(h0, h1)
        assert c.inner_shift == -2
        mat = c.component((1, 1))
        col = 0 * 2 + 1  # (x0, x1) in the degree-1 basis [x0, x1]
        assert mat == {(0, col): 1}

    def test_associative(self, carriers):
        pc, ec = carriers
        h0, h1 = hkr(xis(2, 0), 4), hkr(xis(2, 1), 4)
        b = hkr(xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1), 4)
        assert cup(cup(h0, h1), b) == cup(h0, cup(h1, b))
        g1 = hkr_dual(xs(2, 0) * xis(2, 0) * xis(2, 1), 3)
        g2 = hkr_dual(xs(2, 1) * xis(2, 0), 3)
        g3 = hkr_dual(xs(2, 0) * xs(2, 1) * xis(2, 1), 3)
        assert cup(cup(g1, g2), g3) == cup(g1, cup(g2, g3))

    def test_commutative_up_to_coboundary(self):
        h0 = hkr(xis(2, 0), 4)
        b = hkr(xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1), 4)
        for f, g in ((h0, b), (b, b)):
            s = -1 if (total_deg(f) * total_deg(g)) % 2 else 1
            cc = cup(f, g) - cup(g, f).scale(s)
            assert is_coboundary(cc) is not None

    def test_hkr_normalized_multiplicative_up_to_coboundary(self):
        f1 = xis(2, 0) * xs(2, 0)
        f2 = xis(2, 1) * xs(2, 1)
        d = cup(hkr_normalized(f1, 4), hkr_normalized(f2, 4)) - hkr_normalized(f1 * f2, 4)
        assert is_coboundary(d) is not None

    def test_d_is_derivation_of_cup(self):
        # frozen Leibniz signs: d(f u g) = (-1)^(|g|) df u g + (-1)^(t_f) f u dg
        rng = random.Random(11)
        for carrier in (PolyCarrier(2), ExtCarrier(2)):
            for _ in range(5):
                f = rand_cochain(rng, carrier, rng.choice([1, 2]), rng.choice([0, 1]), 3, density=2)
                g = rand_cochain(rng, carrier, rng.choice([1, 2]), rng.choice([0, 1]), 3, density=2)
                tf = carrier.coh_shift_of(f.inner_shift)
                lhs = hoch_differential(cup(f, g))
                rhs = cup(hoch_differential(f), g).scale(-1 if total_deg(g) % 2 else 1) + cup(
                    f, hoch_differential(g)
                ).scale(-1 if tf % 2 else 1)
                assert lhs == rhs


class TestBraces:
    def test_single_insertion_is_composition(self):
        pc = PolyCarrier(2)
        idc = identity_cochain(pc, 4)
        g = hkr(xis(2, 0) * xs(2, 1), 4)
        assert brace(idc, [g]) == g
        assert brace(g, [idc]) == g

    def test_two_slot_insertion_expansion(self):
        # f{g} for arity(f)=2, arity(g)=1: f(g(a),b) + sign f(a,g(b))
        pc = PolyCarrier(2)
        mu = multiplication_cochain(pc, 4)
        g = hkr(xis(2, 0), 4)  # derivation d/dx0
        fg = brace(mu, [g])
        # on (x0, x0): d0(x0)*x0 + x0*d0(x0) = 2 x0
        mat = fg.component((1, 1))
        # basis deg1: [x0, x1]; column (x0,x0) = 0
        assert mat.get((0, 0)) == 2

    def test_arity_guard(self):
        pc = PolyCarrier(2)
        g = hkr(xis(2, 0), 4)
        with pytest.raises(ValueError):
            brace(constant_cochain(pc, SuperPolynomial.one(2), 4), [g])

    def test_pre_jacobi_symmetry(self, carriers):
        # (f{g}){h} - f{g{h}} is (anti)symmetric in g,h with brace signs
        rng = random.Random(13)
        for carrier in carriers:
            for _ in range(3):
                f = rand_cochain(rng, carrier, 2, 0, 3, density=2)
                g = rand_cochain(rng, carrier, 1, rng.choice([0, 1]), 3, density=2)
                h = rand_cochain(rng, carrier, 1, 0, 3, density=2)
                lhs = brace(brace(f, [g]), [h]) - brace(f, [brace(g, [h])])
                rhs = brace(brace(f, [h]), [g]) - brace(f, [brace(h, [g])])
                s = -1 if (g.norm_deg * h.norm_deg) % 2 else 1
                assert lhs == rhs.scale(s)


class TestGerstenhaber:
    def test_bracket_with_mu_is_differential(self):
        rng = random.Random(17)
        pc = PolyCarrier(2)
        mu = multiplication_cochain(pc, 3)
        for _ in range(3):
            c = rand_cochain(rng, pc, rng.choice([1, 2]), 0, 3, density=2)
            assert gerstenhaber_bracket(mu, c) == hoch_differential(c)

    def test_hkr_intertwines_brackets_up_to_coboundary(self):
        n = 2
        pairs = [
            (xis(n, 0) * xis(n, 1) * xs(n, 0), xis(n, 0) * xs(n, 1) * xs(n, 1)),
            (xis(n, 0) * xis(n, 1) * xs(n, 0) * xs(n, 1), xis(n, 0) * xs(n, 0)),
            (xis(n, 0) * xs(n, 1), xis(n, 1) * xs(n, 0) * xs(n, 0)),
        ]
        for g1, g2 in pairs:
            br = schouten(g1, g2)
            c = gerstenhaber_bracket(hkr(g1, 4), hkr(g2, 4))
            if br:
                c = c - hkr(br, 4)
            w = is_coboundary(c)
            assert w is not None
            assert hoch_differential(w) == c

    def test_self_bracket_odd(self):
        b = hkr(xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1), 4)
        assert b.norm_deg % 2 == 1
        assert gerstenhaber_bracket(b, b) == brace(b, [b]).scale(2)

    def test_graded_jacobi(self, carriers):
        rng = random.Random(19)
        for carrier in carriers:
            for _ in range(4):
                a = rand_cochain(rng, carrier, rng.choice([1, 2]), rng.choice([-1, 0, 1]), 3, density=2)
                b = rand_cochain(rng, carrier, rng.choice([1, 2]), rng.choice([-1, 0, 1]), 3, density=2)
                c = rand_cochain(rng, carrier, rng.choice([1, 2]), rng.choice([-1, 0, 1]), 3, density=2)

                def s(x, y):
                    return -1 if (x * y) % 2 else 1

                j = (
                    gerstenhaber_bracket(gerstenhaber_bracket(a, b), c).scale(s(a.norm_deg, c.norm_deg))
                    + gerstenhaber_bracket(gerstenhaber_bracket(b, c), a).scale(s(b.norm_deg, a.norm_deg))
                    + gerstenhaber_bracket(gerstenhaber_bracket(c, a), b).scale(s(c.norm_deg, b.norm_deg))
                )
                assert j.is_zero()


class TestIsCoboundary:
    def test_zero(self):
        pc = PolyCarrier(2)
        z = GradedCochain(pc, 2, 0, 3, {})
        w = is_coboundary(z)
        assert w is not None and w.is_zero()

    def test_multiplication_witnessed_by_identity(self):
        pc = PolyCarrier(2)
        mu = multiplication_cochain(pc, 3)
        w = is_coboundary(mu)
        assert w is not None
        assert hoch_differential(w) == mu

    def test_not_closed_rejected(self):
        rng = random.Random(23)
        pc = PolyCarrier(2)
        c = rand_cochain(rng, pc, 1, 0, 3)
        if hoch_differential(c).is_zero():
            pytest.skip("random cochain accidentally closed")
        with pytest.raises(ValueError):
            is_coboundary(c)

    def test_nontrivial_class_refused(self):
        # hkr of a bivector is closed but not exact
        b = hkr(xs(2, 0) * xs(2, 1) * xis(2, 0) * xis(2, 1), 4)
        assert is_coboundary(b) is None


class TestMaurerCartan:
    @pytest.fixture(scope="class")
    def weights(self):
        tests = [diagonal_bivector(2, {(0, 1): F(1)}), diagonal_bivector(2, {(0, 1): F(-2)})]
        return solve_weights(tests, deg_cutoff=2)[0]

    def test_zero_is_mc(self):
        pc = PolyCarrier(2, 2)
        assert maurer_cartan_check(GradedCochain(pc, 2, 0, 3, {}))

    def test_star_minus_mu_is_mc(self, weights):
        alpha = diagonal_bivector(2, {(0, 1): F(3)})
        for odd in (False, True):
            sp = StarProduct(alpha, weights, 2, odd=odd)
            assert maurer_cartan_check(mc_cochain(sp, 2 if odd else 4))

    def test_first_order_only_fails(self):
        # h*hkr(alpha) with no h^2 correction violates MC at order 2
        alpha = diagonal_bivector(2, {(0, 1): F(1)})
        w1 = WeightAssignment(WeightAssignment.k1_normalized())
        sp = StarProduct(alpha, w1, 2)
        assert not maurer_cartan_check(mc_cochain(sp, 4))

    def test_nonvanishing_at_zero_rejected(self):
        pc = PolyCarrier(2, 1)
        mu = multiplication_cochain(pc, 2)
        with pytest.raises(ValueError):
            maurer_cartan_check(mu)
