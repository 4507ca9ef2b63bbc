"""Super-polynomial calculus: even generators x_i, odd generators xi_i.

Monomials are stored as (x-exponent tuple, strictly increasing xi index
tuple); coefficients are rationals or TruncSeries.  Polyvector fields on
V live here as polynomials in x (coordinates) and xi (odd directions,
xi_i standing for d/dx_i); the same algebra also houses Lambda(V) (pure
xi polynomials) and the coefficient data of bivectors on the dual side.

Index convention: generators are 0-based throughout the code base.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .linalg import QQ
from .trunc import TruncSeries, format_coeff, parse_coeff

Monomial = Tuple[Tuple[int, ...], Tuple[int, ...]]


class GeneratorMismatch(ValueError):
    """Operands live over different generator sets."""


def _merge_sign(J: Tuple[int, ...], K: Tuple[int, ...]) -> int:
    """Koszul sign for sorting the concatenation of two increasing tuples."""
    inv = 0
    for j in J:
        for k in K:
            if j > k:
                inv += 1
    return -1 if inv % 2 else 1


def _merge(J: Tuple[int, ...], K: Tuple[int, ...]) -> Optional[Tuple[int, int]]:
    if set(J) & set(K):
        return None
    return _merge_sign(J, K), tuple(sorted(J + K))


class SuperPolynomial:
    """Exact polynomial in n even and n odd generators."""

    __slots__ = ("n", "terms", "ring_order")

    def __init__(self, n: int, terms: Optional[Dict[Monomial, object]] = None, ring_order: Optional[int] = None):
        self.n = n
        self.ring_order = ring_order
        self.terms: Dict[Monomial, object] = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    self.terms[mono] = c

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n: int, ring_order: Optional[int] = None) -> "SuperPolynomial":
        return cls(n, {}, ring_order)

    @classmethod
    def one(cls, n: int, ring_order: Optional[int] = None) -> "SuperPolynomial":
        return cls.scalar(n, 1, ring_order)

    @classmethod
    def scalar(cls, n: int, c, ring_order: Optional[int] = None) -> "SuperPolynomial":
        coeff = parse_coeff(c, ring_order) if not isinstance(c, TruncSeries) else c
        mono = (tuple([0] * n), ())
        return cls(n, {mono: coeff}, ring_order)

    @classmethod
    def x(cls, n: int, i: int, ring_order: Optional[int] = None) -> "SuperPolynomial":
        e = [0] * n
        e[i] = 1
        return cls(n, {(tuple(e), ()): _one(ring_order)}, ring_order)

    @classmethod
    def xi(cls, n: int, i: int, ring_order: Optional[int] = None) -> "SuperPolynomial":
        return cls(n, {(tuple([0] * n), (i,)): _one(ring_order)}, ring_order)

    @classmethod
    def monomial(cls, n: int, xexp: Sequence[int], xis: Sequence[int], coeff=1, ring_order: Optional[int] = None) -> "SuperPolynomial":
        xis = tuple(xis)
        assert list(xis) == sorted(set(xis)), "odd indices must be strictly increasing"
        c = coeff if isinstance(coeff, TruncSeries) else parse_coeff(coeff, ring_order)
        return cls(n, {(tuple(xexp), xis): c}, ring_order)

    # -- ring structure ------------------------------------------------

    def _check(self, other: "SuperPolynomial") -> None:
        if self.n != other.n or self.ring_order != other.ring_order:
            raise GeneratorMismatch(f"incompatible operands: n={self.n}/{other.n}")

    def __add__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        self._check(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            s = out.get(mono)
            s = c if s is None else s + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return SuperPolynomial(self.n, out, self.ring_order)

    def __neg__(self) -> "SuperPolynomial":
        return SuperPolynomial(self.n, {m: -c for m, c in self.terms.items()}, self.ring_order)

    def __sub__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        return self + (-other)

    def scale(self, c) -> "SuperPolynomial":
        if not c:
            return SuperPolynomial.zero(self.n, self.ring_order)
        return SuperPolynomial(self.n, {m: v * c for m, v in self.terms.items()}, self.ring_order)

    def __mul__(self, other: "SuperPolynomial") -> "SuperPolynomial":
        """Supercommutative product (the wedge on polyvector fields)."""
        self._check(other)
        out: Dict[Monomial, object] = {}
        for (ax, aj), ac in self.terms.items():
            for (bx, bj), bc in other.terms.items():
                m = _merge(aj, bj)
                if m is None:
                    continue
                sign, js = m
                mono = (tuple(p + q for p, q in zip(ax, bx)), js)
                c = ac * bc
                if sign < 0:
                    c = -c
                s = out.get(mono)
                s = c if s is None else s + c
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        return SuperPolynomial(self.n, out, self.ring_order)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- calculus ------------------------------------------------------

    def partial_x(self, i: int) -> "SuperPolynomial":
        if not 0 <= i < self.n:
            raise IndexError(f"generator index {i} out of range")
        out: Dict[Monomial, object] = {}
        for (xe, js), c in self.terms.items():
            if xe[i] == 0:
                continue
            e = list(xe)
            k = e[i]
            e[i] -= 1
            mono = (tuple(e), js)
            add = c * k
            s = out.get(mono)
            s = add if s is None else s + add
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return SuperPolynomial(self.n, out, self.ring_order)

    def partial_xi(self, i: int) -> "SuperPolynomial":
        """Left odd derivative: d/dxi_i with sign (-1)^(position in monomial)."""
        if not 0 <= i < self.n:
            raise IndexError(f"generator index {i} out of range")
        out: Dict[Monomial, object] = {}
        for (xe, js), c in self.terms.items():
            if i not in js:
                continue
            pos = js.index(i)
            mono = (xe, js[:pos] + js[pos + 1:])
            add = c if pos % 2 == 0 else -c
            s = out.get(mono)
            s = add if s is None else s + add
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return SuperPolynomial(self.n, out, self.ring_order)

    # -- grading -------------------------------------------------------

    def bidegrees(self) -> List[Tuple[int, int]]:
        return sorted({(sum(xe), len(js)) for (xe, js) in self.terms})

    def deg_s(self) -> int:
        """x-degree; requires homogeneity."""
        ds = {sum(xe) for (xe, _) in self.terms}
        if len(ds) > 1:
            raise ValueError("not x-homogeneous")
        return ds.pop() if ds else 0

    def deg_lambda(self) -> int:
        ds = {len(js) for (_, js) in self.terms}
        if len(ds) > 1:
            raise ValueError("not xi-homogeneous")
        return ds.pop() if ds else 0

    def lambda_components(self) -> Dict[int, "SuperPolynomial"]:
        out: Dict[int, Dict[Monomial, object]] = {}
        for (xe, js), c in self.terms.items():
            out.setdefault(len(js), {})[(xe, js)] = c
        return {k: SuperPolynomial(self.n, t, self.ring_order) for k, t in sorted(out.items())}

    def is_x_squarefree(self) -> bool:
        return all(all(e <= 1 for e in xe) for (xe, _) in self.terms)

    def map_coeffs(self, f) -> "SuperPolynomial":
        return SuperPolynomial(self.n, {m: f(c) for m, c in self.terms.items() if f(c)}, self.ring_order)

    # -- display -------------------------------------------------------

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (xe, js) in sorted(self.terms):
            c = self.terms[(xe, js)]
            gens = [f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(xe) if e]
            gens += [f"xi{j}" for j in js]
            body = "*".join(gens) if gens else "1"
            bits.append(f"({c})*{body}")
        return " + ".join(bits)


def _one(ring_order: Optional[int]):
    return QQ(1) if ring_order is None else TruncSeries.const(1, ring_order)


# -- polyvector operations --------------------------------------------


def wedge(a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
    return a * b


def schouten(a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
    """Schouten-Nijenhuis bracket on polyvector fields.

    On xi-homogeneous components of xi-degrees (ka, kb):

        [a, b] = sum_i (-1)^(ka+1) (da/dxi_i)(db/dx_i) - (da/dx_i)(db/dxi_i)

    extended bilinearly.  This is the unique sign assignment of this shape
    normalized by [xi_i, x_i] = 1 that satisfies graded antisymmetry,
    graded Jacobi and graded Leibniz (see docs/CONVENTIONS.md); it reduces
    to the commutator on vector fields and to X(f) on [X, f].
    """
    if a.n != b.n:
        raise GeneratorMismatch("bracket operands over different generator sets")
    out = SuperPolynomial.zero(a.n, a.ring_order)
    for ka, ah in a.lambda_components().items():
        for _, bh in b.lambda_components().items():
            t1 = _interior_xi_x(ah, bh)
            t2 = _interior_x_xi(ah, bh)
            out = out + (t1 if ka % 2 else -t1) - t2
    return out


def _interior_xi_x(a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
    out = SuperPolynomial.zero(a.n, a.ring_order)
    for i in range(a.n):
        da = a.partial_xi(i)
        if not da:
            continue
        db = b.partial_x(i)
        if not db:
            continue
        out = out + da * db
    return out


def _interior_x_xi(a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
    out = SuperPolynomial.zero(a.n, a.ring_order)
    for i in range(a.n):
        da = a.partial_x(i)
        if not da:
            continue
        db = b.partial_xi(i)
        if not db:
            continue
        out = out + da * db
    return out


def duality_map(p: SuperPolynomial) -> SuperPolynomial:
    """Role-swap isomorphism between polyvectors on V and on the shifted dual.

    A polyvector on V is stored with coordinate functions in the x slot and
    odd derivation symbols xi_i = d/dx_i in the xi slot.  On the shifted
    dual the functions are the odd xi_i and the derivations d/dxi_i are
    even and are stored in the x slot.  Sending x_{i_1}..x_{i_k} d/dx_{j_1}
    ^..^ d/dx_{j_l} to xi_{j_1}..xi_{j_l} d/dxi_{i_1}^..^d/dxi_{i_k} keeps
    every index in its slot, so on stored data the map is the identity;
    what changes is the reading of the slots (see dual_bidegree).  The
    global sign is fixed to +1 (convention ledger), which makes the map a
    strict morphism for the Schouten bracket: the odd Poisson structure
    only sees the conjugate pairing x_i <-> xi_i, not which slot carries
    the coordinates, so both sides share one bracket formula.
    """
    return SuperPolynomial(p.n, dict(p.terms), p.ring_order)


def dual_bidegree(p: SuperPolynomial) -> Tuple[int, int]:
    """(function-degree, direction-degree) of a polyvector read on the dual side.

    A bi-homogeneous polyvector with (deg_S, deg_Lambda) = (k, l) on V is a
    polyvector with l-linear coefficients and k directions on the dual, so
    the interpreted bidegree is the swap (l, k).
    """
    return (p.deg_lambda(), p.deg_s())


class Bivector:
    """xi-degree-2 polyvector field alpha = sum alpha^{ij}(x) xi_i xi_j."""

    def __init__(self, poly: SuperPolynomial):
        if poly and poly.deg_lambda() != 2:
            raise ValueError("bivector terms must have xi-degree 2")
        self.poly = poly
        self.n = poly.n

    def is_quadratic(self) -> bool:
        return (not self.poly) or all(sum(xe) == 2 for (xe, _) in self.poly.terms)

    def __repr__(self):
        return f"Bivector({self.poly!r})"


def is_poisson(b: Bivector) -> bool:
    return not schouten(b.poly, b.poly)


def hkr(gamma: SuperPolynomial, cutoff: int):
    """HKR cochain of a homogeneous polyvector field (see hochschild.hkr)."""
    from . import hochschild

    return hochschild.hkr(gamma, cutoff)


# -- serialization -----------------------------------------------------


def poly_to_json(p: SuperPolynomial) -> list:
    out = []
    for (xe, js) in sorted(p.terms):
        out.append({"coef": format_coeff(p.terms[(xe, js)]), "x": list(xe), "xi": list(js)})
    return out


def poly_from_json(data: Iterable[dict], n: int, ring_order: Optional[int] = None) -> SuperPolynomial:
    terms: Dict[Monomial, object] = {}
    for t in data:
        xe = tuple(t.get("x", [0] * n))
        if len(xe) != n:
            raise ValueError(f"x-exponent vector must have length {n}")
        js = tuple(t.get("xi", []))
        if list(js) != sorted(set(js)):
            raise ValueError("xi index list must be strictly increasing")
        c = parse_coeff(t["coef"], ring_order)
        if c:
            terms[(xe, js)] = terms.get((xe, js), parse_coeff(0, ring_order)) + c
    return SuperPolynomial(n, terms, ring_order)
