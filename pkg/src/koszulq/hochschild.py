"""Graded Hochschild cochains: differential, cup, braces, coboundary solving.

Cochains are stored as exact matrices per source multi-degree, on a
graded carrier algebra (polynomial, exterior, or presentation-based).
All signs come from one brace convention on desuspended degrees: a
cochain f of arity p whose values shift the cohomological grading by t
has ||f|| = p + t - 1, an element a of cohomological degree |a|
contributes |a| - 1, and

    f{g_1,..,g_r}(a_1,..) = sum (-1)^(sum_k ||g_k|| * A_{i_k}) f(.., g_k(..), ..)

with A_i the sum of (|a_j| - 1) over the arguments before the insertion.
The differential is [mu, .], the cup product is mu{f, g}; d^2 = 0, the
graded Jacobi identity and the Leibniz-type compatibilities follow and
are pinned by the test suite rather than by matching any one textbook.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg, trunc
from .linalg import QQ, SparseMatrix
from .superpoly import SuperPolynomial
from .trunc import TruncSeries

Degs = Tuple[int, ...]
Matrix = Dict[Tuple[int, int], object]


class CutoffError(ValueError):
    """A cochain was evaluated outside its stored inner-degree region."""


class CarrierMismatch(ValueError):
    pass


# -- carriers ------------------------------------------------------------


class Carrier:
    """Graded algebra with an exact monomial basis per inner degree."""

    def __init__(self, n: int, ring_order: Optional[int] = None):
        self.n = n
        self.ring_order = ring_order
        self._basis: Dict[int, List[SuperPolynomial]] = {}
        self._index: Dict[int, Dict] = {}

    def __eq__(self, other):
        return type(self) is type(other) and (self.n, self.ring_order) == (other.n, other.ring_order)

    def __hash__(self):
        return hash((type(self).__name__, self.n, self.ring_order))

    # subclasses: _make_basis(d) -> list of SuperPolynomial, coh(d) -> int

    def basis(self, d: int) -> List[SuperPolynomial]:
        if d < 0:
            return []
        if d not in self._basis:
            self._basis[d] = self._make_basis(d)
            self._index[d] = {next(iter(b.terms)): i for i, b in enumerate(self._basis[d])}
        return self._basis[d]

    def dim(self, d: int) -> int:
        return len(self.basis(d))

    def coords(self, p: SuperPolynomial, d: int) -> Dict[int, object]:
        """Coordinates of a degree-d element in the monomial basis."""
        self.basis(d)
        out: Dict[int, object] = {}
        for mono, c in p.terms.items():
            idx = self._index[d].get(mono)
            if idx is None:
                raise ValueError(f"element not in the degree-{d} component")
            out[idx] = c
        return out

    def one(self):
        return QQ(1) if self.ring_order is None else TruncSeries.const(1, self.ring_order)

    def zero_coeff(self):
        return QQ(0) if self.ring_order is None else TruncSeries.const(0, self.ring_order)

    def coh_shift_of(self, inner_shift: int) -> int:
        raise NotImplementedError

    def element_degree(self, p: SuperPolynomial) -> int:
        raise NotImplementedError

    def suspension_twist(self, degs: Sequence[int]) -> int:
        """Decalage sign relating a multilinear map on A to its suspension.

        Matrices are stored for the suspended map on A[1]-tensors, where
        the brace signs below are the correct ones; building a component
        from argument values multiplies by (-1)^(sum_j (p-j) |a_j|).
        """
        p = len(degs)
        e = sum((p - j) * self.coh(d) for j, d in enumerate(degs, start=1))
        return -1 if e % 2 else 1


class PolyCarrier(Carrier):
    """S(V*): x-polynomials; cohomological degree 0 everywhere."""

    def _make_basis(self, d: int) -> List[SuperPolynomial]:
        out = []
        for xe in sorted(itertools.product(range(d + 1), repeat=self.n), reverse=True):
            if sum(xe) == d:
                out.append(SuperPolynomial.monomial(self.n, xe, (), 1, self.ring_order))
        return out

    def coh(self, d: int) -> int:
        return 0

    def coh_shift_of(self, inner_shift: int) -> int:
        return 0

    def element_degree(self, p: SuperPolynomial) -> int:
        return p.deg_s()

    def multiply(self, a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
        return a * b


class ExtCarrier(Carrier):
    """Lambda(V): xi-polynomials; cohomological degree = inner degree."""

    def _make_basis(self, d: int) -> List[SuperPolynomial]:
        if d > self.n:
            return []
        out = []
        for js in itertools.combinations(range(self.n), d):
            out.append(SuperPolynomial.monomial(self.n, (0,) * self.n, js, 1, self.ring_order))
        return out

    def coh(self, d: int) -> int:
        return d

    def coh_shift_of(self, inner_shift: int) -> int:
        return inner_shift

    def element_degree(self, p: SuperPolynomial) -> int:
        return p.deg_lambda()

    def multiply(self, a: SuperPolynomial, b: SuperPolynomial) -> SuperPolynomial:
        return a * b


class PresCarrier(Carrier):
    """Graded algebra presented by a QuadraticPresentation (normal forms)."""

    def __init__(self, pres):
        super().__init__(pres.g, pres.ring_order)
        self.pres = pres
        self.odd = any(pres.parity)

    def __eq__(self, other):
        return type(other) is PresCarrier and self.pres is other.pres

    def __hash__(self):
        return hash(("PresCarrier", id(self.pres)))

    def _make_basis(self, d: int):
        # transversal words stand in for monomials; wrap as formal labels
        return self.pres.graded_component(d).transversal

    def basis(self, d: int):
        if d < 0:
            return []
        if d not in self._basis:
            self._basis[d] = self._make_basis(d)
        return self._basis[d]

    def dim(self, d: int) -> int:
        return len(self.basis(d))

    def coh(self, d: int) -> int:
        return d if self.odd else 0

    def coh_shift_of(self, inner_shift: int) -> int:
        return inner_shift if self.odd else 0

    def mult_coords(self, d1: int, i1: int, d2: int, i2: int) -> Dict[int, object]:
        return self.pres.mult_tables(d1, d2)[i1 * self.pres.dim(d2) + i2]


# -- graded cochains ------------------------------------------------------


def _mixed_radix(tup: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for t, d in zip(tup, dims):
        idx = idx * d + t
    return idx


def _unrank(idx: int, dims: Sequence[int]) -> Tuple[int, ...]:
    out = []
    for d in reversed(dims):
        out.append(idx % d)
        idx //= d
    return tuple(reversed(out))


class GradedCochain:
    """Multilinear map A^(x)p -> A of fixed inner-degree shift."""

    def __init__(self, carrier: Carrier, arity: int, inner_shift: int, cutoff: int, comps: Optional[Dict[Degs, Matrix]] = None):
        self.carrier = carrier
        self.arity = arity
        self.inner_shift = inner_shift
        self.cutoff = cutoff
        self.comps: Dict[Degs, Matrix] = {}
        if comps:
            for degs, m in comps.items():
                m = {k: v for k, v in m.items() if v}
                if m:
                    self.comps[degs] = m

    @property
    def norm_deg(self) -> int:
        """Desuspended total degree ||f|| = arity + coh shift - 1."""
        return self.arity + self.carrier.coh_shift_of(self.inner_shift) - 1

    def component(self, degs: Degs) -> Matrix:
        if len(degs) != self.arity:
            raise ValueError("wrong number of argument degrees")
        if any(d < 0 for d in degs) or sum(degs) + self.inner_shift < 0:
            return {}
        if sum(degs) > self.cutoff:
            raise CutoffError(f"multidegree {degs} outside cutoff {self.cutoff}")
        return self.comps.get(degs, {})

    def _degs_iter(self, bound: Optional[int] = None):
        bound = self.cutoff if bound is None else bound
        for total in range(bound + 1):
            for degs in _degree_tuples(self.arity, total):
                yield degs

    # -- linear structure ------------------------------------------------

    def _compat(self, other: "GradedCochain") -> None:
        if self.carrier != other.carrier:
            raise CarrierMismatch("cochains live on different carriers")
        if (self.arity, self.inner_shift) != (other.arity, other.inner_shift):
            raise ValueError("cochain shape mismatch")

    def __add__(self, other: "GradedCochain") -> "GradedCochain":
        self._compat(other)
        cutoff = min(self.cutoff, other.cutoff)
        out: Dict[Degs, Matrix] = {}
        keys = {d for d in self.comps if sum(d) <= cutoff} | {d for d in other.comps if sum(d) <= cutoff}
        for degs in keys:
            m = dict(self.comps.get(degs, {}))
            for k, v in other.comps.get(degs, {}).items():
                s = m.get(k)
                s = v if s is None else s + v
                if s:
                    m[k] = s
                else:
                    m.pop(k, None)
            if m:
                out[degs] = m
        return GradedCochain(self.carrier, self.arity, self.inner_shift, cutoff, out)

    def scale(self, c) -> "GradedCochain":
        if not c:
            return GradedCochain(self.carrier, self.arity, self.inner_shift, self.cutoff, {})
        return GradedCochain(
            self.carrier,
            self.arity,
            self.inner_shift,
            self.cutoff,
            {d: {k: v * c for k, v in m.items()} for d, m in self.comps.items()},
        )

    def __neg__(self):
        return self.scale(-self.carrier.one())

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other):
        if not isinstance(other, GradedCochain):
            return NotImplemented
        if self.carrier != other.carrier or (self.arity, self.inner_shift) != (other.arity, other.inner_shift):
            return False
        bound = min(self.cutoff, other.cutoff)
        for degs in set(self.comps) | set(other.comps):
            if sum(degs) > bound:
                continue
            if self.comps.get(degs, {}) != other.comps.get(degs, {}):
                return False
        return True

    def __repr__(self):
        nz = sum(len(m) for m in self.comps.values())
        return f"GradedCochain(p={self.arity}, shift={self.inner_shift}, cutoff={self.cutoff}, nnz={nz})"


def _degree_tuples(arity: int, total: int) -> List[Degs]:
    if arity == 0:
        return [()] if total == 0 else []
    out = []
    for head in range(total + 1):
        for rest in _degree_tuples(arity - 1, total - head):
            out.append((head,) + rest)
    return out


def from_value_fn(carrier: Carrier, arity: int, inner_shift: int, cutoff: int, fn: Callable[..., SuperPolynomial]) -> GradedCochain:
    """Materialize a cochain from a function on basis elements."""
    comps: Dict[Degs, Matrix] = {}
    for total in range(cutoff + 1):
        for degs in _degree_tuples(arity, total):
            if total + inner_shift < 0:
                continue
            dims = [carrier.dim(d) for d in degs]
            if any(d == 0 for d in dims):
                continue
            tw = carrier.suspension_twist(degs)
            m: Matrix = {}
            for col_tuple in itertools.product(*[range(d) for d in dims]):
                args = [carrier.basis(d)[i] for d, i in zip(degs, col_tuple)]
                val = fn(*args)
                if not val:
                    continue
                col = _mixed_radix(col_tuple, dims)
                for row, c in carrier.coords(val, total + inner_shift).items():
                    m[(row, col)] = c if tw > 0 else -c
            if m:
                comps[degs] = m
    return GradedCochain(carrier, arity, inner_shift, cutoff, comps)


def multiplication_cochain(carrier: Carrier, cutoff: int) -> GradedCochain:
    if isinstance(carrier, PresCarrier):
        comps: Dict[Degs, Matrix] = {}
        for total in range(cutoff + 1):
            for d1 in range(total + 1):
                d2 = total - d1
                n1, n2 = carrier.dim(d1), carrier.dim(d2)
                if n1 == 0 or n2 == 0:
                    continue
                tw = carrier.suspension_twist((d1, d2))
                m: Matrix = {}
                for i1 in range(n1):
                    for i2 in range(n2):
                        col = i1 * n2 + i2
                        for row, c in carrier.mult_coords(d1, i1, d2, i2).items():
                            m[(row, col)] = c if tw > 0 else -c
                if m:
                    comps[(d1, d2)] = m
        return GradedCochain(carrier, 2, 0, cutoff, comps)
    return from_value_fn(carrier, 2, 0, cutoff, lambda a, b: carrier.multiply(a, b))


def identity_cochain(carrier: Carrier, cutoff: int) -> GradedCochain:
    comps: Dict[Degs, Matrix] = {}
    for d in range(cutoff + 1):
        nd = carrier.dim(d)
        if nd:
            comps[(d,)] = {(i, i): carrier.one() for i in range(nd)}
    return GradedCochain(carrier, 1, 0, cutoff, comps)


def constant_cochain(carrier: Carrier, value: SuperPolynomial, cutoff: int) -> GradedCochain:
    d = carrier.element_degree(value) if value else 0
    comps: Dict[Degs, Matrix] = {}
    if value:
        comps[()] = {(row, 0): c for row, c in carrier.coords(value, d).items()}
    return GradedCochain(carrier, 0, d, cutoff, comps)


# -- braces ----------------------------------------------------------------


def brace(f: GradedCochain, gs: Sequence[GradedCochain]) -> GradedCochain:
    """Getzler-Jones brace f{g_1,..,g_r}: order-preserving insertions."""
    if not gs:
        return f
    for g in gs:
        if g.carrier != f.carrier:
            raise CarrierMismatch("brace operands on different carriers")
    r = len(gs)
    if f.arity < r:
        raise ValueError("brace needs arity(f) >= number of insertions")
    carrier = f.carrier
    arity = f.arity + sum(g.arity - 1 for g in gs)
    shift = f.inner_shift + sum(g.inner_shift for g in gs)
    cutoff = min(min(g.cutoff for g in gs), f.cutoff - sum(g.inner_shift for g in gs))
    cutoff = min(cutoff, f.cutoff)
    if cutoff < 0:
        raise CutoffError("no room left for brace composition")
    comps: Dict[Degs, Matrix] = {}
    gnorms = [g.norm_deg for g in gs]
    interleavings = [sl for sl, tot in _interleavings(f.arity, [g.arity for g in gs]) if tot == arity]
    for total in range(cutoff + 1):
        for degs in _degree_tuples(arity, total):
            dims = [carrier.dim(d) for d in degs]
            if any(d == 0 for d in dims):
                continue
            m: Matrix = {}
            cohs = [carrier.coh(d) for d in degs]
            for slice_list in interleavings:
                # Koszul sign from the A[1]-degrees of skipped arguments
                eps = 0
                for desc in slice_list:
                    if desc[0] == "g":
                        _, k, st = desc
                        eps += gnorms[k] * sum(c - 1 for c in cohs[:st])
                sign = -1 if eps % 2 else 1
                fdegs: List[int] = []
                for desc in slice_list:
                    if desc[0] == "a":
                        fdegs.append(degs[desc[1]])
                    else:
                        _, k, st = desc
                        fdegs.append(sum(degs[st: st + gs[k].arity]) + gs[k].inner_shift)
                if any(d < 0 for d in fdegs):
                    continue
                if sum(fdegs) > f.cutoff:
                    raise CutoffError("brace needs f beyond its cutoff")
                fmat = f.component(tuple(fdegs))
                if not fmat:
                    continue
                fdims = [carrier.dim(d) for d in fdegs]
                if any(d == 0 for d in fdims):
                    continue
                f_by_col: Dict[int, List[Tuple[int, object]]] = {}
                for (row, fc), fv in fmat.items():
                    f_by_col.setdefault(fc, []).append((row, fv))
                g_by_col: Dict[int, Dict[int, Dict[int, object]]] = {}
                for pos, desc in enumerate(slice_list):
                    if desc[0] != "g":
                        continue
                    _, k, st = desc
                    ga = gs[k].arity
                    sub_degs = tuple(degs[st: st + ga])
                    if sum(sub_degs) > gs[k].cutoff:
                        raise CutoffError("brace needs g beyond its cutoff")
                    colmap: Dict[int, Dict[int, object]] = {}
                    for (r, cc), v in gs[k].component(sub_degs).items():
                        colmap.setdefault(cc, {})[r] = v
                    g_by_col[pos] = colmap
                # for each column of the result, expand
                for col_tuple in itertools.product(*[range(d) for d in dims]):
                    arg_opts: List[Dict[int, object]] = []
                    ok = True
                    for pos, desc in enumerate(slice_list):
                        if desc[0] == "a":
                            arg_opts.append({col_tuple[desc[1]]: None})
                        else:
                            _, k, st = desc
                            ga = gs[k].arity
                            sub_dims = [dims[st + t] for t in range(ga)]
                            gcol = _mixed_radix([col_tuple[st + t] for t in range(ga)], sub_dims)
                            vec = g_by_col[pos].get(gcol)
                            if not vec:
                                ok = False
                                break
                            arg_opts.append(vec)
                    if not ok:
                        continue
                    col = _mixed_radix(col_tuple, dims)
                    for combo in itertools.product(*[list(o.items()) for o in arg_opts]):
                        coeff = None
                        for (_, c) in combo:
                            if c is not None:
                                coeff = c if coeff is None else coeff * c
                        fcol = _mixed_radix([i for (i, _) in combo], fdims)
                        hits = f_by_col.get(fcol)
                        if not hits:
                            continue
                        for row, fv in hits:
                            add = fv if coeff is None else fv * coeff
                            if sign < 0:
                                add = -add
                            key = (row, col)
                            cur = m.get(key)
                            cur = add if cur is None else cur + add
                            if cur:
                                m[key] = cur
                            else:
                                m.pop(key, None)
            if m:
                comps[degs] = m
    return GradedCochain(carrier, arity, shift, cutoff, comps)


def _interleavings(f_arity: int, g_arities: List[int]):
    """All ways to feed f's slots with plain arguments or the g's in order.

    Each interleaving is a tuple of slot descriptors, one per f-argument:
    ("a", position) for a plain argument or ("g", k, start_position) for
    the k-th inserted cochain consuming g_arities[k] positions.
    """
    out = []

    def rec(fslot: int, k: int, pos: int, acc: tuple):
        if fslot == f_arity:
            if k == len(g_arities):
                out.append((acc, pos))
            return
        rec(fslot + 1, k, pos + 1, acc + (("a", pos),))
        if k < len(g_arities):
            rec(fslot + 1, k + 1, pos + g_arities[k], acc + (("g", k, pos),))

    rec(0, 0, 0, ())
    return out


def cup(a: GradedCochain, b: GradedCochain) -> GradedCochain:
    """Strictly associative cup product.

    On values, (a u b)(f_1..f_{p+q}) = (-1)^(t_b * sum coh(f_1..f_p))
    a(f_1..f_p) b(f_{p+1}..) with t_b the cohomological shift of b; the
    stored matrices carry the suspension twist, which is re-applied here.
    """
    if a.carrier != b.carrier:
        raise CarrierMismatch("cup operands on different carriers")
    carrier = a.carrier
    p, q = a.arity, b.arity
    arity = p + q
    shift = a.inner_shift + b.inner_shift
    cutoff = min(a.cutoff, b.cutoff)
    tb = carrier.coh_shift_of(b.inner_shift)
    comps: Dict[Degs, Matrix] = {}
    for total in range(cutoff + 1):
        for degs in _degree_tuples(arity, total):
            da, db = degs[:p], degs[p:]
            if sum(da) > a.cutoff or sum(db) > b.cutoff:
                continue
            ma = a.component(da)
            mb = b.component(db)
            if not ma or not mb:
                continue
            out_a = sum(da) + a.inner_shift
            out_b = sum(db) + b.inner_shift
            out_d = total + shift
            if out_a < 0 or out_b < 0 or out_d < 0:
                continue
            # untwist inputs, apply the strict Koszul sign, retwist output
            e = (
                tb * sum(carrier.coh(d) for d in da)
                + _twist_exp(carrier, degs)
                + _twist_exp(carrier, da)
                + _twist_exp(carrier, db)
            )
            sign = -1 if e % 2 else 1
            dims = [carrier.dim(d) for d in degs]
            dims_b = [carrier.dim(d) for d in db]
            colsb = 1
            for d in dims_b:
                colsb *= d
            # multiply values: need structure constants of the carrier
            mult = _mult_coords_fn(carrier)
            m: Matrix = {}
            for (ra, ca), va in ma.items():
                for (rb, cb), vb in mb.items():
                    col = ca * colsb + cb
                    for row, c in mult(out_a, ra, out_b, rb).items():
                        add = va * vb * c
                        if sign < 0:
                            add = -add
                        key = (row, col)
                        cur = m.get(key)
                        cur = add if cur is None else cur + add
                        if cur:
                            m[key] = cur
                        else:
                            m.pop(key, None)
            if m:
                comps[degs] = m
    return GradedCochain(carrier, arity, shift, cutoff, comps)


def _twist_exp(carrier: Carrier, degs: Sequence[int]) -> int:
    p = len(degs)
    return sum((p - j) * carrier.coh(d) for j, d in enumerate(degs, start=1))


def _mult_coords_fn(carrier: Carrier):
    if isinstance(carrier, PresCarrier):
        return carrier.mult_coords

    def mult(d1, i1, d2, i2):
        val = carrier.multiply(carrier.basis(d1)[i1], carrier.basis(d2)[i2])
        if not val:
            return {}
        return carrier.coords(val, d1 + d2)

    return mult


def hoch_differential(c: GradedCochain) -> GradedCochain:
    """Hochschild differential d = [mu, .] on graded cochains."""
    mu = multiplication_cochain(c.carrier, c.cutoff + max(0, c.inner_shift))
    left = brace(mu, [c])
    if c.arity == 0:
        # empty insertion sum: [mu, c] has no c{mu} part
        return GradedCochain(c.carrier, 1, c.inner_shift, left.cutoff, left.comps)
    right = brace(c, [mu])
    sign = -1 if c.norm_deg % 2 else 1
    return left - (right if sign > 0 else -right)


def gerstenhaber_bracket(a: GradedCochain, b: GradedCochain) -> GradedCochain:
    if a.carrier != b.carrier:
        raise CarrierMismatch("bracket operands on different carriers")
    left = brace(a, [b])
    right = brace(b, [a])
    sign = -1 if (a.norm_deg * b.norm_deg) % 2 else 1
    return left - (right if sign > 0 else -right)


def is_coboundary(c: GradedCochain, check_closed: bool = True) -> Optional[GradedCochain]:
    """A witness u with d(u) = c, or None; solved per bigraded component."""
    if check_closed and not hoch_differential(c).is_zero():
        raise ValueError("input cochain is not closed")
    carrier = c.carrier
    p = c.arity
    if p == 0:
        return None if not c.is_zero() else GradedCochain(carrier, 0, c.inner_shift, c.cutoff, {})
    # unknowns: entries of u (arity p-1, same inner shift)
    unknowns: List[Tuple[Degs, int, int]] = []
    for total in range(c.cutoff + 1):
        for degs in _degree_tuples(p - 1, total):
            out_d = total + c.inner_shift
            if out_d < 0:
                continue
            dims = [carrier.dim(d) for d in degs]
            rows = carrier.dim(out_d)
            if rows == 0 or any(d == 0 for d in dims):
                continue
            cols = 1
            for d in dims:
                cols *= d
            for r in range(rows):
                for cc in range(cols):
                    unknowns.append((degs, r, cc))
    uindex = {u: i for i, u in enumerate(unknowns)}
    # target equations: entries of c
    eq_rows: List[Dict[int, object]] = []
    rhs: List[object] = []
    eqindex: Dict[Tuple[Degs, int, int], int] = {}

    def eq_of(degs, r, cc):
        key = (degs, r, cc)
        if key not in eqindex:
            eqindex[key] = len(eq_rows)
            eq_rows.append({})
            rhs.append(carrier.zero_coeff())
        return eqindex[key]

    # assemble d(u) entry-by-entry via basis cochains (linear in u)
    for (degs, r, cc), j in uindex.items():
        basis_cochain = GradedCochain(carrier, p - 1, c.inner_shift, c.cutoff, {degs: {(r, cc): carrier.one()}})
        dmat = hoch_differential(basis_cochain)
        for ddegs, mat in dmat.comps.items():
            for (rr, ccc), v in mat.items():
                i = eq_of(ddegs, rr, ccc)
                cur = eq_rows[i].get(j)
                cur = v if cur is None else cur + v
                if cur:
                    eq_rows[i][j] = cur
                else:
                    eq_rows[i].pop(j, None)
    for degs, mat in c.comps.items():
        for (r, cc), v in mat.items():
            i = eq_of(degs, r, cc)
            rhs[i] = rhs[i] + v
    if carrier.ring_order is None:
        m = SparseMatrix.from_rows(eq_rows, len(unknowns))
        sol = linalg.solve_linear(m, {i: v for i, v in enumerate(rhs) if v})
    else:
        entries = {}
        for i, row in enumerate(eq_rows):
            for j, v in row.items():
                entries[(i, j)] = v
        sol = trunc.trunc_solve(len(eq_rows), len(unknowns), entries, {i: v for i, v in enumerate(rhs) if v}, carrier.ring_order)
    if sol is None:
        return None
    comps: Dict[Degs, Matrix] = {}
    for (degs, r, cc), j in uindex.items():
        v = sol.get(j)
        if v:
            comps.setdefault(degs, {})[(r, cc)] = v
    return GradedCochain(carrier, p - 1, c.inner_shift, c.cutoff, comps)


def maurer_cartan_check(pi: GradedCochain) -> bool:
    """d(pi) + (1/2)[pi, pi] = 0, i.e. mu + pi is associative."""
    if pi.arity != 2:
        raise ValueError("Maurer-Cartan element must have arity 2")
    if pi.carrier.ring_order is not None:
        for mat in pi.comps.values():
            for v in mat.values():
                if isinstance(v, TruncSeries) and v.at_zero():
                    raise ValueError("Maurer-Cartan element must vanish at h=0")
    defect = hoch_differential(pi) + brace(pi, [pi])
    return defect.is_zero()


# -- HKR ------------------------------------------------------------------


def hkr(gamma: SuperPolynomial, cutoff: int) -> GradedCochain:
    """HKR cochain of a xi-homogeneous polyvector field on S(V*).

    The k arguments are hit by the antisymmetric coefficient tensor of
    gamma (iterated odd derivatives in slot order); no factorial division,
    matching the first Taylor component normalization of the star product.
    """
    k = gamma.deg_lambda()
    carrier = PolyCarrier(gamma.n, gamma.ring_order)
    shift = gamma.deg_s() - k if gamma else 0

    support = [js for (_, js) in gamma.terms]

    def value(*fs):
        out = SuperPolynomial.zero(gamma.n, gamma.ring_order)
        seen = set()
        for js in support:
            for perm in itertools.permutations(js):
                if perm in seen:
                    continue
                seen.add(perm)
                t = gamma
                for i in perm:
                    t = t.partial_xi(i)
                if not t:
                    continue
                for i, f in zip(perm, fs):
                    t = t * f.partial_x(i)
                    if not t:
                        break
                if t:
                    out = out + t
        return out

    return from_value_fn(carrier, k, shift, cutoff, value)


def hkr_normalized(gamma: SuperPolynomial, cutoff: int) -> GradedCochain:
    """Classical HKR cochain with the 1/k! prefactor.

    This is the normalization under which the HKR map is multiplicative
    up to coboundary; the plain hkr above matches the star product's
    first-order normalization instead.
    """
    k = gamma.deg_lambda()
    fact = 1
    for i in range(2, k + 1):
        fact *= i
    c = QQ(1, fact) if gamma.ring_order is None else TruncSeries.const(QQ(1, fact), gamma.ring_order)
    return hkr(gamma, cutoff).scale(c)


def hkr_dual(gamma: SuperPolynomial, cutoff: int) -> GradedCochain:
    """HKR cochain of a polyvector field read on the dual side, on Lambda(V).

    The x slot of gamma carries the (even) directions; its m = deg_S
    arguments from Lambda(V) are differentiated by the symmetric tensor
    of iterated x-derivatives, wedged after the odd coefficient.
    """
    m = gamma.deg_s()
    carrier = ExtCarrier(gamma.n, gamma.ring_order)
    shift = gamma.deg_lambda() - m if gamma else 0

    supports = sorted({xe for (xe, _) in gamma.terms})

    def value(*lams):
        out = SuperPolynomial.zero(gamma.n, gamma.ring_order)
        seen = set()
        for xe in supports:
            picks = tuple(i for i, e in enumerate(xe) for _ in range(e))
            for perm in set(itertools.permutations(picks)):
                if perm in seen:
                    continue
                seen.add(perm)
                t = gamma
                for i in perm:
                    t = t.partial_x(i)
                if not t:
                    continue
                t = SuperPolynomial(gamma.n, {mo: c for mo, c in t.terms.items() if sum(mo[0]) == 0}, gamma.ring_order)
                if not t:
                    continue
                for i, lam in zip(perm, lams):
                    t = t * lam.partial_xi(i)
                    if not t:
                        break
                if t:
                    out = out + t
        return out

    return from_value_fn(carrier, m, shift, cutoff, value)
