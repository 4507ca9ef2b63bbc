"""Truncated power series QQ[h]/(h^(N+1)) and exact linear algebra over them.

Linear problems over the truncated ring are solved by expanding every
series entry into its (N+1)x(N+1) lower-triangular multiplication block
over QQ and reading the answer back.  The ring is quasi-Frobenius, so a
submodule of a free module is a direct summand exactly when it is free,
which the rank bookkeeping below detects.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .linalg import QQ, SparseMatrix, Vector


class NotASummand(ValueError):
    """A relation/constraint module fails to be a free direct summand."""


class TruncSeries:
    """Element of QQ[h]/(h^(N+1)); coeffs[k] is the coefficient of h^k."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence, order: Optional[int] = None):
        if order is not None:
            cs = [QQ(c) for c in coeffs][: order + 1]
            cs += [QQ(0)] * (order + 1 - len(cs))
        else:
            cs = [QQ(c) for c in coeffs]
        self.coeffs = tuple(cs)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def const(cls, x, order: int) -> "TruncSeries":
        return cls([QQ(x)] + [QQ(0)] * order)

    @classmethod
    def hbar(cls, order: int, power: int = 1) -> "TruncSeries":
        cs = [QQ(0)] * (order + 1)
        if power <= order:
            cs[power] = QQ(1)
        return cls(cs)

    def _coerce(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            if other.order != self.order:
                raise ValueError("mixed truncation orders")
            return other
        return TruncSeries.const(other, self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return TruncSeries([a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        n = self.order
        out = [QQ(0)] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if i + j > n:
                    break
                if b:
                    out[i + j] += a * b
        return TruncSeries(out)

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        return bool(self.coeffs[0])

    def inverse(self) -> "TruncSeries":
        if not self.is_unit():
            raise ZeroDivisionError("not a unit in the truncated ring")
        n = self.order
        inv = [QQ(1) / self.coeffs[0]] + [QQ(0)] * n
        for k in range(1, n + 1):
            acc = QQ(0)
            for i in range(1, k + 1):
                acc += self.coeffs[i] * inv[k - i]
            inv[k] = -acc / self.coeffs[0]
        return TruncSeries(inv)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == TruncSeries.const(other, self.order)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def at_zero(self) -> QQ:
        return self.coeffs[0]

    def valuation(self) -> int:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return self.order + 1

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*h")
            else:
                terms.append(f"{c}*h^{k}")
        return " + ".join(terms) if terms else "0"


TSVector = Dict[int, TruncSeries]


def ring_zero(ring_order: Optional[int]):
    return QQ(0) if ring_order is None else TruncSeries.const(0, ring_order)


def ring_one(ring_order: Optional[int]):
    return QQ(1) if ring_order is None else TruncSeries.const(1, ring_order)


def _block_rows(c: TruncSeries) -> List[List[QQ]]:
    n = c.order
    return [[(c.coeffs[i - j] if 0 <= i - j else QQ(0)) for j in range(n + 1)] for i in range(n + 1)]


def expand_vector(v: TSVector, dim: int, order: int) -> Vector:
    out: Vector = {}
    for i, c in v.items():
        for k, x in enumerate(c.coeffs):
            if x:
                out[i * (order + 1) + k] = x
    return out


def read_vector(v: Vector, dim: int, order: int) -> TSVector:
    out: TSVector = {}
    for idx, x in v.items():
        i, k = divmod(idx, order + 1)
        if i not in out:
            out[i] = TruncSeries.const(0, order)
        cs = list(out[i].coeffs)
        cs[k] = x
        out[i] = TruncSeries(cs)
    return {i: c for i, c in out.items() if c}


def expand_matrix(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], order: int) -> SparseMatrix:
    m = SparseMatrix(rows * (order + 1), cols * (order + 1))
    for (r, c), ts in entries.items():
        if not ts:
            continue
        blk = _block_rows(ts)
        for i in range(order + 1):
            for j in range(order + 1):
                x = blk[i][j]
                if x:
                    rr, cc = r * (order + 1) + i, c * (order + 1) + j
                    m.data[rr][cc] = m.data[rr].get(cc, QQ(0)) + x
    return m


def trunc_kernel(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], order: int) -> List[TSVector]:
    """QQ-spanning set of {v : m v = 0 mod h^(N+1)} as TruncSeries vectors.

    The returned list spans the kernel as a module (over QQ, hence a
    fortiori over the truncated ring).
    """
    big = expand_matrix(rows, cols, entries, order)
    return [read_vector(v, cols, order) for v in linalg.kernel_basis(big)]


def trunc_solve_many(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], rhss: Sequence[TSVector], order: int) -> List[Optional[TSVector]]:
    big = expand_matrix(rows, cols, entries, order)
    qr = [expand_vector(r, rows, order) for r in rhss]
    sols = linalg.solve_many(big, qr)
    return [read_vector(s, cols, order) if s is not None else None for s in sols]


def trunc_solve(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], rhs: TSVector, order: int) -> Optional[TSVector]:
    return trunc_solve_many(rows, cols, entries, [rhs], order)[0]


def _gens_matrix(gens: Sequence[TSVector], dim: int, order: int) -> SparseMatrix:
    """Matrix whose columns are the generators, expanded over QQ."""
    entries: Dict[Tuple[int, int], TruncSeries] = {}
    for j, g in enumerate(gens):
        for i, c in g.items():
            entries[(i, j)] = c
    return expand_matrix(dim, len(gens), entries, order)


def module_q_dimension(gens: Sequence[TSVector], dim: int, order: int) -> int:
    rows = [expand_vector(g, dim, order) for g in gens]
    # include h^k * g for all k so the QQ-span equals the module span
    all_rows = []
    for g in gens:
        for k in range(order + 1):
            hk = TruncSeries.hbar(order, k) if k else TruncSeries.const(1, order)
            all_rows.append(expand_vector({i: hk * c for i, c in g.items()}, dim, order))
    return len(linalg.row_space_basis(all_rows))


def module_contains(gens: Sequence[TSVector], v: TSVector, dim: int, order: int) -> bool:
    """Is v a TruncSeries-combination of the generators?"""
    m = _gens_matrix(gens, dim, order)
    return linalg.solve_linear(m, expand_vector(v, dim, order)) is not None


def submodule_equal(gens_a: Sequence[TSVector], gens_b: Sequence[TSVector], dim: int, order: int) -> bool:
    """Mutual containment of the generated submodules of R^dim."""
    ma = _gens_matrix(gens_a, dim, order)
    mb = _gens_matrix(gens_b, dim, order)
    for sol in linalg.solve_many(mb, [expand_vector(g, dim, order) for g in gens_a]):
        if sol is None:
            return False
    for sol in linalg.solve_many(ma, [expand_vector(g, dim, order) for g in gens_b]):
        if sol is None:
            return False
    return True


def reduce_at_zero(v: TSVector) -> Vector:
    return {i: c.at_zero() for i, c in v.items() if c.at_zero()}


def free_basis_from_spanning(gens: Sequence[TSVector], dim: int, order: int) -> List[TSVector]:
    """Extract a free module basis from a spanning set of a direct summand.

    Picks generators whose h=0 reductions are independent (Nakayama); fails
    with :class:`NotASummand` if the module is not free, reporting the
    h-valuation at which freeness breaks.
    """
    chosen: List[TSVector] = []
    red_rows: List[Vector] = []
    for g in gens:
        r = reduce_at_zero(g)
        if not r:
            continue
        if not linalg.in_row_space(red_rows, r):
            chosen.append(g)
            red_rows = linalg.row_space_basis(red_rows + [r])
    rank0 = len(chosen)
    qdim = module_q_dimension(gens, dim, order)
    if qdim != rank0 * (order + 1):
        vals = sorted({min((c.valuation() for c in g.values()), default=order + 1) for g in gens})
        bad = next((v for v in vals if v > 0), vals[0] if vals else 0)
        raise NotASummand(
            f"module is not a free direct summand: QQ-dimension {qdim} != "
            f"{rank0}*(N+1)={rank0 * (order + 1)}; torsion enters at h-degree {bad}"
        )
    return chosen


def ts_matrix_q_rank(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], order: int) -> int:
    return linalg.rank(expand_matrix(rows, cols, entries, order))


def ts_matrix_q_kernel_dim(rows: int, cols: int, entries: Dict[Tuple[int, int], TruncSeries], order: int) -> int:
    big = expand_matrix(rows, cols, entries, order)
    return big.cols - linalg.rank(big)


def parse_coeff(data, order: Optional[int]):
    """Parse "p/q" (rational) or a list of "p/q" (TruncSeries) coefficient."""
    if isinstance(data, (list, tuple)):
        if order is None:
            raise ValueError("series coefficient in a rational context")
        return TruncSeries([linalg.parse_rational(c) for c in data], order)
    x = linalg.parse_rational(data)
    return x if order is None else TruncSeries.const(x, order)


def format_coeff(c):
    if isinstance(c, TruncSeries):
        return [linalg.format_rational(x) for x in c.coeffs]
    return linalg.format_rational(c)
