"""Exact sparse linear algebra over the rationals.

Vectors are sparse dicts ``{index: Fraction}`` (no zero entries stored);
matrices are :class:`SparseMatrix`.  Everything is immutable-by-convention
and deterministic: elimination produces the canonical reduced row echelon
form, so kernel bases and solution representatives do not depend on
internal pivot choices.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

QQ = Fraction

Vector = Dict[int, QQ]


class DimensionMismatch(ValueError):
    """Raised when matrix/vector shapes are incompatible."""


def vec_from_list(entries: Sequence) -> Vector:
    return {i: QQ(x) for i, x in enumerate(entries) if QQ(x) != 0}


def vec_to_list(v: Vector, n: int) -> List[QQ]:
    out = [QQ(0)] * n
    for i, x in v.items():
        out[i] = x
    return out


def vec_add(a: Vector, b: Vector) -> Vector:
    out = dict(a)
    for i, x in b.items():
        y = out.get(i, QQ(0)) + x
        if y:
            out[i] = y
        else:
            out.pop(i, None)
    return out


def vec_scale(a: Vector, c: QQ) -> Vector:
    if c == 0:
        return {}
    return {i: c * x for i, x in a.items()}


def vec_sub(a: Vector, b: Vector) -> Vector:
    return vec_add(a, vec_scale(b, QQ(-1)))


def vec_dot(a: Vector, b: Vector) -> QQ:
    if len(b) < len(a):
        a, b = b, a
    return sum((x * b[i] for i, x in a.items() if i in b), QQ(0))


class SparseMatrix:
    """Sparse exact matrix with entries indexed by ``(row, col)``."""

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], QQ]] = None):
        self.rows = rows
        self.cols = cols
        self.data: List[Vector] = [dict() for _ in range(rows)]
        if entries:
            for (r, c), x in entries.items():
                x = QQ(x)
                if x:
                    self.data[r][c] = x

    @classmethod
    def from_rows(cls, rows: Sequence[Vector], cols: int) -> "SparseMatrix":
        m = cls(len(rows), cols)
        m.data = [dict(r) for r in rows]
        return m

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        m = cls(nr, nc)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                x = QQ(x)
                if x:
                    m.data[i][j] = x
        return m

    def entry(self, r: int, c: int) -> QQ:
        return self.data[r].get(c, QQ(0))

    def apply(self, v: Vector) -> Vector:
        out: Vector = {}
        for r, row in enumerate(self.data):
            x = vec_dot(row, v)
            if x:
                out[r] = x
        return out

    def transpose(self) -> "SparseMatrix":
        m = SparseMatrix(self.cols, self.rows)
        for r, row in enumerate(self.data):
            for c, x in row.items():
                m.data[c][r] = x
        return m

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={sum(len(r) for r in self.data)})"


def _rref(rows: List[Vector]) -> Tuple[List[Vector], List[int]]:
    """Canonical reduced row echelon form.

    Returns (reduced rows, pivot column list).  Pivot columns are chosen
    leftmost-first, which makes the result the canonical RREF of the row
    space; among candidate rows the sparsest is eliminated with to limit
    fill-in (the output does not depend on this choice).
    """
    work = [dict(r) for r in rows if r]
    done: List[Vector] = []
    pivots: List[int] = []
    while work:
        col = min(min(r) for r in work)
        cand = [r for r in work if col in r]
        cand.sort(key=len)
        piv = cand[0]
        work.remove(piv)
        inv = QQ(1) / piv[col]
        piv = vec_scale(piv, inv)
        nxt = []
        for r in work:
            if col in r:
                r = vec_sub(r, vec_scale(piv, r[col]))
            if r:
                nxt.append(r)
        work = nxt
        done.append(piv)
        pivots.append(col)
    # back-substitute for full reduction
    order = sorted(range(len(done)), key=lambda i: pivots[i])
    done = [done[i] for i in order]
    pivots = [pivots[i] for i in order]
    for i in range(len(done) - 1, -1, -1):
        for j in range(i):
            c = done[j].get(pivots[i])
            if c:
                done[j] = vec_sub(done[j], vec_scale(done[i], c))
    return done, pivots


def rref(m: SparseMatrix) -> Tuple[List[Vector], List[int]]:
    return _rref(m.data)


def rank(m: SparseMatrix) -> int:
    return len(_rref(m.data)[0])


def row_space_basis(rows: Sequence[Vector]) -> List[Vector]:
    return _rref(list(rows))[0]


def kernel_basis(m: SparseMatrix) -> List[Vector]:
    """Basis of the right kernel {v : m v = 0}.

    One basis vector per free column, with the free coordinate scaled so the
    first nonzero coordinate equals 1.  For the zero map this returns the
    standard basis.
    """
    red, pivots = _rref(m.data)
    pivot_set = set(pivots)
    basis: List[Vector] = []
    for c in range(m.cols):
        if c in pivot_set:
            continue
        v: Vector = {c: QQ(1)}
        for row, pc in zip(red, pivots):
            x = row.get(c)
            if x:
                v[pc] = -x
        lead = min(v)
        if v[lead] != 1:
            v = vec_scale(v, QQ(1) / v[lead])
        basis.append(v)
    basis.sort(key=lambda v: min(v))
    return basis


def solve_linear(m: SparseMatrix, rhs: Vector) -> Optional[Vector]:
    """Exact solution of m x = rhs, or None if inconsistent.

    Free variables are set to 0 (the deterministic representative).
    """
    bad = [r for r in rhs if r >= m.rows or r < 0]
    if bad:
        raise DimensionMismatch(f"rhs index {bad[0]} outside {m.rows} rows")
    aug = []
    for r, row in enumerate(m.data):
        row = dict(row)
        x = rhs.get(r, QQ(0))
        if x:
            row[m.cols] = x
        aug.append(row)
    red, pivots = _rref(aug)
    sol: Vector = {}
    for row, pc in zip(red, pivots):
        if pc == m.cols:
            return None
        x = row.get(m.cols)
        if x:
            sol[pc] = x
    return sol


def solve_many(m: SparseMatrix, rhss: Sequence[Vector]) -> List[Optional[Vector]]:
    """Solve m x = rhs for several right-hand sides (shared elimination)."""
    # Augment with one extra column per rhs; pivots never enter the extra
    # block unless a system is inconsistent.
    aug = []
    k = len(rhss)
    for r, row in enumerate(m.data):
        row = dict(row)
        for j, rhs in enumerate(rhss):
            x = rhs.get(r, QQ(0))
            if x:
                row[m.cols + j] = x
        aug.append(row)
    red, pivots = _rref(aug)
    sols: List[Optional[Vector]] = []
    for j in range(k):
        col = m.cols + j
        sol: Vector = {}
        ok = True
        for row, pc in zip(red, pivots):
            if pc >= m.cols:
                # pivot in an rhs column: that system (and only that one) is
                # inconsistent when its column is the pivot
                if pc == col:
                    ok = False
                continue
            x = row.get(col)
            if x:
                sol[pc] = x
        sols.append(sol if ok else None)
    return sols


def in_row_space(basis: Sequence[Vector], v: Vector) -> bool:
    red, pivots = _rref(list(basis))
    w = dict(v)
    for row, pc in zip(red, pivots):
        x = w.get(pc)
        if x:
            w = vec_sub(w, vec_scale(row, x))
    return not w


def same_row_space(a: Sequence[Vector], b: Sequence[Vector]) -> bool:
    ra = _rref(list(a))[0]
    rb = _rref(list(b))[0]
    return ra == rb


def intersect_row_spaces(a: Sequence[Vector], b: Sequence[Vector], n: int) -> List[Vector]:
    """Basis of (span a) ∩ (span b) inside QQ^n."""
    ra = row_space_basis(a)
    rb = row_space_basis(b)
    if not ra or not rb:
        return []
    # v = sum c_i a_i = sum d_j b_j ; solve [A^T | -B^T] (c,d)^T = 0
    m = SparseMatrix(n, len(ra) + len(rb))
    for i, v in enumerate(ra):
        for r, x in v.items():
            m.data[r][i] = x
    for j, v in enumerate(rb):
        for r, x in v.items():
            m.data[r][len(ra) + j] = m.data[r].get(len(ra) + j, QQ(0)) - x
    out = []
    for kv in kernel_basis(m):
        v: Vector = {}
        for i, c in kv.items():
            if i < len(ra):
                v = vec_add(v, vec_scale(ra[i], c))
        if v:
            out.append(v)
    return row_space_basis(out)


def parse_rational(s) -> QQ:
    if isinstance(s, QQ):
        return s
    if isinstance(s, int):
        return QQ(s)
    return QQ(str(s))


def format_rational(x: QQ) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
