"""Quadratic algebra presentations over QQ or QQ[h]/(h^(N+1)).

A presentation is the triple (ring, generators with parity, relation
submodule of the degree-2 tensor component).  Tensor words of length d
are indexed lexicographically with the leftmost letter most significant.
Normal forms eliminate the lex-largest word of each relation, so the
transversal keeps lex-smallest words (x1*x2 rather than x2*x1).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg, trunc
from .linalg import QQ, SparseMatrix, Vector
from .trunc import NotASummand, TruncSeries

Word = Tuple[int, ...]


class PresentationError(ValueError):
    pass


def _rzero(ring_order):
    return QQ(0) if ring_order is None else TruncSeries.const(0, ring_order)


def _rone(ring_order):
    return QQ(1) if ring_order is None else TruncSeries.const(1, ring_order)


def _is_unit(c) -> bool:
    if isinstance(c, TruncSeries):
        return c.is_unit()
    return c != 0


def _inv(c):
    if isinstance(c, TruncSeries):
        return c.inverse()
    return QQ(1) / c


def unit_pivot_rref(rows: Sequence[Dict[int, object]], col_order: Sequence[int]):
    """Reduced echelon form over the coefficient ring with unit pivots.

    Columns are processed in the given order; for each, the first unused
    row with a unit entry becomes the pivot row.  Raises NotASummand when
    a nonzero row survives without any unit entry (torsion).
    """
    work = [dict(r) for r in rows if r]
    done: List[Dict[int, object]] = []
    pivots: List[int] = []
    for col in col_order:
        cand = None
        for r in work:
            if col in r and _is_unit(r[col]):
                cand = r
                break
        if cand is None:
            continue
        work.remove(cand)
        inv = _inv(cand[col])
        piv = {c: inv * x for c, x in cand.items()}
        nxt = []
        for r in work:
            x = r.get(col)
            if x:
                r = dict(r)
                for c, p in piv.items():
                    y = r.get(c, None)
                    y = -x * p if y is None else y - x * p
                    if y:
                        r[c] = y
                    else:
                        r.pop(c, None)
            if r:
                nxt.append(r)
        work = nxt
        for j, d in enumerate(done):
            x = d.get(col)
            if x:
                nd = dict(d)
                for c, p in piv.items():
                    y = nd.get(c, None)
                    y = -x * p if y is None else y - x * p
                    if y:
                        nd[c] = y
                    else:
                        nd.pop(c, None)
                done[j] = nd
        done.append(piv)
        pivots.append(col)
    if work:
        vals = []
        for r in work:
            for c in r.values():
                if isinstance(c, TruncSeries):
                    vals.append(c.valuation())
        v = min(vals) if vals else 0
        raise NotASummand(f"no unit pivot available; torsion at h-degree {v}")
    return done, pivots


class QuadraticPresentation:
    """Quadratic algebra presented by generators and degree-2 relations."""

    def __init__(self, g: int, parity: Sequence[int], relations: Sequence[Dict[int, object]], ring_order: Optional[int] = None, check: bool = True):
        self.g = g
        self.parity = tuple(parity)
        self.ring_order = ring_order
        self.relations = [dict(r) for r in relations]
        self._components: Dict[int, "GradedComponentBasis"] = {}
        self._mult: Dict[Tuple[int, int], List[Dict[int, object]]] = {}
        if check:
            self._check_relations()

    # -- invariants ----------------------------------------------------

    def _check_relations(self) -> None:
        if self.ring_order is None:
            if len(linalg.row_space_basis(self.relations)) != len(self.relations):
                raise PresentationError("relation vectors are linearly dependent")
        else:
            red = [trunc.reduce_at_zero(r) for r in self.relations]
            if len(linalg.row_space_basis(red)) != len(self.relations):
                raise PresentationError(
                    "relation module is not a direct summand: h=0 reduction drops rank"
                )

    # -- bookkeeping ----------------------------------------------------

    def word_index(self, w: Word) -> int:
        idx = 0
        for a in w:
            idx = idx * self.g + a
        return idx

    def words(self, d: int) -> List[Word]:
        return list(itertools.product(range(self.g), repeat=d))

    def relations_same_module(self, other: "QuadraticPresentation") -> bool:
        if self.g != other.g or self.ring_order != other.ring_order:
            return False
        if self.ring_order is None:
            return linalg.same_row_space(self.relations, other.relations)
        return trunc.submodule_equal(self.relations, other.relations, self.g ** 2, self.ring_order)

    # -- graded components ----------------------------------------------

    def graded_component(self, d: int) -> "GradedComponentBasis":
        if d not in self._components:
            self._components[d] = GradedComponentBasis(self, d)
        return self._components[d]

    def dim(self, d: int) -> int:
        return len(self.graded_component(d).transversal)

    def mult_tables(self, d1: int, d2: int) -> List[Dict[int, object]]:
        """Product A_{d1} x A_{d2} -> A_{d1+d2} on transversal bases.

        Entry [i1 * dim(d2) + i2] is the coordinate vector of the product
        of transversal words i1 and i2 in the degree d1+d2 transversal.
        """
        key = (d1, d2)
        if key not in self._mult:
            b1 = self.graded_component(d1)
            b2 = self.graded_component(d2)
            tgt = self.graded_component(d1 + d2)
            out = []
            for w1 in b1.transversal:
                for w2 in b2.transversal:
                    out.append(tgt.project_word(w1 + w2))
            self._mult[key] = out
        return self._mult[key]

    def __repr__(self):
        ring = "QQ" if self.ring_order is None else f"QQ[h]/(h^{self.ring_order + 1})"
        return f"QuadraticPresentation(g={self.g}, parity={self.parity}, {len(self.relations)} relations over {ring})"


class GradedComponentBasis:
    """Monomial transversal and projection for one graded component."""

    def __init__(self, pres: QuadraticPresentation, d: int):
        self.pres = pres
        self.d = d
        g = pres.g
        nwords = g ** d
        if d < 2:
            self.transversal = pres.words(d)
            self.reduced_rows: List[Dict[int, object]] = []
            self.leading: Dict[int, Dict[int, object]] = {}
        else:
            rows = []
            for ell in range(d - 1):
                for w1 in itertools.product(range(g), repeat=ell):
                    for w2 in itertools.product(range(g), repeat=d - ell - 2):
                        base1 = pres.word_index(w1) * g * g
                        for rel in pres.relations:
                            row: Dict[int, object] = {}
                            for ij, c in rel.items():
                                idx = (base1 + ij) * (g ** (d - ell - 2)) + pres.word_index(w2)
                                row[idx] = row.get(idx, _rzero(pres.ring_order)) + c
                            row = {k: v for k, v in row.items() if v}
                            if row:
                                rows.append(row)
            col_order = list(range(nwords - 1, -1, -1))
            reduced, pivots = unit_pivot_rref(rows, col_order)
            lead = dict(zip(pivots, reduced))
            allwords = pres.words(d)
            self.transversal = [w for w in allwords if pres.word_index(w) not in lead]
            self.reduced_rows = reduced
            self.leading = lead
        self.index_of = {w: i for i, w in enumerate(self.transversal)}

    def project_word(self, w: Word) -> Dict[int, object]:
        """Coordinates of a tensor word in the transversal basis."""
        return self._project({self.pres.word_index(w): _rone(self.pres.ring_order)})

    def _project(self, vec: Dict[int, object]) -> Dict[int, object]:
        if self.leading:
            # one rewriting pass suffices: fully reduced rows relate each
            # leading word to transversal words only
            out: Dict[int, object] = {}
            for idx, c in vec.items():
                row = self.leading.get(idx)
                if row is None:
                    out[idx] = out.get(idx, _rzero(self.pres.ring_order)) + c
                else:
                    for jdx, rc in row.items():
                        if jdx == idx:
                            continue
                        out[jdx] = out.get(jdx, _rzero(self.pres.ring_order)) - c * rc
            vec = {k: v for k, v in out.items() if v}
        coords: Dict[int, object] = {}
        widx = {self.pres.word_index(w): i for i, w in enumerate(self.transversal)}
        for idx, c in vec.items():
            if idx not in widx:
                raise PresentationError("projection produced a non-transversal word")
            coords[widx[idx]] = c
        return coords

    def project_vector(self, vec: Dict[int, object]) -> Dict[int, object]:
        return self._project(dict(vec))


# -- classical presentations -------------------------------------------


def presentation_symmetric(n: int, ring_order: Optional[int] = None) -> QuadraticPresentation:
    """S(V*): even generators, commutation relations x_i x_j - x_j x_i (i<j)."""
    rels = []
    one = _rone(ring_order)
    for i in range(n):
        for j in range(i + 1, n):
            rels.append({i * n + j: one, j * n + i: -one})
    return QuadraticPresentation(n, [0] * n, rels, ring_order)


def presentation_exterior(n: int, ring_order: Optional[int] = None) -> QuadraticPresentation:
    """Lambda(V): odd generators, relations xi_i xi_j + xi_j xi_i and squares."""
    rels = []
    one = _rone(ring_order)
    for i in range(n):
        rels.append({i * n + i: one})
    for i in range(n):
        for j in range(i + 1, n):
            rels.append({i * n + j: one, j * n + i: one})
    return QuadraticPresentation(n, [1] * n, rels, ring_order)


# -- operations ---------------------------------------------------------


def quadratic_dual(p: QuadraticPresentation) -> QuadraticPresentation:
    """Dual presentation: flipped parities, relations = orthogonal complement.

    The pairing is <e_i (x) e_j, e^k (x) e^l> = delta delta; no extra super
    sign is needed to reproduce the classical S(V*) <-> Lambda(V) pair
    (convention ledger).
    """
    g2 = p.g ** 2
    if p.ring_order is None:
        m = SparseMatrix.from_rows(p.relations, g2)
        dual_rels = linalg.kernel_basis(m)
    else:
        entries = {}
        for r, row in enumerate(p.relations):
            for c, x in row.items():
                entries[(r, c)] = x
        span = trunc.trunc_kernel(len(p.relations), g2, entries, p.ring_order)
        try:
            dual_rels = trunc.free_basis_from_spanning(span, g2, p.ring_order)
        except NotASummand as e:
            raise PresentationError(f"dual relation module is not a summand: {e}") from e
    return QuadraticPresentation(p.g, [1 - b for b in p.parity], dual_rels, p.ring_order)


def opposite(p: QuadraticPresentation) -> QuadraticPresentation:
    """Relations transported by e_i (x) e_j -> (-1)^(p_i p_j) e_j (x) e_i."""
    g = p.g
    rels = []
    for r in p.relations:
        row: Dict[int, object] = {}
        for ij, c in r.items():
            i, j = divmod(ij, g)
            sign = -1 if (p.parity[i] * p.parity[j]) % 2 else 1
            idx = j * g + i
            row[idx] = row.get(idx, _rzero(p.ring_order)) + (c if sign > 0 else -c)
        rels.append({k: v for k, v in row.items() if v})
    return QuadraticPresentation(p.g, p.parity, rels, p.ring_order)


def graded_component(p: QuadraticPresentation, d: int) -> GradedComponentBasis:
    return p.graded_component(d)


class KoszulComplexData:
    """Subspaces K_i^i inside the degree-i tensor component and differentials."""

    def __init__(self, pres: QuadraticPresentation, top_degree: int):
        self.pres = pres
        self.top = top_degree
        self.spaces: List[List[Dict[int, object]]] = []
        self._tails: List[List[List[Dict[int, object]]]] = []
        self._build()
        self.verify_d_squared(min(self.top + 2, 6))

    def _build(self) -> None:
        p = self.pres
        g = p.g
        one = _rone(p.ring_order)
        self.spaces.append([{0: one}])  # K_0^0 = A_0
        if self.top >= 1:
            self.spaces.append([{i: one} for i in range(g)])  # K_1^1 = A_1
        if self.top >= 2:
            self.spaces.append([dict(r) for r in p.relations])  # K_2^2 = I
        for i in range(3, self.top + 1):
            prev = self.spaces[i - 1]
            dim = g ** i
            left = []  # basis of K_{i-1} (x) A_1
            for v in prev:
                for j in range(g):
                    left.append({idx * g + j: c for idx, c in v.items()})
            right = []  # basis of A_1^{(x)(i-2)} (x) I
            for w in itertools.product(range(g), repeat=i - 2):
                base = p.word_index(w) * g * g
                for r in p.relations:
                    right.append({base + ij: c for ij, c in r.items()})
            if p.ring_order is None:
                inter = linalg.intersect_row_spaces(left, right, dim)
            else:
                inter = _ts_intersect(left, right, dim, p.ring_order)
            self.spaces.append(inter)
        # first-letter decomposition K_i^i c A_1 (x) K_{i-1}^{i-1}
        self._tails = [[], []]
        for i in range(2, self.top + 1):
            prev = self.spaces[i - 1]
            tails_i = []
            gpow = g ** (i - 1)
            for v in self.spaces[i]:
                per_letter = []
                for j in range(g):
                    tail = {idx - j * gpow: c for idx, c in v.items() if j * gpow <= idx < (j + 1) * gpow}
                    per_letter.append(self._in_basis(tail, prev, gpow))
                tails_i.append(per_letter)
            self._tails.append(tails_i)

    def _in_basis(self, vec: Dict[int, object], basis: Sequence[Dict[int, object]], dim: int) -> Dict[int, object]:
        if not vec:
            return {}
        p = self.pres
        if p.ring_order is None:
            m = SparseMatrix(dim, len(basis))
            for j, b in enumerate(basis):
                for r, c in b.items():
                    m.data[r][j] = c
            sol = linalg.solve_linear(m, vec)
        else:
            entries = {}
            for j, b in enumerate(basis):
                for r, c in b.items():
                    entries[(r, j)] = c
            sol = trunc.trunc_solve(dim, len(basis), entries, vec, p.ring_order)
        if sol is None:
            raise PresentationError("K_i^i vector does not lie in A_1 (x) K_{i-1}")
        return sol

    def space_dim(self, i: int) -> int:
        if 0 <= i < len(self.spaces):
            return len(self.spaces[i])
        return 0

    def component_dim(self, i: int, m: int) -> int:
        """dim of (K_i)_m = A_{m-i} (x) K_i^i."""
        if i < 0 or i >= len(self.spaces) or m < i:
            return 0
        return self.pres.dim(m - i) * len(self.spaces[i])

    def differential(self, i: int, m: int) -> Dict[Tuple[int, int], object]:
        """Matrix of d: (K_i)_m -> (K_{i-1})_m, bases (a-basis x K-basis)."""
        p = self.pres
        out: Dict[Tuple[int, int], object] = {}
        if i < 1 or i >= len(self.spaces) or m < i:
            return out
        asrc = p.graded_component(m - i)
        atgt = p.graded_component(m - i + 1)
        ksrc = self.spaces[i]
        ktgt_len = len(self.spaces[i - 1])
        nm = p.mult_tables(m - i, 1)
        d1 = p.dim(1)
        for s_a in range(len(asrc.transversal)):
            for s_k, v in enumerate(ksrc):
                col = s_a * len(ksrc) + s_k
                if i == 1:
                    # d(a (x) e_j) = a x_j in A, target K_0 has rank 1
                    for j in range(p.g):
                        c0 = v.get(j)
                        if not c0:
                            continue
                        prod = nm[s_a * d1 + j]
                        for t_a, c in prod.items():
                            key = (t_a * ktgt_len + 0, col)
                            out[key] = out.get(key, _rzero(p.ring_order)) + c0 * c
                else:
                    tails = self._tails[i][s_k]
                    for j in range(p.g):
                        tail = tails[j]
                        if not tail:
                            continue
                        prod = nm[s_a * d1 + j]
                        for t_a, ca in prod.items():
                            for t_k, ck in tail.items():
                                key = (t_a * ktgt_len + t_k, col)
                                out[key] = out.get(key, _rzero(p.ring_order)) + ca * ck
        return {k: v for k, v in out.items() if v}

    def verify_d_squared(self, inner_cutoff: int) -> None:
        for m in range(0, inner_cutoff + 1):
            for i in range(2, min(len(self.spaces), m + 1)):
                d_i = self.differential(i, m)
                d_im1 = self.differential(i - 1, m)
                rows = self.component_dim(i - 2, m)
                comp: Dict[Tuple[int, int], object] = {}
                for (r1, c1), x in d_im1.items():
                    for (r2, c2), y in d_i.items():
                        if c1 == r2:
                            key = (r1, c2)
                            comp[key] = comp.get(key, _rzero(self.pres.ring_order)) + x * y
                if any(v for v in comp.values()):
                    raise PresentationError(f"d^2 != 0 at (i={i}, inner={m})")


def _ts_intersect(gens_a, gens_b, dim, order):
    if not gens_a or not gens_b:
        return []
    entries = {}
    for j, v in enumerate(gens_a):
        for r, c in v.items():
            entries[(r, j)] = c
    for j, v in enumerate(gens_b):
        for r, c in v.items():
            entries[(r, len(gens_a) + j)] = -c
    span = trunc.trunc_kernel(dim, len(gens_a) + len(gens_b), entries, order)
    vecs = []
    for kv in span:
        v: Dict[int, object] = {}
        for idx, c in kv.items():
            if idx < len(gens_a):
                for r, x in gens_a[idx].items():
                    cur = v.get(r)
                    cur = c * x if cur is None else cur + c * x
                    if cur:
                        v[r] = cur
                    else:
                        v.pop(r, None)
        if v:
            vecs.append(v)
    try:
        return trunc.free_basis_from_spanning(vecs, dim, order)
    except NotASummand as e:
        raise PresentationError(f"Koszul intersection is not a summand: {e}") from e


def koszul_complex(p: QuadraticPresentation, top_degree: int) -> KoszulComplexData:
    return KoszulComplexData(p, top_degree)


def koszul_acyclicity(k: KoszulComplexData, inner_cutoff: int) -> dict:
    """Cohomology dimensions of the Koszul complex per bigraded component.

    Over the truncated ring, dimensions are QQ-dimensions; the verdict
    normalizes by N+1 (free rank) where applicable.
    """
    p = k.pres
    order = p.ring_order
    unit = 1 if order is None else order + 1
    table = {}
    for m in range(0, inner_cutoff + 1):
        top_i = min(len(k.spaces) - 1, m)
        for i in range(0, top_i + 1):
            dim_i = k.component_dim(i, m)
            if dim_i == 0:
                continue
            d_in = k.differential(i + 1, m) if i + 1 <= top_i else {}
            d_out = k.differential(i, m)
            rank_out = _mat_rank(d_out, k.component_dim(i - 1, m), dim_i, order)
            rank_in = _mat_rank(d_in, dim_i, k.component_dim(i + 1, m), order)
            hdim = dim_i * unit - rank_out - rank_in
            if hdim:
                table[(i, m)] = hdim
    expected = {(0, 0): unit}
    return {
        "cohomology_q_dims": {f"{i},{m}": d for (i, m), d in sorted(table.items())},
        "koszul_up_to_cutoff": table == expected,
        "inner_cutoff": inner_cutoff,
    }


def _mat_rank(entries: Dict[Tuple[int, int], object], rows: int, cols: int, order) -> int:
    if not entries:
        return 0
    if order is None:
        m = SparseMatrix(rows, cols, entries)
        return linalg.rank(m)
    return trunc.ts_matrix_q_rank(rows, cols, entries, order)


def ext_dimensions_via_bar(p: QuadraticPresentation, hom_cutoff: int, inner_cutoff: int) -> dict:
    """Bigraded Ext dims over A from the reduced bar complex Hom(A_+^(x)a, A_0).

    Returns {"a,m": dim Ext^{a,-m}} with QQ-dimensions; over the truncated
    ring free rank = dim / (N+1).
    """
    order = p.ring_order
    comps: Dict[Tuple[int, int], List[Tuple[int, ...]]] = {}
    for a in range(0, hom_cutoff + 2):
        for m in range(0, inner_cutoff + 1):
            comps[(a, m)] = _compositions(m, a)

    def space_dim(a, m):
        return sum(_prod(p.dim(d) for d in comp) for comp in comps[(a, m)])

    def basis_offsets(a, m):
        offs = []
        total = 0
        for comp in comps[(a, m)]:
            offs.append(total)
            total += _prod(p.dim(d) for d in comp)
        return offs, total

    def delta_matrix(a, m):
        """delta: C^{a,m} -> C^{a+1,m} (transpose of adjacent merges)."""
        src_offs, src_dim = basis_offsets(a, m)
        tgt_offs, tgt_dim = basis_offsets(a + 1, m)
        entries: Dict[Tuple[int, int], object] = {}
        # build by evaluating delta(phi) on target basis tuples
        for tci, tcomp in enumerate(comps[(a + 1, m)]):
            dims_t = [p.dim(d) for d in tcomp]
            for tuple_idx in itertools.product(*[range(d) for d in dims_t]):
                row = tgt_offs[tci] + _mixed_radix(tuple_idx, dims_t)
                for i in range(len(tcomp) - 1):
                    merged = tcomp[:i] + (tcomp[i] + tcomp[i + 1],) + tcomp[i + 2:]
                    sci = comps[(a, m)].index(merged) if merged in comps[(a, m)] else None
                    if sci is None:
                        continue
                    prod = p.mult_tables(tcomp[i], tcomp[i + 1])
                    pv = prod[tuple_idx[i] * p.dim(tcomp[i + 1]) + tuple_idx[i + 1]]
                    dims_s = [p.dim(d) for d in merged]
                    sign = -1 if (i + 1) % 2 else 1
                    for bidx, c in pv.items():
                        stuple = tuple_idx[:i] + (bidx,) + tuple_idx[i + 2:]
                        colv = src_offs[sci] + _mixed_radix(stuple, dims_s)
                        key = (row, colv)
                        cur = entries.get(key)
                        add = c if sign > 0 else -c
                        cur = add if cur is None else cur + add
                        if cur:
                            entries[key] = cur
                        else:
                            entries.pop(key, None)
        return entries, src_dim, tgt_dim

    unit = 1 if order is None else order + 1
    table = {}
    rank_cache: Dict[Tuple[int, int], int] = {}

    def rank_of(a, m):
        if (a, m) not in rank_cache:
            entries, sd, td = delta_matrix(a, m)
            rank_cache[(a, m)] = _mat_rank(entries, td, sd, order)
        return rank_cache[(a, m)]

    for a in range(0, hom_cutoff + 1):
        for m in range(0, inner_cutoff + 1):
            dim = space_dim(a, m)
            if dim == 0:
                continue
            qdim = dim * unit if order is not None else dim
            h = qdim - rank_of(a, m) - (rank_of(a - 1, m) if a >= 1 else 0)
            if h:
                table[(a, m)] = h
    return {f"{a},{m}": d for (a, m), d in sorted(table.items())}


def _compositions(m: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 0:
        return [()] if m == 0 else []
    out = []
    for comp in itertools.product(range(1, m + 1), repeat=parts):
        if sum(comp) == m:
            out.append(comp)
    return out


def _prod(xs) -> int:
    out = 1
    for x in xs:
        out *= x
    return out


def _mixed_radix(tup, dims) -> int:
    idx = 0
    for t, d in zip(tup, dims):
        idx = idx * d + t
    return idx


# -- serialization ------------------------------------------------------


def presentation_to_json(p: QuadraticPresentation) -> dict:
    return {
        "ring": "Q" if p.ring_order is None else {"trunc": p.ring_order},
        "generators": [{"name": ("x" if b == 0 else "xi") + str(i), "parity": b} for i, b in enumerate(p.parity)],
        "relations": [
            [trunc.format_coeff(r.get(idx, _rzero(p.ring_order))) for idx in range(p.g ** 2)]
            for r in p.relations
        ],
    }


def presentation_from_json(data: dict) -> QuadraticPresentation:
    ring = data["ring"]
    order = None if ring == "Q" else int(ring["trunc"])
    parity = [int(gspec["parity"]) for gspec in data["generators"]]
    g = len(parity)
    rels = []
    for rv in data["relations"]:
        row = {}
        for idx, c in enumerate(rv):
            cc = trunc.parse_coeff(c, order)
            if cc:
                row[idx] = cc
        rels.append(row)
    return QuadraticPresentation(g, parity, rels, order)
