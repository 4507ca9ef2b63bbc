"""Hochschild complex of the two-object dg category cat(A, B, K).

A = S(V*) (cohomological degree 0), B = Lambda(V) (degree j on Lambda^j,
inner degree counted negatively inside the category), K = the Koszul
bimodule S(V*) (x) Lambda(V*) with basis x^s eta_J, bidegree
(inner m = |s|+|J|, lambda-degree j = |J|) and cohomological degree -j.

A Keller cochain is a triple (psi_A, psi_B, psi_K): pure Hochschild
cochains on A and B plus mixed components B^(x)m1 (x) K (x) A^(x)m2 -> K.
All matrices are stored suspended (same decalage convention as the
hochschild module), so the total differential is the pure brace calculus
[mu_A + mu_B + act + rightmult + d_K, .] with no further sign bookkeeping;
d_tot^2 = 0 and the chain-map property of the projections are verified by
the test suite, which is what pins the five components' signs.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .hochschild import (
    Carrier,
    ExtCarrier,
    GradedCochain,
    PolyCarrier,
    brace,
    cup,
    hoch_differential,
    multiplication_cochain,
    _degree_tuples,
    _mixed_radix,
)
from .linalg import QQ, SparseMatrix
from .superpoly import SuperPolynomial

KDeg = Tuple[int, int]
MixedKey = Tuple[Tuple[int, ...], KDeg, Tuple[int, ...]]
Matrix = Dict[Tuple[int, int], object]


class KoszulBimodule:
    """S(V*) (x) Lambda(V*) with contraction action of Lambda(V)."""

    def __init__(self, n: int, ring_order: Optional[int] = None, trivial: bool = False):
        self.n = n
        self.ring_order = ring_order
        self.trivial = trivial
        self._basis: Dict[KDeg, List[SuperPolynomial]] = {}
        self._index: Dict[KDeg, Dict] = {}

    def __eq__(self, other):
        return (
            type(other) is KoszulBimodule
            and (self.n, self.ring_order, self.trivial) == (other.n, other.ring_order, other.trivial)
        )

    def __hash__(self):
        return hash(("K", self.n, self.ring_order, self.trivial))

    def basis(self, bideg: KDeg) -> List[SuperPolynomial]:
        m, j = bideg
        if self.trivial and bideg != (0, 0):
            return []
        if not (0 <= j <= min(self.n, m)):
            return []
        if bideg not in self._basis:
            out = []
            for js in itertools.combinations(range(self.n), j):
                for xe in sorted(itertools.product(range(m - j + 1), repeat=self.n), reverse=True):
                    if sum(xe) == m - j:
                        out.append(SuperPolynomial.monomial(self.n, xe, js, 1, self.ring_order))
            self._basis[bideg] = out
            self._index[bideg] = {next(iter(b.terms)): i for i, b in enumerate(out)}
        return self._basis[bideg]

    def dim(self, bideg: KDeg) -> int:
        return len(self.basis(bideg))

    def coords(self, p: SuperPolynomial, bideg: KDeg) -> Dict[int, object]:
        self.basis(bideg)
        out = {}
        for mono, c in p.terms.items():
            idx = self._index[bideg].get(mono)
            if idx is None:
                raise ValueError(f"element not in K{bideg}")
            out[idx] = c
        return out

    def coh(self, bideg: KDeg) -> int:
        return -bideg[1]

    def inner(self, bideg: KDeg) -> int:
        return bideg[0]

    def act_b(self, lam: SuperPolynomial, k: SuperPolynomial) -> SuperPolynomial:
        """Left Lambda(V)-action by iterated odd contraction."""
        if self.trivial:
            if lam.deg_lambda() == 0:
                return k.scale(next(iter(lam.terms.values()))) if lam else SuperPolynomial.zero(self.n, self.ring_order)
            return SuperPolynomial.zero(self.n, self.ring_order)
        out = SuperPolynomial.zero(self.n, self.ring_order)
        for (xe, js), c in lam.terms.items():
            t = k
            # highest index contracts first; this makes the action associative
            # over the wedge product in the suspended sign convention
            for p in reversed(js):
                t = t.partial_xi(p)
                if not t:
                    break
            if t:
                out = out + t.scale(c)
        return out

    def act_a(self, k: SuperPolynomial, f: SuperPolynomial) -> SuperPolynomial:
        """Right S(V*)-action by multiplication on the x factor."""
        if self.trivial:
            if f.deg_s() == 0 and not f.deg_lambda():
                return k.scale(next(iter(f.terms.values()))) if f else SuperPolynomial.zero(self.n, self.ring_order)
            return SuperPolynomial.zero(self.n, self.ring_order)
        return k * f

    def d_k(self, k: SuperPolynomial, normalized: bool = False) -> SuperPolynomial:
        """Koszul differential sum_a x_a (contraction by xi_a); optionally /n."""
        if self.trivial:
            return SuperPolynomial.zero(self.n, self.ring_order)
        out = SuperPolynomial.zero(self.n, self.ring_order)
        for a in range(self.n):
            t = k.partial_xi(a)
            if t:
                out = out + SuperPolynomial.x(self.n, a, self.ring_order) * t
        if normalized and out:
            out = out.scale(QQ(1, self.n))
        return out


class MixedCochain:
    """Multilinear map B^(x)m1 (x) K (x) A^(x)m2 -> K per bigraded component."""

    def __init__(self, kc: KoszulBimodule, m1: int, m2: int, inner_shift: int, coh_shift: int, cutoff: int, comps: Optional[Dict[MixedKey, Matrix]] = None):
        self.kc = kc
        self.n = kc.n
        self.m1 = m1
        self.m2 = m2
        self.inner_shift = inner_shift
        self.coh_shift = coh_shift
        self.cutoff = cutoff
        self.acar = PolyCarrier(kc.n, kc.ring_order)
        self.bcar = ExtCarrier(kc.n, kc.ring_order)
        self.comps: Dict[MixedKey, Matrix] = {}
        if comps:
            for key, m in comps.items():
                m = {k: v for k, v in m.items() if v}
                if m:
                    self.comps[key] = m

    @property
    def arity(self) -> int:
        return self.m1 + self.m2 + 1

    @property
    def norm_deg(self) -> int:
        return self.arity + self.coh_shift - 1

    def out_bidegree(self, key: MixedKey) -> KDeg:
        bdegs, (mk, jk), adegs = key
        m_out = sum(adegs) + mk - sum(bdegs) + self.inner_shift
        j_out = jk - sum(bdegs) - self.coh_shift
        return (m_out, j_out)

    def input_cohs(self, key: MixedKey) -> List[int]:
        bdegs, (mk, jk), adegs = key
        return [b for b in bdegs] + [-jk] + [0 for _ in adegs]

    def keys_iter(self, cutoff: Optional[int] = None):
        cutoff = self.cutoff if cutoff is None else cutoff
        n = self.n
        for bdegs in itertools.product(range(0, n + 1), repeat=self.m1):
            for adegs_total in range(0, cutoff + 1):
                for adegs in _degree_tuples(self.m2, adegs_total):
                    for mk in range(0, cutoff - adegs_total + 1):
                        for jk in range(0, min(n, mk) + 1):
                            yield (tuple(bdegs), (mk, jk), tuple(adegs))

    def size_of(self, key: MixedKey) -> int:
        """Window size of a source: A-degrees plus the K inner degree.

        B-degrees are bounded by n and the left action only lowers the K
        degree, so excluding them keeps the truncation differential-closed.
        """
        bdegs, kdeg, adegs = key
        return kdeg[0] + sum(adegs)

    def component(self, key: MixedKey) -> Matrix:
        return self.comps.get(key, {})

    def col_dims(self, key: MixedKey) -> List[int]:
        bdegs, kdeg, adegs = key
        return [self.bcar.dim(b) for b in bdegs] + [self.kc.dim(kdeg)] + [self.acar.dim(a) for a in adegs]

    def suspension_twist(self, key: MixedKey) -> int:
        cohs = self.input_cohs(key)
        p = len(cohs)
        e = sum((p - j) * c for j, c in enumerate(cohs, start=1))
        return -1 if e % 2 else 1

    # -- linear structure --------------------------------------------------

    def _compat(self, other: "MixedCochain"):
        if (self.m1, self.m2, self.inner_shift, self.coh_shift) != (other.m1, other.m2, other.inner_shift, other.coh_shift):
            raise ValueError("mixed cochain shape mismatch")
        if self.kc != other.kc:
            raise ValueError("mixed cochains over different bimodules")

    def __add__(self, other: "MixedCochain") -> "MixedCochain":
        self._compat(other)
        cutoff = min(self.cutoff, other.cutoff)
        out: Dict[MixedKey, Matrix] = {}
        keys = {k for k in self.comps if self.size_of(k) <= cutoff} | {k for k in other.comps if other.size_of(k) <= cutoff}
        for key in keys:
            m = dict(self.comps.get(key, {}))
            for kk, v in other.comps.get(key, {}).items():
                s = m.get(kk)
                s = v if s is None else s + v
                if s:
                    m[kk] = s
                else:
                    m.pop(kk, None)
            if m:
                out[key] = m
        return MixedCochain(self.kc, self.m1, self.m2, self.inner_shift, self.coh_shift, cutoff, out)

    def scale(self, c) -> "MixedCochain":
        if not c:
            return MixedCochain(self.kc, self.m1, self.m2, self.inner_shift, self.coh_shift, self.cutoff, {})
        return MixedCochain(
            self.kc, self.m1, self.m2, self.inner_shift, self.coh_shift, self.cutoff,
            {key: {kk: v * c for kk, v in m.items()} for key, m in self.comps.items()},
        )

    def __neg__(self):
        return self.scale(QQ(-1))

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.comps

    def __eq__(self, other):
        if not isinstance(other, MixedCochain):
            return NotImplemented
        if (self.m1, self.m2, self.inner_shift, self.coh_shift) != (other.m1, other.m2, other.inner_shift, other.coh_shift):
            return False
        bound = min(self.cutoff, other.cutoff)
        for key in set(self.comps) | set(other.comps):
            if self.size_of(key) > bound:
                continue
            if self.comps.get(key, {}) != other.comps.get(key, {}):
                return False
        return True

    def __repr__(self):
        nz = sum(len(m) for m in self.comps.values())
        return f"MixedCochain(m1={self.m1}, m2={self.m2}, s={self.inner_shift}, t={self.coh_shift}, nnz={nz})"


def _compositions_pos(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 0:
        return [()] if total == 0 else []
    out = []
    for head in range(1, total - parts + 2):
        for rest in _compositions_pos(total - head, parts - 1):
            out.append((head,) + rest)
    return out


def mixed_from_value(kc: KoszulBimodule, m1: int, m2: int, inner_shift: int, coh_shift: int, cutoff: int, fn: Callable) -> MixedCochain:
    """Materialize a mixed cochain from fn(lams, k, fs) -> K-element."""
    proto = MixedCochain(kc, m1, m2, inner_shift, coh_shift, cutoff)
    acar, bcar = proto.acar, proto.bcar
    comps: Dict[MixedKey, Matrix] = {}
    seen = set()
    for key in proto.keys_iter():
        if key in seen:
            continue
        seen.add(key)
        if proto.size_of(key) > cutoff:
            continue
        bdegs, kdeg, adegs = key
        out_bd = proto.out_bidegree(key)
        if kc.dim(out_bd) == 0:
            continue
        dims = proto.col_dims(key)
        if any(d == 0 for d in dims):
            continue
        tw = proto.suspension_twist(key)
        mat: Matrix = {}
        for col_tuple in itertools.product(*[range(d) for d in dims]):
            lams = [bcar.basis(b)[i] for b, i in zip(bdegs, col_tuple[:m1])]
            kel = kc.basis(kdeg)[col_tuple[m1]]
            fs = [acar.basis(a)[i] for a, i in zip(adegs, col_tuple[m1 + 1:])]
            val = fn(lams, kel, fs)
            if not val:
                continue
            col = _mixed_radix(col_tuple, dims)
            for row, c in kc.coords(val, out_bd).items():
                mat[(row, col)] = c if tw > 0 else -c
        if mat:
            comps[key] = mat
    return MixedCochain(kc, m1, m2, inner_shift, coh_shift, cutoff, comps)


# -- structure blocks -------------------------------------------------------


_BLOCK_CACHE: Dict[tuple, MixedCochain] = {}


def _act_block(kc: KoszulBimodule, cutoff: int) -> MixedCochain:
    """mu_BK: (lambda, k) -> lambda . k as a (1,0) mixed cochain."""
    key = ("act", kc, cutoff)
    if key not in _BLOCK_CACHE:
        _BLOCK_CACHE[key] = mixed_from_value(kc, 1, 0, 0, 0, cutoff, lambda lams, k, fs: kc.act_b(lams[0], k))
    return _BLOCK_CACHE[key]


def _mult_block(kc: KoszulBimodule, cutoff: int) -> MixedCochain:
    """mu_KA: (k, f) -> k . f as a (0,1) mixed cochain."""
    key = ("mult", kc, cutoff)
    if key not in _BLOCK_CACHE:
        _BLOCK_CACHE[key] = mixed_from_value(kc, 0, 1, 0, 0, cutoff, lambda lams, k, fs: kc.act_a(k, fs[0]))
    return _BLOCK_CACHE[key]


def _dk_block(kc: KoszulBimodule, cutoff: int, normalized: bool) -> MixedCochain:
    key = ("dk", kc, cutoff, normalized)
    if key not in _BLOCK_CACHE:
        _BLOCK_CACHE[key] = mixed_from_value(kc, 0, 0, 0, 1, cutoff, lambda lams, k, fs: kc.d_k(k, normalized))
    return _BLOCK_CACHE[key]


# -- single typed insertions -------------------------------------------------


def _insert_mixed_into_mixed(f: MixedCochain, g: MixedCochain) -> MixedCochain:
    """f{g} where g's output (a K) fills f's K slot."""
    kc = f.kc
    m1, m2 = f.m1 + g.m1, f.m2 + g.m2
    shift = f.inner_shift + g.inner_shift
    tshift = f.coh_shift + g.coh_shift
    cutoff = min(f.cutoff, g.cutoff)
    res = MixedCochain(kc, m1, m2, shift, tshift, cutoff)
    comps: Dict[MixedKey, Matrix] = {}
    for key in list(res.keys_iter()):
        bdegs, kdeg, adegs = key
        gkey = (bdegs[f.m1:], kdeg, adegs[: g.m2])
        gproto = MixedCochain(kc, g.m1, g.m2, g.inner_shift, g.coh_shift, g.cutoff)
        if gproto.size_of(gkey) > g.cutoff:
            continue
        gmat = g.component(gkey)
        if not gmat:
            continue
        g_out = gproto.out_bidegree(gkey)
        fkey = (bdegs[: f.m1], g_out, adegs[g.m2:])
        fproto = MixedCochain(kc, f.m1, f.m2, f.inner_shift, f.coh_shift, f.cutoff)
        if fproto.size_of(fkey) > f.cutoff:
            continue
        fmat = f.component(fkey)
        if not fmat:
            continue
        # Koszul sign: ||g|| times suspended degree of the prefix (f's B args)
        eps = g.norm_deg * sum(b - 1 for b in bdegs[: f.m1])
        sign = -1 if eps % 2 else 1
        comps_key = _compose_mixed(res, key, fproto, fkey, fmat, gmat, f.m1, g.m1 + 1 + g.m2, sign)
        if comps_key:
            comps[key] = comps_key
    return MixedCochain(kc, m1, m2, shift, tshift, cutoff, comps)


def _compose_mixed(res: MixedCochain, key: MixedKey, fproto: MixedCochain, fkey: MixedKey, fmat: Matrix, gmat: Matrix, g_start: int, g_len: int, sign: int) -> Matrix:
    """Contract g's output into the argument slot g_start of f (sparse)."""
    dims = res.col_dims(key)
    fdims = fproto.col_dims(fkey)
    gdims = dims[g_start: g_start + g_len]
    # g entries grouped by output row
    g_by_row: Dict[int, List[Tuple[int, object]]] = {}
    for (r, cc), v in gmat.items():
        g_by_row.setdefault(r, []).append((cc, v))
    out: Matrix = {}
    pre_dims = fdims[:g_start]
    post_dims = fdims[g_start + 1:]
    for (row, fcol), fv in fmat.items():
        digits = _unrank_mixed(fcol, fdims)
        gr = digits[g_start]
        hits = g_by_row.get(gr)
        if not hits:
            continue
        pre = digits[:g_start]
        post = digits[g_start + 1:]
        for gcol, gv in hits:
            gdigits = _unrank_mixed(gcol, gdims)
            col = _mixed_radix(list(pre) + list(gdigits) + list(post), dims)
            add = fv * gv
            if sign < 0:
                add = -add
            cur = out.get((row, col))
            cur = add if cur is None else cur + add
            if cur:
                out[(row, col)] = cur
            else:
                out.pop((row, col), None)
    return out


def _unrank_mixed(idx: int, dims: Sequence[int]) -> Tuple[int, ...]:
    out = []
    for d in reversed(dims):
        out.append(idx % d)
        idx //= d
    return tuple(reversed(out))


def _insert_pure_into_mixed(f: MixedCochain, g: GradedCochain, side: str) -> MixedCochain:
    """f{g} with g a pure cochain inserted into one of f's A- or B-slots."""
    kc = f.kc
    if side == "A":
        m1, m2 = f.m1, f.m2 + g.arity - 1
    else:
        m1, m2 = f.m1 + g.arity - 1, f.m2
    shift = f.inner_shift + (g.inner_shift if side == "A" else -g.inner_shift)
    tshift = f.coh_shift + (0 if side == "A" else g.inner_shift)
    cutoff = min(f.cutoff, g.cutoff)
    res = MixedCochain(kc, m1, m2, shift, tshift, cutoff)
    fproto = MixedCochain(kc, f.m1, f.m2, f.inner_shift, f.coh_shift, f.cutoff)
    comps: Dict[MixedKey, Matrix] = {}
    nslots = f.m2 if side == "A" else f.m1
    for key in res.keys_iter():
        bdegs, kdeg, adegs = key
        total: Matrix = {}
        for slot in range(nslots):
            if side == "A":
                gdegs = adegs[slot: slot + g.arity]
                gout = sum(gdegs) + g.inner_shift
                if gout < 0:
                    continue
                fkey = (bdegs, kdeg, adegs[:slot] + (gout,) + adegs[slot + g.arity:])
                g_start = m1 + 1 + slot
            else:
                gdegs = bdegs[slot: slot + g.arity]
                gout = sum(gdegs) + g.inner_shift
                if gout < 0 or gout > kc.n:
                    continue
                fkey = (bdegs[:slot] + (gout,) + bdegs[slot + g.arity:], kdeg, adegs)
                g_start = slot
            if sum(gdegs) > g.cutoff or fproto.size_of(fkey) > f.cutoff:
                continue
            gmat = g.component(tuple(gdegs))
            fmat = f.component(fkey)
            if not gmat or not fmat:
                continue
            cohs = res.input_cohs(key)
            eps = g.norm_deg * sum(c - 1 for c in cohs[:g_start])
            sign = -1 if eps % 2 else 1
            part = _compose_mixed(res, key, fproto, fkey, fmat, gmat, g_start, g.arity, sign)
            for kk, v in part.items():
                cur = total.get(kk)
                cur = v if cur is None else cur + v
                if cur:
                    total[kk] = cur
                else:
                    total.pop(kk, None)
        if total:
            comps[key] = total
    return MixedCochain(kc, m1, m2, shift, tshift, cutoff, comps)


def _leak_A(psi_A: GradedCochain, kc: KoszulBimodule, cutoff: int) -> MixedCochain:
    """mu_KA{psi_A}: the (0, p) boundary component of d(psi_A)."""
    mult = _mult_block(kc, cutoff + max(0, psi_A.inner_shift))
    out = _insert_pure_into_mixed(mult, psi_A, "A")
    out.cutoff = min(out.cutoff, cutoff)
    return out


def _leak_B(psi_B: GradedCochain, kc: KoszulBimodule, cutoff: int) -> MixedCochain:
    """mu_BK{psi_B}: the (p, 0) boundary component of d(psi_B)."""
    act = _act_block(kc, cutoff + kc.n)
    out = _insert_pure_into_mixed(act, psi_B, "B")
    out.cutoff = min(out.cutoff, cutoff)
    return out


def _mixed_differential(psi: MixedCochain, normalized_dk: bool, include_faces: bool = True, include_dk: bool = True) -> Dict[Tuple[int, int], MixedCochain]:
    """[D_cat, psi] split by target (m1, m2); D_cat = act + mult + d_K.

    The face part (act/mult/mu insertions) and the inner Koszul part can
    be selected separately for the identity checks of the section-six
    battery.
    """
    kc = psi.kc
    cutoff = psi.cutoff
    # structure blocks need room for psi's output bidegrees
    ext = cutoff + max(0, psi.inner_shift) + kc.n
    sign_psi = -1 if psi.norm_deg % 2 else 1
    out: Dict[Tuple[int, int], MixedCochain] = {}

    def accumulate(block: MixedCochain, factor: int):
        keyt = (block.m1, block.m2)
        blk = block if factor > 0 else -block
        if keyt in out:
            out[keyt] = out[keyt] + blk
        else:
            out[keyt] = blk

    if include_faces:
        act = _act_block(kc, ext)
        mult = _mult_block(kc, ext)
        accumulate(_insert_mixed_into_mixed(act, psi), 1)
        accumulate(_insert_mixed_into_mixed(mult, psi), 1)
        accumulate(_insert_mixed_into_mixed(psi, act), -sign_psi)
        accumulate(_insert_mixed_into_mixed(psi, mult), -sign_psi)
        if psi.m2:
            accumulate(_insert_pure_into_mixed(psi, multiplication_cochain(psi.acar, cutoff), "A"), -sign_psi)
        if psi.m1:
            accumulate(_insert_pure_into_mixed(psi, multiplication_cochain(psi.bcar, cutoff), "B"), -sign_psi)
    if include_dk:
        dk = _dk_block(kc, ext, normalized_dk)
        accumulate(_insert_mixed_into_mixed(dk, psi), 1)
        accumulate(_insert_mixed_into_mixed(psi, dk), -sign_psi)
    return {k: v for k, v in out.items() if not v.is_zero()}


class KellerCochain:
    """Triple (psi_A, psi_B, psi_K) of components of a category cochain."""

    def __init__(self, kc: KoszulBimodule, psi_A: Optional[GradedCochain] = None, psi_B: Optional[GradedCochain] = None, psi_K: Optional[Sequence[MixedCochain]] = None):
        self.kc = kc
        self.psi_A = psi_A
        self.psi_B = psi_B
        self.psi_K: Dict[Tuple[int, int, int, int], MixedCochain] = {}
        for blk in psi_K or []:
            key = (blk.m1, blk.m2, blk.inner_shift, blk.coh_shift)
            if key in self.psi_K:
                self.psi_K[key] = self.psi_K[key] + blk
            else:
                self.psi_K[key] = blk

    def total_differential(self, normalized_dk: bool = False) -> "KellerCochain":
        kc = self.kc
        dA = hoch_differential(self.psi_A) if self.psi_A is not None else None
        dB = hoch_differential(self.psi_B) if self.psi_B is not None else None
        blocks: List[MixedCochain] = []
        if self.psi_A is not None:
            blocks.append(_leak_A(self.psi_A, kc, self.psi_A.cutoff))
        if self.psi_B is not None:
            blocks.append(_leak_B(self.psi_B, kc, self.psi_B.cutoff))
        for blk in self.psi_K.values():
            blocks.extend(_mixed_differential(blk, normalized_dk).values())
        return KellerCochain(kc, dA, dB, [b for b in blocks if not b.is_zero()])

    def is_zero(self) -> bool:
        za = self.psi_A is None or self.psi_A.is_zero()
        zb = self.psi_B is None or self.psi_B.is_zero()
        zk = all(b.is_zero() for b in self.psi_K.values())
        return za and zb and zk

    def __add__(self, other: "KellerCochain") -> "KellerCochain":
        def add_opt(x, y):
            if x is None:
                return y
            if y is None:
                return x
            return x + y

        return KellerCochain(
            self.kc,
            add_opt(self.psi_A, other.psi_A),
            add_opt(self.psi_B, other.psi_B),
            list(self.psi_K.values()) + list(other.psi_K.values()),
        )

    def scale(self, c) -> "KellerCochain":
        return KellerCochain(
            self.kc,
            self.psi_A.scale(c) if self.psi_A is not None else None,
            self.psi_B.scale(c) if self.psi_B is not None else None,
            [b.scale(c) for b in self.psi_K.values()],
        )

    def __sub__(self, other):
        return self + other.scale(QQ(-1))


def project_A(c: KellerCochain) -> Optional[GradedCochain]:
    return c.psi_A


def project_B(c: KellerCochain) -> Optional[GradedCochain]:
    return c.psi_B


def cat_cup(c1: KellerCochain, c2: KellerCochain) -> KellerCochain:
    """Strict cup on the category: compose prefix and suffix through mu_cat.

    Components: A u A, B u B, B-prefix into a mixed suffix (through the
    left action) and mixed prefix with A-suffix (through the right action).
    """
    kc = c1.kc
    pa = cup(c1.psi_A, c2.psi_A) if (c1.psi_A is not None and c2.psi_A is not None) else None
    pb = cup(c1.psi_B, c2.psi_B) if (c1.psi_B is not None and c2.psi_B is not None) else None
    blocks: List[MixedCochain] = []
    # mixed (x) pure-A through mu_KA
    if c2.psi_A is not None:
        for blk in c1.psi_K.values():
            cutoff = min(blk.cutoff, c2.psi_A.cutoff)
            mult = _mult_block(kc, cutoff)
            step = _insert_mixed_into_mixed(mult, blk)
            blocks.append(_insert_pure_into_mixed(step, c2.psi_A, "A"))
    # pure-B (x) mixed through mu_BK
    if c1.psi_B is not None:
        for blk in c2.psi_K.values():
            cutoff = min(blk.cutoff, c1.psi_B.cutoff)
            act = _act_block(kc, cutoff)
            step = _insert_mixed_into_mixed(act, blk)
            blocks.append(_insert_pure_into_mixed(step, c1.psi_B, "B"))
    return KellerCochain(kc, pa, pb, [b for b in blocks if not b.is_zero()])


def cat_brace(f: KellerCochain, g: KellerCochain) -> KellerCochain:
    """Single brace f{g} on the category (sum over typed insertions)."""
    kc = f.kc
    pa = brace(f.psi_A, [g.psi_A]) if (f.psi_A is not None and g.psi_A is not None and f.psi_A.arity >= 1) else None
    pb = brace(f.psi_B, [g.psi_B]) if (f.psi_B is not None and g.psi_B is not None and f.psi_B.arity >= 1) else None
    blocks: List[MixedCochain] = []
    for blk in f.psi_K.values():
        if g.psi_A is not None and blk.m2:
            blocks.append(_insert_pure_into_mixed(blk, g.psi_A, "A"))
        if g.psi_B is not None and blk.m1:
            blocks.append(_insert_pure_into_mixed(blk, g.psi_B, "B"))
        for gblk in g.psi_K.values():
            blocks.append(_insert_mixed_into_mixed(blk, gblk))
    return KellerCochain(kc, pa, pb, [b for b in blocks if not b.is_zero()])


# -- windowed complexes: admissibility and cone checks ------------------------


class CatWindow:
    """Finite truncation of the graded Hochschild complex of cat(A, B, K).

    Entries are elementary matrix cells of reduced cochains (argument
    degrees >= 1) with source size bounded by ``window``.  The truncation
    is closed under the differential in the sense that every stored
    target component is computed completely from stored sources, so slot
    cohomology within the arity interior is exact for the truncation.

    ``tower``: None for the full complex, "A" for the Hom(K (x) T(A_+), K)
    tower (left action faces dropped), "B" for the mirror tower.
    """

    def __init__(self, kc: KoszulBimodule, arity_max: int, window: int, tower: Optional[str] = None, normalized_dk: bool = False, out_extra: int = 0, fixed_b: Optional[Tuple[int, ...]] = None):
        self.kc = kc
        self.n = kc.n
        self.arity_max = arity_max
        self.window = window
        self.tower = tower
        self.normalized_dk = normalized_dk
        self.out_max = window + out_extra
        self.fixed_b = fixed_b
        self.acar = PolyCarrier(kc.n, kc.ring_order)
        self.bcar = ExtCarrier(kc.n, kc.ring_order)
        self.entries: List[tuple] = []
        self._enumerate()
        self.index = {e: i for i, e in enumerate(self.entries)}
        self._dcols: Optional[Dict[int, Dict[int, QQ]]] = None

    # -- entry labels ---------------------------------------------------

    def _enumerate(self) -> None:
        n, w = self.n, self.window
        if self.tower is None:
            for p in range(0, self.arity_max + 1):
                for degs in itertools.product(range(1, w + 1), repeat=p):
                    if sum(degs) > w:
                        continue
                    dims = [self.acar.dim(d) for d in degs]
                    cols = 1
                    for d in dims:
                        cols *= d
                    for out in range(0, self.out_max + 1):
                        for row in range(self.acar.dim(out)):
                            for col in range(cols):
                                self.entries.append(("A", degs, out, row, col))
                for degs in itertools.product(range(1, n + 1), repeat=p):
                    dims = [self.bcar.dim(d) for d in degs]
                    cols = 1
                    for d in dims:
                        cols *= d
                    for out in range(0, n + 1):
                        for row in range(self.bcar.dim(out)):
                            for col in range(cols):
                                self.entries.append(("B", degs, out, row, col))
        # K blocks: the window bounds the A-direction size sum(a) + m_K and
        # the output inner degree; B-degrees are finite (<= n) and excluded
        # from the size so that the left-action faces stay inside the window.
        for p in range(0, self.arity_max + 1):
            for m1 in range(0, p):
                m2 = p - 1 - m1
                if self.tower == "A" and self.fixed_b is None and m1 != 0:
                    continue
                if self.tower == "A" and self.fixed_b is not None and m1 != len(self.fixed_b):
                    continue
                if self.tower == "B" and m2 != 0:
                    continue
                proto = MixedCochain(self.kc, m1, m2, 0, 0, self.window)
                b_range = [self.fixed_b] if self.fixed_b is not None else list(itertools.product(range(1, n + 1), repeat=m1))
                for bdegs in b_range:
                    for atot in range(m2, w + 1):
                        for adegs in _compositions_pos(atot, m2):
                            for mk in range(0, w - atot + 1):
                                for jk in range(0, min(n, mk) + 1):
                                    key = (tuple(bdegs), (mk, jk), tuple(adegs))
                                    dims = proto.col_dims(key)
                                    if any(d == 0 for d in dims):
                                        continue
                                    cols = 1
                                    for d in dims:
                                        cols *= d
                                    for om in range(0, self.out_max + 1):
                                        for oj in range(0, min(n, om) + 1):
                                            for row in range(self.kc.dim((om, oj))):
                                                for col in range(cols):
                                                    self.entries.append(("K", m1, m2, key, (om, oj), row, col))

    def slot(self, e: tuple) -> Tuple[int, int]:
        """(total degree T, inner shift s) of an elementary entry."""
        if e[0] == "A":
            _, degs, out, _, _ = e
            return (len(degs), out - sum(degs))
        if e[0] == "B":
            _, degs, out, _, _ = e
            t = out - sum(degs)
            return (len(degs) + t, -t)
        _, m1, m2, key, (om, oj), _, _ = e
        bdegs, (mk, jk), adegs = key
        s = om - (sum(adegs) + mk - sum(bdegs))
        t = (-oj) - (sum(bdegs) - jk)
        return (m1 + m2 + 1 + t, s)

    def arity_of(self, e: tuple) -> int:
        if e[0] in ("A", "B"):
            return len(e[1])
        return e[1] + e[2] + 1

    # -- differential -----------------------------------------------------

    def _cochain_of(self, e: tuple):
        if e[0] == "A":
            _, degs, out, row, col = e
            shift = out - sum(degs)
            return GradedCochain(self.acar, len(degs), shift, self.out_max, {degs: {(row, col): QQ(1)}})
        if e[0] == "B":
            _, degs, out, row, col = e
            shift = out - sum(degs)
            return GradedCochain(self.bcar, len(degs), shift, self.out_max, {degs: {(row, col): QQ(1)}})
        _, m1, m2, key, obd, row, col = e
        bdegs, (mk, jk), adegs = key
        s = obd[0] - (sum(adegs) + mk - sum(bdegs))
        t = (-obd[1]) - (sum(bdegs) - jk)
        return MixedCochain(self.kc, m1, m2, s, t, self.window, {key: {(row, col): QQ(1)}})

    def _read_graded(self, c: GradedCochain, kind: str, out_map: Dict[int, QQ]):
        for degs, mat in c.comps.items():
            for (row, col), v in mat.items():
                out = sum(degs) + c.inner_shift
                lab = (kind, degs, out, row, col)
                i = self.index.get(lab)
                if i is not None:
                    out_map[i] = out_map.get(i, QQ(0)) + v

    def _read_mixed(self, blk: MixedCochain, out_map: Dict[int, QQ]):
        for key, mat in blk.comps.items():
            obd = blk.out_bidegree(key)
            for (row, col), v in mat.items():
                lab = ("K", blk.m1, blk.m2, key, obd, row, col)
                i = self.index.get(lab)
                if i is not None:
                    out_map[i] = out_map.get(i, QQ(0)) + v

    def d_column(self, j: int) -> Dict[int, QQ]:
        if self._dcols is None:
            self._dcols = {}
        if j in self._dcols:
            return self._dcols[j]
        e = self.entries[j]
        image: Dict[int, QQ] = {}
        if self.arity_of(e) < self.arity_max:
            c = self._cochain_of(e)
            if e[0] == "A":
                self._read_graded(hoch_differential(c), "A", image)
                if self.tower is None:
                    self._read_mixed(_leak_A(c, self.kc, self.window), image)
            elif e[0] == "B":
                self._read_graded(hoch_differential(c), "B", image)
                if self.tower is None:
                    self._read_mixed(_leak_B(c, self.kc, self.window), image)
            else:
                blocks = _mixed_differential(c, self.normalized_dk)
                keep_m1 = len(self.fixed_b) if self.fixed_b is not None else 0
                for (tm1, tm2), blk in blocks.items():
                    if self.tower == "A" and tm1 != keep_m1:
                        continue
                    if self.tower == "B" and tm2 != 0:
                        continue
                    self._read_mixed(blk, image)
        image = {i: v for i, v in image.items() if v}
        self._dcols[j] = image
        return image

    # -- slot cohomology ---------------------------------------------------

    def slot_spaces(self) -> Dict[Tuple[int, int], List[int]]:
        slots: Dict[Tuple[int, int], List[int]] = {}
        for i, e in enumerate(self.entries):
            slots.setdefault(self.slot(e), []).append(i)
        return slots

    def slot_matrix(self, src: Sequence[int], tgt: Sequence[int]) -> SparseMatrix:
        tpos = {i: r for r, i in enumerate(tgt)}
        m = SparseMatrix(len(tgt), len(src))
        for cpos, j in enumerate(src):
            for i, v in self.d_column(j).items():
                r = tpos.get(i)
                if r is not None:
                    m.data[r][cpos] = v
        return m

    def cohomology_dims(self, t_max: int) -> Dict[Tuple[int, int], int]:
        slots = self.slot_spaces()
        dims: Dict[Tuple[int, int], int] = {}
        for (T, s), idxs in sorted(slots.items()):
            if T > t_max:
                continue
            prev = slots.get((T - 1, s), [])
            nxt = slots.get((T + 1, s), [])
            rank_in = linalg.rank(self.slot_matrix(prev, idxs)) if prev else 0
            rank_out = linalg.rank(self.slot_matrix(idxs, nxt)) if nxt else 0
            h = len(idxs) - rank_in - rank_out
            if h:
                dims[(T, s)] = h
        return dims

    def class_rank(self, vectors: Sequence[Dict[int, QQ]], slot_key: Tuple[int, int]) -> int:
        """Rank of the given cocycle vectors modulo coboundaries in a slot."""
        slots = self.slot_spaces()
        idxs = slots.get(slot_key, [])
        prev = slots.get((slot_key[0] - 1, slot_key[1]), [])
        pos = {i: r for r, i in enumerate(idxs)}
        rows = []
        if prev:
            m = self.slot_matrix(prev, idxs)
            for j in range(m.cols):
                rowv = {}
                for r in range(m.rows):
                    x = m.data[r].get(j)
                    if x:
                        rowv[r] = x
                if rowv:
                    rows.append(rowv)
        base = linalg.row_space_basis(rows)
        base_rank = len(base)
        allrows = list(rows)
        for v in vectors:
            allrows.append({pos[i]: x for i, x in v.items() if i in pos})
        return len(linalg.row_space_basis(allrows)) - base_rank


def keller_admissibility(n: int, inner_window: int = 3, arity_max: int = 3, trivial_k: bool = False, ring_order: Optional[int] = None) -> dict:
    """Windowed verification that (S(V*), Lambda(V), K) is Keller-admissible.

    For each side the one-sided bar tower computing RHom is assembled in
    the window; the report compares slot cohomology with the partner's
    graded dimensions AND checks that the classes induced by the actual
    action operators span the cohomology (Definition-level check: for the
    scalar bimodule the sizes still match, only the action map fails).
    """
    kc = KoszulBimodule(n, ring_order, trivial=trivial_k)
    acar = PolyCarrier(n, ring_order)
    bcar = ExtCarrier(n, ring_order)
    report = {"n": n, "window": inner_window, "arity_max": arity_max, "trivial_k": trivial_k, "sides": {}}
    ok_all = True

    # A side: H(Hom(K (x) T(A_+), K)) vs B = Lambda(V).  The Hochschild
    # arity counts the K slot, so the class of xi_J (an arity-1 operator of
    # cohomological shift +j) sits at slot (T, s) = (j + 1, -j).
    win = CatWindow(kc, arity_max, inner_window, tower="A")
    dims = win.cohomology_dims(t_max=arity_max - 1)
    side = {"computed": {f"{T},{s}": d for (T, s), d in sorted(dims.items())}, "checks": []}
    for j in range(0, n + 1):
        if j + 2 > arity_max:
            side["checks"].append({"slot": f"{j + 1},{-j}", "skipped": "window too small"})
            continue
        expected = len(list(itertools.combinations(range(n), j)))
        got = dims.get((j + 1, -j), 0)
        # action classes: iterated contraction operators for each basis xi_J
        vectors = []
        for js in itertools.combinations(range(n), j):
            lam = SuperPolynomial.monomial(n, (0,) * n, js, 1, ring_order)
            op = mixed_from_value(kc, 0, 0, -j, j, inner_window, lambda lams, k, fs, _l=lam: kc.act_b(_l, k))
            vec: Dict[int, QQ] = {}
            for key, mat in op.comps.items():
                obd = op.out_bidegree(key)
                for (row, col), v in mat.items():
                    i = win.index.get(("K", 0, 0, key, obd, row, col))
                    if i is not None:
                        vec[i] = v
            vectors.append(vec)
        crank = win.class_rank(vectors, (j + 1, -j))
        passed = got == expected and crank == expected
        ok_all = ok_all and passed
        side["checks"].append({"slot": f"{j + 1},{-j}", "expected_dim": expected, "computed_dim": got, "action_class_rank": crank, "pass": passed})
    report["sides"]["A"] = side

    # B side: R_A: A^opp -> RHom_{B-mod}(K, K).  The bigraded slots of the
    # two-sided bar tower are infinite dimensional in the B direction, so
    # the finite verification is staged: (a) K resolves the trivial module
    # (windowed column exactness), (b) the abstract RHom dimensions equal
    # dim S_deg, computed exactly from the reduced bar complex of Lambda(V),
    # and (c) the right-multiplication classes have full rank in the finite
    # complex Hom_{B-mod}(K, K) (K is B-free), which is where the scalar
    # bimodule control fails.
    from .quadalg import ext_dimensions_via_bar, presentation_exterior

    side_b = {"checks": []}
    kcol = _k_column_exactness(kc, inner_window)
    side_b["k_resolves_scalars"] = kcol
    ok_all = ok_all and kcol["pass"]
    max_s = max(0, inner_window - 1)
    ext_table = ext_dimensions_via_bar(presentation_exterior(n, ring_order), max_s, max_s)
    bwin = BLinearWindow(kc, inner_window)
    for deg in range(0, max_s + 1):
        expected = acar.dim(deg)
        abstract = ext_table.get(f"{deg},{deg}", 0)
        if ring_order is not None:
            abstract //= ring_order + 1
        vectors = [bwin.right_mult_vector(acar.basis(deg)[bidx], deg) for bidx in range(acar.dim(deg))]
        crank = bwin.class_rank(vectors, (0, deg))
        passed = abstract == expected and crank == expected
        ok_all = ok_all and passed
        side_b["checks"].append({"slot": f"0,{deg}", "expected_dim": expected, "abstract_rhom_dim": abstract, "action_class_rank": crank, "pass": passed})
    report["sides"]["B"] = side_b
    report["pass"] = ok_all
    return report


def _k_column_exactness(kc: KoszulBimodule, window: int) -> dict:
    """H(K, d_K) within the window: scalars at (0,0) and nothing else."""
    table = {}
    for m in range(0, window + 1):
        for j in range(0, min(kc.n, m) + 1):
            dim = kc.dim((m, j))
            if dim == 0:
                continue
            # d_K: (m, j) -> (m, j-1)
            def dmat(j1):
                rows = []
                tgt = (m, j1 - 1)
                for b in kc.basis((m, j1)):
                    img = kc.d_k(b)
                    rows.append(kc.coords(img, tgt) if img else {})
                mm = SparseMatrix(kc.dim(tgt), kc.dim((m, j1)))
                for col, vec in enumerate(rows):
                    for r, v in vec.items():
                        mm.data[r][col] = v
                return mm

            rank_out = linalg.rank(dmat(j)) if j >= 1 else 0
            rank_in = linalg.rank(dmat(j + 1)) if j + 1 <= min(kc.n, m) else 0
            h = dim - rank_out - rank_in
            if h:
                table[f"{m},{j}"] = h
    expected = {"0,0": 1}
    return {"cohomology": table, "pass": table == expected}




class BLinearWindow:
    """Finite window of Hom_{B-mod}(K, K) with the differential [d_K, .].

    K is free as a graded B-module on the generators g_s = x^s eta_{1..n},
    so B-linear endomorphisms determined on generators compute
    RHom_{B-mod}(K, K); its cohomology carries the right S(V*)-action
    classes asserted by the Keller condition on the B side.  For the
    scalar bimodule the single generator is 1 and the differential is 0.
    """

    def __init__(self, kc: KoszulBimodule, window: int):
        self.kc = kc
        self.n = kc.n
        self.window = window
        self.acar = PolyCarrier(kc.n, kc.ring_order)
        self.top = tuple(range(self.n))
        self.gens: List[Tuple[int, int]] = []
        for d in range(0, (0 if kc.trivial else window) + 1):
            for i in range(self.acar.dim(d)):
                self.gens.append((d, i))
        self.entries: List[tuple] = []
        out_max = 2 * window + self.n + 1
        for (d, i) in self.gens:
            for om in range(0, out_max + 1):
                for oj in range(0, min(self.n, om) + 1):
                    for row in range(kc.dim((om, oj))):
                        self.entries.append(((d, i), (om, oj), row))
        self.index = {e: k for k, e in enumerate(self.entries)}
        self._cols: Dict[int, Dict[int, QQ]] = {}
        # d_K(g_s) = sum_a kappa_a * (xi_a |> g_{s+e_a})
        self._dk_gen: Dict[Tuple[int, int], List[Tuple[int, int, int, QQ]]] = {}
        if not kc.trivial:
            eta_top = SuperPolynomial.monomial(self.n, (0,) * self.n, self.top)
            for (d, i) in self.gens:
                g = self._gen_poly(d, i)
                dg = kc.d_k(g)
                terms = []
                for a in range(self.n):
                    probe = kc.act_b(SuperPolynomial.xi(self.n, a), eta_top)
                    (pmono, pc) = next(iter(probe.terms.items()))
                    for (xe, js), c in dg.terms.items():
                        if js != pmono[1]:
                            continue
                        du = sum(xe)
                        if du > self.window:
                            continue
                        gi = self.acar._index[du][(tuple(xe), ())]
                        terms.append((a, du, gi, c / pc))
                self._dk_gen[(d, i)] = terms

    def _gen_poly(self, d: int, i: int) -> SuperPolynomial:
        if self.kc.trivial:
            return SuperPolynomial.one(self.n)
        mono = self.acar.basis(d)[i]
        (xe, _), c = next(iter(mono.terms.items()))
        return SuperPolynomial.monomial(self.n, xe, self.top, c)

    def gen_bidegree(self, d: int) -> Tuple[int, int]:
        return (0, 0) if self.kc.trivial else (d + self.n, self.n)

    def slot(self, e: tuple) -> Tuple[int, int]:
        (d, i), (om, oj), row = e
        gm, gj = self.gen_bidegree(d)
        return (gj - oj, om - gm)

    def d_column(self, k: int) -> Dict[int, QQ]:
        if k in self._cols:
            return self._cols[k]
        (d0, i0), obd, row = self.entries[k]
        out: Dict[int, QQ] = {}
        v0 = self.kc.basis(obd)[row]
        dv = self.kc.d_k(v0)
        if dv:
            nbd = (obd[0], obd[1] - 1)
            for rr, c in self.kc.coords(dv, nbd).items():
                idx = self.index.get(((d0, i0), nbd, rr))
                if idx is not None:
                    out[idx] = out.get(idx, QQ(0)) + c
        # -(-1)^t phi(kappa xi_a |> g0) = -kappa xi_a |> v0 (the linearity
        # sign over the odd scalar cancels the commutator sign)
        for (d, i), terms in self._dk_gen.items():
            for (a, du, gi, kappa) in terms:
                if (du, gi) != (d0, i0):
                    continue
                val = self.kc.act_b(SuperPolynomial.xi(self.n, a), v0)
                if not val:
                    continue
                nbd = (obd[0] - 1, obd[1] - 1)
                for rr, c in self.kc.coords(val, nbd).items():
                    idx = self.index.get(((d, i), nbd, rr))
                    if idx is not None:
                        cur = out.get(idx, QQ(0)) - kappa * c
                        if cur:
                            out[idx] = cur
                        else:
                            out.pop(idx, None)
        out = {i: v for i, v in out.items() if v}
        self._cols[k] = out
        return out

    def slot_spaces(self) -> Dict[Tuple[int, int], List[int]]:
        slots: Dict[Tuple[int, int], List[int]] = {}
        for i, e in enumerate(self.entries):
            slots.setdefault(self.slot(e), []).append(i)
        return slots

    def slot_matrix(self, src: Sequence[int], tgt: Sequence[int]) -> SparseMatrix:
        tpos = {i: r for r, i in enumerate(tgt)}
        m = SparseMatrix(len(tgt), len(src))
        for cpos, j in enumerate(src):
            for i, v in self.d_column(j).items():
                r = tpos.get(i)
                if r is not None:
                    m.data[r][cpos] = v
        return m

    def right_mult_vector(self, f: SuperPolynomial, deg: int) -> Dict[int, QQ]:
        """Entry vector of the right multiplication k -> k . f."""
        vec: Dict[int, QQ] = {}
        for (d, i) in self.gens:
            g = self._gen_poly(d, i)
            val = self.kc.act_a(g, f)
            if not val:
                continue
            gm, gj = self.gen_bidegree(d)
            vb = (gm + deg, gj)
            for rr, c in self.kc.coords(val, vb).items():
                idx = self.index.get(((d, i), vb, rr))
                if idx is not None:
                    vec[idx] = c
        return vec

    def class_rank(self, vectors: Sequence[Dict[int, QQ]], slot_key: Tuple[int, int]) -> int:
        slots = self.slot_spaces()
        idxs = slots.get(slot_key, [])
        prev = slots.get((slot_key[0] - 1, slot_key[1]), [])
        pos = {i: r for r, i in enumerate(idxs)}
        rows = []
        if prev:
            m = self.slot_matrix(prev, idxs)
            for j in range(m.cols):
                rowv = {}
                for r in range(m.rows):
                    x = m.data[r].get(j)
                    if x:
                        rowv[r] = x
                if rowv:
                    rows.append(rowv)
        base = linalg.row_space_basis(rows)
        base_rank = len(base)
        allrows = list(rows)
        for v in vectors:
            allrows.append({pos[i]: x for i, x in v.items() if i in pos})
        return len(linalg.row_space_basis(allrows)) - base_rank


def cone_acyclicity_check(*args, **kwargs):
    from ._cone import cone_acyclicity_check as impl

    return impl(*args, **kwargs)
