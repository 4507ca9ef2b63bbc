"""Admissible graphs, bidifferential evaluation, and star products.

An admissible graph has k aerial vertices, each with an ordered pair of
outgoing edges to distinct targets among {L, R, aerial vertices}; simple
loops are allowed and connectedness is not required.  Evaluation places
the bivector at aerial vertices, the two arguments at L and R, and lets
each edge differentiate its target.

Parity profiles:
  even  -- arguments are x-polynomials; the bivector alpha stores its
           coefficient in the x slot and its two odd directions in the
           xi slot; edge tails remove a xi, heads apply d/dx.
  odd   -- arguments are xi-polynomials; the (role-swapped) bivector
           stores the odd coefficient in the xi slot and the two even
           directions in the x slot; tails remove an x, heads apply the
           odd d/dxi with Koszul signs across slots.

Edges are processed vertex by vertex, first slot then second, applying
tail then head; the running xi-parities of the slot contents drive the
Koszul signs (convention ledger).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .linalg import QQ, SparseMatrix
from .quadalg import QuadraticPresentation
from .superpoly import Bivector, SuperPolynomial, is_poisson
from .trunc import TruncSeries, free_basis_from_spanning

Target = object  # 'L' | 'R' | int


class UnsupportedOrder(ValueError):
    pass


class WeightSolveError(RuntimeError):
    pass


class AdmissibleGraph:
    """Kontsevich graph with ordered edge pairs, canonical up to relabeling."""

    def __init__(self, k: int, edges: Sequence[Tuple[Target, Target]]):
        if len(edges) != k:
            raise ValueError("one ordered edge pair per aerial vertex")
        for v, (t1, t2) in enumerate(edges):
            if t1 == t2:
                raise ValueError("the two edges of a vertex must have distinct targets")
            for t in (t1, t2):
                if t not in ("L", "R") and not (isinstance(t, int) and 0 <= t < k):
                    raise ValueError(f"bad edge target {t!r}")
        self.k = k
        self.edges = tuple((t1, t2) for (t1, t2) in edges)

    def relabel(self, perm: Sequence[int]) -> "AdmissibleGraph":
        def m(t):
            return perm[t] if isinstance(t, int) else t

        new = [None] * self.k
        for v, (t1, t2) in enumerate(self.edges):
            new[perm[v]] = (m(t1), m(t2))
        return AdmissibleGraph(self.k, new)

    def canonical_key(self) -> str:
        best = None
        for perm in itertools.permutations(range(self.k)):
            s = self.relabel(perm).encode()
            if best is None or s < best:
                best = s
        return best

    def encode(self) -> str:
        def t(x):
            return x if isinstance(x, str) else f"v{x + 1}"

        body = ";".join(f"v{v + 1}->({t(a)},{t(b)})" for v, (a, b) in enumerate(self.edges))
        return f"k{self.k}:{body}"

    @classmethod
    def decode(cls, s: str) -> "AdmissibleGraph":
        head, _, body = s.partition(":")
        k = int(head[1:])
        edges: List[Tuple[Target, Target]] = [None] * k

        def parse(t):
            return t if t in ("L", "R") else int(t[1:]) - 1

        if body:
            for item in body.split(";"):
                name, _, pair = item.partition("->")
                v = int(name[1:]) - 1
                a, b = pair.strip("()").split(",")
                edges[v] = (parse(a), parse(b))
        return cls(k, edges)

    def has_loop(self) -> bool:
        return any(t == v for v, pair in enumerate(self.edges) for t in pair)

    def __eq__(self, other):
        return isinstance(other, AdmissibleGraph) and self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def __repr__(self):
        return f"AdmissibleGraph({self.encode()!r})"


def enumerate_graphs(k: int, include_loops: bool = True) -> List[AdmissibleGraph]:
    """All isomorphism classes of admissible graphs with k aerial vertices."""
    if k not in (0, 1, 2):
        raise UnsupportedOrder(f"graph engine supports k <= 2, got {k}")
    if k == 0:
        return [AdmissibleGraph(0, [])]
    targets: List[Target] = ["L", "R"] + list(range(k))
    seen = {}
    for combo in itertools.product(itertools.permutations(targets, 2), repeat=k):
        try:
            g = AdmissibleGraph(k, list(combo))
        except ValueError:
            continue
        if not include_loops and g.has_loop():
            continue
        key = g.canonical_key()
        if key not in seen:
            seen[key] = AdmissibleGraph.decode(key)
    return [seen[key] for key in sorted(seen)]


def _parity(p: SuperPolynomial) -> int:
    pars = {len(js) % 2 for (_, js) in p.terms}
    if len(pars) > 1:
        raise ValueError("content not xi-parity homogeneous")
    return pars.pop() if pars else 0


def _split_parity(p: SuperPolynomial) -> List[SuperPolynomial]:
    buckets: Dict[int, Dict] = {}
    for mono, c in p.terms.items():
        buckets.setdefault(len(mono[1]) % 2, {})[mono] = c
    return [SuperPolynomial(p.n, t, p.ring_order) for _, t in sorted(buckets.items())]


def _direction_support(alpha: SuperPolynomial, odd: bool) -> List[Tuple[int, int]]:
    n = alpha.n
    pairs = []
    for a in range(n):
        for b in range(n):
            if a == b and not odd:
                continue
            if odd:
                t = alpha.partial_x(a).partial_x(b)
                t = SuperPolynomial(alpha.n, {m: c for m, c in t.terms.items() if sum(m[0]) == 0}, alpha.ring_order)
            else:
                t = alpha.partial_xi(b).partial_xi(a)
            if t:
                pairs.append((a, b))
    return pairs


def evaluate_graph(graph: AdmissibleGraph, alpha: Bivector, f: SuperPolynomial, h: SuperPolynomial, odd: bool = False) -> SuperPolynomial:
    """Weighted-graph integrand B_Gamma(f, h) for one admissible graph."""
    ap = alpha.poly if isinstance(alpha, Bivector) else alpha
    if ap.n != f.n or ap.n != h.n:
        raise ValueError("bivector and arguments over different generator sets")
    out = SuperPolynomial.zero(f.n, f.ring_order)
    for fp in _split_parity(f):
        for hp in _split_parity(h):
            out = out + _evaluate_homog(graph, ap, fp, hp, odd)
    return out


def _evaluate_homog(graph: AdmissibleGraph, alpha: SuperPolynomial, f: SuperPolynomial, h: SuperPolynomial, odd: bool) -> SuperPolynomial:
    k = graph.k
    n = alpha.n
    L, R = k, k + 1
    support = _direction_support(alpha, odd)
    edge_list = []  # (source slot, target slot, pair slot 0/1)
    for v, (t1, t2) in enumerate(graph.edges):
        for s, t in enumerate((t1, t2)):
            tgt = L if t == "L" else R if t == "R" else t
            edge_list.append((v, tgt, s))
    result = SuperPolynomial.zero(n, f.ring_order)
    for assign in itertools.product(support, repeat=k):
        contents = [alpha] * k + [f, h]
        sign = 1
        dead = False
        for (v, tgt, s) in edge_list:
            idx = assign[v][s]
            if odd:
                contents[v] = contents[v].partial_x(idx)
            else:
                # odd tail; slots before v are fully extracted, hence even
                contents[v] = contents[v].partial_xi(idx)
            if not contents[v]:
                dead = True
                break
            if odd:
                par = sum(_parity(contents[s2]) for s2 in range(tgt))
                if par % 2:
                    sign = -sign
                contents[tgt] = contents[tgt].partial_xi(idx)
            else:
                contents[tgt] = contents[tgt].partial_x(idx)
            if not contents[tgt]:
                dead = True
                break
        if dead:
            continue
        prod = contents[0]
        for c in contents[1:]:
            prod = prod * c
        result = result + (prod if sign > 0 else -prod)
    return result


class WeightAssignment:
    """Rational weights for canonical admissible graphs of order <= 2."""

    def __init__(self, weights: Dict[str, QQ]):
        self.weights = {k: QQ(v) for k, v in weights.items() if QQ(v)}

    @classmethod
    def k1_normalized(cls) -> Dict[str, QQ]:
        """Order-1 weights pinned so the first-order term is the HKR cochain."""
        w = {}
        for g in enumerate_graphs(1):
            key = g.canonical_key()
            if g.edges == (("L", "R"),):
                w[key] = QQ(1, 2)
            elif g.edges == (("R", "L"),):
                w[key] = QQ(-1, 2)
        return w

    def weight(self, g: AdmissibleGraph) -> QQ:
        return self.weights.get(g.canonical_key(), QQ(0))

    def to_json(self) -> dict:
        return {k: linalg.format_rational(v) for k, v in sorted(self.weights.items())}

    @classmethod
    def from_json(cls, data: dict) -> "WeightAssignment":
        return cls({k: linalg.parse_rational(v) for k, v in data.items()})

    def perturbed(self, key: str, delta=1) -> "WeightAssignment":
        w = dict(self.weights)
        w[key] = w.get(key, QQ(0)) + QQ(delta)
        return WeightAssignment(w)


def _monomials_upto(n: int, max_deg: int, odd: bool) -> List[SuperPolynomial]:
    out = []
    if odd:
        for d in range(1, min(n, max_deg) + 1):
            for js in itertools.combinations(range(n), d):
                out.append(SuperPolynomial.monomial(n, (0,) * n, js))
    else:
        for d in range(1, max_deg + 1):
            for xe in itertools.product(range(d + 1), repeat=n):
                if sum(xe) == d:
                    out.append(SuperPolynomial.monomial(n, xe, ()))
    return out


def _assoc_rows(graphs2, alpha: Bivector, odd: bool, deg_cutoff: int):
    """Linear constraints on order-2 weights from associativity at h^2.

    For each argument triple the constraint is
        sum_G W_G [B_G(fg,h) + B_G(f,g)h - B_G(f,gh) - f B_G(g,h)] = rhs,
    rhs = U1(f, U1(g,h)) - U1(U1(f,g), h) with U1 the order-1 term.
    """
    n = alpha.n
    w1 = WeightAssignment(WeightAssignment.k1_normalized())
    g1 = enumerate_graphs(1)

    def u1(f, h):
        out = SuperPolynomial.zero(n)
        for g in g1:
            w = w1.weight(g)
            if w:
                out = out + evaluate_graph(g, alpha, f, h, odd).scale(w)
        return out

    monos = _monomials_upto(n, deg_cutoff, odd)
    rows = []
    for f, g, h in itertools.product(monos, repeat=3):
        coeffs = []
        for G in graphs2:
            t = (
                evaluate_graph(G, alpha, f * g, h, odd)
                + evaluate_graph(G, alpha, f, g, odd) * h
                - evaluate_graph(G, alpha, f, g * h, odd)
                - f * evaluate_graph(G, alpha, g, h, odd)
            )
            coeffs.append(t)
        rhs = u1(f, u1(g, h)) - u1(u1(f, g), h)
        monoms = set(rhs.terms)
        for t in coeffs:
            monoms |= set(t.terms)
        for mono in sorted(monoms):
            row = {j: t.terms[mono] for j, t in enumerate(coeffs) if mono in t.terms}
            rows.append((row, rhs.terms.get(mono, QQ(0))))
    return rows


def solve_weights(test_bivectors: Sequence[Bivector], deg_cutoff: int = 2, include_loops: bool = True, restrict_loops_to_zero: bool = False) -> Tuple[WeightAssignment, dict]:
    """Order-2 weights making the star product associative mod h^3.

    Constraints are assembled for every test bivector in both parity
    profiles with one shared weight vector.  Returns the deterministic
    representative (free variables zero) and a report with the dimension
    of the solution affine space.
    """
    for b in test_bivectors:
        if not is_poisson(b):
            raise WeightSolveError("test bivector is not Poisson")
    graphs2 = enumerate_graphs(2, include_loops=include_loops)
    if restrict_loops_to_zero:
        unknown_graphs = [g for g in graphs2 if not g.has_loop()]
    else:
        unknown_graphs = graphs2
    rows = []
    for alpha in test_bivectors:
        for odd in (False, True):
            a = Bivector(alpha.poly)
            rows.extend(_assoc_rows(unknown_graphs, a, odd, deg_cutoff))
    m = SparseMatrix(len(rows), len(unknown_graphs))
    rhs = {}
    for i, (row, r) in enumerate(rows):
        for j, c in row.items():
            m.data[i][j] = c
        if r:
            rhs[i] = r
    sol = linalg.solve_linear(m, rhs)
    if sol is None:
        raise WeightSolveError("associativity constraints are inconsistent (convention bug)")
    nullity = len(linalg.kernel_basis(m))
    weights = dict(WeightAssignment.k1_normalized())
    for j, g in enumerate(unknown_graphs):
        c = sol.get(j, QQ(0))
        if c:
            weights[g.canonical_key()] = c
    report = {
        "order2_unknowns": len(unknown_graphs),
        "constraint_rows": len(rows),
        "solution_space_dim": nullity,
        "loops_included": include_loops and not restrict_loops_to_zero,
    }
    return WeightAssignment(weights), report


class StarProduct:
    """Graph-sum star product mod h^(N+1) for a quadratic Poisson bivector."""

    def __init__(self, alpha: Bivector, weights: WeightAssignment, order: int, odd: bool = False):
        if order > 2:
            raise UnsupportedOrder("engine supports truncation order N <= 2")
        self.alpha = alpha
        self.weights = weights
        self.order = order
        self.odd = odd
        self.n = alpha.n
        self._graphs = {k: enumerate_graphs(k) for k in range(1, order + 1)}

    def _embed(self, p: SuperPolynomial) -> SuperPolynomial:
        if p.ring_order == self.order:
            return p
        if p.ring_order is not None:
            raise ValueError("mixed truncation orders")
        return SuperPolynomial(
            p.n,
            {m: TruncSeries.const(c, self.order) for m, c in p.terms.items()},
            self.order,
        )

    def star(self, f: SuperPolynomial, h: SuperPolynomial) -> SuperPolynomial:
        fe, he = self._embed(f), self._embed(h)
        at = Bivector(self._embed(self.alpha.poly))
        out = fe * he
        for k, graphs in self._graphs.items():
            hk = TruncSeries.hbar(self.order, k)
            for g in graphs:
                w = self.weights.weight(g)
                if not w:
                    continue
                term = evaluate_graph(g, at, fe, he, self.odd)
                if term:
                    out = out + term.scale(hk * w)
        return out

    def generators(self) -> List[SuperPolynomial]:
        if self.odd:
            return [SuperPolynomial.xi(self.n, i) for i in range(self.n)]
        return [SuperPolynomial.x(self.n, i) for i in range(self.n)]


def star(sp: StarProduct, f: SuperPolynomial, h: SuperPolynomial) -> SuperPolynomial:
    return sp.star(f, h)


def presentation_from_star(sp: StarProduct) -> QuadraticPresentation:
    """Quadratic presentation of the deformed algebra.

    Relations are the kernel of the degree-2 multiplication map
    e_i (x) e_j -> x_i * x_j over the truncated ring.
    """
    if not sp.alpha.is_quadratic():
        raise ValueError("presentation extraction needs a quadratic bivector")
    n = sp.n
    N = sp.order
    gens = sp.generators()
    if sp.odd:
        basis = [(a, b) for a in range(n) for b in range(a + 1, n)]

        def coords(p: SuperPolynomial) -> Dict[int, TruncSeries]:
            out = {}
            for (xe, js), c in p.terms.items():
                if sum(xe) != 0 or len(js) != 2:
                    raise ValueError("star product of generators is not graded")
                out[basis.index((js[0], js[1]))] = c
            return out
    else:
        basis = [(a, b) for a in range(n) for b in range(a, n)]

        def coords(p: SuperPolynomial) -> Dict[int, TruncSeries]:
            out = {}
            for (xe, js), c in p.terms.items():
                if js or sum(xe) != 2:
                    raise ValueError("star product of generators is not graded")
                picks = tuple(i for i, e in enumerate(xe) for _ in range(e))
                out[basis.index(picks)] = c
            return out

    entries: Dict[Tuple[int, int], TruncSeries] = {}
    for i in range(n):
        for j in range(n):
            col = i * n + j
            prod = sp.star(gens[i], gens[j])
            for r, c in coords(prod).items():
                entries[(r, col)] = c
    from . import trunc

    span = trunc.trunc_kernel(len(basis), n * n, entries, N)
    rels = free_basis_from_spanning(span, n * n, N)
    parity = [1] * n if sp.odd else [0] * n
    return QuadraticPresentation(n, parity, rels, ring_order=N)


def mc_cochain(sp: StarProduct, cutoff: int):
    """The arity-2 cochain star - mu, a Maurer-Cartan element over TruncSeries."""
    from .hochschild import ExtCarrier, PolyCarrier, from_value_fn

    carrier = (ExtCarrier if sp.odd else PolyCarrier)(sp.n, sp.order)
    return from_value_fn(carrier, 2, 0, cutoff, lambda a, b: sp.star(a, b) - a * b)


def diagonal_bivector(n: int, lambdas: Dict[Tuple[int, int], QQ]) -> Bivector:
    """alpha = sum_{i<j} lambda_{ij} x_i x_j xi_i xi_j (always Poisson)."""
    p = SuperPolynomial.zero(n)
    for (i, j), lam in sorted(lambdas.items()):
        xe = [0] * n
        xe[i] += 1
        xe[j] += 1
        p = p + SuperPolynomial.monomial(n, xe, (i, j), lam)
    return Bivector(p)
