"""Sparse graded cochain complexes of lines, chain maps, homology and lifting.

Conventions are cohomological: the differential raises degree by one.  A
complex has a grading modulus ``d`` (``0`` means Z-graded); generators are
graded lines identified by hashable labels, each with a chosen unit, so
maps are just coefficient matrices.  Coefficients are scalars or truncated
Novikov elements, depending on the complex's ``ring``.

Matrix convention everywhere: ``entries[(src, tgt)]`` is the coefficient of
``tgt`` in the image of ``src``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import linalg
from .coeff import (INF, BaseField, NovikovElement, NovikovRing, PrecisionError, ScalarRing,
                    format_rational)
from .report import Report


def koszul(a: int, b: int) -> int:
    """(-1)^(ab) as +1/-1."""
    return -1 if (a * b) % 2 else 1


class GradedComplex:
    """A finite cochain complex of graded lines.

    ``generators`` is a sequence of ``(label, degree)``.  ``differential`` maps
    ``(src, tgt)`` to a coefficient.  Zero coefficients are dropped.
    """

    def __init__(self, ring, generators: Iterable, differential: Mapping | None = None,
                 modulus: int = 0):
        if isinstance(ring, BaseField):
            ring = ScalarRing(ring)
        self.ring = ring
        self.modulus = modulus
        if modulus and modulus % 2 and ring.field.characteristic != 2:
            raise ValueError("grading modulus must be even unless the characteristic is 2")
        labels, degrees = [], {}
        for label, deg in generators:
            if label in degrees:
                raise ValueError(f"duplicate generator {label!r}")
            labels.append(label)
            degrees[label] = self.reduce(deg)
        self.labels = tuple(labels)
        self._degree = degrees
        self._index = {l: i for i, l in enumerate(labels)}
        entries = {}
        for (s, t), c in (differential or {}).items():
            if s not in degrees or t not in degrees:
                raise KeyError(f"differential entry ({s!r}, {t!r}) uses an unknown generator")
            c = ring(c)
            if not ring.is_zero(c):
                entries[(s, t)] = c
        self.entries = entries

    @property
    def field(self) -> BaseField:
        return self.ring.field

    def reduce(self, deg: int) -> int:
        return deg % self.modulus if self.modulus else deg

    def degree(self, label) -> int:
        return self._degree[label]

    def index(self, label) -> int:
        return self._index[label]

    def __len__(self):
        return len(self.labels)

    def degrees(self) -> list:
        return sorted(set(self._degree.values()))

    def in_degree(self, k: int) -> list:
        k = self.reduce(k)
        return [l for l in self.labels if self._degree[l] == k]

    def generators(self) -> list:
        return [(l, self._degree[l]) for l in self.labels]

    def d(self, chain: Mapping) -> dict:
        """Apply the differential to a chain ``{label: coeff}``."""
        out = {}
        by_src = self._by_source()
        for s, c in chain.items():
            if self.ring.is_zero(c):
                continue
            for t, x in by_src.get(s, ()):
                out[t] = out.get(t, self.ring.zero) + c * x
        return {t: c for t, c in out.items() if not self.ring.is_zero(c)}

    def _by_source(self):
        cache = getattr(self, "_src_cache", None)
        if cache is None:
            cache = {}
            for (s, t), c in self.entries.items():
                cache.setdefault(s, []).append((t, c))
            self._src_cache = cache
        return cache

    def block(self, k: int) -> tuple[list, list, list]:
        """Dense matrix of d: C^k -> C^(k+1), with its column and row labels."""
        cols = self.in_degree(k)
        rows = self.in_degree(k + 1)
        ridx = {l: i for i, l in enumerate(rows)}
        cidx = {l: i for i, l in enumerate(cols)}
        z = self.ring.zero
        m = [[z] * len(cols) for _ in rows]
        for (s, t), c in self.entries.items():
            if s in cidx and t in ridx:
                m[ridx[t]][cidx[s]] = c
        return m, cols, rows

    def matrix(self) -> list:
        n = len(self.labels)
        z = self.ring.zero
        m = [[z] * n for _ in range(n)]
        for (s, t), c in self.entries.items():
            m[self._index[t]][self._index[s]] = c
        return m

    def relabel(self, fn) -> "GradedComplex":
        return GradedComplex(self.ring, [(fn(l), d) for l, d in self.generators()],
                             {(fn(s), fn(t)): c for (s, t), c in self.entries.items()},
                             self.modulus)

    def shift(self, k: int) -> "GradedComplex":
        """C[k]: degrees lowered by k, differential multiplied by (-1)^k."""
        sign = -1 if k % 2 else 1
        return GradedComplex(self.ring, [(l, d - k) for l, d in self.generators()],
                             {st: sign * c for st, c in self.entries.items()}, self.modulus)

    def to_json(self) -> dict:
        return {
            "ring": ring_to_json(self.ring),
            "modulus": self.modulus,
            "generators": [[label_to_json(l), d] for l, d in self.generators()],
            "differential": [[label_to_json(t), label_to_json(s), self.ring.to_json(c)]
                             for (s, t), c in sorted(self.entries.items(),
                                                     key=lambda kv: (self._index[kv[0][1]],
                                                                     self._index[kv[0][0]]))],
        }

    @classmethod
    def from_json(cls, data) -> "GradedComplex":
        ring = ring_from_json(data["ring"])
        gens = [(label_from_json(l), d) for l, d in data["generators"]]
        diff = {(label_from_json(s), label_from_json(t)): ring.from_json(c)
                for t, s, c in data["differential"]}
        return cls(ring, gens, diff, data.get("modulus", 0))

    def __repr__(self):
        return f"GradedComplex({len(self.labels)} generators, {len(self.entries)} entries)"


def label_to_json(label):
    if isinstance(label, tuple):
        return [label_to_json(x) for x in label]
    return label


def label_from_json(label):
    if isinstance(label, list):
        return tuple(label_from_json(x) for x in label)
    return label


def ring_to_json(ring) -> dict:
    out = {"field": ring.field.name()}
    if ring.novikov:
        out["action_vector"] = [format_rational(a) for a in ring.monoid.action_vector]
    return out


def ring_from_json(data):
    from .coeff import GammaMonoid
    fld = BaseField.parse(data["field"])
    if "action_vector" in data:
        return NovikovRing(GammaMonoid(tuple(data["action_vector"])), fld)
    return ScalarRing(fld)


# ---------------------------------------------------------------------------
# chain maps


@dataclass
class ChainMap:
    """A map of graded modules ``source -> target`` raising degree by ``degree``.

    Chain maps have degree 0, homotopies degree -1.  ``entries[(s, t)]`` is
    the coefficient of target generator ``t`` in the image of ``s``.
    """

    source: GradedComplex
    target: GradedComplex
    entries: dict = field(default_factory=dict)
    degree: int = 0

    def __post_init__(self):
        ring = self.target.ring
        clean = {}
        for (s, t), c in self.entries.items():
            c = ring(c)
            if ring.is_zero(c):
                continue
            if s not in self.source._index or t not in self.target._index:
                raise KeyError(f"map entry ({s!r}, {t!r}) uses an unknown generator")
            clean[(s, t)] = c
        self.entries = clean

    @property
    def ring(self):
        return self.target.ring

    def apply(self, chain: Mapping) -> dict:
        out = {}
        zero = self.ring.zero
        by_src = {}
        for (s, t), c in self.entries.items():
            by_src.setdefault(s, []).append((t, c))
        for s, x in chain.items():
            for t, c in by_src.get(s, ()):
                out[t] = out.get(t, zero) + x * c
        return {t: c for t, c in out.items() if not self.ring.is_zero(c)}

    def matrix(self) -> list:
        z = self.ring.zero
        m = [[z] * len(self.source) for _ in range(len(self.target))]
        for (s, t), c in self.entries.items():
            m[self.target.index(t)][self.source.index(s)] = c
        return m

    def then(self, other: "ChainMap") -> "ChainMap":
        """``other`` after ``self``."""
        return compose(other, self)

    def __add__(self, other: "ChainMap") -> "ChainMap":
        return lincomb([(1, self), (1, other)])

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return lincomb([(1, self), (-1, other)])

    def scaled(self, c) -> "ChainMap":
        return lincomb([(c, self)])

    def coefficient(self, s, t):
        return self.entries.get((s, t), self.ring.zero)

    def is_zero(self) -> bool:
        return not self.entries

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "entries": [[label_to_json(t), label_to_json(s), self.ring.to_json(c)]
                            for (s, t), c in self.entries.items()]}


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """g o f."""
    if f.target is not g.source and f.target.labels != g.source.labels:
        raise ValueError("maps are not composable")
    ring = g.ring
    g_by_src = {}
    for (s, t), c in g.entries.items():
        g_by_src.setdefault(s, []).append((t, c))
    out = {}
    for (s, m), c in f.entries.items():
        for t, x in g_by_src.get(m, ()):
            out[(s, t)] = out.get((s, t), ring.zero) + c * x
    return ChainMap(f.source, g.target, out, f.degree + g.degree)


def lincomb(terms) -> ChainMap:
    terms = list(terms)
    first = terms[0][1]
    ring = first.ring
    out = {}
    for c, m in terms:
        if m.degree != first.degree:
            raise ValueError("adding maps of different degrees")
        for st, x in m.entries.items():
            out[st] = out.get(st, ring.zero) + x * c
    return ChainMap(first.source, first.target, out, first.degree)


def identity_map(C: GradedComplex) -> ChainMap:
    return ChainMap(C, C, {(l, l): C.ring.one for l in C.labels})


def zero_map(C: GradedComplex, D: GradedComplex, degree: int = 0) -> ChainMap:
    return ChainMap(C, D, {}, degree)


def differential_map(C: GradedComplex) -> ChainMap:
    return ChainMap(C, C, dict(C.entries), 1)


# ---------------------------------------------------------------------------
# validation


def cc_validate(C: GradedComplex) -> Report:
    """Degree discipline and d^2 = 0 (below cutoff for Novikov entries)."""
    rep = Report()
    for (s, t), c in sorted(C.entries.items(), key=lambda kv: (C.index(kv[0][0]), C.index(kv[0][1]))):
        if C.reduce(C.degree(s) + 1) != C.degree(t):
            rep.fail(f"entry {s!r} -> {t!r} has degree {C.degree(t) - C.degree(s)}, expected 1",
                     source=label_to_json(s), target=label_to_json(t))
    dd = compose(differential_map(C), differential_map(C))
    for (s, t), c in dd.entries.items():
        rep.fail(f"d^2 nonzero from {s!r} to {t!r}: {c}",
                 source=label_to_json(s), target=label_to_json(t), residual=str(c))
    return rep


def check_chain_map(f: ChainMap) -> Report:
    """Verify d f = (-1)^deg f d (the graded commutation rule)."""
    rep = Report()
    C, D = f.source, f.target
    for (s, t) in f.entries:
        if D.reduce(C.degree(s) + f.degree) != D.degree(t):
            rep.fail(f"map entry {s!r} -> {t!r} has the wrong degree",
                     source=label_to_json(s), target=label_to_json(t))
    sign = -1 if f.degree % 2 else 1
    lhs = compose(differential_map(D), f)
    rhs = compose(f, differential_map(C))
    diff = lincomb([(1, lhs), (-sign, rhs)])
    for (s, t), c in diff.entries.items():
        rep.fail(f"chain-map residual {s!r} -> {t!r}: {c}",
                 source=label_to_json(s), target=label_to_json(t), residual=str(c))
    return rep


def check_homotopy(f: ChainMap, g: ChainMap, H: ChainMap) -> Report:
    """Verify f - g = dH + Hd."""
    rep = Report()
    C, D = f.source, f.target
    dH = compose(differential_map(D), H)
    Hd = compose(H, differential_map(C))
    diff = lincomb([(1, f), (-1, g), (-1, dH), (-1, Hd)])
    for (s, t), c in diff.entries.items():
        rep.fail(f"homotopy residual {s!r} -> {t!r}: {c}",
                 source=label_to_json(s), target=label_to_json(t), residual=str(c))
    return rep


# ---------------------------------------------------------------------------
# tensor products


def _check_compatible(C: GradedComplex, D: GradedComplex):
    if C.modulus != D.modulus:
        raise ValueError("grading moduli differ")
    if C.ring != D.ring:
        raise ValueError("coefficient rings differ")


def cc_tensor(C: GradedComplex, D: GradedComplex) -> GradedComplex:
    """C (x) D with d(a(x)b) = da(x)b + (-1)^|a| a(x)db; labels are pairs."""
    _check_compatible(C, D)
    gens = [((a, b), C.degree(a) + D.degree(b)) for a in C.labels for b in D.labels]
    diff = {}
    for (a, a2), c in C.entries.items():
        for b in D.labels:
            diff[((a, b), (a2, b))] = c
    for (b, b2), c in D.entries.items():
        for a in C.labels:
            diff[((a, b), (a, b2))] = koszul_sign(C.degree(a)) * c
    return GradedComplex(C.ring, gens, diff, C.modulus)


def koszul_sign(deg: int) -> int:
    return -1 if deg % 2 else 1


def cc_tensor_many(complexes: list, ring=None) -> GradedComplex:
    """Iterated tensor product with flat tuple labels; empty product is the unit."""
    if not complexes:
        if ring is None:
            raise ValueError("empty tensor product needs a ring")
        return unit_complex(ring)
    out = complexes[0].relabel(lambda l: (l,))
    for D in complexes[1:]:
        out = cc_tensor(out, D).relabel(lambda l: l[0] + (l[1],))
    return out


def unit_complex(ring, modulus: int = 0, label=()) -> GradedComplex:
    return GradedComplex(ring, [(label, 0)], {}, modulus)


def swap_map(C: GradedComplex, D: GradedComplex, CD: GradedComplex | None = None,
             DC: GradedComplex | None = None) -> ChainMap:
    """The symmetry C(x)D -> D(x)C, a(x)b -> (-1)^{|a||b|} b(x)a."""
    CD = CD or cc_tensor(C, D)
    DC = DC or cc_tensor(D, C)
    return ChainMap(CD, DC, {((a, b), (b, a)): koszul(C.degree(a), D.degree(b))
                             for a in C.labels for b in D.labels})


def regroup_map(A: GradedComplex, B: GradedComplex, C: GradedComplex) -> ChainMap:
    """(A(x)B)(x)C -> A(x)(B(x)C) on the nose (no signs)."""
    left = cc_tensor(cc_tensor(A, B), C)
    right = cc_tensor(A, cc_tensor(B, C))
    return ChainMap(left, right, {(((a, b), c), (a, (b, c))): 1
                                  for a in A.labels for b in B.labels for c in C.labels})


def tensor_maps(f: ChainMap, g: ChainMap, src: GradedComplex | None = None,
                tgt: GradedComplex | None = None) -> ChainMap:
    """f (x) g with the Koszul rule (f(x)g)(a(x)b) = (-1)^{|g||a|} f(a)(x)g(b)."""
    src = src or cc_tensor(f.source, g.source)
    tgt = tgt or cc_tensor(f.target, g.target)
    out = {}
    for (a, a2), x in f.entries.items():
        s = koszul(g.degree, f.source.degree(a))
        for (b, b2), y in g.entries.items():
            out[((a, b), (a2, b2))] = x * y * s
    return ChainMap(src, tgt, out, f.degree + g.degree)


def direct_sum(C: GradedComplex, D: GradedComplex, tags=(0, 1)) -> GradedComplex:
    _check_compatible(C, D)
    t0, t1 = tags
    gens = [((t0, l), d) for l, d in C.generators()] + [((t1, l), d) for l, d in D.generators()]
    diff = {((t0, s), (t0, t)): c for (s, t), c in C.entries.items()}
    diff.update({((t1, s), (t1, t)): c for (s, t), c in D.entries.items()})
    return GradedComplex(C.ring, gens, diff, C.modulus)


def cone(f: ChainMap) -> GradedComplex:
    """Mapping cone of a degree-0 chain map: C[1] (+) D with d(c, e) = (-dc, f c + de)."""
    C, D = f.source, f.target
    gens = [(("c", l), d - 1) for l, d in C.generators()] + [(("t", l), d) for l, d in D.generators()]
    diff = {(("c", s), ("c", t)): -c for (s, t), c in C.entries.items()}
    diff.update({(("t", s), ("t", t)): c for (s, t), c in D.entries.items()})
    diff.update({(("c", s), ("t", t)): c for (s, t), c in f.entries.items()})
    return GradedComplex(C.ring, gens, diff, C.modulus)


# ---------------------------------------------------------------------------
# homology


@dataclass
class Homology:
    """Ranks per degree and, over Z, torsion coefficients per degree."""

    betti: dict
    torsion: dict = field(default_factory=dict)
    certified_below: object = INF

    def ranks(self, degrees=None) -> tuple:
        if degrees is None:
            degrees = sorted(self.betti)
        return tuple(self.betti.get(k, 0) for k in degrees)

    def total(self) -> int:
        return sum(self.betti.values())

    def to_json(self) -> dict:
        out = {"betti": {str(k): v for k, v in sorted(self.betti.items())}}
        if self.torsion:
            out["torsion"] = {str(k): v for k, v in sorted(self.torsion.items()) if v}
        if self.certified_below != INF:
            out["certified_below"] = format_rational(self.certified_below)
        return out


def homology(C: GradedComplex) -> Homology:
    """Betti numbers per degree (plus torsion over Z).

    Fields use exact rank computations, Z uses Smith normal form and Novikov
    coefficients use valuation-pivot elimination over the Novikov field.
    """
    if C.ring.novikov and C.field.kind == "integers":
        if C.ring.monoid.rank:
            raise ValueError("homology over a Novikov ring with integer coefficients "
                             "is not supported; use a field")
        # trivial monoid: the ring is Z itself, so Smith normal form applies
        scalar = {st: x.terms.get((), 0) for st, x in C.entries.items()}
        return homology(GradedComplex(C.field, C.generators(), scalar, C.modulus))
    degs = C.degrees()
    if C.modulus:
        degs = list(range(C.modulus))
    ranks, torsion = {}, {}
    certified = INF
    for k in degs:
        m, cols, rows = C.block(k)
        if not cols or not rows:
            ranks[k] = 0
            continue
        if C.ring.novikov:
            r, cert = novikov_rank(m)
            certified = min(certified, cert)
            ranks[k] = r
        elif C.field.kind == "integers":
            diag = linalg.smith_diagonal(m)
            ranks[k] = len(diag)
            torsion[C.reduce(k + 1)] = [x for x in diag if x > 1]
        else:
            ranks[k] = linalg.rank(m, C.field)
    betti = {}
    for k in degs:
        n = len(C.in_degree(k))
        b = n - ranks.get(k, 0) - ranks.get(C.reduce(k - 1), 0)
        if n or b:
            betti[k] = b
    tors = {k: v for k, v in torsion.items() if v}
    return Homology(betti, tors, certified)


def novikov_rank(m: list) -> tuple[int, object]:
    """Rank over the Novikov field by valuation-pivot elimination.

    Rows are combined fraction-free so exact Laurent polynomials stay exact.
    Returns ``(rank, certified_below)``.  Entries that vanish below their
    cutoff are treated as zero; the smallest cutoff among them is returned so
    callers know the action level up to which the rank is certified.
    """
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    rank = 0
    active_r = list(range(rows))
    active_c = list(range(cols))
    while active_r and active_c:
        best = None
        for i in active_r:
            for j in active_c:
                x = a[i][j]
                if x.is_zero():
                    continue
                v = x.valuation()
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            break
        _, pi, pj = best
        piv = a[pi][pj]
        lead_g, _ = piv.leading_term()
        mon = piv.monoid
        if any(g != lead_g and mon.action(g) == best[0] for g in piv.terms):
            raise PrecisionError(f"cannot certify pivot at action {best[0]}: tied leading terms")
        prow = a[pi]
        # fraction-free elimination: scaling a row by a nonzero element keeps the rank
        for i in active_r:
            if i == pi or a[i][pj].is_zero():
                continue
            f = a[i][pj]
            a[i] = [x * piv - f * y for x, y in zip(a[i], prow)]
        active_r.remove(pi)
        active_c.remove(pj)
        rank += 1
    cert = INF
    for i in active_r:
        for j in active_c:
            cert = min(cert, a[i][j].cutoff)
    return rank, cert


def brute_force_betti(C: GradedComplex) -> dict:
    """Independent oracle: ranks via exact dense matrices of the full differential.

    Only for small scalar complexes over Q or F_p.  Uses the identity
    b_k = dim ker d_k - rank d_{k-1} with ranks of whole-matrix restrictions.
    """
    full = C.matrix()
    out = {}
    for k in (range(C.modulus) if C.modulus else C.degrees()):
        idx = [C.index(l) for l in C.in_degree(k)]
        if not idx:
            continue
        img_in = [[full[r][c] for c in range(len(C)) if C.degree(C.labels[c]) == C.reduce(k - 1)]
                  for r in idx]
        out_cols = [[full[r][c] for c in idx] for r in range(len(C))]
        rk_out = linalg.rank(out_cols, C.field) if out_cols and out_cols[0] else 0
        rk_in = linalg.rank(img_in, C.field) if img_in and img_in[0] else 0
        out[k] = len(idx) - rk_out - rk_in
    return out


# ---------------------------------------------------------------------------
# lifting through quasi-isomorphisms


def lift_through_quasi_iso(pi: ChainMap, c: Mapping) -> tuple[dict, dict]:
    """Given a quasi-iso pi: G -> F and a cycle c in F, find (g, h).

    g is a cycle in G and pi(g) - c = d h.  Both unknowns are found from a
    single linear system over the base field.
    """
    G, F = pi.source, pi.target
    if G.ring.novikov or not G.field.is_field:
        raise ValueError("lifting needs field coefficients")
    fld = G.field
    if not c:
        return {}, {}
    degs = {F.degree(l) for l in c}
    if len(degs) != 1:
        raise ValueError("cycle must be homogeneous")
    k = degs.pop()
    if F.d(c):
        raise ValueError("c is not a cycle")
    g_lab = G.in_degree(k)
    h_lab = F.in_degree(k - 1)
    f_lab = F.in_degree(k)
    g_next = G.in_degree(k + 1)
    ng, nh = len(g_lab), len(h_lab)
    gi = {l: i for i, l in enumerate(g_lab)}
    hi = {l: i for i, l in enumerate(h_lab)}
    rows_dg = {l: i for i, l in enumerate(g_next)}
    rows_f = {l: len(g_next) + i for i, l in enumerate(f_lab)}
    z = fld.zero
    A = [[z] * (ng + nh) for _ in range(len(g_next) + len(f_lab))]
    b = [z] * len(A)
    for (s, t), x in G.entries.items():
        if s in gi and t in rows_dg:
            A[rows_dg[t]][gi[s]] = x
    for (s, t), x in pi.entries.items():
        if s in gi and t in rows_f:
            A[rows_f[t]][gi[s]] = A[rows_f[t]][gi[s]] + x
    for (s, t), x in F.entries.items():
        if s in hi and t in rows_f:
            A[rows_f[t]][ng + hi[s]] = A[rows_f[t]][ng + hi[s]] - x
    for l, x in c.items():
        b[rows_f[l]] = fld(x)
    sol = linalg.solve(A, b, fld, cols=ng + nh)
    if sol is None:
        raise ArithmeticError(f"no lift in degree {k}: the map is not a quasi-isomorphism there")
    g = {l: sol[i] for l, i in gi.items() if sol[i]}
    h = {l: sol[ng + i] for l, i in hi.items() if sol[ng + i]}
    return g, h


# ---------------------------------------------------------------------------
# energy induction over the Novikov ring


@dataclass
class HomotopyEquivalence:
    """f with inverse g and homotopies g f - 1 = dH1 + H1 d, f g - 1 = dH2 + H2 d."""

    f: ChainMap
    g: ChainMap
    h_source: ChainMap
    h_target: ChainMap
    cutoff: object
    extra: dict = field(default_factory=dict)


def split_action_zero(f: ChainMap):
    """Split a Novikov-valued map into its T^0 scalar part and the rest.

    Raises when some term has negative action, or zero action at a nonzero
    exponent (such a map is not identity-shaped modulo the maximal ideal).
    """
    ring = f.ring
    mon = ring.monoid
    zero_g = mon.zero
    f0, rest = {}, {}
    for st, x in f.entries.items():
        for g, c in x.terms.items():
            a = mon.action(g)
            if a < 0:
                raise ValueError(f"entry {st} has a term of negative action {a}")
            if g == zero_g:
                f0[st] = c
            elif a == 0:
                raise ValueError(f"entry {st} has an action-zero term at exponent {g}")
        r = NovikovElement(mon, ring.field, {g: c for g, c in x.terms.items() if g != zero_g},
                           x.cutoff)
        if r or r.cutoff != INF:
            rest[st] = r
    return f0, rest


def certify_homotopy_equivalence(f: ChainMap, cutoff, square_homotopy: ChainMap | None = None
                                 ) -> HomotopyEquivalence:
    """Invert a Novikov chain map that is invertible modulo positive action.

    The inverse is built order by order (the geometric series in
    -f0^{-1} N), truncated at ``cutoff``.  Since g is a genuine inverse up to
    the cutoff the returned homotopies are zero.  When ``square_homotopy`` K
    with f^2 - f = dK + Kd is supplied (f an endomorphism), the homotopy
    g K from f to the identity is recorded in ``extra["to_identity"]``.
    """
    from .coeff import parse_rational
    E = parse_rational(cutoff)
    ring = f.ring
    if not ring.novikov:
        raise ValueError("certify_homotopy_equivalence expects Novikov coefficients")
    C, D = f.source, f.target
    if f.degree != 0:
        raise ValueError("f must have degree 0")
    rep = check_chain_map(f)
    if not rep.ok:
        raise ValueError("f is not a chain map: " + "; ".join(rep.messages[:3]))
    if sorted(C.degrees()) != sorted(D.degrees()) or any(
            len(C.in_degree(k)) != len(D.in_degree(k)) for k in C.degrees()):
        raise ValueError("source and target have different ranks; no invertible leading term")
    f0, N = split_action_zero(f)
    fld = ring.field
    # invert f0 blockwise in each degree
    f0_inv = {}
    for k in C.degrees():
        src, tgt = C.in_degree(k), D.in_degree(k)
        m = [[fld(f0.get((s, t), 0)) for s in src] for t in tgt]
        try:
            inv = linalg.inverse(m, fld)
        except (ZeroDivisionError, IndexError):
            raise ZeroDivisionError(f"leading term of f is not invertible in degree {k}") from None
        for i, s in enumerate(src):
            for j, t in enumerate(tgt):
                if inv[i][j]:
                    f0_inv[(t, s)] = inv[i][j]
    f0_inv_map = ChainMap(D, C, f0_inv)
    N_map = ChainMap(C, D, N)
    ratio = compose(f0_inv_map, N_map).scaled(-1)  # on C
    ratio = _truncate(ratio, E)
    g = f0_inv_map
    term = f0_inv_map
    for _ in range(10_000):
        term = _truncate(compose(ratio, term), E)
        if term.is_zero():
            break
        g = g + term
    else:
        raise PrecisionError("geometric series did not terminate")
    g = _truncate(g, E)
    h1 = zero_map(C, C, -1)
    h2 = zero_map(D, D, -1)
    extra = {}
    if square_homotopy is not None:
        extra["to_identity"] = _truncate(compose(g, square_homotopy), E)
    return HomotopyEquivalence(f, g, h1, h2, E, extra)


def _truncate(m: ChainMap, E) -> ChainMap:
    return ChainMap(m.source, m.target, {st: x.truncate(E) for st, x in m.entries.items()},
                    m.degree)


def maps_agree_below(f: ChainMap, g: ChainMap, E) -> Report:
    """f and g agree on every term of action < E."""
    rep = Report()
    diff = f - g
    for st, x in diff.entries.items():
        if x.cutoff < E:
            rep.fail(f"entry {st} only known below {x.cutoff} < {E}")
        elif not x.truncate(E).is_zero():
            rep.fail(f"entry {st} differs: {x.truncate(E)}")
    return rep


def verify_equivalence(eq: HomotopyEquivalence) -> Report:
    """Check g f = 1 + dH + Hd and f g = 1 + dH + Hd below the cutoff."""
    rep = Report()
    E = eq.cutoff
    C, D = eq.f.source, eq.f.target
    gf = compose(eq.g, eq.f)
    fg = compose(eq.f, eq.g)
    lhs1 = gf - identity_map(C)
    rhs1 = compose(differential_map(C), eq.h_source) + compose(eq.h_source, differential_map(C))
    lhs2 = fg - identity_map(D)
    rhs2 = compose(differential_map(D), eq.h_target) + compose(eq.h_target, differential_map(D))
    rep.merge(maps_agree_below(lhs1, rhs1, E), "gf: ")
    rep.merge(maps_agree_below(lhs2, rhs2, E), "fg: ")
    rep.merge(check_chain_map(eq.g), "g: ")
    if "to_identity" in eq.extra:
        K = eq.extra["to_identity"]
        lhs = eq.f - identity_map(C)
        rhs = compose(differential_map(C), K) + compose(K, differential_map(C))
        rep.merge(maps_agree_below(lhs, rhs, E), "f ~ 1: ")
    return rep


def scalar_to_novikov(C: GradedComplex, ring: NovikovRing) -> GradedComplex:
    return GradedComplex(ring, C.generators(), {st: ring(c) for st, c in C.entries.items()},
                         C.modulus)


def random_complex(rng, field: BaseField, sizes: Mapping, density: float = 0.5,
                   max_coeff: int = 3) -> GradedComplex:
    """A random valid complex: a sum of contractible pieces and cycles, conjugated.

    ``sizes`` maps degree to the number of generators.  The differential is
    built as B D B^{-1} for a random block-unitriangular change of basis B,
    so d^2 = 0 by construction.
    """
    gens = []
    for k in sorted(sizes):
        gens += [((k, i), k) for i in range(sizes[k])]
    degs = sorted(sizes)
    # pair some generators of degree k with degree k+1
    diff = {}
    free = {k: list(range(sizes[k])) for k in degs}
    for k in degs:
        if k + 1 not in free:
            continue
        rng.shuffle(free[k])
        rng.shuffle(free[k + 1])
        m = min(len(free[k]), len(free[k + 1]))
        npairs = rng.randint(0, m)
        for _ in range(npairs):
            a, b = free[k].pop(), free[k + 1].pop()
            diff[((k, a), (k + 1, b))] = field(1)
    base = GradedComplex(field, gens, diff)
    # conjugate by a random degree-preserving change of basis
    B, Binv = {}, {}
    for k in degs:
        n = sizes[k]
        labels = [(k, i) for i in range(n)]
        lower = linalg.identity(n, field)
        for i in range(n):
            for j in range(i):
                if rng.random() < density:
                    lower[i][j] = field(rng.randint(-max_coeff, max_coeff))
        perm = list(range(n))
        rng.shuffle(perm)
        mat = [lower[perm[i]] for i in range(n)]
        inv = linalg.inverse(mat, field)
        for i in range(n):
            for j in range(n):
                if mat[i][j]:
                    B[(labels[j], labels[i])] = mat[i][j]
                if inv[i][j]:
                    Binv[(labels[j], labels[i])] = inv[i][j]
    Bm = ChainMap(base, base, B)
    Bim = ChainMap(base, base, Binv)
    newd = compose(Bm, compose(differential_map(base), Bim))
    return GradedComplex(field, gens, newd.entries)


def all_cycles_basis(C: GradedComplex, k: int) -> list:
    """Basis of the cycles Z^k as chains."""
    m, cols, rows = C.block(k)
    if not cols:
        return []
    basis = linalg.nullspace(m, C.field, cols=len(cols)) if rows else \
        [[C.field.one if i == j else C.field.zero for i in range(len(cols))] for j in range(len(cols))]
    return [{l: x for l, x in zip(cols, v) if x} for v in basis]


def is_boundary(C: GradedComplex, chain: Mapping) -> bool:
    """Whether ``chain`` lies in the image of d (field coefficients)."""
    if not chain:
        return True
    k = C.degree(next(iter(chain)))
    m, cols, rows = C.block(k - 1)
    if not cols:
        return False
    b = [C.field(chain.get(l, 0)) for l in rows]
    return linalg.solve(m, b, C.field, cols=len(cols)) is not None


def chain_add(a: Mapping, b: Mapping, sign: int = 1) -> dict:
    out = dict(a)
    for l, x in b.items():
        out[l] = out.get(l, 0) + sign * x
        if not out[l]:
            del out[l]
    return out

