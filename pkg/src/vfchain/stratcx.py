"""The stratum cochain complex of a stratified, oriented object.

A stratum ``P`` contributes one line in degree ``codim P - dim``; the
differential sums over codim-one boundary strata with sign units that are
part of the input.  Those units must make every codim-two diamond
anticommute, which is exactly what d^2 = 0 needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from . import linalg
from .coeff import QQ, BaseField
from .homalg import (ChainMap, GradedComplex, cc_tensor, check_chain_map, koszul_sign,
                     label_from_json, label_to_json, swap_map)
from .report import Report
from .stratmodel import (Refinement, StratPoset, product_model,
                         validate_refinement)


class SignError(ValueError):
    """The sign units violate the codim-two diamond relation."""

    def __init__(self, report: Report):
        super().__init__("; ".join(report.messages[:3]))
        self.report = report


def codim_one_covers(model: StratPoset) -> list:
    return [(a, b) for a, b in model.covers() if model.codim[b] == model.codim[a] + 1]


def diamonds(model: StratPoset) -> list:
    """All (P, A, B, P') with P < A, B < P' and a codim gap of two."""
    out = []
    for p, q in model.relations():
        if model.codim[q] - model.codim[p] != 2:
            continue
        mid = sorted(model.open_interval(p, q), key=model.sort_key)
        for i in range(len(mid)):
            for j in range(i + 1, len(mid)):
                out.append((p, mid[i], mid[j], q))
    return out


@dataclass
class StratumData:
    """A valid corner model, a total dimension and a sign unit per codim-one cover."""

    model: StratPoset
    dim: int
    signs: dict = field(default_factory=dict)
    modulus: int = 0

    def sign(self, a, b) -> int:
        return self.signs.get((a, b), 1)

    def degree(self, p) -> int:
        d = self.model.codim[p] - self.dim
        return d % self.modulus if self.modulus else d

    def stratum_dim(self, p) -> int:
        return self.dim - self.model.codim[p]

    def check_signs(self) -> Report:
        rep = Report()
        for (a, b), s in self.signs.items():
            if s not in (1, -1):
                rep.fail(f"sign on {a!r} -> {b!r} is {s}, not a unit")
        for p, a, b, q in diamonds(self.model):
            tot = self.sign(p, a) * self.sign(a, q) + self.sign(p, b) * self.sign(b, q)
            if tot != 0:
                rep.fail(f"diamond {p!r} < {a!r}, {b!r} < {q!r} commutes instead of "
                         f"anticommuting", diamond=[repr(x) for x in (p, a, b, q)])
        return rep

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "dim": self.dim,
            "modulus": self.modulus,
            "signs": [[label_to_json(a), label_to_json(b), self.sign(a, b)]
                      for a, b in codim_one_covers(self.model)],
        }

    @classmethod
    def from_json(cls, data) -> "StratumData":
        model = StratPoset.from_json(data["model"])
        signs = {(label_from_json(a), label_from_json(b)): int(s) for a, b, s in data.get("signs", [])}
        return cls(model, int(data["dim"]), signs, int(data.get("modulus", 0)))


def solve_signs(model: StratPoset) -> dict:
    """Sign units satisfying every diamond relation, found over GF(2).

    The solution with all free variables set to +1 is returned, so the
    result is deterministic.  Raises ``SignError`` if no solution exists.
    """
    covers = codim_one_covers(model)
    idx = {c: i for i, c in enumerate(covers)}
    dias = diamonds(model)
    if not dias:
        return {c: 1 for c in covers}
    rows = []
    for p, a, b, q in dias:
        mask = 0
        for e in ((p, a), (a, q), (p, b), (b, q)):
            mask ^= 1 << idx[e]
        rows.append(mask)
    sol = linalg.solve_gf2(rows, [1] * len(rows), len(covers))
    if sol is None:
        rep = Report().fail("no sign assignment satisfies all diamond relations")
        raise SignError(rep)
    return {c: (-1 if sol[idx[c]] else 1) for c in covers}


def with_solved_signs(model: StratPoset, dim: int) -> StratumData:
    return StratumData(model, dim, solve_signs(model))


def build_stratum_complex(S: StratumData, field: BaseField = QQ) -> GradedComplex:
    rep = S.check_signs()
    if not rep.ok:
        raise SignError(rep)
    gens = [(p, S.model.codim[p] - S.dim) for p in S.model.elements]
    diff = {(a, b): S.sign(a, b) for a, b in codim_one_covers(S.model)}
    return GradedComplex(field, gens, diff, S.modulus)


def product_stratum_data(S1: StratumData, S2: StratumData) -> StratumData:
    """Product with the Koszul sign rule: second-factor covers pick up (-1)^deg."""
    model = product_model(S1.model, S2.model)
    signs = {}
    for a, a2 in codim_one_covers(S1.model):
        for b in S2.model.elements:
            signs[((a, b), (a2, b))] = S1.sign(a, a2)
    for b, b2 in codim_one_covers(S2.model):
        for a in S1.model.elements:
            signs[((a, b), (a, b2))] = koszul_sign(S1.degree(a)) * S2.sign(b, b2)
    return StratumData(model, S1.dim + S2.dim, signs, S1.modulus)


def diagonal_isomorphism(C: GradedComplex, D: GradedComplex) -> tuple[dict | None, Report]:
    """Find units u with u(t) d_C(s, t) = d_D(s, t) u(s) for identical labels.

    Returns the unit assignment (label -> +-1) and a report; None on failure.
    """
    rep = Report()
    if set(C.labels) != set(D.labels):
        rep.fail("generator sets differ")
        return None, rep
    for l in C.labels:
        if C.degree(l) != D.degree(l):
            rep.fail(f"degree of {l!r} differs")
    if set(C.entries) != set(D.entries):
        rep.fail("differentials have different supports")
    if not rep.ok:
        return None, rep
    ratio = {}
    for st, c in C.entries.items():
        q = D.entries[st] / c if C.field.is_field else None
        if q not in (1, -1) and not (C.field.characteristic == 2):
            rep.fail(f"entry {st!r} differs by a non-unit factor")
            return None, rep
        ratio[st] = 1 if C.field.characteristic == 2 else int(q)
    adj = {l: [] for l in C.labels}
    for (s, t), r in ratio.items():
        adj[s].append((t, r))
        adj[t].append((s, r))
    unit = {}
    for start in C.labels:
        if start in unit:
            continue
        unit[start] = 1
        stack = [start]
        while stack:
            x = stack.pop()
            for y, r in adj[x]:
                want = unit[x] * r
                if y not in unit:
                    unit[y] = want
                    stack.append(y)
                elif unit[y] != want:
                    rep.fail(f"no consistent unit at {y!r}")
                    return None, rep
    return unit, rep


def stratum_tensor_compare(S1: StratumData, S2: StratumData, product: StratumData | None = None,
                           field: BaseField = QQ) -> Report:
    """Compare the product's stratum complex with the tensor of the factors.

    ``product`` defaults to the product model with independently solved
    signs, so the comparison is a genuine isomorphism check rather than a
    tautology.  The report also checks that the symmetry is a chain
    isomorphism onto the swapped product.
    """
    rep = Report()
    if product is None:
        product = with_solved_signs(product_model(S1.model, S2.model), S1.dim + S2.dim)
    C1, C2 = build_stratum_complex(S1, field), build_stratum_complex(S2, field)
    T = cc_tensor(C1, C2)
    P = build_stratum_complex(product, field)
    unit, sub = diagonal_isomorphism(P, T)
    rep.merge(sub, "product vs tensor: ")
    if unit is not None:
        rep.data["units"] = sum(1 for u in unit.values() if u == -1)
    swapped = cc_tensor(C2, C1)
    sw = swap_map(C1, C2, T, swapped)
    rep.merge(check_chain_map(sw), "symmetry: ")
    back = swap_map(C2, C1, swapped, T)
    from .homalg import compose, identity_map
    if compose(back, sw).entries != identity_map(T).entries:
        rep.fail("symmetry is not an involution")
    prod21 = with_solved_signs(product_model(S2.model, S1.model), S1.dim + S2.dim)
    unit2, sub2 = diagonal_isomorphism(build_stratum_complex(prod21, field), swapped)
    rep.merge(sub2, "swapped product vs tensor: ")
    return rep


def semipositive_truncate(C: GradedComplex, dim: int) -> GradedComplex:
    """Keep the complex when dim is 0 or 1, replace it by zero otherwise."""
    if C.modulus:
        raise ValueError("truncation needs an integer grading")
    if dim in (0, 1):
        return C
    return GradedComplex(C.ring, [], {}, C.modulus)


# ---------------------------------------------------------------------------
# virtual counts


@dataclass
class CountTable:
    """Scalars on dimension-0 strata.

    ``products`` declares descriptors that are products of other entries
    (value must be the product), and ``trivial_points`` lists descriptors
    that are points with trivial stabiliser (value must be 1).
    """

    values: dict
    products: dict = field(default_factory=dict)
    trivial_points: frozenset = frozenset()
    multiplicative: bool = True

    def __getitem__(self, key):
        return self.values[key]

    def validate(self, field: BaseField = QQ) -> Report:
        rep = Report()
        for key, factors in self.products.items():
            prod = field.one
            for f in factors:
                if f not in self.values:
                    rep.fail(f"product descriptor {key!r} has unknown factor {f!r}")
                    break
                prod = prod * field(self.values[f])
            else:
                if self.multiplicative and field(self.values.get(key, 0)) != prod:
                    rep.fail(f"value on {key!r} is not the product of its factors")
        for key in self.trivial_points:
            if field(self.values.get(key, 0)) != field.one:
                rep.fail(f"trivial point {key!r} does not have count 1")
        return rep


def product_count_table(T1: CountTable, T2: CountTable) -> CountTable:
    """Counts on products of dimension-0 strata are products of counts."""
    values = {(a, b): x * y for a, x in T1.values.items() for b, y in T2.values.items()}
    points = frozenset((a, b) for a in T1.trivial_points for b in T2.trivial_points)
    return CountTable(values, {}, points)


@dataclass
class CountFunctional:
    """The induced map C^0 -> k, as a dict on degree-0 strata."""

    values: dict
    report: Report


def eval_counts(S: StratumData, T: CountTable, field: BaseField = QQ) -> CountFunctional:
    """Evaluate counts and check the boundary relation on dimension-1 strata."""
    rep = Report()
    zero_strata = [p for p in S.model.elements if S.stratum_dim(p) == 0]
    missing = [p for p in zero_strata if p not in T.values]
    if missing:
        raise KeyError(f"count table misses dimension-0 strata {missing!r}")
    values = {p: field(T.values[p]) for p in zero_strata}
    for q in S.model.elements:
        if S.stratum_dim(q) != 1:
            continue
        total = field.zero
        for a, b in codim_one_covers(S.model):
            if a == q:
                total = total + S.sign(a, b) * values[b]
        if total:
            rep.fail(f"boundary of the 1-dimensional stratum {q!r} has total count "
                     f"{field.format(total)}", stratum=repr(q), residual=field.format(total))
    rep.merge(T.validate(field))
    return CountFunctional(values, rep)


# ---------------------------------------------------------------------------
# refinements


@dataclass
class Pushforward:
    coarse: StratumData
    map: ChainMap
    report: Report


def refine_pushforward(pi: Refinement, fine: StratumData, weights: Mapping | None = None,
                       field: BaseField = QQ) -> Pushforward:
    """The coarse stratum complex over P and its cochain map into the fine one.

    A coarse stratum maps to the signed sum (``weights``, default +1) of the
    fine strata over it of the same codimension.  Coarse signs are read off
    from the fine differential; the report carries the refinement check and
    the chain-map check.
    """
    rep = Report()
    rep.merge(validate_refinement(pi), "refinement: ")
    Q, P = pi.source, pi.target
    w = {x: (weights or {}).get(x, 1) for x in Q.elements}
    top = {p: [x for x in pi.preimage(p) if Q.codim[x] == P.codim[p]] for p in P.elements}
    fine_c = build_stratum_complex(fine, field)
    image = {}
    for p in P.elements:
        image[p] = {x: field(w[x]) for x in top[p]}
    signs = {}
    for p, p2 in codim_one_covers(P):
        dfp = fine_c.d(image[p])
        coeff = None
        for x in top[p2]:
            c = dfp.get(x, field.zero)
            coeff = c * field(w[x])
            break
        if coeff is None or coeff not in (field(1), field(-1)):
            rep.fail(f"cannot read a unit sign for {p!r} -> {p2!r}", pair=[repr(p), repr(p2)])
            signs[(p, p2)] = 1
        else:
            signs[(p, p2)] = 1 if coeff == field(1) else -1
    coarse = StratumData(P, fine.dim, signs, fine.modulus)
    sub = coarse.check_signs()
    if not sub.ok:
        rep.merge(sub, "coarse signs: ")
        coarse = StratumData(P, fine.dim, {}, fine.modulus)
    coarse_c = GradedComplex(field, [(p, P.codim[p] - fine.dim) for p in P.elements],
                             {(a, b): coarse.sign(a, b) for a, b in codim_one_covers(P)},
                             fine.modulus)
    entries = {(p, x): c for p, img in image.items() for x, c in img.items()}
    m = ChainMap(coarse_c, fine_c, entries)
    rep.merge(check_chain_map(m), "chain map: ")
    return Pushforward(coarse, m, rep)
