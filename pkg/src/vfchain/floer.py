"""The Floer complex of a flow category over the truncated Novikov ring."""

from __future__ import annotations

from .coeff import NovikovElement, NovikovRing
from .flowcat import FlowCategory, broken_strata
from .homalg import GradedComplex, Homology, compose, differential_map, homology, label_to_json
from .report import Report
from .stratcx import CountTable, StratumData, codim_one_covers, solve_signs


class MissingCountError(KeyError):
    pass


def build_cf(X: FlowCategory) -> GradedComplex:
    """CF*(X): objects as generators, m(p -> p') = sum count * T^lam below e_max."""
    ring = NovikovRing(X.monoid, X.field)
    terms = {}
    for (p, q, g), m in X.morphisms.items():
        if m.vdim != 0 or not m.nonempty:
            continue
        if m.count is None:
            raise MissingCountError(f"descriptor ({p!r}, {q!r}, {g}) has no count")
        terms.setdefault((p, q), {})[g] = X.field(m.count)
    entries = {st: NovikovElement(X.monoid, X.field, t, X.e_max) for st, t in terms.items()}
    gens = [(p, X.objects[p]) for p in X.sorted_objects()]
    return GradedComplex(ring, gens, entries, X.modulus)


def differential_matrix(C: GradedComplex) -> list:
    """Matrix indexed [p][p'] (source row, target column)."""
    z = C.ring.zero
    m = [[z] * len(C) for _ in range(len(C))]
    for (s, t), c in C.entries.items():
        m[C.index(s)][C.index(t)] = c
    return m


def check_d_squared(C: GradedComplex) -> Report:
    """m^2 = 0 below the cutoff; failures are located by (p, p'', rho)."""
    rep = Report()
    dd = compose(differential_map(C), differential_map(C))
    for (s, t), x in sorted(dd.entries.items(), key=lambda kv: (C.index(kv[0][0]), C.index(kv[0][1]))):
        for g in x.support():
            c = x.terms[g]
            rep.fail(f"m^2 residual at ({s!r}, {t!r}, {list(g)}): {C.field.format(c)}",
                     source=label_to_json(s), target=label_to_json(t), label=list(g),
                     residual=C.field.format(c))
    rep.data["residual_terms"] = len(rep.data.get("violations", []))
    return rep


def cf_homology(C: GradedComplex) -> Homology:
    return homology(C)


def moduli_stratum_data(X: FlowCategory, p, q, g) -> StratumData:
    """Stratum data of a descriptor: dim = vdim, signs gauged so that every
    codim-one stratum enters the boundary of the top stratum with sign +1."""
    P = broken_strata(X, p, q, g)
    m = X.descriptor(p, q, g)
    signs = solve_signs(P)
    top = P.minimum()
    for a, b in codim_one_covers(P):
        if a == top and signs[(a, b)] == -1:
            for key in list(signs):
                if b in key:
                    signs[key] = -signs[key]
    return StratumData(P, m.vdim, signs, X.modulus)


def stratum_count_table(X: FlowCategory, S: StratumData) -> CountTable:
    """Counts on dimension-0 strata: products of the factor counts."""
    values = {}
    products = {}
    for s in S.model.elements:
        if S.stratum_dim(s) != 0:
            continue
        val = X.field.one
        for a, b, h in s:
            d = X.descriptor(a, b, h)
            if d.vdim != 0 or d.count is None:
                val = None
                break
            val = val * X.field(d.count)
        if val is None:
            raise MissingCountError(f"stratum {s!r} has a factor without count")
        values[s] = val
        if len(s) > 1:
            for f in s:
                values.setdefault((f,), X.field(X.descriptor(*f).count))
            products[s] = tuple((f,) for f in s)
    return CountTable(values, products)
