"""Flow categories with energy-truncated morphism tables.

Objects carry degrees; morphisms ``(p, p', lam)`` carry a descriptor with a
virtual dimension and, in dimension zero, a count.  Broken strata are
sequences of composable recorded descriptors; a stratum is stored as the
tuple of its factors ``((p, p1, lam0), (p1, p2, lam1), ...)``, which is also
its canonical maximal factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import INF, QQ, BaseField, GammaMonoid, format_rational, parse_rational
from .homalg import label_from_json, label_to_json
from .report import Report
from .stratmodel import StratPoset, validate_model


class EnergyError(ValueError):
    """A request reaches beyond the recorded energy window."""


@dataclass(frozen=True)
class MorphismDescriptor:
    vdim: int
    count: object = None
    nonempty: bool = True


def default_order_key(degree: int, label) -> tuple:
    return (degree, repr(label))


@dataclass
class FlowCategory:
    """Objects with degrees and a finite table of morphism descriptors.

    ``order`` is an optional set of pairs ``(p, q)`` declaring ``p < q``; when
    omitted objects are ordered by degree and then label.  ``e_max`` is an
    exclusive energy bound: descriptors of action ``>= e_max`` are not
    recorded.
    """

    monoid: GammaMonoid
    objects: dict
    morphisms: dict = field(default_factory=dict)
    e_max: object = INF
    field: BaseField = QQ
    modulus: int = 0
    order: frozenset | None = None

    def __post_init__(self):
        self.morphisms = {(p, q, self.monoid.check(g)): m for (p, q, g), m in self.morphisms.items()}
        if self.e_max not in (None, INF):
            self.e_max = parse_rational(self.e_max)
        elif self.e_max is None:
            self.e_max = INF
        self._out = {}
        for (p, q, g), m in self.morphisms.items():
            if m.nonempty:
                self._out.setdefault(p, []).append((q, g))
        for v in self._out.values():
            v.sort(key=lambda qg: (self.monoid.key(qg[1]), repr(qg[0])))

    def degree(self, p) -> int:
        d = self.objects[p]
        return d % self.modulus if self.modulus else d

    def less(self, p, q) -> bool:
        if self.order is not None:
            return (p, q) in self.order
        return default_order_key(self.objects[p], p) < default_order_key(self.objects[q], q)

    def descriptor(self, p, q, g) -> MorphismDescriptor | None:
        return self.morphisms.get((p, q, tuple(g)))

    def nonempty(self, p, q, g) -> bool:
        m = self.morphisms.get((p, q, tuple(g)))
        return m is not None and m.nonempty

    def outgoing(self, p) -> list:
        return self._out.get(p, [])

    def action(self, g) -> Fraction:
        return self.monoid.action(g)

    def sorted_objects(self) -> list:
        return sorted(self.objects, key=lambda p: default_order_key(self.objects[p], p))

    # serialization
    def to_json(self) -> dict:
        out = {
            "field": self.field.name(),
            "modulus": self.modulus,
            "action_vector": [format_rational(a) for a in self.monoid.action_vector],
            "e_max": "inf" if self.e_max == INF else format_rational(self.e_max),
            "objects": [[label_to_json(p), self.objects[p]] for p in self.sorted_objects()],
            "morphisms": [],
        }
        for (p, q, g), m in sorted(self.morphisms.items(), key=lambda kv: repr(kv[0])):
            row = [label_to_json(p), label_to_json(q), list(g), m.vdim]
            if m.count is not None:
                row.append(self.field.format(m.count))
            if not m.nonempty:
                row.append({"nonempty": False})
            out["morphisms"].append(row)
        if self.order is not None:
            out["order"] = [[label_to_json(a), label_to_json(b)] for a, b in sorted(self.order, key=repr)]
        return out

    @classmethod
    def from_json(cls, data) -> "FlowCategory":
        fld = BaseField.parse(data.get("field", "q"))
        monoid = GammaMonoid(tuple(data.get("action_vector", [])))
        objects = {label_from_json(p): int(d) for p, d in data["objects"]}
        morphisms = {}
        for row in data.get("morphisms", []):
            p, q, g, vdim = label_from_json(row[0]), label_from_json(row[1]), tuple(row[2]), int(row[3])
            count, nonempty = None, True
            for extra in row[4:]:
                if isinstance(extra, dict):
                    nonempty = extra.get("nonempty", True)
                else:
                    count = fld(parse_rational(extra))
            morphisms[(p, q, g)] = MorphismDescriptor(vdim, count, nonempty)
        e_max = data.get("e_max", "inf")
        e_max = INF if e_max in ("inf", None) else parse_rational(e_max)
        order = data.get("order")
        if order is not None:
            order = frozenset((label_from_json(a), label_from_json(b)) for a, b in order)
        return cls(monoid, objects, morphisms, e_max, fld, int(data.get("modulus", 0)), order)


# ---------------------------------------------------------------------------
# broken strata


def _factor_ok(X: FlowCategory, p, q, g) -> bool:
    if not X.nonempty(p, q, g):
        return False
    return X.action(g) != 0 or X.less(p, q)


def stratum_sequences(X: FlowCategory, p, q, g) -> list:
    """All factor sequences from p to q with labels summing to g."""
    g = X.monoid.check(g)
    if X.action(g) >= X.e_max:
        raise EnergyError(f"action {X.action(g)} is beyond the energy bound {X.e_max}")
    out = []

    def extend(cur, remaining, acc):
        rem_action = X.action(remaining)
        for nxt, h in X.outgoing(cur):
            if X.action(h) > rem_action:
                continue
            if not _factor_ok(X, cur, nxt, h):
                continue
            rest = X.monoid.sub(remaining, h)
            acc.append((cur, nxt, h))
            if nxt == q and not any(rest):
                out.append(tuple(acc))
            extend(nxt, rest, acc)
            acc.pop()

    extend(p, g, [])
    return out


def broken_strata(X: FlowCategory, p, q, g) -> StratPoset:
    """The poset of broken strata of the descriptor (p, q, g)."""
    g = X.monoid.check(g)
    if X.descriptor(p, q, g) is None:
        raise KeyError(f"descriptor ({p!r}, {q!r}, {g}) is not recorded")
    seqs = stratum_sequences(X, p, q, g)
    elements = set(seqs)
    codim = {s: len(s) - 1 for s in seqs}
    rel = []
    for s in seqs:
        for i in range(len(s) - 1):
            m = merge_at(X, s, i)
            if m in elements:
                rel.append((m, s))
    return StratPoset(codim, rel)


def merge_at(X: FlowCategory, s: tuple, i: int) -> tuple:
    """Merge factors i and i+1 of a stratum."""
    a, b = s[i], s[i + 1]
    merged = (a[0], b[1], X.monoid.add(a[2], b[2]))
    return s[:i] + (merged,) + s[i + 2:]


def concatenate(*strata) -> tuple:
    """Composition of strata: concatenation of factor sequences."""
    out = ()
    for i, s in enumerate(strata):
        if i and out[-1][1] != s[0][0]:
            raise ValueError("strata are not composable")
        out = out + tuple(s)
    return out


def stratum_label(s: tuple) -> tuple:
    """(p, lam0, p1, lam1, ..., lamk, p')."""
    out = [s[0][0]]
    for _, q, g in s:
        out += [g, q]
    return tuple(out)


def canonical_factorized_lift(X: FlowCategory, p, q, g, stratum: tuple) -> list:
    """The maximal factorization of a broken stratum into recorded descriptors."""
    g = X.monoid.check(g)
    if not stratum or stratum[0][0] != p or stratum[-1][1] != q:
        raise ValueError("stratum does not run from p to q")
    total = X.monoid.zero
    for i, (a, b, h) in enumerate(stratum):
        if X.descriptor(a, b, h) is None:
            raise KeyError(f"constituent ({a!r}, {b!r}, {h}) missing from the table")
        if i and stratum[i - 1][1] != a:
            raise ValueError("factors are not composable")
        total = X.monoid.add(total, h)
    if total != g:
        raise ValueError("labels do not sum to the descriptor label")
    return [(a, b, h) for a, b, h in stratum]


def grouping(X: FlowCategory, coarse: tuple, fine: tuple) -> list | None:
    """Blocks of consecutive fine factors merging to each coarse factor, or None."""
    blocks = []
    i = 0
    for a, b, h in coarse:
        start = i
        acc = X.monoid.zero
        while i < len(fine):
            acc = X.monoid.add(acc, fine[i][2])
            i += 1
            if fine[i - 1][1] == b and acc == tuple(h):
                break
        else:
            return None
        if fine[start][0] != a:
            return None
        blocks.append((start, i))
    return blocks if i == len(fine) else None


# ---------------------------------------------------------------------------
# validation


def validate_flow_category(X: FlowCategory, check_strata: bool = True) -> Report:
    rep = Report()
    mon = X.monoid
    for (p, q, g), m in X.morphisms.items():
        where = dict(triple=[label_to_json(p), label_to_json(q), list(g)])
        if p not in X.objects or q not in X.objects:
            rep.fail(f"descriptor ({p!r}, {q!r}, {g}) uses an unknown object", **where)
            continue
        a = mon.action(g)
        if a < 0:
            rep.fail(f"label {g} of ({p!r}, {q!r}) has negative action", **where)
        if a >= X.e_max:
            rep.fail(f"descriptor ({p!r}, {q!r}, {g}) lies beyond the energy bound", **where)
        if a == 0 and m.nonempty and not X.less(p, q):
            rep.fail(f"action-zero descriptor ({p!r}, {q!r}) does not increase the order", **where)
        expected = X.objects[q] - X.objects[p] - 1
        if (X.modulus and (m.vdim - expected) % X.modulus) or (not X.modulus and m.vdim != expected):
            rep.fail(f"degree law fails on ({p!r}, {q!r}, {g}): vdim {m.vdim}, expected {expected}",
                     **where)
        if m.vdim != 0 and m.count is not None:
            rep.fail(f"count recorded on ({p!r}, {q!r}, {g}) of vdim {m.vdim}", **where)
        if m.vdim == 0 and m.nonempty and m.count is None:
            rep.fail(f"missing count on ({p!r}, {q!r}, {g})", **where)
    # additivity and closure under composition
    for (p, q, g), m in X.morphisms.items():
        if not m.nonempty:
            continue
        for r, h in X.outgoing(q):
            k = mon.add(g, h)
            if mon.action(k) >= X.e_max:
                continue
            m2 = X.morphisms[(q, r, h)]
            m3 = X.descriptor(p, r, k)
            where = dict(triple=[label_to_json(p), label_to_json(r), list(k)])
            if m3 is None or not m3.nonempty:
                rep.fail(f"composite ({p!r}, {r!r}, {k}) of nonempty descriptors is not recorded",
                         **where)
            elif m3.vdim != m.vdim + m2.vdim + 1:
                rep.fail(f"additivity fails at ({p!r}, {q!r}, {r!r}): {m3.vdim} != "
                         f"{m.vdim} + {m2.vdim} + 1", **where)
    if check_strata and rep.ok:
        for (p, q, g), m in sorted(X.morphisms.items(), key=lambda kv: repr(kv[0])):
            if not m.nonempty:
                continue
            P = broken_strata(X, p, q, g)
            sub = validate_model(P, stop_early=True)
            if not sub.ok:
                rep.fail(f"broken strata of ({p!r}, {q!r}, {g}) do not form a corner model",
                         triple=[label_to_json(p), label_to_json(q), list(g)])
                rep.merge(sub, "  ")
    return rep
