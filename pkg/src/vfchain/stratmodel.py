"""Finite poset models for manifolds with (partitioned) generalised corners.

Order convention: ``a < b`` means ``b`` is a boundary stratum of ``a``, so
codimension strictly increases along the order and the top stratum of a
corner model is its unique minimal element.

Sphere recognition is replaced by a homology check: a finite order complex
is accepted as a sphere of dimension n when its reduced integral homology is
Z in degree n and zero elsewhere (the empty complex is the (-1)-sphere).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import linalg
from .report import Report


class StratPoset:
    """A finite poset with a codimension function.

    ``relations`` may be any generating set of strict relations ``(a, b)``
    meaning ``a < b``; the transitive closure is computed.
    """

    def __init__(self, codim: Mapping, relations: Iterable = ()):
        self.codim = dict(codim)
        self.elements = tuple(sorted(self.codim, key=lambda e: (self.codim[e], repr(e))))
        gen = {e: set() for e in self.elements}
        for a, b in relations:
            if a not in gen or b not in gen:
                raise KeyError(f"relation ({a!r}, {b!r}) uses an unknown element")
            if a == b:
                raise ValueError(f"reflexive relation on {a!r}")
            gen[a].add(b)
        up = {}
        for e in reversed(self.elements):
            seen, stack = set(), list(gen[e])
            while stack:
                x = stack.pop()
                if x in seen:
                    continue
                seen.add(x)
                if x in up:
                    seen |= up[x]
                else:
                    stack.extend(gen[x])
            up[e] = seen
        for e, s in up.items():
            if e in s:
                raise ValueError(f"relations contain a cycle through {e!r}")
        self._up = {e: frozenset(s) for e, s in up.items()}
        down = {e: set() for e in self.elements}
        for a, s in self._up.items():
            for b in s:
                down[b].add(a)
        self._down = {e: frozenset(s) for e, s in down.items()}

    def __len__(self):
        return len(self.elements)

    def __contains__(self, e):
        return e in self.codim

    def lt(self, a, b) -> bool:
        return b in self._up[a]

    def le(self, a, b) -> bool:
        return a == b or b in self._up[a]

    def up(self, a, strict: bool = True) -> frozenset:
        return self._up[a] if strict else self._up[a] | {a}

    def down(self, a, strict: bool = True) -> frozenset:
        return self._down[a] if strict else self._down[a] | {a}

    def open_interval(self, a, b) -> frozenset:
        return self._up[a] & self._down[b]

    def relations(self) -> list:
        """All strict relations, canonically ordered."""
        key = self.sort_key
        return sorted(((a, b) for a in self.elements for b in self._up[a]),
                      key=lambda ab: (key(ab[0]), key(ab[1])))

    def covers(self) -> list:
        """Hasse diagram edges."""
        return [(a, b) for a, b in self.relations() if not self.open_interval(a, b)]

    def sort_key(self, e):
        return (self.codim[e], repr(e))

    def minimal_elements(self) -> list:
        return [e for e in self.elements if not self._down[e]]

    def maximal_elements(self) -> list:
        return [e for e in self.elements if not self._up[e]]

    def minimum(self):
        mins = self.minimal_elements()
        return mins[0] if len(mins) == 1 else None

    def max_codim(self) -> int:
        return max(self.codim.values(), default=0)

    def subposet(self, elements: Iterable, codim_shift: int = 0) -> "StratPoset":
        els = set(elements)
        return StratPoset({e: self.codim[e] + codim_shift for e in els},
                          [(a, b) for a in els for b in self._up[a] if b in els])

    def relabel(self, fn) -> "StratPoset":
        return StratPoset({fn(e): c for e, c in self.codim.items()},
                          [(fn(a), fn(b)) for a, b in self.covers()])

    def with_relations(self, add=(), remove=()) -> "StratPoset":
        """A new poset from the Hasse diagram with covers added or removed."""
        rel = set(self.covers())
        rel -= set(remove)
        rel |= set(add)
        return StratPoset(self.codim, rel)

    def __eq__(self, other):
        return (isinstance(other, StratPoset) and self.codim == other.codim
                and self._up == other._up)

    def __hash__(self):
        return hash(tuple(self.elements))

    def __repr__(self):
        return f"StratPoset({len(self.elements)} elements, max codim {self.max_codim()})"

    def to_json(self) -> dict:
        from .homalg import label_to_json
        return {
            "elements": [[label_to_json(e), self.codim[e]] for e in self.elements],
            "relations": [[label_to_json(a), label_to_json(b)] for a, b in self.covers()],
        }

    @classmethod
    def from_json(cls, data) -> "StratPoset":
        from .homalg import label_from_json
        codim = {}
        for e, c in data["elements"]:
            e = label_from_json(e)
            if e in codim:
                raise ValueError(f"duplicate element {e!r}")
            if not isinstance(c, int) or c < 0:
                raise ValueError(f"bad codimension {c!r} for {e!r}")
            codim[e] = c
        rel = [(label_from_json(a), label_from_json(b)) for a, b in data.get("relations", [])]
        return cls(codim, rel)


# ---------------------------------------------------------------------------
# order complexes and their homology


def order_complex(P: StratPoset, subset: Iterable | None = None) -> list:
    """All chains (as tuples in increasing order) of ``subset`` (default: all of P)."""
    els = set(P.elements if subset is None else subset)
    ordered = sorted(els, key=P.sort_key)
    above = {e: [x for x in ordered if x in P.up(e)] for e in ordered}
    chains = []

    def extend(chain):
        chains.append(tuple(chain))
        for x in above[chain[-1]]:
            chain.append(x)
            extend(chain)
            chain.pop()

    for e in ordered:
        extend([e])
    return chains


@dataclass
class ReducedHomology:
    """Reduced integral homology: ranks and torsion indexed by dimension >= -1."""

    ranks: dict
    torsion: dict = field(default_factory=dict)

    def is_sphere(self, n: int) -> bool:
        if any(self.torsion.values()):
            return False
        return all(r == (1 if k == n else 0) for k, r in self.ranks.items()) and \
            (self.ranks.get(n, 0) == 1)

    def is_acyclic(self) -> bool:
        return not any(self.ranks.values()) and not any(self.torsion.values())

    def describe(self) -> str:
        parts = []
        for k in sorted(self.ranks):
            if self.ranks[k] or self.torsion.get(k):
                t = "".join(f"+Z/{x}" for x in self.torsion.get(k, []))
                parts.append(f"H~{k}=Z^{self.ranks[k]}{t}")
        return ", ".join(parts) or "acyclic"


def reduced_homology(simplices: Iterable) -> ReducedHomology:
    """Reduced integral homology of a simplicial complex given by all its simplices.

    Simplices are tuples of vertices in a fixed order; the augmented chain
    complex includes the empty simplex in dimension -1.
    """
    by_dim: dict = {-1: [()]}
    for s in simplices:
        by_dim.setdefault(len(s) - 1, []).append(tuple(s))
    top = max(by_dim)
    index = {k: {s: i for i, s in enumerate(v)} for k, v in by_dim.items()}
    rank_tors = {}
    for k in range(0, top + 1):
        entries = {}
        lower = index[k - 1]
        for j, s in enumerate(by_dim.get(k, [])):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                entries[(lower[face], j)] = -1 if i % 2 else 1
        rank_tors[k] = linalg.integer_rank_torsion(entries, len(lower), len(by_dim.get(k, [])))
    ranks, torsion = {}, {}
    for k in range(-1, top + 1):
        n = len(by_dim.get(k, []))
        r_out = rank_tors.get(k, (0, []))[0]
        r_in, tors = rank_tors.get(k + 1, (0, []))
        ranks[k] = n - r_out - r_in
        if tors:
            torsion[k] = tors
    return ReducedHomology(ranks, torsion)


def is_homology_sphere(P: StratPoset, subset, n: int) -> tuple[bool, ReducedHomology]:
    subset = list(subset)
    if n < -1:
        return False, ReducedHomology({})
    h = reduced_homology(order_complex(P, subset))
    return h.is_sphere(n), h


def interval_check(P: StratPoset, a, b) -> tuple[bool, str]:
    gap = P.codim[b] - P.codim[a]
    inside = P.open_interval(a, b)
    ok, h = is_homology_sphere(P, inside, gap - 2)
    return ok, h.describe()


# ---------------------------------------------------------------------------
# validation


def _check_codim_monotone(P: StratPoset, rep: Report):
    for a, b in P.relations():
        if P.codim[b] <= P.codim[a]:
            rep.fail(f"codim does not increase along {a!r} < {b!r}",
                     pair=[repr(a), repr(b)], check="codim")


def validate_model(Q: StratPoset, stop_early: bool = False) -> Report:
    """Check the corner-model conditions on a finite poset."""
    rep = Report()
    rep.data["sphere_check"] = "reduced integral homology"
    mins = Q.minimal_elements()
    if len(mins) != 1:
        rep.fail(f"expected a unique minimal element, found {len(mins)}", check="minimum")
        if stop_early:
            return rep
    _check_codim_monotone(Q, rep)
    if not rep.ok and stop_early:
        return rep
    _check_intervals(Q, Q.relations(), rep, stop_early)
    return rep


def _check_intervals(Q: StratPoset, pairs, rep: Report, stop_early: bool):
    for a, b in pairs:
        gap = Q.codim[b] - Q.codim[a]
        if gap < 1:
            continue
        ok, desc = interval_check(Q, a, b)
        if not ok:
            rep.fail(f"open interval ({a!r}, {b!r}) is not a homology {gap - 2}-sphere: {desc}",
                     pair=[repr(a), repr(b)], check="link", homology=desc)
            if stop_early:
                return


def codim2_interval_sizes(Q: StratPoset) -> dict:
    """Sizes of all open intervals between elements of codim gap two."""
    return {(a, b): len(Q.open_interval(a, b)) for a, b in Q.relations()
            if Q.codim[b] - Q.codim[a] == 2}


@dataclass
class PartitionedModel:
    """A stratified poset without the initial element requirement.

    ``kinds`` optionally records a claimed interior/boundary classification,
    which validation compares against the recomputed one.
    """

    poset: StratPoset
    kinds: dict = field(default_factory=dict)

    def classify(self) -> dict:
        return classify_elements(self.poset)

    def boundary(self) -> list:
        c = self.classify()
        return [e for e in self.poset.elements if c[e] == "boundary"]


def classify_elements(P: StratPoset) -> dict:
    """interior / boundary / invalid for each element, from its punctured down-set."""
    out = {}
    for e in P.elements:
        h = reduced_homology(order_complex(P, P.down(e)))
        n = P.codim[e] - 1
        if h.is_sphere(n):
            out[e] = "interior"
        elif h.is_acyclic():
            out[e] = "boundary"
        else:
            out[e] = "invalid"
    return out


def validate_partitioned(M: PartitionedModel | StratPoset, without_boundary: bool = False) -> Report:
    """Check a model for partitioned manifolds (optionally without boundary)."""
    if isinstance(M, StratPoset):
        M = PartitionedModel(M)
    P = M.poset
    rep = Report()
    _check_codim_monotone(P, rep)
    kinds = classify_elements(P)
    rep.data["kinds"] = {repr(e): k for e, k in kinds.items()}
    for e in P.elements:
        if kinds[e] == "invalid":
            rep.fail(f"punctured down-set of {e!r} is neither a homology sphere nor acyclic",
                     element=repr(e), check="ball")
        elif e in M.kinds and M.kinds[e] != kinds[e]:
            rep.fail(f"{e!r} declared {M.kinds[e]} but is {kinds[e]}", element=repr(e),
                     check="classification")
        if without_boundary and kinds[e] == "boundary":
            rep.fail(f"{e!r} is a boundary element", element=repr(e), check="no-boundary")
    _check_intervals(P, P.relations(), rep, False)
    bnd = [e for e in P.elements if kinds[e] == "boundary"]
    for e in bnd:
        for x in P.up(e):
            if kinds[x] != "boundary":
                rep.fail(f"boundary element {e!r} lies below non-boundary {x!r}",
                         pair=[repr(e), repr(x)], check="boundary-closed")
    if bnd and not without_boundary and rep.ok:
        sub = P.subposet(bnd, codim_shift=-1)
        if any(c < 0 for c in sub.codim.values()):
            rep.fail("a codimension-0 element is classified as boundary", check="boundary")
        else:
            rep.merge(validate_partitioned(PartitionedModel(sub), without_boundary=True),
                      "boundary: ")
    return rep


# ---------------------------------------------------------------------------
# products and refinements


def product_model(Q1: StratPoset, Q2: StratPoset) -> StratPoset:
    """Product poset, codim additive, labels are pairs."""
    codim = {(a, b): Q1.codim[a] + Q2.codim[b] for a in Q1.elements for b in Q2.elements}
    rel = [((a, b), (a2, b)) for a, a2 in Q1.covers() for b in Q2.elements]
    rel += [((a, b), (a, b2)) for b, b2 in Q2.covers() for a in Q1.elements]
    return StratPoset(codim, rel)


def product_many(models: list) -> StratPoset:
    """Iterated product with flat tuple labels."""
    out = point_model().relabel(lambda e: ())
    for Q in models:
        out = product_model(out, Q).relabel(lambda e: e[0] + (e[1],))
    return out


@dataclass
class Refinement:
    """A monotone map ``pi: Q -> P`` between models."""

    source: StratPoset
    target: StratPoset
    mapping: dict

    def __call__(self, x):
        return self.mapping[x]

    def fibre(self, p) -> list:
        """Right fibre over p: elements x with p <= pi(x)."""
        return [x for x in self.source.elements if self.target.le(p, self.mapping[x])]

    def preimage(self, p) -> list:
        return [x for x in self.source.elements if self.mapping[x] == p]

    def to_json(self) -> dict:
        from .homalg import label_to_json
        return {"source": self.source.to_json(), "target": self.target.to_json(),
                "map": [[label_to_json(a), label_to_json(b)]
                        for a, b in sorted(self.mapping.items(), key=lambda kv: repr(kv[0]))]}


def validate_refinement(pi: Refinement) -> Report:
    """Check conditions (1)-(4) for a refinement; (4) is checked mod 2."""
    Q, P, f = pi.source, pi.target, pi.mapping
    rep = Report()
    for x in Q.elements:
        if x not in f or f[x] not in P:
            rep.fail(f"{x!r} has no image", element=repr(x), check="map")
    if not rep.ok:
        return rep
    for a, b in Q.relations():
        if not P.le(f[a], f[b]):
            rep.fail(f"map is not monotone on {a!r} < {b!r}", pair=[repr(a), repr(b)],
                     check="monotone")
    for x in Q.elements:
        if Q.codim[x] < P.codim[f[x]]:
            rep.fail(f"codim decreases at {x!r}", element=repr(x), check="codim")
    for p in P.elements:
        over = pi.preimage(p)
        # (1)
        if not over or min(Q.codim[x] for x in over) != P.codim[p]:
            got = min((Q.codim[x] for x in over), default=None)
            rep.fail(f"(1) minimal codim over {p!r} is {got}, expected {P.codim[p]}",
                     element=repr(p), condition=1)
            continue
        # (2)
        fib_els = pi.fibre(p)
        fib = Q.subposet(fib_els, codim_shift=-P.codim[p])
        sub = validate_partitioned(PartitionedModel(fib))
        if not sub.ok:
            rep.fail(f"(2) right fibre over {p!r} is not a partitioned model", element=repr(p),
                     condition=2)
            rep.merge(sub, f"  fibre {p!r}: ")
            continue
        # (3)
        kinds = classify_elements(fib)
        bnd = {x for x in fib_els if kinds[x] == "boundary"}
        expect = {x for x in fib_els if P.lt(p, f[x])}
        if bnd != expect:
            rep.fail(f"(3) boundary of the fibre over {p!r} differs from the strata over "
                     f"the boundary of {p!r}", element=repr(p), condition=3,
                     extra=sorted(map(repr, bnd - expect)), missing=sorted(map(repr, expect - bnd)))
    # (4)
    for x in Q.elements:
        if Q.codim[x] != P.codim[f[x]]:
            continue
        ok, detail = _degree_mod2(Q, P, f, x)
        if not ok:
            rep.fail(f"(4) map of down-sets at {x!r} has even degree: {detail}",
                     element=repr(x), condition=4)
    return rep


def _top_chains(P: StratPoset, top) -> list:
    """Maximal chains of the down-set of ``top`` that have one element per codim."""
    n = P.codim[top]
    return [c for c in order_complex(P, P.down(top, strict=False))
            if len(c) == n + 1 and c[-1] == top and P.codim[c[0]] == 0]


def _degree_mod2(Q, P, f, x) -> tuple[bool, str]:
    counts = {c: 0 for c in _top_chains(P, f[x])}
    for c in _top_chains(Q, x):
        img = tuple(f[y] for y in c)
        if img in counts:
            counts[img] += 1
    bad = [c for c, k in counts.items() if k % 2 == 0]
    return not bad, f"{len(bad)} top simplices with even preimage count"


def refinement_from_json(data) -> Refinement:
    from .homalg import label_from_json
    Q = StratPoset.from_json(data["source"])
    P = StratPoset.from_json(data["target"])
    m = {label_from_json(a): label_from_json(b) for a, b in data["map"]}
    return Refinement(Q, P, m)


# ---------------------------------------------------------------------------
# standard models


def point_model(codim: int = 0) -> StratPoset:
    return StratPoset({"pt": codim})


def interval_model() -> StratPoset:
    """[0,1]: the top stratum and two endpoints."""
    return StratPoset({"top": 0, "e0": 1, "e1": 1}, [("top", "e0"), ("top", "e1")])


def half_interval_model() -> StratPoset:
    """[0,1): top stratum and one endpoint."""
    return StratPoset({"top": 0, "e": 1}, [("top", "e")])


def boolean_model(n: int) -> StratPoset:
    """The corner [0,1)^n: subsets of {0..n-1}, codim = size."""
    subsets = [frozenset(s) for k in range(n + 1) for s in itertools.combinations(range(n), k)]
    codim = {tuple(sorted(s)): len(s) for s in subsets}
    rel = [(tuple(sorted(s)), tuple(sorted(s | {i}))) for s in subsets for i in range(n) if i not in s]
    return StratPoset(codim, rel)


def cube_face_model(n: int) -> StratPoset:
    """Faces of [0,1]^n as strings over 0, 1, *; codim = number of fixed coordinates."""
    faces = ["".join(t) for t in itertools.product("*01", repeat=n)]
    codim = {f: n - f.count("*") for f in faces}
    rel = []
    for f in faces:
        for i, ch in enumerate(f):
            if ch == "*":
                rel.append((f, f[:i] + "0" + f[i + 1:]))
                rel.append((f, f[:i] + "1" + f[i + 1:]))
    return StratPoset(codim, rel)


def simplex_face_model(n: int) -> StratPoset:
    """Faces of the n-simplex as vertex tuples; codim = n - dim."""
    faces = [s for k in range(1, n + 2) for s in itertools.combinations(range(n + 1), k)]
    codim = {s: n + 1 - len(s) for s in faces}
    rel = [(s, s[:i] + s[i + 1:]) for s in faces if len(s) > 1 for i in range(len(s))]
    return StratPoset(codim, rel)


def polygon_model(k: int) -> StratPoset:
    """A k-gon (k >= 2): top, k edges, k vertices."""
    codim = {"top": 0}
    rel = []
    for i in range(k):
        codim[("e", i)] = 1
        codim[("v", i)] = 2
        rel.append(("top", ("e", i)))
        rel.append((("e", i), ("v", i)))
        rel.append((("e", i), ("v", (i + 1) % k)))
    return StratPoset(codim, rel)


def two_halves_model() -> StratPoset:
    """An interval cut into two halves at a midpoint: a partitioned model."""
    return StratPoset({"h0": 0, "h1": 0, "mid": 1, "e0": 1, "e1": 1},
                      [("h0", "mid"), ("h1", "mid"), ("h0", "e0"), ("h1", "e1")])


def two_halves_refinement() -> Refinement:
    return Refinement(two_halves_model(), interval_model(),
                      {"h0": "top", "h1": "top", "mid": "top", "e0": "e0", "e1": "e1"})


def identity_refinement(P: StratPoset) -> Refinement:
    return Refinement(P, P, {e: e for e in P.elements})


BASIC_MODELS = {
    "point": (point_model, 0),
    "interval": (interval_model, 1),
    "half_interval": (half_interval_model, 1),
    "bigon": (lambda: polygon_model(2), 2),
    "triangle": (lambda: polygon_model(3), 2),
    "pentagon": (lambda: polygon_model(5), 2),
    "corner2": (lambda: boolean_model(2), 2),
    "simplex2": (lambda: simplex_face_model(2), 2),
    "simplex3": (lambda: simplex_face_model(3), 3),
    "corner3": (lambda: boolean_model(3), 3),
}


def random_model(rng, max_codim: int) -> StratPoset:
    """A random product of basic valid models with max codim at most ``max_codim``."""
    budget = max_codim
    factors = []
    names = sorted(BASIC_MODELS)
    while budget > 0 and rng.random() < 0.8:
        choices = [n for n in names if 0 < BASIC_MODELS[n][1] <= budget]
        if not choices:
            break
        name = rng.choice(choices)
        factors.append(BASIC_MODELS[name][0]())
        budget -= BASIC_MODELS[name][1]
    if not factors:
        return point_model()
    return product_many(factors)


def mutate_model(P: StratPoset, rng) -> tuple[StratPoset, tuple]:
    """Remove one cover relation or add one new relation of increasing codim.

    Returns the mutated poset and ``(kind, a, b)``.
    """
    covers = P.covers()
    addable = [(a, b) for a in P.elements for b in P.elements
               if P.codim[a] < P.codim[b] and not P.lt(a, b)]
    if covers and (not addable or rng.random() < 0.5):
        a, b = rng.choice(covers)
        return P.with_relations(remove=[(a, b)]), ("remove", a, b)
    if not addable:
        raise ValueError("nothing to mutate")
    a, b = rng.choice(addable)
    return P.with_relations(add=[(a, b)]), ("add", a, b)
