"""Discrete Morse ingestion and the simplicial homology oracle.

A finite simplicial complex with an acyclic matching produces a flow
category whose objects are the critical cells.  Counts come from the
algebraic Morse reduction (Gaussian elimination of matched pairs), which
also yields the chain maps and homotopies used to build continuation data.
Gradient-path enumeration gives an independent check of the counts.
"""

from __future__ import annotations

import itertools
import random
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import linalg
from .coeff import INF, QQ, ZZ, BaseField, GammaMonoid
from .flowcat import FlowCategory, MorphismDescriptor
from .homalg import GradedComplex, Homology, homology
from .report import Report

FIXTURES = ("s1", "s2", "t2", "rp2", "klein")


class ComplexFormatError(ValueError):
    pass


def _vertex_key(v):
    return (0, int(v), "") if isinstance(v, int) or str(v).lstrip("-").isdigit() else (1, 0, str(v))


class SimplicialComplex:
    """A finite simplicial complex closed under faces.

    Simplices are tuples of vertices sorted by a global vertex order, and the
    incidence ``[s : s - v_i]`` is ``(-1)^i``.
    """

    def __init__(self, facets, name: str = ""):
        self.name = name
        facets = [tuple(f) for f in facets]
        verts = sorted({v for f in facets for v in f}, key=_vertex_key)
        self.vertices = verts
        order = {v: i for i, v in enumerate(verts)}
        cleaned = []
        seen = set()
        for f in facets:
            if not f:
                raise ComplexFormatError("empty facet")
            if len(set(f)) != len(f):
                raise ComplexFormatError(f"facet {f} repeats a vertex")
            s = tuple(sorted(f, key=order.__getitem__))
            if s in seen:
                warnings.warn(f"duplicate facet {s} ignored", stacklevel=2)
                continue
            seen.add(s)
            cleaned.append(s)
        faces = set()
        for s in cleaned:
            for k in range(1, len(s) + 1):
                faces.update(itertools.combinations(s, k))
        self.cells = sorted(faces, key=lambda s: (len(s), [order[v] for v in s]))
        self.index = {s: i for i, s in enumerate(self.cells)}
        self.facets = cleaned

    def dim(self, s) -> int:
        return len(s) - 1

    @property
    def dimension(self) -> int:
        return max((len(s) for s in self.cells), default=0) - 1

    def of_dim(self, k: int) -> list:
        return [s for s in self.cells if len(s) == k + 1]

    def boundary(self, s) -> list:
        """[(face, sign)]"""
        if len(s) == 1:
            return []
        return [(s[:i] + s[i + 1:], -1 if i % 2 else 1) for i in range(len(s))]

    def cofaces(self) -> dict:
        out = {s: [] for s in self.cells}
        for s in self.cells:
            for f, e in self.boundary(s):
                out[f].append((s, e))
        return out

    def f_vector(self) -> tuple:
        return tuple(len(self.of_dim(k)) for k in range(self.dimension + 1))

    def euler(self) -> int:
        return sum((-1) ** k * n for k, n in enumerate(self.f_vector()))

    def check_incidence(self) -> Report:
        rep = Report()
        for s in self.cells:
            acc = {}
            for f, e in self.boundary(s):
                for g, e2 in self.boundary(f):
                    acc[g] = acc.get(g, 0) + e * e2
            if any(acc.values()):
                rep.fail(f"boundary of boundary of {s} is nonzero")
        return rep

    def chain_complex(self, ring: BaseField = QQ) -> GradedComplex:
        """The cochain complex: cells in degree dim, delta = transpose of the boundary."""
        gens = [(s, self.dim(s)) for s in self.cells]
        diff = {(f, s): e for s in self.cells for f, e in self.boundary(s)}
        return GradedComplex(ring, gens, diff)

    def __repr__(self):
        return f"SimplicialComplex({self.name or 'anonymous'}, f={self.f_vector()})"


def parse_facets(text: str) -> list:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        out.append(tuple(int(t) if t.lstrip("-").isdigit() else t for t in line.split()))
    if not out:
        raise ComplexFormatError("no facets")
    return out


def load_complex(path) -> SimplicialComplex:
    """Read a facet-list file: one facet per line, whitespace-separated labels."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ComplexFormatError(str(exc)) from exc
    K = SimplicialComplex(parse_facets(text), p.stem)
    if not K.check_incidence().ok:
        raise ComplexFormatError("incidence check failed")
    return K


def fixture(name: str) -> SimplicialComplex:
    """One of the bundled complexes: triangle, s1, s2, t2, rp2, klein."""
    text = resources.files("vfchain").joinpath("data").joinpath(f"{name}.txt").read_text()
    return SimplicialComplex(parse_facets(text), name)


def cone(K: SimplicialComplex, apex="c") -> SimplicialComplex:
    return SimplicialComplex([f + (apex,) for f in K.facets], f"cone({K.name})")


def random_complex(rng: random.Random, max_cells: int = 200, max_vertices: int = 10) -> SimplicialComplex:
    """A random complex with at most ``max_cells`` cells, built from random facets."""
    while True:
        nv = rng.randint(3, max_vertices)
        facets = []
        for _ in range(rng.randint(1, 5 * nv)):
            k = rng.choice([1, 2, 2, 3, 3, 3, 4, 4])
            facets.append(tuple(rng.sample(range(nv), min(k, nv))))
        K = SimplicialComplex(_dedupe(facets))
        if len(K.cells) <= max_cells:
            return K


def _dedupe(facets):
    seen, out = set(), []
    for f in facets:
        key = tuple(sorted(f))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


# ---------------------------------------------------------------------------
# the oracle


def simplicial_homology(K: SimplicialComplex, ring: BaseField = ZZ) -> Homology:
    """Homology by Smith normal form (Z) or exact rank (fields), degrees = dims."""
    betti, torsion = {}, {}
    ranks = {}
    for k in range(1, K.dimension + 1):
        rows = {s: i for i, s in enumerate(K.of_dim(k - 1))}
        entries = {}
        for j, s in enumerate(K.of_dim(k)):
            for f, e in K.boundary(s):
                entries[(rows[f], j)] = e
        if ring.kind == "integers":
            ranks[k] = linalg.integer_rank_torsion(entries, len(rows), len(K.of_dim(k)))
        elif ring.kind == "prime":
            ranks[k] = (linalg.modp_rank(entries, ring.characteristic), [])
        else:
            ranks[k] = (linalg.integer_rank_torsion(entries, len(rows), len(K.of_dim(k)))[0], [])
    for k in range(K.dimension + 1):
        n = len(K.of_dim(k))
        b = n - ranks.get(k, (0, []))[0] - ranks.get(k + 1, (0, []))[0]
        betti[k] = b
        if ranks.get(k + 1, (0, []))[1]:
            torsion[k] = ranks[k + 1][1]
    return Homology(betti, torsion)


def simplicial_cohomology_ranks(K: SimplicialComplex, ring: BaseField) -> dict:
    return homology(K.chain_complex(ring)).betti


# ---------------------------------------------------------------------------
# matchings


@dataclass
class DiscreteMorseData:
    """An acyclic matching: pairs (face, coface) and the critical cells."""

    complex: SimplicialComplex
    pairs: list
    critical: list

    def __post_init__(self):
        self.partner = {}
        for a, b in self.pairs:
            self.partner[a] = b
            self.partner[b] = a

    def is_matched_up(self, s) -> bool:
        """s is the lower cell of a pair."""
        t = self.partner.get(s)
        return t is not None and len(t) > len(s)

    def validate(self) -> Report:
        return validate_matching(self.complex, self)

    def to_json(self) -> dict:
        return {"pairs": [[list(a), list(b)] for a, b in self.pairs]}


def validate_matching(K: SimplicialComplex, M: DiscreteMorseData) -> Report:
    rep = Report()
    used = set()
    for a, b in M.pairs:
        if a not in K.index or b not in K.index:
            rep.fail(f"pair ({a}, {b}) uses a cell not in the complex")
            continue
        if len(b) != len(a) + 1 or not set(a) <= set(b):
            rep.fail(f"pair ({a}, {b}) is not a codimension-one face pair")
        if a in used or b in used:
            rep.fail(f"cell in ({a}, {b}) is matched twice")
        used.update((a, b))
    crit = sorted(set(K.cells) - used, key=K.index.__getitem__)
    if sorted(M.critical, key=K.index.__getitem__) != crit:
        rep.fail("critical cells do not match the unmatched cells")
    if rep.ok:
        cyc = find_vpath_cycle(K, M)
        if cyc:
            rep.fail(f"matching has a closed V-path through {cyc[0]}", cycle=[list(c) for c in cyc])
    return rep


def find_vpath_cycle(K: SimplicialComplex, M: DiscreteMorseData) -> list | None:
    """A directed cycle in the modified Hasse diagram, or None (certificate of acyclicity)."""
    succ = {s: [] for s in K.cells}
    for s in K.cells:
        for f, _ in K.boundary(s):
            if M.partner.get(f) == s:
                succ[f].append(s)  # matched: up
            else:
                succ[s].append(f)  # unmatched: down
    color = {s: 0 for s in K.cells}
    for root in K.cells:
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        path = [root]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
                continue
            if color[nxt] == 1:
                return path[path.index(nxt):]
            if color[nxt] == 0:
                color[nxt] = 1
                stack.append((nxt, iter(succ[nxt])))
                path.append(nxt)
    return None


def find_matching(K: SimplicialComplex, seed: int = 0, extra_critical: float = 0.0) -> DiscreteMorseData:
    """Random acyclic matching by randomized elementary collapses.

    When no free face is available (or, with probability ``extra_critical``,
    at any step) a random maximal remaining cell is declared critical.
    """
    rng = random.Random(seed)
    alive = set(K.cells)
    cof = {s: set(c for c, _ in v) for s, v in K.cofaces().items()}
    faces = {s: set(f for f, _ in K.boundary(s)) for s in K.cells}
    alive_cof = {s: set(cof[s]) for s in K.cells}
    pairs, critical = [], []

    def remove(s):
        alive.discard(s)
        for f in faces[s]:
            alive_cof[f].discard(s)

    def free_pairs():
        return [(f, next(iter(alive_cof[f]))) for f in alive if len(alive_cof[f]) == 1]

    while alive:
        candidates = free_pairs()
        if candidates and rng.random() >= extra_critical:
            candidates.sort(key=lambda p: (K.index[p[0]], K.index[p[1]]))
            f, s = rng.choice(candidates)
            pairs.append((f, s))
            remove(s)
            remove(f)
            continue
        maximal = sorted((s for s in alive if not alive_cof[s]), key=K.index.__getitem__)
        top = max(len(s) for s in maximal)
        choice = rng.choice([s for s in maximal if len(s) == top])
        critical.append(choice)
        remove(choice)
    critical.sort(key=K.index.__getitem__)
    M = DiscreteMorseData(K, pairs, critical)
    if find_vpath_cycle(K, M) is not None:  # collapses are acyclic by construction
        raise AssertionError("internal error: cyclic matching")
    return M


def matching_from_json(K: SimplicialComplex, data) -> DiscreteMorseData:
    pairs = []
    for a, b in data["pairs"]:
        a = tuple(sorted(a, key=lambda v: K.vertices.index(v)))
        b = tuple(sorted(b, key=lambda v: K.vertices.index(v)))
        pairs.append((a, b))
    used = {c for p in pairs for c in p}
    crit = [s for s in K.cells if s not in used]
    return DiscreteMorseData(K, pairs, crit)


# ---------------------------------------------------------------------------
# algebraic Morse reduction


@dataclass
class MorseReduction:
    """Homological reduction of the simplicial chains onto the critical cells.

    ``boundary[t]`` is the Morse boundary of critical ``t`` as {cell: coeff}.
    ``proj`` (pi), ``incl`` (iota) are chain maps with pi iota = 1 and
    iota pi - 1 = dH + Hd, where ``homotopy`` is H (raising dimension by one).
    All maps are stored as {cell: {cell: coeff}}.
    """

    complex: SimplicialComplex
    matching: DiscreteMorseData
    boundary: dict
    proj: dict = field(default_factory=dict)
    incl: dict = field(default_factory=dict)
    homotopy: dict = field(default_factory=dict)


def _axpy(target: dict, coeff, source: dict):
    for k, v in source.items():
        nv = target.get(k, 0) + coeff * v
        if nv:
            target[k] = nv
        else:
            target.pop(k, None)


def morse_reduction(K: SimplicialComplex, M: DiscreteMorseData, track: bool = True) -> MorseReduction:
    """Eliminate matched pairs one at a time (integer arithmetic, unit pivots)."""
    bd = {s: {f: e for f, e in K.boundary(s)} for s in K.cells}
    cob = {s: {} for s in K.cells}  # cob[x][y] = <d y, x>
    for s, b in bd.items():
        for f, e in b.items():
            cob[f][s] = e
    alive = set(K.cells)
    proj = {s: {s: 1} for s in K.cells} if track else {}
    incl = {s: {s: 1} for s in K.cells} if track else {}
    # proj_inv[x] = cells c with x in proj[c], to update proj quickly
    proj_rev = {s: {s} for s in K.cells} if track else {}
    hom: dict = {}
    order = sorted(M.pairs, key=lambda p: (len(p[0]), K.index[p[0]], K.index[p[1]]))
    for a, b in order:
        u = bd[b].get(a, 0)
        if u not in (1, -1):
            raise ArithmeticError(f"pivot for pair ({a}, {b}) is {u}; matching is not acyclic")
        beta = {x: c for x, c in bd[b].items() if x != a}  # <db, x>
        alpha = {y: c for y, c in cob[a].items() if y != b}  # <dy, a>
        # update the boundary block: D - beta u^-1 alpha
        for y, ay in alpha.items():
            for x, bx in beta.items():
                nv = bd[y].get(x, 0) - bx * u * ay
                if nv:
                    bd[y][x] = nv
                    cob[x][y] = nv
                else:
                    bd[y].pop(x, None)
                    cob[x].pop(y, None)
        if track:
            # H += iota_prev h pi_prev, with h(a) = -u b
            iota_b = dict(incl[b])
            for c in list(proj_rev[a]):
                coeff = proj[c][a]
                _axpy(hom.setdefault(c, {}), -u * coeff, iota_b)
                if not hom[c]:
                    del hom[c]
            # pi_new = pi' pi_prev: a -> -u beta, b -> 0
            for c in list(proj_rev[a]):
                coeff = proj[c].pop(a)
                for x, bx in beta.items():
                    nv = proj[c].get(x, 0) - u * bx * coeff
                    if nv:
                        proj[c][x] = nv
                        proj_rev[x].add(c)
                    else:
                        proj[c].pop(x, None)
                        proj_rev[x].discard(c)
            for c in list(proj_rev[b]):
                proj[c].pop(b, None)
            del proj_rev[a], proj_rev[b]
            # iota_new(y) = iota_prev(y) - u alpha_y iota_prev(b)
            for y, ay in alpha.items():
                _axpy(incl[y], -u * ay, iota_b)
            del incl[a], incl[b]
        # remove a and b from the complex
        for x in list(bd[b]):
            cob[x].pop(b, None)
        for y in list(cob[a]):
            bd[y].pop(a, None)
        for x in list(bd[a]):
            cob[x].pop(a, None)
        for y in list(cob[b]):
            bd[y].pop(b, None)
        alive -= {a, b}
        del bd[a], bd[b], cob[a], cob[b]
    crit = set(M.critical)
    if alive != crit:
        raise AssertionError("reduction did not end on the critical cells")
    boundary = {t: dict(bd[t]) for t in M.critical}
    if track:
        proj = {c: {x: v for x, v in proj[c].items()} for c in K.cells}
        incl = {t: incl[t] for t in M.critical}
    return MorseReduction(K, M, boundary, proj, incl, hom)


def gradient_paths(K: SimplicialComplex, M: DiscreteMorseData, tau, sigma) -> list:
    """All gradient paths from critical tau down to critical sigma (dim one less),
    as (cell sequence, weight) with the elimination sign rule."""
    if len(sigma) != len(tau) - 1:
        raise ValueError("paths join cells of adjacent dimension")
    out = []

    def walk(cell, seq, w):
        for f, e in K.boundary(cell):
            if M.partner.get(cell) == f:
                continue
            if f == sigma:
                out.append((tuple(seq + [f]), w * e))
            elif M.is_matched_up(f):
                up = M.partner[f]
                e2 = dict(K.boundary(up))[f]
                walk(up, seq + [f, up], w * e * (-e2))

    walk(tau, [tau], 1)
    return out


def path_count(K, M, tau, sigma) -> int:
    return sum(w for _, w in gradient_paths(K, M, tau, sigma))


def morse_boundary_by_paths(K: SimplicialComplex, M: DiscreteMorseData) -> dict:
    out = {}
    for t in M.critical:
        row = {}
        for s in M.critical:
            if len(s) == len(t) - 1:
                c = path_count(K, M, t, s)
                if c:
                    row[s] = c
        out[t] = row
    return out


# ---------------------------------------------------------------------------
# flow categories


def _reachable(K: SimplicialComplex, M: DiscreteMorseData) -> dict:
    """reach[t] = critical cells s (dim t - 1) joined to t by at least one gradient path."""
    out = {}
    crit = set(M.critical)
    for t in M.critical:
        found = set()
        seen = set()
        stack = [t]
        while stack:
            cell = stack.pop()
            for f, _ in K.boundary(cell):
                if M.partner.get(cell) == f:
                    continue
                if f in crit:
                    found.add(f)
                elif M.is_matched_up(f):
                    up = M.partner[f]
                    if up not in seen:
                        seen.add(up)
                        stack.append(up)
        out[t] = found
    return out


def flow_category_from_morse(K: SimplicialComplex, M: DiscreteMorseData, field: BaseField = QQ,
                             grading: str | dict = "trivial", cutoff=INF,
                             reduction: MorseReduction | None = None) -> FlowCategory:
    """The flow category of a discrete Morse function, cohomologically graded.

    Objects are critical cells in degree dim.  The descriptor sigma -> tau is
    nonempty when tau reaches sigma by gradient paths (composed transitively);
    in vdim 0 its count is <d_M tau, sigma>.  ``grading`` selects Gamma:
    ``"trivial"`` (rank 0), ``"dim"`` (Z with label dim tau - dim sigma) or a
    dict of integer heights on critical cells.
    """
    rep = validate_matching(K, M)
    if not rep.ok:
        raise ValueError("invalid matching: " + "; ".join(rep.messages[:2]))
    red = reduction or morse_reduction(K, M, track=False)
    reach = _reachable(K, M)
    if grading == "trivial":
        monoid = GammaMonoid(())
        height = None
    else:
        monoid = GammaMonoid((1,))
        height = {s: K.dim(s) for s in M.critical} if grading == "dim" else dict(grading)

    def label(s, t):
        if height is None:
            return ()
        return (height[t] - height[s],)

    # transitive closure of the one-step relation, upward in dimension
    up = {s: set() for s in M.critical}
    for t, below in reach.items():
        for s in below:
            up[s].add(t)
    closure = {}
    for s in sorted(M.critical, key=len, reverse=True):
        acc = set()
        for t in up[s]:
            acc.add(t)
            acc |= closure.get(t, set())
        closure[s] = acc
    morphisms = {}
    for s in M.critical:
        for t in closure[s]:
            g = label(s, t)
            if monoid.rank and (g[0] < 0):
                raise ValueError(f"heights decrease along the gradient from {s} to {t}")
            if monoid.action(g) >= cutoff:
                continue
            vdim = K.dim(t) - K.dim(s) - 1
            count = field(red.boundary[t].get(s, 0)) if vdim == 0 else None
            morphisms[(s, t, g)] = MorphismDescriptor(vdim, count)
    objects = {s: K.dim(s) for s in M.critical}
    return FlowCategory(monoid, objects, morphisms, cutoff, field)


def morse_cochain_complex(red: MorseReduction, field: BaseField) -> GradedComplex:
    """The Morse cochain complex with scalar coefficients."""
    M = red.matching
    gens = [(s, red.complex.dim(s)) for s in M.critical]
    diff = {(s, t): c for t, row in red.boundary.items() for s, c in row.items()}
    return GradedComplex(field, gens, diff)


# ---------------------------------------------------------------------------
# continuation data


@dataclass
class ContinuationData:
    """Cohomological maps between two Morse cochain complexes of one complex.

    f: CF(X1) -> CF(X2), g: CF(X2) -> CF(X1), and homotopies k1, k2 with
    g f - 1 = d k1 + k1 d and f g - 1 = d k2 + k2 d.  Maps are stored as
    {(source cell, target cell): integer}.
    """

    red1: MorseReduction
    red2: MorseReduction
    f: dict
    g: dict
    k1: dict
    k2: dict


def _compose_maps(outer: dict, inner: dict) -> dict:
    """outer o inner for maps stored as {c: {c2: v}} (homological direction)."""
    out = {}
    for c, img in inner.items():
        acc = {}
        for m, v in img.items():
            _axpy(acc, v, outer.get(m, {}))
        if acc:
            out[c] = acc
    return out


def _transpose(m: dict) -> dict:
    return {(t, s): v for s, img in m.items() for t, v in img.items() if v}


def continuation_data(K: SimplicialComplex, M1: DiscreteMorseData,
                      M2: DiscreteMorseData) -> ContinuationData:
    """Change-of-basis data between the Morse complexes of two matchings."""
    r1 = morse_reduction(K, M1)
    r2 = morse_reduction(K, M2)
    crit1 = {t: r1.incl[t] for t in M1.critical}
    crit2 = {t: r2.incl[t] for t in M2.critical}
    phi = _compose_maps(r2.proj, crit1)  # pi2 iota1 : C1 -> C2
    psi = _compose_maps(r1.proj, crit2)  # pi1 iota2 : C2 -> C1
    K1 = _compose_maps(r1.proj, _compose_maps(r2.homotopy, crit1))  # pi1 H2 iota1 on C1
    K2 = _compose_maps(r2.proj, _compose_maps(r1.homotopy, crit2))
    return ContinuationData(r1, r2, _transpose(psi), _transpose(phi), _transpose(K1), _transpose(K2))


@dataclass
class ContinuationFixture:
    """Flow categories of two matchings with continuation cubes between them.

    ``f: X1 -> X2`` and ``g: X2 -> X1`` are 0-cubes; ``h1`` is the 1-cube on
    X1 from g after f (face '0') to the identity continuation (face '1'), and
    ``h2`` likewise on X2.
    """

    X1: FlowCategory
    X2: FlowCategory
    f: object
    g: object
    h1: object
    h2: object
    data: ContinuationData


def _heights(K, M, grading):
    if grading == "trivial":
        return None
    if grading == "dim":
        return {s: K.dim(s) for s in M.critical}
    return dict(grading)


def continuation_from_matchings(K: SimplicialComplex, M1: DiscreteMorseData, M2: DiscreteMorseData,
                                field: BaseField = QQ, grading="trivial") -> ContinuationFixture:
    """Continuation bimodules and homotopy 1-cubes between two Morse flow categories.

    ``grading`` is ``"trivial"``, ``"dim"`` or a pair of height dicts (one per
    matching).  Labels are height differences, so homotopy cubes may carry
    negative action.
    """
    from .bimod import BimoduleCube, compose_bimodules, identity_continuation

    if M1.complex is not K or M2.complex is not K:
        if M1.complex.cells != K.cells or M2.complex.cells != K.cells:
            raise ValueError("matchings live on different complexes")
    data = continuation_data(K, M1, M2)
    if isinstance(grading, (tuple, list)):
        g1, g2 = grading
    else:
        g1 = g2 = grading
    X1 = flow_category_from_morse(K, M1, field, g1, reduction=data.red1)
    X2 = flow_category_from_morse(K, M2, field, g2, reduction=data.red2)
    h1, h2 = _heights(K, M1, g1), _heights(K, M2, g2)

    def lab(hs, ht, p, q):
        return () if hs is None else (ht[q] - hs[p],)

    f = BimoduleCube.from_counts(0, X1, X2, {"": {(p, q, lab(h1, h2, p, q)): c
                                                 for (p, q), c in data.f.items()}})
    g = BimoduleCube.from_counts(0, X2, X1, {"": {(p, q, lab(h2, h1, p, q)): c
                                                 for (p, q), c in data.g.items()}})
    gf, fg = compose_bimodules(f, g), compose_bimodules(g, f)
    cubes = []
    for X, comp, k, h in ((X1, gf, data.k1, h1), (X2, fg, data.k2, h2)):
        ident = identity_continuation(X)
        counts = {"0": comp.counts(""), "1": ident.counts(""),
                  "*": {((p,), q, lab(h, h, p, q)): -c for (p, q), c in k.items()}}
        cubes.append(BimoduleCube.from_counts(1, X, X, {face: {(ps[0], q, mu): c for (ps, q, mu), c
                                                               in t.items()}
                                                        for face, t in counts.items()}))
    return ContinuationFixture(X1, X2, f, g, cubes[0], cubes[1], data)


# ---------------------------------------------------------------------------
# cup products


def alexander_whitney_cup(K: SimplicialComplex, a: dict, b: dict) -> dict:
    """Simplicial cup product of cochains {simplex: coeff}."""
    out = {}
    if not a or not b:
        return out
    p = len(next(iter(a))) - 1
    q = len(next(iter(b))) - 1
    for s in K.of_dim(p + q):
        front, back = s[:p + 1], s[p:]
        x = a.get(front, 0) * b.get(back, 0)
        if x:
            out[s] = x
    return out



def simplicial_cochains(K: SimplicialComplex, field: BaseField) -> GradedComplex:
    return K.chain_complex(field)


def cup_product_multimodule(K: SimplicialComplex, M1: DiscreteMorseData, M2: DiscreteMorseData,
                            M3: DiscreteMorseData, field: BaseField = QQ):
    """A 0-cube with inputs X1, X2 and output X3 realizing the cup product.

    m(x, y) = iota3^T (pi1^T x  cup  pi2^T y) on Morse cochains, transported
    through the simplicial cochains.  Returns (cube, (X1, X2, X3)).
    """
    from .trees import MultimoduleCube

    reds = [morse_reduction(K, M) for M in (M1, M2, M3)]
    cats = [flow_category_from_morse(K, M, field, reduction=r) for M, r in zip((M1, M2, M3), reds)]
    r1, r2, r3 = reds

    def pull(red, p):  # pi^T p as a simplicial cochain
        return {c: v for c, img in red.proj.items() for x, v in img.items() if x == p}

    counts = {}
    for p1 in M1.critical:
        a = pull(r1, p1)
        for p2 in M2.critical:
            cup = alexander_whitney_cup(K, a, pull(r2, p2))
            if not cup:
                continue
            for q in M3.critical:
                c = sum(v * cup.get(cell, 0) for cell, v in r3.incl[q].items())
                if field(c):
                    counts[((p1, p2), q, ())] = c
    cube = MultimoduleCube.from_counts(0, cats[:2], cats[2], {"": counts})
    return cube, tuple(cats)
