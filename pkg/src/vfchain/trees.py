"""Tree-shaped multimodules: posets of labelled trees, multicomposition,
and the multicategory relations.

The cube and map machinery is shared with bimodules (see ``bimod``); a
multimodule is a module cube with several inputs.  Trees are stored with a
canonical planar embedding: leaf order is input order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import linalg
from .bimod import (
    CubeDataError,
    ModuleCube,
    cubes_equal,
    koszul_of_permutation,
    module_source_complex,
    multi_compose,
    multimodule_map,
    permute,
)
from .coeff import INF, parse_rational
from .flowcat import EnergyError, FlowCategory, MorphismDescriptor
from .homalg import ChainMap, GradedComplex, compose, label_to_json, maps_agree_below
from .report import Report
from .stratmodel import StratPoset


class MultimoduleCube(ModuleCube):
    """A module cube with ``k`` inputs; identical to :class:`ModuleCube`."""

    @classmethod
    def wrap(cls, M: ModuleCube) -> "MultimoduleCube":
        out = cls.__new__(cls)
        ModuleCube.__init__(out, M.n, M.inputs, M.output, M.entries, M.e_max)
        return out


# ---------------------------------------------------------------------------
# labelled trees


@dataclass(frozen=True)
class LabeledTree:
    """A directed tree with one (k+1)-valent vertex and bivalent vertices elsewhere.

    Vertex 0 is the root (the output end).  ``parent[v]`` is the neighbour of
    ``v`` towards the root (``-1`` for the root), ``edge_label[v]`` the object
    on the edge from ``v`` to its parent, and ``vertex_label[v]`` the Gamma
    label of an internal vertex (``None`` on the root and the leaves).
    ``leaves`` lists the input leaves in input order and ``center`` is the
    index of the distinguished vertex.
    """

    parent: tuple
    edge_label: tuple
    vertex_label: tuple
    leaves: tuple
    center: int

    @property
    def codim(self) -> int:
        """Number of internal edges (edges joining two internal vertices)."""
        internal = {v for v, lab in enumerate(self.vertex_label) if lab is not None}
        return sum(1 for v in internal if self.parent[v] in internal)

    def to_json(self) -> dict:
        return {"parent": list(self.parent),
                "edge_labels": [None if e is None else label_to_json(e) for e in self.edge_label],
                "vertex_labels": [None if g is None else list(g) for g in self.vertex_label],
                "leaves": list(self.leaves), "center": self.center}


@dataclass(frozen=True)
class TreeStratum:
    """A stratum: per-input chains of factors, the central descriptor, the output chain.

    Input chain j runs from the input object towards the centre; the output
    chain runs from the centre to the output object.  Factors are triples
    ``(a, b, label)``; the centre is ``(ps, q, mu)``.
    """

    inputs: tuple
    center: tuple
    output: tuple

    @property
    def codim(self) -> int:
        return sum(len(c) for c in self.inputs) + len(self.output)

    def to_tree(self) -> LabeledTree:
        parent, edge, vlab = [-1], [None], [None]
        prev = 0
        # output chain, from the root inwards
        ps, q, mu = self.center
        last_obj = q
        for a, b, lam in reversed(self.output):
            parent.append(prev)
            edge.append(b)
            vlab.append(tuple(lam))
            prev = len(parent) - 1
            last_obj = a
        parent.append(prev)
        edge.append(last_obj)
        vlab.append(tuple(mu))
        center = len(parent) - 1
        leaves = []
        for j, chain in enumerate(self.inputs):
            prev = center
            obj = ps[j]
            for a, b, lam in reversed(chain):
                parent.append(prev)
                edge.append(b)
                vlab.append(tuple(lam))
                prev = len(parent) - 1
                obj = a
            parent.append(prev)
            edge.append(obj)
            vlab.append(None)
            leaves.append(len(parent) - 1)
        return LabeledTree(tuple(parent), tuple(edge), tuple(vlab), tuple(leaves), center)


def _chains(X: FlowCategory, a, b, max_action) -> list:
    """Factor sequences a -> ... -> b in X (the empty one when a == b) with
    total action at most ``max_action``; returns [(factors, label)]."""
    mon = X.monoid
    out = []

    def ok(p, q, g):
        return X.action(g) != 0 or X.less(p, q)

    def extend(cur, acc, total):
        if cur == b:
            out.append((tuple(acc), total))
        for nxt, h in X.outgoing(cur):
            t = mon.add(total, h)
            if X.action(t) > max_action or not ok(cur, nxt, h):
                continue
            acc.append((cur, nxt, h))
            extend(nxt, acc, t)
            acc.pop()

    extend(a, [], mon.zero)
    return out


def tree_strata(M: ModuleCube, face: str, ps, q, mu) -> list:
    """All strata of the descriptor (ps, q, mu) on a face of the cube."""
    mon = M.monoid
    ps = tuple(ps)
    mu = mon.check(mu)
    if mon.action(mu) >= M.cutoff():
        raise EnergyError(f"action {mon.action(mu)} is beyond the energy bound {M.cutoff()}")
    out = []
    for (cps, q0, mu0), m in M.entries.get(face, {}).items():
        if not m.nonempty:
            continue
        budget = mon.action(mon.sub(mu, mu0))
        if budget < 0:
            continue
        in_opts = [_chains(X, ps[j], cps[j], budget) for j, X in enumerate(M.inputs)]
        out_opts = _chains(M.output, q0, q, budget)
        for combo in itertools.product(*in_opts, out_opts):
            total = mu0
            for _, lab in combo:
                total = mon.add(total, lab)
            if total == mu:
                out.append(TreeStratum(tuple(c for c, _ in combo[:-1]), (cps, q0, mu0),
                                       combo[-1][0]))
    return out


def _merge_moves(M: ModuleCube, s: TreeStratum) -> list:
    """Strata obtained from ``s`` by collapsing one internal edge."""
    mon = M.monoid
    out = []
    cps, q0, mu0 = s.center
    for j, chain in enumerate(s.inputs):
        for i in range(len(chain) - 1):
            a, b = chain[i], chain[i + 1]
            new = chain[:i] + ((a[0], b[1], mon.add(a[2], b[2])),) + chain[i + 2:]
            out.append(TreeStratum(s.inputs[:j] + (new,) + s.inputs[j + 1:], s.center, s.output))
        if chain:
            a, b, lam = chain[-1]
            center = (cps[:j] + (a,) + cps[j + 1:], q0, mon.add(mu0, lam))
            out.append(TreeStratum(s.inputs[:j] + (chain[:-1],) + s.inputs[j + 1:], center, s.output))
    for i in range(len(s.output) - 1):
        a, b = s.output[i], s.output[i + 1]
        new = s.output[:i] + ((a[0], b[1], mon.add(a[2], b[2])),) + s.output[i + 2:]
        out.append(TreeStratum(s.inputs, s.center, new))
    if s.output:
        a, b, lam = s.output[0]
        out.append(TreeStratum(s.inputs, (cps, b, mon.add(mu0, lam)), s.output[1:]))
    return out


def multimodule_poset(M: ModuleCube, ps, q, mu, face: str | None = None) -> StratPoset:
    """The poset of tree strata; the order is generated by collapsing internal edges."""
    face = "*" * M.n if face is None else face
    strata = tree_strata(M, face, ps, q, mu)
    elements = set(strata)
    rel = []
    for s in strata:
        for t in _merge_moves(M, s):
            if t in elements:
                rel.append((t, s))
    return StratPoset({s: s.codim for s in strata}, rel)


def bimodule_poset(B: ModuleCube, p, q, mu, face: str | None = None) -> StratPoset:
    if B.k != 1:
        raise CubeDataError("bimodule_poset needs a single-input cube")
    return multimodule_poset(B, (p,), q, mu, face)


# ---------------------------------------------------------------------------
# input permutations


def permute_inputs(M: ModuleCube, perm) -> MultimoduleCube:
    """Reorder inputs: new input j is old input ``perm[j]``; counts carry Koszul signs."""
    perm = list(perm)
    if sorted(perm) != list(range(M.k)):
        raise CubeDataError(f"{perm} is not a permutation of {M.k} inputs")
    entries = {}
    for face, t in M.entries.items():
        rows = {}
        for (ps, q, mu), m in t.items():
            degs = [X.objects[p] for X, p in zip(M.inputs, ps)]
            s = koszul_of_permutation(degs, perm)
            new = tuple(ps[perm[j]] for j in range(M.k))
            rows[(new, q, mu)] = (MorphismDescriptor(m.vdim, s * m.count, m.nonempty)
                                  if m.count is not None else m)
        entries[face] = rows
    inputs = tuple(M.inputs[perm[j]] for j in range(M.k))
    return MultimoduleCube(M.n, inputs, M.output, entries, M.e_max)


def inverse_permutation(perm) -> list:
    inv = [0] * len(perm)
    for j, i in enumerate(perm):
        inv[i] = j
    return inv


def input_permutation_map(M: ModuleCube, perm, source: GradedComplex | None = None,
                          target: GradedComplex | None = None) -> ChainMap:
    """The Koszul permutation from the permuted source to M's source complex."""
    P = permute_inputs(M, perm)
    source = source or module_source_complex(P)
    target = target or module_source_complex(M)
    inv = inverse_permutation(perm)
    entries = {}
    for lab in source.labels:
        face, xs = lab[0], lab[1:]
        old = tuple(xs[inv[i]] for i in range(M.k))
        degs = [X.objects[x] for X, x in zip(P.inputs, xs)]
        entries[(lab, (face,) + old)] = koszul_of_permutation(degs, inv)
    return ChainMap(source, target, entries, 0)


# ---------------------------------------------------------------------------
# multicategory relations


def _composable(inner: ModuleCube, outer: ModuleCube, i: int) -> bool:
    return outer.inputs[i] is inner.output


def validate_multicategory(cubes: list, cutoff=INF, max_vertices: int = 3) -> Report:
    """Check the multicategory relations on all composable groupings of ``cubes``.

    Covers sequential associativity, interchange of compositions into
    distinct inputs, the inverse-permutation round trip, and equivariance of
    the induced maps under input permutations.  Trees have at most
    ``max_vertices`` internal vertices (three suffices for both relations).
    """
    rep = Report()
    E = INF if cutoff in (None, INF) else parse_rational(cutoff)
    checked = {"associativity": 0, "interchange": 0, "permutation": 0, "equivariance": 0}
    cubes = list(cubes)
    if max_vertices >= 3:
        for a, b, c in itertools.product(range(len(cubes)), repeat=3):
            A, B, C = cubes[a], cubes[b], cubes[c]
            for i in range(C.k):
                if not _composable(B, C, i):
                    continue
                for j in range(B.k):
                    if not _composable(A, B, j):
                        continue
                    left = multi_compose(A, multi_compose(B, C, i), i + j)
                    right = multi_compose(multi_compose(A, B, j), C, i)
                    checked["associativity"] += 1
                    rep.merge(cubes_equal(left, right, E), f"assoc({a},{b},{c};{i},{j}): ")
            for i, j in itertools.combinations(range(C.k), 2):
                if not (_composable(A, C, i) and _composable(B, C, j)):
                    continue
                left = multi_compose(B, multi_compose(A, C, i), j + A.k - 1)
                right = multi_compose(A, multi_compose(B, C, j), i)
                perm = list(range(B.n, B.n + A.n)) + list(range(B.n)) + \
                    list(range(A.n + B.n, A.n + B.n + C.n))
                checked["interchange"] += 1
                rep.merge(cubes_equal(permute(left, perm), right, E),
                          f"interchange({a},{b},{c};{i},{j}): ")
    for idx, M in enumerate(cubes):
        for perm in itertools.permutations(range(M.k)):
            perm = list(perm)
            back = permute_inputs(permute_inputs(M, perm), inverse_permutation(perm))
            checked["permutation"] += 1
            rep.merge(cubes_equal(back, M, E), f"perm({idx},{perm}): ")
            if M.k > 1:
                P = permute_inputs(M, perm)
                lhs = multimodule_map(P, E)
                rhs = compose(multimodule_map(M, E), input_permutation_map(M, perm, lhs.source))
                checked["equivariance"] += 1
                rep.merge(maps_agree_below(lhs, rhs, E), f"equivariance({idx},{perm}): ")
    rep.data["checked"] = checked
    return rep


# ---------------------------------------------------------------------------
# products on cohomology


def induced_product_rank(C1: GradedComplex, C2: GradedComplex, C3: GradedComplex, product,
                         a: int, b: int) -> int:
    """Rank of the bilinear map H^a(C1) x H^b(C2) -> H^{a+b}(C3) induced by
    ``product(x, y)`` on cocycles (field coefficients, scalar complexes)."""
    from .homalg import all_cycles_basis

    def classes(C, k):
        reps = []
        for z in all_cycles_basis(C, k):
            trial = reps + [z]
            if _independent_mod_boundaries(C, k, trial):
                reps = trial
        return reps

    images = []
    for x in classes(C1, a):
        for y in classes(C2, b):
            images.append(product(x, y))
    fld = C3.field
    gens = C3.in_degree(a + b)
    m, cols, rows = C3.block(a + b - 1)
    bnd = [[fld(m[r][c]) for r in range(len(rows))] for c in range(len(cols))] if cols else []
    img = [[fld(v.get(l, 0)) for l in gens] for v in images]
    return linalg.rank(bnd + img, fld) - linalg.rank(bnd, fld) if gens else 0


def _independent_mod_boundaries(C: GradedComplex, k: int, chains: list) -> bool:
    fld = C.field
    gens = C.in_degree(k)
    m, cols, rows = C.block(k - 1)
    bnd = [[fld(m[r][c]) for r in range(len(rows))] for c in range(len(cols))] if cols else []
    vecs = [[fld(v.get(l, 0)) for l in gens] for v in chains]
    return linalg.rank(bnd + vecs, fld) - linalg.rank(bnd, fld) == len(chains)

