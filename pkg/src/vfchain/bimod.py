"""Module cubes over flow categories and the maps they induce.

An n-cube of modules from inputs X_1..X_k to an output Y records, for each
face sigma of [0,1]^n (a string over '0', '1', '*'), descriptors
``(ps, q, mu)`` with ``ps`` a tuple of input objects.  In virtual dimension
zero a descriptor carries a count.  The cube induces a degree-0 map

    C_*([0,1])^{(x)n} (x) CF(X_1) (x) ... (x) CF(X_k) -> CF(Y),

sending ``sigma (x) p_1 (x) ... (x) p_k`` to ``sum c_sigma(ps, q, mu) T^mu q``.
Bimodules are the case k = 1.

Conventions (the single sign source for the package):

* ``C_*([0,1])`` has the top cell ``*`` in degree -1 and the endpoints in
  degree 0, with ``d(*) = '1' - '0'``; the n-fold tensor carries the Koszul
  rule, so ``d(sigma) = sum_i (-1)^{#free before i} (sigma[i:=1] - sigma[i:=0])``.
* The degree law is ``vdim = deg q - sum deg p_j + dim sigma``; counts feed
  a map of degree ``-dim sigma`` on the CF factors.
* Composition places the coordinates of the inner cube first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .coeff import INF, GammaMonoid, NovikovElement, NovikovRing, parse_rational
from .flowcat import FlowCategory, MorphismDescriptor
from .floer import build_cf
from .homalg import (
    ChainMap,
    GradedComplex,
    HomotopyEquivalence,
    cc_tensor_many,
    certify_homotopy_equivalence,
    compose,
    differential_map,
    homology,
    identity_map,
    label_from_json,
    label_to_json,
    lincomb,
    maps_agree_below,
    split_action_zero,
)
from .report import Report

FACE_SYMBOLS = "01*"


class CubeDataError(ValueError):
    pass


def face_dim(face: str) -> int:
    return face.count("*")


def cube_faces(n: int) -> list:
    return ["".join(t) for t in itertools.product(FACE_SYMBOLS, repeat=n)]


def facets(face: str) -> list:
    """[(tau, sign)] with d(face) = sum sign * tau in C_*([0,1])^{(x)n}."""
    out = []
    free = 0
    for i, ch in enumerate(face):
        if ch != "*":
            continue
        s = -1 if free % 2 else 1
        out.append((face[:i] + "1" + face[i + 1:], s))
        out.append((face[:i] + "0" + face[i + 1:], -s))
        free += 1
    return out


def cube_complex(n: int, ring) -> GradedComplex:
    """C_*([0,1])^{(x)n} with cohomological grading: generator sigma in degree -dim sigma."""
    faces = cube_faces(n)
    gens = [(f, -face_dim(f)) for f in faces]
    diff = {}
    for f in faces:
        for t, s in facets(f):
            diff[(f, t)] = diff.get((f, t), 0) + s
    return GradedComplex(ring, gens, diff)


def koszul_of_permutation(degrees: list, perm: list) -> int:
    """Sign of moving items with ``degrees`` into the order ``perm`` (new j = old perm[j])."""
    sign = 1
    for a in range(len(perm)):
        for b in range(a + 1, len(perm)):
            if perm[a] > perm[b] and degrees[perm[a]] % 2 and degrees[perm[b]] % 2:
                sign = -sign
    return sign


def _same_monoid(cats) -> GammaMonoid:
    mons = {c.monoid for c in cats}
    if len(mons) != 1:
        raise CubeDataError("flow categories use different label groups")
    fields = {c.field for c in cats}
    if len(fields) != 1:
        raise CubeDataError("flow categories use different coefficient fields")
    return mons.pop()


@dataclass
class ModuleCube:
    """An n-cube of modules ``inputs -> output`` (see the module docstring).

    ``entries[face][(ps, q, mu)]`` is a :class:`MorphismDescriptor`.  Faces
    without data are empty.  ``e_max`` is an exclusive action bound.
    """

    n: int
    inputs: tuple
    output: FlowCategory
    entries: dict = field(default_factory=dict)
    e_max: object = INF

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.monoid = _same_monoid(self.inputs + (self.output,))
        self.field = self.output.field
        self.e_max = INF if self.e_max in (None, INF) else parse_rational(self.e_max)
        clean = {}
        for face, table in self.entries.items():
            if len(face) != self.n or set(face) - set(FACE_SYMBOLS):
                raise CubeDataError(f"{face!r} is not a face of the {self.n}-cube")
            rows = {}
            for (ps, q, mu), m in table.items():
                mu = self.monoid.check(mu)
                if self.monoid.action(mu) >= self.e_max:
                    continue
                if m.count is not None:
                    m = MorphismDescriptor(m.vdim, self.field(m.count), m.nonempty)
                    if not m.count and m.vdim == 0:
                        continue
                rows[(tuple(ps), q, mu)] = m
            if rows:
                clean[face] = rows
        self.entries = clean

    @property
    def k(self) -> int:
        return len(self.inputs)

    @classmethod
    def from_counts(cls, n: int, inputs, output: FlowCategory, counts: dict, e_max=INF,
                    check: bool = True) -> "ModuleCube":
        """Build from ``counts[face][(ps, q, mu)] = c``; every count has vdim 0."""
        entries = {}
        for face, table in counts.items():
            rows = {}
            for (ps, q, mu), c in table.items():
                rows[(tuple(ps), q, tuple(mu))] = MorphismDescriptor(0, c)
            entries[face] = rows
        out = cls(n, inputs, output, entries, e_max)
        if check:
            rep = out.check_degrees()
            if not rep.ok:
                raise CubeDataError(rep.messages[0])
        return out

    def expected_vdim(self, face: str, ps, q) -> int:
        return self.output.objects[q] - sum(X.objects[p] for X, p in zip(self.inputs, ps)) \
            + face_dim(face)

    def check_degrees(self) -> Report:
        rep = Report()
        for face, table in self.entries.items():
            for (ps, q, mu), m in table.items():
                if len(ps) != self.k:
                    rep.fail(f"entry {ps!r} has {len(ps)} inputs, expected {self.k}")
                    continue
                if any(p not in X.objects for X, p in zip(self.inputs, ps)) or \
                        q not in self.output.objects:
                    rep.fail(f"entry ({ps!r}, {q!r}) on face {face!r} uses an unknown object")
                    continue
                if m.vdim != self.expected_vdim(face, ps, q):
                    rep.fail(f"degree law fails on face {face!r} at ({ps!r}, {q!r}, {list(mu)}): "
                             f"vdim {m.vdim}, expected {self.expected_vdim(face, ps, q)}",
                             face=face, entry=[label_to_json(ps), label_to_json(q), list(mu)])
                if m.vdim == 0 and m.nonempty and m.count is None:
                    rep.fail(f"missing count on face {face!r} at ({ps!r}, {q!r}, {list(mu)})")
        return rep

    def counts(self, face: str) -> dict:
        """{(ps, q, mu): count} on a face (vdim-0 entries only)."""
        return {key: m.count for key, m in self.entries.get(face, {}).items()
                if m.vdim == 0 and m.count is not None}

    def count(self, face: str, ps, q, mu):
        m = self.entries.get(face, {}).get((tuple(ps), q, tuple(mu)))
        return self.field.zero if m is None or m.count is None else m.count

    def is_monotone(self) -> bool:
        return all(self.monoid.in_plus(mu) for t in self.entries.values() for (_, _, mu) in t)

    def cutoff(self, cutoff=INF):
        E = INF if cutoff in (None, INF) else parse_rational(cutoff)
        return min([E, self.e_max, self.output.e_max] + [X.e_max for X in self.inputs])

    # serialization
    def to_json(self) -> dict:
        faces = {}
        for face in sorted(self.entries):
            rows = []
            for (ps, q, mu), m in sorted(self.entries[face].items(), key=lambda kv: repr(kv[0])):
                row = [[label_to_json(p) for p in ps], label_to_json(q), list(mu), m.vdim]
                if m.count is not None:
                    row.append(self.field.format(m.count))
                rows.append(row)
            faces[face] = rows
        return {"cube_dim": self.n, "inputs": len(self.inputs),
                "e_max": "inf" if self.e_max == INF else str(self.e_max), "faces": faces}

    @classmethod
    def from_json(cls, data, inputs, output: FlowCategory) -> "ModuleCube":
        entries = {}
        for face, rows in data["faces"].items():
            table = {}
            for row in rows:
                ps = tuple(label_from_json(p) for p in row[0])
                count = output.field(parse_rational(row[4])) if len(row) > 4 else None
                table[(ps, label_from_json(row[1]), tuple(row[2]))] = MorphismDescriptor(int(row[3]),
                                                                                         count)
            entries[face] = table
        e_max = data.get("e_max", "inf")
        return cls(int(data["cube_dim"]), inputs, output, entries,
                   INF if e_max == "inf" else parse_rational(e_max))


class BimoduleCube(ModuleCube):
    """A module cube with a single input ``source``; keys may be given as (p, q, mu)."""

    def __init__(self, n: int, source: FlowCategory, target: FlowCategory, entries=None,
                 e_max=INF):
        conv = {}
        for face, table in (entries or {}).items():
            conv[face] = {((p,), q, mu): m for (p, q, mu), m in table.items()}
        super().__init__(n, (source,), target, conv, e_max)

    @property
    def source(self) -> FlowCategory:
        return self.inputs[0]

    @property
    def target(self) -> FlowCategory:
        return self.output

    @classmethod
    def from_counts(cls, n, source, target, counts, e_max=INF, check=True) -> "BimoduleCube":
        entries = {face: {(p, q, tuple(mu)): MorphismDescriptor(0, c)
                          for (p, q, mu), c in table.items()} for face, table in counts.items()}
        out = cls(n, source, target, entries, e_max)
        if check:
            rep = out.check_degrees()
            if not rep.ok:
                raise CubeDataError(rep.messages[0])
        return out

    @classmethod
    def wrap(cls, M: ModuleCube) -> "BimoduleCube":
        if M.k != 1:
            raise CubeDataError("a bimodule has exactly one input")
        out = cls.__new__(cls)
        ModuleCube.__init__(out, M.n, M.inputs, M.output, M.entries, M.e_max)
        return out


# ---------------------------------------------------------------------------
# induced maps


def module_source_complex(M: ModuleCube, ring=None) -> GradedComplex:
    ring = ring or NovikovRing(M.monoid, M.field)
    parts = [cube_complex(M.n, ring)] + [build_cf(X) for X in M.inputs]
    return cc_tensor_many(parts, ring)


def multimodule_map(M: ModuleCube, cutoff=INF, source: GradedComplex | None = None,
                    target: GradedComplex | None = None) -> ChainMap:
    """The degree-0 map C_*([0,1])^{(x)n} (x) CF(X_1) (x) ... -> CF(Y).

    Source labels are flat tuples ``(face, p_1, ..., p_k)``.
    """
    E = M.cutoff(cutoff)
    source = source or module_source_complex(M)
    target = target or build_cf(M.output)
    terms = {}
    for face, table in M.entries.items():
        for (ps, q, mu), m in table.items():
            if m.vdim != 0 or m.count is None:
                continue
            key = ((face,) + ps, q)
            terms.setdefault(key, {})
            terms[key][mu] = terms[key].get(mu, M.field.zero) + m.count
    entries = {st: NovikovElement(M.monoid, M.field, t, E) for st, t in terms.items()}
    return ChainMap(source, target, entries, 0)


def bimodule_map(B: ModuleCube, cutoff=INF) -> ChainMap:
    """Single-input case of :func:`multimodule_map`; source labels are ``(face, p)``."""
    if B.k != 1:
        raise CubeDataError("bimodule_map needs exactly one input")
    return multimodule_map(B, cutoff)


def face_map(B: ModuleCube, face: str, cutoff=INF) -> ChainMap:
    """Phi_face: CF(X) -> CF(Y) of degree -dim face (single input)."""
    if B.k != 1:
        raise CubeDataError("face_map needs exactly one input")
    E = B.cutoff(cutoff)
    src, tgt = build_cf(B.source), build_cf(B.output)
    terms = {}
    for (ps, q, mu), c in B.counts(face).items():
        terms.setdefault((ps[0], q), {})[mu] = c
    return ChainMap(src, tgt, {st: NovikovElement(B.monoid, B.field, t, E)
                               for st, t in terms.items()}, -face_dim(face))


def boundary_terms(M: ModuleCube, face: str, ps, q, mu) -> list:
    """Every contribution to the chain-map equation at (face, ps, q, mu).

    Returns ``[(kind, where, value)]`` with kind ``"facet"`` (a codim-one face
    of the cube), ``"input"`` (a breaking in input category j) or ``"output"``
    (a breaking in the output category); values include their signs and the
    residual is their sum.  These are the three alternatives for a codim-one
    boundary stratum of a module cube.
    """
    ps = tuple(ps)
    mu = M.monoid.check(mu)
    mon = M.monoid
    out = []
    for tau, s in facets(face):
        c = M.count(tau, ps, q, mu)
        if c:
            out.append(("facet", tau, c * s))
    dim = face_dim(face)
    deg_before = 0
    for j, X in enumerate(M.inputs):
        sign = -1 if (dim + deg_before) % 2 else 1
        p = ps[j]
        for (a, b, lam), m in X.morphisms.items():
            if a != p or m.vdim != 0 or not m.count:
                continue
            nu = mon.sub(mu, lam)
            c = M.count(face, ps[:j] + (b,) + ps[j + 1:], q, nu)
            if c:
                out.append(("input", (j, b, lam), sign * m.count * c))
        deg_before += X.objects[p]
    Y = M.output
    for (a, b, lam), m in Y.morphisms.items():
        if b != q or m.vdim != 0 or not m.count:
            continue
        nu = mon.sub(mu, lam)
        c = M.count(face, ps, a, nu)
        if c:
            out.append(("output", (a, lam), -c * m.count))
    return out


def verify_chain_map(M: ModuleCube, cutoff=INF) -> Report:
    """Check Phi o D = d o Phi below the cutoff, locating residuals.

    Residuals are located by (face, inputs, output, label).
    """
    E = M.cutoff(cutoff)
    rep = M.check_degrees()
    if not rep.ok:
        return rep
    phi = multimodule_map(M, E)
    d_src = differential_map(phi.source)
    d_tgt = differential_map(phi.target)
    diff = lincomb([(1, compose(phi, d_src)), (-1, compose(d_tgt, phi))])
    for (s, t), x in sorted(diff.entries.items(), key=lambda kv: repr(kv[0])):
        face, ps = s[0], s[1:]
        for mu in x.support():
            if M.monoid.action(mu) >= E:
                continue
            c = x.terms[mu]
            rep.fail(f"chain-map residual on face {face!r} at ({ps!r}, {t!r}, {list(mu)}): "
                     f"{M.field.format(c)}", face=face, inputs=label_to_json(ps),
                     output=label_to_json(t), label=list(mu), residual=M.field.format(c))
    rep.data["cutoff"] = str(E)
    return rep


# ---------------------------------------------------------------------------
# operations on cubes


def multi_compose(inner: ModuleCube, outer: ModuleCube, i: int) -> ModuleCube:
    """Plug ``inner``'s output into input ``i`` of ``outer``.

    The result has inputs ``outer[:i] + inner + outer[i+1:]`` and cube
    coordinates ``inner`` first, then ``outer``.  Counts convolve over the
    intermediate object and labels with sign
    ``(-1)^{dim s_in * (dim s_out + sum_{j<i} deg b_j)}``.
    """
    if outer.inputs[i] is not inner.output and outer.inputs[i].to_json() != inner.output.to_json():
        raise CubeDataError("middle flow category does not match")
    mon = outer.monoid
    E = min(inner.e_max, outer.e_max)
    inputs = outer.inputs[:i] + inner.inputs + outer.inputs[i + 1:]
    entries = {}
    by_mid = {}
    for f2, table in outer.entries.items():
        for (bs, z, rho), m in table.items():
            by_mid.setdefault(bs[i], []).append((f2, bs, z, rho, m))
    for f1, table in inner.entries.items():
        d1 = face_dim(f1)
        for (as_, y, lam), m1 in table.items():
            for f2, bs, z, rho, m2 in by_mid.get(y, ()):
                mu = mon.add(lam, rho)
                if mon.action(mu) >= E:
                    continue
                face = f1 + f2
                key = (bs[:i] + as_ + bs[i + 1:], z, mu)
                vdim = m1.vdim + m2.vdim
                row = entries.setdefault(face, {})
                if vdim == 0:
                    if m1.count is None or m2.count is None:
                        continue
                    deg_b = sum(outer.inputs[j].objects[bs[j]] for j in range(i))
                    sign = -1 if (d1 * (face_dim(f2) + deg_b)) % 2 else 1
                    prev = row.get(key)
                    c = sign * m1.count * m2.count + (prev.count if prev else 0)
                    row[key] = MorphismDescriptor(0, c)
                else:
                    row.setdefault(key, MorphismDescriptor(vdim))
    return ModuleCube(inner.n + outer.n, inputs, outer.output, entries, E)


def compose_bimodules(B1: ModuleCube, B2: ModuleCube) -> BimoduleCube:
    """B2 after B1 (X -> Y -> Z); B1's cube coordinates come first."""
    if B1.k != 1 or B2.k != 1:
        raise CubeDataError("compose_bimodules needs single-input cubes")
    return BimoduleCube.wrap(multi_compose(B1, B2, 0))


def composite_map(inner: ModuleCube, outer: ModuleCube, i: int, cutoff=INF) -> ChainMap:
    """The composite of the induced maps, computed directly on generators.

    sigma_in (x) sigma_out (x) b_<i (x) as (x) b_>i is regrouped (Koszul sign)
    to sigma_out (x) b_<i (x) (sigma_in (x) as) (x) b_>i, the inner map is
    applied to the middle block and the outer map to the result.
    """
    E = min(inner.cutoff(cutoff), outer.cutoff(cutoff))
    composite = multi_compose(inner, outer, i)
    src = module_source_complex(composite)
    phi_in = multimodule_map(inner, E)
    phi_out = multimodule_map(outer, E)
    ring = phi_out.ring
    entries = {}
    a = inner.k
    for lab in src.labels:
        face = lab[0]
        f1, f2 = face[:inner.n], face[inner.n:]
        xs = lab[1:]
        bs_before, as_, bs_after = xs[:i], xs[i:i + a], xs[i + a:]
        deg_b = sum(outer.inputs[j].objects[b] for j, b in enumerate(bs_before))
        sign = -1 if (face_dim(f1) * (face_dim(f2) + deg_b)) % 2 else 1
        mid = phi_in.apply({(f1,) + as_: ring.one})
        chain = {}
        for y, c in mid.items():
            key = (f2,) + bs_before + (y,) + bs_after
            chain[key] = chain.get(key, ring.zero) + c * sign
        for z, c in phi_out.apply(chain).items():
            entries[(lab, z)] = NovikovElement(c.monoid, c.field, c.terms, E)
    return ChainMap(src, phi_out.target, entries, 0)


def restrict(M: ModuleCube, face: str) -> ModuleCube:
    """Restriction to a face of the cube: its free coordinates become the new cube."""
    if len(face) != M.n:
        raise CubeDataError("face has the wrong length")
    free = [i for i, ch in enumerate(face) if ch == "*"]
    entries = {}
    for rho in cube_faces(len(free)):
        full = list(face)
        for pos, ch in zip(free, rho):
            full[pos] = ch
        t = M.entries.get("".join(full))
        if t:
            entries[rho] = dict(t)
    out = ModuleCube(len(free), M.inputs, M.output, entries, M.e_max)
    return BimoduleCube.wrap(out) if isinstance(M, BimoduleCube) else out


def face_inclusion(n: int, face: str, ring) -> ChainMap:
    """C_*([0,1])^{(x)k} -> C_*([0,1])^{(x)n}, rho -> face with rho substituted."""
    free = [i for i, ch in enumerate(face) if ch == "*"]
    small, big = cube_complex(len(free), ring), cube_complex(n, ring)
    entries = {}
    for rho in small.labels:
        full = list(face)
        for pos, ch in zip(free, rho):
            full[pos] = ch
        entries[(rho, "".join(full))] = 1
    return ChainMap(small, big, entries, 0)


def degenerate(M: ModuleCube, i: int) -> ModuleCube:
    """Pull back along the projection forgetting a new coordinate inserted at ``i``."""
    entries = {}
    for face in cube_faces(M.n + 1):
        if face[i] == "*":
            continue
        t = M.entries.get(face[:i] + face[i + 1:])
        if t:
            entries[face] = dict(t)
    out = ModuleCube(M.n + 1, M.inputs, M.output, entries, M.e_max)
    return BimoduleCube.wrap(out) if isinstance(M, BimoduleCube) else out


def permute(M: ModuleCube, perm) -> ModuleCube:
    """Reorder cube coordinates: new coordinate j is old coordinate ``perm[j]``.

    Counts pick up the Koszul sign of reordering the free coordinates.
    """
    perm = list(perm)
    if sorted(perm) != list(range(M.n)):
        raise CubeDataError(f"{perm} is not a permutation of {M.n} coordinates")
    entries = {}
    for face, t in M.entries.items():
        new = "".join(face[perm[j]] for j in range(M.n))
        degs = [1 if ch == "*" else 0 for ch in face]
        s = koszul_of_permutation(degs, perm)
        entries[new] = {key: (MorphismDescriptor(m.vdim, s * m.count, m.nonempty)
                              if m.count is not None else m) for key, m in t.items()}
    out = ModuleCube(M.n, M.inputs, M.output, entries, M.e_max)
    return BimoduleCube.wrap(out) if isinstance(M, BimoduleCube) else out


def scale(M: ModuleCube, c) -> ModuleCube:
    entries = {face: {key: (MorphismDescriptor(m.vdim, c * m.count, m.nonempty)
                            if m.count is not None else m) for key, m in t.items()}
               for face, t in M.entries.items()}
    out = ModuleCube(M.n, M.inputs, M.output, entries, M.e_max)
    return BimoduleCube.wrap(out) if isinstance(M, BimoduleCube) else out


def cubes_equal(A: ModuleCube, B: ModuleCube, cutoff=INF) -> Report:
    """Entrywise comparison of counts below the cutoff."""
    rep = Report()
    E = min(A.cutoff(cutoff), B.cutoff(cutoff))
    if A.n != B.n or A.k != B.k:
        rep.fail("cubes have different shapes")
        return rep
    for face in cube_faces(A.n):
        ca = {k: v for k, v in A.counts(face).items() if A.monoid.action(k[2]) < E}
        cb = {k: v for k, v in B.counts(face).items() if B.monoid.action(k[2]) < E}
        for key in sorted(set(ca) | set(cb), key=repr):
            x, y = ca.get(key, 0), cb.get(key, 0)
            if x != y:
                rep.fail(f"face {face!r} differs at {key!r}: {x} != {y}", face=face)
    return rep


def identity_continuation(X: FlowCategory) -> BimoduleCube:
    """The n = 0 bimodule X -> X with c(p, p, 0) = 1 and nothing else."""
    zero = X.monoid.zero
    return BimoduleCube.from_counts(0, X, X, {"": {(p, p, zero): 1 for p in X.objects}},
                                    X.e_max)


def zero_bimodule(X: FlowCategory, Y: FlowCategory, n: int = 0) -> BimoduleCube:
    return BimoduleCube(n, X, Y, {}, min(X.e_max, Y.e_max))


def derive_nonempty(M: ModuleCube) -> ModuleCube:
    """Add the higher-dimensional descriptors forced by breaking.

    Whenever an input factor ``p -> p'`` (in some X_j), a central descriptor
    and an output factor ``q' -> q`` are all nonempty, the concatenation is a
    stratum of ``(ps, q, mu)``, so that descriptor is recorded as nonempty.
    """
    mon = M.monoid
    E = M.e_max
    entries = {face: dict(t) for face, t in M.entries.items()}
    for face, table in entries.items():
        frontier = list(table.items())
        while frontier:
            new = []
            for (ps, q, mu), m in frontier:
                if not m.nonempty:
                    continue
                cand = []
                for j, X in enumerate(M.inputs):
                    for (a, b, lam), d in X.morphisms.items():
                        if b == ps[j] and d.nonempty:
                            cand.append((ps[:j] + (a,) + ps[j + 1:], q, mon.add(mu, lam)))
                for (a, b, lam), d in M.output.morphisms.items():
                    if a == q and d.nonempty:
                        cand.append((ps, b, mon.add(mu, lam)))
                for key in cand:
                    if key in table or mon.action(key[2]) >= E:
                        continue
                    vdim = M.expected_vdim(face, key[0], key[1])
                    if vdim <= 0:
                        continue
                    table[key] = MorphismDescriptor(vdim)
                    new.append((key, table[key]))
            frontier = new
    out = ModuleCube(M.n, M.inputs, M.output, entries, M.e_max)
    return BimoduleCube.wrap(out) if isinstance(M, BimoduleCube) else out


# ---------------------------------------------------------------------------
# strictified composable sequences


@dataclass
class FlowMorphism:
    """A formal composite of bimodule cubes, composed by concatenation.

    ``coordinate_sets()`` gives the consecutive ranges D_i of cube coordinates
    owned by each factor; associativity holds on the nose.
    """

    factors: tuple

    def __post_init__(self):
        self.factors = tuple(self.factors)
        for a, b in zip(self.factors, self.factors[1:]):
            if a.output is not b.inputs[0]:
                raise CubeDataError("factors are not composable")

    @property
    def n(self) -> int:
        return sum(f.n for f in self.factors)

    def then(self, other: "FlowMorphism") -> "FlowMorphism":
        return FlowMorphism(self.factors + other.factors)

    def coordinate_sets(self) -> list:
        out, start = [], 0
        for f in self.factors:
            out.append(tuple(range(start, start + f.n)))
            start += f.n
        return out

    def evaluate(self) -> BimoduleCube:
        acc = self.factors[0]
        for f in self.factors[1:]:
            acc = compose_bimodules(acc, f)
        return acc if isinstance(acc, BimoduleCube) else BimoduleCube.wrap(acc)


# ---------------------------------------------------------------------------
# invariance


@dataclass
class InvarianceCertificate:
    """Outcome of :func:`certify_invariance`.

    ``left`` = u1^{-1} g with (left o f) - 1 = d h + h d (h = ``left_homotopy``),
    ``right`` = g u2^{-1} with (f o right) - 1 = d h' + h' d.
    """

    report: Report
    f: ChainMap | None = None
    left: ChainMap | None = None
    right: ChainMap | None = None
    left_homotopy: ChainMap | None = None
    right_homotopy: ChainMap | None = None
    units: tuple = ()
    betti: tuple = ()

    @property
    def ok(self) -> bool:
        return self.report.ok

    def equivalence(self) -> HomotopyEquivalence:
        return HomotopyEquivalence(self.f, self.left, self.left_homotopy, self.right_homotopy,
                                   self.report.data.get("cutoff"))


def _homotopy_residual(lhs: ChainMap, h: ChainMap, E) -> Report:
    """lhs - 1 = dh + hd below E."""
    C = lhs.source
    d = differential_map(C)
    rhs = compose(d, h) + compose(h, d)
    return maps_agree_below(lhs - identity_map(C), rhs, E)


def _check_identity_shaped(u: ChainMap) -> Report:
    rep = Report()
    try:
        u0, _ = split_action_zero(u)
    except ValueError as exc:
        rep.fail(str(exc))
        return rep
    C = u.source
    for a in C.labels:
        for b in C.labels:
            want = 1 if a == b else 0
            if u0.get((a, b), 0) != want:
                rep.fail(f"endpoint is not the identity modulo positive action at ({a!r}, {b!r})",
                         source=label_to_json(a), target=label_to_json(b))
    return rep


def certify_invariance(f: ModuleCube, g: ModuleCube, H1: ModuleCube, H2: ModuleCube,
                       cutoff) -> InvarianceCertificate:
    """Certify CF(X) ~ CF(Y) from continuation data.

    ``f: X -> Y`` and ``g: Y -> X`` are 0-cubes; ``H1`` (on X) and ``H2``
    (on Y) are 1-cubes whose face '0' is the composite (g after f, resp. f
    after g) and whose face '1' is identity-shaped (the identity modulo
    positive action).
    """
    E = parse_rational(cutoff)
    rep = Report()
    rep.data["cutoff"] = str(E)
    for name, M, n in (("f", f, 0), ("g", g, 0), ("H1", H1, 1), ("H2", H2, 1)):
        if M.n != n or M.k != 1:
            rep.fail(f"{name} must be a single-input {n}-cube")
    if not rep.ok:
        return InvarianceCertificate(rep)
    for name, M in (("f", f), ("g", g), ("H1", H1), ("H2", H2)):
        rep.merge(verify_chain_map(M, E), f"{name}: ")
    gf = compose_bimodules(f, g)
    fg = compose_bimodules(g, f)
    rep.merge(cubes_equal(restrict(H1, "0"), gf, E), "H1 face 0 vs g o f: ")
    rep.merge(cubes_equal(restrict(H2, "0"), fg, E), "H2 face 0 vs f o g: ")
    u1 = face_map(H1, "1", E)
    u2 = face_map(H2, "1", E)
    rep.merge(_check_identity_shaped(u1), "H1 face 1: ")
    rep.merge(_check_identity_shaped(u2), "H2 face 1: ")
    if not rep.ok:
        return InvarianceCertificate(rep)
    e1 = certify_homotopy_equivalence(u1, E)
    e2 = certify_homotopy_equivalence(u2, E)
    phi_f, phi_g = face_map(f, "", E), face_map(g, "", E)
    top1, top2 = face_map(H1, "*", E), face_map(H2, "*", E)
    left = compose(e1.g, phi_g)
    right = compose(phi_g, e2.g)
    h_left = compose(e1.g, top1).scaled(-1)
    h_right = compose(top2, e2.g).scaled(-1)
    rep.merge(_homotopy_residual(compose(left, phi_f), h_left, E), "left inverse: ")
    rep.merge(_homotopy_residual(compose(phi_f, right), h_right, E), "right inverse: ")
    hx, hy = homology(phi_f.source), homology(phi_f.target)
    bx = {k: v for k, v in hx.betti.items() if v}
    by = {k: v for k, v in hy.betti.items() if v}
    rep.data["betti_source"] = {str(k): v for k, v in sorted(bx.items())}
    rep.data["betti_target"] = {str(k): v for k, v in sorted(by.items())}
    if bx != by:
        rep.fail(f"Betti numbers differ: {bx} vs {by}")
    return InvarianceCertificate(rep, phi_f, left, right, h_left, h_right, (e1, e2), (bx, by))
