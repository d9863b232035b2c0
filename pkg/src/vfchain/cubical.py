"""Symmetric cubical sets without connections, their chains and the Day tensor.

Every cube of a set is written ``(g, S)``: a nondegenerate generator ``g`` of
dimension k and a strictly increasing tuple ``S`` of k coordinates of the
ambient n-cube.  Read as a map out of [0,1]^n it is ``t -> g(t_{S[0]}, ...)``;
the coordinates outside ``S`` are degenerate.  Degeneracies therefore need no
table.  A set supplies

* ``face(g, j, e)``: the face ``t_j = e`` of ``g`` as a cube ``(h, T)``;
* ``act(g, pi)``: the generator ``t -> g(t_{pi(0)}, ..., t_{pi(k-1)})``,
  so that ``act(act(g, pi), rho) = act(g, rho o pi)``.

Permutations are tuples with ``pi[j] = pi(j)``.  Chains are taken modulo
degenerate cubes and ``alpha + tau(alpha)`` for transpositions, so
``[act(g, pi)] = sign(pi) [g]`` and the cohomological degree of an n-cube is
``-n``; ``d = sum_i (-1)^i (face_{i,1} - face_{i,0})``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .coeff import QQ, BaseField
from .homalg import GradedComplex, label_from_json, label_to_json
from .report import Report


class CubicalDataError(ValueError):
    pass


# ---------------------------------------------------------------------------
# permutations


def identity_perm(k: int) -> tuple:
    return tuple(range(k))


def compose_perm(rho, pi) -> tuple:
    """rho o pi."""
    return tuple(rho[pi[j]] for j in range(len(pi)))


def inverse_perm(pi) -> tuple:
    inv = [0] * len(pi)
    for j, x in enumerate(pi):
        inv[x] = j
    return tuple(inv)


def perm_sign(pi) -> int:
    sign = 1
    seen = [False] * len(pi)
    for i in range(len(pi)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = pi[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def transposition(k: int, i: int) -> tuple:
    p = list(range(k))
    p[i], p[i + 1] = p[i + 1], p[i]
    return tuple(p)


def adjacent_word(pi) -> list:
    """Adjacent transpositions t_1, ..., t_m with pi = t_1 o t_2 o ... o t_m."""
    p = list(pi)
    word = []
    # bubble sort p into the identity by right multiplication p <- p o t
    changed = True
    while changed:
        changed = False
        for i in range(len(p) - 1):
            if p[i] > p[i + 1]:
                p[i], p[i + 1] = p[i + 1], p[i]
                word.append(i)
                changed = True
    # p o t_{w1} o ... o t_{wm} = id, so p = t_{wm} o ... o t_{w1}
    return [transposition(len(pi), i) for i in reversed(word)]


# ---------------------------------------------------------------------------
# the common interface


class SymCubicalSet:
    """Abstract symmetric cubical set given on nondegenerate generators."""

    name = "cubical set"

    def dim(self, g) -> int:
        raise NotImplementedError

    def face(self, g, j: int, e: int) -> tuple:
        raise NotImplementedError

    def act(self, g, pi) -> object:
        raise NotImplementedError

    def generators(self, k: int) -> list:
        raise NotImplementedError

    def max_dim(self) -> int:
        raise NotImplementedError

    def has(self, g) -> bool:
        try:
            self.dim(g)
        except (KeyError, TypeError, ValueError):
            return False
        return True

    # general cubes -------------------------------------------------------
    def normalize(self, g, iota) -> tuple:
        """The cube t -> g(t_{iota(0)}, ...) (iota injective) in normal form."""
        S = tuple(sorted(iota))
        if len(set(S)) != len(S):
            raise CubicalDataError("coordinate map is not injective")
        pos = {s: m for m, s in enumerate(S)}
        pi = tuple(pos[x] for x in iota)
        if pi != identity_perm(len(pi)):
            g = self.act(g, pi)
        return g, S

    def face_of(self, g, iota, i: int, e: int) -> tuple:
        """Face t_i = e of the cube (g, iota) inside an n-cube."""

        def ins(x):
            return x if x < i else x - 1

        iota = tuple(iota)
        if i not in iota:
            return self.normalize(g, tuple(ins(x) for x in iota))
        j0 = iota.index(i)
        h, T = self.face(g, j0, e)
        rest = [j for j in range(len(iota)) if j != j0]
        return self.normalize(h, tuple(ins(iota[rest[t]]) for t in T))

    def act_on(self, g, S, pi) -> tuple:
        """Symmetry of the ambient cube applied to (g, S)."""
        return self.normalize(g, tuple(pi[s] for s in S))

    def top(self, g) -> tuple:
        return g, identity_perm(self.dim(g))

    # chains ----------------------------------------------------------------
    def class_of(self, g, characteristic: int = 0):
        """(representative, sign) with [g] = sign [rep], or None if killed."""
        cache = self.__dict__.setdefault("_class_cache", {})
        key = (g, characteristic == 2)
        if key in cache:
            return cache[key]
        k = self.dim(g)
        perms = {g: identity_perm(k)}
        killed = False
        frontier = [g]
        while frontier:
            nxt = []
            for x in frontier:
                for i in range(k - 1):
                    t = transposition(k, i)
                    y = self.act(x, t)
                    p = compose_perm(t, perms[x])
                    if y in perms:
                        if perm_sign(perms[y]) != perm_sign(p):
                            killed = True
                    else:
                        perms[y] = p
                        nxt.append(y)
            frontier = nxt
        rep = min(perms, key=_sort_key)
        if killed and characteristic != 2:
            result = None
        else:
            result = (rep, perm_sign(perms[rep]))
        for x, p in perms.items():
            if result is None:
                cache[(x, characteristic == 2)] = None
            else:
                # x = act(rep, p o perms[rep]^-1)
                s = perm_sign(p) * perm_sign(perms[rep])
                cache[(x, characteristic == 2)] = (rep, s)
        return cache[key]

    def classes(self, k: int, characteristic: int = 0) -> list:
        reps = []
        seen = set()
        for g in self.generators(k):
            c = self.class_of(g, characteristic)
            if c is not None and c[0] not in seen:
                seen.add(c[0])
                reps.append(c[0])
        return sorted(reps, key=_sort_key)

    def boundary(self, g, characteristic: int = 0) -> dict:
        """d[g] as {class representative: integer coefficient}."""
        k = self.dim(g)
        out = {}
        for i in range(k):
            for e, s in ((1, 1), (0, -1)):
                h, T = self.face_of(g, identity_perm(k), i, e)
                if len(T) < k - 1:
                    continue  # degenerate
                c = self.class_of(h, characteristic)
                if c is None:
                    continue
                rep, sg = c
                v = out.get(rep, 0) + (-1 if i % 2 else 1) * s * sg
                if v:
                    out[rep] = v
                else:
                    out.pop(rep, None)
        return out


def _sort_key(g):
    return repr(g)


# ---------------------------------------------------------------------------
# explicit tables


class ExplicitCubicalSet(SymCubicalSet):
    """A set given by finite tables.

    ``gens`` maps names to dimensions; ``faces[(g, j, e)] = (h, T)``;
    ``syms[(g, pi)] = g2``.  Missing symmetry entries are derived from
    adjacent transpositions; a missing transposition entry acts trivially
    only for dimensions below 2.
    """

    def __init__(self, gens: dict, faces: dict, syms: dict | None = None, name: str = ""):
        self.gens = dict(gens)
        self.faces = {(g, int(j), int(e)): (h, tuple(T)) for (g, j, e), (h, T) in faces.items()}
        self.syms = {(g, tuple(p)): h for (g, p), h in (syms or {}).items()}
        self.name = name or "explicit"

    def dim(self, g) -> int:
        return self.gens[g]

    def max_dim(self) -> int:
        return max(self.gens.values(), default=0)

    def generators(self, k: int) -> list:
        return sorted((g for g, d in self.gens.items() if d == k), key=_sort_key)

    def face(self, g, j, e):
        try:
            return self.faces[(g, j, e)]
        except KeyError:
            raise CubicalDataError(f"face ({g!r}, {j}, {e}) is not tabulated") from None

    def act(self, g, pi):
        pi = tuple(pi)
        if pi == identity_perm(len(pi)):
            return g
        if (g, pi) in self.syms:
            return self.syms[(g, pi)]
        word = adjacent_word(pi)
        if len(word) == 1:
            raise CubicalDataError(f"symmetry ({g!r}, {pi}) is not tabulated")
        x = g
        for t in reversed(word):
            x = self.act(x, t)
        return x

    def to_json(self) -> dict:
        return {
            "generators": [[label_to_json(g), d] for g, d in sorted(self.gens.items(),
                                                                   key=lambda kv: _sort_key(kv[0]))],
            "faces": [[label_to_json(g), j, e, label_to_json(h), list(T)]
                      for (g, j, e), (h, T) in sorted(self.faces.items(), key=_sort_key)],
            "symmetries": [[label_to_json(g), list(p), label_to_json(h)]
                           for (g, p), h in sorted(self.syms.items(), key=_sort_key)],
        }

    @classmethod
    def from_json(cls, data) -> "ExplicitCubicalSet":
        gens = {label_from_json(g): int(d) for g, d in data["generators"]}
        faces = {(label_from_json(g), j, e): (label_from_json(h), tuple(T))
                 for g, j, e, h, T in data.get("faces", [])}
        syms = {(label_from_json(g), tuple(p)): label_from_json(h)
                for g, p, h in data.get("symmetries", [])}
        return cls(gens, faces, syms, data.get("name", ""))


def explicit(A: SymCubicalSet, max_dim: int | None = None) -> ExplicitCubicalSet:
    """Tabulate a (lazy) set up to ``max_dim``, with full symmetry tables."""
    top = A.max_dim() if max_dim is None else max_dim
    gens, faces, syms = {}, {}, {}
    for k in range(top + 1):
        for g in A.generators(k):
            gens[g] = k
            for j in range(k):
                for e in (0, 1):
                    faces[(g, j, e)] = A.face(g, j, e)
            for pi in itertools.permutations(range(k)):
                if pi != identity_perm(k):
                    syms[(g, pi)] = A.act(g, pi)
    return ExplicitCubicalSet(gens, faces, syms, A.name)


def point() -> ExplicitCubicalSet:
    return ExplicitCubicalSet({"pt": 0}, {}, name="point")


def symmetric_square() -> ExplicitCubicalSet:
    """The square with its two coordinates identified: the 2-cube is fixed by the swap."""
    gens = {"v00": 0, "v01": 0, "v11": 0, "a": 1, "b": 1, "s": 2}
    faces = {("a", 0, 0): ("v00", ()), ("a", 0, 1): ("v01", ()),
             ("b", 0, 0): ("v01", ()), ("b", 0, 1): ("v11", ()),
             ("s", 0, 0): ("a", (0,)), ("s", 1, 0): ("a", (0,)),
             ("s", 0, 1): ("b", (0,)), ("s", 1, 1): ("b", (0,))}
    return ExplicitCubicalSet(gens, faces, {("s", (1, 0)): "s"}, "symmetric square")


def circle() -> ExplicitCubicalSet:
    """One vertex and one loop."""
    return ExplicitCubicalSet({"v": 0, "e": 1}, {("e", 0, 0): ("v", ()), ("e", 0, 1): ("v", ())},
                              name="circle")


# ---------------------------------------------------------------------------
# representable cubes


class RepresentableCube(SymCubicalSet):
    """The cube category's representable [0,1]^n (no connections, no diagonals).

    A nondegenerate k-cube is ``(F, order)``: a face string F of [0,1]^n with
    k free slots and a bijection ``order`` from free slots to input coordinates.
    """

    def __init__(self, n: int):
        self.n = n
        self.name = f"cube[{n}]"

    def dim(self, g) -> int:
        F, order = g
        if len(F) != self.n or set(F) - set("01*") or F.count("*") != len(order) or \
                sorted(order) != list(range(len(order))):
            raise CubicalDataError(f"{g!r} is not a cube of {self.name}")
        return len(order)

    def max_dim(self) -> int:
        return self.n

    def generators(self, k: int) -> list:
        out = []
        for F in itertools.product("01*", repeat=self.n):
            if F.count("*") != k:
                continue
            for order in itertools.permutations(range(k)):
                out.append(("".join(F), tuple(order)))
        return sorted(out, key=_sort_key)

    def face(self, g, j, e):
        F, order = g
        F = list(F)
        slot = 0
        new_order = []
        for m, ch in enumerate(F):
            if ch != "*":
                continue
            if order[slot] == j:
                F[m] = str(e)
            else:
                new_order.append(order[slot] - (1 if order[slot] > j else 0))
            slot += 1
        k = len(order)
        return ("".join(F), tuple(new_order)), identity_perm(k - 1)

    def act(self, g, pi):
        F, order = g
        return F, tuple(pi[o] for o in order)


def interval() -> RepresentableCube:
    return RepresentableCube(1)


# ---------------------------------------------------------------------------
# Day tensor


class DayTensor(SymCubicalSet):
    """A (x) B: generators ``(a, b, U)`` with U the coordinates carried by a."""

    def __init__(self, A: SymCubicalSet, B: SymCubicalSet):
        self.A, self.B = A, B
        self.name = f"({A.name} (x) {B.name})"

    def dim(self, g) -> int:
        a, b, U = g
        da, db = self.A.dim(a), self.B.dim(b)
        if len(U) != da or any(u < 0 or u >= da + db for u in U) or list(U) != sorted(set(U)):
            raise CubicalDataError(f"{g!r} is not a generator of {self.name}")
        return da + db

    def max_dim(self) -> int:
        return self.A.max_dim() + self.B.max_dim()

    def generators(self, k: int) -> list:
        out = []
        for i in range(0, k + 1):
            if i > self.A.max_dim() or k - i > self.B.max_dim():
                continue
            for a in self.A.generators(i):
                for b in self.B.generators(k - i):
                    for U in itertools.combinations(range(k), i):
                        out.append((a, b, tuple(U)))
        return sorted(out, key=_sort_key)

    @staticmethod
    def _complement(U, n):
        s = set(U)
        return tuple(x for x in range(n) if x not in s)

    def _assemble(self, a, Pa, b, Pb) -> tuple:
        """The cube t -> (a(t_Pa), b(t_Pb)) with Pa, Pb increasing, as (gen, S)."""
        S = tuple(sorted(Pa + Pb))
        pos = {s: m for m, s in enumerate(S)}
        return (a, b, tuple(pos[x] for x in Pa)), S

    def face(self, g, j, e):
        a, b, U = g
        n = self.dim(g)
        V = self._complement(U, n)

        def ins(x):
            return x if x < j else x - 1

        if j in U:
            m = U.index(j)
            h, T = self.A.face(a, m, e)
            rest = [u for u in U if u != j]
            return self._assemble(h, tuple(ins(rest[t]) for t in T), b, tuple(ins(v) for v in V))
        m = V.index(j)
        h, T = self.B.face(b, m, e)
        rest = [v for v in V if v != j]
        return self._assemble(a, tuple(ins(u) for u in U), h, tuple(ins(rest[t]) for t in T))

    def act(self, g, pi):
        a, b, U = g
        n = self.dim(g)
        V = self._complement(U, n)
        a2, Sa = self.A.normalize(a, tuple(pi[u] for u in U))
        b2, _ = self.B.normalize(b, tuple(pi[v] for v in V))
        return a2, b2, Sa

    def class_of(self, g, characteristic: int = 0):
        a, b, U = g
        i = len(U)
        n = self.dim(g)
        V = self._complement(U, n)
        beta = tuple(U) + tuple(V)  # act((a, b, first), beta) = (a, b, U)
        ca = self.A.class_of(a, characteristic)
        cb = self.B.class_of(b, characteristic)
        if ca is None or cb is None:
            return None
        return (ca[0], cb[0], identity_perm(i)), perm_sign(beta) * ca[1] * cb[1]

    def classes(self, k: int, characteristic: int = 0) -> list:
        out = []
        for i in range(0, k + 1):
            if i > self.A.max_dim() or k - i > self.B.max_dim():
                continue
            for a in self.A.classes(i, characteristic):
                for b in self.B.classes(k - i, characteristic):
                    out.append((a, b, identity_perm(i)))
        return sorted(out, key=_sort_key)


def cub_tensor(A: SymCubicalSet, B: SymCubicalSet) -> DayTensor:
    return DayTensor(A, B)


def swap_generator(g) -> tuple:
    """A (x) B -> B (x) A on generators: (a, b, U) -> (b, a, complement of U)."""
    a, b, U = g
    return b, a, U


def tensor_swap(T: DayTensor, g) -> tuple:
    a, b, U = g
    n = T.dim(g)
    return b, a, DayTensor._complement(U, n)


def flatten(T: SymCubicalSet, g, coords=None) -> tuple:
    """Leaf generators of a nested Day tensor with their ambient coordinates."""
    if coords is None:
        coords = identity_perm(T.dim(g))
    if not isinstance(T, DayTensor):
        return ((g, tuple(coords)),)
    a, b, U = g
    V = DayTensor._complement(U, len(coords))
    return flatten(T.A, a, [coords[u] for u in U]) + flatten(T.B, b, [coords[v] for v in V])


def regroup_generator(left: DayTensor, g) -> tuple:
    """(A (x) B) (x) C -> A (x) (B (x) C) on generators."""
    (a, b, U), c, V = g
    n = left.dim(g)
    W = DayTensor._complement(V, n)  # coordinates of c
    Sa = tuple(V[u] for u in U)
    Sb = tuple(V[x] for x in DayTensor._complement(U, len(V)))
    inner = tuple(sorted(Sb + W))
    pos = {s: m for m, s in enumerate(inner)}
    return a, (b, c, tuple(pos[x] for x in Sb)), Sa


# ---------------------------------------------------------------------------
# validation


def _check_cube(A: SymCubicalSet, cube, n: int, rep: Report, where: str):
    h, T = cube
    if not A.has(h):
        rep.fail(f"{where}: {h!r} is not a generator", where=where)
        return
    if len(T) != A.dim(h) or list(T) != sorted(set(T)) or any(t < 0 or t >= n for t in T):
        rep.fail(f"{where}: coordinates {T} do not fit a {A.dim(h)}-cube in dimension {n}",
                 where=where)


def cub_validate(A: SymCubicalSet, max_dim: int | None = None, full_symmetric: int = 4) -> Report:
    """Check the cube-category relations on every generator up to ``max_dim``.

    * faces and symmetries land in the set with the right dimensions;
    * act(g, id) = g and act(act(g, pi), rho) = act(g, rho o pi);
    * face_{i,e} face_{j,e'} = face_{j-1,e'} face_{i,e} for i < j;
    * faces commute with symmetries (checked on all of Sigma_k for k up to
      ``full_symmetric`` and on adjacent transpositions above).
    """
    rep = Report()
    top = A.max_dim() if max_dim is None else max_dim
    counts = {"generators": 0, "relations": 0}
    for k in range(top + 1):
        for g in A.generators(k):
            counts["generators"] += 1
            try:
                _validate_generator(A, g, k, rep, counts, full_symmetric)
            except CubicalDataError as exc:
                rep.fail(f"generator {g!r}: {exc}", generator=label_to_json(g))
    rep.data.update(counts)
    return rep


def _validate_generator(A, g, k, rep, counts, full_symmetric):
    where = f"generator {g!r}"
    for j in range(k):
        for e in (0, 1):
            _check_cube(A, A.face(g, j, e), k - 1, rep, f"{where} face ({j},{e})")
    if k <= full_symmetric:
        perms = list(itertools.permutations(range(k)))
    else:
        perms = [identity_perm(k)] + [transposition(k, i) for i in range(k - 1)]
    for pi in perms:
        h = A.act(g, pi)
        if not A.has(h) or A.dim(h) != k:
            rep.fail(f"{where}: symmetry {pi} leaves the set or changes dimension")
            return
    if A.act(g, identity_perm(k)) != g:
        rep.fail(f"{where}: the identity acts nontrivially")
    if k <= full_symmetric:
        for pi in perms:
            for rho in perms:
                counts["relations"] += 1
                if A.act(A.act(g, pi), rho) != A.act(g, compose_perm(rho, pi)):
                    rep.fail(f"{where}: act(act(g, {pi}), {rho}) != act(g, {compose_perm(rho, pi)})",
                             generator=label_to_json(g), relation="action")
    top = identity_perm(k)
    for i in range(k):
        for j in range(i + 1, k):
            for e in (0, 1):
                for e2 in (0, 1):
                    counts["relations"] += 1
                    x = A.face_of(*A.face_of(g, top, j, e2), i, e)
                    y = A.face_of(*A.face_of(g, top, i, e), j - 1, e2)
                    if x != y:
                        rep.fail(f"{where}: face relation fails for i={i}, j={j}, "
                                 f"e={e}, e'={e2}: {x!r} != {y!r}",
                                 generator=label_to_json(g), relation="face-face", i=i, j=j)
    for pi in perms:
        h = A.act(g, pi)
        for i in range(k):
            for e in (0, 1):
                counts["relations"] += 1
                x = A.face_of(g, pi, i, e)
                y = A.face_of(h, top, i, e)
                if x != y:
                    rep.fail(f"{where}: face ({i},{e}) does not commute with symmetry {pi}",
                             generator=label_to_json(g), relation="face-symmetry", i=i)


# ---------------------------------------------------------------------------
# chains


def cub_chains(A: SymCubicalSet, field: BaseField = QQ, max_dim: int | None = None) -> GradedComplex:
    """Normalized symmetric chains, cohomologically graded (an n-cube in degree -n)."""
    top = A.max_dim() if max_dim is None else max_dim
    char = field.characteristic
    gens, diff = [], {}
    for k in range(top + 1):
        for g in A.classes(k, char):
            gens.append((g, -k))
            if k == 0:
                continue
            for h, c in A.boundary(g, char).items():
                if field(c):
                    diff[(g, h)] = c
    return GradedComplex(field, gens, diff)


def to_classes(A: SymCubicalSet, chain: dict, field: BaseField) -> dict:
    """Rewrite a chain on arbitrary generators in terms of class representatives."""
    out = {}
    for g, c in chain.items():
        cl = A.class_of(g, field.characteristic)
        if cl is None:
            continue
        rep, s = cl
        out[rep] = out.get(rep, field.zero) + field(c) * s
    return {g: c for g, c in out.items() if c}


def chain_boundary(A: SymCubicalSet, chain: dict, field: BaseField) -> dict:
    out = {}
    for g, c in chain.items():
        for h, x in A.boundary(g, field.characteristic).items():
            out[h] = out.get(h, field.zero) + field(c) * x
    return {g: c for g, c in out.items() if c}


def shuffle_product(a: dict, b: dict, T: DayTensor, field: BaseField = QQ) -> dict:
    """The cross product of chains a in A and b in B, as a chain in A (x) B.

    On generators ``[a] x [b] = [(a, b, first block)]``; in the symmetric
    quotient every (i, j)-shuffle of the coordinates gives the same class up to
    the sign of the shuffle, so the canonical shuffle represents the product.
    """
    out = {}
    for x, c in a.items():
        i = T.A.dim(x)
        for y, d in b.items():
            g = (x, y, identity_perm(i))
            cl = T.class_of(g, field.characteristic)
            if cl is None:
                continue
            rep, s = cl
            out[rep] = out.get(rep, field.zero) + field(c) * field(d) * s
    return {g: c for g, c in out.items() if c}


def chain_degree(A: SymCubicalSet, chain: dict) -> int:
    dims = {A.dim(g) for g in chain}
    if len(dims) > 1:
        raise CubicalDataError("chain is not homogeneous")
    return -dims.pop() if dims else 0


@dataclass
class EZReport:
    leibniz: Report
    associativity: Report
    commutativity: Report

    @property
    def ok(self) -> bool:
        return self.leibniz.ok and self.associativity.ok and self.commutativity.ok


def check_eilenberg_zilber(A: SymCubicalSet, B: SymCubicalSet, C: SymCubicalSet,
                           field: BaseField = QQ, max_dim: int = 3) -> EZReport:
    """Leibniz, associativity and graded commutativity on all basis classes."""
    char = field.characteristic
    AB, BA, BC = DayTensor(A, B), DayTensor(B, A), DayTensor(B, C)
    AB_C, A_BC = DayTensor(AB, C), DayTensor(A, BC)
    leib, assoc, comm = Report(), Report(), Report()

    def basis(X):
        return [g for k in range(min(X.max_dim(), max_dim) + 1) for g in X.classes(k, char)]

    for a in basis(A):
        for b in basis(B):
            ea, eb = {a: field.one}, {b: field.one}
            lhs = chain_boundary(AB, shuffle_product(ea, eb, AB, field), field)
            rhs = shuffle_product(chain_boundary(A, ea, field), eb, AB, field)
            sign = -1 if A.dim(a) % 2 else 1
            for g, c in shuffle_product(ea, chain_boundary(B, eb, field), AB, field).items():
                rhs[g] = rhs.get(g, field.zero) + sign * c
            rhs = {g: c for g, c in rhs.items() if c}
            if lhs != rhs:
                leib.fail(f"Leibniz fails for ({a!r}, {b!r})")
            ab = shuffle_product(ea, eb, AB, field)
            ba = shuffle_product(eb, ea, BA, field)
            swapped = to_classes(AB, {tensor_swap(BA, g): c for g, c in ba.items()}, field)
            s = -1 if (A.dim(a) * B.dim(b)) % 2 else 1
            if {g: c * s for g, c in swapped.items()} != ab:
                comm.fail(f"graded commutativity fails for ({a!r}, {b!r})")
            for c in basis(C):
                ec = {c: field.one}
                left = shuffle_product(ab, ec, AB_C, field)
                left = to_classes(A_BC, {regroup_generator(AB_C, g): x for g, x in left.items()},
                                  field)
                right = shuffle_product(ea, shuffle_product(eb, ec, BC, field), A_BC, field)
                if left != right:
                    assoc.fail(f"associativity fails for ({a!r}, {b!r}, {c!r})")
    return EZReport(leib, assoc, comm)
