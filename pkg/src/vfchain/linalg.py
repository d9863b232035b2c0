"""Small dense exact linear algebra over a BaseField, plus Smith normal form over Z.

Matrices are lists of rows.  Entries are whatever the field coerces to
(Fraction, ModP or int), so every routine here is exact.
"""

from __future__ import annotations

from .coeff import BaseField

Matrix = list


def zeros(rows: int, cols: int, field: BaseField) -> Matrix:
    z = field.zero
    return [[z] * cols for _ in range(rows)]


def identity(n: int, field: BaseField) -> Matrix:
    m = zeros(n, n, field)
    for i in range(n):
        m[i][i] = field.one
    return m


def coerce(m, field: BaseField) -> Matrix:
    return [[field(x) for x in row] for row in m]


def shape(m: Matrix, cols: int | None = None) -> tuple:
    if not m:
        return 0, (cols or 0)
    return len(m), len(m[0])


def transpose(m: Matrix, cols: int = 0) -> Matrix:
    if not m:
        return [[] for _ in range(cols)]
    return [list(col) for col in zip(*m)]


def matmul(a: Matrix, b: Matrix, field: BaseField, inner: int | None = None) -> Matrix:
    """Product a*b; ``inner`` disambiguates empty shapes."""
    rows = len(a)
    cols = len(b[0]) if b else 0
    if not b and inner is None:
        inner = 0
    z = field.zero
    out = [[z] * cols for _ in range(rows)]
    for i, arow in enumerate(a):
        orow = out[i]
        for k, x in enumerate(arow):
            if not x:
                continue
            brow = b[k]
            for j, y in enumerate(brow):
                if y:
                    orow[j] = orow[j] + x * y
    return out


def matvec(a: Matrix, v: list, field: BaseField) -> list:
    z = field.zero
    out = []
    for row in a:
        s = z
        for x, y in zip(row, v):
            if x and y:
                s = s + x * y
        out.append(s)
    return out


def add(a: Matrix, b: Matrix, sign: int = 1) -> Matrix:
    return [[x + sign * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def is_zero(m: Matrix) -> bool:
    return all(not x for row in m for x in row)


def rref(m: Matrix, field: BaseField) -> tuple[Matrix, list]:
    """Reduced row echelon form and pivot columns (field coefficients)."""
    if not field.is_field:
        raise ValueError("rref needs a field")
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = field.inv(a[r][c])
        a[r] = [x * inv for x in a[r]]
        prow = a[r]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], prow)]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Matrix, field: BaseField) -> int:
    if not m or not m[0]:
        return 0
    if field.kind == "integers":
        return rank(m, BaseField.rationals())
    return len(rref(m, field)[1])


def nullspace(m: Matrix, field: BaseField, cols: int | None = None) -> list:
    """Basis of {x : m x = 0}."""
    n = len(m[0]) if m else (cols or 0)
    if not m:
        return [[field.one if i == j else field.zero for i in range(n)] for j in range(n)]
    r, pivots = rref(m, field)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [field.zero] * n
        v[f] = field.one
        for i, p in enumerate(pivots):
            v[p] = -r[i][f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: list, field: BaseField, cols: int | None = None):
    """One solution x of a x = b, or None when inconsistent."""
    n = len(a[0]) if a else (cols or 0)
    if not a:
        return [field.zero] * n
    aug = [list(row) + [y] for row, y in zip(a, b)]
    r, pivots = rref(aug, field)
    if n in pivots:
        return None
    x = [field.zero] * n
    for i, p in enumerate(pivots):
        x[p] = r[i][n]
    return x


def inverse(m: Matrix, field: BaseField) -> Matrix:
    n = len(m)
    aug = [list(row) + idrow for row, idrow in zip(m, identity(n, field))]
    r, pivots = rref(aug, field)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in r]


def smith_diagonal(m: Matrix) -> list[int]:
    """Nonzero invariant factors of an integer matrix (each divides the next)."""
    a = [[int(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    diag = []
    t = 0
    while t < min(rows, cols):
        # choose the smallest nonzero entry in the remaining block as pivot
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // p
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // p
                    for row in a:
                        row[j] -= q * row[t]
                    if a[t][j]:
                        dirty = True
            if dirty:
                # move the smallest leftover remainder into the pivot slot
                best = (abs(p), t, t)
                for i in range(t + 1, rows):
                    if a[i][t] and abs(a[i][t]) < best[0]:
                        best = (abs(a[i][t]), i, t)
                for j in range(t + 1, cols):
                    if a[t][j] and abs(a[t][j]) < best[0]:
                        best = (abs(a[t][j]), t, j)
                _, i, j = best
                a[t], a[i] = a[i], a[t]
                for row in a:
                    row[t], row[j] = row[j], row[t]
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % p), None)
            if bad is None:
                break
            i, _ = bad
            a[t] = [x + y for x, y in zip(a[t], a[i])]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


def integer_rank_torsion(entries, nrows: int, ncols: int) -> tuple[int, list[int]]:
    """Rank and torsion coefficients of a sparse integer matrix.

    ``entries`` maps ``(row, col)`` to nonzero ints.  Unit pivots are
    eliminated sparsely first; whatever core is left goes through the dense
    Smith normal form.
    """
    rows: dict = {}
    cols: dict = {}
    for (r, c), v in entries.items():
        if v:
            rows.setdefault(r, {})[c] = int(v)
            cols.setdefault(c, set()).add(r)
    rank = 0
    progress = True
    while progress:
        progress = False
        for r in sorted(rows, key=lambda r: len(rows[r])):
            row = rows.get(r)
            if not row:
                continue
            c = next((c for c, v in row.items() if v in (1, -1)), None)
            if c is None:
                continue
            u = row[c]
            for r2 in list(cols[c]):
                if r2 == r:
                    continue
                other = rows[r2]
                f = other[c] * u
                for c2, v in row.items():
                    nv = other.get(c2, 0) - f * v
                    if nv:
                        if c2 not in other:
                            cols.setdefault(c2, set()).add(r2)
                        other[c2] = nv
                    else:
                        other.pop(c2, None)
                        cols[c2].discard(r2)
                if not other:
                    del rows[r2]
            for c2 in row:
                cols[c2].discard(r)
            del rows[r]
            del cols[c]
            rank += 1
            progress = True
    if not rows:
        return rank, []
    rlist = sorted(rows)
    clist = sorted({c for row in rows.values() for c in row})
    cidx = {c: j for j, c in enumerate(clist)}
    dense = [[0] * len(clist) for _ in rlist]
    for i, r in enumerate(rlist):
        for c, v in rows[r].items():
            dense[i][cidx[c]] = v
    diag = smith_diagonal(dense)
    return rank + len(diag), [d for d in diag if d > 1]


def modp_rank(entries, p: int) -> int:
    """Rank of a sparse integer matrix reduced mod a prime ``p``."""
    rows: dict = {}
    for (r, c), v in entries.items():
        v %= p
        if v:
            rows.setdefault(r, {})[c] = v
    pivots: dict = {}  # column -> reduced row with leading entry 1 at that column
    rank = 0
    for r in rows:
        row = dict(rows[r])
        while row:
            c = min(row)
            if c in pivots:
                f = row[c]
                for c2, v in pivots[c].items():
                    nv = (row.get(c2, 0) - f * v) % p
                    if nv:
                        row[c2] = nv
                    else:
                        row.pop(c2, None)
            else:
                inv = pow(row[c], -1, p)
                pivots[c] = {c2: (v * inv) % p for c2, v in row.items()}
                rank += 1
                break
    return rank


def solve_gf2(rows: list[int], rhs: list[int], ncols: int):
    """Solve a GF(2) system given as bitmask rows; free variables are set to 0."""
    pivots: dict = {}  # pivot column -> (row mask, rhs bit)
    for mask, b in zip(rows, rhs):
        for col, (pm, pb) in pivots.items():
            if mask >> col & 1:
                mask ^= pm
                b ^= pb
        if not mask:
            if b:
                return None
            continue
        col = mask.bit_length() - 1
        for c2, (pm, pb) in list(pivots.items()):
            if pm >> col & 1:
                pivots[c2] = (pm ^ mask, pb ^ b)
        pivots[col] = (mask, b)
    x = [0] * ncols
    for col, (pm, pb) in pivots.items():
        x[col] = pb
    return x
