"""Exact integer linear algebra: Smith normal form, abelian group presentations,
invariant factors.

Everything here works over Python ints (arbitrary precision); matrices are
dense and small (tens of rows), so the algorithms favour robustness over
asymptotics.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class InfiniteGroup(ValueError):
    """Raised when a presentation turns out to have a free generator."""


@dataclass
class IntMatrix:
    """Dense integer matrix, row-major."""

    rows: int
    cols: int
    data: list[list[int]]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimensions")
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError("data shape does not match dimensions")

    @classmethod
    def from_rows(cls, data) -> "IntMatrix":
        data = [list(map(int, r)) for r in data]
        cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [r[:] for r in self.data])

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        od = other.data
        out = []
        for r in self.data:
            row = [0] * other.cols
            for k, a in enumerate(r):
                if a:
                    ok = od[k]
                    for j in range(other.cols):
                        row[j] += a * ok[j]
            out.append(row)
        return IntMatrix(self.rows, other.cols, out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )


@dataclass
class AbelianPresentation:
    """Finitely generated abelian group: Z^g modulo the row span of `relations`."""

    num_generators: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.cols != self.num_generators:
            raise ValueError("relation width must equal generator count")


@dataclass(frozen=True)
class InvariantFactors:
    """Divisor chain a_1 | a_2 | ... with every a_i >= 2; empty for the trivial group."""

    factors: tuple[int, ...]

    def __post_init__(self):
        f = self.factors
        if any(a < 2 for a in f):
            raise ValueError("invariant factors must be >= 2")
        if any(f[i + 1] % f[i] for i in range(len(f) - 1)):
            raise ValueError("not a divisor chain")

    @classmethod
    def of(cls, seq) -> "InvariantFactors":
        return cls(tuple(int(a) for a in seq))

    def order(self) -> int:
        n = 1
        for a in self.factors:
            n *= a
        return n

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __getitem__(self, i):
        return self.factors[i]


def _divmod_near(a: int, d: int):
    # quotient minimizing |remainder|; d != 0
    q, r = divmod(a, d)
    if 2 * abs(r) > abs(d):
        if d > 0:
            q, r = q + 1, r - d
        else:
            q, r = q - 1, r - d
    return q, r


def _snf_inplace(A: list[list[int]], nrows: int, ncols: int, want_vinv: bool):
    """Reduce A to Smith form in place; return (U, V, Vinv) as row-lists.

    Kannan-Bachem flavoured: pivot on the entry of minimal absolute value to
    keep intermediate entries small, clear its row and column by nearest-
    quotient division, then enforce that the pivot divides the remaining
    submatrix before moving on (which yields the divisor chain directly).
    """
    U = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    V = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    Vinv = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)] if want_vinv else None

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for r in A:
                r[i], r[j] = r[j], r[i]
            for r in V:
                r[i], r[j] = r[j], r[i]
            if Vinv is not None:
                Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(dst, src, q):
        # row_dst -= q * row_src
        if q:
            Ad, As = A[dst], A[src]
            for j in range(ncols):
                Ad[j] -= q * As[j]
            Ud, Us = U[dst], U[src]
            for j in range(nrows):
                Ud[j] -= q * Us[j]

    def add_col(dst, src, q):
        # col_dst -= q * col_src
        if q:
            for r in A:
                r[dst] -= q * r[src]
            for r in V:
                r[dst] -= q * r[src]
            if Vinv is not None:
                Vd, Vs = Vinv[dst], Vinv[src]
                for j in range(ncols):
                    Vs[j] += q * Vd[j]

    k = 0
    limit = min(nrows, ncols)
    while k < limit:
        # pivot: minimal absolute value in the trailing submatrix
        best = 0
        pi = pj = -1
        for i in range(k, nrows):
            Ai = A[i]
            for j in range(k, ncols):
                x = Ai[j]
                if x and (best == 0 or -best < x < best):
                    best = abs(x)
                    pi, pj = i, j
        if pi < 0:
            break
        swap_rows(k, pi)
        swap_cols(k, pj)

        while True:
            # clear column k
            dirty = False
            for i in range(k + 1, nrows):
                if A[i][k]:
                    q, r = _divmod_near(A[i][k], A[k][k])
                    add_row(i, k, q)
                    if r:
                        swap_rows(k, i)  # remainder is smaller: new pivot
                        dirty = True
            if dirty:
                continue
            # clear row k
            for j in range(k + 1, ncols):
                if A[k][j]:
                    q, r = _divmod_near(A[k][j], A[k][k])
                    add_col(j, k, q)
                    if r:
                        swap_cols(k, j)
                        dirty = True
            if dirty:
                continue
            if all(A[i][k] == 0 for i in range(k + 1, nrows)):
                break

        # pivot must divide the rest of the submatrix
        d = A[k][k]
        offender = None
        for i in range(k + 1, nrows):
            Ai = A[i]
            for j in range(k + 1, ncols):
                if Ai[j] % d:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            add_row(k, offender, -1)  # fold offending row into pivot row, redo
            continue
        k += 1

    # nonnegative diagonal
    for i in range(limit):
        if A[i][i] < 0:
            for j in range(ncols):
                A[i][j] = -A[i][j]
            for j in range(nrows):
                U[i][j] = -U[i][j]
    return U, V, Vinv


def smith_normal_form(m: IntMatrix):
    """Smith normal form of m.

    Returns (d, U, V) where U*m*V is diagonal with divisor chain d
    (d[i] | d[i+1], entries >= 0) and U, V are unimodular.
    """
    d, U, V, _ = smith_normal_form_with_inverse(m)
    return d, U, V


def smith_normal_form_with_inverse(m: IntMatrix):
    """Like smith_normal_form but also returns Vinv with V*Vinv = identity."""
    A = [r[:] for r in m.data]
    U, V, Vinv = _snf_inplace(A, m.rows, m.cols, want_vinv=True)
    d = [A[i][i] for i in range(min(m.rows, m.cols))]
    return (
        d,
        IntMatrix(m.rows, m.rows, U),
        IntMatrix(m.cols, m.cols, V),
        IntMatrix(m.cols, m.cols, Vinv),
    )


def invariant_factors(g: AbelianPresentation) -> InvariantFactors:
    """Invariant factors of the group presented by g.

    Raises InfiniteGroup if the presentation has a free generator
    (zero diagonal entry / more generators than the relation rank).
    """
    d, _, _ = smith_normal_form(g.relations)
    rank = sum(1 for x in d if x != 0)
    if rank < g.num_generators:
        raise InfiniteGroup(
            f"presentation has {g.num_generators - rank} free generator(s)"
        )
    return InvariantFactors.of([x for x in d if x > 1])


def p_part(f: InvariantFactors, p: int) -> InvariantFactors:
    """Replace each factor by its p-power part, dropping trivial entries."""
    out = []
    for a in f:
        pk = 1
        while a % p == 0:
            a //= p
            pk *= p
        if pk > 1:
            out.append(pk)
    return InvariantFactors.of(out)


def prime_to_p_part(f: InvariantFactors, p: int) -> InvariantFactors:
    """Complementary extraction to p_part."""
    out = []
    for a in f:
        while a % p == 0:
            a //= p
        if a > 1:
            out.append(a)
    return InvariantFactors.of(out)


def quotient_presentation(g: AbelianPresentation, subgroup_gens) -> AbelianPresentation:
    """Presentation of g modulo the subgroup generated by the given elements.

    Each element of subgroup_gens is an exponent vector over g's generators;
    quotienting just appends those vectors as relation rows.
    """
    rows = [r[:] for r in g.relations.data]
    for v in subgroup_gens:
        v = list(map(int, v))
        if len(v) != g.num_generators:
            raise ValueError("subgroup generator has wrong length")
        rows.append(v)
    return AbelianPresentation(
        g.num_generators, IntMatrix(len(rows), g.num_generators, rows)
    )


def presentation_of_chain(chain) -> AbelianPresentation:
    """Presentation of the product of cyclic groups Z/a for a in chain."""
    chain = list(chain)
    n = len(chain)
    rel = IntMatrix(n, n, [[chain[i] if i == j else 0 for j in range(n)] for i in range(n)])
    return AbelianPresentation(n, rel)
