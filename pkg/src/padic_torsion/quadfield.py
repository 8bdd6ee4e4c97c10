"""Arithmetic of the quadratic field Q(sqrt(d)).

Elements are written x + y*omega over the integral basis (1, omega) with
omega = (1+sqrt(d))/2 when d = 1 mod 4 and omega = sqrt(d) otherwise, so that
omega^2 = t*omega - m where t = Tr(omega) and m = N(omega).  Ideals carry a
two-element basis content*(a*Z + (b+omega)*Z).

The class group is computed by ideal reduction at desk scale.  For d < 0 a
class is named by its unique reduced ideal and principality is a shortest-
vector test; for d > 0 classes are named by their cycle of reduced ideals and
principality is membership in the principal cycle, whose walk also streams
the fundamental unit modulo p^n.  Both give the wide class group (a
generator of any sign witnesses triviality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .linalg import AbelianPresentation, IntMatrix, InvariantFactors, invariant_factors
from .numutil import is_prime, is_squarefree, kronecker, primes_up_to

DEFAULT_DISC_BOUND = 10**7


class NotSquarefree(ValueError):
    pass


class DegenerateD(ValueError):
    pass


class BoundExceeded(ValueError):
    pass


class NotRealField(ValueError):
    pass


@dataclass(frozen=True)
class RingElement:
    """x + y*omega with integer coordinates."""

    x: int
    y: int

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class QuadField:
    d: int
    disc: int
    r1: int
    r2: int
    omega_kind: str  # "half" for (1+sqrt d)/2, "sqrt" for sqrt(d)
    t: int  # Tr(omega)
    m: int  # N(omega)

    # element arithmetic over the basis (1, omega)

    def mul(self, u: RingElement, v: RingElement) -> RingElement:
        x1, y1 = u.x, u.y
        x2, y2 = v.x, v.y
        return RingElement(
            x1 * x2 - self.m * y1 * y2, x1 * y2 + x2 * y1 + self.t * y1 * y2
        )

    def conj(self, u: RingElement) -> RingElement:
        return RingElement(u.x + self.t * u.y, -u.y)

    def norm(self, u: RingElement) -> int:
        return u.x * u.x + self.t * u.x * u.y + self.m * u.y * u.y

    def trace(self, u: RingElement) -> int:
        return 2 * u.x + self.t * u.y

    def reduce_mod(self, u: RingElement, mod: int) -> RingElement:
        return RingElement(u.x % mod, u.y % mod)

    def norm_b(self, b: int) -> int:
        """N(b + omega)."""
        return b * b + self.t * b + self.m

    def pow_mod(self, u: RingElement, e: int, mod: int) -> RingElement:
        r = RingElement(1 % mod, 0)
        base = self.reduce_mod(u, mod)
        while e:
            if e & 1:
                r = self.reduce_mod(self.mul(r, base), mod)
            base = self.reduce_mod(self.mul(base, base), mod)
            e >>= 1
        return r

    def inv_mod(self, u: RingElement, mod: int) -> RingElement:
        """Inverse modulo mod of an element whose norm is invertible mod mod."""
        ninv = pow(self.norm(u) % mod, -1, mod)
        c = self.conj(u)
        return RingElement(c.x * ninv % mod, c.y * ninv % mod)


@dataclass(frozen=True)
class QuadIdeal:
    """content * (a*Z + (b+omega)*Z) with a > 0, 0 <= b < a, a | N(b+omega)."""

    a: int
    b: int
    content: int = 1

    def norm(self) -> int:
        return self.content * self.content * self.a


def make_field(d: int) -> QuadField:
    d = int(d)
    if d in (0, 1):
        raise DegenerateD(f"d={d} does not define a quadratic field")
    if not is_squarefree(d):
        raise NotSquarefree(f"d={d} is not squarefree")
    if d % 4 == 1:
        disc, kind, t, m = d, "half", 1, (1 - d) // 4
    else:
        disc, kind, t, m = 4 * d, "sqrt", 0, -d
    if d > 0:
        r1, r2 = 2, 0
    else:
        r1, r2 = 0, 1
    return QuadField(d=d, disc=disc, r1=r1, r2=r2, omega_kind=kind, t=t, m=m)


def torsion_units(K: QuadField) -> list[RingElement]:
    """Generators of the roots of unity in O_K."""
    if K.d == -1:
        return [RingElement(0, 1)]  # i, order 4
    if K.d == -3:
        return [RingElement(0, 1)]  # (1+sqrt(-3))/2, order 6
    return [RingElement(-1, 0)]


@dataclass(frozen=True)
class SplittingData:
    symbol: str  # "split" | "inert" | "ramified"
    e: int
    f: int
    primes: tuple[QuadIdeal, ...]


def prime_splitting(K: QuadField, p: int) -> SplittingData:
    """Splitting of p in O_K with explicit prime ideals, via the Kronecker
    symbol (D|p)."""
    sym = kronecker(K.disc, p)
    if sym == 0:
        b = next(bb for bb in range(p) if K.norm_b(bb) % p == 0)
        return SplittingData("ramified", 2, 1, (QuadIdeal(p, b),))
    if sym == -1:
        return SplittingData("inert", 1, 2, (QuadIdeal(1, 0, content=p),))
    b = next(bb for bb in range(p) if K.norm_b(bb) % p == 0)
    b2 = (-b - K.t) % p
    return SplittingData("split", 1, 1, (QuadIdeal(p, b), QuadIdeal(p, b2)))


# ---------------------------------------------------------------------------
# ideal arithmetic
# ---------------------------------------------------------------------------


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def ideal_mul(K: QuadField, I: QuadIdeal, J: QuadIdeal) -> QuadIdeal:
    """Product ideal, normalized back to (content, a, b) form by a 2-row HNF
    over the four obvious Z-module generators."""
    a1, b1, a2, b2 = I.a, I.b, J.a, J.b
    t, m = K.t, K.m
    gens = (
        (a1 * a2, 0),
        (a1 * b2, a1),
        (a2 * b1, a2),
        (b1 * b2 - m, b1 + b2 + t),
    )
    Bx, C = 0, 0
    for x, y in gens:
        if y:
            if C == 0:
                Bx, C = x, y
            else:
                g, u, v = _xgcd(C, y)
                Bx, C = u * Bx + v * x, g
    if C < 0:
        C, Bx = -C, -Bx
    A = 0
    for x, y in gens:
        A = math.gcd(A, x - (y // C) * Bx)
    # an ideal's HNF satisfies C | A and C | Bx; C is the product's content
    a = A // C
    return QuadIdeal(a, (Bx // C) % a, content=I.content * J.content * C)


def ideal_conj(K: QuadField, I: QuadIdeal) -> QuadIdeal:
    return QuadIdeal(I.a, (-I.b - K.t) % I.a, I.content)


def ideal_pow(K: QuadField, I: QuadIdeal, e: int) -> QuadIdeal:
    R = QuadIdeal(1, 0)
    base = I
    while e:
        if e & 1:
            R = ideal_mul(K, R, base)
        base = ideal_mul(K, base, base)
        e >>= 1
    return R


def element_in_ideal(K: QuadField, z: RingElement, I: QuadIdeal) -> bool:
    c = I.content
    if z.x % c or z.y % c:
        return False
    x, y = z.x // c, z.y // c
    return (x - I.b * y) % I.a == 0


# ---------------------------------------------------------------------------
# reduction, imaginary case
# ---------------------------------------------------------------------------


def _reduce_imag(K: QuadField, a: int, b: int) -> tuple[int, int]:
    """The unique reduced ideal equivalent to [a, b+omega]  (d < 0)."""
    t = K.t
    guard = 0
    while True:
        B = (2 * b + t) % (2 * a)
        if B > a:
            B -= 2 * a
        b = (B - t) // 2
        c = K.norm_b(b) // a
        if a < c or (a == c and B >= 0):
            return a, b
        a, b = c, -b - t
        guard += 1
        if guard > 10000:
            raise RuntimeError("imaginary reduction did not terminate")


def _lagrange_shortest(K: QuadField, a: int, b: int) -> RingElement:
    """Shortest nonzero vector of the lattice a*Z + (b+omega)*Z  (d < 0)."""
    t, m = K.t, K.m

    def N(w):
        return w[0] * w[0] + t * w[0] * w[1] + m * w[1] * w[1]

    def T(w1, w2):
        return 2 * w1[0] * w2[0] + t * (w1[0] * w2[1] + w2[0] * w1[1]) + 2 * m * w1[1] * w2[1]

    u, v = (a, 0), (b, 1)
    if N(u) > N(v):
        u, v = v, u
    while True:
        nu = N(u)
        q, r = divmod(T(u, v), 2 * nu)
        if 2 * r > 2 * nu - 2 * r:
            q += 1
        v = (v[0] - q * u[0], v[1] - q * u[1])
        if N(v) < nu:
            u, v = v, u
        else:
            return RingElement(u[0], u[1])


# ---------------------------------------------------------------------------
# reduction, real case
# ---------------------------------------------------------------------------


class _RealReducer:
    """Reduction-walk machinery for a fixed real field; caches cycles.

    One step multiplies the ideal by conj(w)/a for w = b + omega, so a walk
    of k steps says I_0 = (prod a_j / prod conj(w_j)) * I_k, which is where
    every witness below comes from.
    """

    def __init__(self, K: QuadField):
        self.K = K
        self.s = math.isqrt(K.disc)
        self.label_cache: dict[tuple[int, int], tuple[int, int]] = {}
        self.cycle_members: dict[tuple[int, int], list[tuple[int, int]]] = {}
        start = self.normalize(1, 0)
        lab, cyc = self.cycle_of(start)
        self.principal_cycle = cyc
        self.principal_index = {ab: i for i, ab in enumerate(cyc)}

    def normalize(self, a: int, b: int) -> tuple[int, int]:
        t, s = self.K.t, self.s
        B = 2 * b + t
        if a > s:
            B = (B + a) % (2 * a) - a
        else:
            B = s - (s - B) % (2 * a)
        return a, (B - t) // 2

    def is_reduced(self, a: int, b: int) -> bool:
        B = 2 * b + self.K.t
        return a <= self.s and 0 < B <= self.s and B >= 2 * a - self.s

    def rho(self, a: int, b: int) -> tuple[int, int]:
        a2 = abs(self.K.norm_b(b)) // a
        return self.normalize(a2, -b - self.K.t)

    def reduce(self, a: int, b: int):
        """Walk to a reduced ideal; returns ((a, b) reduced, step pairs)."""
        a, b = self.normalize(a, b)
        steps = []
        guard = 0
        while not self.is_reduced(a, b):
            steps.append((a, b))
            a, b = self.rho(a, b)
            guard += 1
            if guard > 100000:
                raise RuntimeError("real reduction did not terminate")
        return (a, b), steps

    def cycle_of(self, ab: tuple[int, int]):
        """Class label (minimal pair of the rho-cycle) of a reduced ideal."""
        hit = self.label_cache.get(ab)
        if hit is not None:
            return hit, self.cycle_members[hit]
        cyc = [ab]
        cur = self.rho(*ab)
        while cur != ab:
            cyc.append(cur)
            cur = self.rho(*cur)
            if len(cyc) > 1000000:
                raise RuntimeError("cycle walk did not terminate")
        lab = min(cyc)
        for member in cyc:
            self.label_cache[member] = lab
        self.cycle_members[lab] = cyc
        return lab, cyc

    def class_label(self, a: int, b: int) -> tuple[int, int]:
        red, _ = self.reduce(a, b)
        lab, _ = self.cycle_of(red)
        return lab

    def _walk_product(self, pairs):
        """prod(b_j + omega) over the walk pairs, together with prod(a_j) and
        prod(N(b_j + omega)), all exact."""
        K = self.K
        px, py, pa, pn = 1, 0, 1, 1
        for a, b in pairs:
            px, py = px * b - K.m * py, px + py * (b + K.t)
            pa *= a
            pn *= K.norm_b(b)
        return px, py, pa, pn

    def generator_of_principal_reduced(self, idx: int) -> RingElement:
        """Exact generator of the idx-th reduced ideal on the principal cycle:
        prod(conj(w_i)) / prod(a_i) over the walk prefix from O_K."""
        K = self.K
        px, py, pa, _ = self._walk_product(self.principal_cycle[:idx])
        cx, cy = px + K.t * py, -py
        assert cx % pa == 0 and cy % pa == 0
        return RingElement(cx // pa, cy // pa)

    def witness_if_principal(self, a: int, b: int) -> RingElement | None:
        """Exact generator of the primitive ideal [a, b+omega], or None."""
        red, steps = self.reduce(a, b)
        if red not in self.principal_index:
            # label the cycle so later lookups are O(1), then give up
            self.cycle_of(red)
            if red not in self.principal_index:
                return None
        g = self.generator_of_principal_reduced(self.principal_index[red])
        if not steps:
            return g
        K = self.K
        px, py, pa, pn = self._walk_product(steps)
        # I = (g * prod(a_k) * prod(w_k) / prod(N(w_k)))
        wx = (g.x * px - K.m * g.y * py) * pa
        wy = (g.x * py + g.y * (px + K.t * py)) * pa
        assert wx % pn == 0 and wy % pn == 0
        return RingElement(wx // pn, wy // pn)


@lru_cache(maxsize=16)
def _real_reducer(d: int) -> _RealReducer:
    return _RealReducer(make_field(d))


def fundamental_unit_mod(K: QuadField, p: int, n: int) -> RingElement:
    """Image of the fundamental unit eps > 1 in O_K / p^n.

    Streams the principal-cycle walk: eps = prod(w_j) / prod(a_j) over the
    cycle, so the w_j = b_j + omega are multiplied out modulo p^(n+V) where
    V is the p-valuation of prod(a_j) (each a_j is a small exact integer),
    and the division happens once at the end.  eps is never materialized.
    """
    if K.d < 0:
        raise NotRealField(f"d={K.d} is not a real field")
    red = _real_reducer(K.d)
    pairs = red.principal_cycle
    V = 0
    aprime = 1
    pn = p**n
    for a, _ in pairs:
        while a % p == 0:
            a //= p
            V += 1
        aprime = aprime * a % pn
    mod = p ** (n + V)
    px, py = 1 % mod, 0
    m, t = K.m, K.t
    for a, b in pairs:
        px, py = (px * b - m * py) % mod, (px + py * (b + t)) % mod
    pv = p**V
    assert px % pv == 0 and py % pv == 0
    inv = pow(aprime, -1, pn)
    return RingElement((px // pv) * inv % pn, (py // pv) * inv % pn)


def fundamental_unit_norm(K: QuadField) -> int:
    """N(eps) = (-1)^(length of the principal cycle)."""
    if K.d < 0:
        raise NotRealField(f"d={K.d} is not a real field")
    return -1 if len(_real_reducer(K.d).principal_cycle) % 2 else 1


# ---------------------------------------------------------------------------
# class group
# ---------------------------------------------------------------------------


@dataclass
class Witness:
    """Generator of the fractional principal ideal (num/den), den coprime to p."""

    num: RingElement
    den: int = 1


@dataclass
class ClassGroupData:
    field: QuadField
    p: int
    h: int
    presentation: AbelianPresentation
    generator_ideals: list[QuadIdeal]
    principal_witnesses: list[Witness]
    invariants: InvariantFactors


class _ImagReducer:
    def __init__(self, K: QuadField):
        self.K = K

    def class_label(self, a: int, b: int) -> tuple[int, int]:
        return _reduce_imag(self.K, a, b)

    def witness_if_principal(self, a: int, b: int) -> RingElement | None:
        z = _lagrange_shortest(self.K, a, b)
        if self.K.norm(z) == a:
            return z
        return None


def _reducer(K: QuadField):
    return _real_reducer(K.d) if K.d > 0 else _ImagReducer(K)


def witness_of_ideal(K: QuadField, red, I: QuadIdeal) -> RingElement | None:
    """Exact generator of the integral ideal I, or None if not principal."""
    w = red.witness_if_principal(I.a, I.b)
    if w is None:
        return None
    if I.content != 1:
        w = RingElement(w.x * I.content, w.y * I.content)
    return w


def minkowski_bound(K: QuadField) -> int:
    D = abs(K.disc)
    if K.d < 0:
        return int(2 * math.sqrt(D) / math.pi) + 1
    return int(math.sqrt(D) / 2) + 1


def class_group(K: QuadField, p: int, disc_bound: int = DEFAULT_DISC_BOUND) -> ClassGroupData:
    """Structure of Cl(K) with generator ideals and principal witnesses kept
    coprime to p, ready for the ray class assembly."""
    if abs(K.disc) > disc_bound:
        raise BoundExceeded(f"|D| = {abs(K.disc)} exceeds bound {disc_bound}")
    return _class_group_cached(K.d, p)


@lru_cache(maxsize=16)
def _class_group_cached(d: int, p: int) -> ClassGroupData:
    K = make_field(d)
    red = _reducer(K)
    id_label = red.class_label(1, 0)

    # known subgroup of Cl: class label -> exponent vector over active generators
    subgroup: dict[tuple[int, int], tuple[int, ...]] = {id_label: ()}
    active: list[QuadIdeal] = []
    rel_rows: list[list[int]] = []
    rel_ideals: list[QuadIdeal] = []
    rel_dens: list[int] = []

    def mul_label(ab1, ab2):
        I = ideal_mul(K, QuadIdeal(*ab1), QuadIdeal(*ab2))
        return red.class_label(I.a, I.b)

    def absorb(P: QuadIdeal):
        lab = red.class_label(P.a, P.b)
        if lab in subgroup:
            return
        k = len(active)
        # relative order t of [P] over the current subgroup, recording P^i labels
        powers = [lab]
        cur = lab
        while cur not in subgroup:
            cur = mul_label(cur, (P.a, P.b))
            powers.append(cur)
        t = len(powers)
        expr = subgroup[cur]
        row = [-e for e in expr] + [0] * (k - len(expr)) + [t]
        J = ideal_pow(K, P, t)
        den = 1
        for j, e in enumerate(expr):
            if e:
                J = ideal_mul(K, J, ideal_pow(K, ideal_conj(K, active[j]), e))
                den *= active[j].norm() ** e
        active.append(P)
        rel_rows.append(row)
        rel_ideals.append(J)
        rel_dens.append(den)
        # extend the subgroup: new elements P^i * old, i = 1..t-1
        old_items = list(subgroup.items())
        for i in range(1, t):
            plab = powers[i - 1]
            for olab, oexpr in old_items:
                nl = plab if olab == id_label else mul_label(plab, olab)
                vec = tuple(list(oexpr) + [0] * (k - len(oexpr)) + [i])
                assert nl not in subgroup, "subgroup coset collision"
                subgroup[nl] = vec

    M = minkowski_bound(K)
    for q in primes_up_to(M):
        if q == p:
            continue
        sp = prime_splitting(K, q)
        if sp.symbol != "inert":
            absorb(sp.primes[0])

    # if p itself is non-inert and inside the Minkowski range, the p-coprime
    # generators must still express its class; extend the prime stream until so
    spl = prime_splitting(K, p)
    if spl.symbol != "inert" and p <= M:
        Pp = spl.primes[0]
        qq = M
        while red.class_label(Pp.a, Pp.b) not in subgroup:
            qq += 1
            if qq > 100 * M + 10000:
                raise RuntimeError("class group generation did not terminate")
            if qq == p or not is_prime(qq):
                continue
            sp = prime_splitting(K, qq)
            if sp.symbol != "inert":
                absorb(sp.primes[0])

    h = len(subgroup)
    g = len(active)
    rows = [r + [0] * (g - len(r)) for r in rel_rows]
    pres = AbelianPresentation(
        g, IntMatrix.from_rows(rows) if rows else IntMatrix.zero(0, g)
    )
    invs = invariant_factors(pres)
    assert invs.order() == h, "relation lattice index must equal the class number"

    witnesses = []
    for J, den in zip(rel_ideals, rel_dens):
        w = witness_of_ideal(K, red, J)
        assert w is not None, "relation ideal must be principal"
        assert K.norm(w) % p != 0, "witness must be coprime to p"
        witnesses.append(Witness(num=w, den=den))

    return ClassGroupData(
        field=K,
        p=p,
        h=h,
        presentation=pres,
        generator_ideals=list(active),
        principal_witnesses=witnesses,
        invariants=invs,
    )


def class_number(K: QuadField, p: int = 2) -> int:
    """Wide class number (p only steers which witnesses are kept coprime)."""
    return class_group(K, p).h
