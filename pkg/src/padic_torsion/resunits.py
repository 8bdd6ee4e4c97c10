"""The multiplicative group (O_K / p^n O_K)^* with generators, diagonal
relation orders, and discrete logarithms.

The split case short-circuits to two copies of (Z/p^n)^* with the classical
explicit structure.  The inert and ramified cases go through the finite-
local-ring filtration: a Teichmueller generator of order p^f - 1 plus
principal-unit generators 1 + pi^k at every level of the unit filtration,
whose p-th powers (peeled back through the filtration) give a relation
matrix of determinant p^(f(ne-1)); one Smith reduction diagonalizes it.
This stays correct in the cases where p-adic log/exp diverge (p = 2, and
p = 3 ramified).

Ramified digit extraction divides by the uniformizer, which costs one power
of p of coordinate precision per level; the dlog path therefore runs at
working precision p^(2n), where any lift of a residue has well-defined
filtration digits below level 2n.
"""

from __future__ import annotations

from .linalg import IntMatrix, smith_normal_form_with_inverse
from .numutil import crt2, factorize, primitive_root
from .quadfield import QuadField, QuadIdeal, RingElement, SplittingData, prime_splitting


class NotAUnit(ValueError):
    pass


from dataclasses import dataclass


@dataclass(frozen=True)
class LocalFactor:
    prime_ideal: QuadIdeal
    e: int
    f: int
    level: int  # exponent of the prime in the modulus: n * e


class ResidueUnitGroup:
    """(O_K/p^n)^* on explicit generators with diagonal relation orders."""

    def __init__(self, field, p, n, local_factors, generators, orders, dlog_raw):
        self.field: QuadField = field
        self.p: int = p
        self.modulus_level: int = n
        self.modulus: int = p**n
        self.local_factors: list[LocalFactor] = local_factors
        self.generators: list[RingElement] = generators
        self.orders: list[int] = orders
        self._dlog_raw = dlog_raw

    def order(self) -> int:
        t = 1
        for o in self.orders:
            t *= o
        return t


def theoretical_order(K: QuadField, p: int, n: int) -> int:
    """prod over p-places of (p^f - 1) * p^(f(ne-1))."""
    sp = prime_splitting(K, p)
    total = 1
    for _ in range(2 if sp.symbol == "split" else 1):
        total *= (p**sp.f - 1) * p ** (sp.f * (n * sp.e - 1))
    return total


def discrete_log(G: ResidueUnitGroup, x: RingElement) -> list[int]:
    """Exponent vector v with prod generators[i]^v[i] = x, entries reduced mod
    orders[i].  Raises NotAUnit when x is not invertible mod p^n."""
    if G.field.norm(x) % G.p == 0:
        raise NotAUnit(f"norm {G.field.norm(x)} is divisible by p={G.p}")
    return G._dlog_raw(G.field.reduce_mod(x, G.modulus))


def exponentiate(G: ResidueUnitGroup, v) -> RingElement:
    """prod generators[i]^v[i] mod p^n (the inverse of discrete_log)."""
    K = G.field
    acc = RingElement(1 % G.modulus, 0)
    for g, e, o in zip(G.generators, v, G.orders):
        e %= o
        if e:
            acc = K.reduce_mod(K.mul(acc, K.pow_mod(g, e, G.modulus)), G.modulus)
    return acc


def residue_unit_group(K: QuadField, p: int, n: int) -> ResidueUnitGroup:
    if n < 1:
        raise ValueError("level n must be >= 1")
    sp = prime_splitting(K, p)
    if sp.symbol == "split":
        return _split_group(K, p, n, sp)
    return _local_group(K, p, n, sp)


# ---------------------------------------------------------------------------
# split case: O/p^n = Z/p^n x Z/p^n
# ---------------------------------------------------------------------------


def _hensel_roots(K: QuadField, p: int, n: int) -> tuple[int, int]:
    """The two roots of x^2 - t x + m modulo p^n (p split)."""
    pn = p**n
    r = next(x for x in range(p) if (x * x - K.t * x + K.m) % p == 0)
    for _ in range(n):
        fr = (r * r - K.t * r + K.m) % pn
        dr = (2 * r - K.t) % pn
        r = (r - fr * pow(dr, -1, pn)) % pn
    return r, (K.t - r) % pn


def _dlog_prime_power_cyclic(mod: int, g: int, x: int, q: int, k: int) -> int:
    """dlog of x base g inside the cyclic subgroup of (Z/mod)^* of order q^k."""
    if k == 0:
        return 0
    e = 0
    ginv = pow(g, -1, mod)
    zeta = pow(g, q ** (k - 1), mod)  # order q
    ztable = {}
    acc = 1
    for j in range(q):
        ztable[acc] = j
        acc = acc * zeta % mod
    mu = x % mod
    for i in range(k):
        chi = pow(mu, q ** (k - 1 - i), mod)
        digit = ztable[chi]
        if digit:
            e += digit * q**i
            mu = mu * pow(ginv, digit * q**i, mod) % mod
    return e


def _zmod_structure(p: int, n: int):
    """Generators, orders, and a dlog routine for (Z/p^n)^*."""
    pn = p**n
    if p == 2:
        if n == 1:
            return [], [], lambda u: []
        if n == 2:
            return [3], [2], lambda u: [0 if u % 4 == 1 else 1]
        k2 = n - 2

        def dlog2(u):
            s = 0 if u % 4 == 1 else 1
            mu = (pn - u) % pn if s else u % pn
            return [s, _dlog_prime_power_cyclic(pn, 5, mu, 2, k2)]

        return [pn - 1, 5], [2, 1 << k2], dlog2

    g = primitive_root(p)
    if n > 1 and pow(g, p - 1, p * p) == 1:
        g += p
    o1, o2 = p - 1, p ** (n - 1)
    g1 = pow(g, o2, pn)
    g2 = pow(g, o1, pn)
    table1 = {}
    acc = 1
    for j in range(o1):
        table1[acc] = j
        acc = acc * g1 % pn

    def dlog(u):
        u %= pn
        a1 = table1[pow(u, o2, pn)]
        if n == 1:
            return [a1]
        a2 = _dlog_prime_power_cyclic(pn, g2, pow(u, o1, pn), p, n - 1)
        return [crt2(a1, o1, a2, o2)]

    return [g], [o1 * o2], dlog


def _split_group(K: QuadField, p: int, n: int, sp: SplittingData) -> ResidueUnitGroup:
    pn = p**n
    r1, r2 = _hensel_roots(K, p, n)
    dinv = pow((r1 - r2) % pn, -1, pn)

    def phi(z: RingElement) -> tuple[int, int]:
        return (z.x + z.y * r1) % pn, (z.x + z.y * r2) % pn

    def psi(u: int, v: int) -> RingElement:
        y = (u - v) * dinv % pn
        return RingElement((u - y * r1) % pn, y)

    cgens, corders, cdlog = _zmod_structure(p, n)
    gens = [psi(g % pn, 1) for g in cgens] + [psi(1, g % pn) for g in cgens]
    orders = corders + corders

    def dlog_raw(z: RingElement) -> list[int]:
        u, v = phi(z)
        return cdlog(u) + cdlog(v)

    lf = [
        LocalFactor(prime_ideal=sp.primes[0], e=1, f=1, level=n),
        LocalFactor(prime_ideal=sp.primes[1], e=1, f=1, level=n),
    ]
    return ResidueUnitGroup(K, p, n, lf, gens, orders, dlog_raw)


# ---------------------------------------------------------------------------
# inert and ramified: one local ring, filtration algorithm
# ---------------------------------------------------------------------------


def _local_group(K: QuadField, p: int, n: int, sp: SplittingData) -> ResidueUnitGroup:
    pn = p**n
    e, f = sp.e, sp.f
    ne = n * e
    teich_order = p**f - 1
    W = pn if e == 1 else pn * pn  # working precision for digit extraction

    if sp.symbol == "inert":

        def res(z: RingElement):
            return (z.x % p, z.y % p)

        def digit_at(z: RingElement, k: int):
            pk = p**k
            assert z.x % pk == 0 and z.y % pk == 0
            return ((z.x // pk) % p, (z.y // pk) % p)

        eta_elems = [
            (RingElement(1 + p**k, 0), RingElement(1, p**k)) for k in range(1, ne)
        ]
        basis_dim = 2
    else:
        d = K.d
        if K.omega_kind == "half":
            pi0 = RingElement(-1, 2)  # sqrt(d) = 2*omega - 1; p odd, p | d
            wres = (p + 1) // 2  # omega = 1/2 in the residue field
        elif p == 2 and d % 4 == 3:
            pi0 = RingElement(1, 1)  # 1 + sqrt(d)
            wres = 1
        else:
            pi0 = RingElement(0, 1)  # sqrt(d); p | d (covers p = 2, d = 2 mod 4)
            wres = 0
        npi = K.norm(pi0)
        assert npi % p == 0 and npi % (p * p) != 0
        u0inv = pow((npi // p) % W, -1, W)
        pi0_conj = K.conj(pi0)

        def res(z: RingElement):
            return ((z.x + z.y * wres) % p,)

        def div_pi(z: RingElement) -> RingElement:
            w = K.mul(z, pi0_conj)
            zx = w.x * u0inv % W
            zy = w.y * u0inv % W
            assert zx % p == 0 and zy % p == 0
            return RingElement(zx // p, zy // p)

        def digit_at(z: RingElement, k: int):
            for _ in range(k):
                z = div_pi(z)
            return res(z)

        eta_elems = []
        pw = RingElement(1, 0)
        for _k in range(1, ne):
            pw = K.reduce_mod(K.mul(pw, pi0), pn)
            eta_elems.append((RingElement(1 + pw.x, pw.y),))
        basis_dim = 1

    # Teichmueller generator: a lift of a residue-field generator, iterated
    # to the fixed point of x -> x^(p^f)
    tgens: list[RingElement] = []
    if teich_order > 1:
        z = RingElement(primitive_root(p), 0) if f == 1 else _fp2_generator(K, p)
        for _ in range(ne + 2):
            z2 = K.pow_mod(z, p**f, pn)
            if z2 == z:
                break
            z = z2
        assert K.pow_mod(z, p**f, pn) == z
        tgens = [z]

    flat_etas = [g for tup in eta_elems for g in tup]
    gens_all = tgens + flat_etas
    g_count = len(gens_all)
    eta_inv = [tuple(K.inv_mod(g, W) for g in tup) for tup in eta_elems]

    def dlog_filtration(z: RingElement) -> list[int]:
        """Exponents of a principal unit over the filtration generators."""
        vec = []
        for lev in range(1, ne):
            zz = RingElement((z.x - 1) % W, z.y % W)
            if zz.x or zz.y:
                digits = digit_at(zz, lev)
            else:
                digits = (0,) * basis_dim
            for i, c in enumerate(digits):
                vec.append(c)
                if c:
                    z = K.reduce_mod(K.mul(z, K.pow_mod(eta_inv[lev - 1][i], c, W)), W)
        assert (z.x - 1) % pn == 0 and z.y % pn == 0, "filtration peel did not reach 1"
        return vec

    ttable = {}
    if tgens:
        acc = RingElement(1, 0)
        for j in range(teich_order):
            ttable[res(acc)] = j
            acc = K.reduce_mod(K.mul(acc, tgens[0]), pn)
        tinv = K.inv_mod(tgens[0], W)

    def dlog_all(z: RingElement) -> list[int]:
        vec = []
        if tgens:
            a = ttable[res(z)]
            vec.append(a)
            if a:
                z = K.reduce_mod(K.mul(z, K.pow_mod(tinv, a, W)), W)
        return vec + dlog_filtration(z)

    rows = []
    if tgens:
        rows.append([teich_order] + [0] * (g_count - 1))
    toff = len(tgens)
    for idx, eta in enumerate(flat_etas):
        ep = K.pow_mod(eta, p, W)
        v = dlog_filtration(ep)
        row = [0] * g_count
        row[toff + idx] += p
        for j, c in enumerate(v):
            row[toff + j] -= c
        rows.append(row)

    d_diag, _, V, Vinv = smith_normal_form_with_inverse(IntMatrix.from_rows(rows))
    assert all(x > 0 for x in d_diag), "unit group presentation must be finite"

    # with U M V = D, the change of generators g'_j = prod_i g_i^(Vinv[j][i])
    # turns the relation lattice into the diagonal D, and exponent vectors
    # transform by v' = V^T v
    gens_final: list[RingElement] = []
    orders: list[int] = []
    keep: list[int] = []
    for j in range(g_count):
        if d_diag[j] > 1:
            acc = RingElement(1, 0)
            for i in range(g_count):
                eij = Vinv.data[j][i]
                if eij:
                    base = gens_all[i] if eij > 0 else K.inv_mod(gens_all[i], pn)
                    acc = K.reduce_mod(K.mul(acc, K.pow_mod(base, abs(eij), pn)), pn)
            gens_final.append(acc)
            orders.append(d_diag[j])
            keep.append(j)

    v_cols = V.data

    def dlog_raw(z: RingElement) -> list[int]:
        v = dlog_all(z)
        out = []
        for pos, j in enumerate(keep):
            out.append(sum(v_cols[i][j] * v[i] for i in range(g_count)) % orders[pos])
        return out

    lf = [LocalFactor(prime_ideal=sp.primes[0], e=e, f=f, level=ne)]
    G = ResidueUnitGroup(K, p, n, lf, gens_final, orders, dlog_raw)
    assert G.order() == theoretical_order(K, p, n), "unit group order formula violated"
    return G


def _fp2_generator(K: QuadField, p: int) -> RingElement:
    """A generator of F_{p^2}^* for inert p, as a ring element mod p."""
    q = p * p - 1
    fac = [l for l, _ in factorize(q)]
    one = RingElement(1, 0)
    for y in range(1, p):
        for x in range(p):
            z = RingElement(x, y)
            if K.norm(z) % p == 0:
                continue
            if all(K.pow_mod(z, q // l, p) != one for l in fac):
                return z
    raise RuntimeError("no generator found for F_p^2")
