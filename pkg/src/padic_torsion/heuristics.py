"""Cohen-Lenstra quantities: the u-averages of the nontrivial-p-part
indicator, the adjusted p=3 average, the multiplicative weight w on prime
power ideals, and automorphism orders of finite abelian p-groups."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class SplittingProfile:
    """Residue degrees f_1..f_g of the p-places of the coefficient ring."""

    g: int
    f_list: tuple[int, ...]

    def __post_init__(self):
        if self.g < 1 or len(self.f_list) != self.g:
            raise ValueError("profile needs g >= 1 residue degrees")
        if any(f < 1 for f in self.f_list):
            raise ValueError("residue degrees must be >= 1")

    @classmethod
    def split_completely(cls, g: int) -> "SplittingProfile":
        return cls(g, (1,) * g)


@dataclass(frozen=True)
class PGroupShape:
    """The abelian p-group prod Z/p^(lambda_i) with lambda non-increasing."""

    p: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        ex = self.exponents
        if any(a < 1 for a in ex) or any(ex[i] < ex[i + 1] for i in range(len(ex) - 1)):
            raise ValueError("exponents must be a positive non-increasing partition")

    def order(self) -> int:
        return self.p ** sum(self.exponents)


def cl_average(
    p: int,
    profile: SplittingProfile | None = None,
    u: int = 0,
    tol: float = 1e-10,
) -> float:
    """u-average of the nontrivial-p-part indicator:
    1 - prod_i prod_{k>=1} (1 - p^(-(k+u) f_i)).

    Each infinite product is truncated at the deterministic index
    ceil(log tol / log p^-f) + 4, past which the remaining factors differ
    from 1 by less than tol; the absolute error is below tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if profile is None:
        profile = SplittingProfile(1, (1,))
    total = 1.0
    for f in profile.f_list:
        x = float(p) ** (-f)
        kmax = math.ceil(math.log(tol) / math.log(x)) + 4
        prod = 1.0
        for k in range(1, kmax + 1):
            prod *= 1.0 - x ** (k + u)
        total *= prod
    return 1.0 - total


def adjusted_average_p3(m20: float) -> float:
    """The corrected p=3 real-field average m20 * 7/8 + 1/8 (the d = 6 mod 9
    fields force nontrivial torsion and are 1/8 of the squarefree density)."""
    if not 0.0 <= m20 <= 1.0:
        raise ValueError("m20 must lie in [0, 1]")
    return m20 * 7.0 / 8.0 + 1.0 / 8.0


def w_ideal(p_power_factorization) -> Fraction:
    """Multiplicative weight w(a) = prod over prime powers q^alpha || a of
    (1/q^alpha) * prod_{k=1..alpha} (1 - q^-k)^(-1), in exact rationals."""
    total = Fraction(1)
    for q, alpha in p_power_factorization:
        if alpha < 1:
            raise ValueError("exponents must be >= 1")
        term = Fraction(1, q**alpha)
        for k in range(1, alpha + 1):
            term *= Fraction(q**k, q**k - 1)
        total *= term
    return total


def aut_order_abelian_p_group(shape: PGroupShape) -> int:
    """#Aut of prod Z/p^(lambda_i) by Hall's classical formula (in the
    Hillar-Rhea arrangement over non-decreasing exponents e_1 <= ... <= e_n):
    prod_k (p^d_k - p^(k-1)) * prod_j p^(e_j (n - d_j))
    * prod_i p^((e_i - 1)(n - c_i + 1)),
    where c_k, d_k bound the block of indices sharing e_k."""
    p = shape.p
    e = sorted(shape.exponents)
    n = len(e)
    if n == 0:
        return 1
    d = [max(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    c = [min(l for l in range(n) if e[l] == e[k]) + 1 for k in range(n)]
    out = 1
    for k in range(n):
        out *= p ** d[k] - p**k
    for j in range(n):
        out *= p ** (e[j] * (n - d[j]))
    for i in range(n):
        out *= p ** ((e[i] - 1) * (n - c[i] + 1))
    return out


def w_prime_power_from_shapes(q: int, alpha: int) -> Fraction:
    """w(q^alpha) summed from its definition: sum over partitions of alpha of
    1/#Aut of the corresponding abelian q-group.  Used as an oracle against
    w_ideal."""
    total = Fraction(0)
    for part in _partitions(alpha):
        total += Fraction(1, aut_order_abelian_p_group(PGroupShape(q, part)))
    return total


def _partitions(n: int, cap: int | None = None):
    if n == 0:
        yield ()
        return
    if cap is None or cap > n:
        cap = n
    for first in range(cap, 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest
