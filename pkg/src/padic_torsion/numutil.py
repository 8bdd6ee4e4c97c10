"""Small elementary number theory helpers shared across the package."""

from __future__ import annotations

import math

_PRIMES: list[int] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def primes_up_to(n: int) -> list[int]:
    """All primes <= n, from a growing cached sieve."""
    global _PRIMES
    if _PRIMES[-1] < n:
        limit = max(n, 2 * _PRIMES[-1])
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        for p in range(2, math.isqrt(limit) + 1):
            if sieve[p]:
                sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
        _PRIMES = [i for i in range(limit + 1) if sieve[i]]
    # bisect would do; list is short enough
    out = []
    for p in _PRIMES:
        if p > n:
            break
        out.append(p)
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in primes_up_to(math.isqrt(n)):
        if n % p == 0:
            return n == p
    return True


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division; n is small here (orders, p^f - 1)."""
    n = abs(n)
    out = []
    for p in primes_up_to(math.isqrt(n) + 1):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        while n % p == 0:
            n //= p
        p += 1
    return True


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def sqrt_mod_p(a: int, p: int) -> int | None:
    """A square root of a modulo prime p, or None.  p stays small here."""
    a %= p
    for x in range((p >> 1) + 1):
        if x * x % p == a:
            return x
    return None


def primitive_root(p: int) -> int:
    """Smallest primitive root modulo an odd prime p."""
    fac = [q for q, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in fac):
            return g
    raise ValueError(f"no primitive root mod {p}")


def crt2(r1: int, m1: int, r2: int, m2: int) -> int:
    """Solution mod m1*m2 of x = r1 (m1), x = r2 (m2) for coprime moduli."""
    g, inv = 0, pow(m1, -1, m2)
    x = r1 + m1 * ((r2 - r1) * inv % m2)
    return x % (m1 * m2)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n)."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    # strip twos from n
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    if t:
        if a % 2 == 0:
            return 0
        if t % 2 and a % 8 in (3, 5):
            sign = -sign
    a %= n
    # Jacobi on odd n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0
