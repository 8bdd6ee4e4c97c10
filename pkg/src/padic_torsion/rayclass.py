"""p-parts of ray class groups mod p^n, their stabilization in n, Leopoldt
certification, and extraction of the Z_p-torsion invariant factors.

A_n is assembled from the exact sequence
    1 -> (O/p^n)^* / im(units) -> Cl_{p^n} -> Cl -> 1:
generators are the residue unit generators followed by the class group
generator ideals; relations are (i) the diagonal residue orders, (ii) the
discrete logs of the global unit generators, and (iii) each class group
relation with the discrete log of its principal witness carried along with
negative sign in the residue block.

Stabilization is detected on consecutive levels by the invariant-factor
pattern split [b..., a...] with min v_p(a) > max v_p(b) + 1 (strict) and
f_{n+1} = [b..., p*a...], at a level whose kernel has order exactly
p^(r2+1); the b-part is the torsion.  Checking starts at n = s + 2 where
s = v_p(e) for the ramification index e of p.
"""

from __future__ import annotations

from dataclasses import dataclass

from .linalg import (
    AbelianPresentation,
    IntMatrix,
    InvariantFactors,
    invariant_factors,
    p_part,
)
from .numutil import v_p
from .quadfield import (
    ClassGroupData,
    QuadField,
    RingElement,
    class_group,
    fundamental_unit_mod,
    torsion_units,
)
from .resunits import ResidueUnitGroup, discrete_log, residue_unit_group


class NonDivisible(RuntimeError):
    """#A_n does not divide #A_{n+1}: an upstream bug, never expected."""


class InvariantViolation(RuntimeError):
    """A theorem-backed invariant failed; indicates an internal bug."""


class NoStabilization(RuntimeError):
    """n_max reached without a stabilization match."""

    def __init__(self, message, trace=None, kernel_orders=None):
        super().__init__(message)
        self.trace = trace or []
        self.kernel_orders = kernel_orders or []


@dataclass(frozen=True)
class RayClassLevel:
    n: int
    full_invariants: InvariantFactors
    p_invariants: InvariantFactors
    order_p_part: int


@dataclass
class TorsionReport:
    field: QuadField
    p: int
    start_level: int
    stabilization_level: int
    leopoldt_certified: bool
    leopoldt_level: int | None
    kernel_orders: list[int]
    torsion: InvariantFactors
    trace: list[RayClassLevel]


def ray_class_p_part(K: QuadField, p: int, n: int) -> RayClassLevel:
    """Invariant factors of Cl_{p^n}(K) and of its p-part A_n."""
    cg = class_group(K, p)
    G = residue_unit_group(K, p, n)
    return _assemble_level(K, p, n, cg, G)


def _assemble_level(
    K: QuadField, p: int, n: int, cg: ClassGroupData, G: ResidueUnitGroup
) -> RayClassLevel:
    k = len(G.orders)
    m = cg.presentation.num_generators
    pn = p**n
    rows: list[list[int]] = []
    for i, o in enumerate(G.orders):
        r = [0] * (k + m)
        r[i] = o
        rows.append(r)
    units = list(torsion_units(K))
    if K.d > 0:
        units.append(fundamental_unit_mod(K, p, n))
    for u in units:
        rows.append(discrete_log(G, u) + [0] * m)
    for row, wit in zip(cg.presentation.relations.data, cg.principal_witnesses):
        vn = discrete_log(G, K.reduce_mod(wit.num, pn))
        if wit.den % pn != 1:
            vd = discrete_log(G, RingElement(wit.den % pn, 0))
            vn = [(a - b) % o for a, b, o in zip(vn, vd, G.orders)]
        rows.append([-x for x in vn] + list(row))
    pres = AbelianPresentation(
        k + m, IntMatrix.from_rows(rows) if rows else IntMatrix.zero(0, k + m)
    )
    fi = invariant_factors(pres)
    pp = p_part(fi, p)
    return RayClassLevel(n=n, full_invariants=fi, p_invariants=pp, order_p_part=pp.order())


def kernel_order(level_n: RayClassLevel, level_n1: RayClassLevel) -> int:
    """#Y_n = #A_{n+1} / #A_n for consecutive levels."""
    q, r = divmod(level_n1.order_p_part, level_n.order_p_part)
    if r:
        raise NonDivisible(
            f"#A_{level_n1.n} = {level_n1.order_p_part} not divisible by "
            f"#A_{level_n.n} = {level_n.order_p_part}"
        )
    return q


def match_stabilization_pattern(f_n, f_n1, p: int, r: int):
    """The invariant-factor stabilization test on consecutive p-parts.

    Returns the b-part [b_1..b_t] iff f_n splits as [b..., a...] with exactly
    r trailing a-entries, min v_p(a) > max v_p(b) + 1 strictly (vacuous when
    b is empty), and f_n1 equals [b..., p*a...] elementwise; otherwise None.
    """
    fn = list(f_n)
    fn1 = list(f_n1)
    if len(fn) < r or len(fn1) != len(fn):
        return None
    b, a = fn[: len(fn) - r], fn[len(fn) - r :]
    if b and not v_p(a[0], p) > v_p(b[-1], p) + 1:
        return None
    if fn1 != b + [p * x for x in a]:
        return None
    return b


def start_level(K: QuadField, p: int) -> int:
    """n = s + 2 with s = v_p(e); for quadratic fields s = 1 iff p = 2 | D."""
    s = 1 if (p == 2 and K.disc % 2 == 0) else 0
    return s + 2


def torsion_structure(K: QuadField, p: int, n_max: int = 30) -> TorsionReport:
    """Run the stabilization loop and extract the torsion invariant factors.

    Levels n = s+2, s+3, ... are computed until a pattern match coincides
    with kernel order p^(r2+1); raises NoStabilization at n_max (per the
    theory this cannot happen for abelian fields unless something is wrong,
    since Leopoldt's conjecture holds for them).
    """
    start = start_level(K, p)
    r = K.r2 + 1
    target = p**r
    cg = class_group(K, p)
    trace: list[RayClassLevel] = []
    kernel_orders: list[int] = []
    leopoldt_level: int | None = None
    if n_max >= start:
        trace.append(_assemble_level(K, p, start, cg, residue_unit_group(K, p, start)))
    for n in range(start, n_max):
        nxt = _assemble_level(K, p, n + 1, cg, residue_unit_group(K, p, n + 1))
        q = kernel_order(trace[-1], nxt)
        trace.append(nxt)
        if kernel_orders and q > kernel_orders[-1]:
            raise InvariantViolation(
                f"kernel order increased from {kernel_orders[-1]} to {q} at n={n}"
            )
        kernel_orders.append(q)
        if leopoldt_level is None and q == target:
            leopoldt_level = n
        b = match_stabilization_pattern(
            trace[-2].p_invariants, trace[-1].p_invariants, p, r
        )
        if b is not None and q == target:
            return TorsionReport(
                field=K,
                p=p,
                start_level=start,
                stabilization_level=n,
                leopoldt_certified=True,
                leopoldt_level=leopoldt_level,
                kernel_orders=kernel_orders,
                torsion=InvariantFactors.of(b),
                trace=trace,
            )
    raise NoStabilization(
        f"no stabilization for d={K.d}, p={p} up to n_max={n_max}",
        trace=trace,
        kernel_orders=kernel_orders,
    )
