"""Kaehler differentials of the tower rings and the lattice toolkit.

For x in O_{K_n} the module of differentials relative to a base (O_{K_0} or
Z_p) is cyclic: Omega = O_{K_n}/d_n * d(rho_n), where d_n is the different
ideal.  Everything here is phrased through that presentation:

* `differential(x)` produces the class u'(rho) d(rho) from the coefficient
  expansion of x over the chosen base;
* `different` returns the generator g'(rho_n) of the different together with
  its exact valuation (n over K_0, n + s - 1/(p-1) over Q_p);
* lattices live in one fixed coordinate system, the Z_p-basis
  rho_0^j * rho_n^i of O_{K_n} (j < phi(0), i < p^n), where the kernel of d
  and the layered sums sum_m p^m O_{K_m} can be compared head to head.

`LatticeBasis` implements valuation-greedy column reduction over Z_p; because
Z_p is a DVR, picking the globally minimal-valuation pivot keeps every
elimination factor integral, and the same pivoting rule read off during full
elimination yields the elementary divisors (Smith form over a DVR).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import DomainError, ValuationOfZero
from .padic import PadicScalar, vp
from .tower import CyclotomicTower, RhoExpansion, TowerElement

BASES = ("K0", "Qp")


def _check_base(base: str):
    if base not in BASES:
        raise DomainError(f"base must be one of {BASES}, got {base!r}")


def _ceil_div(num: int, den: int) -> int:
    return -((-num) // den)


# ---------------------------------------------------------------------------
# differential classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DifferentData:
    level: int
    base: str
    generator: TowerElement
    valuation: Fraction


@dataclass(frozen=True)
class OmegaClass:
    """A class in Omega = O_{K_level}/(p-part of the different) * d(rho).

    `rep` is the coefficient of d(rho_level); two classes agree when the
    difference of reps has valuation >= modulus_val.
    """

    level: int
    base: str
    rep: TowerElement
    modulus_val: Fraction

    def same_class(self, other: "OmegaClass") -> bool:
        if (self.level, self.base) != (other.level, other.base):
            raise DomainError("classes live in different modules")
        diff = self.rep - other.rep
        try:
            return self.rep.tower.valuation(diff) >= self.modulus_val
        except ValuationOfZero:
            return True

    def is_zero(self) -> bool:
        try:
            return self.rep.tower.valuation(self.rep) >= self.modulus_val
        except ValuationOfZero:
            return True


def different(tower: CyclotomicTower, level: int, base: str = "K0") -> DifferentData:
    _check_base(base)
    if base == "K0":
        gen = tower.minpoly_derivative_at_rho(level)
        expected = Fraction(level)
    else:
        coeffs = tower.minimal_polynomial_qp(level)
        # derivative coefficients (k+1) c_(k+1), Horner at rho
        acc = tower.zero(level)
        for k in range(len(coeffs) - 1, 0, -1):
            acc = tower.mul_rho(acc) + tower.constant(level, k * coeffs[k])
        gen = acc
        expected = Fraction(level + tower.s) - Fraction(1, tower.p - 1)
    got = tower.valuation(gen)
    if got != expected:
        raise DomainError(
            f"different generator valuation {got} != expected {expected}"
        )
    return DifferentData(level, base, gen, got)


def modulus_valuation(tower: CyclotomicTower, level: int, base: str) -> Fraction:
    _check_base(base)
    if base == "K0":
        return Fraction(level)
    return Fraction(level + tower.s) - Fraction(1, tower.p - 1)


def differential(
    tower: CyclotomicTower, x: TowerElement, base: str = "K0", level: Optional[int] = None
) -> OmegaClass:
    """The class of dx in Omega^1 of O_{K_level} over the base ring."""
    _check_base(base)
    level = x.level if level is None else level
    if level < x.level:
        raise DomainError("differential level below the element's level")
    x = tower.embed(x, level)
    try:
        if tower.valuation(x) < 0:
            raise DomainError("differential is defined on integral elements")
    except ValuationOfZero:
        pass
    if base == "K0":
        coeffs = tower.to_rho_basis(x).coeffs
        acc = tower.zero(level)
        for i in range(len(coeffs) - 1, 0, -1):
            acc = tower.mul_rho(acc) + tower.embed(coeffs[i] * i, level)
    else:
        coords = tower.rho_power_coords(x)
        acc = tower.zero(level)
        for k in range(len(coords) - 1, 0, -1):
            acc = tower.mul_rho(acc) + tower.constant(level, coords[k] * k)
    return OmegaClass(level, base, acc, modulus_valuation(tower, level, base))


def level_transition_factor(tower: CyclotomicTower, n: int, m: int) -> TowerElement:
    """d(rho_n) = factor * d(rho_m) inside level m: p^(m-n) zeta_m^(p^(m-n)-1)."""
    if not 0 <= n <= m <= tower.max_level:
        raise DomainError("need 0 <= n <= m <= max_level")
    step = tower.p ** (m - n)
    coeffs = [0] * tower.phi(m)
    coeffs[step - 1] = step
    return tower.from_int_coeffs(m, coeffs)


@dataclass(frozen=True)
class BaseChangeReport:
    omega_qp: OmegaClass
    omega_k0: OmegaClass
    compatible: bool
    kernel_exponent: int


def base_change_compare(tower: CyclotomicTower, x: TowerElement) -> BaseChangeReport:
    """dx over Q_p maps onto dx over K_0 under the canonical surjection;
    checks the two coefficient routes agree modulo the K_0 modulus and
    reports the p-exponent killing the kernel of the surjection."""
    a = differential(tower, x, base="Qp")
    b = differential(tower, x, base="K0")
    pushed = OmegaClass(b.level, "K0", a.rep, b.modulus_val)
    r_val = different(tower, 0, "Qp").valuation
    r = _ceil_div(r_val.numerator, r_val.denominator)
    return BaseChangeReport(a, b, pushed.same_class(b), r)


# ---------------------------------------------------------------------------
# the shared coordinate system
# ---------------------------------------------------------------------------


def mixed_coords(tower: CyclotomicTower, x: TowerElement) -> List[PadicScalar]:
    """Z_p coordinates of x in the basis rho_0^j rho_n^i of K_n,
    index order i * phi(0) + j."""
    out: List[PadicScalar] = []
    for c in tower.to_rho_basis(x).coeffs:
        out.extend(tower.rho_power_coords(c))
    return out


def coords_to_element(tower: CyclotomicTower, level: int, vec) -> TowerElement:
    d0 = tower.phi(0)
    d = tower.degree(level)
    if len(vec) != d0 * d:
        raise DomainError(f"need {d0 * d} coordinates, got {len(vec)}")
    coeffs = []
    for i in range(d):
        c = tower.zero(0)
        for j in range(d0):
            c = c + tower.rho_power(0, j) * vec[i * d0 + j]
        coeffs.append(c)
    return tower.from_rho_basis(RhoExpansion(level, tuple(coeffs)))


def mixed_basis_elements(tower: CyclotomicTower, level: int) -> List[TowerElement]:
    d0 = tower.phi(0)
    out = []
    for i in range(tower.degree(level)):
        ri = tower.rho_power(level, i)
        for j in range(d0):
            out.append(tower.mul(tower.embed(tower.rho_power(0, j), level), ri))
    return out


# ---------------------------------------------------------------------------
# lattices over Z_p
# ---------------------------------------------------------------------------


class LatticeBasis:
    """Column span over Z_p of a set of coordinate vectors, held in
    valuation-greedy echelon form (pivot rows distinct, each pivot row
    eliminated from all later columns)."""

    def __init__(self, p: int, dim: int, columns, pivots):
        self.p = p
        self.dim = dim
        self.columns = columns
        self.pivots = pivots  # list of (row, val) aligned with columns

    @classmethod
    def from_generators(cls, p: int, dim: int, generators) -> "LatticeBasis":
        remaining = [list(col) for col in generators]
        for col in remaining:
            if len(col) != dim:
                raise DomainError("generator has wrong dimension")
        reduced, pivots = [], []
        used = set()
        while True:
            best = None
            for ci, col in enumerate(remaining):
                for r, entry in enumerate(col):
                    if r in used or entry.is_bottom:
                        continue
                    key = (entry.val, r)
                    if best is None or key < best[0]:
                        best = (key, ci)
            if best is None:
                break
            (v, r), ci = best
            col = remaining.pop(ci)
            scale = col[r].invert().shift(v)  # pivot becomes exactly p^v
            col = [c * scale for c in col]
            pinv = col[r].invert()
            for other in remaining:
                if not other[r].is_bottom:
                    f = other[r] * pinv
                    for i in range(dim):
                        other[i] = other[i] - f * col[i]
            reduced.append(col)
            pivots.append((r, v))
            used.add(r)
        return cls(p, dim, reduced, pivots)

    @property
    def rank(self) -> int:
        return len(self.columns)

    def solve(self, vector, integral: bool = True):
        """Coefficients c with sum c_k * column_k = vector, or None.  With
        integral=True the coefficients must lie in Z_p."""
        if len(vector) != self.dim:
            raise DomainError("vector has wrong dimension")
        res = list(vector)
        coeffs = []
        for col, (r, v) in zip(self.columns, self.pivots):
            entry = res[r]
            if entry.is_bottom:
                coeffs.append(entry)  # zero coefficient at its precision
                continue
            if integral and entry.val < v:
                return None
            f = entry * col[r].invert()
            coeffs.append(f)
            res = [res[i] - f * col[i] for i in range(self.dim)]
        if all(c.is_bottom for c in res):
            return coeffs
        return None

    def contains(self, vector) -> bool:
        return self.solve(vector, integral=True) is not None


def elementary_divisor_valuations(p: int, dim: int, columns) -> List[int]:
    """Valuations of the Smith normal form diagonal over Z_p, ascending.

    Global-minimum pivoting makes every elimination factor integral; after a
    column sweep the pivot row is zero elsewhere, so the implicit row sweep
    touches only the pivot column and the divisors pop out one per round.
    """
    work = [list(col) for col in columns]
    for col in work:
        if len(col) != dim:
            raise DomainError("column has wrong dimension")
    used = set()
    divisors: List[int] = []
    while True:
        best = None
        for ci, col in enumerate(work):
            for r, entry in enumerate(col):
                if r in used or entry.is_bottom:
                    continue
                key = (entry.val, r)
                if best is None or key < best[0]:
                    best = (key, ci)
        if best is None:
            break
        (v, r), ci = best
        pivot = work.pop(ci)
        pinv = pivot[r].invert()
        for other in work:
            if not other[r].is_bottom:
                f = other[r] * pinv
                for i in range(dim):
                    other[i] = other[i] - f * pivot[i]
        divisors.append(v)
        used.add(r)
    return divisors


def commensurability_check(
    p: int, dim: int, cols_a, cols_b
) -> Tuple[int, int]:
    """(c_plus, c_minus) with p^c_plus * L_A <= L_B and p^c_minus * L_B <= L_A,
    read off the Smith form of the two transition matrices."""
    la = LatticeBasis.from_generators(p, dim, cols_a)
    lb = LatticeBasis.from_generators(p, dim, cols_b)

    def one_way(src: LatticeBasis, dst: LatticeBasis) -> int:
        trans = []
        for col in src.columns:
            sol = dst.solve(col, integral=False)
            if sol is None:
                raise DomainError("lattices do not span the same Q_p space")
            trans.append(sol)
        divs = elementary_divisor_valuations(p, dst.rank, trans)
        if not divs:
            return 0
        return max(0, -min(divs))

    return one_way(la, lb), one_way(lb, la)


# ---------------------------------------------------------------------------
# kernel and layered-sum lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelLattice:
    """ker(d) on O_{K_level} relative to the base, a monomial lattice:
    base K0:  +_i  rho_0^(exps[i]) O_{K_0} rho_n^i      (exps in rho_0 units)
    base Qp:  +_k  p^(exps[k]) Z_p rho_n^k               (exps in p units)
    """

    level: int
    base: str
    exps: tuple

    def as_ideal_exponents(self):
        return self.exps


def kernel_lattice(tower: CyclotomicTower, level: int, base: str = "K0") -> KernelLattice:
    _check_base(base)
    tower._check_level(level)
    e0 = tower.phi(0)
    e = tower.phi(level)
    if base == "K0":
        exps = [0]
        for i in range(1, tower.degree(level)):
            # val(c_i) >= level - val_p(i) - (i-1)/e, in rho_0 steps of 1/e0
            bound = Fraction(level - vp(i, tower.p)) - Fraction(i - 1, e)
            exps.append(max(0, _ceil_div((bound * e0).numerator, (bound * e0).denominator)))
    else:
        mod = modulus_valuation(tower, level, "Qp")
        exps = [0]
        for k in range(1, e):
            bound = mod - Fraction(vp(k, tower.p)) - Fraction(k - 1, e)
            exps.append(max(0, _ceil_div(bound.numerator, bound.denominator)))
    return KernelLattice(level, base, tuple(exps))


def kernel_contains(tower: CyclotomicTower, ker: KernelLattice, x: TowerElement) -> bool:
    if x.level != ker.level:
        raise DomainError("element level does not match the kernel lattice")
    e0 = tower.phi(0)
    if ker.base == "K0":
        for i, c in enumerate(tower.to_rho_basis(x).coeffs):
            if c.is_all_bottom:
                continue
            if tower.valuation(c) < Fraction(ker.exps[i], e0):
                return False
        return True
    for k, c in enumerate(tower.rho_power_coords(x)):
        if c.is_bottom:
            continue
        if c.val < ker.exps[k]:
            return False
    return True


def kernel_mixed_columns(tower: CyclotomicTower, ker: KernelLattice):
    """Generators of the kernel lattice in the shared mixed coordinates."""
    d0 = tower.phi(0)
    d = tower.degree(ker.level)
    dim = d0 * d
    cols = []
    if ker.base == "K0":
        for i in range(d):
            r = ker.exps[i]
            for j in range(d0):
                a = max(0, _ceil_div(r - j, d0))
                col = [PadicScalar.bottom(tower.p, tower.prec) for _ in range(dim)]
                col[i * d0 + j] = PadicScalar.raw(tower.p, a, 1, tower.prec + a)
                cols.append(col)
        return cols
    for k in range(tower.phi(ker.level)):
        vec = mixed_coords(tower, tower.rho_power(ker.level, k))
        cols.append([c.shift(ker.exps[k]) for c in vec])
    return cols


def layer_sum_columns(tower: CyclotomicTower, n: int):
    """Generators of sum_{m<=n} p^m O_{K_m} in level-n mixed coordinates."""
    tower._check_level(n)
    cols = []
    for m in range(n + 1):
        for b in mixed_basis_elements(tower, m):
            emb = tower.embed(b, n)
            cols.append(mixed_coords(tower, tower.scale_p(emb, m)))
    return cols


def random_kernel_element(tower: CyclotomicTower, level: int, rng, base: str = "K0") -> TowerElement:
    """Random Z_p-combination of the kernel lattice generators."""
    ker = kernel_lattice(tower, level, base)
    d0 = tower.phi(0)
    acc = tower.zero(level)
    if ker.base == "K0":
        for i in range(tower.degree(level)):
            r = ker.exps[i]
            for j in range(d0):
                a = max(0, _ceil_div(r - j, d0))
                c = rng.randrange(tower.p ** (tower.prec - a))
                term = tower.embed(tower.rho_power(0, j), level) * (c * tower.p ** a)
                acc = acc + tower.mul(term, tower.rho_power(level, i))
        return acc
    for k in range(tower.phi(level)):
        c = rng.randrange(tower.p ** (tower.prec - ker.exps[k]))
        acc = acc + tower.rho_power(level, k) * (c * tower.p ** ker.exps[k])
    return acc


# ---------------------------------------------------------------------------
# divisibility of differentials
# ---------------------------------------------------------------------------


def divisibility_exponent(
    tower: CyclotomicTower, x: TowerElement, m: int, i_cap: Optional[int] = None
) -> Optional[int]:
    """Largest i >= 0 with dx in p^i d(O_{K_m}) inside Omega of level
    max(m, level(x)) over K_0; -1 when even i = 0 fails, None when dx is the
    zero class (every i works).

    For m >= level(x) the test is coefficientwise: the slot constraint from
    p^i d(O_{K_m}) + p^m O is val(c_k) >= i exactly on the slots with
    val(k c_k rho^(k-1)) < m.  For m < level(x) it is lattice membership
    x in p^i O_{K_m} + ker(d).
    """
    tower._check_level(m)
    lev = x.level
    if m >= lev:
        coeffs = tower.to_rho_basis(tower.embed(x, m)).coeffs
        best = None
        for k in range(1, len(coeffs)):
            c = coeffs[k]
            if c.is_all_bottom:
                continue
            vc = tower.valuation(c)
            if Fraction(vp(k, tower.p)) + vc >= m:
                continue
            cand = vc.numerator // vc.denominator  # floor
            if best is None or cand < best:
                best = cand
        return best
    ker_cols = kernel_mixed_columns(tower, kernel_lattice(tower, lev, "K0"))
    base_cols = [
        mixed_coords(tower, tower.embed(b, lev)) for b in mixed_basis_elements(tower, m)
    ]
    xvec = mixed_coords(tower, x)
    dim = len(xvec)
    cap = (m + 8) if i_cap is None else i_cap
    last_ok = -1
    for i in range(cap + 1):
        cols = [[e.shift(i) for e in col] for col in base_cols] + ker_cols
        lat = LatticeBasis.from_generators(tower.p, dim, cols)
        if not lat.contains(xvec):
            return last_ok
        last_ok = i
    return None  # stable through the cap: treat as unbounded


# ---------------------------------------------------------------------------
# flat decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatDecomposition:
    """x = sum of parts + tail with parts[k-1] at level n-k+1 divisible by
    p^(n-k+1-n1) and the tail integral at level n1."""

    n1: int
    parts: tuple  # TowerElements, parts[k-1] at level n-k+1
    tail: TowerElement
    margins: tuple  # val(part) - required valuation, one per part, Fraction


def flat_decompose(tower: CyclotomicTower, x: TowerElement, n1: int) -> FlatDecomposition:
    n = x.level
    if n <= n1:
        raise DomainError(f"need level(x) > n1, got level {n} and n1 {n1}")
    ker = kernel_lattice(tower, n, "K0")
    if not kernel_contains(tower, ker, x):
        raise DomainError("decomposition needs dx = 0 (x in the kernel lattice)")
    xc = tower.to_rho_basis(x).coeffs
    p = tower.p
    parts = []
    margins = []
    for k in range(1, n - n1 + 1):
        lev = n - k + 1
        y = tower.zero(lev)
        for j in range(1, p ** lev):
            if j % p == 0:
                continue
            c = xc[p ** (k - 1) * j]
            if c.is_all_bottom:
                continue
            y = y + tower.mul(tower.embed(c, lev), tower.rho_power(lev, j))
        for ell in range(p ** (lev - 1)):
            c = xc[p ** k * ell]
            if c.is_all_bottom:
                continue
            bridge = tower.rho_power(lev, p * ell) - tower.embed(
                tower.rho_power(lev - 1, ell), lev
            )
            y = y + tower.mul(tower.embed(c, lev), bridge)
        parts.append(y)
        need = Fraction(lev - n1)
        try:
            margins.append(tower.valuation(y) - need)
        except ValuationOfZero:
            margins.append(Fraction(tower.prec) - need)  # zero part: huge margin
    tail = tower.zero(n1)
    for ell in range(p ** n1):
        c = xc[p ** (n - n1) * ell]
        if c.is_all_bottom:
            continue
        tail = tail + tower.mul(tower.embed(c, n1), tower.rho_power(n1, ell))
    total = tower.embed(tail, n)
    for y in parts:
        total = total + tower.embed(y, n)
    if not (total - x).is_all_bottom:
        raise DomainError("internal error: decomposition failed to telescope")
    return FlatDecomposition(n1, tuple(parts), tail, tuple(margins))
