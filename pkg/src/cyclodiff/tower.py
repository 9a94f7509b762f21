"""Arithmetic in a fixed cyclotomic tower over Q_p.

The tower is K_0 c K_1 c ... c K_L with K_n = Q_p(zeta_n) for zeta_n a
primitive p^(n+s)-th root of unity, s = 1 for odd p and s = 2 for p = 2
(so K_0 = Q_p(zeta_p), resp. Q_2(i), and each step has degree p).

Elements of K_n are stored by their coordinates in the power basis
1, zeta, ..., zeta^(phi-1) of the ring of integers, phi = phi(p^(n+s)) =
(p-1) p^(n+s-1), with `PadicScalar` coordinates.  Reduction uses the single
cyclotomic relation zeta^phi = -(1 + zeta^h + ... + zeta^((p-2)h)),
h = p^(n+s-1), so products of basis monomials fold back in one step with
coefficients +-1.

The distinguished uniformizer chain is rho_n = zeta_n - 1 for odd p and
rho_n = 1 - zeta_n for p = 2; both satisfy N_{K_(n+1)/K_n}(rho_(n+1)) = rho_n
exactly (the sign flip at p = 2 is what keeps the chain norm compatible).
val is normalized so val(p) = 1, hence val(rho_n) = 1/phi.

Valuations are exact, not estimated: the transform from zeta-coordinates to
the rho-power basis over Q_p is unipotent-triangular (a Pascal matrix), and
the rho-power basis splits valuations because k/phi are pairwise distinct
mod 1 for 0 <= k < phi.  Multiplication packs coordinates into one big
integer product (Kronecker substitution), which keeps level-4 products at
p = 3 comfortably sub-millisecond.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DivisionByZeroPadic, DomainError, ValuationOfZero
from .padic import PadicScalar, vp


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class TowerParams:
    p: int
    s: int
    max_level: int
    prec: int = 60

    def __post_init__(self):
        if not _is_prime(self.p):
            raise DomainError(f"p = {self.p} is not prime")
        want_s = 2 if self.p == 2 else 1
        if self.s != want_s:
            raise DomainError(f"p = {self.p} requires s = {want_s}, got {self.s}")
        if self.max_level < 1:
            raise DomainError("max_level must be >= 1")
        if self.prec < 4:
            raise DomainError("prec must be >= 4")
        top_degree = (self.p - 1) * self.p ** (self.max_level + self.s - 1)
        if top_degree > 4096:
            raise DomainError(f"top field degree {top_degree} exceeds the 4096 cap")


@dataclass(frozen=True)
class GaloisElement:
    """The automorphism zeta -> zeta^unit of K_level, unit coprime to p.

    ``exponent`` records t when the element was built as the t-th power of
    the distinguished layer-0 generator sigma_(1+p^s); the character map is
    then just ``exponent``.
    """

    level: int
    unit: int
    modulus: int
    exponent: Optional[int] = None

    def compose(self, other: "GaloisElement") -> "GaloisElement":
        if self.level != other.level:
            raise DomainError("automorphisms of different levels")
        expo = None
        if self.exponent is not None and other.exponent is not None:
            expo = self.exponent + other.exponent
        return GaloisElement(
            self.level, (self.unit * other.unit) % self.modulus, self.modulus, expo
        )

    def inverse(self) -> "GaloisElement":
        expo = -self.exponent if self.exponent is not None else None
        return GaloisElement(
            self.level, pow(self.unit, -1, self.modulus), self.modulus, expo
        )


class TowerElement:
    __slots__ = ("tower", "level", "coeffs")

    def __init__(self, tower: "CyclotomicTower", level: int, coeffs):
        self.tower = tower
        self.level = level
        self.coeffs = tuple(coeffs)
        if len(self.coeffs) != tower.phi(level):
            raise DomainError(
                f"level {level} needs {tower.phi(level)} coordinates, got {len(self.coeffs)}"
            )

    # coordinate-level helpers ------------------------------------------

    @property
    def is_all_bottom(self) -> bool:
        return all(c.is_bottom for c in self.coeffs)

    @property
    def cap(self) -> int:
        """Absolute precision floor across the coordinates."""
        return min(c.prec for c in self.coeffs)

    def support(self):
        return [j for j, c in enumerate(self.coeffs) if not c.is_bottom]

    # ring ops go through the tower so caches are shared ------------------

    def __add__(self, other):
        return self.tower.add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.tower, self.level, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self.tower.add(self, self.tower.coerce_neg(other, self.level))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        return self.tower.mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return self.tower.power(self, n)

    def __eq__(self, other):
        if isinstance(other, (int, PadicScalar)):
            other = self.tower.constant(self.level, other)
        if not isinstance(other, TowerElement):
            return NotImplemented
        return (self - other).is_all_bottom

    __hash__ = None

    def valuation(self) -> Fraction:
        return self.tower.valuation(self)

    def __str__(self):
        parts = []
        for j, c in enumerate(self.coeffs):
            if c.is_bottom:
                continue
            parts.append(f"({c})*z^{j}" if j else f"({c})")
        body = " + ".join(parts) if parts else f"O(level {self.level} zero)"
        return f"K[{self.level}]: {body}"

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"level": self.level, "coeffs": [c.to_json() for c in self.coeffs]}


@dataclass(frozen=True)
class RhoExpansion:
    """x = sum_i coeffs[i] * rho_level^i with level-0 coefficients."""

    level: int
    coeffs: tuple


class CyclotomicTower:
    def __init__(self, params: TowerParams):
        self.params = params
        self.p = params.p
        self.s = params.s
        self.max_level = params.max_level
        self.prec = params.prec
        self._plans = {}
        self._pascal = [[1]]
        self._pascal_mod = {}
        self._dual_basis = {}
        self._minpoly = {}

    # -- static shape -----------------------------------------------------

    def _check_level(self, level: int):
        if not 0 <= level <= self.max_level:
            raise DomainError(f"level {level} outside tower (max {self.max_level})")

    def q(self, level: int) -> int:
        return self.p ** (level + self.s)

    def h(self, level: int) -> int:
        return self.p ** (level + self.s - 1)

    def phi(self, level: int) -> int:
        return (self.p - 1) * self.h(level)

    def ramification(self, level: int) -> int:
        """e(K_level / Q_p); equal to the degree since the tower is totally
        ramified."""
        return self.phi(level)

    def degree(self, level: int, base: int = 0) -> int:
        return self.p ** (level - base)

    def description(self) -> dict:
        return {
            "p": self.p,
            "s": self.s,
            "max_level": self.max_level,
            "prec": self.prec,
            "top_degree": self.phi(self.max_level),
        }

    # -- caches ------------------------------------------------------------

    def _plan(self, level: int):
        """plan[t] for 0 <= t < 2q: list of (slot, sign) rewriting zeta^t in
        the power basis."""
        plan = self._plans.get(level)
        if plan is None:
            q, h, phi = self.q(level), self.h(level), self.phi(level)
            plan = []
            for t in range(2 * q):
                tm = t % q
                if tm < phi:
                    plan.append(((tm, 1),))
                else:
                    r = tm - phi
                    plan.append(tuple((r + i * h, -1) for i in range(self.p - 1)))
            self._plans[level] = plan
        return plan

    def _binomial_row(self, n: int):
        while len(self._pascal) <= n:
            prev = self._pascal[-1]
            self._pascal.append(
                [1] + [prev[i] + prev[i + 1] for i in range(len(prev) - 1)] + [1]
            )
        return self._pascal[n]

    def _binomial_rows_mod(self, count: int, modulus: int):
        """First `count` Pascal rows reduced mod `modulus` (cached); keeps the
        valuation inner loop on machine-size ints."""
        rows = self._pascal_mod.get(modulus)
        if rows is None or len(rows) < count:
            self._binomial_row(count - 1)
            rows = [[v % modulus for v in row] for row in self._pascal[:count]]
            self._pascal_mod[modulus] = rows
        return rows

    # -- constructors --------------------------------------------------------

    def zero(self, level: int, prec: Optional[int] = None) -> TowerElement:
        self._check_level(level)
        prec = self.prec if prec is None else prec
        bot = PadicScalar.bottom(self.p, prec)
        return TowerElement(self, level, [bot] * self.phi(level))

    def one(self, level: int, prec: Optional[int] = None) -> TowerElement:
        return self.constant(level, 1, prec)

    def constant(self, level: int, value, prec: Optional[int] = None) -> TowerElement:
        self._check_level(level)
        prec = self.prec if prec is None else prec
        if isinstance(value, PadicScalar):
            if value.p != self.p:
                raise DomainError("scalar prime differs from tower prime")
            c0 = value
            prec = value.prec
        else:
            c0 = PadicScalar.from_fraction(self.p, value, prec)
        bot = PadicScalar.bottom(self.p, prec)
        coeffs = [c0] + [bot] * (self.phi(level) - 1)
        return TowerElement(self, level, coeffs)

    def zeta(self, level: int, exponent: int = 1, prec: Optional[int] = None) -> TowerElement:
        self._check_level(level)
        prec = self.prec if prec is None else prec
        phi = self.phi(level)
        bot = PadicScalar.bottom(self.p, prec)
        coeffs = [bot] * phi
        acc = {}
        for slot, sign in self._plan(level)[exponent % self.q(level)]:
            acc[slot] = acc.get(slot, 0) + sign
        for slot, c in acc.items():
            coeffs[slot] = PadicScalar.from_int(self.p, c, prec)
        return TowerElement(self, level, coeffs)

    def from_int_coeffs(self, level: int, ints, prec: Optional[int] = None) -> TowerElement:
        self._check_level(level)
        prec = self.prec if prec is None else prec
        phi = self.phi(level)
        ints = list(ints)
        if len(ints) > phi:
            raise DomainError("too many coordinates")
        ints += [0] * (phi - len(ints))
        return TowerElement(
            self, level, [PadicScalar.from_int(self.p, n, prec) for n in ints]
        )

    def uniformizer(self, level: int, prec: Optional[int] = None) -> TowerElement:
        """rho_level: zeta - 1 for odd p, 1 - zeta for p = 2 (the sign that
        makes the norm chain exact)."""
        self._check_level(level)
        prec = self.prec if prec is None else prec
        if self.p == 2:
            return self.from_int_coeffs(level, [1, -1], prec)
        return self.from_int_coeffs(level, [-1, 1], prec)

    def rho_power(self, level: int, k: int, prec: Optional[int] = None) -> TowerElement:
        """rho_level^k for 0 <= k < phi, straight from the binomial row (no
        reduction happens below exponent phi)."""
        self._check_level(level)
        prec = self.prec if prec is None else prec
        phi = self.phi(level)
        if not 0 <= k < phi:
            raise DomainError(f"rho_power wants 0 <= k < {phi}, got {k}")
        row = self._binomial_row(k)
        # odd p: (zeta-1)^k; p=2: (1-zeta)^k. Both have C(k,j) up to sign.
        coeffs = []
        for j in range(phi):
            if j > k:
                coeffs.append(0)
            elif self.p == 2:
                coeffs.append(row[j] if j % 2 == 0 else -row[j])
            else:
                coeffs.append(row[j] if (k - j) % 2 == 0 else -row[j])
        return self.from_int_coeffs(level, coeffs, prec)

    def element_from_json(self, obj: dict) -> TowerElement:
        level = obj["level"]
        self._check_level(level)
        coeffs = [PadicScalar.from_json(c) for c in obj["coeffs"]]
        return TowerElement(self, level, coeffs)

    # -- addition ------------------------------------------------------------

    def coerce(self, x, level: int) -> TowerElement:
        if isinstance(x, TowerElement):
            return x
        return self.constant(level, x)

    def coerce_neg(self, x, level: int):
        if isinstance(x, TowerElement):
            return -x
        if isinstance(x, PadicScalar):
            return self.constant(level, -x)
        return self.constant(level, -x)

    def _align(self, x: TowerElement, y: TowerElement):
        if x.level == y.level:
            return x, y
        if x.level < y.level:
            return self.embed(x, y.level), y
        return x, self.embed(y, x.level)

    def add(self, x: TowerElement, y) -> TowerElement:
        y = self.coerce(y, x.level)
        x, y = self._align(x, y)
        return TowerElement(
            self, x.level, [a + b for a, b in zip(x.coeffs, y.coeffs)]
        )

    # -- multiplication (Kronecker substitution) -------------------------------

    @staticmethod
    def _pack_profile(x: TowerElement):
        """(shift, digits): every coordinate is p^shift * (rep + O(p^digits))."""
        shift = None
        cap = None
        for c in x.coeffs:
            v = c.prec if c.is_bottom else c.val
            shift = v if shift is None else min(shift, v)
            cap = c.prec if cap is None else min(cap, c.prec)
        return shift, cap - shift

    def mul(self, x: TowerElement, y) -> TowerElement:
        if isinstance(y, (int, PadicScalar)):
            return TowerElement(self, x.level, [c * y for c in x.coeffs])
        if not isinstance(y, TowerElement):
            return NotImplemented
        x, y = self._align(x, y)
        p, level = self.p, x.level
        phi = self.phi(level)
        sx, dx = self._pack_profile(x)
        sy, dy = self._pack_profile(y)
        if dx <= 0 or dy <= 0 or x.is_all_bottom or y.is_all_bottom:
            # Nothing usable survives a product; only the cap is known.
            prec = min(sx + dx + sy, sy + dy + sx)
            return self.zero(level, prec)
        digits = min(dx, dy)
        width = (phi * (p ** dx - 1) * (p ** dy - 1)).bit_length()
        width = ((width + 7) // 8) * 8
        w = width // 8
        bx = b"".join(c.rep_mod(dx, sx).to_bytes(w, "little") for c in x.coeffs)
        by = b"".join(c.rep_mod(dy, sy).to_bytes(w, "little") for c in y.coeffs)
        z = int.from_bytes(bx, "little") * int.from_bytes(by, "little")
        nslots = 2 * phi - 1
        zb = z.to_bytes(nslots * w, "little")
        plan = self._plan(level)
        acc = [0] * phi
        for t in range(nslots):
            zt = int.from_bytes(zb[t * w : (t + 1) * w], "little")
            if zt == 0:
                continue
            for slot, sign in plan[t]:
                acc[slot] += zt if sign > 0 else -zt
        val0 = sx + sy
        prec = val0 + digits
        coeffs = [PadicScalar.raw(p, val0, a, prec) for a in acc]
        return TowerElement(self, level, coeffs)

    def power(self, x: TowerElement, n: int) -> TowerElement:
        if n < 0:
            return self.power(self.invert(x), -n)
        if n == 0:
            return self.one(x.level, x.cap)
        out = None
        acc = x
        while n:
            if n & 1:
                out = acc if out is None else self.mul(out, acc)
            n >>= 1
            if n:
                acc = self.mul(acc, acc)
        return out

    # -- sparse shortcuts -------------------------------------------------------

    def mul_zeta(self, x: TowerElement) -> TowerElement:
        """x * zeta in O(phi) scalar operations."""
        phi, h = self.phi(x.level), self.h(x.level)
        wrap = x.coeffs[phi - 1]
        out = [None] * phi
        out[0] = -wrap
        for j in range(1, phi):
            out[j] = x.coeffs[j - 1]
        # zeta^phi = -(1 + zeta^h + ... + zeta^((p-2)h)); the slot-0 term is
        # already in out[0].
        for i in range(1, self.p - 1):
            out[i * h] = out[i * h] - wrap
        return TowerElement(self, x.level, out)

    def mul_rho(self, x: TowerElement) -> TowerElement:
        xz = self.mul_zeta(x)
        if self.p == 2:
            return self.add(x, -xz)
        return self.add(xz, -x)

    # -- moving between levels ----------------------------------------------------

    def embed(self, x: TowerElement, level: int) -> TowerElement:
        self._check_level(level)
        if x.level == level:
            return x
        if x.level > level:
            raise DomainError("use restrict to go down the tower")
        step = self.p ** (level - x.level)
        phi_hi = self.phi(level)
        bot = PadicScalar.bottom(self.p, x.cap)
        coeffs = [bot] * phi_hi
        for j, c in enumerate(x.coeffs):
            coeffs[j * step] = c
        return TowerElement(self, level, coeffs)

    def restrict(self, x: TowerElement, level: int) -> TowerElement:
        """Inverse of embed; requires the off-pattern coordinates to vanish
        at working precision."""
        self._check_level(level)
        if x.level == level:
            return x
        if x.level < level:
            raise DomainError("use embed to go up the tower")
        step = self.p ** (x.level - level)
        for j, c in enumerate(x.coeffs):
            if j % step and not c.is_bottom:
                raise DomainError(
                    f"coordinate {j} is nonzero; element not in level {level}"
                )
        coeffs = [x.coeffs[j * step] for j in range(self.phi(level))]
        return TowerElement(self, level, coeffs)

    # -- Galois ---------------------------------------------------------------------

    def galois_by_unit(self, level: int, unit: int, exponent: Optional[int] = None) -> GaloisElement:
        self._check_level(level)
        q = self.q(level)
        unit %= q
        if unit % self.p == 0:
            raise DomainError("unit must be coprime to p")
        return GaloisElement(level, unit, q, exponent)

    def galois(self, level: int, t: int) -> GaloisElement:
        """t-th power of the distinguished generator sigma_(1+p^s) of
        Gal(K_level / K_0)."""
        g0 = 1 + self.p ** self.s
        return self.galois_by_unit(level, pow(g0, t, self.q(level)), exponent=t)

    def layer_generator(self, k: int, level: int) -> GaloisElement:
        """g_k = g_0^(p^k), the canonical generator of Gal(K_level / K_k)."""
        return self.galois(level, self.p ** k)

    def character(self, g: GaloisElement) -> int:
        if g.exponent is None:
            raise DomainError("element was not built as a power of the generator")
        return g.exponent

    def galois_apply(self, g: GaloisElement, x: TowerElement) -> TowerElement:
        if g.level != x.level:
            raise DomainError("automorphism level does not match element level")
        q = self.q(x.level)
        phi = self.phi(x.level)
        plan = self._plan(x.level)
        out = [None] * phi
        for j, c in enumerate(x.coeffs):
            if c.is_bottom:
                continue  # covered by the bottom(cap) default below
            t = (g.unit * j) % q
            for slot, sign in plan[t]:
                term = c if sign > 0 else -c
                out[slot] = term if out[slot] is None else out[slot] + term
        bot = PadicScalar.bottom(self.p, x.cap)
        return TowerElement(self, x.level, [bot if c is None else c for c in out])

    def relative_galois(self, level: int):
        """The p automorphisms of K_level fixing K_(level-1)."""
        if level < 1:
            raise DomainError("level 0 has no relative layer")
        h = self.h(level)
        return [self.galois_by_unit(level, 1 + c * h) for c in range(self.p)]

    def trace_down(self, x: TowerElement, level: int) -> TowerElement:
        """Tr_{K_m/K_level}(x) by honest conjugate sums, one layer at a time."""
        self._check_level(level)
        if level > x.level:
            raise DomainError("trace target above element level")
        while x.level > level:
            acc = None
            for g in self.relative_galois(x.level):
                y = self.galois_apply(g, x)
                acc = y if acc is None else self.add(acc, y)
            x = self.restrict(acc, x.level - 1)
        return x

    def norm_down(self, x: TowerElement, level: int) -> TowerElement:
        self._check_level(level)
        if level > x.level:
            raise DomainError("norm target above element level")
        while x.level > level:
            acc = None
            for g in self.relative_galois(x.level):
                y = self.galois_apply(g, x)
                acc = y if acc is None else self.mul(acc, y)
            x = self.restrict(acc, x.level - 1)
        return x

    # -- normalized trace and perp projections ------------------------------------

    def normalized_trace(self, x: TowerElement, level: int) -> TowerElement:
        """R_level(x) = p^-(m-level) Tr_{K_m/K_level}(x).

        In zeta-coordinates this is exactly the mask keeping exponents
        divisible by p^(m-level); the denominator p^(m-level) never appears,
        which is what makes the perp decomposition below exact.
        """
        self._check_level(level)
        if level >= x.level:
            return self.embed(x, level) if x.level < level else x
        delta = x.level - level
        step = self.p ** delta
        coeffs = [
            c if j % step == 0 else PadicScalar.bottom(self.p, c.prec)
            for j, c in enumerate(x.coeffs)
        ]
        return self.restrict(TowerElement(self, x.level, coeffs), level)

    def perp_project(self, x: TowerElement, level: int) -> TowerElement:
        """R_level - R_(level-1) for level >= 1; R_0 itself for level 0.
        Result lives at `level`."""
        self._check_level(level)
        if level == 0:
            return self.normalized_trace(x, 0)
        if level > x.level:
            x = self.embed(x, level)
        delta = x.level - level
        step = self.p ** delta
        keep = []
        for j, c in enumerate(x.coeffs):
            ok = j != 0 and j % step == 0 and (j // step) % self.p != 0
            keep.append(c if ok else PadicScalar.bottom(self.p, c.prec))
        return self.restrict(TowerElement(self, x.level, keep), level)

    # -- exact valuation ------------------------------------------------------------

    def rho_power_coords(self, x: TowerElement):
        """Q_p coordinates of x in the basis 1, rho, ..., rho^(phi-1).

        zeta = 1 + rho (odd p) or 1 - rho (p = 2), so this is the Pascal
        transform c_k = (+-1)^k sum_j C(j,k) a_j of the zeta-coordinates.
        """
        phi = self.phi(x.level)
        sx, dx = self._pack_profile(x)
        if dx <= 0 or x.is_all_bottom:
            return [PadicScalar.bottom(self.p, sx + max(dx, 0)) for _ in range(phi)]
        mod = self.p ** dx
        reps = [c.rep_mod(dx, sx) for c in x.coeffs]
        rows = [self._binomial_row(j) for j in range(phi)]
        out = []
        for k in range(phi):
            t = 0
            for j in range(k, phi):
                r = reps[j]
                if r:
                    t += rows[j][k] * r
            if self.p == 2 and k % 2 == 1:
                t = -t
            out.append(PadicScalar.raw(self.p, sx, t % mod, sx + dx))
        return out

    def valuation(self, x: TowerElement) -> Fraction:
        """Exact valuation with val(p) = 1; raises ValuationOfZero when the
        element is indistinguishable from zero at its precision.

        Works through the rho-power coordinates c_k: because the fractional
        parts k/e are pairwise distinct, val(x) = min_k (val_p(c_k) + k/e)
        with a unique minimizer.  The transform runs in widening digit
        windows (8, 16, ...) so typical elements never touch full precision.
        """
        e = self.ramification(x.level)
        phi = self.phi(x.level)
        sx, dx = self._pack_profile(x)
        if dx <= 0 or x.is_all_bottom:
            raise ValuationOfZero("element is zero at working precision")
        windows = sorted({min(8, dx), min(16, dx), min(32, dx), dx})
        for win in windows:
            mod = self.p ** win
            reps = [c.rep_mod(win, sx) for c in x.coeffs]
            rows = self._binomial_rows_mod(phi, mod)
            best = None  # val_p(c_k) * e + k, an integer
            for k in range(phi):
                if best is not None and k > best:
                    break
                total = 0
                for j in range(k, phi):
                    r = reps[j]
                    if r:
                        total += rows[j][k] * r
                total %= mod
                if total:
                    cand = vp(total, self.p) * e + k
                    if best is None or cand < best:
                        best = cand
            if best is not None and best < win * e:
                # any coordinate hidden below p^win would score >= win*e
                return Fraction(sx * e + best, e)
        raise ValuationOfZero("element is zero at working precision")

    # -- minimal polynomials and the rho expansion ------------------------------------

    def minimal_polynomial(self, level: int):
        """Monic minimal polynomial of rho_level over K_0, as a tuple of
        level-0 coefficient elements (constant first, leading 1 last).

        Closed form: (1+X)^(p^n) - 1 - rho_0 for odd p and
        (1-X)^(2^n) - 1 + rho_0 for p = 2 (n >= 1); both are Eisenstein over
        O_{K_0} with constant term of valuation 1/e_0 exactly.
        """
        self._check_level(level)
        got = self._minpoly.get(level)
        if got is not None:
            return got
        rho0 = self.uniformizer(0)
        if level == 0:
            out = (-rho0, self.one(0))
            self._minpoly[0] = out
            return out
        d = self.degree(level)
        row = self._binomial_row(d)
        coeffs = []
        for k in range(d + 1):
            c = row[k]
            if self.p == 2 and k % 2 == 1:
                c = -c
            if k == 0:
                c -= 1  # the constant 1 cancels
                base = self.constant(0, c)
                base = self.add(base, rho0 if self.p == 2 else -rho0)
                coeffs.append(base)
            else:
                coeffs.append(self.constant(0, c))
        out = tuple(coeffs)
        self._minpoly[level] = out
        return out

    def minimal_polynomial_qp(self, level: int):
        """Integer coefficients of the monic minimal polynomial of rho_level
        over Q_p: Phi_q(1+X) for odd p, Phi_q(1-X) for p = 2."""
        self._check_level(level)
        p, h, phi = self.p, self.h(level), self.phi(level)
        coeffs = [0] * (phi + 1)
        for i in range(p):
            row = self._binomial_row(i * h)
            for k in range(i * h + 1):
                coeffs[k] += row[k]
        if p == 2:
            for k in range(1, phi + 1, 2):
                coeffs[k] = -coeffs[k]
        return coeffs

    def minpoly_eval_at_rho(self, level: int) -> TowerElement:
        """g(rho_level) with g the certified minimal polynomial; for tests.
        Should be indistinguishable from zero."""
        g = self.minimal_polynomial(level)
        acc = self.embed(g[-1], level)
        for i in range(len(g) - 2, -1, -1):
            acc = self.add(self.mul_rho(acc), self.embed(g[i], level))
        return acc

    def minpoly_derivative_at_rho(self, level: int, prec: Optional[int] = None) -> TowerElement:
        """g'(rho_level) in closed form: +-p^n zeta^(p^n - 1)."""
        d = self.degree(level)
        phi = self.phi(level)
        coeffs = [0] * phi
        coeffs[d - 1] = -d if self.p == 2 else d
        return self.from_int_coeffs(level, coeffs, prec)

    def _dual_data(self, level: int):
        """Cached trace-dual basis b_i = q_i / g'(rho) for the rho-power basis
        over K_0 (q_i the Horner quotients of g by X - rho)."""
        got = self._dual_basis.get(level)
        if got is not None:
            return got
        d = self.degree(level)
        g = self.minimal_polynomial(level)
        quots = [None] * d
        quots[d - 1] = self.one(level)
        for i in range(d - 1, 0, -1):
            quots[i - 1] = self.add(self.mul_rho(quots[i]), self.embed(g[i], level))
        # extra headroom so dividing by p^level costs no working digits
        gp = self.minpoly_derivative_at_rho(level, self.prec + level)
        gp_inv = self.invert(gp)
        duals = tuple(self.mul(qi, gp_inv) for qi in quots)
        self._dual_basis[level] = duals
        return duals

    def to_rho_basis(self, x: TowerElement) -> RhoExpansion:
        """Expansion x = sum_i c_i rho^i with c_i in K_0, via the trace-dual
        basis (c_i = Tr_{K_n/K_0}(x b_i), and the trace is p^n R_0)."""
        level = x.level
        if level == 0:
            return RhoExpansion(0, (x,))
        duals = self._dual_data(level)
        scale = self.p ** level
        coeffs = []
        for b in duals:
            prod = self.mul(x, b)
            coeffs.append(self.normalized_trace(prod, 0) * scale)
        return RhoExpansion(level, tuple(coeffs))

    def from_rho_basis(self, expansion: RhoExpansion) -> TowerElement:
        level = expansion.level
        self._check_level(level)
        d = self.degree(level)
        if len(expansion.coeffs) != d:
            raise DomainError(f"need {d} coefficients, got {len(expansion.coeffs)}")
        acc = self.embed(expansion.coeffs[d - 1], level)
        for i in range(d - 2, -1, -1):
            acc = self.add(self.mul_rho(acc), self.embed(expansion.coeffs[i], level))
        return acc

    # -- inversion -----------------------------------------------------------------------

    def scale_p(self, x: TowerElement, k: int) -> TowerElement:
        """Multiply by the exact power p**k (coordinate shifts, no rounding)."""
        return TowerElement(self, x.level, [c.shift(k) for c in x.coeffs])

    def invert(self, x: TowerElement) -> TowerElement:
        """x^-1 via the exact factorization x = p^a rho^r u: strip the p and
        rho parts (rho^(e-r) brings the valuation to an integer), then Newton
        iteration for the unit u."""
        try:
            t = self.valuation(x)
        except ValuationOfZero:
            raise DivisionByZeroPadic("cannot invert zero at working precision")
        e = self.ramification(x.level)
        big_t = t * e
        r = int(big_t) % e
        a = (int(big_t) - r) // e
        if r == 0:
            z_inv = self._invert_unit(self.scale_p(x, -a))
            return self.scale_p(z_inv, -a)
        _, dx = self._pack_profile(x)
        shift = self.rho_power(x.level, e - r, dx + 2)
        z = self.scale_p(self.mul(x, shift), -(a + 1))
        z_inv = self._invert_unit(z)
        return self.scale_p(self.mul(z_inv, shift), -(a + 1))

    def _invert_unit(self, z: TowerElement) -> TowerElement:
        """Newton iteration y <- y(2 - zy) from the residue inverse; z must be
        a unit (valuation 0)."""
        p = self.p
        res = 0
        for c in z.coeffs:
            if not c.is_bottom:
                if c.val < 0:
                    raise DomainError("unit inversion got a non-integral element")
                res += c.rep_mod(1)
        res %= p
        if res == 0:
            raise DomainError("unit inversion got an element of positive valuation")
        cap = z.cap
        y = self.constant(z.level, pow(res, -1, p), cap)
        e = self.ramification(z.level)
        max_iter = max(2, (cap * e).bit_length() + 2)
        one = self.one(z.level, cap)
        for _ in range(max_iter):
            err = self.add(one, -self.mul(z, y))
            if err.is_all_bottom:
                break
            y = self.add(y, self.mul(y, err))
        return y

    # -- randomness ---------------------------------------------------------------------

    def random_integral(self, level: int, rng, prec: Optional[int] = None) -> TowerElement:
        self._check_level(level)
        prec = self.prec if prec is None else prec
        m = self.p ** prec
        return self.from_int_coeffs(
            level, [rng.randrange(m) for _ in range(self.phi(level))], prec
        )

    def random_unit(self, level: int, rng, prec: Optional[int] = None) -> TowerElement:
        x = self.random_integral(level, rng, prec)
        res = sum(c.rep_mod(1) for c in x.coeffs if not c.is_bottom) % self.p
        if res == 0:
            one = self.one(level, x.cap)
            x = self.add(x, one)
        return x
