"""Measurement of the tower's defect constants.

Every constant is computed from tower data, never assumed:

* a, b bound the drift of the relative different, |val(d_n) - n - b| <= a/p^n;
* c_norm is the norm-congruence floor min val(N(x)/x^deg - 1) over basis
  elements and seeded random units, cell by cell (n, k);
* m_c is the smallest m with p^m c_norm >= 1/(p-1);
* c_2 bounds the normalized-trace denominators from basis minima (the
  projectors are coordinate masks, so the honest minimum is 0);
* c_3 is the largest elementary divisor of 1 - g_n on the top perp lattices,
  computed by integer Smith reduction mod p^G;
* n_0 is the least shift making p^(n+n_0) O_{K_n} land in the kernel of d,
  reduced by the chain rule to a valuation minimum over monomials and
  spot-checked against the heavyweight route;
* n_1 = ceil(a - b + m_c + 2).

Randomness: each cell draws from its own generator seeded by
sha256(seed | tag | n | k), so reports are reproducible bit for bit and
adding cells never disturbs existing ones.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import InsufficientPrecision, ValuationOfZero
from .padic import vp
from .tower import CyclotomicTower
from .differentials import different, differential, level_transition_factor


def cell_rng(seed: int, tag: str, n: int, k: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}|{tag}|{n}|{k}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def norm_cells(tower: CyclotomicTower) -> List[Tuple[int, int]]:
    out = []
    for n in range(tower.max_level):
        for k in range(1, tower.max_level - n + 1):
            out.append((n, k))
    return out


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


# ---------------------------------------------------------------------------
# per-constant measurements
# ---------------------------------------------------------------------------


def different_drift(tower: CyclotomicTower) -> Tuple[Fraction, Fraction, tuple]:
    """(a, b, drifts): b is the asymptote of val(d_n) - n, a the exact bound
    on p^n |val(d_n) - n - b| over the tested levels."""
    drifts = tuple(
        different(tower, n, "K0").valuation - n for n in range(tower.max_level + 1)
    )
    b = drifts[-1]
    a = max(abs(d - b) * tower.p ** n for n, d in enumerate(drifts))
    return a, b, drifts


def norm_congruence_cell(
    tower: CyclotomicTower, n: int, k: int, seed: int, samples: int
) -> Fraction:
    """min val(N_{K_(n+k)/K_n}(x) / x^(p^k) - 1) over the rho-power basis of
    the top field and `samples` seeded random units."""
    m = n + k
    deg = tower.p ** k
    rng = cell_rng(seed, "fonemb", n, k)
    best: Optional[Fraction] = None

    def consider(x, val_x: Fraction):
        nonlocal best
        nx = tower.embed(tower.norm_down(x, n), m)
        diff = nx - tower.power(x, deg)
        if diff.is_all_bottom:
            return  # congruence exact to precision: no constraint
        v = tower.valuation(diff) - deg * val_x
        if best is None or v < best:
            best = v

    for i in range(tower.phi(m)):
        consider(tower.rho_power(m, i), Fraction(i, tower.phi(m)))
    for _ in range(samples):
        consider(tower.random_unit(m, rng), Fraction(0))
    if best is None:
        raise InsufficientPrecision(f"norm congruence invisible at cell ({n},{k})")
    return best


def trace_bound_cell(tower: CyclotomicTower, n: int, k: int) -> Fraction:
    """c_2(n, k) = max(0, -min val) of R_n and R_n_perp over the zeta basis
    of the top field; the projectors are masks, so this is exact."""
    m = n + k
    worst = Fraction(0)
    for j in range(tower.phi(m)):
        coeffs = [0] * tower.phi(m)
        coeffs[j] = 1
        x = tower.from_int_coeffs(m, coeffs)
        for image in (tower.normalized_trace(x, n), tower.perp_project(x, n)):
            if image.is_all_bottom:
                continue
            v = tower.valuation(image)
            if -v > worst:
                worst = -v
    return worst


def perp_basis_indices(tower: CyclotomicTower, m: int) -> List[int]:
    """zeta exponents spanning O_{K_m}^perp (the part new at level m)."""
    return [j for j in range(1, tower.phi(m)) if j % tower.p != 0]


def one_minus_galois_matrix(
    tower: CyclotomicTower, n: int, m: int
) -> Tuple[List[int], List[List[int]]]:
    """Integer columns of 1 - g_n on the perp basis of level m, where g_n
    generates the automorphisms fixing K_n.  The action permutes residue
    classes of exponents mod p, so the perp span is stable; folded entries
    landing outside it must cancel and are checked to."""
    indices = perp_basis_indices(tower, m)
    pos = {j: r for r, j in enumerate(indices)}
    g = tower.layer_generator(n, m)
    q = tower.q(m)
    phi = tower.phi(m)
    plan = tower._plan(m)
    cols = []
    for j in indices:
        dense = [0] * phi
        dense[j] = 1
        t = (g.unit * j) % q
        for slot, sign in plan[t]:
            dense[slot] -= sign
        col = [0] * len(indices)
        for slot, entry in enumerate(dense):
            if entry == 0:
                continue
            if slot not in pos:
                raise InsufficientPrecision(
                    f"perp span not stable at cell ({n},{m - n}): slot {slot}"
                )
            col[pos[slot]] = entry
        cols.append(col)
    return indices, cols


def int_smith_valuations(
    p: int, dim: int, columns: List[List[int]], modexp: int, where: str
) -> List[int]:
    """Elementary divisor valuations of an integer matrix over Z_p, working
    mod p^modexp.  Global-minimum pivoting keeps elimination integral; a rank
    shortfall inside the modulus window cannot be certified and raises."""
    mod = p ** modexp
    work = [[e % mod for e in col] for col in columns]
    used = set()
    divisors: List[int] = []
    while work:
        best = None  # (vp, row, colidx)
        for ci, col in enumerate(work):
            for r, entry in enumerate(col):
                if r in used or entry == 0:
                    continue
                v = 0
                e = entry
                while e % p == 0:
                    e //= p
                    v += 1
                if best is None or (v, r) < (best[0], best[1]):
                    best = (v, r, ci)
        if best is None:
            raise InsufficientPrecision(
                f"rank shortfall mod p^{modexp} in Smith reduction at {where}"
            )
        v, r, ci = best
        pivot = work.pop(ci)
        unit = pivot[r] // p ** v
        unit_inv = pow(unit, -1, mod)
        for other in work:
            if other[r] == 0:
                continue
            f = (other[r] // p ** v) * unit_inv % mod
            for i in range(dim):
                if pivot[i]:
                    other[i] = (other[i] - f * pivot[i]) % mod
        divisors.append(v)
        used.add(r)
    return divisors


def galois_defect_cell(tower: CyclotomicTower, n: int, k: int) -> int:
    """c_3(n, k): largest elementary divisor valuation of 1 - g_n on the
    perp lattice of level m = n + k."""
    m = n + k
    indices, cols = one_minus_galois_matrix(tower, n, m)
    modexp = min(tower.prec, 24)
    divs = int_smith_valuations(tower.p, len(indices), cols, modexp, f"cell ({n},{k})")
    return max(divs)


def kernel_shift(tower: CyclotomicTower) -> int:
    """n_0: least c >= 0 with p^(n+c) O_{K_n} inside the kernel of d at every
    higher level.  By the chain rule d(rho_0^j rho_n^i) picks up exactly
    p^(N-n) zeta^(...) du, so the condition reduces to
    c + val_p(i) + j/e_0 + (i-1)/e_n >= 0 over the monomial basis."""
    worst = Fraction(0)
    e0 = tower.phi(0)
    for n in range(tower.max_level + 1):
        e = tower.phi(n)
        for i in range(tower.degree(n)):
            base = Fraction(vp(i, tower.p)) if i else None
            if base is None:
                continue  # constants differentiate to zero
            for j in range(e0):
                v = base + Fraction(j, e0) + Fraction(i - 1, e)
                if v < worst:
                    worst = v
    # spot-check the chain-rule shortcut against the full route
    if tower.max_level >= 2:
        b = tower.mul(tower.embed(tower.rho_power(0, 1), 1), tower.uniformizer(1))
        om = differential(tower, tower.embed(b, 2), "K0")
        direct = tower.valuation(om.rep)
        fac = tower.valuation(level_transition_factor(tower, 1, 2))
        expected = Fraction(1, e0) + fac
        if direct != expected:
            raise InsufficientPrecision("chain-rule shortcut failed its spot check")
    return max(0, _ceil_frac(-worst))


# ---------------------------------------------------------------------------
# the report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsReport:
    p: int
    s: int
    max_level: int
    prec: int
    seed: int
    samples: int
    a: Fraction
    b: Fraction
    drifts: tuple
    c_norm: Fraction
    c_norm_cells: tuple  # ((n, k), Fraction)
    c_norm_witness: Fraction  # cell (0,1), basis element rho
    m_c: int
    c2_star: Fraction
    c2_cells: tuple
    c3_star: int
    c3_cells: tuple
    n_0: int
    n_1: int

    def nopdiv_bound(self) -> int:
        return self.n_0 + self.n_1 + _ceil_frac(self.c2_star)


def norm_witness_value(tower: CyclotomicTower) -> Fraction:
    """val(N(rho_1)/rho_1^p - 1) for the cell (0,1) basis witness."""
    x = tower.uniformizer(1)
    nx = tower.embed(tower.norm_down(x, 0), 1)
    diff = nx - tower.power(x, tower.p)
    return tower.valuation(diff) - Fraction(tower.p, tower.phi(1))


def estimate_constants(
    tower: CyclotomicTower, seed: int = 0, samples: int = 1000
) -> ConstantsReport:
    a, b, drifts = different_drift(tower)

    cells = norm_cells(tower)
    cn_cells = tuple(
        ((n, k), norm_congruence_cell(tower, n, k, seed, samples)) for n, k in cells
    )
    c_norm = min(v for _, v in cn_cells)
    witness = norm_witness_value(tower)

    target = Fraction(1, tower.p - 1)
    m_c = 0
    while tower.p ** m_c * c_norm < target:
        m_c += 1

    c2_cells = tuple(((n, k), trace_bound_cell(tower, n, k)) for n, k in cells)
    c2_star = max(v for _, v in c2_cells)

    c3_cells = tuple(((n, k), galois_defect_cell(tower, n, k)) for n, k in cells)
    c3_star = max(v for _, v in c3_cells)

    n_0 = kernel_shift(tower)
    n_1 = _ceil_frac(a - b + m_c + 2)

    return ConstantsReport(
        p=tower.p,
        s=tower.s,
        max_level=tower.max_level,
        prec=tower.prec,
        seed=seed,
        samples=samples,
        a=a,
        b=b,
        drifts=drifts,
        c_norm=c_norm,
        c_norm_cells=cn_cells,
        c_norm_witness=witness,
        m_c=m_c,
        c2_star=c2_star,
        c2_cells=c2_cells,
        c3_star=c3_star,
        c3_cells=c3_cells,
        n_0=n_0,
        n_1=n_1,
    )
