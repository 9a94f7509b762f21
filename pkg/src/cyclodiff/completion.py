"""Series decompositions along the perp projectors and the w2 gauge.

Every x in K_N splits exactly as a sum of its perp components: the n-th
component R_n_perp(x) keeps the zeta-coordinate slots whose index has p-adic
valuation exactly N - n (the trace-zero part new at level n), and the n = 0
component is the normalized trace to the bottom field.  The splitting is a
finite, exact analogue of the series expansions used for the completed tower:

* `w2_valuation` is the gauge floor(min_n (val(R_n_perp x) - n));
* `layered_sum_membership` decides x in sum_n p^(n-c) O_{K_n} componentwise,
  which is exact because R_n_perp maps each O_{K_m} into integers and kills
  the levels below n;
* `flatness_test` measures val((g_k - 1) x) - k for the layer generators g_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import DomainError, ValuationOfZero
from .tower import CyclotomicTower, TowerElement


@dataclass(frozen=True)
class PerpSeries:
    """Exact perp decomposition: components[n] lives at level n and
    sum_n embed(components[n], level) reconstructs the element."""

    level: int
    components: tuple

    def _tower(self) -> CyclotomicTower:
        return self.components[0].tower

    def decay_margin(self) -> Optional[Fraction]:
        """min_n (val(components[n]) - n); None for the zero series."""
        tower = self._tower()
        best: Optional[Fraction] = None
        for n, comp in enumerate(self.components):
            try:
                v = tower.valuation(comp) - n
            except ValuationOfZero:
                continue
            if best is None or v < best:
                best = v
        return best

    def certify_perpendicular(self) -> bool:
        """Each nonzero term n >= 1 must vanish under the trace to the level
        below; term 0 must sit at level 0."""
        tower = self._tower()
        for n, comp in enumerate(self.components):
            if comp.level != n:
                return False
            if n >= 1 and not comp.is_all_bottom:
                if not tower.normalized_trace(comp, n - 1).is_all_bottom:
                    return False
        return True

    def to_json(self) -> dict:
        margin = self.decay_margin()
        return {
            "level": self.level,
            "terms": [
                {"n": n, "coeffs": comp.to_json()["coeffs"]}
                for n, comp in enumerate(self.components)
            ],
            "decay_margin": None if margin is None else str(margin),
            "perp_certified": self.certify_perpendicular(),
        }


def perp_series_from_json(tower: CyclotomicTower, obj: dict) -> PerpSeries:
    comps = []
    for term in obj["terms"]:
        comps.append(tower.element_from_json({"level": term["n"], "coeffs": term["coeffs"]}))
    for n, comp in enumerate(comps):
        if comp.level != n:
            raise DomainError("series terms must be indexed consecutively from 0")
    return PerpSeries(obj["level"], tuple(comps))


def perp_series_decompose(tower: CyclotomicTower, x: TowerElement) -> PerpSeries:
    comps = tuple(tower.perp_project(x, n) for n in range(x.level + 1))
    return PerpSeries(x.level, comps)


def series_reconstruct(tower: CyclotomicTower, series: PerpSeries) -> TowerElement:
    acc = tower.zero(series.level)
    for comp in series.components:
        acc = acc + tower.embed(comp, series.level)
    return acc


def series_invert(tower: CyclotomicTower, series: PerpSeries) -> PerpSeries:
    """Components of the multiplicative inverse of the represented element."""
    inv = tower.invert(series_reconstruct(tower, series))
    return perp_series_decompose(tower, inv)


def component_valuations(
    tower: CyclotomicTower, x: TowerElement
) -> List[Optional[Fraction]]:
    """val(R_n_perp x) for n = 0..level; None where the component vanishes
    to working precision."""
    vals: List[Optional[Fraction]] = []
    for n in range(x.level + 1):
        comp = tower.perp_project(x, n)
        try:
            vals.append(tower.valuation(comp))
        except ValuationOfZero:
            vals.append(None)
    return vals


def w2_valuation(tower: CyclotomicTower, x: TowerElement) -> int:
    """floor(min_n (val(R_n_perp x) - n)); raises ValuationOfZero when every
    component vanishes to precision."""
    best: Optional[Fraction] = None
    for n, v in enumerate(component_valuations(tower, x)):
        if v is None:
            continue
        shifted = v - n
        if best is None or shifted < best:
            best = shifted
    if best is None:
        raise ValuationOfZero("all perp components vanish to working precision")
    return math.floor(best)


@dataclass(frozen=True)
class MembershipVerdict:
    member_strict: bool  # passes with no slack
    member: bool  # passes at the requested slack
    slack: int  # the slack the test was run at
    slack_needed: int  # smallest c >= 0 at which the test passes
    failing_level: Optional[int]  # first violating level at the given slack
    margins: tuple  # val(R_n_perp x) - n per level, None = no constraint
    terms: tuple  # extracted y_n = p^(-n) R_n_perp(x), one per level


def layered_sum_membership(
    tower: CyclotomicTower, x: TowerElement, slack: int = 0
) -> MembershipVerdict:
    """Decides x in sum_{n<=level} p^(n-slack) O_{K_n}.

    Membership is equivalent to val(R_n_perp x) >= n - slack for every n:
    the projectors map the candidate sum into exactly those bounds, and the
    extracted terms y_n = p^(-n) R_n_perp(x) exhibit the decomposition
    x = sum_n p^n y_n whenever they are integral.  Both the strict and the
    slack verdicts are reported.
    """
    if slack < 0:
        raise DomainError("slack must be >= 0")
    margins: List[Optional[Fraction]] = []
    terms = []
    failing = None
    strict_ok = True
    worst: Optional[Fraction] = None
    for n in range(x.level + 1):
        comp = tower.perp_project(x, n)
        terms.append(tower.scale_p(comp, -n))
        try:
            v = tower.valuation(comp)
        except ValuationOfZero:
            margins.append(None)
            continue
        margin = v - n
        margins.append(margin)
        if worst is None or margin < worst:
            worst = margin
        if margin < 0:
            strict_ok = False
        if failing is None and margin < -slack:
            failing = n
    if worst is None or worst >= 0:
        needed = 0
    else:
        needed = math.ceil(-worst)
    return MembershipVerdict(
        strict_ok, failing is None, slack, needed, failing, tuple(margins), tuple(terms)
    )


@dataclass(frozen=True)
class FlatnessReport:
    level: int
    margins: tuple  # (k, val((g_k - 1) x) - k or None) for each tested k


def flatness_test(
    tower: CyclotomicTower, x: TowerElement, k_max: Optional[int] = None
) -> FlatnessReport:
    """Margins val((g_k - 1) x) - k for the layer generators g_k, k < level.

    g_k generates the automorphisms fixing K_k, so a nonnegative margin at
    every k certifies that x sits p^k-close to each sublevel in the Galois
    sense; the minimum margin is the flatness defect.
    """
    lev = x.level
    top = lev - 1 if k_max is None else min(k_max, lev - 1)
    out = []
    for k in range(top + 1):
        g = tower.layer_generator(k, lev)
        diff = tower.galois_apply(g, x) - x
        try:
            out.append((k, tower.valuation(diff) - k))
        except ValuationOfZero:
            out.append((k, None))
    return FlatnessReport(lev, tuple(out))
