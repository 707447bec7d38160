"""Exact distance to monotonicity, negative sensitivity, and isoperimetry reports.

The closest monotone relabeling of f is an up-set selection problem, solved
as a minimum s-t cut over the covering DAG: source -> x with capacity mu(x)
when f(x) = 1, x -> sink with capacity mu(x) when f(x) = 0, and
infinite-capacity edges along covering pairs x -> y.  Infinite covering edges
force the relabeled 1-set to be upward closed, which enforces every
comparability by transitivity.  All capacities are rationals scaled to
integers by their common denominator, so the optimum is exact.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction

from .domain import (
    DenseBooleanFunction,
    Domain,
    DomainMismatchError,
    DomainTooLargeError,
    ProductMeasure,
)
from .flow import FlowNetwork

#: distance_to_monotone handles at most this many points.
MAX_CUT_POINTS = 1 << 20
#: brute_force_distance caps (cube / grid), chosen so DFS enumeration stays quick.
MAX_BRUTE_CUBE = 512
MAX_BRUTE_GRID = 81


@dataclass(frozen=True)
class DistanceCertificate:
    """Exact distance plus an achieving monotone witness."""

    epsilon: Fraction
    witness: DenseBooleanFunction
    changed: tuple

    def check(self, f: DenseBooleanFunction, mu: ProductMeasure) -> bool:
        """Re-verify monotonicity of the witness and that it achieves epsilon."""
        if not self.witness.is_monotone():
            return False
        delta = sum((mu.measure_of(x) for x in self.changed), Fraction(0))
        agree = all(f(x) != self.witness(x) for x in self.changed)
        return agree and delta == self.epsilon


def _check_pair(f: DenseBooleanFunction, mu: ProductMeasure | None) -> ProductMeasure:
    if mu is None:
        return ProductMeasure.uniform(f.domain)
    if mu.domain != f.domain:
        raise DomainMismatchError(f"measure domain {mu.domain!r} != function domain {f.domain!r}")
    return mu


def distance_to_monotone(
    f: DenseBooleanFunction, mu: ProductMeasure | None = None
) -> DistanceCertificate:
    """Exact eps(f; mu) with a closest monotone witness, via minimum s-t cut.

    The witness is the canonical optimum whose 1-set is smallest (equivalently,
    the cut with maximum sink side), which makes golden tests deterministic.
    """
    mu = _check_pair(f, mu)
    dom = f.domain
    if dom.size > MAX_CUT_POINTS:
        raise DomainTooLargeError(f"domain has {dom.size} points, cap is {MAX_CUT_POINTS}")

    masses = mu.masses_by_rank()
    denom = 1
    for w in masses:
        denom = denom * w.denominator // math.gcd(denom, w.denominator)
    scaled = [int(w * denom) for w in masses]
    inf = denom + 1

    size = dom.size
    s, t = size, size + 1
    net = FlowNetwork(size + 2)
    for i in range(size):
        if f.value_at_rank(i):
            net.add_edge(s, i, scaled[i])
        else:
            net.add_edge(i, t, scaled[i])
    for x in dom.points():
        i = dom.rank(x)
        for y in dom.upper_neighbors(x):
            net.add_edge(i, dom.rank(y), inf)

    flow = net.max_flow(s, t)
    epsilon = Fraction(flow, denom)

    source_side = net.min_cut_source_side(s)
    table = [0] * size
    for i in range(size):
        if i in source_side:
            table[i] = 1
    witness = DenseBooleanFunction(dom, table)
    changed = tuple(x for x in dom.points() if f(x) != witness(x))
    return DistanceCertificate(epsilon=epsilon, witness=witness, changed=changed)


def brute_force_distance(f: DenseBooleanFunction, mu: ProductMeasure | None = None) -> Fraction:
    """eps(f; mu) by exhaustive minimum over all monotone relabelings.

    Independent of the min-cut path: a DFS over rank order (a linear extension)
    assigns 0/1 per point subject to already-assigned covering predecessors,
    pruning only branches whose partial mismatch mass already matches the best.
    """
    mu = _check_pair(f, mu)
    dom = f.domain
    cap = MAX_BRUTE_CUBE if dom.kind == "cube" else MAX_BRUTE_GRID
    if dom.size > cap:
        raise DomainTooLargeError(f"brute force capped at {cap} points for {dom.kind} domains")

    masses = mu.masses_by_rank()
    points = list(dom.points())
    lower = [[dom.rank(y) for y in dom.lower_neighbors(x)] for x in points]
    fvals = [f.value_at_rank(i) for i in range(dom.size)]

    assigned = [0] * dom.size
    best = [Fraction(1)]
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, dom.size + 200))

    def rec(i: int, cost: Fraction) -> None:
        if cost >= best[0]:
            return
        if i == dom.size:
            best[0] = cost
            return
        forced_one = any(assigned[j] for j in lower[i])
        choices = (1,) if forced_one else (fvals[i], 1 - fvals[i])
        for v in choices:
            assigned[i] = v
            rec(i + 1, cost + (masses[i] if v != fvals[i] else 0))
        assigned[i] = 0

    try:
        rec(0, Fraction(0))
    finally:
        sys.setrecursionlimit(old_limit)
    return best[0]


def neg_sensitivity(f: DenseBooleanFunction, x, neighbors: str = "covering") -> int:
    """Number of coordinates whose adjacent point forms a violating pair with x.

    A coordinate counts once when f(x) = 1 and some y > x differing only there
    has f(y) = 0, or f(x) = 0 and some y < x differing only there has f(y) = 1.
    On grids, ``neighbors="covering"`` restricts y to x_i +- 1 (the covering
    relation); ``neighbors="any"`` allows every value on that coordinate.
    """
    if neighbors not in ("covering", "any"):
        raise ValueError(f"neighbors must be 'covering' or 'any', got {neighbors!r}")
    dom = f.domain
    fx = f(x)
    count = 0
    if dom.kind == "cube":
        for i in range(dom.n):
            bit = (x >> i) & 1
            if fx == 1 and bit == 0 and f(x | (1 << i)) == 0:
                count += 1
            elif fx == 0 and bit == 1 and f(x ^ (1 << i)) == 1:
                count += 1
        return count
    coords = tuple(x)
    for i in range(dom.n):
        c = coords[i]
        if fx == 1:
            values = range(c + 1, dom.m) if neighbors == "any" else range(c + 1, min(c + 2, dom.m))
            hit = any(f(coords[:i] + (v,) + coords[i + 1 :]) == 0 for v in values)
        else:
            values = range(c) if neighbors == "any" else range(max(c - 1, 0), c)
            hit = any(f(coords[:i] + (v,) + coords[i + 1 :]) == 1 for v in values)
        if hit:
            count += 1
    return count


def sensitivity_mass_profile(
    f: DenseBooleanFunction, mu: ProductMeasure | None = None, neighbors: str = "covering"
) -> dict[int, Fraction]:
    """Exact mu-mass carried by each negative-sensitivity value."""
    mu = _check_pair(f, mu)
    masses = mu.masses_by_rank()
    profile: dict[int, Fraction] = {}
    for x in f.domain.points():
        s = neg_sensitivity(f, x, neighbors)
        profile[s] = profile.get(s, Fraction(0)) + masses[f.domain.rank(x)]
    return profile


def talagrand_objective(
    f: DenseBooleanFunction, mu: ProductMeasure | None = None, neighbors: str = "covering"
) -> float:
    """E_mu[sqrt(s_f^-(x))]: exact rational masses, one square root per level."""
    profile = sensitivity_mass_profile(f, mu, neighbors)
    return sum(float(mass) * math.sqrt(s) for s, mass in profile.items())


@dataclass(frozen=True)
class IsoperimetryReport:
    """Distance, directed-Talagrand objective, and their normalized ratio."""

    epsilon: Fraction
    objective: float
    ratio: float | None
    form: str  # "cube" or "grid"


def isoperimetry_report(
    f: DenseBooleanFunction, mu: ProductMeasure | None = None
) -> IsoperimetryReport:
    """Tabulate the measured constant of the directed isoperimetric inequalities.

    Cube form: objective * log(n / eps) / eps.
    Grid form: objective * m^3 * log(m n / eps)^2 / eps.
    Natural logarithms; ratio is None when f is monotone (eps = 0).
    """
    mu = _check_pair(f, mu)
    dom = f.domain
    epsilon = distance_to_monotone(f, mu).epsilon
    objective = talagrand_objective(f, mu)
    if epsilon == 0:
        return IsoperimetryReport(epsilon, objective, None, dom.kind)
    eps = float(epsilon)
    if dom.kind == "cube":
        ratio = objective * math.log(dom.n / eps) / eps
    else:
        ratio = objective * dom.m**3 * math.log(dom.m * dom.n / eps) ** 2 / eps
    return IsoperimetryReport(epsilon, objective, ratio, dom.kind)
