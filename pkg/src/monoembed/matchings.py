"""Slice shadows, Kruskal-Katona audits, fractional monotone matchings, and
randomized almost-perfect matchings on the hypercube.

Weight functions and matchings carry exact rationals end to end: feasibility
is decided by max-flow over integer-scaled capacities, so no tolerance enters
any feasibility decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .domain import enumerate_slice
from .embeddings import LocalEmbedding, OmegaEnum
from .flow import FlowNetwork


class MatchingError(ValueError):
    """Invalid matching construction or validation failure."""


class MassMismatchError(MatchingError):
    """The two weight functions carry different total mass."""


class PreconditionError(ValueError):
    """A stated precondition fails on the given inputs."""


# ---------------------------------------------------------------------------
# Shadows and Kruskal-Katona


def _slice_weight(points: Iterable[int]) -> int | None:
    weights = {x.bit_count() for x in points}
    if len(weights) > 1:
        raise ValueError(f"points span several slices (weights {sorted(weights)})")
    return weights.pop() if weights else None


def upper_shadow(points: Iterable[int], n: int, t: int = 1) -> frozenset[int]:
    """Iterated upper shadow: all y one..t levels up dominating some member."""
    current = frozenset(points)
    k = _slice_weight(current)
    if t < 0 or (k is not None and k + t > n):
        raise ValueError(f"t = {t} steps leave the cube from slice {k} of n = {n}")
    full = (1 << n) - 1
    for _ in range(t):
        nxt = set()
        for x in current:
            free = full ^ x
            while free:
                b = free & -free
                nxt.add(x | b)
                free ^= b
        current = frozenset(nxt)
    return current


def lower_shadow(points: Iterable[int], n: int, t: int = 1) -> frozenset[int]:
    """Iterated lower shadow: all y one..t levels down dominated by some member."""
    current = frozenset(points)
    k = _slice_weight(current)
    if t < 0 or (k is not None and k - t < 0):
        raise ValueError(f"t = {t} steps leave the cube from slice {k} of n = {n}")
    for _ in range(t):
        nxt = set()
        for x in current:
            ones = x
            while ones:
                b = ones & -ones
                nxt.add(x ^ b)
                ones ^= b
        current = frozenset(nxt)
    return current


#: Exact rational comparison of the shadow inequality is used while n^t stays below this.
KK_EXACT_EXPONENT_CAP = 100_000


@dataclass(frozen=True)
class KKRecord:
    """One evaluation of the shadow inequality mu(shadow) >= mu(A)^((1-1/n)^t)."""

    n: int
    k: int
    t: int
    direction: str
    lhs: Fraction
    rhs: float
    holds: bool
    exact: bool


def kk_check(points: Iterable[int], n: int, t: int = 1, direction: str = "upper") -> KKRecord:
    """Evaluate the (iterated) Kruskal-Katona inequality for a slice subset.

    When n^t is small the comparison lhs >= mu^((1-1/n)^t) is decided exactly
    as lhs^(n^t) >= mu^((n-1)^t) over the rationals; otherwise by floats.
    """
    pts = frozenset(points)
    if not pts:
        raise ValueError("Kruskal-Katona needs a nonempty family")
    if direction not in ("upper", "lower"):
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
    k = _slice_weight(pts)
    shadow = upper_shadow(pts, n, t) if direction == "upper" else lower_shadow(pts, n, t)
    k2 = k + t if direction == "upper" else k - t
    lhs = Fraction(len(shadow), math.comb(n, k2))
    mu = Fraction(len(pts), math.comb(n, k))
    rhs = float(mu) ** ((1.0 - 1.0 / n) ** t)
    if n**t <= KK_EXACT_EXPONENT_CAP:
        holds = lhs ** (n**t) >= mu ** ((n - 1) ** t)
        exact = True
    else:
        holds = float(lhs) >= rhs * (1.0 - 1e-12)
        exact = False
    return KKRecord(n=n, k=k, t=t, direction=direction, lhs=lhs, rhs=rhs, holds=holds, exact=exact)


@dataclass(frozen=True)
class ShadowApproximator:
    """Sparse kernel M with its shadow B' and majority-vote pullback B."""

    n: int
    s: int
    t: int
    eps: Fraction
    kernel: frozenset[int]  # M, a small random subset of A
    shadow: frozenset[int]  # B' = iterated upper shadow of M
    pullback: frozenset[int]  # B, the majority vote over weight-(s+t) supersets
    shadow_diff: Fraction  # mu_{s+t}(B' sym-diff shadow(A)) / mu_{s+t}(shadow(A))
    pullback_diff: Fraction  # mu_s(B sym-diff A) / mu_s(A)
    attempts: int
    ok: bool


def sparse_shadow_approximator(
    points: Iterable[int],
    n: int,
    t: int,
    eps,
    rng: np.random.Generator,
    max_retries: int = 32,
) -> ShadowApproximator:
    """Approximate a small-shadow family by the shadow of a sparse random kernel.

    Requires the small-shadow premise mu_{s+t}(shadow) <= (1+eps) mu_s(A),
    checked exactly.  Retries the random kernel until both measured symmetric
    differences meet the 6*eps / 18*eps bounds (the guarantee is only a
    positive-probability one), or returns the best attempt flagged not-ok.
    """
    eps = Fraction(eps)
    if not 0 < eps <= Fraction(1, 100):
        raise ValueError(f"eps must lie in (0, 1/100], got {eps}")
    family = sorted(set(points))
    if not family:
        raise ValueError("empty family")
    s = _slice_weight(family)
    target_shadow = upper_shadow(family, n, t)
    mu_a = Fraction(len(family), math.comb(n, s))
    mu_shadow = Fraction(len(target_shadow), math.comb(n, s + t))
    if mu_shadow > (1 + eps) * mu_a:
        raise PreconditionError(
            f"small-shadow premise fails: mu(shadow) = {mu_shadow} > (1+eps) mu(A) = {(1 + eps) * mu_a}"
        )

    size = max(1, math.ceil(100 * math.log(1 / float(eps)) / math.comb(s + t, t) * len(family)))
    size = min(size, len(family))
    up_cap = 6 * eps
    down_cap = 18 * eps

    best: ShadowApproximator | None = None
    slice_s = list(enumerate_slice(n, s))
    votes_needed = math.comb(n - s, t)
    for attempt in range(1, max_retries + 1):
        kernel = frozenset(
            int(family[i]) for i in rng.choice(len(family), size=size, replace=False)
        )
        shadow = upper_shadow(kernel, n, t)
        pullback = set()
        for x in slice_s:
            free = [i for i in range(n) if not (x >> i) & 1]
            hits = sum(1 for add in combinations(free, t) if x | sum(1 << i for i in add) in shadow)
            if 2 * hits >= votes_needed:
                pullback.add(x)
        d_up = Fraction(len(shadow ^ target_shadow), math.comb(n, s + t))
        d_down = Fraction(len(pullback ^ set(family)), math.comb(n, s))
        rel_up = d_up / mu_shadow
        rel_down = d_down / mu_a
        ok = rel_up <= up_cap and rel_down <= down_cap
        result = ShadowApproximator(
            n=n,
            s=s,
            t=t,
            eps=eps,
            kernel=kernel,
            shadow=shadow,
            pullback=frozenset(pullback),
            shadow_diff=rel_up,
            pullback_diff=rel_down,
            attempts=attempt,
            ok=ok,
        )
        if ok:
            return result
        if best is None or (result.shadow_diff + result.pullback_diff) < (
            best.shadow_diff + best.pullback_diff
        ):
            best = result
    return best


# ---------------------------------------------------------------------------
# Weight functions and fractional matchings


class WeightFn:
    """Nonnegative rational weights on cube points (sparse)."""

    __slots__ = ("n", "weights", "total")

    def __init__(self, n: int, weights: Mapping[int, Fraction]):
        clean = {}
        for x, w in weights.items():
            w = Fraction(w)
            if w < 0:
                raise MatchingError(f"negative weight {w} at {x}")
            if w > 0:
                clean[int(x)] = w
        self.n = n
        self.weights = clean
        self.total = sum(clean.values(), Fraction(0))

    @classmethod
    def slice_uniform(cls, n: int, k: int) -> "WeightFn":
        """mu_k: the uniform distribution on the weight-k slice."""
        w = Fraction(1, math.comb(n, k))
        return cls(n, {x: w for x in enumerate_slice(n, k)})

    @classmethod
    def restricted_slice(cls, n: int, k: int, subset: Iterable[int]) -> "WeightFn":
        """mu_S: mu_k restricted to S (total mass |S| / C(n, k))."""
        w = Fraction(1, math.comb(n, k))
        out = {}
        for x in subset:
            if x.bit_count() != k:
                raise MatchingError(f"point {x:#b} not in slice {k}")
            out[x] = w
        return cls(n, out)

    @classmethod
    def uniform_on(cls, n: int, points: Iterable[int]) -> "WeightFn":
        pts = set(points)
        if not pts:
            raise MatchingError("uniform_on needs a nonempty set")
        w = Fraction(1, len(pts))
        return cls(n, {x: w for x in pts})

    @classmethod
    def point_mass(cls, n: int, x: int) -> "WeightFn":
        return cls(n, {x: Fraction(1)})

    def scaled(self, c) -> "WeightFn":
        c = Fraction(c)
        if c < 0:
            raise MatchingError("negative scale")
        return WeightFn(self.n, {x: c * w for x, w in self.weights.items()})

    def plus(self, other: "WeightFn") -> "WeightFn":
        if other.n != self.n:
            raise MatchingError("dimension mismatch")
        out = dict(self.weights)
        for x, w in other.weights.items():
            out[x] = out.get(x, Fraction(0)) + w
        return WeightFn(self.n, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightFn) and other.n == self.n and other.weights == self.weights

    def __repr__(self) -> str:
        return f"WeightFn(n={self.n}, support={len(self.weights)}, total={self.total})"


@dataclass(frozen=True)
class HallWitness:
    """A set S of left points whose neighborhood carries too little mass."""

    violating_set: frozenset[int]
    set_mass: Fraction
    neighborhood_mass: Fraction


class FracMatching:
    """A monotone fractional matching: exact marginals, order-respecting support."""

    __slots__ = ("left", "right", "pairs")

    def __init__(self, left: WeightFn, right: WeightFn, pairs: Mapping[tuple[int, int], Fraction]):
        self.left = left
        self.right = right
        self.pairs = {k: Fraction(v) for k, v in pairs.items() if v != 0}

    def validate(self) -> None:
        """Raise unless marginals match exactly and every pair satisfies u <= v."""
        rows: dict[int, Fraction] = {}
        cols: dict[int, Fraction] = {}
        for (u, v), w in self.pairs.items():
            if w < 0:
                raise MatchingError(f"negative pair weight at ({u}, {v})")
            if u & ~v != 0:
                raise MatchingError(f"pair ({u:#b}, {v:#b}) violates the order")
            rows[u] = rows.get(u, Fraction(0)) + w
            cols[v] = cols.get(v, Fraction(0)) + w
        if rows != self.left.weights:
            raise MatchingError("row sums do not equal the left weight function")
        if cols != self.right.weights:
            raise MatchingError("column sums do not equal the right weight function")

    def __repr__(self) -> str:
        return f"FracMatching({len(self.pairs)} pairs, mass={self.left.total})"


def _comparable_pairs(us: Sequence[int], vs: Sequence[int], n: int) -> Iterator[tuple[int, int]]:
    """All (u, v) with u <= v, grouped to use superset enumeration when cheaper."""
    by_weight: dict[int, set[int]] = {}
    for v in vs:
        by_weight.setdefault(v.bit_count(), set()).add(v)
    for u in us:
        wu = u.bit_count()
        for wv, group in by_weight.items():
            if wv < wu:
                continue
            if wv == wu:
                if u in group:
                    yield u, u
                continue
            free = [i for i in range(n) if not (u >> i) & 1]
            if math.comb(len(free), wv - wu) <= 4 * len(group):
                for add in combinations(free, wv - wu):
                    v = u | sum(1 << i for i in add)
                    if v in group:
                        yield u, v
            else:
                for v in group:
                    if u & ~v == 0:
                        yield u, v


def frac_matching_solve(w_left: WeightFn, w_right: WeightFn) -> FracMatching | HallWitness:
    """Decide w_left <~ w_right exactly; return a matching or a Hall violator.

    Max-flow with integer-scaled capacities: source -> u at w_left(u),
    v -> sink at w_right(v), u -> v unbounded for comparable pairs.  On
    infeasibility the source side of the min cut restricted to the left
    support is a set violating Hall's condition.
    """
    if w_left.n != w_right.n:
        raise MatchingError("dimension mismatch")
    if w_left.total != w_right.total:
        raise MassMismatchError(f"total masses differ: {w_left.total} != {w_right.total}")
    us = sorted(w_left.weights)
    vs = sorted(w_right.weights)
    u_index = {u: i for i, u in enumerate(us)}
    v_index = {v: len(us) + i for i, v in enumerate(vs)}

    denom = 1
    for w in list(w_left.weights.values()) + list(w_right.weights.values()):
        denom = denom * w.denominator // math.gcd(denom, w.denominator)
    total = int(w_left.total * denom)
    inf = total + 1

    s = len(us) + len(vs)
    t = s + 1
    net = FlowNetwork(s + 2)
    for u in us:
        net.add_edge(s, u_index[u], int(w_left.weights[u] * denom))
    for v in vs:
        net.add_edge(v_index[v], t, int(w_right.weights[v] * denom))
    pair_edges: list[tuple[int, int, int]] = []
    for u, v in _comparable_pairs(us, vs, w_left.n):
        e = net.add_edge(u_index[u], v_index[v], inf)
        pair_edges.append((u, v, e))

    flow = net.max_flow(s, t)
    if flow == total:
        pairs = {}
        for u, v, e in pair_edges:
            routed = net.flow_on(e)
            if routed:
                pairs[(u, v)] = Fraction(routed, denom)
        matching = FracMatching(w_left, w_right, pairs)
        matching.validate()
        return matching

    source_side = net.min_cut_source_side(s)
    violating = frozenset(u for u in us if u_index[u] in source_side)
    nbhd = Fraction(0)
    seen = set()
    for u, v in _comparable_pairs(sorted(violating), vs, w_left.n):
        if v not in seen:
            seen.add(v)
            nbhd += w_right.weights[v]
    set_mass = sum((w_left.weights[u] for u in violating), Fraction(0))
    return HallWitness(violating_set=violating, set_mass=set_mass, neighborhood_mass=nbhd)


def hall_condition_exhaustive(w_left: WeightFn, w_right: WeightFn) -> HallWitness | None:
    """Check Hall's condition by enumerating every subset of the left support.

    Tiny-instance oracle for the flow solver; support is capped at 18 points.
    Returns None when the condition holds, else a (minimal-mass-gap) witness.
    """
    us = sorted(w_left.weights)
    if len(us) > 18:
        raise MatchingError("exhaustive Hall check capped at 18 support points")
    vs = sorted(w_right.weights)
    nbr_mask = []
    for u in us:
        mask = 0
        for j, v in enumerate(vs):
            if u & ~v == 0:
                mask |= 1 << j
        nbr_mask.append(mask)
    worst: HallWitness | None = None
    for subset in range(1, 1 << len(us)):
        nmask = 0
        smass = Fraction(0)
        rest = subset
        while rest:
            low = rest & -rest
            i = low.bit_length() - 1
            nmask |= nbr_mask[i]
            smass += w_left.weights[us[i]]
            rest ^= low
        nmass = Fraction(0)
        rest = nmask
        while rest:
            low = rest & -rest
            nmass += w_right.weights[vs[low.bit_length() - 1]]
            rest ^= low
        if nmass < smass:
            members = frozenset(us[i] for i in range(len(us)) if (subset >> i) & 1)
            witness = HallWitness(members, smass, nmass)
            if worst is None or (witness.neighborhood_mass - witness.set_mass) < (
                worst.neighborhood_mass - worst.set_mass
            ):
                worst = witness
    return worst


def compose(m1: FracMatching, m2: FracMatching) -> FracMatching:
    """Transitive composition: w(u, r) = sum_v m1(u, v) m2(v, r) / w_V(v)."""
    if m1.right.weights != m2.left.weights:
        raise MatchingError("inner marginals do not match")
    mid = m1.right.weights
    by_v: dict[int, list[tuple[int, Fraction]]] = {}
    for (v, r), w in m2.pairs.items():
        by_v.setdefault(v, []).append((r, w))
    pairs: dict[tuple[int, int], Fraction] = {}
    for (u, v), w1 in m1.pairs.items():
        inv = 1 / mid[v]
        for r, w2 in by_v.get(v, ()):
            key = (u, r)
            pairs[key] = pairs.get(key, Fraction(0)) + w1 * w2 * inv
    out = FracMatching(m1.left, m2.right, pairs)
    out.validate()
    return out


def mix(m1: FracMatching, m2: FracMatching, p, q) -> FracMatching:
    """Linear combination p*m1 + q*m2 with endpoints mixed the same way."""
    p, q = Fraction(p), Fraction(q)
    if p < 0 or q < 0:
        raise MatchingError("mix coefficients must be nonnegative")
    if m1.left.n != m2.left.n:
        raise MatchingError("dimension mismatch")
    left = m1.left.scaled(p).plus(m2.left.scaled(q))
    right = m1.right.scaled(p).plus(m2.right.scaled(q))
    pairs: dict[tuple[int, int], Fraction] = {}
    for key, w in m1.pairs.items():
        pairs[key] = pairs.get(key, Fraction(0)) + p * w
    for key, w in m2.pairs.items():
        pairs[key] = pairs.get(key, Fraction(0)) + q * w
    out = FracMatching(left, right, pairs)
    out.validate()
    return out


def slice_coupling(n: int, k: int, k2: int) -> FracMatching:
    """The monotone-path coupling of mu_k with mu_k2 in closed form.

    A uniformly random monotone path hits one vertex per level; the joint law
    of its level-k and level-k2 vertices puts k! (k2-k)! (n-k2)! / n! on every
    comparable pair.
    """
    if k > k2:
        raise MatchingError(f"need k <= k2, got {k} > {k2}")
    count = math.comb(n, k) * math.comb(n - k, k2 - k)
    if count > 2_000_000:
        raise MatchingError("slice coupling too large to materialize")
    w = Fraction(
        math.factorial(k) * math.factorial(k2 - k) * math.factorial(n - k2), math.factorial(n)
    )
    pairs = {}
    for x in enumerate_slice(n, k):
        free = [i for i in range(n) if not (x >> i) & 1]
        for add in combinations(free, k2 - k):
            pairs[(x, x | sum(1 << i for i in add))] = w
    return FracMatching(WeightFn.slice_uniform(n, k), WeightFn.slice_uniform(n, k2), pairs)


# ---------------------------------------------------------------------------
# Integral monotone matchings

_comb_index_cache: dict[tuple[int, int], np.ndarray] = {}


def _comb_indices(k: int, d: int) -> np.ndarray:
    """All d-subsets of range(k) as an index matrix (cached)."""
    key = (k, d)
    arr = _comb_index_cache.get(key)
    if arr is None:
        arr = np.array(list(combinations(range(k), d)), dtype=np.intp).reshape(-1, d)
        _comb_index_cache[key] = arr
    return arr


def maximum_monotone_matching(
    a_points: Sequence[int],
    b_points: Sequence[int],
    n: int,
    rng: np.random.Generator | None = None,
) -> dict[int, int]:
    """Maximum matching on the implicit comparability graph {(a, b): a <= b}.

    Large instances are warm-started by sampling random supersets of each left
    point (a sparse sub-graph solved at C speed), then finished by exact
    augmenting-path search over the full implicit edge set, so the result is a
    true maximum matching regardless of the sampling.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    a_list = sorted(set(int(x) for x in a_points))
    b_list = sorted(set(int(x) for x in b_points))
    b_set = set(b_list)
    matched_a: dict[int, int] = {}
    matched_b: dict[int, int] = {}

    if len(a_list) >= 512 and len(b_list) >= 512 and n <= 30:
        _sampled_warm_start(a_list, b_list, n, rng, matched_a, matched_b)

    b_by_weight: dict[int, np.ndarray] = {}
    for b in b_list:
        b_by_weight.setdefault(b.bit_count(), []).append(b)
    b_by_weight = {w: np.asarray(g, dtype=np.int64) for w, g in b_by_weight.items()}
    b_weights = sorted(b_by_weight)
    adj_cache: dict[int, list[int]] = {}

    def neighbors(u: int) -> list[int]:
        cached = adj_cache.get(u)
        if cached is not None:
            return cached
        wu = u.bit_count()
        free_bits = None
        out: list[int] = []
        for wb in b_weights:
            if wb <= wu:
                continue
            group = b_by_weight[wb]
            if free_bits is None:
                free_bits = np.array(
                    [1 << i for i in range(n) if not (u >> i) & 1], dtype=np.int64
                )
            d = wb - wu
            if d > len(free_bits):
                continue
            if math.comb(len(free_bits), d) <= 8 * len(group):
                idx = _comb_indices(len(free_bits), d)
                cand = u | np.bitwise_or.reduce(free_bits[idx], axis=1)
                pos = np.minimum(np.searchsorted(group, cand), len(group) - 1)
                out.extend(int(v) for v in cand[group[pos] == cand])
            else:
                out.extend(int(v) for v in group[(group & u) == u])
        adj_cache[u] = out
        return out

    # Exact completion: one full augmenting search per unmatched left vertex.
    # Right vertices swept by a failed search can never reach a free vertex
    # again (no augmentation may cross a closed alternating tree), so they are
    # retired permanently; deficient instances then cost one sweep, not many.
    dead: set[int] = set()
    for u in a_list:
        if u in matched_a:
            continue
        visited: set[int] = set()
        stack = [(u, iter(neighbors(u)))]
        parent: dict[int, int] = {}
        found = None
        while stack:
            cur, it = stack[-1]
            advanced = False
            for v in it:
                if v in visited or v in dead:
                    continue
                visited.add(v)
                parent[v] = cur
                owner = matched_b.get(v)
                if owner is None:
                    found = v
                    break
                stack.append((owner, iter(neighbors(owner))))
                advanced = True
                break
            if found is not None:
                break
            if not advanced:
                stack.pop()
        if found is not None:
            v = found
            while True:
                prev_u = parent[v]
                old_v = matched_a.get(prev_u)
                matched_a[prev_u] = v
                matched_b[v] = prev_u
                if old_v is None:
                    break
                v = old_v
        else:
            dead |= visited
    return matched_a


def _sampled_warm_start(a_list, b_list, n, rng, matched_a, matched_b, target_degree=12):
    """Sample random comparable partners from both sides and solve the sparse graph."""
    full = np.uint32((1 << n) - 1)
    a_arr = np.asarray(a_list, dtype=np.uint32)
    b_arr = np.asarray(b_list, dtype=np.uint32)
    edges_i: list[np.ndarray] = []
    edges_j: list[np.ndarray] = []
    densities = (1, 2, 3, 1, 2, 3, 4, 0)

    def sample_side(points, lookup, upward):
        forward: list[np.ndarray] = []
        backward: list[np.ndarray] = []
        degrees = np.zeros(len(points), dtype=np.int32)
        active = np.arange(len(points))
        for _ in range(10):
            if len(active) == 0:
                break
            sub = points[active]
            for extra in densities:
                r = rng.integers(0, 1 << n, size=len(sub), dtype=np.uint32)
                for _ in range(extra):
                    r &= rng.integers(0, 1 << n, size=len(sub), dtype=np.uint32)
                cand = sub | (~sub & r & full) if upward else sub & ~(sub & r)
                pos = np.minimum(np.searchsorted(lookup, cand), len(lookup) - 1)
                hit = (lookup[pos] == cand) & (cand != sub)
                if hit.any():
                    forward.append(active[hit])
                    backward.append(pos[hit])
                    np.add.at(degrees, active[hit], 1)
            active = active[degrees[active] < target_degree]
        return forward, backward

    fwd, bwd = sample_side(a_arr, b_arr, upward=True)
    edges_i.extend(fwd)
    edges_j.extend(bwd)
    bwd2, fwd2 = sample_side(b_arr, a_arr, upward=False)
    edges_i.extend(fwd2)
    edges_j.extend(bwd2)

    if not edges_i:
        return
    rows = np.concatenate(edges_i)
    cols = np.concatenate(edges_j)
    graph = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(len(a_arr), len(b_arr))
    )
    match = maximum_bipartite_matching(graph, perm_type="column")
    for i, j in enumerate(match):
        if j >= 0:
            matched_a[int(a_arr[i])] = int(b_arr[j])
            matched_b[int(b_arr[j])] = int(a_arr[i])


def perfect_matching_from_frac(
    a_points: Sequence[int], b_points: Sequence[int], n: int
) -> dict[int, int] | None:
    """A perfect monotone matching between equal-size sets, or None.

    By the fractional-matching number / Konig argument, this succeeds exactly
    when uniform(A) <~ uniform(B) is feasible.
    """
    a_list = sorted(set(int(x) for x in a_points))
    b_list = sorted(set(int(x) for x in b_points))
    if len(a_list) != len(b_list):
        raise MatchingError(f"sizes differ: {len(a_list)} != {len(b_list)}")
    matching = maximum_monotone_matching(a_list, b_list, n)
    return matching if len(matching) == len(a_list) else None


# ---------------------------------------------------------------------------
# Slice domination experiments


@dataclass(frozen=True)
class SliceDominationParams:
    """Parameters of the random-subset slice domination statements."""

    n: int
    k: int
    t: int
    s: int
    d: int = 0

    @property
    def rho(self) -> Fraction:
        return Fraction(self.s, math.comb(self.n, self.k))

    def range_warnings(self) -> list[str]:
        """Asymptotic preconditions, reported but not enforced at desk scale."""
        out = []
        t_lo = 10 * self.n ** (1 / 3)
        t_hi = math.sqrt(self.n * math.log(self.n))
        if not t_lo <= self.t <= t_hi:
            out.append(f"t = {self.t} outside [{t_lo:.2f}, {t_hi:.2f}] (10 n^(1/3), sqrt(n log n))")
        half = self.n / 2
        if abs(self.k - half) > t_hi:
            out.append(f"k = {self.k} further than sqrt(n log n) = {t_hi:.2f} from n/2")
        if not 0 <= self.s <= math.comb(self.n, self.k):
            out.append(f"s = {self.s} outside [0, C(n, k)]")
        return out


@dataclass(frozen=True)
class DominationReport:
    params: SliceDominationParams
    trials: int
    lower_successes: int  # (t + rho) mu_{k-t} <~ t mu_k + mu_S
    upper_successes: int  # t mu_k + mu_S <~ (t + rho) mu_{k+t}
    warnings: tuple[str, ...]


def sample_slice_subset(n: int, k: int, s: int, rng: np.random.Generator) -> list[int]:
    """A uniformly random size-s subset of the weight-k slice."""
    slice_points = list(enumerate_slice(n, k))
    if not 0 <= s <= len(slice_points):
        raise ValueError(f"s = {s} out of range for slice of size {len(slice_points)}")
    idx = rng.choice(len(slice_points), size=s, replace=False)
    return [slice_points[i] for i in idx]


def slice_domination_check(
    params: SliceDominationParams, rng: np.random.Generator, trials: int
) -> DominationReport:
    """Sample random slice subsets and decide both dominations exactly per trial."""
    n, k, t = params.n, params.k, params.t
    rho = params.rho
    mu_k = WeightFn.slice_uniform(n, k)
    lower_ok = 0
    upper_ok = 0
    for _ in range(trials):
        subset = sample_slice_subset(n, k, params.s, rng)
        mu_s = WeightFn.restricted_slice(n, k, subset)
        mid = mu_k.scaled(t).plus(mu_s)
        lower = frac_matching_solve(WeightFn.slice_uniform(n, k - t).scaled(t + rho), mid)
        if isinstance(lower, FracMatching):
            lower_ok += 1
        upper = frac_matching_solve(mid, WeightFn.slice_uniform(n, k + t).scaled(t + rho))
        if isinstance(upper, FracMatching):
            upper_ok += 1
    return DominationReport(
        params=params,
        trials=trials,
        lower_successes=lower_ok,
        upper_successes=upper_ok,
        warnings=tuple(params.range_warnings()),
    )


@dataclass(frozen=True)
class UnionSliceReport:
    lower_holds: bool  # mu_{k-2d} <~ nu_T
    upper_holds: bool  # nu_T <~ mu_{k+d}
    precondition_ok: bool  # sum_{i=k-d}^{k-1} C(n, i) >= t C(n, k)


def union_slice_match(n: int, k: int, d: int, t: int, subset: Iterable[int]) -> UnionSliceReport:
    """Decide both dominations for T = S union slices [k-d, k-1], exactly."""
    if k - 2 * d < 0 or k + d > n:
        raise ValueError("slice indices leave the cube")
    points = set(subset)
    if any(x.bit_count() != k for x in points):
        raise MatchingError("S must sit inside the weight-k slice")
    for i in range(k - d, k):
        points.update(enumerate_slice(n, i))
    if not points:
        raise MatchingError("T is empty")
    precondition = sum(math.comb(n, i) for i in range(k - d, k)) >= t * math.comb(n, k)
    nu_t = WeightFn.uniform_on(n, points)
    lower = frac_matching_solve(WeightFn.slice_uniform(n, k - 2 * d), nu_t)
    upper = frac_matching_solve(nu_t, WeightFn.slice_uniform(n, k + d))
    return UnionSliceReport(
        lower_holds=isinstance(lower, FracMatching),
        upper_holds=isinstance(upper, FracMatching),
        precondition_ok=precondition,
    )


@dataclass(frozen=True)
class DropTransformReport:
    """Monte-Carlo marginals of the shared-permutation coordinate drop."""

    samples: int
    keep_prob: Fraction
    left_tv: float  # empirical x' marginal vs mu_{k-t-d}
    right_tv: float  # empirical y' marginal vs (t mu_{k-d} + mu_S) / (t + rho)
    monotone_ok: bool  # every sampled pair satisfied x' <= y'


def coupling_drop_transform(
    matching: FracMatching,
    subset: Iterable[int],
    d: int,
    rng: np.random.Generator,
    samples: int = 100_000,
    keep_prob=None,
) -> DropTransformReport:
    """Push a slice-domination witness down d levels by a shared random drop.

    Sample (x, y) from the matching and a shared permutation; clear the first
    d one-coordinates of x in permutation order, and likewise for y except
    that y in S is kept in place with probability keep_prob.  The default
    keep_prob = 1/(t+1) makes the sampled marginals match the exact targets
    (t + rho) mu_{k-t-d} and t mu_{k-d} + mu_S; see the decisions ledger for
    the choice.
    """
    s_set = set(subset)
    n = matching.left.n
    us = sorted(matching.left.weights)
    vs = sorted(matching.right.weights)
    k_low = us[0].bit_count()
    k = vs[0].bit_count()
    t = k - k_low
    if any(u.bit_count() != k_low for u in us) or any(v.bit_count() != k for v in vs):
        raise MatchingError("matching endpoints must each sit inside one slice")
    if d < 0 or k_low - d < 0:
        raise ValueError("drop distance leaves the cube")
    if keep_prob is None:
        keep_prob = Fraction(1, t + 1) if t else Fraction(1)
    keep_prob = Fraction(keep_prob)

    pairs = list(matching.pairs.items())
    cdf = np.cumsum([float(w) for _, w in pairs])
    cdf /= cdf[-1]
    keep_f = float(keep_prob)

    def drop_first_ones(x: int, order: np.ndarray, count: int) -> int:
        removed = 0
        for i in order:
            if removed == count:
                break
            bit = 1 << int(i)
            if x & bit:
                x ^= bit
                removed += 1
        return x

    left_counts: dict[int, int] = {}
    right_counts: dict[int, int] = {}
    monotone_ok = True
    for _ in range(samples):
        (x, y), _ = pairs[min(int(np.searchsorted(cdf, rng.random(), side="right")), len(pairs) - 1)]
        order = rng.permutation(n)
        x2 = drop_first_ones(x, order, d)
        if y in s_set and rng.random() < keep_f:
            y2 = y
        else:
            y2 = drop_first_ones(y, order, d)
        if x2 & ~y2:
            monotone_ok = False
        left_counts[x2] = left_counts.get(x2, 0) + 1
        right_counts[y2] = right_counts.get(y2, 0) + 1

    rho = Fraction(len(s_set), math.comb(n, k))
    norm = t + rho
    left_target = WeightFn.slice_uniform(n, k_low - d)
    right_target = (
        WeightFn.slice_uniform(n, k - d).scaled(t).plus(WeightFn.restricted_slice(n, k, s_set))
    )

    def tv(counts: dict[int, int], target: WeightFn, scale: Fraction) -> float:
        dev = 0.0
        seen = set()
        for x, c in counts.items():
            goal = float(target.weights.get(x, Fraction(0)) / scale)
            dev += abs(c / samples - goal)
            seen.add(x)
        for x, w in target.weights.items():
            if x not in seen:
                dev += float(w / scale)
        return dev / 2

    return DropTransformReport(
        samples=samples,
        keep_prob=keep_prob,
        left_tv=tv(left_counts, left_target, Fraction(1)),
        right_tv=tv(right_counts, right_target, norm),
        monotone_ok=monotone_ok,
    )


# ---------------------------------------------------------------------------
# Layered partitions and almost-perfect matchings


@dataclass(frozen=True)
class LayeredPartition:
    """Equal chunks of the cube in Hamming-weight order, random within layers."""

    n: int
    m: int
    chunks: tuple[tuple[int, ...], ...]
    leftover: tuple[int, ...]
    min_weights: tuple[int, ...]
    max_weights: tuple[int, ...]
    median_weights: tuple[int, ...]

    def phi_values(self) -> np.ndarray:
        """The induced monotone map: chunk i -> i, leftover -> m - 1."""
        phi = np.full(1 << self.n, self.m - 1, dtype=np.int16)
        for i, chunk in enumerate(self.chunks):
            phi[list(chunk)] = i
        return phi


def random_layered_partition(n: int, m: int, rng: np.random.Generator) -> LayeredPartition:
    """Chunk a weight-sorted, layer-shuffled ordering of the cube into m parts."""
    if m < 1 or (1 << n) < m:
        raise ValueError(f"need 1 <= m <= 2^n, got m={m}, n={n}")
    order: list[int] = []
    for k in range(n + 1):
        layer = list(enumerate_slice(n, k))
        perm = rng.permutation(len(layer))
        order.extend(layer[i] for i in perm)
    size = (1 << n) // m
    chunks = tuple(tuple(order[i * size : (i + 1) * size]) for i in range(m))
    leftover = tuple(order[m * size :])
    mins = tuple(chunk[0].bit_count() for chunk in chunks)
    maxs = tuple(chunk[-1].bit_count() for chunk in chunks)
    medians = tuple(chunk[(len(chunk) - 1) // 2].bit_count() for chunk in chunks)
    return LayeredPartition(
        n=n,
        m=m,
        chunks=chunks,
        leftover=leftover,
        min_weights=mins,
        max_weights=maxs,
        median_weights=medians,
    )


@dataclass(frozen=True)
class AlmostPerfectMatching:
    """Per-pair monotone matchings over a layered partition, with coverage."""

    partition: LayeredPartition
    matchings: tuple[dict[int, int], ...]
    unmatched_per_pair: tuple[int, ...]
    delta: Fraction  # worst uncovered fraction of any side, relative to 2^n
    all_perfect: bool  # every consecutive chunk pair fully matched


def build_almost_perfect_matching(
    partition: LayeredPartition, rng: np.random.Generator | None = None
) -> AlmostPerfectMatching:
    """Maximum monotone matchings between consecutive chunks, with exact delta.

    delta is the worst fraction of 2^n left uncovered on either side of any
    matching; the leftover block (assigned the top value) counts against the
    last pair, so perfect chunk matchings give delta = (2^n mod m) / 2^n.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n, m = partition.n, partition.m
    matchings = []
    unmatched = []
    for i in range(m - 1):
        found = maximum_monotone_matching(partition.chunks[i], partition.chunks[i + 1], n, rng)
        matchings.append(found)
        unmatched.append(len(partition.chunks[i]) - len(found))
    worst = max(unmatched, default=0)
    if m >= 2:
        # The last pair's upper side includes the leftover, which is never matched.
        worst = max(worst, unmatched[-1] + len(partition.leftover))
    else:
        worst = len(partition.leftover)
    return AlmostPerfectMatching(
        partition=partition,
        matchings=tuple(matchings),
        unmatched_per_pair=tuple(unmatched),
        delta=Fraction(worst, 1 << n),
        all_perfect=all(u == 0 for u in unmatched),
    )


@dataclass(frozen=True)
class ApmEmbeddingDiagnostics:
    delta: Fraction
    tv_mu1: Fraction
    tv_mu2: Fraction
    bounds_ok: bool  # both TV distances <= m * delta
    full_paths: int


def relaxed_embedding_from_apm(
    phi_values: Sequence[int], matchings: Sequence[Mapping[int, int]]
) -> tuple[LocalEmbedding, ApmEmbeddingDiagnostics]:
    """Stitch level matchings into paths and read off the (relaxed) embedding.

    Full-length paths become Omega; mu2 is uniform on their vertices and mu1
    is its pushforward (exactly uniform on [m], one vertex per level per
    path).  With perfect matchings the result is a plain local embedding of
    ([m], U).
    """
    phi_values = np.asarray(phi_values, dtype=np.int16)
    size = len(phi_values)
    r = size.bit_length() - 1
    if 1 << r != size:
        raise MatchingError("phi table length must be a power of two")
    m = int(phi_values.max()) + 1
    if len(matchings) != m - 1:
        raise MatchingError(f"need {m - 1} matchings for m = {m}, got {len(matchings)}")

    level_sizes = [int(np.count_nonzero(phi_values == i)) for i in range(m)]
    unmatched = []
    for i, matching in enumerate(matchings):
        targets = set()
        for u, v in matching.items():
            if phi_values[u] != i or phi_values[v] != i + 1:
                raise MatchingError(f"matching {i} pairs points outside levels {i}, {i + 1}")
            if u & ~v:
                raise MatchingError(f"matching {i} contains the non-comparable pair ({u}, {v})")
            if v in targets:
                raise MatchingError(f"matching {i} reuses target vertex {v}")
            targets.add(v)
        unmatched.append(level_sizes[i] - len(matching))
        unmatched.append(level_sizes[i + 1] - len(matching))
    delta = Fraction(max(unmatched, default=0), size)

    paths = []
    for x in np.flatnonzero(phi_values == 0):
        path = [int(x)]
        for matching in matchings:
            nxt = matching.get(path[-1])
            if nxt is None:
                break
            path.append(nxt)
        if len(path) == m:
            paths.append(tuple(path))
    if not paths:
        raise MatchingError("no full-length path; embedding undefined")

    covered = [x for path in paths for x in path]
    mass = Fraction(1, m * len(paths))
    mu2 = [Fraction(0)] * size
    for x in covered:
        mu2[x] += mass
    mu1 = [Fraction(0)] * m
    for x in covered:
        mu1[int(phi_values[x])] += mass

    uniform2 = Fraction(1, size)
    tv2 = sum((abs(w - uniform2) for w in mu2), Fraction(0)) / 2
    uniform1 = Fraction(1, m)
    tv1 = sum((abs(w - uniform1) for w in mu1), Fraction(0)) / 2
    diagnostics = ApmEmbeddingDiagnostics(
        delta=delta,
        tv_mu1=tv1,
        tv_mu2=tv2,
        bounds_ok=tv1 <= m * delta and tv2 <= m * delta,
        full_paths=len(paths),
    )

    omega = OmegaEnum([(Fraction(1, len(paths)), path) for path in paths])
    table = phi_values
    exact_uniform = tv2 == 0
    embedding = LocalEmbedding(
        r,
        m,
        mu1,
        lambda x: int(table[x]),
        omega,
        mu2=None if exact_uniform else mu2,
        sampler_spec=None,
    )
    return embedding, diagnostics


@dataclass(frozen=True)
class EmbeddingSearchResult:
    embedding: LocalEmbedding | None
    attempts: int
    diagnostics: ApmEmbeddingDiagnostics | None


def search_perfect_embedding(
    r: int, m: int, rng: np.random.Generator, budget: int = 64
) -> EmbeddingSearchResult:
    """Randomized search for a perfect-matching embedding of ([m], U) on r bits.

    Draws layered partitions (threshold layers with random boundary content)
    and keeps the first whose consecutive chunks all admit perfect monotone
    matchings.  Requires m | 2^r, which perfect matchings force.
    """
    if (1 << r) % m != 0:
        raise MatchingError(f"m = {m} does not divide 2^{r}; no perfect matching exists")
    for attempt in range(1, budget + 1):
        partition = random_layered_partition(r, m, rng)
        apm = build_almost_perfect_matching(partition, rng)
        if apm.all_perfect:
            embedding, diagnostics = relaxed_embedding_from_apm(
                partition.phi_values(), apm.matchings
            )
            return EmbeddingSearchResult(embedding, attempt, diagnostics)
    return EmbeddingSearchResult(None, budget, None)
