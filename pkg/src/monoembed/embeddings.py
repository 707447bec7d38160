"""Local embeddings of distributions into Boolean hypercubes, and function lifting.

An embedding is a triple (phi, {Psi_omega}, P): a monotone map phi from
{0,1}^r onto [m], a family of monotone sections Psi_omega indexed by a
probability space (Omega, P), with phi o Psi_omega the identity, such that
phi pushes the cube measure to mu1 and Psi pulls mu1 back to the cube
measure.  Relaxed embeddings replace the uniform cube measure by mu2.

Omega is represented as a seeded sampler plus, when small enough, an exact
enumeration with rational weights, so every axiom is checkable as a rational
identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterator, Sequence

import numpy as np

from .domain import CountingOracle, CubeDomain, DenseBooleanFunction, GridDomain

#: Dense phi tables and exact verification are available up to this r.
MAX_PHI_TABLE_BITS = 16
#: Exact omega enumeration is attempted up to this many outcomes.
DEFAULT_ENUM_LIMIT = 1 << 20


class EmbeddingError(ValueError):
    """Invalid embedding construction or verification failure."""


class UnenumerableOmegaError(EmbeddingError):
    """The omega space is too large (or has no closed enumeration)."""


def _random_bits(rng: np.random.Generator, width: int) -> int:
    out = 0
    for shift in range(0, width, 56):
        out |= int(rng.integers(0, 1 << min(56, width - shift))) << shift
    return out


def _random_nonfull(rng: np.random.Generator, width: int) -> int:
    full = (1 << width) - 1
    while True:
        x = _random_bits(rng, width)
        if x != full:
            return x


# ---------------------------------------------------------------------------
# Omega representations


class OmegaEnum:
    """Explicit (weight, psi) outcomes; psi is a tuple of m cube points."""

    def __init__(self, entries: Sequence[tuple[Fraction, tuple[int, ...]]]):
        self._entries = [(Fraction(w), tuple(psi)) for w, psi in entries]
        total = sum(w for w, _ in self._entries)
        if total != 1:
            raise EmbeddingError(f"omega weights sum to {total}, not 1")
        self._cdf = None

    @property
    def size(self) -> int:
        return len(self._entries)

    def entries(self) -> Iterator[tuple[Fraction, tuple[int, ...]]]:
        return iter(self._entries)

    def sample(self, rng: np.random.Generator) -> tuple[int, ...]:
        if self._cdf is None:
            self._cdf = np.cumsum([float(w) for w, _ in self._entries])
        i = min(int(np.searchsorted(self._cdf, rng.random(), side="right")), self.size - 1)
        return self._entries[i][1]


class AndOmega:
    """Omega uniform over {0,1}^r minus the all-ones point; Psi(1) = ones, Psi(0) = omega."""

    def __init__(self, r: int):
        self.r = r
        self.full = (1 << r) - 1
        self.size = (1 << r) - 1

    def entries(self):
        w = Fraction(1, self.size)
        for mask in range(self.size):
            yield w, (mask, self.full)

    def sample(self, rng):
        return (_random_nonfull(rng, self.r), self.full)


class ComplementOmega:
    """Psi'(a) = ones - Psi(1 - a), outcome for outcome."""

    def __init__(self, inner, r: int):
        self.inner = inner
        self.full = (1 << r) - 1
        self.size = inner.size

    def entries(self):
        for w, psi in self.inner.entries():
            yield w, (self.full ^ psi[1], self.full ^ psi[0])

    def sample(self, rng):
        psi = self.inner.sample(rng)
        return (self.full ^ psi[1], self.full ^ psi[0])


def _pair_weights(p1: Fraction, p2: Fraction) -> list[tuple[tuple[int, int], Fraction]]:
    """(a, b) ~ mu_p1 x mu_p2 conditioned on (a, b) != (1, 1)."""
    z = 1 - p1 * p2
    return [
        ((0, 0), (1 - p1) * (1 - p2) / z),
        ((0, 1), (1 - p1) * p2 / z),
        ((1, 0), p1 * (1 - p2) / z),
    ]


class ProductOmega:
    """Omega1 x Omega2 x ({0,1}^2 minus (1,1)) for the two-factor product."""

    def __init__(self, o1, o2, p1: Fraction, p2: Fraction, r1: int):
        self.o1, self.o2 = o1, o2
        self.r1 = r1
        self.pairs = _pair_weights(p1, p2)
        self.p1f, self.p2f = float(p1), float(p2)
        self.size = None if o1.size is None or o2.size is None else o1.size * o2.size * 3

    def entries(self):
        for w1, psi1 in self.o1.entries():
            for w2, psi2 in self.o2.entries():
                one = psi1[1] | psi2[1] << self.r1
                for (a, b), wp in self.pairs:
                    yield w1 * w2 * wp, (psi1[a] | psi2[b] << self.r1, one)

    def sample(self, rng):
        psi1 = self.o1.sample(rng)
        psi2 = self.o2.sample(rng)
        while True:
            a, b = rng.random() < self.p1f, rng.random() < self.p2f
            if not (a and b):
                break
        return (psi1[int(a)] | psi2[int(b)] << self.r1, psi1[1] | psi2[1] << self.r1)


# ---------------------------------------------------------------------------
# Embedding objects


class LocalEmbedding:
    """An r-local embedding of ([m], mu1); mu2 = None means the uniform cube."""

    def __init__(
        self,
        r: int,
        m: int,
        mu1: Sequence[Fraction],
        phi: Callable[[int], int],
        omega,
        mu2: Sequence[Fraction] | None = None,
        sampler_spec: str | None = None,
    ):
        self.r = r
        self.m = m
        self.mu1 = tuple(Fraction(v) for v in mu1)
        if len(self.mu1) != m or sum(self.mu1) != 1:
            raise EmbeddingError("mu1 must be a distribution over [m]")
        self._phi = phi
        self.omega = omega
        self.mu2 = None if mu2 is None else tuple(Fraction(v) for v in mu2)
        if self.mu2 is not None and (len(self.mu2) != 1 << r or sum(self.mu2) != 1):
            raise EmbeddingError("mu2 must be a distribution over the r-cube")
        self.sampler_spec = sampler_spec
        self._table: np.ndarray | None = None

    @property
    def relaxed(self) -> bool:
        return self.mu2 is not None

    def phi(self, x: int) -> int:
        return self._phi(x)

    def phi_table(self) -> np.ndarray:
        if self._table is None:
            if self.r > MAX_PHI_TABLE_BITS:
                raise EmbeddingError(f"phi table requires r <= {MAX_PHI_TABLE_BITS}")
            self._table = np.fromiter(
                (self._phi(x) for x in range(1 << self.r)), dtype=np.int16, count=1 << self.r
            )
        return self._table

    def cube_mass(self, x: int) -> Fraction:
        return self.mu2[x] if self.mu2 is not None else Fraction(1, 1 << self.r)

    def sample_psi(self, rng: np.random.Generator) -> tuple[int, ...]:
        return self.omega.sample(rng)

    def __repr__(self) -> str:
        kind = "RelaxedEmbedding" if self.relaxed else "LocalEmbedding"
        return f"{kind}(r={self.r}, m={self.m})"


def and_embedding(r: int) -> LocalEmbedding:
    """phi = AND of r bits; embeds the 2^-r-biased bit."""
    if not 1 <= r <= 20:
        raise EmbeddingError(f"and_embedding needs 1 <= r <= 20, got {r}")
    full = (1 << r) - 1
    mu1 = (1 - Fraction(1, 1 << r), Fraction(1, 1 << r))
    return LocalEmbedding(
        r, 2, mu1, lambda x: int(x == full), AndOmega(r), sampler_spec=f"and {r}"
    )


def complement_embedding(e: LocalEmbedding) -> LocalEmbedding:
    """Bias p -> 1-p by flipping both the cube and the output bit."""
    if e.m != 2:
        raise EmbeddingError("complement embedding is defined for m = 2")
    if e.relaxed:
        raise EmbeddingError("complement of a relaxed embedding is not supported")
    full = (1 << e.r) - 1
    inner_phi = e._phi
    spec = f"complement ({e.sampler_spec})" if e.sampler_spec else None
    return LocalEmbedding(
        e.r,
        2,
        (e.mu1[1], e.mu1[0]),
        lambda x: 1 - inner_phi(full ^ x),
        ComplementOmega(e.omega, e.r),
        sampler_spec=spec,
    )


def product_embedding(e1: LocalEmbedding, e2: LocalEmbedding) -> LocalEmbedding:
    """Embed the product bias p1*p2 on r1+r2 bits via phi(x, y) = phi1(x) and phi2(y)."""
    if e1.m != 2 or e2.m != 2:
        raise EmbeddingError("product embedding needs m = 2 factors")
    if e1.relaxed or e2.relaxed:
        raise EmbeddingError("product of relaxed embeddings is not supported")
    r1, r2 = e1.r, e2.r
    p1, p2 = e1.mu1[1], e2.mu1[1]
    mask1 = (1 << r1) - 1
    phi1, phi2 = e1._phi, e2._phi
    return LocalEmbedding(
        r1 + r2,
        2,
        (1 - p1 * p2, p1 * p2),
        lambda x: phi1(x & mask1) & phi2(x >> r1),
        ProductOmega(e1.omega, e2.omega, p1, p2, r1),
    )


# ---------------------------------------------------------------------------
# Bias approximation (dyadic-product greedy) and its chain embedding


@dataclass(frozen=True)
class BiasApproximation:
    """Greedy exponent vector with q(a) = prod_i (1 - 2^-i)^(a_i) >= p."""

    original: Fraction  # the requested bias
    reduced: Fraction  # min(p, 1-p); the vector approximates this
    delta: Fraction
    n: int
    s: int
    a: tuple[int, ...]
    q: Fraction  # q(a), the achieved bias for the reduced target
    complemented: bool

    @property
    def bias(self) -> Fraction:
        """Bias of the returned embedding (for the original p)."""
        return 1 - self.q if self.complemented else self.q


class BiasChainOmega:
    """Omega of the left-fold product over the chain's factors."""

    def __init__(self, chain: "BiasChainEmbedding"):
        self.chain = chain
        size = 1
        for _, width, _ in chain.factors:
            size *= (1 << width) - 1
        self.size = size * 3 ** (len(chain.factors) - 1)

    def _factor_entries(self, kind, width):
        w = Fraction(1, (1 << width) - 1)
        full = (1 << width) - 1
        if kind == "and":
            for mask in range(full):
                yield w, (mask, full)
        else:  # complement of AND: psi(0) = 0, psi(1) nonzero
            for mask in range(1, full + 1):
                yield w, (0, mask)

    def entries(self):
        chain = self.chain
        kind0, width0, _ = chain.factors[0]
        acc = [(w, psi, psi[1]) for w, psi in self._factor_entries(kind0, width0)]
        for k in range(1, len(chain.factors)):
            kind, width, offset = chain.factors[k]
            pairs = _pair_weights(chain.prefix_bias[k - 1], chain.biases[k])
            nxt = []
            for w1, psi1, one1 in acc:
                for w2, psi2 in self._factor_entries(kind, width):
                    one = one1 | psi2[1] << offset
                    for (a, b), wp in pairs:
                        nxt.append((w1 * w2 * wp, (psi1[a] | psi2[b] << offset, one), one))
            acc = nxt
        for w, psi, _ in acc:
            yield w, psi

    def _factor_psi(self, rng, kind, width):
        full = (1 << width) - 1
        if kind == "and":
            return (_random_nonfull(rng, width), full)
        return (0, full ^ _random_nonfull(rng, width))

    def sample(self, rng):
        chain = self.chain
        factors = chain.factors
        ones = 0
        parts = []
        psis = []
        for kind, width, offset in factors:
            psi = self._factor_psi(rng, kind, width)
            psis.append(psi)
            ones |= psi[1] << offset
        v = 0
        zero = 0
        for k in range(len(factors) - 1, 0, -1):
            _, _, offset = factors[k]
            if v == 1:
                zero |= psis[k][1] << offset
                continue
            q_left = float(chain.prefix_bias[k - 1])
            q_k = float(chain.biases[k])
            while True:
                a, b = rng.random() < q_left, rng.random() < q_k
                if not (a and b):
                    break
            zero |= psis[k][int(b)] << offset
            v = int(a)
        zero |= psis[0][v] << factors[0][2]
        return (zero, ones)


class BiasChainEmbedding(LocalEmbedding):
    """Left fold of AND factors and complemented-AND factors, flattened.

    factors[k] = (kind, width, offset): "and" contributes bias 2^-width and
    tests bits == all-ones; "or" (the complement of an AND) contributes bias
    1 - 2^-width and tests bits != 0.  phi is the conjunction of all factor
    values, evaluated in one pass over the flat list.
    """

    def __init__(self, factor_kinds: Sequence[tuple[str, int]]):
        factors = []
        biases = []
        offset = 0
        for kind, width in factor_kinds:
            factors.append((kind, width, offset))
            offset += width
            b = Fraction(1, 1 << width)
            biases.append(b if kind == "and" else 1 - b)
        self.factors = tuple(factors)
        self.biases = tuple(biases)
        prefix = []
        acc = Fraction(1)
        for b in self.biases:
            acc *= b
            prefix.append(acc)
        self.prefix_bias = tuple(prefix)
        p = prefix[-1]
        spec = "bias-chain " + ",".join(f"{kind}:{width}" for kind, width in factor_kinds)
        super().__init__(
            offset, 2, (1 - p, p), self._phi_flat, BiasChainOmega(self), sampler_spec=spec
        )

    def _phi_flat(self, x: int) -> int:
        for kind, width, offset in self.factors:
            bits = (x >> offset) & ((1 << width) - 1)
            if kind == "and":
                if bits != (1 << width) - 1:
                    return 0
            elif bits == 0:
                return 0
        return 1


def _greedy_digits(p: Fraction, s: int) -> tuple[tuple[int, ...], Fraction]:
    """The greedy exponent vector for p <= 1/2 and its achieved value q(a)."""
    k = 1
    while Fraction(1, 1 << (k + 1)) >= p:
        k += 1
    if k >= s:
        return (s,) + (0,) * (s - 1), Fraction(1, 1 << s)
    a = [k] + [0] * (s - 1)
    q = Fraction(1, 1 << k)
    for i in range(2, s + 1):
        step = Fraction((1 << i) - 1, 1 << i)
        while q * step >= p:
            q *= step
            a[i - 1] += 1
        if a[i - 1] > 3:
            raise AssertionError(f"greedy digit a_{i} = {a[i - 1]} exceeds 3")
    return tuple(a), q


def approx_bias(p, delta, n: int) -> tuple[BiasApproximation, LocalEmbedding]:
    """Embed a bias p' with |p - p'| <= delta / n^10, by a product of dyadic factors.

    Reduces to p <= 1/2 (complementing at the end if needed), then greedily
    picks exponents a with q(a) = prod (1 - 2^-i)^(a_i) >= p as large as
    possible, over s = ceil(10 log2(n / delta)) factor indices.
    """
    p = Fraction(p)
    delta = Fraction(delta)
    if not 0 < p < 1:
        raise EmbeddingError(f"bias must lie in (0, 1), got {p}")
    if delta <= 0 or n < 1:
        raise EmbeddingError("need delta > 0 and n >= 1")
    complemented = p > Fraction(1, 2)
    reduced = 1 - p if complemented else p
    s = max(1, math.ceil(10 * math.log2(n / delta)))
    a, q = _greedy_digits(reduced, s)
    approx = BiasApproximation(
        original=p, reduced=reduced, delta=delta, n=n, s=s, a=a, q=q, complemented=complemented
    )
    kinds: list[tuple[str, int]] = [("and", a[0])]
    for i in range(2, s + 1):
        kinds.extend(("or", i) for _ in range(a[i - 1]))
    chain = BiasChainEmbedding(kinds)
    assert chain.mu1[1] == q
    embedding = complement_embedding(chain) if complemented else chain
    return approx, embedding


# ---------------------------------------------------------------------------
# Symmetric (threshold) embeddings


@dataclass(frozen=True)
class ThresholdMap:
    """Monotone symmetric map {0,1}^r -> [m] cut by Hamming-weight thresholds.

    Segment a covers weights (t_a, t_{a+1}] with t_0 = -1 implied, so
    value 0 <=> weight <= thresholds[0] and value m-1 <=> weight > thresholds[-1].
    """

    r: int
    m: int
    thresholds: tuple[int, ...]

    def __post_init__(self):
        t = self.thresholds
        if len(t) != self.m - 1:
            raise EmbeddingError(f"need {self.m - 1} thresholds, got {len(t)}")
        if any(t[i] >= t[i + 1] for i in range(len(t) - 1)):
            raise EmbeddingError("thresholds must be strictly increasing")
        if t and (t[0] < 0 or t[-1] >= self.r):
            raise EmbeddingError("thresholds must lie in [0, r-1] so every value is attained")

    def segments(self) -> list[tuple[int, int]]:
        lows = [0] + [t + 1 for t in self.thresholds]
        highs = list(self.thresholds) + [self.r]
        return list(zip(lows, highs))

    def value(self, weight: int) -> int:
        v = 0
        for t in self.thresholds:
            if weight > t:
                v += 1
        return v

    def __call__(self, x: int) -> int:
        return self.value(x.bit_count())

    def pushforward(self) -> tuple[Fraction, ...]:
        total = 1 << self.r
        out = []
        for lo, hi in self.segments():
            out.append(Fraction(sum(math.comb(self.r, w) for w in range(lo, hi + 1)), total))
        return tuple(out)


def _tv_distance(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    return sum((abs(a - b) for a, b in zip(p, q)), Fraction(0)) / 2


def best_threshold_map(r: int, m: int) -> ThresholdMap:
    """Thresholds minimizing the total-variation distance of T(U) to uniform on [m].

    Exact rational comparison; ties go to the lexicographically smallest
    threshold tuple.
    """
    if m > r + 1:
        raise EmbeddingError(f"m = {m} values need at least {m - 1} thresholds below r = {r}")
    uniform = [Fraction(1, m)] * m
    best: tuple[Fraction, tuple[int, ...]] | None = None
    for thresholds in combinations(range(r), m - 1):
        t = ThresholdMap(r, m, thresholds)
        d = _tv_distance(t.pushforward(), uniform)
        if best is None or (d, thresholds) < best:
            best = (d, thresholds)
    return ThresholdMap(r, m, best[1])


def threshold_map_divergences(t: ThresholdMap) -> dict[str, float | Fraction]:
    """TV (exact), KL and squared Hellinger (floats) between T(U) and uniform."""
    push = t.pushforward()
    uni = Fraction(1, t.m)
    kl = sum(float(p) * math.log(float(p) / float(uni)) for p in push if p > 0)
    hell = 1.0 - sum(math.sqrt(float(p) * float(uni)) for p in push)
    return {"tv": _tv_distance(push, [uni] * t.m), "kl": kl, "hellinger2": hell}


class SymmetricOmega:
    """Chains through one uniformly weighted vertex per preimage layer range.

    A uniformly random monotone path visits one vertex per Hamming weight; the
    section at value a sits at a weight drawn like |z| for z uniform in
    T^-1(a).  Collapsing (path, weights) to the visited chain keeps the joint
    law of the sections and makes exact enumeration feasible.
    """

    def __init__(self, tmap: ThresholdMap):
        self.tmap = tmap
        r = tmap.r
        self.layer_totals = [
            sum(math.comb(r, w) for w in range(lo, hi + 1)) for lo, hi in tmap.segments()
        ]
        self.size = self._count_chains()

    def _weight_tuples(self):
        segs = self.tmap.segments()

        def rec(a, prefix):
            if a == len(segs):
                yield tuple(prefix)
                return
            lo, hi = segs[a]
            for t in range(lo, hi + 1):
                prefix.append(t)
                yield from rec(a + 1, prefix)
                prefix.pop()

        yield from rec(0, [])

    def _count_chains(self) -> int:
        r = self.tmap.r
        total = 0
        for ts in self._weight_tuples():
            c = 1
            prev = 0
            for t in ts:
                c *= math.comb(r - prev, t - prev)
                prev = t
            total += c
        return total

    def _tuple_weight(self, ts: tuple[int, ...]) -> Fraction:
        """P(weight tuple) x P(one specific chain | weight tuple)."""
        r = self.tmap.r
        w = Fraction(1)
        for a, t in enumerate(ts):
            w *= Fraction(math.comb(r, t), self.layer_totals[a])
        paths = math.factorial(ts[0])
        for i in range(1, len(ts)):
            paths *= math.factorial(ts[i] - ts[i - 1])
        paths *= math.factorial(r - ts[-1])
        return w * Fraction(paths, math.factorial(r))

    def entries(self):
        r = self.tmap.r
        for ts in self._weight_tuples():
            w = self._tuple_weight(ts)

            def chains(level, base, prev):
                if level == len(ts):
                    yield ()
                    return
                need = ts[level] - prev
                free = [i for i in range(r) if not (base >> i) & 1]
                for add in combinations(free, need):
                    nxt = base | sum(1 << i for i in add)
                    for rest in chains(level + 1, nxt, ts[level]):
                        yield (nxt,) + rest

            for chain in chains(0, 0, 0):
                yield w, chain

    def sample(self, rng):
        r = self.tmap.r
        order = rng.permutation(r)
        prefix = [0] * (r + 1)
        for i, bit in enumerate(order):
            prefix[i + 1] = prefix[i] | (1 << int(bit))
        psi = []
        for a, (lo, hi) in enumerate(self.tmap.segments()):
            weights = np.array([math.comb(r, w) for w in range(lo, hi + 1)], dtype=float)
            t = lo + int(rng.choice(len(weights), p=weights / weights.sum()))
            psi.append(prefix[t])
        return tuple(psi)


def symmetric_embedding(tmap: ThresholdMap) -> LocalEmbedding:
    """Embed T(U) for a monotone symmetric threshold map T."""
    return LocalEmbedding(
        tmap.r,
        tmap.m,
        tmap.pushforward(),
        tmap,
        SymmetricOmega(tmap),
        sampler_spec="symmetric " + ",".join(str(t) for t in tmap.thresholds),
    )


# ---------------------------------------------------------------------------
# Lifting


class LiftedFunction:
    """g(x(1),...,x(n)) = f(phi(x(1)),...,phi(x(n))) as a lazy oracle.

    One query to g makes exactly one query to f, so wrapping f in a
    CountingOracle before lifting gives exact query accounting.
    """

    def __init__(self, f, e: LocalEmbedding, n: int | None = None):
        if isinstance(f, DenseBooleanFunction):
            if f.domain.m != e.m:
                raise EmbeddingError(
                    f"embedding alphabet {e.m} does not match function alphabet {f.domain.m}"
                )
            n = f.domain.n
        elif n is None:
            raise EmbeddingError("lifting a bare callable requires the arity n")
        self.f = f
        self.e = e
        self.n = n
        self.bits = e.r * n
        self._mask = (1 << e.r) - 1
        table = None
        if e.r <= MAX_PHI_TABLE_BITS:
            table = e.phi_table()
        self._phi_table = table

    def __call__(self, x: int) -> int:
        r, n, mask = self.e.r, self.n, self._mask
        table = self._phi_table
        if table is not None:
            values = [int(table[(x >> (i * r)) & mask]) for i in range(n)]
        else:
            phi = self.e._phi
            values = [phi((x >> (i * r)) & mask) for i in range(n)]
        if self.e.m == 2:
            point = 0
            for i, v in enumerate(values):
                point |= v << i
            return self.f(point)
        return self.f(tuple(values))

    def project(self, x: int):
        """The base-domain image of a lifted point under phi applied blockwise."""
        r, n, mask = self.e.r, self.n, self._mask
        values = [self.e._phi((x >> (i * r)) & mask) for i in range(n)]
        if self.e.m == 2:
            point = 0
            for i, v in enumerate(values):
                point |= v << i
            return point
        return tuple(values)

    def materialize(self) -> DenseBooleanFunction:
        if self.bits > 22:
            raise EmbeddingError(f"dense lift needs r*n <= 22, got {self.bits}")
        dom = CubeDomain(self.bits)
        return DenseBooleanFunction(dom, [self(x) for x in range(dom.size)])


def lift(f, e: LocalEmbedding, n: int | None = None) -> LiftedFunction:
    """Lift f over [m]^n across the embedding to an oracle over {0,1}^(r n)."""
    return LiftedFunction(f, e, n)


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class AxiomResult:
    passed: bool
    exact: bool
    detail: str
    max_dev: float = 0.0


@dataclass(frozen=True)
class EmbeddingReport:
    """Outcome of the four-axiom check; exact when Omega was enumerable."""

    axioms: tuple[AxiomResult, AxiomResult, AxiomResult, AxiomResult]

    @property
    def ok(self) -> bool:
        return all(a.passed for a in self.axioms)

    def summary(self) -> str:
        lines = []
        for i, a in enumerate(self.axioms, start=1):
            mode = "exact" if a.exact else "sampled"
            status = "pass" if a.passed else "FAIL"
            lines.append(f"axiom {i}: {status} ({mode}) {a.detail}")
        return "\n".join(lines)


def _psi_monotone(psi: tuple[int, ...]) -> bool:
    return all(psi[a] & ~psi[a + 1] == 0 for a in range(len(psi) - 1))


def verify_embedding(
    e: LocalEmbedding,
    rng: np.random.Generator | None = None,
    sample_trials: int = 10**5,
    enum_limit: int = DEFAULT_ENUM_LIMIT,
) -> EmbeddingReport:
    """Check the four embedding axioms, exactly when the spaces are enumerable.

    Exact mode requires r <= 16 (full cube scans) and an Omega of at most
    enum_limit outcomes; otherwise the corresponding axioms are checked on
    sample_trials seeded draws and flagged as sampled.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    exact = e.omega.size is not None and e.omega.size <= enum_limit and e.r <= MAX_PHI_TABLE_BITS
    cube = 1 << e.r

    if exact:
        table = e.phi_table()
        bad_phi = 0
        for x in range(cube):
            v = table[x]
            y = x
            free = ((1 << e.r) - 1) ^ x
            while free:
                b = free & -free
                if table[x | b] < v:
                    bad_phi += 1
                free ^= b
        bad_psi = sum(1 for _, psi in e.omega.entries() if not _psi_monotone(psi))
        ax1 = AxiomResult(
            bad_phi == 0 and bad_psi == 0,
            True,
            f"{bad_phi} phi violations, {bad_psi} non-monotone sections",
        )

        push = [Fraction(0)] * e.m
        for x in range(cube):
            push[int(table[x])] += e.cube_mass(x)
        dev2 = max(abs(push[a] - e.mu1[a]) for a in range(e.m))
        ax2 = AxiomResult(dev2 == 0, True, f"pushforward max deviation {dev2}", float(dev2))

        pull: dict[int, Fraction] = {}
        for w, psi in e.omega.entries():
            for a in range(e.m):
                pull[psi[a]] = pull.get(psi[a], Fraction(0)) + w * e.mu1[a]
        dev3 = Fraction(0)
        for x in range(cube):
            dev3 = max(dev3, abs(pull.get(x, Fraction(0)) - e.cube_mass(x)))
        ax3 = AxiomResult(dev3 == 0, True, f"section-pullback max deviation {dev3}", float(dev3))

        bad4 = sum(
            1
            for _, psi in e.omega.entries()
            for a in range(e.m)
            if int(table[psi[a]]) != a
        )
        ax4 = AxiomResult(bad4 == 0, True, f"{bad4} identity violations")
        return EmbeddingReport((ax1, ax2, ax3, ax4))

    # Sampled mode: statistical evidence only, clearly flagged.
    bad_psi = 0
    bad4 = 0
    ones = np.zeros(e.r, dtype=np.int64)
    mu1_cdf = np.cumsum([float(v) for v in e.mu1])
    for _ in range(sample_trials):
        psi = e.omega.sample(rng)
        if not _psi_monotone(psi):
            bad_psi += 1
        a = min(int(np.searchsorted(mu1_cdf, rng.random(), side="right")), e.m - 1)
        if e.phi(psi[a]) != a:
            bad4 += 1
        z = psi[a]
        for i in range(e.r):
            ones[i] += (z >> i) & 1
    freq_dev = float(np.max(np.abs(ones / sample_trials - 0.5)))
    # Bound on the max of r near-Gaussian deviations, plus 3 sigma of slack.
    sigma = 1.0 / (2.0 * math.sqrt(sample_trials))
    threshold = sigma * (3.0 + math.sqrt(2.0 * math.log(e.r + 1)))
    ax1 = AxiomResult(bad_psi == 0, False, f"{bad_psi} non-monotone sections in {sample_trials} draws")
    ax2 = AxiomResult(True, False, "pushforward not sampled (phi structural); see axiom 3")
    ax3 = AxiomResult(
        freq_dev <= threshold,
        False,
        f"per-bit frequency max deviation {freq_dev:.5f} (threshold {threshold:.5f})",
        freq_dev,
    )
    ax4 = AxiomResult(bad4 == 0, False, f"{bad4} identity violations in {sample_trials} draws")
    return EmbeddingReport((ax1, ax2, ax3, ax4))
