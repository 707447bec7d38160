"""Points, dense Boolean functions and product measures over {0,1}^n and [m]^n.

Cube points are integer bitmasks (coordinate i = bit i).  Grid points are
tuples of ints in [m] = {0, ..., m-1}.  Both domains rank points in
little-endian mixed radix (rank = sum x_i * m**i), so at m = 2 the grid rank
of a point equals its bitmask.
"""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

#: Hard caps keeping every dense computation comfortably in RAM.
MAX_STREAM_BITS = 30
MAX_DENSE_BITS = 22
MAX_DENSE_POINTS = 1 << 22


class DomainMismatchError(ValueError):
    """Two points or objects live over different domains."""


class DomainTooLargeError(ValueError):
    """The requested dense computation exceeds the desk-scale caps."""


class CubeDomain:
    """The Boolean hypercube {0,1}^n with points stored as bitmasks."""

    kind = "cube"
    m = 2

    __slots__ = ("n", "size", "full_mask")

    def __init__(self, n: int):
        if not 1 <= n <= MAX_STREAM_BITS:
            raise DomainTooLargeError(f"cube dimension must be in [1, {MAX_STREAM_BITS}], got {n}")
        self.n = n
        self.size = 1 << n
        self.full_mask = (1 << n) - 1

    def rank(self, x: int) -> int:
        return x

    def unrank(self, i: int) -> int:
        return i

    def contains(self, x) -> bool:
        return isinstance(x, int) and 0 <= x < self.size

    def coords(self, x: int) -> tuple[int, ...]:
        return tuple((x >> i) & 1 for i in range(self.n))

    def leq(self, x: int, y: int) -> bool:
        return x & ~y == 0

    def points(self) -> range:
        return range(self.size)

    def upper_neighbors(self, x: int) -> Iterator[int]:
        zeros = self.full_mask & ~x
        while zeros:
            b = zeros & -zeros
            yield x | b
            zeros ^= b

    def lower_neighbors(self, x: int) -> Iterator[int]:
        ones = x
        while ones:
            b = ones & -ones
            yield x ^ b
            ones ^= b

    def __eq__(self, other) -> bool:
        return isinstance(other, CubeDomain) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("cube", self.n))

    def __repr__(self) -> str:
        return f"CubeDomain(n={self.n})"


class GridDomain:
    """The hypergrid [m]^n with points stored as coordinate tuples."""

    kind = "grid"

    __slots__ = ("m", "n", "size")

    def __init__(self, m: int, n: int):
        if m < 2 or n < 1:
            raise ValueError(f"grid needs m >= 2 and n >= 1, got m={m}, n={n}")
        size = m**n
        if size > MAX_DENSE_POINTS:
            raise DomainTooLargeError(f"grid {m}^{n} exceeds the {MAX_DENSE_POINTS}-point cap")
        self.m = m
        self.n = n
        self.size = size

    def rank(self, x: Sequence[int]) -> int:
        r = 0
        for i in range(self.n - 1, -1, -1):
            r = r * self.m + x[i]
        return r

    def unrank(self, i: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            i, c = divmod(i, self.m)
            out.append(c)
        return tuple(out)

    def contains(self, x) -> bool:
        return (
            isinstance(x, tuple)
            and len(x) == self.n
            and all(isinstance(c, int) and 0 <= c < self.m for c in x)
        )

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(x)

    def leq(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return all(a <= b for a, b in zip(x, y))

    def points(self) -> Iterator[tuple[int, ...]]:
        for i in range(self.size):
            yield self.unrank(i)

    def upper_neighbors(self, x: Sequence[int]) -> Iterator[tuple[int, ...]]:
        for i, c in enumerate(x):
            if c + 1 < self.m:
                yield tuple(x[:i]) + (c + 1,) + tuple(x[i + 1 :])

    def lower_neighbors(self, x: Sequence[int]) -> Iterator[tuple[int, ...]]:
        for i, c in enumerate(x):
            if c > 0:
                yield tuple(x[:i]) + (c - 1,) + tuple(x[i + 1 :])

    def __eq__(self, other) -> bool:
        return isinstance(other, GridDomain) and (other.m, other.n) == (self.m, self.n)

    def __hash__(self) -> int:
        return hash(("grid", self.m, self.n))

    def __repr__(self) -> str:
        return f"GridDomain(m={self.m}, n={self.n})"


Domain = CubeDomain | GridDomain


def leq(domain: Domain, x, y) -> bool:
    """Coordinate-wise partial order on a product domain."""
    if not (domain.contains(x) and domain.contains(y)):
        raise DomainMismatchError(f"points {x!r}, {y!r} do not both lie in {domain!r}")
    return domain.leq(x, y)


def enumerate_slice(n: int, k: int) -> Iterator[int]:
    """Yield the C(n, k) bitmasks of Hamming weight k in increasing order."""
    if not 0 <= k <= n:
        raise ValueError(f"slice weight k={k} out of range for n={n}")
    if k == 0:
        yield 0
        return
    v = (1 << k) - 1
    limit = 1 << n
    while v < limit:
        yield v
        # Gosper's hack: next-larger integer with the same popcount.
        c = v & -v
        r = v + c
        v = (((r ^ v) >> 2) // c) | r


def slice_size(n: int, k: int) -> int:
    return math.comb(n, k)


class DenseBooleanFunction:
    """A function f: domain -> {0,1} stored as an explicit truth table."""

    __slots__ = ("domain", "table")

    def __init__(self, domain: Domain, table):
        table = np.asarray(table, dtype=np.uint8)
        if table.shape != (domain.size,):
            raise ValueError(f"table length {table.shape} does not match domain size {domain.size}")
        if table.max(initial=0) > 1:
            raise ValueError("table entries must be 0 or 1")
        self.domain = domain
        self.table = table

    @classmethod
    def from_callable(cls, domain: Domain, fn: Callable) -> "DenseBooleanFunction":
        return cls(domain, [int(bool(fn(x))) for x in domain.points()])

    @classmethod
    def constant(cls, domain: Domain, value: int) -> "DenseBooleanFunction":
        return cls(domain, np.full(domain.size, int(value), dtype=np.uint8))

    def __call__(self, x) -> int:
        return int(self.table[self.domain.rank(x)])

    def value_at_rank(self, i: int) -> int:
        return int(self.table[i])

    def is_monotone(self) -> bool:
        dom = self.domain
        for x in dom.points():
            fx = self(x)
            if fx == 0:
                continue
            for y in dom.upper_neighbors(x):
                if self(y) < fx:
                    return False
        return True

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DenseBooleanFunction)
            and other.domain == self.domain
            and bool(np.array_equal(other.table, self.table))
        )

    def __hash__(self):
        return hash((self.domain, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"DenseBooleanFunction({self.domain!r}, <{self.domain.size} entries>)"


class ProductMeasure:
    """A product measure given by one exact rational distribution per coordinate."""

    __slots__ = ("domain", "coord_dists", "_cdfs")

    def __init__(self, domain: Domain, coord_dists: Sequence[Sequence[Fraction]]):
        if len(coord_dists) != domain.n:
            raise ValueError(f"need {domain.n} coordinate distributions, got {len(coord_dists)}")
        dists = []
        for i, dist in enumerate(coord_dists):
            dist = tuple(Fraction(v) for v in dist)
            if len(dist) != domain.m:
                raise ValueError(f"coordinate {i}: expected {domain.m} masses, got {len(dist)}")
            if any(v < 0 for v in dist):
                raise ValueError(f"coordinate {i}: negative mass")
            if sum(dist) != 1:
                raise ValueError(f"coordinate {i}: masses sum to {sum(dist)}, not 1")
            dists.append(dist)
        self.domain = domain
        self.coord_dists = tuple(dists)
        self._cdfs = None

    @classmethod
    def uniform(cls, domain: Domain) -> "ProductMeasure":
        dist = tuple(Fraction(1, domain.m) for _ in range(domain.m))
        return cls(domain, [dist] * domain.n)

    @classmethod
    def p_biased(cls, n: int, p) -> "ProductMeasure":
        p = Fraction(p)
        if not 0 <= p <= 1:
            raise ValueError(f"bias must lie in [0, 1], got {p}")
        dist = (1 - p, p)
        return cls(CubeDomain(n), [dist] * n)

    def measure_of(self, x) -> Fraction:
        if not self.domain.contains(x):
            raise DomainMismatchError(f"point {x!r} not in {self.domain!r}")
        total = Fraction(1)
        for c, dist in zip(self.domain.coords(x), self.coord_dists):
            total *= dist[c]
        return total

    def masses_by_rank(self) -> list[Fraction]:
        """Dense vector of point masses in rank order (product unrolled iteratively)."""
        masses = [Fraction(1)]
        for dist in self.coord_dists:
            masses = [w * dist[c] for c in range(self.domain.m) for w in masses]
        return masses

    def sample_point(self, rng: np.random.Generator):
        """One point distributed per the measure; deterministic given the rng state."""
        if self._cdfs is None:
            self._cdfs = [np.cumsum([float(v) for v in dist]) for dist in self.coord_dists]
        coords = []
        for cdf in self._cdfs:
            coords.append(min(int(np.searchsorted(cdf, rng.random(), side="right")), self.domain.m - 1))
        if self.domain.kind == "cube":
            return sum(b << i for i, b in enumerate(coords))
        return tuple(coords)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ProductMeasure)
            and other.domain == self.domain
            and other.coord_dists == self.coord_dists
        )

    def __repr__(self) -> str:
        return f"ProductMeasure({self.domain!r}, <{self.domain.n} coordinate dists>)"


class CountingOracle:
    """Wraps a function and counts point evaluations; safe to share across threads."""

    def __init__(self, fn: Callable):
        self._fn = fn
        self._count = 0
        self._lock = threading.Lock()

    def __call__(self, x):
        with self._lock:
            self._count += 1
        return self._fn(x)

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


def random_function(domain: Domain, rng: np.random.Generator) -> DenseBooleanFunction:
    """Uniformly random truth table over the domain."""
    return DenseBooleanFunction(domain, rng.integers(0, 2, size=domain.size, dtype=np.uint8))


def iter_monotone_functions(domain: Domain) -> Iterator[DenseBooleanFunction]:
    """All monotone Boolean functions over a small domain, by DFS in rank order.

    Rank order is a linear extension of the product order, so when a point is
    assigned every lower covering neighbor already has a value.
    """
    if domain.size > 512:
        raise DomainTooLargeError("monotone enumeration is capped at 512-point domains")
    points = list(domain.points())
    lower = [[domain.rank(y) for y in domain.lower_neighbors(x)] for x in points]
    table = np.zeros(domain.size, dtype=np.uint8)

    def rec(i: int) -> Iterator[DenseBooleanFunction]:
        if i == len(points):
            yield DenseBooleanFunction(domain, table.copy())
            return
        forced_one = any(table[j] for j in lower[i])
        for v in ((1,) if forced_one else (0, 1)):
            table[i] = v
            yield from rec(i + 1)
        table[i] = 0

    yield from rec(0)
