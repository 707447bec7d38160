import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from monoembed.domain import (
    CountingOracle,
    CubeDomain,
    DenseBooleanFunction,
    DomainMismatchError,
    GridDomain,
    ProductMeasure,
    enumerate_slice,
    iter_monotone_functions,
    leq,
)


def test_leq_examples():
    c2 = CubeDomain(2)
    assert leq(c2, 0b00, 0b11)
    assert not leq(c2, 0b01, 0b10)
    g = GridDomain(3, 2)
    assert leq(g, (0, 2), (1, 2))
    with pytest.raises(DomainMismatchError):
        leq(c2, 0b01, (0, 1))


@pytest.mark.parametrize("domain", [CubeDomain(3), CubeDomain(4), GridDomain(3, 2), GridDomain(3, 3)])
def test_leq_is_partial_order(domain):
    points = list(domain.points())
    for x in points:
        assert domain.leq(x, x)
    for x, y in product(points, repeat=2):
        if domain.leq(x, y) and domain.leq(y, x):
            assert x == y
    for x, y, z in product(points, repeat=3):
        if domain.leq(x, y) and domain.leq(y, z):
            assert domain.leq(x, z)


def test_enumerate_slice():
    assert list(enumerate_slice(3, 0)) == [0]
    assert list(enumerate_slice(3, 1)) == [0b001, 0b010, 0b100]
    assert len(list(enumerate_slice(4, 2))) == 6
    with pytest.raises(ValueError):
        list(enumerate_slice(3, 4))


@pytest.mark.parametrize("n", [1, 4, 8])
def test_slice_sizes_sum_to_cube(n):
    total = sum(len(list(enumerate_slice(n, k))) for k in range(n + 1))
    assert total == 1 << n
    for k in range(n + 1):
        pts = list(enumerate_slice(n, k))
        assert pts == sorted(pts)
        assert all(x.bit_count() == k for x in pts)


def test_measure_of_examples():
    mu = ProductMeasure.p_biased(2, Fraction(1, 4))
    assert mu.measure_of(0b11) == Fraction(1, 16)
    u3 = ProductMeasure.uniform(GridDomain(3, 2))
    assert u3.measure_of((1, 2)) == Fraction(1, 9)
    mu_half = ProductMeasure.p_biased(6, Fraction(1, 2))
    assert all(mu_half.measure_of(x) == Fraction(1, 64) for x in range(64))


@pytest.mark.parametrize(
    "mu",
    [
        ProductMeasure.p_biased(6, Fraction(2, 7)),
        ProductMeasure.uniform(GridDomain(3, 4)),
        ProductMeasure(GridDomain(4, 2), [[Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10)]] * 2),
    ],
)
def test_total_mass_is_exactly_one(mu):
    masses = mu.masses_by_rank()
    assert sum(masses) == 1
    # masses_by_rank agrees with measure_of pointwise
    for x in mu.domain.points():
        assert masses[mu.domain.rank(x)] == mu.measure_of(x)


def test_measure_rejects_unnormalized():
    with pytest.raises(ValueError):
        ProductMeasure(CubeDomain(1), [[Fraction(1, 2), Fraction(1, 3)]])


def test_point_mass_sampling():
    mu = ProductMeasure.p_biased(5, Fraction(1))
    rng = np.random.default_rng(0)
    assert all(mu.sample_point(rng) == 0b11111 for _ in range(100))


def test_sampling_binomial_mean():
    mu = ProductMeasure.p_biased(8, Fraction(1, 2))
    rng = np.random.default_rng(42)
    draws = 100_000
    mean = sum(mu.sample_point(rng).bit_count() for _ in range(draws)) / draws
    sigma = math.sqrt(8 * 0.25 / draws)
    assert abs(mean - 4.0) <= 3 * sigma


def test_sampling_grid_frequencies():
    mu = ProductMeasure.uniform(GridDomain(3, 1))
    rng = np.random.default_rng(7)
    draws = 100_000
    counts = [0, 0, 0]
    for _ in range(draws):
        counts[mu.sample_point(rng)[0]] += 1
    sigma = math.sqrt(draws * (1 / 3) * (2 / 3))
    for c in counts:
        assert abs(c - draws / 3) <= 3 * sigma


def test_counting_oracle():
    f = DenseBooleanFunction(CubeDomain(2), [0, 1, 1, 0])
    oracle = CountingOracle(f)
    assert oracle.count == 0
    oracle(0b01)
    oracle(0b10)
    assert oracle.count == 2
    oracle.reset()
    assert oracle.count == 0


def test_monotone_enumeration_counts():
    # Dedekind numbers 6, 20, 168 and the 3x3 grid ideal count 20.
    assert sum(1 for _ in iter_monotone_functions(CubeDomain(2))) == 6
    assert sum(1 for _ in iter_monotone_functions(CubeDomain(3))) == 20
    assert sum(1 for _ in iter_monotone_functions(CubeDomain(4))) == 168
    assert sum(1 for _ in iter_monotone_functions(GridDomain(3, 2))) == 20
    for f in iter_monotone_functions(CubeDomain(3)):
        assert f.is_monotone()


def test_dense_function_table_validation():
    with pytest.raises(ValueError):
        DenseBooleanFunction(CubeDomain(2), [0, 1, 2, 0])
    with pytest.raises(ValueError):
        DenseBooleanFunction(CubeDomain(2), [0, 1])
