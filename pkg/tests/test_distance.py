import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from monoembed.distance import (
    brute_force_distance,
    distance_to_monotone,
    isoperimetry_report,
    neg_sensitivity,
    sensitivity_mass_profile,
    talagrand_objective,
)
from monoembed.domain import (
    CubeDomain,
    DenseBooleanFunction,
    GridDomain,
    ProductMeasure,
    iter_monotone_functions,
    random_function,
)

XOR2 = DenseBooleanFunction(CubeDomain(2), [0, 1, 1, 0])


def test_distance_monotone_input_is_zero():
    for f in iter_monotone_functions(CubeDomain(3)):
        cert = distance_to_monotone(f)
        assert cert.epsilon == 0
        assert cert.witness == f
        assert brute_force_distance(f) == 0


def test_distance_xor():
    cert = distance_to_monotone(XOR2)
    assert cert.epsilon == Fraction(1, 4)
    assert list(cert.witness.table) == [0, 1, 1, 1]  # OR
    assert cert.check(XOR2, ProductMeasure.uniform(CubeDomain(2)))
    # brute force over all 6 monotone functions agrees
    assert brute_force_distance(XOR2) == Fraction(1, 4)


def test_distance_anti_dictator():
    f1 = DenseBooleanFunction(CubeDomain(1), [1, 0])
    cert = distance_to_monotone(f1)
    assert cert.epsilon == Fraction(1, 2)
    # canonical witness: the maximal sink side, i.e. the all-zeros relabeling
    assert list(cert.witness.table) == [0, 0]
    f3 = DenseBooleanFunction.from_callable(CubeDomain(3), lambda x: 1 - (x & 1))
    assert brute_force_distance(f3) == Fraction(1, 2)
    assert distance_to_monotone(f3).epsilon == Fraction(1, 2)


def test_epsilon_zero_iff_monotone_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f = random_function(CubeDomain(4), rng)
        eps = distance_to_monotone(f).epsilon
        assert (eps == 0) == f.is_monotone()


@pytest.mark.parametrize(
    "domain,mu",
    [
        (CubeDomain(4), None),
        (CubeDomain(4), ProductMeasure.p_biased(4, Fraction(2, 5))),
        (GridDomain(3, 2), None),
    ],
)
def test_mincut_equals_bruteforce_random(domain, mu):
    rng = np.random.default_rng(11)
    for _ in range(100):
        f = random_function(domain, rng)
        cert = distance_to_monotone(f, mu)
        assert cert.epsilon == brute_force_distance(f, mu)
        assert cert.witness.is_monotone()
        measure = mu if mu is not None else ProductMeasure.uniform(domain)
        assert cert.check(f, measure)


def test_witness_monotone_on_grid():
    rng = np.random.default_rng(5)
    for _ in range(30):
        f = random_function(GridDomain(3, 3), rng)
        cert = distance_to_monotone(f)
        assert cert.witness.is_monotone()
        delta = sum(ProductMeasure.uniform(f.domain).measure_of(x) for x in cert.changed)
        assert delta == cert.epsilon


def test_neg_sensitivity_examples():
    assert neg_sensitivity(XOR2, 0b11) == 2
    assert neg_sensitivity(XOR2, 0b00) == 0
    for f in iter_monotone_functions(CubeDomain(3)):
        assert all(neg_sensitivity(f, x) == 0 for x in range(8))


def test_neg_sensitivity_bounds_and_characterization():
    rng = np.random.default_rng(9)
    for _ in range(50):
        f = random_function(CubeDomain(4), rng)
        sens = [neg_sensitivity(f, x) for x in range(16)]
        assert all(0 <= s <= 4 for s in sens)
        assert (max(sens) == 0) == f.is_monotone()
    for _ in range(30):
        f = random_function(GridDomain(3, 2), rng)
        sens = [neg_sensitivity(f, x) for x in f.domain.points()]
        assert (max(sens) == 0) == f.is_monotone()


def test_neg_sensitivity_grid_readings():
    # f on [3]^1: f(0)=0, f(1)=1, f(2)=0.  At x=2 the covering neighbor x-1
    # has f=1; at x=0 only the "any" reading sees nothing below.
    f = DenseBooleanFunction(GridDomain(3, 1), [0, 1, 0])
    assert neg_sensitivity(f, (2,), "covering") == 1
    assert neg_sensitivity(f, (2,), "any") == 1
    # g(0)=1, g(1)=1, g(2)=0: at x=0 (value 1) the covering neighbor x+1 has
    # g=1 (no violation) but the far point x=2 has g=0.
    g = DenseBooleanFunction(GridDomain(3, 1), [1, 1, 0])
    assert neg_sensitivity(g, (0,), "covering") == 0
    assert neg_sensitivity(g, (0,), "any") == 1


def test_talagrand_objective_examples():
    assert talagrand_objective(DenseBooleanFunction(CubeDomain(2), [0, 0, 0, 1])) == 0.0
    expected = (0 + 1 + 1 + math.sqrt(2)) / 4
    assert talagrand_objective(XOR2) == pytest.approx(expected, abs=1e-12)
    anti = DenseBooleanFunction.from_callable(CubeDomain(2), lambda x: 1 - (x >> 1))
    assert talagrand_objective(anti) == pytest.approx(1.0, abs=1e-12)
    anti8 = DenseBooleanFunction.from_callable(CubeDomain(8), lambda x: 1 - (x & 1))
    assert talagrand_objective(anti8) == pytest.approx(1.0, abs=1e-12)


def test_sensitivity_mass_profile_is_exact():
    profile = sensitivity_mass_profile(XOR2)
    assert profile == {0: Fraction(1, 4), 1: Fraction(1, 2), 2: Fraction(1, 4)}


def test_isoperimetry_report():
    rep = isoperimetry_report(DenseBooleanFunction(CubeDomain(2), [0, 0, 0, 1]))
    assert rep.epsilon == 0 and rep.ratio is None and rep.objective == 0.0
    rep = isoperimetry_report(XOR2)
    assert rep.epsilon == Fraction(1, 4)
    assert rep.objective == pytest.approx((2 + math.sqrt(2)) / 4, abs=1e-12)
    expected_ratio = rep.objective * math.log(2 / 0.25) / 0.25
    assert rep.ratio == pytest.approx(expected_ratio)
    anti8 = DenseBooleanFunction.from_callable(CubeDomain(8), lambda x: 1 - (x & 1))
    rep8 = isoperimetry_report(anti8)
    assert rep8.epsilon == Fraction(1, 2) and rep8.objective == pytest.approx(1.0)
    grid_rep = isoperimetry_report(
        DenseBooleanFunction.from_callable(GridDomain(3, 2), lambda x: int(x[0] == 0))
    )
    assert grid_rep.form == "grid" and grid_rep.ratio > 0


def test_objective_dominates_scaled_distance():
    # Measured inequality shape: objective * log(n/eps) / eps stays above a
    # positive constant across a random corpus.
    rng = np.random.default_rng(21)
    ratios = []
    for _ in range(40):
        f = random_function(CubeDomain(5), rng)
        rep = isoperimetry_report(f)
        if rep.ratio is not None:
            ratios.append(rep.ratio)
    assert ratios and min(ratios) > 0
