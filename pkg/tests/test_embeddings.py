import math
from fractions import Fraction

import numpy as np
import pytest

from monoembed.distance import distance_to_monotone, neg_sensitivity
from monoembed.domain import (
    CountingOracle,
    CubeDomain,
    DenseBooleanFunction,
    GridDomain,
    ProductMeasure,
    iter_monotone_functions,
    random_function,
)
from monoembed.embeddings import (
    BiasChainEmbedding,
    EmbeddingError,
    LocalEmbedding,
    OmegaEnum,
    ThresholdMap,
    _greedy_digits,
    and_embedding,
    approx_bias,
    best_threshold_map,
    complement_embedding,
    lift,
    product_embedding,
    symmetric_embedding,
    threshold_map_divergences,
    verify_embedding,
)


def assert_exact_pass(e):
    report = verify_embedding(e)
    assert report.ok, report.summary()
    assert all(a.exact for a in report.axioms), report.summary()


@pytest.mark.parametrize("r", [1, 2, 3, 5, 8])
def test_and_embedding_axioms(r):
    e = and_embedding(r)
    assert e.mu1[1] == Fraction(1, 1 << r)
    assert_exact_pass(e)


def test_and_embedding_r1_is_identity():
    e = and_embedding(1)
    assert [e.phi(0), e.phi(1)] == [0, 1]
    assert e.mu1 == (Fraction(1, 2), Fraction(1, 2))


def test_complement_embedding():
    c = complement_embedding(and_embedding(1))
    assert c.mu1[1] == Fraction(1, 2)
    assert_exact_pass(c)
    c2 = complement_embedding(and_embedding(2))
    assert c2.mu1[1] == Fraction(3, 4)
    assert_exact_pass(c2)
    double = complement_embedding(c2)
    assert double.mu1 == and_embedding(2).mu1
    assert_exact_pass(double)


def test_product_embedding():
    p = product_embedding(and_embedding(1), and_embedding(1))
    assert p.r == 2 and p.mu1[1] == Fraction(1, 4)
    assert_exact_pass(p)
    q = product_embedding(and_embedding(1), complement_embedding(and_embedding(2)))
    assert q.r == 3 and q.mu1[1] == Fraction(3, 8)
    assert_exact_pass(q)
    # pushforward commutes with the product: bias multiplies exactly
    a, b = and_embedding(2), complement_embedding(and_embedding(3))
    assert product_embedding(a, b).mu1[1] == a.mu1[1] * b.mu1[1]


def test_chain_embedding_matches_folded_products():
    chain = BiasChainEmbedding([("and", 1), ("or", 2), ("or", 3)])
    folded = product_embedding(
        product_embedding(and_embedding(1), complement_embedding(and_embedding(2))),
        complement_embedding(and_embedding(3)),
    )
    assert chain.mu1 == folded.mu1
    assert [chain.phi(x) for x in range(1 << chain.r)] == [
        folded.phi(x) for x in range(1 << folded.r)
    ]
    assert_exact_pass(chain)
    assert_exact_pass(folded)


def test_greedy_digits_examples():
    a, q = _greedy_digits(Fraction(1, 2), 8)
    assert a == (1,) + (0,) * 7 and q == Fraction(1, 2)
    a, q = _greedy_digits(Fraction(1, 4), 8)
    assert a == (2,) + (0,) * 7 and q == Fraction(1, 4)
    a, q = _greedy_digits(Fraction(3, 10), 10)
    assert a[:6] == (1, 1, 1, 1, 0, 1)
    assert q >= Fraction(3, 10)
    assert q * (1 - Fraction(1, 1 << 10)) < Fraction(3, 10)
    # tiny p saturates the first digit
    a, q = _greedy_digits(Fraction(1, 10**9), 5)
    assert a == (5, 0, 0, 0, 0) and q == Fraction(1, 32)


def test_greedy_digits_product_formula():
    # q(a) equals the product formula including the i = 1 factor (1 - 1/2)^a_1.
    for p in (Fraction(3, 10), Fraction(1, 3), Fraction(17, 64), Fraction(123, 457)):
        a, q = _greedy_digits(p, 12)
        value = Fraction(1)
        for i, ai in enumerate(a, start=1):
            value *= (1 - Fraction(1, 1 << i)) ** ai
        assert value == q


def test_approx_bias_examples():
    approx, e = approx_bias(Fraction(1, 2), Fraction(1, 100), 4)
    assert approx.q == Fraction(1, 2) and e.r == 1
    assert_exact_pass(e)
    approx, e = approx_bias(Fraction(1, 4), Fraction(1, 100), 4)
    assert approx.q == Fraction(1, 4) and e.r == 2
    assert_exact_pass(e)
    approx, e = approx_bias(Fraction(3, 8), Fraction(1, 2), 1)
    assert approx.q == Fraction(3, 8)
    assert_exact_pass(e)


def test_approx_bias_complement_route():
    approx, e = approx_bias(Fraction(7, 10), Fraction(1, 10), 2)
    assert approx.complemented and approx.reduced == Fraction(3, 10)
    assert abs(approx.bias - Fraction(7, 10)) <= Fraction(1, 10) / 2**10
    assert e.mu1[1] == approx.bias
    # r is far beyond enumeration here; the sampled report must still pass
    report = verify_embedding(e, sample_trials=20_000)
    assert report.ok, report.summary()
    # a small complemented case stays exactly checkable
    approx_small, e_small = approx_bias(Fraction(5, 8), Fraction(1, 2), 1)
    assert approx_small.complemented and e_small.mu1[1] == approx_small.bias
    assert_exact_pass(e_small)


def test_approx_bias_invariants_fuzz():
    rng = np.random.default_rng(17)
    for _ in range(300):
        num = int(rng.integers(1, 1000))
        den = int(rng.integers(num + 1, 1100))
        p = Fraction(num, den)
        n = int(rng.integers(1, 6))
        delta = Fraction(int(rng.integers(1, 50)), 100)
        approx, _embedding_unused = approx_bias(p, delta, n)
        s = approx.s
        assert 1 <= approx.a[0] <= s
        assert all(0 <= ai <= 3 for ai in approx.a[1:])
        assert len(approx.a) == s
        assert approx.reduced <= approx.q <= approx.reduced + delta / Fraction(n) ** 10
        assert abs(approx.bias - p) <= delta / Fraction(n) ** 10


def test_threshold_map():
    t = ThresholdMap(4, 3, (1, 3))
    assert t.pushforward() == (Fraction(5, 16), Fraction(10, 16), Fraction(1, 16))
    assert [t.value(w) for w in range(5)] == [0, 0, 1, 1, 2]
    with pytest.raises(EmbeddingError):
        ThresholdMap(4, 3, (3, 1))
    with pytest.raises(EmbeddingError):
        ThresholdMap(4, 3, (1, 4))  # top segment would be empty


def test_best_threshold_map():
    t = best_threshold_map(2, 2)
    assert t.thresholds == (0,)  # tie with (1,), lexicographic rule
    t34 = best_threshold_map(4, 3)
    uniform = [Fraction(1, 3)] * 3
    best_tv = sum(abs(a - b) for a, b in zip(t34.pushforward(), uniform)) / 2
    # exhaustive check over all 6 threshold pairs
    for lo in range(4):
        for hi in range(lo + 1, 4):
            push = ThresholdMap(4, 3, (lo, hi)).pushforward()
            assert sum(abs(a - b) for a, b in zip(push, uniform)) / 2 >= best_tv


def test_threshold_distance_trend():
    # Any single r gives distance on the 1/sqrt(r) scale, but the minimum over
    # a window of r values drops to the 1/r scale (measured trend only).
    tvs = {}
    for r in range(16, 33):
        t = best_threshold_map(r, 3)
        tvs[r] = float(threshold_map_divergences(t)["tv"])
    assert min(tvs.values()) <= 1 / 16
    assert max(tvs.values()) <= 1.5 / math.sqrt(16)


def test_threshold_divergences():
    d = threshold_map_divergences(ThresholdMap(4, 3, (1, 3)))
    assert d["tv"] == Fraction(7, 24)
    assert d["kl"] > 0 and d["hellinger2"] > 0


@pytest.mark.parametrize("spec", [(4, 3, (1, 3)), (5, 2, (2,)), (6, 3, (1, 3)), (4, 4, (0, 1, 3))])
def test_symmetric_embedding_axioms(spec):
    r, m, thresholds = spec
    e = symmetric_embedding(ThresholdMap(r, m, thresholds))
    assert_exact_pass(e)


def test_symmetric_embedding_sampled_identity():
    e = symmetric_embedding(ThresholdMap(6, 3, (2, 4)))
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        psi = e.sample_psi(rng)
        assert [e.phi(z) for z in psi] == [0, 1, 2]
        assert psi[0] & ~psi[1] == 0 and psi[1] & ~psi[2] == 0


def test_corrupted_phi_fails_verification():
    e = and_embedding(3)
    table = list(e.phi_table())
    table[0] = 1  # phi(000...) = 1 breaks monotonicity/pushforward
    bad = LocalEmbedding(3, 2, e.mu1, lambda x: table[x], e.omega)
    report = verify_embedding(bad)
    assert not report.ok
    assert not (report.axioms[0].passed and report.axioms[1].passed)


def test_corrupted_omega_fails_verification():
    e = and_embedding(2)
    entries = [(w, psi) for w, psi in e.omega.entries()]
    entries[0] = (entries[0][0], (entries[0][1][1], entries[0][1][0]))  # swap: breaks monotone psi
    bad = LocalEmbedding(2, 2, e.mu1, e._phi, OmegaEnum(entries))
    report = verify_embedding(bad)
    assert not report.ok


def test_lift_monotone_preservation():
    e = symmetric_embedding(ThresholdMap(4, 3, (1, 3)))
    for f in iter_monotone_functions(GridDomain(3, 2)):
        assert lift(f, e).materialize().is_monotone()
    e2 = and_embedding(2)
    for f in iter_monotone_functions(CubeDomain(3)):
        assert lift(f, e2).materialize().is_monotone()


def test_lift_distance_inequality():
    e = and_embedding(2)
    mu = ProductMeasure.p_biased(2, Fraction(1, 4))
    rng = np.random.default_rng(23)
    for _ in range(25):
        f = random_function(CubeDomain(2), rng)
        g = lift(f, e).materialize()
        assert distance_to_monotone(g).epsilon >= distance_to_monotone(f, mu).epsilon


def test_lift_constant_and_counting():
    e = symmetric_embedding(ThresholdMap(4, 3, (1, 3)))
    const = DenseBooleanFunction.constant(GridDomain(3, 2), 1)
    g = lift(const, e)
    assert g.materialize() == DenseBooleanFunction.constant(CubeDomain(8), 1)
    oracle = CountingOracle(const)
    lifted = lift(oracle, e, n=2)
    for x in (0, 17, 255):
        lifted(x)
    assert oracle.count == 3


def test_sensitivity_transfer_bound():
    # s_g(x) / r <= s_f(phi(x)) for every lifted point, exhaustively at rn <= 14.
    cases = [
        (and_embedding(2), CubeDomain(3), None),
        (symmetric_embedding(ThresholdMap(4, 3, (1, 3))), GridDomain(3, 2), None),
    ]
    rng = np.random.default_rng(31)
    for e, domain, _ in cases:
        for _ in range(10):
            f = random_function(domain, rng)
            g = lift(f, e).materialize()
            for x in range(g.domain.size):
                projected = lift(f, e).project(x)
                assert neg_sensitivity(g, x) <= e.r * neg_sensitivity(f, projected)


def test_lift_alphabet_mismatch():
    e = and_embedding(2)
    f = DenseBooleanFunction.constant(GridDomain(3, 2), 0)
    with pytest.raises(EmbeddingError):
        lift(f, e)


def test_sampled_verification_mode():
    # A chain too large to enumerate falls back to flagged sampling.
    _, e = approx_bias(Fraction(1, 3), Fraction(1, 4), 2)
    assert e.omega.size > 1 << 20
    report = verify_embedding(e, sample_trials=2000)
    assert report.ok
    assert not all(a.exact for a in report.axioms)
