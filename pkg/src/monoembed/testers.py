"""Pair testers on the uniform cube, their lifts across embeddings, and the
end-to-end biased-cube / hypergrid testing pipelines.

A single trial queries exactly two points: a uniform x and the endpoint of a
random up- or down-walk of power-of-two length.  Rejection always carries a
witnessed violating pair, so monotone functions are accepted with certainty.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domain import CountingOracle, DenseBooleanFunction
from .embeddings import LocalEmbedding, approx_bias, lift

#: Default polylog exponent of the reference rejection curve (conservative:
#: more repetitions).  Experiments fit or override it per run.
DEFAULT_POLYLOG_EXPONENT = 3


def rejection_reference(n_bits: int, eps: float, polylog_exponent: float = DEFAULT_POLYLOG_EXPONENT) -> float:
    """Reference curve eps^2 / (sqrt(n) * log2(n)^c) for the pair tester."""
    n_bits = max(n_bits, 2)
    return float(eps) ** 2 / (math.sqrt(n_bits) * math.log2(n_bits) ** polylog_exponent)


@dataclass(frozen=True)
class PairTesterConfig:
    """Walk-length schedule of the pair tester; lengths are powers of two."""

    n_bits: int
    walk_lengths: tuple[int, ...]

    @classmethod
    def for_bits(cls, n_bits: int) -> "PairTesterConfig":
        if n_bits < 1:
            raise ValueError("need at least one bit")
        return cls(n_bits, tuple(1 << j for j in range(n_bits.bit_length())if (1 << j) <= n_bits))


@dataclass(frozen=True)
class TesterVerdict:
    """Accept, or reject with the queried violating pair (lower, upper)."""

    accepted: bool
    witness: tuple[int, int] | None
    queries: int = 2


def _sample_point(rng: np.random.Generator, n_bits: int) -> int:
    nbytes = (n_bits + 7) // 8
    x = int.from_bytes(rng.bytes(nbytes), "little")
    return x & ((1 << n_bits) - 1)


def _flip_random_subset(
    x: int, n_bits: int, count: int, upward: bool, rng: np.random.Generator
) -> int:
    """Flip `count` uniformly random 0-bits (upward) or 1-bits (downward)."""
    nbytes = (n_bits + 7) // 8
    bits = np.unpackbits(
        np.frombuffer(x.to_bytes(nbytes, "little"), dtype=np.uint8), bitorder="little"
    )[:n_bits]
    candidates = np.flatnonzero(bits == 0) if upward else np.flatnonzero(bits == 1)
    take = min(count, len(candidates))
    if take == 0:
        return x
    picked = candidates[rng.choice(len(candidates), size=take, replace=False)]
    bits[picked] ^= 1
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def cube_pair_trial(
    f, n_bits: int, rng: np.random.Generator, config: PairTesterConfig | None = None
) -> TesterVerdict:
    """One 2-query up/down random-walk trial on the uniform cube.

    Samples x uniformly, a direction, and a power-of-two walk length capped by
    the available coordinates; rejects only when the queried pair violates
    monotonicity.
    """
    if config is None:
        config = PairTesterConfig.for_bits(n_bits)
    x = _sample_point(rng, n_bits)
    upward = rng.random() < 0.5
    tau = config.walk_lengths[int(rng.integers(0, len(config.walk_lengths)))]
    y = _flip_random_subset(x, n_bits, tau, upward, rng)
    fx = f(x)
    fy = f(y)
    lower, upper = (x, y) if upward else (y, x)
    f_lower, f_upper = (fx, fy) if upward else (fy, fx)
    if f_lower == 1 and f_upper == 0 and lower != upper:
        return TesterVerdict(accepted=False, witness=(lower, upper))
    return TesterVerdict(accepted=True, witness=None)


def lifted_tester_trial(
    f, e: LocalEmbedding, rng: np.random.Generator, n: int | None = None
) -> TesterVerdict:
    """Run the pair trial on the lift of f; two base queries per trial.

    On rejection the lifted pair is checked to project onto a comparable,
    strictly ordered pair of base points (whose f-values the trial already
    queried), so a reject is always a certificate.
    """
    g = lift(f, e, n)
    verdict = cube_pair_trial(g, g.bits, rng)
    if not verdict.accepted:
        lo, hi = verdict.witness
        p_lo, p_hi = g.project(lo), g.project(hi)
        if e.m == 2:
            comparable = p_lo & ~p_hi == 0
        else:
            comparable = all(a <= b for a, b in zip(p_lo, p_hi))
        if not comparable or p_lo == p_hi:
            raise AssertionError(
                f"rejected lifted pair projects to a non-violating pair {p_lo!r}, {p_hi!r}"
            )
    return verdict


@dataclass(frozen=True)
class PipelineResult:
    """Verdict and exact query accounting of a repeated-trial pipeline."""

    accepted: bool
    trials_run: int
    planned_trials: int
    queries: int
    n_bits: int
    r: int
    witness: tuple[int, int] | None
    embedded_bias: Fraction | None = None


def pbias_pipeline(
    f,
    n: int,
    p,
    eps,
    rng: np.random.Generator,
    polylog_exponent: float = DEFAULT_POLYLOG_EXPONENT,
    stop_on_reject: bool = True,
    max_trials: int | None = None,
) -> PipelineResult:
    """Monotonicity tester for f: ({0,1}^n, mu_p) -> {0,1}.

    Picks p' within (eps/2)/n^10 of p, lifts f across the p'-embedding, and
    repeats the pair trial ceil(10 / R(rn, eps/2)) times with the configured
    reference curve.  Accepts iff no trial rejects; monotone functions are
    never rejected.  Query count is exact via a counting oracle (2 per trial).
    """
    p = Fraction(p)
    eps = Fraction(eps)
    if not 0 < p < 1:
        raise ValueError(f"bias must lie in (0, 1), got {p}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    approx, e = approx_bias(p, eps / 2, n)
    oracle = CountingOracle(f)
    g = lift(oracle, e, n)
    n_bits = g.bits
    planned = math.ceil(10 / rejection_reference(n_bits, float(eps) / 2, polylog_exponent))
    if max_trials is not None:
        planned = min(planned, max_trials)
    witness = None
    trials_run = 0
    accepted = True
    config = PairTesterConfig.for_bits(n_bits)
    for _ in range(planned):
        verdict = cube_pair_trial(g, n_bits, rng, config)
        trials_run += 1
        if not verdict.accepted:
            accepted = False
            witness = verdict.witness
            if stop_on_reject:
                break
    return PipelineResult(
        accepted=accepted,
        trials_run=trials_run,
        planned_trials=planned,
        queries=oracle.count,
        n_bits=n_bits,
        r=e.r,
        witness=witness,
        embedded_bias=approx.bias,
    )


def hypergrid_pipeline(
    f,
    eps,
    rng: np.random.Generator,
    certificate: LocalEmbedding | None = None,
    n: int | None = None,
    polylog_exponent: float = DEFAULT_POLYLOG_EXPONENT,
    stop_on_reject: bool = True,
    max_trials: int | None = None,
) -> PipelineResult:
    """Monotonicity tester for f: ([m]^n, uniform) -> {0,1} via an embedding certificate.

    Requires an (r, m) embedding certificate (a perfect one from the embedding
    search, or an almost-perfect-matching certificate); repetitions use the
    eps/4 budget that the near-uniform cube measure costs.
    """
    if certificate is None:
        raise ValueError(
            "no embedding certificate: construct one with search_perfect_embedding or "
            "build_almost_perfect_matching / relaxed_embedding_from_apm"
        )
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if isinstance(f, DenseBooleanFunction) and f.domain.m != certificate.m:
        raise ValueError(f"certificate alphabet {certificate.m} != function alphabet {f.domain.m}")
    oracle = CountingOracle(f)
    arity = f.domain.n if isinstance(f, DenseBooleanFunction) else n
    g = lift(oracle, certificate, arity)
    n_bits = g.bits
    planned = math.ceil(10 / rejection_reference(n_bits, float(eps) / 4, polylog_exponent))
    if max_trials is not None:
        planned = min(planned, max_trials)
    witness = None
    trials_run = 0
    accepted = True
    config = PairTesterConfig.for_bits(n_bits)
    for _ in range(planned):
        verdict = cube_pair_trial(g, n_bits, rng, config)
        trials_run += 1
        if not verdict.accepted:
            accepted = False
            witness = verdict.witness
            if stop_on_reject:
                break
    return PipelineResult(
        accepted=accepted,
        trials_run=trials_run,
        planned_trials=planned,
        queries=oracle.count,
        n_bits=n_bits,
        r=certificate.r,
        witness=witness,
    )


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class RejectionProfile:
    """Seeded Monte-Carlo estimate of a tester's rejection probability."""

    n_bits: int
    eps: Fraction | None
    trials: int
    rejections: int
    estimate: float
    wilson_low: float
    wilson_high: float
    reference: float | None  # R(n, eps) at the configured exponent, when eps given


def estimate_rejection(
    trial_fn,
    trials: int,
    base_seed: int,
    n_bits: int,
    eps=None,
    polylog_exponent: float = DEFAULT_POLYLOG_EXPONENT,
    jobs: int = 1,
) -> RejectionProfile:
    """Run seeded independent trials of trial_fn(rng) and profile the rejections.

    Each trial draws from a stream derived from (base_seed, index), so the
    profile is identical across reruns and across any degree of parallelism.
    """
    if trials < 1:
        raise ValueError("need at least one trial")

    def run(i: int) -> bool:
        rng = np.random.default_rng((base_seed, i))
        return not trial_fn(rng).accepted

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rejections = sum(pool.map(run, range(trials)))
    else:
        rejections = sum(run(i) for i in range(trials))
    low, high = wilson_interval(rejections, trials)
    eps = None if eps is None else Fraction(eps)
    reference = (
        None if eps is None else rejection_reference(n_bits, float(eps), polylog_exponent)
    )
    return RejectionProfile(
        n_bits=n_bits,
        eps=eps,
        trials=trials,
        rejections=rejections,
        estimate=rejections / trials,
        wilson_low=low,
        wilson_high=high,
        reference=reference,
    )


def fit_polylog_exponent(points: list[tuple[int, float, float]]) -> float:
    """Least-squares fit of c in R(n, eps) = eps^2 / (sqrt(n) log2(n)^c).

    points: (n_bits, eps, measured rejection rate), rates > 0.
    """
    xs = []
    ys = []
    for n_bits, eps, rate in points:
        if rate <= 0:
            continue
        # log rate = 2 log eps - 0.5 log n - c log log2(n)
        resid = math.log(rate) - 2 * math.log(eps) + 0.5 * math.log(n_bits)
        xs.append(math.log(math.log2(max(n_bits, 2))))
        ys.append(-resid)
    if not xs:
        raise ValueError("no positive rates to fit")
    xs_arr = np.array(xs)
    ys_arr = np.array(ys)
    denom = float(np.dot(xs_arr, xs_arr))
    if denom == 0:
        return 0.0
    return float(np.dot(xs_arr, ys_arr) / denom)
