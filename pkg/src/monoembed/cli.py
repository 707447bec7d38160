"""Command-line interface: distance oracles, testers, certificates, experiments.

Every run is reproducible from its flags plus --seed; outputs echo the
configuration in a '#'-prefixed header block and are byte-identical across
reruns.  Exit codes: 0 success, 1 verification/search failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .distance import distance_to_monotone, isoperimetry_report, neg_sensitivity, talagrand_objective
from .domain import DenseBooleanFunction, ProductMeasure, enumerate_slice
from .embeddings import approx_bias, verify_embedding
from .fileio import read_embedding, read_function, read_measure, write_embedding, write_function
from .matchings import (
    SliceDominationParams,
    build_almost_perfect_matching,
    kk_check,
    random_layered_partition,
    relaxed_embedding_from_apm,
    search_perfect_embedding,
    slice_domination_check,
)
from .testers import cube_pair_trial, lifted_tester_trial


def _config_header(args: argparse.Namespace, command: str) -> list[str]:
    items = sorted(
        (k, v) for k, v in vars(args).items() if k not in ("func", "command") and v is not None
    )
    cfg = " ".join(f"{k}={v}" for k, v in items)
    return [f"# monoembed {__version__} {command}", f"# {cfg}"]


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _measure_for(args: argparse.Namespace, f: DenseBooleanFunction) -> ProductMeasure:
    if getattr(args, "measure", None):
        mu = read_measure(args.measure)
        if mu.domain != f.domain:
            raise SystemExit("measure domain does not match the function domain")
        return mu
    if getattr(args, "pbias", None):
        if f.domain.kind != "cube":
            raise SystemExit("--pbias applies to cube functions")
        return ProductMeasure.p_biased(f.domain.n, Fraction(args.pbias))
    return ProductMeasure.uniform(f.domain)


def _cmd_distance(args) -> int:
    f = read_function(args.fn)
    mu = _measure_for(args, f)
    cert = distance_to_monotone(f, mu)
    lines = _config_header(args, "distance")
    lines.append("epsilon,num,den")
    lines.append(f"{float(cert.epsilon)},{cert.epsilon.numerator},{cert.epsilon.denominator}")
    _emit(lines, args.out)
    if args.witness:
        write_function(cert.witness, args.witness)
    return 0


def _cmd_sensitivity(args) -> int:
    f = read_function(args.fn)
    mu = _measure_for(args, f)
    lines = _config_header(args, "sensitivity")
    lines.append(f"# talagrand_objective={talagrand_objective(f, mu, args.neighbors)}")
    lines.append("rank,neg_sensitivity")
    for i, x in enumerate(f.domain.points()):
        lines.append(f"{i},{neg_sensitivity(f, x, args.neighbors)}")
    _emit(lines, args.out)
    return 0


def _cmd_isoperimetry(args) -> int:
    f = read_function(args.fn)
    mu = _measure_for(args, f)
    report = isoperimetry_report(f, mu)
    lines = _config_header(args, "isoperimetry")
    lines.append("epsilon_num,epsilon_den,objective,ratio,form")
    ratio = "n/a" if report.ratio is None else repr(report.ratio)
    lines.append(
        f"{report.epsilon.numerator},{report.epsilon.denominator},"
        f"{report.objective!r},{ratio},{report.form}"
    )
    _emit(lines, args.out)
    return 0


def _cmd_test(args) -> int:
    f = read_function(args.fn)
    certificate = None
    if args.mode == "pbias":
        if args.p is None:
            raise SystemExit("--mode pbias requires --p")
        eps = Fraction(args.eps) if args.eps else Fraction(1, 4)
        _, certificate = approx_bias(Fraction(args.p), eps / 2, f.domain.n)
    elif args.mode == "grid":
        if not args.certificate:
            raise SystemExit(
                "--mode grid requires --certificate (construct one with search-embedding "
                "or construct-apm --emit-cert)"
            )
        certificate = read_embedding(args.certificate)
        if certificate.m != f.domain.m:
            raise SystemExit("certificate alphabet does not match the function")
    lines = _config_header(args, "test")
    lines.append("trial,verdict,x,y,queries_cum")
    queries = 0
    for i in range(args.trials):
        rng = np.random.default_rng((args.seed, i))
        if args.mode == "cube-uniform":
            verdict = cube_pair_trial(f, f.domain.n, rng)
        else:
            verdict = lifted_tester_trial(f, certificate, rng)
        queries += verdict.queries
        if verdict.accepted:
            lines.append(f"{i},accept,,,{queries}")
        else:
            x, y = verdict.witness
            lines.append(f"{i},reject,{x},{y},{queries}")
    _emit(lines, args.out)
    return 0


def _cmd_embed(args) -> int:
    approx, e = approx_bias(Fraction(args.p), Fraction(args.delta), args.n)
    sys.stdout.write(
        f"# p={approx.original} p'={approx.bias} r={e.r} s={approx.s} a={','.join(map(str, approx.a))}\n"
    )
    write_embedding(e, args.out)
    return 0


def _cmd_verify_embedding(args) -> int:
    e = read_embedding(args.cert)
    report = verify_embedding(e)
    sys.stdout.write(report.summary() + "\n")
    return 0 if report.ok else 1


def _cmd_construct_apm(args) -> int:
    lines = _config_header(args, "construct-apm")
    lines.append("seed,n,m,pair_index,matched,delta_num,delta_den")
    best = None
    for i in range(args.seeds):
        seed = args.seed ^ i
        rng = np.random.default_rng(seed)
        partition = random_layered_partition(args.n, args.m, rng)
        apm = build_almost_perfect_matching(partition, rng)
        for pair_index, matching in enumerate(apm.matchings):
            lines.append(
                f"{seed},{args.n},{args.m},{pair_index},{len(matching)},"
                f"{apm.delta.numerator},{apm.delta.denominator}"
            )
        if best is None or apm.delta < best[0]:
            best = (apm.delta, partition, apm)
    _emit(lines, args.out)
    if args.emit_cert and best is not None:
        _, partition, apm = best
        embedding, _ = relaxed_embedding_from_apm(partition.phi_values(), apm.matchings)
        write_embedding(embedding, args.emit_cert)
    return 0


def _cmd_search_embedding(args) -> int:
    rng = np.random.default_rng(args.seed)
    result = search_perfect_embedding(args.r, args.m, rng, budget=args.budget)
    if result.embedding is None:
        sys.stdout.write(f"no perfect embedding found in {result.attempts} attempts\n")
        return 1
    sys.stdout.write(f"found perfect embedding after {result.attempts} attempts\n")
    if args.out:
        write_embedding(result.embedding, args.out)
    return 0


def _cmd_domination(args) -> int:
    params = SliceDominationParams(n=args.n, k=args.k, t=args.t, s=args.s, d=args.d)
    rng = np.random.default_rng(args.seed)
    report = slice_domination_check(params, rng, args.trials)
    lines = _config_header(args, "domination")
    for warning in report.warnings:
        lines.append(f"# warning: {warning}")
    lines.append("trials,lower_successes,upper_successes")
    lines.append(f"{report.trials},{report.lower_successes},{report.upper_successes}")
    _emit(lines, args.out)
    return 0


def _cmd_kk_audit(args) -> int:
    if args.n > 5:
        raise SystemExit("exhaustive audit is capped at n = 5")
    n = args.n
    lines = _config_header(args, "kk-audit")
    lines.append("k,t,direction,checks,holds")
    violations = 0
    for k in range(n + 1):
        slice_points = list(enumerate_slice(n, k))
        subsets = []
        for mask in range(1, 1 << len(slice_points)):
            subsets.append([slice_points[i] for i in range(len(slice_points)) if (mask >> i) & 1])
        for direction, reach in (("upper", n - k), ("lower", k)):
            for t in range(1, reach + 1):
                holds = 0
                for subset in subsets:
                    record = kk_check(subset, n, t, direction)
                    violations += not record.holds
                    holds += record.holds
                lines.append(f"{k},{t},{direction},{len(subsets)},{holds}")
    lines.append(f"# violations={violations}")
    _emit(lines, args.out)
    return 0 if violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monoembed",
        description="Monotonicity testing over biased cubes and hypergrids via monotone embeddings",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_measure_flags(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--measure", help="measure file")
        group.add_argument("--uniform", action="store_true", help="uniform measure (default)")
        group.add_argument("--pbias", help="p-biased cube measure, bias a/b")

    p = sub.add_parser("distance", help="exact distance to monotonicity")
    p.add_argument("--fn", required=True)
    add_measure_flags(p)
    p.add_argument("--witness", help="write the closest monotone witness here")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_distance)

    p = sub.add_parser("sensitivity", help="per-point negative sensitivity")
    p.add_argument("--fn", required=True)
    add_measure_flags(p)
    p.add_argument("--neighbors", choices=("covering", "any"), default="covering")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("isoperimetry", help="distance, objective, and their ratio")
    p.add_argument("--fn", required=True)
    add_measure_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_isoperimetry)

    p = sub.add_parser("test", help="run tester trials, one CSV row per trial")
    p.add_argument("--fn", required=True)
    p.add_argument("--mode", choices=("cube-uniform", "pbias", "grid"), required=True)
    p.add_argument("--p", help="bias a/b (pbias mode)")
    p.add_argument("--eps", help="distance parameter a/b")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--certificate", help="embedding certificate (grid mode)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("embed", help="build a bias-approximation embedding certificate")
    p.add_argument("--p", required=True, help="target bias a/b")
    p.add_argument("--delta", default="1/100", help="accuracy scale a/b")
    p.add_argument("--n", type=int, default=1, help="ambient arity for the accuracy bound")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("verify-embedding", help="check the four embedding axioms")
    p.add_argument("--cert", required=True)
    p.set_defaults(func=_cmd_verify_embedding)

    p = sub.add_parser("construct-apm", help="seed sweep of almost-perfect matchings")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="base seed (per-trial seed = base xor index)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--emit-cert", help="write the best certificate here")
    p.set_defaults(func=_cmd_construct_apm)

    p = sub.add_parser("search-embedding", help="search for a perfect-matching embedding")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_search_embedding)

    p = sub.add_parser("domination", help="random-subset slice domination experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_domination)

    p = sub.add_parser("kk-audit", help="exhaustive shadow-inequality audit (n <= 5)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_kk_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
