"""Text file formats: functions, measures, embedding certificates, matchings.

Function file:   line 1 ``cube <n>`` or ``grid <m> <n>``; line 2 a '0'/'1'
string of length 2^n or m^n in rank order.
Measure file:    line 1 the domain, then one line per coordinate with
space-separated rationals ``a/b``.
Certificate:     header ``embedding <r> <m> [relaxed]``, the phi table as an
m-ary digit string of length 2^r, then either ``omega-enum <K>`` with K lines
``weight; psi(0) ... psi(m-1)`` or ``omega-sampler <spec>`` naming a built-in
construction; relaxed certificates append ``mu1`` / ``mu2`` lines.
Matching file:   lines ``u v`` of bitmask integers.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .domain import CubeDomain, DenseBooleanFunction, Domain, GridDomain, ProductMeasure
from .embeddings import (
    BiasChainEmbedding,
    EmbeddingError,
    LocalEmbedding,
    OmegaEnum,
    ThresholdMap,
    and_embedding,
    complement_embedding,
    symmetric_embedding,
)

#: Certificates carry a dense phi table, which caps their r.
MAX_CERTIFICATE_BITS = 20


class FormatError(ValueError):
    """Malformed file contents."""


def _parse_domain(line: str) -> Domain:
    parts = line.split()
    if parts and parts[0] == "cube" and len(parts) == 2:
        return CubeDomain(int(parts[1]))
    if parts and parts[0] == "grid" and len(parts) == 3:
        return GridDomain(int(parts[1]), int(parts[2]))
    raise FormatError(f"bad domain line: {line!r}")


def _domain_line(domain: Domain) -> str:
    if domain.kind == "cube":
        return f"cube {domain.n}"
    return f"grid {domain.m} {domain.n}"


def write_function(f: DenseBooleanFunction, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(_domain_line(f.domain) + "\n")
        fh.write("".join(str(int(v)) for v in f.table) + "\n")


def read_function(path: str) -> DenseBooleanFunction:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise FormatError("function file needs a domain line and a table line")
    domain = _parse_domain(lines[0])
    table = lines[1].strip()
    if len(table) != domain.size or set(table) - {"0", "1"}:
        raise FormatError(f"table must be {domain.size} characters of 0/1")
    return DenseBooleanFunction(domain, [int(c) for c in table])


def write_measure(mu: ProductMeasure, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(_domain_line(mu.domain) + "\n")
        for dist in mu.coord_dists:
            fh.write(" ".join(str(v) for v in dist) + "\n")


def read_measure(path: str) -> ProductMeasure:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    domain = _parse_domain(lines[0])
    dists = []
    for ln in lines[1 : domain.n + 1]:
        dists.append([Fraction(tok) for tok in ln.split()])
    if len(dists) != domain.n:
        raise FormatError(f"expected {domain.n} coordinate lines")
    return ProductMeasure(domain, dists)


def write_matching(pairs: Mapping[int, int], path: str) -> None:
    with open(path, "w") as fh:
        for u in sorted(pairs):
            fh.write(f"{u} {pairs[u]}\n")


def read_matching(path: str) -> dict[int, int]:
    out: dict[int, int] = {}
    with open(path) as fh:
        for ln in fh:
            if not ln.strip():
                continue
            u, v = ln.split()
            out[int(u)] = int(v)
    return out


def _rebuild_from_spec(spec: str) -> LocalEmbedding:
    spec = spec.strip()
    if spec.startswith("complement (") and spec.endswith(")"):
        return complement_embedding(_rebuild_from_spec(spec[len("complement (") : -1]))
    parts = spec.split(None, 1)
    if parts[0] == "and":
        return and_embedding(int(parts[1]))
    if parts[0] == "bias-chain":
        kinds = []
        for tok in parts[1].split(","):
            kind, width = tok.split(":")
            kinds.append((kind, int(width)))
        return BiasChainEmbedding(kinds)
    if parts[0] == "symmetric":
        raise FormatError("symmetric sampler specs need the r/m context; use omega-enum")
    raise FormatError(f"unknown sampler spec {spec!r}")


def write_embedding(e: LocalEmbedding, path: str, enum_limit: int = 1 << 16) -> None:
    """Write a certificate; enumerated omega when small, else the sampler name."""
    if e.r > MAX_CERTIFICATE_BITS:
        raise EmbeddingError(
            f"certificates carry a dense phi table; r = {e.r} exceeds {MAX_CERTIFICATE_BITS}"
        )
    lines = [f"embedding {e.r} {e.m}" + (" relaxed" if e.relaxed else "")]
    table = e.phi_table()
    lines.append("".join(str(int(v)) for v in table))
    size = e.omega.size
    if size is not None and size <= enum_limit:
        lines.append(f"omega-enum {size}")
        for w, psi in e.omega.entries():
            lines.append(f"{w}; " + " ".join(str(p) for p in psi))
    elif e.sampler_spec:
        lines.append(f"omega-sampler {e.sampler_spec}")
    else:
        raise EmbeddingError("omega too large to enumerate and no sampler spec available")
    if e.relaxed:
        lines.append("mu1 " + " ".join(str(v) for v in e.mu1))
        lines.append("mu2 " + " ".join(str(v) for v in e.mu2))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_embedding(path: str) -> LocalEmbedding:
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split()
    if len(header) < 3 or header[0] != "embedding":
        raise FormatError(f"bad certificate header: {lines[0]!r}")
    r, m = int(header[1]), int(header[2])
    relaxed = len(header) > 3 and header[3] == "relaxed"
    table_line = lines[1].strip()
    if len(table_line) != 1 << r:
        raise FormatError(f"phi table must have 2^{r} digits")
    table = [int(c) for c in table_line]
    if max(table) >= m:
        raise FormatError("phi table contains values outside [m]")

    mu1 = None
    mu2 = None
    omega = None
    i = 2
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if line.startswith("omega-enum"):
            k = int(line.split()[1])
            entries = []
            for j in range(i + 1, i + 1 + k):
                weight_part, psi_part = lines[j].split(";")
                psi = tuple(int(tok) for tok in psi_part.split())
                if len(psi) != m:
                    raise FormatError(f"psi line needs {m} points: {lines[j]!r}")
                entries.append((Fraction(weight_part.strip()), psi))
            omega = OmegaEnum(entries)
            i += 1 + k
        elif line.startswith("omega-sampler"):
            rebuilt = _rebuild_from_spec(line[len("omega-sampler") :])
            if rebuilt.r != r or rebuilt.m != m:
                raise FormatError("sampler spec does not match the certificate header")
            if list(rebuilt.phi_table()) != table:
                raise FormatError("sampler spec phi disagrees with the stored table")
            omega = rebuilt.omega
            i += 1
        elif line.startswith("mu1"):
            mu1 = [Fraction(tok) for tok in line.split()[1:]]
            i += 1
        elif line.startswith("mu2"):
            mu2 = [Fraction(tok) for tok in line.split()[1:]]
            i += 1
        else:
            raise FormatError(f"unrecognized certificate line: {line!r}")
    if omega is None:
        raise FormatError("certificate has no omega block")
    if relaxed and (mu1 is None or mu2 is None):
        raise FormatError("relaxed certificates need mu1 and mu2 blocks")
    if mu1 is None:
        counts = [0] * m
        for v in table:
            counts[v] += 1
        mu1 = [Fraction(c, 1 << r) for c in counts]
    return LocalEmbedding(r, m, mu1, lambda x: table[x], omega, mu2=mu2)
