"""Matrix translation of a sieved interval and gap-chain certificates.

Once a residue system over all primes up to x is fixed, the Chinese
remainder theorem produces one offset m modulo the primorial-style
modulus P (product of those primes, the excluded modulus left out) such
that translating the interval (x, y] by z*P + m, for any row index z,
sends exactly the sieve survivors to integers coprime to P.  Primes in a
translated row can therefore only appear at survivor offsets, and a row
whose survivor translates contain k+1 primes with every consecutive gap
of length at least epsilon*y witnesses a chain of k consecutive large
prime gaps.

Rows are only ever sampled (z uniform in [1, P**D]); nothing here scans
the full row space.  A successful row is packaged as a self-contained
certificate: every integer strictly between the listed primes carries
deterministically checkable compositeness evidence (a shared factor with
the modulus, an explicit factor, or a Miller-Rabin witness base), so an
independent verifier needs no access to the search.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Any

from .nt import (
    DETERMINISTIC_MR_LIMIT,
    crt_combine,
    is_prime,
    mr_composite_witness,
)
from .partition import PrimePartition
from .sieving import ResidueSystem, SievedSet

__all__ = [
    "CERTIFICATE_VERSION",
    "FrameWindow",
    "MaierFrame",
    "assemble_frame",
    "RowStatistics",
    "sample_rows",
    "GapChainCertificate",
    "MissReport",
    "find_gap_chain",
    "VerificationOutcome",
    "verify_certificate",
]

CERTIFICATE_VERSION = "1"
DEFAULT_Z_BIT_BUDGET = 20_000


@dataclass(frozen=True)
class FrameWindow:
    """Bare translation window for frames built without a full partition.

    The translation machinery only needs the interval endpoints and the
    excluded modulus, so tiny demonstration frames (x well below the
    partition module's floor) use this directly.
    """

    x: float
    y: float
    excluded_prime: int = 1

    def __post_init__(self) -> None:
        if not self.x > 2:
            raise ValueError("window start must exceed 2")
        if not self.y > self.x:
            raise ValueError("window end must exceed its start")
        if self.excluded_prime != 1 and not is_prime(self.excluded_prime):
            raise ValueError("excluded modulus must be 1 or a prime")


@dataclass(frozen=True)
class MaierFrame:
    """Translation frame: row value at (z, a) is z*modulus + offset + a.

    offset is the CRT solution of offset = -a_p (mod p) over the whole
    residue system, reduced into [0, modulus); with all-zero classes this
    is plain 0.  Row indices z live in [1, modulus**D].
    """

    x: int
    y: int
    excluded_prime: int
    D: int
    modulus: int
    offset: int
    system: ResidueSystem = field(repr=False)

    def row_value(self, z: int, a: int) -> int:
        return z * self.modulus + self.offset + a

    def row_space(self) -> int:
        return self.modulus**self.D

    def row_space_bits(self) -> int:
        return self.modulus.bit_length() * self.D


def assemble_frame(
    system: ResidueSystem,
    window: FrameWindow | PrimePartition,
    D: int = 1,
    *,
    spot_checks: int = 64,
) -> MaierFrame:
    """Solve the simultaneous congruences and spot-check the translation.

    The system must assign a class to every prime up to x except the
    excluded modulus.  The returned frame satisfies, for every t in
    (x, y]: t fails the sieve  iff  gcd(offset + t, modulus) > 1; the
    first spot_checks values of t are verified both ways.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    if isinstance(window, PrimePartition):
        x = math.floor(window.params.x)
        y = math.floor(window.params.y)
        b0 = window.excluded_prime
    else:
        x = math.floor(window.x)
        y = math.floor(window.y)
        b0 = window.excluded_prime

    from .nt import primes_in_range

    expected = {int(p) for p in primes_in_range(1, x).tolist()} - {b0}
    got = set(system.entries)
    if got != expected:
        missing = sorted(expected - got)[:5]
        extra = sorted(got - expected)[:5]
        raise ValueError(
            f"system does not cover exactly the primes up to {x} minus the "
            f"excluded modulus (missing {missing}, extra {extra})"
        )

    items = sorted(system.entries.items())
    # moduli are distinct primes, so the combination cannot collide
    offset, modulus = crt_combine(((-a) % p, p) for p, a in items)

    frame = MaierFrame(
        x=x, y=y, excluded_prime=b0, D=D,
        modulus=modulus, offset=offset, system=system,
    )
    checked = 0
    for t in range(x + 1, y + 1):
        if checked >= spot_checks:
            break
        sieved_out = any(t % p == a for p, a in items)
        shares_factor = math.gcd(offset + t, modulus) > 1
        if sieved_out != shares_factor:
            raise AssertionError(
                f"translation invariant failed at t={t}: sieved_out="
                f"{sieved_out} but gcd(offset+t, modulus)>1 is {shares_factor}"
            )
        checked += 1
    return frame


def _check_row_space(frame: MaierFrame, z_bit_budget: int) -> int:
    if frame.row_space_bits() > z_bit_budget:
        raise ValueError(
            f"row space needs about {frame.row_space_bits()} bits, over the "
            f"budget of {z_bit_budget}; lower x or D"
        )
    return frame.row_space()


def _check_window(frame: MaierFrame, T: SievedSet) -> None:
    if (T.lo, T.hi) != (frame.x, frame.y):
        raise ValueError(
            f"sieved set covers ({T.lo}, {T.hi}] but the frame translates "
            f"({frame.x}, {frame.y}]"
        )


@dataclass(frozen=True)
class RowStatistics:
    """Primality statistics over sampled rows of the translation frame."""

    trials: int
    mean_primes: float
    var_primes: float
    hit_counts: dict[int, int]
    pair_counts: dict[tuple[int, int], int]
    best_z: int
    best_prime_offsets: list[int]
    mr_rounds: int

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "mean_primes": self.mean_primes,
            "var_primes": self.var_primes,
            "best_prime_count": len(self.best_prime_offsets),
            "mr_rounds": self.mr_rounds,
        }


def sample_rows(
    frame: MaierFrame,
    T: SievedSet,
    trials: int,
    rng: random.Random,
    *,
    mr_rounds: int = 48,
    pair_sample: int = 8,
    z_bit_budget: int = DEFAULT_Z_BIT_BUDGET,
) -> RowStatistics:
    """Count primes among survivor translates for `trials` random rows.

    Uses the stdlib Random generator because row indices are arbitrary
    precision.  Pair statistics cover pair_sample random survivor pairs,
    chosen up front from the same generator.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    _check_window(frame, T)
    Z = _check_row_space(frame, z_bit_budget)
    offsets = [int(a) for a in T.members().tolist()]

    pairs: list[tuple[int, int]] = []
    if len(offsets) >= 2:
        seen = set()
        for _ in range(pair_sample):
            a, b = rng.sample(offsets, 2)
            pair = (min(a, b), max(a, b))
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)

    hit_counts = {a: 0 for a in offsets}
    pair_counts = {pair: 0 for pair in pairs}
    total = 0
    total_sq = 0
    best: tuple[int, int, list[int]] = (-1, 0, [])
    for _ in range(trials):
        z = rng.randrange(1, Z + 1)
        row_primes = [
            a for a in offsets if is_prime(frame.row_value(z, a), mr_rounds)
        ]
        for a in row_primes:
            hit_counts[a] += 1
        hit_set = set(row_primes)
        for pair in pairs:
            if pair[0] in hit_set and pair[1] in hit_set:
                pair_counts[pair] += 1
        n = len(row_primes)
        total += n
        total_sq += n * n
        if n > best[0]:
            best = (n, z, row_primes)
    mean = total / trials
    var = total_sq / trials - mean * mean
    return RowStatistics(
        trials=trials,
        mean_primes=mean,
        var_primes=max(var, 0.0),
        hit_counts=hit_counts,
        pair_counts=pair_counts,
        best_z=best[1],
        best_prime_offsets=best[2],
        mr_rounds=mr_rounds,
    )


@dataclass(frozen=True)
class GapChainCertificate:
    """Self-contained, independently checkable record of one found row.

    All big integers are decimal strings so the JSON form is lossless and
    byte-stable.  The evidence list covers every integer offset strictly
    between consecutive listed primes; each item is one of

      gcd_with_modulus      witness g: 1 < g < value, g | value, g | modulus
      explicit_factor       witness f: 1 < f < value, f | value
      miller_rabin_witness  witness b: b is a strong compositeness witness

    The policy records the Miller-Rabin round count for values above the
    deterministic limit; listed primes above that limit are probable
    primes with union-bounded error 4**-rounds per value.
    """

    version: str
    library_version: str
    x: int
    y: int
    excluded_prime: int
    D: int
    modulus_str: str
    offset_str: str
    z_str: str
    k: int
    epsilon: float
    prime_offsets: list[int]
    min_gap: int
    evidence: list[dict[str, Any]]
    seed: int | None
    policy: dict[str, Any]
    trials_used: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GapChainCertificate":
        raw = json.loads(text)
        raw["prime_offsets"] = [int(a) for a in raw["prime_offsets"]]
        raw["evidence"] = [dict(e) for e in raw["evidence"]]
        return cls(**raw)


@dataclass(frozen=True)
class MissReport:
    """Search budget exhausted; records the best row encountered."""

    trials: int
    k: int
    epsilon: float
    best_z_str: str
    best_prime_count: int
    best_min_gap: int | None


def _library_version() -> str:
    try:
        from importlib.metadata import version

        return version("gapchain")
    except Exception:
        return "unknown"


def find_gap_chain(
    frame: MaierFrame,
    T: SievedSet,
    k: int,
    epsilon: float,
    trials: int,
    rng: random.Random,
    *,
    mr_rounds: int = 48,
    z_bit_budget: int = DEFAULT_Z_BIT_BUDGET,
    seed: int | None = None,
) -> GapChainCertificate | MissReport:
    """Sample rows until one certifies k consecutive gaps of size >= eps*y.

    A row certifies when its survivor translates contain at least k+1
    primes and every consecutive gap between the listed primes reaches
    epsilon * y.  Success builds the full certificate, including the
    compositeness evidence for all intermediate offsets; failure returns
    a structured miss report with the best row seen.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    _check_window(frame, T)
    Z = _check_row_space(frame, z_bit_budget)
    offsets = [int(a) for a in T.members().tolist()]
    survivor_set = set(offsets)
    gap_demand = epsilon * frame.y

    best: tuple[int, int, int | None] = (0, 0, None)  # count, z, min_gap
    for trial in range(1, trials + 1):
        z = rng.randrange(1, Z + 1)
        row_primes = [
            a for a in offsets if is_prime(frame.row_value(z, a), mr_rounds)
        ]
        gaps = [b - a for a, b in zip(row_primes, row_primes[1:])]
        min_gap = min(gaps) if gaps else None
        if len(row_primes) > best[0]:
            best = (len(row_primes), z, min_gap)
        if len(row_primes) >= k + 1 and min_gap is not None and min_gap >= gap_demand:
            evidence = _build_evidence(
                frame, z, row_primes, survivor_set, mr_rounds
            )
            return GapChainCertificate(
                version=CERTIFICATE_VERSION,
                library_version=_library_version(),
                x=frame.x,
                y=frame.y,
                excluded_prime=frame.excluded_prime,
                D=frame.D,
                modulus_str=str(frame.modulus),
                offset_str=str(frame.offset),
                z_str=str(z),
                k=k,
                epsilon=epsilon,
                prime_offsets=row_primes,
                min_gap=min_gap,
                evidence=evidence,
                seed=seed,
                policy={
                    "mr_rounds": mr_rounds,
                    "deterministic_limit": str(DETERMINISTIC_MR_LIMIT),
                },
                trials_used=trial,
            )
    return MissReport(
        trials=trials,
        k=k,
        epsilon=epsilon,
        best_z_str=str(best[1]),
        best_prime_count=best[0],
        best_min_gap=best[2],
    )


def _build_evidence(
    frame: MaierFrame,
    z: int,
    row_primes: list[int],
    survivor_set: set[int],
    mr_rounds: int,
) -> list[dict[str, Any]]:
    evidence: list[dict[str, Any]] = []
    listed = set(row_primes)
    for a in range(row_primes[0] + 1, row_primes[-1]):
        if a in listed:
            continue
        value = frame.row_value(z, a)
        if a not in survivor_set:
            g = math.gcd(frame.offset + a, frame.modulus)
            if g <= 1:
                raise AssertionError(
                    f"offset {a} escaped the sieve yet shares no factor with "
                    "the modulus; the sieved set does not match the frame"
                )
            evidence.append(
                {"offset": a, "kind": "gcd_with_modulus", "witness": str(g)}
            )
            continue
        res = is_prime(value, mr_rounds)
        if res.verdict != "composite":
            raise AssertionError(
                f"survivor translate at offset {a} is prime but was not "
                "listed; row enumeration bug"
            )
        kind = (
            "explicit_factor"
            if res.method == "trial_division"
            else "miller_rabin_witness"
        )
        evidence.append({"offset": a, "kind": kind, "witness": str(res.witness)})
    return evidence


@dataclass(frozen=True)
class VerificationOutcome:
    accepted: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


def verify_certificate(cert: GapChainCertificate) -> VerificationOutcome:
    """Re-check a certificate from scratch; accept only if every step holds.

    Recomputes the modulus from (x, excluded_prime), revalidates ranges,
    re-tests every listed prime under the certificate's own policy,
    recomputes the gap floor, and re-checks each evidence item, requiring
    the evidence to cover exactly the non-listed integers between the
    first and last listed primes.  Rejections name the first failure.
    """

    def reject(reason: str) -> VerificationOutcome:
        return VerificationOutcome(False, reason)

    if cert.version != CERTIFICATE_VERSION:
        return reject(f"unsupported certificate version {cert.version!r}")

    from .nt import primes_in_range

    if cert.excluded_prime != 1 and not is_prime(cert.excluded_prime):
        return reject(f"excluded modulus {cert.excluded_prime} is not 1 or prime")
    modulus = 1
    for p in primes_in_range(1, cert.x).tolist():
        if p != cert.excluded_prime:
            modulus *= int(p)
    if str(modulus) != cert.modulus_str:
        return reject("modulus does not match the primes up to x")
    offset = int(cert.offset_str)
    if not 0 <= offset < modulus:
        return reject("offset outside [0, modulus)")
    z = int(cert.z_str)
    if not 1 <= z <= modulus**cert.D:
        return reject("row index outside [1, modulus**D]")

    ps = cert.prime_offsets
    if len(ps) < cert.k + 1:
        return reject(f"only {len(ps)} listed primes; k={cert.k} needs {cert.k + 1}")
    if any(b <= a for a, b in zip(ps, ps[1:])):
        return reject("listed prime offsets are not strictly increasing")
    if ps[0] <= cert.x or ps[-1] > cert.y:
        return reject("listed prime offsets leave the window (x, y]")

    rounds = int(cert.policy.get("mr_rounds", 48))
    for a in ps:
        value = z * modulus + offset + a
        res = is_prime(value, rounds)
        if res.verdict == "composite":
            return reject(f"listed offset {a} is composite (witness {res.witness})")

    gaps = [b - a for a, b in zip(ps, ps[1:])]
    if min(gaps) != cert.min_gap:
        return reject(
            f"recorded min_gap {cert.min_gap} differs from recomputed {min(gaps)}"
        )
    if cert.min_gap < cert.epsilon * cert.y:
        return reject(
            f"min gap {cert.min_gap} below the demand "
            f"{cert.epsilon * cert.y:.6g}"
        )

    needed = set(range(ps[0] + 1, ps[-1])) - set(ps)
    covered = [int(e["offset"]) for e in cert.evidence]
    if len(covered) != len(set(covered)):
        return reject("duplicate evidence offsets")
    if set(covered) != needed:
        missing = sorted(needed - set(covered))
        extra = sorted(set(covered) - needed)
        if missing:
            return reject(f"no compositeness evidence for offset {missing[0]}")
        return reject(f"evidence for offset {extra[0]} outside the window")

    for e in cert.evidence:
        a = int(e["offset"])
        value = z * modulus + offset + a
        witness = int(e["witness"])
        kind = e["kind"]
        if kind == "gcd_with_modulus":
            if not (1 < witness < value and value % witness == 0
                    and modulus % witness == 0):
                return reject(f"bad shared-factor evidence at offset {a}")
        elif kind == "explicit_factor":
            if not (1 < witness < value and value % witness == 0):
                return reject(f"bad factor evidence at offset {a}")
        elif kind == "miller_rabin_witness":
            if value < 3 or value % 2 == 0:
                return reject(f"evidence value at offset {a} is trivially even")
            if not mr_composite_witness(value, witness):
                return reject(f"base {witness} does not witness offset {a}")
        else:
            return reject(f"unknown evidence kind {kind!r} at offset {a}")

    return VerificationOutcome(True)
