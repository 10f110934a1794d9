"""Residue systems, sifted intervals, and the smooth residual accounting.

The sieving story in one sentence: pick one forbidden residue class per
prime, strike those classes from a target interval, and study what
survives.  This module owns the data types for that story

  ResidueSystem     prime -> forbidden class, one distinguished modulus
                    exempted
  SievedSet         immutable bitmap of the survivors of an interval
  SmallClassVector  the random classes chosen for the small primes only

plus the operations that build full systems out of the partial random
data, split the survivors into target primes versus smooth residue, and a
deterministic greedy baseline in the classical style of Erdos and Rankin
for comparison runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .nt import is_prime, prime_mask, primes_in_range
from .partition import PrimePartition

__all__ = [
    "ResidueSystem",
    "SievedSet",
    "SmallClassVector",
    "sift_interval",
    "sifted_membership",
    "sifted_mask",
    "assemble_full_system",
    "ResidualReport",
    "residual_smooth_set",
    "greedy_rankin",
]


def _check_prime_keys(keys: Iterable[int]) -> None:
    ks = sorted(int(k) for k in keys)
    if not ks:
        return
    top = ks[-1]
    if top <= 100_000_000:
        mask = prime_mask(top)
        bad = [k for k in ks if not mask[k]]
    else:
        bad = [k for k in ks if not is_prime(k)]
    if bad:
        raise ValueError(f"non-prime moduli in residue system: {bad[:10]}")


@dataclass(frozen=True)
class ResidueSystem:
    """One forbidden residue class per prime modulus.

    entries maps each prime p to the class a_p in [0, p) that the sieve
    removes.  `excluded` is the one modulus (1 for none) that must never
    appear as a key.  Set validate=False only when the caller constructed
    the keys from a prime sieve itself.
    """

    entries: dict[int, int]
    excluded: int = 1
    validate: bool = True

    def __post_init__(self) -> None:
        if self.excluded in self.entries:
            raise ValueError(
                f"excluded modulus {self.excluded} appears in the system"
            )
        for p, a in self.entries.items():
            if not 0 <= a < p:
                raise ValueError(f"class {a} not reduced modulo {p}")
        if self.validate:
            _check_prime_keys(self.entries.keys())

    def __len__(self) -> int:
        return len(self.entries)

    def moduli(self) -> np.ndarray:
        return np.array(sorted(self.entries), dtype=np.int64)


@dataclass(frozen=True)
class SievedSet:
    """Immutable survivor bitmap over the interval (lo, hi].

    bitmap[i] corresponds to n = lo + 1 + i; offset addressing keeps the
    representation valid for spans up to 1e8 (one byte per element, the
    price of vectorized strided sieving).  Cardinality is precomputed.
    """

    lo: int
    hi: int
    bitmap: np.ndarray
    count: int = field(default=-1)

    def __post_init__(self) -> None:
        if self.lo >= self.hi:
            raise ValueError(f"empty interval ({self.lo}, {self.hi}]")
        if self.bitmap.shape[0] != self.hi - self.lo:
            raise ValueError("bitmap length does not match the interval")
        self.bitmap.setflags(write=False)
        if self.count < 0:
            object.__setattr__(self, "count", int(self.bitmap.sum()))

    def __contains__(self, n: int) -> bool:
        return self.lo < n <= self.hi and bool(self.bitmap[n - self.lo - 1])

    def members(self) -> np.ndarray:
        """Surviving values themselves, ascending."""
        return np.nonzero(self.bitmap)[0].astype(np.int64) + self.lo + 1

    def count_between(self, a: float, b: float) -> int:
        """Number of survivors n with a <= n <= b."""
        lo_i = max(0, math.ceil(a) - self.lo - 1)
        hi_i = min(self.bitmap.shape[0], math.floor(b) - self.lo)
        if hi_i <= lo_i:
            return 0
        return int(self.bitmap[lo_i:hi_i].sum())

    def runs(self) -> list[tuple[int, int]]:
        """Run-length encoding of the members as (start_value, length)."""
        idx = np.nonzero(self.bitmap)[0]
        if idx.size == 0:
            return []
        breaks = np.nonzero(np.diff(idx) > 1)[0]
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [idx.size - 1]))
        return [
            (int(idx[s]) + self.lo + 1, int(idx[e] - idx[s]) + 1)
            for s, e in zip(starts, ends)
        ]


def sift_interval(lo: int, hi: int, system: ResidueSystem) -> SievedSet:
    """Survivors of (lo, hi] after removing n = a_p (mod p) for every entry."""
    lo, hi = int(lo), int(hi)
    if lo >= hi:
        raise ValueError(f"empty interval ({lo}, {hi}]")
    start = lo + 1
    alive = np.ones(hi - lo, dtype=bool)
    for p, a in system.entries.items():
        alive[(a - start) % p :: p] = False
    return SievedSet(lo=lo, hi=hi, bitmap=alive)


@dataclass(frozen=True)
class SmallClassVector:
    """Chosen residue classes for the small primes, one class per prime."""

    residues: dict[int, int]

    def __post_init__(self) -> None:
        for s, a in self.residues.items():
            if not 0 <= a < s:
                raise ValueError(f"class {a} not reduced modulo {s}")

    def primes(self) -> tuple[int, ...]:
        return tuple(sorted(self.residues))


def sifted_membership(n: int, small_classes: SmallClassVector) -> bool:
    """True iff n avoids every chosen small-prime class."""
    n = int(n)
    return all(n % s != a for s, a in small_classes.residues.items())


def sifted_mask(values: np.ndarray, small_classes: SmallClassVector) -> np.ndarray:
    """Vectorized sifted_membership over an integer array."""
    keep = np.ones(values.shape, dtype=bool)
    for s, a in small_classes.residues.items():
        keep &= (values % s) != a
    return keep


def assemble_full_system(
    small_classes: SmallClassVector,
    chosen_offsets: Mapping[int, int],
    partition: PrimePartition,
) -> ResidueSystem:
    """Extend the random choices to a system over every prime up to x.

    Small primes take their chosen classes, weighted primes p take
    chosen_offsets[p] reduced mod p, and every other prime (the excluded
    modulus aside) forbids class 0, i.e. sieves out its own multiples.
    """
    small = {int(s) for s in partition.small_primes}
    if set(small_classes.residues) != small:
        raise ValueError(
            "small-class vector does not cover exactly the small primes"
        )
    weighted = {int(p) for p in partition.weighted_primes}
    missing = sorted(weighted - {int(p) for p in chosen_offsets})
    if missing:
        raise ValueError(
            f"chosen offsets missing for {len(missing)} weighted primes: "
            f"{missing[:10]}"
        )
    entries: dict[int, int] = {}
    for p in primes_in_range(1, math.floor(partition.x)).tolist():
        if p == partition.excluded_prime:
            continue
        if p in small:
            entries[p] = small_classes.residues[p]
        elif p in weighted:
            entries[p] = int(chosen_offsets[p]) % p
        else:
            entries[p] = 0
    return ResidueSystem(
        entries=entries, excluded=partition.excluded_prime, validate=False
    )


@dataclass(frozen=True)
class ResidualReport:
    """Accounting for the non-target survivors of a full sieve.

    Every survivor must be a target prime or land in the residual; a prime
    survivor outside the targets (other than the excluded modulus itself)
    means the sieve or the partition is broken and raises instead.  The
    smoothness classification of residual members is informational: each
    entry pairs the member with whether it factors as a power of the
    excluded modulus times a product of primes at most small_high.
    """

    residual: list[int]
    target_survivors: list[int]
    count_bound: float | None
    classifications: list[tuple[int, bool]]

    @property
    def count(self) -> int:
        return len(self.residual)


def _is_smooth_times_excluded(n: int, cut: float, b0: int) -> bool:
    if b0 > 1:
        while n % b0 == 0:
            n //= b0
    d = 2
    while d * d <= n and d <= cut:
        while n % d == 0:
            n //= d
        d += 1 if d == 2 else 2
    return n == 1 or n <= cut


def residual_smooth_set(
    T: SievedSet, partition: PrimePartition
) -> tuple[set[int], ResidualReport]:
    """Split survivors into target primes and the smooth-ish residual.

    The count bound compares the residual size against
    log(x) * y * exp(-u log u) with u = log y / log small_high, the
    first-order smooth-count scale for the interval.
    """
    if (T.lo, T.hi) != (math.floor(partition.x), math.floor(partition.y)):
        raise ValueError(
            f"sieved interval ({T.lo}, {T.hi}] does not match the partition "
            f"target window ({partition.x}, {partition.y}]"
        )
    targets = set(partition.target_primes.tolist())
    residual: list[int] = []
    target_survivors: list[int] = []
    b0 = partition.excluded_prime
    for n in T.members().tolist():
        if n in targets:
            target_survivors.append(n)
            continue
        if is_prime(n) and n != b0:
            raise AssertionError(
                f"prime survivor {n} is outside the target set; "
                "the partition and the sieve disagree"
            )
        residual.append(n)
    bound = None
    if partition.small_high > 1 and partition.y > 1:
        u = math.log(partition.y) / math.log(partition.small_high)
        bound = math.log(partition.x) * partition.y * math.exp(
            -u * math.log(max(u, 1e-12))
        )
    classifications = [
        (n, _is_smooth_times_excluded(n, partition.small_high, b0))
        for n in residual
    ]
    return set(residual), ResidualReport(
        residual=residual,
        target_survivors=target_survivors,
        count_bound=bound,
        classifications=classifications,
    )


def greedy_rankin(
    partition: PrimePartition, medium_primes: Iterable[int]
) -> ResidueSystem:
    """Deterministic greedy baseline over the target interval.

    Every prime up to x forbids class 0, except the medium primes and the
    weighted primes, which are processed in ascending order and each
    assigned the class that removes the most current survivors of (x, y]
    (ties broken toward the smallest class).  Purely a yardstick for the
    randomized construction; no randomness anywhere.
    """
    medium = sorted(int(p) for p in medium_primes)
    _check_prime_keys(medium)
    small = set(partition.small_primes.tolist())
    weighted = sorted(partition.weighted_primes.tolist())
    clash = (set(medium) & small) | (set(medium) & set(weighted))
    if clash:
        raise ValueError(
            f"medium primes overlap the partition sets: {sorted(clash)[:10]}"
        )
    if partition.excluded_prime in medium:
        raise ValueError("medium primes must not contain the excluded modulus")

    lo, hi = math.floor(partition.x), math.floor(partition.y)
    start = lo + 1
    alive = np.ones(hi - lo, dtype=bool)
    entries: dict[int, int] = {}
    chosen = set(medium) | set(weighted)
    for p in primes_in_range(1, lo).tolist():
        if p == partition.excluded_prime or p in chosen:
            continue
        entries[p] = 0
        alive[(-start) % p :: p] = False
    for p in medium + weighted:
        counts = np.bincount(
            (np.nonzero(alive)[0] + start) % p, minlength=p
        )
        a = int(np.argmax(counts))
        entries[p] = a
        alive[(a - start) % p :: p] = False
    return ResidueSystem(
        entries=entries, excluded=partition.excluded_prime, validate=False
    )
