"""Number-theoretic primitives: sieves, primality, CRT, iterated logs.

Everything downstream (interval sieving, weight systems, covering
experiments, certificate verification) is built on the functions here, so
they favour exactness and explicitness over raw speed.  Densities are
Fractions, primality verdicts carry their evidence, and the probabilistic
primality path derives its bases deterministically from the number under
test so that certificates can be re-checked bit for bit.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "prime_mask",
    "sieve_primes",
    "primes_in_range",
    "iter_prime_segments",
    "prime_count",
    "primes_after",
    "smallest_prime_factor_table",
    "factorize",
    "PrimalityResult",
    "is_prime",
    "mr_composite_witness",
    "derived_mr_bases",
    "DETERMINISTIC_MR_LIMIT",
    "DETERMINISTIC_MR_BASES",
    "NonCoprimeModuliError",
    "crt_combine",
    "mertens_density",
    "LogDomainError",
    "log_iterates",
    "smooth_count",
    "smooth_estimate",
    "chain_gap_record",
]


# ---------------------------------------------------------------------------
# sieves


def prime_mask(limit: int) -> np.ndarray:
    """Boolean array m of length limit+1 with m[n] true iff n is prime."""
    limit = int(limit)
    if limit < 1:
        return np.zeros(max(limit + 1, 1), dtype=bool)
    mask = np.ones(limit + 1, dtype=bool)
    mask[: min(2, limit + 1)] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (empty for limit < 2)."""
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    return np.nonzero(prime_mask(limit))[0].astype(np.int64)


def iter_prime_segments(
    limit: int, segment_size: int = 1 << 20
) -> Iterator[np.ndarray]:
    """Yield consecutive arrays of primes <= limit, in increasing order.

    The first chunk is the base sieve up to sqrt(limit); later chunks are
    produced segment by segment so memory stays O(sqrt(limit) + segment).
    """
    limit = int(limit)
    if limit < 2:
        return
    root = math.isqrt(limit)
    base = sieve_primes(root)
    if base.size:
        yield base
    base_list = base.tolist()
    lo = root + 1
    while lo <= limit:
        hi = min(lo + segment_size - 1, limit)
        mask = np.ones(hi - lo + 1, dtype=bool)
        if lo <= 1:
            mask[: max(0, 2 - lo)] = False
        for p in base_list:
            start = ((lo + p - 1) // p) * p
            mask[start - lo :: p] = False
        seg = np.nonzero(mask)[0]
        if seg.size:
            yield (seg + lo).astype(np.int64)
        lo = hi + 1


def primes_in_range(lo: int, hi: int) -> np.ndarray:
    """Primes p with lo < p <= hi, as an int64 array."""
    lo, hi = int(lo), int(hi)
    if hi <= max(lo, 1):
        return np.empty(0, dtype=np.int64)
    root = math.isqrt(hi)
    base = sieve_primes(root)
    start = max(lo + 1, 2)
    mask = np.ones(hi - start + 1, dtype=bool)
    for p in base.tolist():
        first = max(p * p, ((start + p - 1) // p) * p)
        if first <= hi:
            mask[first - start :: p] = False
    return (np.nonzero(mask)[0] + start).astype(np.int64)


def prime_count(limit: int) -> int:
    """pi(limit): number of primes <= limit."""
    return sum(int(seg.size) for seg in iter_prime_segments(limit))


def primes_after(bound: int, count: int) -> tuple[int, ...]:
    """The first `count` primes strictly greater than `bound`."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    out: list[int] = []
    lo = max(int(bound), 1)
    span = max(64, 8 * count)
    while len(out) < count:
        hi = lo + span
        out.extend(int(p) for p in primes_in_range(lo, hi))
        lo = hi
        span *= 2
    return tuple(out[:count])


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit.

    spf[0] and spf[1] are set to 0 and 1 and must not be used as factors.
    """
    limit = int(limit)
    spf = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == p:
            sl = spf[p * p :: p]
            np.minimum(sl, p, out=sl)
    return spf


def factorize(n: int, spf: np.ndarray | None = None) -> dict[int, int]:
    """Prime factorisation of n >= 1 as {prime: exponent}.

    Uses the supplied smallest-prime-factor table when n fits in it,
    otherwise plain trial division (adequate for the modest sizes this
    package factors outside of certificates).
    """
    n = int(n)
    if n < 1:
        raise ValueError("factorize requires n >= 1")
    out: dict[int, int] = {}
    if spf is not None and n < spf.shape[0]:
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out[d] = e
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = 1
    return out


# ---------------------------------------------------------------------------
# primality

# Below this bound the 12-base Miller-Rabin test is a proof, not a heuristic.
DETERMINISTIC_MR_LIMIT = 3_317_044_064_679_887_385_961_981
DETERMINISTIC_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_PRIMES = tuple(int(p) for p in sieve_primes(1000))


def mr_composite_witness(n: int, a: int) -> bool:
    """True iff base a witnesses that odd n >= 3 is composite.

    A True return is a deterministically checkable certificate of
    compositeness; False means n is a strong probable prime to base a.
    """
    n = int(n)
    a = int(a) % n
    if a in (0, 1, n - 1):
        return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return False
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return False
    return True


def derived_mr_bases(n: int, rounds: int) -> list[int]:
    """Deterministic pseudo-random Miller-Rabin bases for n.

    Base i is SHA-256(f"{n}:{i}") reduced into [2, n-2].  Deriving bases
    from n itself keeps certificates reproducible without shipping them.
    """
    bases: list[int] = []
    for i in range(rounds):
        h = hashlib.sha256(f"{n}:{i}".encode()).digest()
        bases.append(2 + int.from_bytes(h, "big") % (n - 3))
    return bases


@dataclass(frozen=True)
class PrimalityResult:
    """Primality verdict plus the evidence that produced it.

    verdict is one of "prime", "probable_prime", "composite".  For
    composites, `witness` is a prime factor when method is
    "trial_division", and a Miller-Rabin witness base when method is
    "miller_rabin".  error_bound is the standard 4**-rounds bound for
    probable primes and 0 for proven verdicts.
    """

    n: int
    verdict: str
    method: str
    witness: int | None = None
    rounds: int = 0
    error_bound: float = 0.0
    bases: tuple[int, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.verdict != "composite"


def is_prime(n: int, rounds: int = 64) -> PrimalityResult:
    """Test n for primality, returning the verdict with its evidence.

    Proven (verdict "prime"/"composite") below DETERMINISTIC_MR_LIMIT;
    above it, "probable_prime" with `rounds` derived bases.  n < 2 is
    composite by convention with no witness.
    """
    n = int(n)
    if n < 2:
        return PrimalityResult(n, "composite", "convention")
    for p in _TRIAL_PRIMES:
        if n == p:
            return PrimalityResult(n, "prime", "trial_division")
        if n % p == 0:
            return PrimalityResult(n, "composite", "trial_division", witness=p)
    if n < 1000 * 1000:
        # trial primes cover sqrt(n), so surviving them proves primality
        return PrimalityResult(n, "prime", "trial_division")
    if n < DETERMINISTIC_MR_LIMIT:
        for a in DETERMINISTIC_MR_BASES:
            if mr_composite_witness(n, a):
                return PrimalityResult(
                    n, "composite", "miller_rabin", witness=a,
                    bases=DETERMINISTIC_MR_BASES,
                )
        return PrimalityResult(
            n, "prime", "miller_rabin", bases=DETERMINISTIC_MR_BASES
        )
    if rounds < 1:
        raise ValueError("rounds must be positive for probabilistic testing")
    bases = derived_mr_bases(n, rounds)
    for a in bases:
        if mr_composite_witness(n, a):
            return PrimalityResult(
                n, "composite", "miller_rabin", witness=a, rounds=rounds
            )
    return PrimalityResult(
        n,
        "probable_prime",
        "miller_rabin",
        rounds=rounds,
        error_bound=4.0 ** (-rounds),
        bases=tuple(bases),
    )


# ---------------------------------------------------------------------------
# CRT


class NonCoprimeModuliError(ValueError):
    """Raised when CRT moduli share a factor (combination is ill-posed)."""

    def __init__(self, m1: int, m2: int):
        self.moduli = (m1, m2)
        g = math.gcd(m1, m2)
        super().__init__(
            f"moduli {m1} and {m2} share the factor gcd={g}; "
            "residue systems must use pairwise coprime moduli"
        )


def crt_combine(congruences: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Solve n = r (mod m) simultaneously for pairwise coprime moduli.

    Returns (offset, modulus) with 0 <= offset < modulus = product of the
    moduli.  Incremental combination keeps intermediate values small and
    lets the coprimality check name the exact offending pair.
    """
    offset = 0
    modulus = 1
    seen: list[int] = []
    for r, m in congruences:
        m = int(m)
        if m < 1:
            raise ValueError(f"modulus {m} must be positive")
        if math.gcd(m, modulus) > 1:
            for m_prev in seen:
                if math.gcd(m, m_prev) > 1:
                    raise NonCoprimeModuliError(m_prev, m)
        r = int(r) % m
        if m > 1:
            inv = pow(modulus % m, -1, m)
            offset = offset + modulus * ((r - offset) % m * inv % m)
        modulus *= m
        seen.append(m)
    return offset % modulus, modulus


# ---------------------------------------------------------------------------
# densities and logs


def mertens_density(primes: Iterable[int]) -> Fraction:
    """Exact product of (1 - 1/p) over the given primes, as a Fraction."""
    out = Fraction(1)
    for p in primes:
        p = int(p)
        if p < 2:
            raise ValueError(f"{p} is not a valid prime for a density product")
        out *= Fraction(p - 1, p)
    return out


class LogDomainError(ValueError):
    """An iterated logarithm left the positive domain."""

    def __init__(self, k: int, value: float):
        self.k = k
        self.value = value
        super().__init__(
            f"iterate log_{k} = {value!r} is not positive; "
            "increase x or lower the iteration depth"
        )


def log_iterates(x: float, depth: int) -> tuple[float, ...]:
    """(log x, log log x, ...) to the given depth, all strictly positive.

    Downstream parameter formulas divide by these iterates, so any
    nonpositive value is rejected here with the iterate named rather than
    surfacing later as a cryptic ZeroDivisionError.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    x = float(x)
    if x <= 0:
        raise ValueError(f"x = {x!r} must be positive")
    vals: list[float] = []
    cur = x
    for k in range(1, depth + 1):
        cur = math.log(cur)
        if cur <= 0:
            raise LogDomainError(k, cur)
        vals.append(cur)
    return tuple(vals)


# ---------------------------------------------------------------------------
# smooth numbers


def smooth_count(y: float, z: float) -> int:
    """Count integers 1 <= n <= y whose prime factors are all <= z.

    Exhaustive depth-first enumeration over nondecreasing prime factor
    sequences; each smooth number is generated exactly once.  1 is smooth.
    """
    limit = math.floor(y)
    if limit < 1:
        return 0
    ps = [int(p) for p in sieve_primes(min(limit, math.floor(z)))]
    count = 0
    stack: list[tuple[int, int]] = [(1, 0)]
    while stack:
        val, idx = stack.pop()
        count += 1
        for j in range(idx, len(ps)):
            nv = val * ps[j]
            if nv > limit:
                break
            stack.append((nv, j))
    return count


def smooth_estimate(y: float, z: float) -> float:
    """First-order smooth-count estimate y * exp(-u log u), u = log y/log z.

    Crude by design (no Dickman rho); used only to sanity-scale counts,
    never as an expected value in assertions.
    """
    if y <= 1 or z <= 1:
        raise ValueError("smooth_estimate requires y > 1 and z > 1")
    u = math.log(y) / math.log(z)
    return y * math.exp(-u * math.log(u)) if u > 0 else float(y)


# ---------------------------------------------------------------------------
# gap chains


def chain_gap_record(X: int, k: int = 1) -> int:
    """Largest L such that k consecutive prime gaps below X all reach L.

    Scans every run p_n < p_{n+1} < ... < p_{n+k} <= X and returns the
    maximum over runs of the smallest gap in the run.  k = 1 is the
    classical maximal prime gap below X.
    """
    X = int(X)
    if k < 1:
        raise ValueError("k must be at least 1")
    chunks: list[np.ndarray] = []
    prev: int | None = None
    for seg in iter_prime_segments(X):
        if prev is not None:
            chunks.append(np.array([int(seg[0]) - prev], dtype=np.int64))
        if seg.size > 1:
            chunks.append(np.diff(seg))
        prev = int(seg[-1])
    if not chunks:
        raise ValueError(f"no prime gaps exist below X={X}")
    gaps = np.concatenate(chunks)
    if gaps.size < k:
        raise ValueError(
            f"only {gaps.size} prime gaps below X={X}; need a run of {k}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(gaps, k)
    return int(windows.min(axis=1).max())
