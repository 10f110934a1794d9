"""Admissible tuples and normalized sieve-weight tables.

A weight table assigns to every middle prime p a nonnegative row
w(p, n) over integer shifts n in [-y, y].  Rows are used exclusively in
normalized form w(p, n)/rowsum(p), i.e. as the law of a random shift, so
every downstream claim is scale-free.  Two surrogate kinds are provided:

  uniform   w = 1 exactly on the shifts n for which every translate
            n + h_i p lands in the target interval (x, y]
  maynard   w(p, n) = (sum over divisor tuples of a signed, smoothly
            truncated Moebius weight)^2, the classical multidimensional
            sieve shape

For the maynard kind the divisor tuples (d_1, .., d_r) run over
squarefree products m = d_1 * .. * d_r < R = x**theta whose prime factors
all exceed r and avoid the excluded modulus, with d_i | n + h_i p and

    weight = prod_i mu(d_i) * F(log m / log R),   F(t) = max(1 - t, 0)**r.

Since the weight depends on the d_i only through m, summing over tuples
reduces to a sum over squarefree m weighted by prod_{s | m} A_s(n) where
A_s(n) = #{i : s | n + h_i p}; rows are built by accumulating that sum
with one strided pass per support prime, and single points are evaluated
independently by factoring the r translates.  The two paths agree to
floating round-off and are cross-checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .nt import factorize, primes_after, sieve_primes, smallest_prime_factor_table
from .partition import PrimePartition

__all__ = [
    "AdmissibleTuple",
    "first_primes_tuple",
    "is_admissible",
    "WeightRow",
    "WeightTable",
    "build_weights",
    "sample_weighted_offset",
    "WeightContractReport",
    "weight_contract_report",
]


def is_admissible(offsets: Sequence[int]) -> bool:
    """True iff the offsets miss a residue class modulo every prime <= len.

    Primes above the tuple length can never be covered by it, so only
    p <= len(offsets) need checking.  Duplicate entries are a caller bug.
    """
    hs = [int(h) for h in offsets]
    if len(set(hs)) != len(hs):
        raise ValueError("offsets must be distinct")
    for p in sieve_primes(len(hs)).tolist():
        if len({h % p for h in hs}) == p:
            return False
    return True


@dataclass(frozen=True)
class AdmissibleTuple:
    """Strictly increasing offsets that miss a class mod every small prime."""

    offsets: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.offsets:
            raise ValueError("tuple must be nonempty")
        offs = tuple(int(h) for h in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise ValueError("offsets must be strictly increasing")
        if not is_admissible(offs):
            raise ValueError(f"offsets {offs} cover all classes mod some prime")

    @property
    def r(self) -> int:
        return len(self.offsets)

    @property
    def span(self) -> int:
        return self.offsets[-1] - self.offsets[0]


def first_primes_tuple(r: int) -> AdmissibleTuple:
    """The first r primes above r; always admissible, contained in [0, 2r^2].

    Admissible because none of the entries is divisible by any prime
    p <= r, so class 0 is missed mod every such p.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    return AdmissibleTuple(primes_after(r, r))


@dataclass(frozen=True)
class WeightRow:
    """One prime's weight row: values[j] = w(p, n_start + j), plus its sum."""

    p: int
    n_start: int
    values: np.ndarray
    row_sum: float

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


class WeightTable:
    """Lazily materialized rows w(p, .) for every weighted prime.

    Rows live on the common shift grid [-floor(y), floor(y)].  Row sums
    use compensated summation and are stored once; all normalized
    quantities divide by the stored sums.  Instances are immutable in
    effect: rows are cached on first access and never mutated.
    """

    def __init__(
        self,
        partition: PrimePartition,
        tuple_: AdmissibleTuple,
        kind: str,
        theta: float,
    ):
        self.partition = partition
        self.tuple = tuple_
        self.kind = kind
        self.theta = float(theta)
        self.level = float(partition.x) ** self.theta
        ny = math.floor(partition.y)
        self.n_min = -ny
        self.n_max = ny
        self._rows: dict[int, WeightRow] = {}
        self._cums: dict[int, np.ndarray] = {}
        self._matrix: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._spf: np.ndarray | None = None
        self._weighted_set = frozenset(
            int(p) for p in partition.weighted_primes.tolist()
        )
        # primes allowed into divisor products: r < s < R, s != excluded
        r = tuple_.r
        cap = math.ceil(self.level) - 1
        sup = sieve_primes(cap)
        sup = sup[(sup > r) & (sup.astype(float) < self.level)]
        b0 = partition.excluded_prime
        self.support_primes: list[int] = [
            int(s) for s in sup.tolist() if s != b0
        ]

    # -- construction ------------------------------------------------------

    def _uniform_row(self, p: int) -> WeightRow:
        offs = self.tuple.offsets
        x, y = self.partition.x, self.partition.y
        # all translates n + h_i p in (x, y] pins n to one interval
        lo = math.floor(x - offs[0] * p)        # n > x - h_1 p
        hi = math.floor(y - offs[-1] * p)       # n <= y - h_r p
        lo = max(lo, self.n_min - 1)
        hi = min(hi, self.n_max)
        length = max(0, hi - lo)
        if length == 0:
            return WeightRow(p, 0, np.zeros(0, dtype=np.float64), 0.0)
        vals = np.ones(length, dtype=np.float64)
        return WeightRow(p, lo + 1, vals, float(length))

    def _maynard_row(self, p: int) -> WeightRow:
        offs = self.tuple.offsets
        r = self.tuple.r
        n0 = self.n_min
        length = self.n_max - n0 + 1
        log_level = math.log(self.level)
        # A_s per shift: how many translates n + h_i p the prime s divides
        hits: list[tuple[int, np.ndarray]] = []
        for s in self.support_primes:
            a = np.zeros(length, dtype=np.int32)
            for h in offs:
                a[(-h * p - n0) % s :: s] += 1
            if a.any():
                hits.append((s, a))
        lam = np.ones(length, dtype=np.float64)  # m = 1 contributes F(0) = 1
        level = self.level

        def descend(start: int, m: int, sign: int, prod: np.ndarray) -> None:
            for j in range(start, len(hits)):
                s, a = hits[j]
                m2 = m * s
                if m2 >= level:
                    break
                prod2 = prod * a if prod is not None else a
                if not prod2.any():
                    continue
                f = (1.0 - math.log(m2) / log_level) ** r
                np.add(lam, (sign * f) * prod2, out=lam)
                descend(j + 1, m2, -sign, prod2)

        descend(0, 1, -1, None)
        w = lam * lam
        row_sum = math.fsum(w.tolist())
        return WeightRow(p, n0, w, row_sum)

    def row(self, p: int) -> WeightRow:
        p = int(p)
        if p not in self._rows:
            if p not in self._weighted_set:
                raise KeyError(f"{p} is not a weighted prime of this partition")
            builder = self._uniform_row if self.kind == "uniform" else self._maynard_row
            self._rows[p] = builder(p)
        return self._rows[p]

    def row_sums(self) -> dict[int, float]:
        return {
            int(p): self.row(int(p)).row_sum
            for p in self.partition.weighted_primes.tolist()
        }

    def matrix(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(primes, dense weight matrix on the full grid, row sums).

        Matrix shape is (#weighted primes, n_max - n_min + 1); rows whose
        stored window is narrower are zero-padded into place.
        """
        if self._matrix is None:
            ps = self.partition.weighted_primes.astype(np.int64)
            width = self.n_max - self.n_min + 1
            est_bytes = ps.size * width * 8
            if est_bytes > 1 << 30:
                raise MemoryError(
                    f"dense weight matrix would need {est_bytes / 2**30:.1f} "
                    "GiB; use a smaller toy scale"
                )
            W = np.zeros((ps.size, width), dtype=np.float64)
            sums = np.zeros(ps.size, dtype=np.float64)
            for i, p in enumerate(ps.tolist()):
                row = self.row(p)
                j0 = row.n_start - self.n_min
                W[i, j0 : j0 + row.values.shape[0]] = row.values
                sums[i] = row.row_sum
            W.setflags(write=False)
            sums.setflags(write=False)
            self._matrix = (ps, W, sums)
        return self._matrix

    # -- point evaluation ----------------------------------------------------

    def _spf_table(self) -> np.ndarray:
        if self._spf is None:
            top = self.n_max + self.tuple.offsets[-1] * int(
                self.partition.weighted_primes.max()
            )
            self._spf = smallest_prime_factor_table(max(top, 3))
        return self._spf

    def _maynard_point(self, p: int, n: int) -> float:
        r = self.tuple.r
        level = self.level
        log_level = math.log(level)
        b0 = self.partition.excluded_prime
        translates = [n + h * p for h in self.tuple.offsets]
        if any(v == 0 for v in translates):
            # zero is divisible by everything: every support prime counts
            zeros = sum(1 for v in translates if v == 0)
            counts = {}
            for s in self.support_primes:
                counts[s] = zeros + sum(
                    1 for v in translates if v != 0 and v % s == 0
                )
        else:
            spf = self._spf_table()
            counts = {}
            for v in translates:
                for s in factorize(abs(v), spf):
                    if s <= r or s == b0 or not s < level:
                        continue
                    counts[s] = counts.get(s, 0) + 1
        support = sorted(counts)

        def descend(start: int, m: int, sign: int, mult: int) -> float:
            total = 0.0
            for j in range(start, len(support)):
                s = support[j]
                m2 = m * s
                if m2 >= level:
                    break
                mult2 = mult * counts[s]
                f = (1.0 - math.log(m2) / log_level) ** r
                total += sign * f * mult2
                total += descend(j + 1, m2, -sign, mult2)
            return total

        lam = 1.0 + descend(0, 1, -1, 1)
        return lam * lam

    def weight_at(self, p: int, n: int) -> float:
        """w(p, n), evaluated independently of any cached row."""
        p, n = int(p), int(n)
        if n < self.n_min or n > self.n_max:
            return 0.0
        if self.kind == "uniform":
            x, y = self.partition.x, self.partition.y
            ok = all(
                x < n + h * p <= y for h in self.tuple.offsets
            )
            return 1.0 if ok else 0.0
        return self._maynard_point(p, n)

    def normalized_at(self, p: int, n: int) -> float:
        row_sum = self.row(p).row_sum
        if row_sum <= 0:
            raise ValueError(f"zero weight row for p = {p}")
        return self.weight_at(p, n) / row_sum


def build_weights(
    partition: PrimePartition,
    tuple_: AdmissibleTuple,
    kind: str = "maynard",
    theta: float = 0.25,
    *,
    r_cap: int = 16,
    enforce_offset_bound: bool = True,
) -> WeightTable:
    """Validate parameters and assemble a (lazy) weight table.

    theta sets the divisor level R = x**theta; enumeration cost grows
    steeply with theta and r, hence the r_cap guard.  Offsets must stay
    within [0, 2 r^2] unless the bound is explicitly waived.
    """
    if kind not in ("uniform", "maynard"):
        raise ValueError(f"unknown weight kind {kind!r}")
    if theta <= 0:
        raise ValueError(f"theta = {theta!r} must be positive")
    r = tuple_.r
    if not 1 <= r <= r_cap:
        raise ValueError(f"tuple length {r} outside [1, {r_cap}]")
    if enforce_offset_bound and not all(
        0 <= h <= 2 * r * r for h in tuple_.offsets
    ):
        raise ValueError(
            f"offsets {tuple_.offsets} leave [0, {2 * r * r}]; "
            "pass enforce_offset_bound=False to waive"
        )
    if partition.weighted_primes.size == 0:
        raise ValueError("partition has no weighted primes")
    return WeightTable(partition, tuple_, kind, theta)


def sample_weighted_offset(
    table: WeightTable,
    p: int,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw shift(s) n from the normalized row law w(p, .)/rowsum(p).

    Returns a single int when size is None, else an int64 array.
    """
    p = int(p)
    row = table.row(p)
    if row.row_sum <= 0:
        raise ValueError(f"zero weight row for p = {p}; nothing to sample")
    cum = table._cums.get(p)
    if cum is None:
        cum = np.cumsum(row.values)
        table._cums[p] = cum
    total = float(cum[-1])
    n_draws = 1 if size is None else int(size)
    u = rng.random(n_draws) * total
    idx = np.searchsorted(cum, u, side="right")
    vals = (row.n_start + idx).astype(np.int64)
    return int(vals[0]) if size is None else vals


# ---------------------------------------------------------------------------
# contract measurement


@dataclass(frozen=True)
class WeightContractReport:
    """Empirical dispersion and cross-shift leakage of a weight table.

    Four measured contracts:
      row sums      max/min ratio of row sums across weighted primes
      on-tuple      S(q, i) = sum_p w(p, q - h_i p)/rowsum(p): its mean,
                    spread, and the empirical coverage r * mean
      off-tuple     same sums at shifts h outside the tuple; reported both
                    per pair (off mean / on mean) and in aggregate form,
                    off mean relative to the whole-tuple scale r * on mean
      point mass    max_n w(p, n)/rowsum(p) over all rows
    """

    kind: str
    r: int
    theta: float
    row_sums: dict[int, float]
    row_sum_ratio: float
    zero_rows: int
    q_used: list[int]
    on_mean: float
    on_std: float
    on_max_rel_dev: float
    empirical_coverage: float
    off_offsets: list[int]
    off_means: dict[int, float]
    off_mean: float
    off_max_mean: float
    off_on_pair_ratio: float
    off_on_aggregate_ratio: float
    max_point_mass: float

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "r": self.r,
            "theta": self.theta,
            "row_sum_ratio": self.row_sum_ratio,
            "zero_rows": self.zero_rows,
            "n_q": len(self.q_used),
            "on_mean": self.on_mean,
            "on_std": self.on_std,
            "on_max_rel_dev": self.on_max_rel_dev,
            "empirical_coverage": self.empirical_coverage,
            "off_offsets": list(self.off_offsets),
            "off_mean": self.off_mean,
            "off_max_mean": self.off_max_mean,
            "off_on_pair_ratio": self.off_on_pair_ratio,
            "off_on_aggregate_ratio": self.off_on_aggregate_ratio,
            "max_point_mass": self.max_point_mass,
        }


def _gathered_sums(
    W: np.ndarray,
    sums: np.ndarray,
    keep: np.ndarray,
    p_arr: np.ndarray,
    q_arr: np.ndarray,
    h: int,
    n_min: int,
) -> np.ndarray:
    """For each q: sum over p of w(p, q - h p)/rowsum(p)."""
    idx = q_arr[:, None] - h * p_arr[None, :] - n_min
    ok = (idx >= 0) & (idx < W.shape[1]) & keep[None, :]
    safe = np.where(ok, idx, 0)
    vals = W[np.arange(p_arr.size)[None, :], safe]
    vals = np.where(ok, vals, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        normed = np.where(keep[None, :], vals / sums[None, :], 0.0)
    return normed.sum(axis=1)


def weight_contract_report(
    table: WeightTable,
    *,
    q_values: Iterable[int] | None = None,
    q_sample: int | None = None,
    off_offsets: Iterable[int] | None = None,
    rng: np.random.Generator | None = None,
) -> WeightContractReport:
    """Measure the four weight contracts on the table's own partition.

    q defaults to every target prime (optionally subsampled with rng);
    off-tuple shifts default to every integer shift that is geometrically
    capable of landing q - h p inside the support grid for at least one
    (q, p) pair, minus the tuple's own offsets.
    """
    part = table.partition
    offs = table.tuple.offsets
    r = table.tuple.r
    ps, W, sums = table.matrix()
    keep = sums > 0
    zero_rows = int((~keep).sum())
    if not keep.any():
        raise ValueError("every weight row is zero; contracts are undefined")

    if q_values is None:
        q_arr = part.target_primes.astype(np.int64)
    else:
        q_arr = np.array(sorted(int(q) for q in q_values), dtype=np.int64)
    if q_sample is not None and q_sample < q_arr.size:
        if rng is None:
            raise ValueError("q_sample without rng would be nondeterministic")
        q_arr = np.sort(rng.choice(q_arr, size=q_sample, replace=False))
    if q_arr.size == 0:
        raise ValueError("no target primes to measure against")

    p_min, p_max = int(ps.min()), int(ps.max())
    q_min, q_max = int(q_arr.min()), int(q_arr.max())

    def feasible(h: int) -> bool:
        lo = q_min - h * (p_max if h > 0 else p_min)
        hi = q_max - h * (p_min if h > 0 else p_max)
        return hi >= table.n_min and lo <= table.n_max

    if off_offsets is None:
        h_lo = math.floor((q_min - table.n_max) / p_max)
        h_hi = math.ceil((q_max - table.n_min) / p_min)
        cand = [h for h in range(h_lo, h_hi + 1) if h not in offs]
        off_list = [h for h in cand if feasible(h)]
    else:
        off_list = sorted(int(h) for h in off_offsets)
        bad = [h for h in off_list if h in offs]
        if bad:
            raise ValueError(f"off-tuple shifts {bad} are tuple offsets")

    on = np.stack(
        [
            _gathered_sums(W, sums, keep, ps.astype(np.int64), q_arr, h, table.n_min)
            for h in offs
        ],
        axis=1,
    )
    on_mean = float(on.mean())
    on_std = float(on.std())
    on_max_rel_dev = (
        float(np.abs(on - on_mean).max() / on_mean) if on_mean > 0 else math.inf
    )

    off_means: dict[int, float] = {}
    off_all: list[np.ndarray] = []
    for h in off_list:
        t = _gathered_sums(
            W, sums, keep, ps.astype(np.int64), q_arr, h, table.n_min
        )
        off_means[h] = float(t.mean())
        off_all.append(t)
    off_mean = float(np.concatenate(off_all).mean()) if off_all else 0.0
    off_max_mean = max(off_means.values()) if off_means else 0.0

    pair_ratio = off_mean / on_mean if on_mean > 0 else math.inf
    agg_ratio = off_mean / (r * on_mean) if on_mean > 0 else math.inf

    with np.errstate(divide="ignore", invalid="ignore"):
        point = np.where(keep, W.max(axis=1) / np.where(keep, sums, 1.0), 0.0)
    return WeightContractReport(
        kind=table.kind,
        r=r,
        theta=table.theta,
        row_sums={int(p): float(s) for p, s in zip(ps.tolist(), sums.tolist())},
        row_sum_ratio=(
            float(sums[keep].max() / sums[keep].min()) if keep.any() else math.inf
        ),
        zero_rows=zero_rows,
        q_used=[int(q) for q in q_arr.tolist()],
        on_mean=on_mean,
        on_std=on_std,
        on_max_rel_dev=on_max_rel_dev,
        empirical_coverage=r * on_mean,
        off_offsets=off_list,
        off_means=off_means,
        off_mean=off_mean,
        off_max_mean=off_max_mean,
        off_on_pair_ratio=pair_ratio,
        off_on_aggregate_ratio=agg_ratio,
        max_point_mass=float(point.max()),
    )
