"""The randomized residue-class construction and its statistical checks.

One run proceeds in four moves:

  1. draw one uniform residue class per small prime (the small-class
     vector), which carves out the sifted set;
  2. for every weighted prime p, compute exactly the survival mass:
     the normalized weight carried by shifts n for which every translate
     n + h_i p is sifted, i.e. the probability that a weighted random
     shift keeps the whole tuple alive;
  3. keep the stable primes, those whose survival mass stays within a
     tolerance eta of the fully-independent value sigma**r, and for each
     draw one shift from the conditional law (survivors of the mask,
     reweighted); unstable primes get the sentinel shift 0;
  4. measure how well the chosen translates cover the target primes,
     splitting each target's incoming mass into the on-tuple main part
     and the near-window off-tuple error part.

Exactness discipline: survival masses use compensated summation and are
re-derived through an independent numpy reduction each run; the two must
agree to 1e-12 relative or the run aborts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .seeds import derive_rng
from .sieving import SmallClassVector, sifted_mask
from .weights import WeightTable

__all__ = [
    "sample_small_classes",
    "correlation_probability",
    "survival_mask",
    "tuple_survival_mass",
    "select_stable_primes",
    "ConstructionRun",
    "run_construction",
    "sample_conditional_offset",
    "TargetCoverageReport",
    "target_coverage_report",
]

NORMALIZATION_RTOL = 1e-12


def sample_small_classes(
    small_primes: Iterable[int], rng: np.random.Generator
) -> SmallClassVector:
    """Independent uniform residue class for each small prime."""
    residues = {
        int(s): int(rng.integers(0, int(s)))
        for s in sorted(int(s) for s in small_primes)
    }
    return SmallClassVector(residues)


def correlation_probability(
    points: Sequence[int], small_primes: Iterable[int]
) -> Fraction:
    """Exact probability that all the given points survive a uniform draw.

    Independence across moduli makes this a finite product: for each
    small prime s, the points occupy some number of distinct classes and
    survival means the uniform class avoids them all.
    """
    pts = [int(n) for n in points]
    if not pts:
        raise ValueError("need at least one point")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    out = Fraction(1)
    for s in small_primes:
        s = int(s)
        hit = len({n % s for n in pts})
        out *= Fraction(s - hit, s)
    return out


def _kill_classes_inplace(
    keep: np.ndarray,
    n_start: int,
    p: int,
    offsets: Sequence[int],
    small_classes: SmallClassVector,
) -> None:
    # keep[j] corresponds to shift n = n_start + j; n survives iff every
    # translate n + h p avoids every chosen class a_s (mod s)
    for s, a in small_classes.residues.items():
        for h in offsets:
            keep[(a - h * p - n_start) % s :: s] = False


def survival_mask(
    table: WeightTable, p: int, small_classes: SmallClassVector
) -> np.ndarray:
    """Boolean mask over the row of p: shifts whose whole tuple is sifted."""
    row = table.row(int(p))
    keep = np.ones(row.values.shape[0], dtype=bool)
    _kill_classes_inplace(
        keep, row.n_start, int(p), table.tuple.offsets, small_classes
    )
    return keep


def tuple_survival_mass(
    small_classes: SmallClassVector, table: WeightTable, p: int
) -> float:
    """Normalized weight mass on the shifts that keep the tuple sifted."""
    row = table.row(int(p))
    if row.row_sum <= 0:
        raise ValueError(f"zero weight row for p = {p}")
    keep = survival_mask(table, p, small_classes)
    return math.fsum(row.values[keep].tolist()) / row.row_sum


def select_stable_primes(
    survival_mass: dict[int, float], sigma_r: float, eta: float
) -> list[int]:
    """Primes whose survival mass is within eta (relative) of sigma**r."""
    if sigma_r <= 0:
        raise ValueError("sigma**r must be positive")
    return sorted(
        p for p, xp in survival_mass.items() if abs(xp / sigma_r - 1) <= eta
    )


@dataclass
class ConstructionRun:
    """Everything one seeded construction run produced.

    chosen_offsets maps every weighted prime to its drawn shift, with the
    conventional sentinel 0 for primes outside the stable set (and for
    zero-weight rows, which can never be stable).  The survival matrix is
    the boolean sifted-tuple mask aligned with table.matrix() rows.
    """

    table: WeightTable
    seed: int
    eta: float
    small_classes: SmallClassVector
    sigma_r: float
    survival_mass: dict[int, float]
    stable_primes: list[int]
    n_unstable: int
    zero_rows: list[int]
    chosen_offsets: dict[int, int]
    normalization_max_rel_err: float
    mask_matrix: np.ndarray = field(repr=False)

    @property
    def partition(self):
        return self.table.partition

    def summary(self) -> dict:
        xs = np.array(
            [self.survival_mass[p] for p in sorted(self.survival_mass)]
        )
        return {
            "seed": self.seed,
            "eta": self.eta,
            "sigma_r": self.sigma_r,
            "n_weighted": len(self.survival_mass) + len(self.zero_rows),
            "n_stable": len(self.stable_primes),
            "n_unstable": self.n_unstable,
            "n_zero_rows": len(self.zero_rows),
            "survival_mass_mean": float(xs.mean()) if xs.size else 0.0,
            "survival_mass_min": float(xs.min()) if xs.size else 0.0,
            "survival_mass_max": float(xs.max()) if xs.size else 0.0,
            "normalization_max_rel_err": self.normalization_max_rel_err,
        }


def run_construction(
    table: WeightTable, seed: int, eta: float = 0.1
) -> ConstructionRun:
    """Execute one full seeded run (draw classes, masses, stable shifts).

    Determinism: the small-class vector and each prime's shift use
    substreams derived from (seed, label), so results do not depend on
    iteration order or on how many other draws happened in between.
    """
    part = table.partition
    rng_small = derive_rng(seed, "small-classes")
    small_classes = sample_small_classes(part.small_primes, rng_small)

    ps, W, sums = table.matrix()
    mask = np.ones(W.shape, dtype=bool)
    for i, p in enumerate(ps.tolist()):
        _kill_classes_inplace(
            mask[i], table.n_min, p, table.tuple.offsets, small_classes
        )

    sigma_r = float(part.sigma ** table.tuple.r)
    survival: dict[int, float] = {}
    zero_rows: list[int] = []
    max_rel = 0.0
    for i, p in enumerate(ps.tolist()):
        if sums[i] <= 0:
            zero_rows.append(p)
            continue
        masked = W[i][mask[i]]
        xp = math.fsum(masked.tolist()) / float(sums[i])
        # independent reduction path: plain numpy pairwise sum
        xp_np = float((W[i] * mask[i]).sum() / sums[i])
        denom = max(abs(xp), 1e-300)
        rel = abs(xp_np - xp) / denom
        max_rel = max(max_rel, rel)
        if rel > NORMALIZATION_RTOL:
            raise AssertionError(
                f"survival mass normalization drifted for p={p}: "
                f"{xp} vs {xp_np} (rel {rel:.3e})"
            )
        survival[p] = xp

    stable = select_stable_primes(survival, sigma_r, eta)
    stable_set = set(stable)

    chosen: dict[int, int] = {}
    for i, p in enumerate(ps.tolist()):
        if p not in stable_set:
            chosen[p] = 0
            continue
        vals = W[i] * mask[i]
        total = vals.sum()
        if total <= 0:
            raise ValueError(
                f"stable prime {p} has zero conditional mass; eta too loose"
            )
        cum = np.cumsum(vals)
        rng_p = derive_rng(seed, "offset", str(p))
        u = rng_p.random() * float(cum[-1])
        j = int(np.searchsorted(cum, u, side="right"))
        chosen[p] = table.n_min + j

    return ConstructionRun(
        table=table,
        seed=seed,
        eta=eta,
        small_classes=small_classes,
        sigma_r=sigma_r,
        survival_mass=survival,
        stable_primes=stable,
        n_unstable=len(survival) - len(stable),
        zero_rows=zero_rows,
        chosen_offsets=chosen,
        normalization_max_rel_err=max_rel,
        mask_matrix=mask,
    )


def sample_conditional_offset(
    run: ConstructionRun, p: int, rng: np.random.Generator
) -> int:
    """Draw a fresh shift from the conditional (sifted-tuple) law for p.

    Primes outside the stable set return the sentinel 0.  Every returned
    shift n satisfies: each translate n + h_i p avoids every chosen small
    class.
    """
    p = int(p)
    if p not in set(run.stable_primes):
        return 0
    table = run.table
    ps, W, sums = table.matrix()
    i = int(np.nonzero(ps == p)[0][0])
    vals = W[i] * run.mask_matrix[i]
    cum = np.cumsum(vals)
    u = rng.random() * float(cum[-1])
    return table.n_min + int(np.searchsorted(cum, u, side="right"))


@dataclass(frozen=True)
class TargetCoverageReport:
    """Coverage mass received by sampled sifted targets, split by shift.

    For each sampled target q the incoming mass is
    sigma**-r * sum over stable p of the conditional-law probability of
    the shift q - h p, accumulated separately over tuple shifts (main)
    and over non-tuple shifts within the |h| <= y/x window (error).
    """

    coverage_target: float
    sigma_r: float
    n_stable: int
    n_sifted_targets: int
    stride: int
    q_used: list[int]
    error_offsets: list[int]
    main_mean: float
    main_std: float
    main_cv: float
    main_min: float
    main_max: float
    mean_abs_rel_dev: float
    error_mean: float
    error_max: float
    frac_error_above_tenth_main: float

    def summary(self) -> dict:
        return {
            "coverage_target": self.coverage_target,
            "n_stable": self.n_stable,
            "n_sifted_targets": self.n_sifted_targets,
            "n_q_sampled": len(self.q_used),
            "error_offsets": list(self.error_offsets),
            "main_mean": self.main_mean,
            "main_std": self.main_std,
            "main_cv": self.main_cv,
            "main_min": self.main_min,
            "main_max": self.main_max,
            "mean_abs_rel_dev": self.mean_abs_rel_dev,
            "error_mean": self.error_mean,
            "error_max": self.error_max,
            "frac_error_above_tenth_main": self.frac_error_above_tenth_main,
        }


def target_coverage_report(
    run: ConstructionRun,
    coverage_target: float,
    *,
    q_stride: int | None = None,
    max_q: int = 512,
) -> TargetCoverageReport:
    """Measure main/error coverage of sifted targets against the target level.

    Sampling is deterministic and stratified: every stride-th surviving
    target, stride chosen so at most max_q targets are scored.
    """
    table = run.table
    part = run.partition
    q_all = part.target_primes.astype(np.int64)
    alive = sifted_mask(q_all, run.small_classes)
    q_sifted = q_all[alive]
    if q_sifted.size == 0:
        raise ValueError("no sifted targets survive this small-class draw")
    stride = q_stride if q_stride is not None else max(
        1, math.ceil(q_sifted.size / max_q)
    )
    q_arr = q_sifted[::stride]

    ps, W, sums = table.matrix()
    stable_set = set(run.stable_primes)
    good_idx = np.array(
        [i for i, p in enumerate(ps.tolist()) if p in stable_set], dtype=np.int64
    )
    if good_idx.size == 0:
        raise ValueError("no stable primes; nothing covers the targets")
    with np.errstate(divide="ignore", invalid="ignore"):
        Z = np.where(
            sums[good_idx, None] > 0,
            W[good_idx] * run.mask_matrix[good_idx] / sums[good_idx, None],
            0.0,
        )
    p_vec = ps[good_idx].astype(np.int64)

    def gathered(h: int) -> np.ndarray:
        idx = q_arr[:, None] - h * p_vec[None, :] - table.n_min
        ok = (idx >= 0) & (idx < Z.shape[1])
        safe = np.where(ok, idx, 0)
        vals = Z[np.arange(p_vec.size)[None, :], safe]
        return np.where(ok, vals, 0.0).sum(axis=1)

    inv_sigma_r = 1.0 / run.sigma_r
    main = np.zeros(q_arr.size)
    for h in table.tuple.offsets:
        main += gathered(h)
    main *= inv_sigma_r

    h_window = math.floor(part.y / part.x)
    err_offsets = [
        h
        for h in range(-h_window, h_window + 1)
        if h not in table.tuple.offsets
    ]
    error = np.zeros(q_arr.size)
    for h in err_offsets:
        error += gathered(h)
    error *= inv_sigma_r

    main_mean = float(main.mean())
    rel_dev = (
        np.abs(main - coverage_target) / coverage_target
        if coverage_target > 0
        else np.full_like(main, math.inf)
    )
    return TargetCoverageReport(
        coverage_target=coverage_target,
        sigma_r=run.sigma_r,
        n_stable=len(run.stable_primes),
        n_sifted_targets=int(q_sifted.size),
        stride=stride,
        q_used=[int(q) for q in q_arr.tolist()],
        error_offsets=err_offsets,
        main_mean=main_mean,
        main_std=float(main.std()),
        main_cv=float(main.std() / main_mean) if main_mean > 0 else math.inf,
        main_min=float(main.min()),
        main_max=float(main.max()),
        mean_abs_rel_dev=float(rel_dev.mean()),
        error_mean=float(error.mean()),
        error_max=float(error.max()),
        frac_error_above_tenth_main=float(
            (error > main / 10).mean()
        ),
    )
