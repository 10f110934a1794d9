"""Residue systems, sifted intervals, and the survivor accounting."""

import math
import random

import numpy as np
import pytest

import gapchain as g
from gapchain import (
    ResidueSystem,
    SievedSet,
    SmallClassVector,
    assemble_full_system,
    greedy_rankin,
    residual_smooth_set,
    sift_interval,
    sifted_mask,
    sifted_membership,
)
from gapchain.nt import primes_in_range
from gapchain.seeds import derive_seed


def brute_sift(lo, hi, entries):
    return [
        n
        for n in range(lo + 1, hi + 1)
        if all(n % p != a for p, a in entries.items())
    ]


class TestResidueSystem:
    def test_validation(self):
        sys_ok = ResidueSystem({3: 1, 5: 4, 11: 0})
        assert len(sys_ok) == 3
        assert sys_ok.moduli().tolist() == [3, 5, 11]
        with pytest.raises(ValueError):
            ResidueSystem({3: 1, 5: 4}, excluded=5)
        with pytest.raises(ValueError):
            ResidueSystem({5: 5})
        with pytest.raises(ValueError):
            ResidueSystem({5: -1})
        with pytest.raises(ValueError):
            ResidueSystem({6: 1})
        ResidueSystem({6: 1}, validate=False)  # caller vouches for the keys

    def test_big_modulus_primality_path(self):
        ResidueSystem({100_000_007: 3})
        with pytest.raises(ValueError):
            ResidueSystem({100_000_001: 3})  # 17 * 5882353


class TestSiftInterval:
    def test_against_brute_force(self):
        rng = random.Random(derive_seed(0, "sift-brute"))
        pool = primes_in_range(1, 50).tolist()
        for _ in range(100):
            chosen = rng.sample(pool, rng.randint(1, len(pool)))
            entries = {p: rng.randrange(p) for p in chosen}
            lo = rng.randrange(0, 1_000)
            hi = lo + rng.randint(1, 400)
            sieved = sift_interval(lo, hi, ResidueSystem(entries))
            expect = brute_sift(lo, hi, entries)
            assert sieved.members().tolist() == expect
            assert sieved.count == len(expect)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            sift_interval(10, 10, ResidueSystem({3: 0}))


class TestSievedSet:
    def fixture(self):
        return sift_interval(100, 200, ResidueSystem({2: 0, 3: 0, 5: 0}))

    def test_membership_and_bounds(self):
        s = self.fixture()
        members = set(s.members().tolist())
        for n in range(90, 210):
            assert (n in s) == (n in members)

    def test_count_between_matches_brute(self):
        s = self.fixture()
        members = s.members().tolist()
        rng = random.Random(derive_seed(0, "count-between"))
        for _ in range(50):
            a = rng.uniform(90, 210)
            b = rng.uniform(90, 210)
            assert s.count_between(a, b) == sum(1 for n in members if a <= n <= b)
        assert s.count_between(150, 120) == 0

    def test_runs_reassemble_the_members(self):
        # no mod-2 entry, so adjacent survivors exist and runs stretch
        s = sift_interval(100, 200, ResidueSystem({3: 0, 5: 0}))
        flat = []
        for start, length in s.runs():
            assert length >= 1
            flat.extend(range(start, start + length))
        assert flat == s.members().tolist()
        assert any(length > 1 for _, length in s.runs())

    def test_bitmap_is_frozen(self):
        s = self.fixture()
        with pytest.raises(ValueError):
            s.bitmap[0] = False

    def test_construction_guards(self):
        with pytest.raises(ValueError):
            SievedSet(lo=5, hi=5, bitmap=np.ones(0, dtype=bool))
        with pytest.raises(ValueError):
            SievedSet(lo=0, hi=4, bitmap=np.ones(3, dtype=bool))


class TestSmallClassVector:
    def test_membership_scalar_vs_vector(self):
        rng = random.Random(derive_seed(0, "small-classes"))
        classes = SmallClassVector(
            {p: rng.randrange(p) for p in (37, 41, 43, 47)}
        )
        assert classes.primes() == (37, 41, 43, 47)
        values = np.arange(1, 4_000, dtype=np.int64)
        mask = sifted_mask(values, classes)
        scalars = np.array(
            [sifted_membership(int(n), classes) for n in values]
        )
        assert np.array_equal(mask, scalars)

    def test_reduced_classes_only(self):
        with pytest.raises(ValueError):
            SmallClassVector({37: 37})


class TestAssembleFullSystem:
    def test_every_prime_below_x_is_assigned(self, small_partition):
        part = small_partition
        small = {int(p): (i * 3) % int(p) for i, p in enumerate(part.small_primes)}
        offsets = {int(p): 7 * int(p) + 3 for p in part.weighted_primes}
        system = assemble_full_system(SmallClassVector(small), offsets, part)
        everyone = primes_in_range(1, 400).tolist()
        assert sorted(system.entries) == everyone
        assert system.excluded == 1
        for p in everyone:
            if p in small:
                assert system.entries[p] == small[p]
            elif p in offsets:
                assert system.entries[p] == offsets[p] % p
            else:
                assert system.entries[p] == 0

    def test_excluded_prime_left_out(self, small_partition):
        params = small_partition.params
        part = g.build_partition(params, excluded_prime=37)
        small = {int(p): 0 for p in part.small_primes}
        offsets = {int(p): 0 for p in part.weighted_primes}
        system = assemble_full_system(SmallClassVector(small), offsets, part)
        assert 37 not in system.entries
        assert system.excluded == 37

    def test_wrong_small_set_rejected(self, small_partition):
        part = small_partition
        offsets = {int(p): 0 for p in part.weighted_primes}
        small = {int(p): 0 for p in part.small_primes}
        short = dict(small)
        short.pop(int(part.small_primes[0]))
        with pytest.raises(ValueError):
            assemble_full_system(SmallClassVector(short), offsets, part)
        extra = dict(small)
        extra[31] = 0
        with pytest.raises(ValueError):
            assemble_full_system(SmallClassVector(extra), offsets, part)

    def test_missing_offsets_rejected(self, small_partition):
        part = small_partition
        small = {int(p): 0 for p in part.small_primes}
        offsets = {int(p): 0 for p in part.weighted_primes}
        offsets.pop(int(part.weighted_primes[-1]))
        with pytest.raises(ValueError):
            assemble_full_system(SmallClassVector(small), offsets, part)


class TestResidualSmoothSet:
    def full_sieve(self, part):
        small = {int(p): 1 for p in part.small_primes}
        offsets = {int(p): 5 for p in part.weighted_primes}
        system = assemble_full_system(SmallClassVector(small), offsets, part)
        return sift_interval(
            math.floor(part.x), math.floor(part.y), system
        )

    def test_split_and_classification(self, small_partition):
        part = small_partition
        sieved = self.full_sieve(part)
        residual, report = residual_smooth_set(sieved, part)
        assert residual == set(report.residual)
        assert report.count == len(report.residual)
        targets = set(part.target_primes.tolist())
        survivors = sieved.members().tolist()
        assert sorted(report.target_survivors + report.residual) == survivors
        assert set(report.target_survivors) <= targets
        assert not (residual & targets)
        # classification flag: prime support <= small_high, excluded aside
        cut = part.small_high
        for n, flag in report.classifications:
            support = set(g.factorize(n))
            expected = all(q <= cut for q in support)
            assert flag == expected
        u = math.log(part.y) / math.log(part.small_high)
        assert report.count_bound == pytest.approx(
            math.log(part.x) * part.y * math.exp(-u * math.log(u))
        )

    def test_excluded_prime_feeds_the_classifier(self, small_partition):
        part = g.build_partition(small_partition.params, excluded_prime=37)
        sieved = self.full_sieve(part)
        _, report = residual_smooth_set(sieved, part)
        cut = part.small_high
        for n, flag in report.classifications:
            support = set(g.factorize(n))
            assert flag == all(q <= cut or q == 37 for q in support)

    def test_interval_mismatch_rejected(self, small_partition):
        part = small_partition
        sieved = sift_interval(400, 5_999, ResidueSystem({3: 0}))
        with pytest.raises(ValueError):
            residual_smooth_set(sieved, part)


class TestGreedyRankin:
    def test_deterministic_and_total(self, small_partition):
        part = small_partition
        a = greedy_rankin(part, [97, 101])
        b = greedy_rankin(part, [101, 97])
        assert a.entries == b.entries
        assert sorted(a.entries) == primes_in_range(1, 400).tolist()

    def test_first_choice_is_the_argmax(self, small_partition):
        part = small_partition
        system = greedy_rankin(part, [97])
        lo, hi = 400, 6_000
        start = lo + 1
        alive = np.ones(hi - lo, dtype=bool)
        processed = sorted([97] + part.weighted_primes.tolist())
        for p in primes_in_range(1, lo).tolist():
            if p in processed:
                continue
            alive[(system.entries[p] - start) % p :: p] = False
        counts = np.bincount((np.nonzero(alive)[0] + start) % 97, minlength=97)
        assert system.entries[97] == int(np.argmax(counts))
        # and greedy must do at least as well as any class, first pick included
        assert counts[system.entries[97]] == counts.max()

    def test_clashing_medium_primes_rejected(self, small_partition):
        part = small_partition
        with pytest.raises(ValueError):
            greedy_rankin(part, [37])  # small prime
        with pytest.raises(ValueError):
            greedy_rankin(part, [int(part.weighted_primes[0])])
        with pytest.raises(ValueError):
            greedy_rankin(part, [15])  # not prime
        excl = g.build_partition(small_partition.params, excluded_prime=37)
        with pytest.raises(ValueError):
            greedy_rankin(excl, [37])

    def test_greedy_beats_the_all_zero_baseline(self, small_partition):
        part = small_partition
        medium = [97, 101, 103]
        system = greedy_rankin(part, medium)
        survivors = sift_interval(400, 6_000, system).count
        zero_entries = dict(system.entries)
        for p in medium + part.weighted_primes.tolist():
            zero_entries[p] = 0
        baseline = sift_interval(
            400, 6_000, ResidueSystem(zero_entries, validate=False)
        ).count
        assert survivors <= baseline
