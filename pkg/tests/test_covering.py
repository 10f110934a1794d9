"""Synthetic covering instances and the m-round nibble leftover law."""

import math

import numpy as np
import pytest

from gapchain.covering import (
    COVERAGE_FLOOR,
    CoveringInstance,
    CoverResult,
    nibble_cover,
    subset_leftover,
    synth_instance,
)
from gapchain.seeds import derive_rng


def make_instance(**overrides):
    base = dict(
        n_elements=1_000,
        n_covers=100,
        coverage=2 * math.log(5),
        profile="poisson",
    )
    base.update(overrides)
    return CoveringInstance(**base)


class TestInstanceValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            dict(n_elements=9),
            dict(n_covers=0),
            dict(profile="uniform"),
            dict(n_covers=100, coverage=150.0),  # inclusion prob > 1
            dict(paper_mode=True, coverage=1.2 * math.log(5)),
        ],
    )
    def test_rejects(self, overrides):
        with pytest.raises(ValueError):
            make_instance(**overrides)

    def test_synth_guards(self):
        with pytest.raises(ValueError, match="cannot fill"):
            synth_instance(100, 1, m=2)
        with pytest.raises(ValueError, match="at least 1"):
            synth_instance(100, 5, m=0)
        with pytest.raises(ValueError):
            synth_instance(100, 50, m=1, paper_mode=True)
        inst = synth_instance(100, 50, m=2, paper_mode=True)
        assert inst.coverage >= COVERAGE_FLOOR

    def test_synthesized_scaling(self):
        inst = synth_instance(20_000, 2_000, m=3)
        assert inst.coverage == pytest.approx(3 * math.log(5))
        assert inst.inclusion_prob == pytest.approx(inst.coverage / 2_000)
        assert inst.fixed_edge_size == round(20_000 * inst.inclusion_prob)


class TestEdgeDrawing:
    def test_edges_are_sorted_distinct(self):
        inst = make_instance()
        rng = derive_rng(0, "edges")
        for p in range(20):
            edge, truncated = inst.draw_edge(p, rng)
            assert not truncated
            assert np.all(np.diff(edge) > 0)
            assert edge.size == 0 or (0 <= edge.min() and edge.max() < 1_000)

    def test_fixed_size_profile(self):
        inst = make_instance(profile="fixed-size")
        rng = derive_rng(0, "edges-fixed")
        sizes = {inst.draw_edge(p, rng)[0].size for p in range(10)}
        assert sizes == {inst.fixed_edge_size}

    def test_saturated_inclusion_takes_everything(self):
        inst = CoveringInstance(
            n_elements=10, n_covers=1, coverage=1.0, profile="fixed-size"
        )
        edge, _ = inst.draw_edge(0, derive_rng(0, "full"))
        assert edge.tolist() == list(range(10))

    def test_forced_edges_override_randomness(self):
        inst = make_instance(forced_edges={3: (9, 2, 5)})
        for trial in range(3):
            edge, truncated = inst.draw_edge(3, derive_rng(trial, "forced"))
            assert edge.tolist() == [2, 5, 9]
            assert not truncated

    def test_r_cap_truncates_even_forced_edges(self):
        inst = make_instance(forced_edges={0: tuple(range(10))}, r_cap=4)
        edge, truncated = inst.draw_edge(0, derive_rng(0, "cap"))
        assert truncated and edge.size == 4
        assert np.all(np.diff(edge) > 0)
        assert set(edge.tolist()) <= set(range(10))


class TestNibbleCover:
    def test_partition_into_kept_and_leftover(self):
        inst = make_instance()
        result = nibble_cover(inst, m=2, rng=derive_rng(1, "nibble"))
        covered = np.zeros(inst.n_elements, dtype=bool)
        for part in result.kept_edges.values():
            covered[part] = True
        leftover_mask = np.zeros(inst.n_elements, dtype=bool)
        leftover_mask[result.leftover] = True
        assert not (covered & leftover_mask).any()
        assert (covered | leftover_mask).all()
        assert len(result.kept_edges) == inst.n_covers
        assert result.leftover_fraction == result.leftover.size / 1_000

    def test_bitwise_reproducible(self):
        inst = make_instance()
        a = nibble_cover(inst, m=3, rng=derive_rng(5, "nibble"))
        b = nibble_cover(inst, m=3, rng=derive_rng(5, "nibble"))
        c = nibble_cover(inst, m=3, rng=derive_rng(6, "nibble"))
        assert np.array_equal(a.leftover, b.leftover)
        assert all(
            np.array_equal(a.kept_edges[p], b.kept_edges[p])
            for p in a.kept_edges
        )
        assert not np.array_equal(a.leftover, c.leftover)

    def test_schedule_guards(self):
        inst = make_instance(n_covers=3, coverage=1.5)
        with pytest.raises(ValueError):
            nibble_cover(inst, m=0, rng=derive_rng(0, "bad"))
        with pytest.raises(ValueError):
            nibble_cover(inst, m=4, rng=derive_rng(0, "bad"))

    def test_truncation_is_counted(self):
        inst = make_instance(profile="fixed-size", r_cap=10)
        assert inst.fixed_edge_size > 10
        result = nibble_cover(inst, m=2, rng=derive_rng(2, "cap-count"))
        assert result.truncated_draws == inst.n_covers
        assert all(part.size <= 10 for part in result.kept_edges.values())

    def test_leftover_law_single_seed_smoke(self):
        # per-round coverage log 5 should leave about 5**-2 of the ground set
        inst = synth_instance(50_000, 2_000, m=2)
        result = nibble_cover(inst, m=2, rng=derive_rng(0, "law-smoke"))
        assert result.leftover_fraction == pytest.approx(5**-2, rel=0.25)

    def test_m1_leaves_more_than_m3(self):
        inst1 = synth_instance(20_000, 600, m=1)
        inst3 = synth_instance(20_000, 600, m=3)
        f1 = nibble_cover(inst1, m=1, rng=derive_rng(0, "mono")).leftover_fraction
        f3 = nibble_cover(inst3, m=3, rng=derive_rng(0, "mono")).leftover_fraction
        assert f3 < f1


class TestSubsetLeftover:
    def test_matches_set_arithmetic(self):
        inst = make_instance()
        result = nibble_cover(inst, m=2, rng=derive_rng(4, "subset"))
        left = set(result.leftover.tolist())
        rng = derive_rng(0, "subset-pick")
        subset = rng.choice(1_000, size=200, replace=False).tolist()
        subset += result.leftover[:3].tolist()  # guarantee some hits
        assert subset_leftover(result, subset) == len(set(subset) & left)
        assert subset_leftover(result, []) == 0

    def test_range_guard(self):
        result = CoverResult(
            n_elements=100, m=1, kept_edges={}, leftover=np.arange(3)
        )
        with pytest.raises(ValueError):
            subset_leftover(result, [-1])
        with pytest.raises(ValueError):
            subset_leftover(result, [100])
