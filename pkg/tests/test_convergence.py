import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reachseg.convergence import (FAMILIES, SUITES, analyze_sequence, counterexample_pair,
                                  equivalence_probe, hausdorff_distance, l1_distance,
                                  radius_family, set_area, shifted_pairs, verify_suite)
from reachseg.energy import PhiModel
from reachseg.errors import PreconditionError
from reachseg.raster import Grid
from reachseg.shapes import disk, feasible_suite, square

PHI = PhiModel.power(2)
FRAME = Grid.square(3, 600)


class TestHausdorff:
    def test_identical(self):
        d = disk(1.0, n=256)
        assert hausdorff_distance(d, d) == 0.0

    def test_concentric(self):
        assert hausdorff_distance(disk(1.0, n=1024), disk(1.1, n=1024)) == pytest.approx(0.1, abs=1e-3)

    def test_translated(self):
        d = disk(1.0, n=1024)
        assert hausdorff_distance(d, d.translated(0.3, 0)) == pytest.approx(0.3, abs=1e-3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            hausdorff_distance([], disk(1.0, n=64))

    def test_far_component_dominates(self):
        a, b = counterexample_pair(1.0)
        assert hausdorff_distance(a, b) > 5.0


class TestL1:
    def test_identical(self):
        d = disk(1.0, n=256)
        assert l1_distance(d, d, FRAME) == 0.0

    def test_half_overlapping_squares(self):
        a, b = square(1.0, (0, 0)), square(1.0, (0.5, 0))
        h = FRAME.pixel_size
        assert l1_distance(a, b, FRAME) == pytest.approx(1.0, abs=2 * h * 8)

    def test_annulus_area(self):
        v = l1_distance(disk(1.0, n=1024), disk(1.1, n=1024), FRAME)
        assert v == pytest.approx(math.pi * 0.21, rel=0.02)


class TestAnalyzeSequence:
    def test_radius_decay(self):
        R = 1.0
        seq = [[disk(R + 1 / h, spacing=R / 16)] for h in range(1, 13)]
        rep = analyze_sequence(seq, [disk(R, spacing=R / 16)], R, PHI)
        assert rep.semicontinuity_ok
        np.testing.assert_allclose(rep.perimeter, 2 * math.pi * (R + 1 / np.arange(1, 13)),
                                   rtol=1e-3)

    def test_radial_perturbation_decreases_to_limit(self):
        seq, lim = FAMILIES["radial"](1.0)
        rep = analyze_sequence(seq, lim, 1.0, PHI)
        assert np.all(np.diff(rep.F_value) < 0)
        assert np.all(rep.F_value > rep.F_limit)
        assert rep.semicontinuity_ok and rep.perimeter_converges

    def test_constant_sequence(self):
        d = [disk(2.0, spacing=1 / 16)]
        rep = analyze_sequence([d] * 4, d, 1.0, PHI)
        assert np.all(rep.hausdorff_to_limit == 0) and np.all(rep.l1_to_limit == 0)
        assert rep.perimeter_converges and rep.semicontinuity_ok and rep.settle_index == 0

    def test_infeasible_term_named(self):
        seq = [[disk(2.0, spacing=1 / 16)], [disk(0.5, spacing=1 / 64)]]
        with pytest.raises(PreconditionError, match="term 1"):
            analyze_sequence(seq, seq[0], 1.0, PHI)

    def test_empty_sequence(self):
        with pytest.raises(ValueError):
            analyze_sequence([], [disk(2.0, n=64)], 1.0, PHI)

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_families_pass(self, name):
        seq, lim = FAMILIES[name](1.0)
        rep = analyze_sequence(seq, lim, 1.0, PHI)
        assert rep.limit_feasible and rep.semicontinuity_ok and rep.perimeter_converges
        assert rep.hausdorff_to_limit[-1] < rep.hausdorff_to_limit[0]

    def test_slow_radius_decay_misses_one_percent(self):
        seq, lim = radius_family(1.0, power=1)
        rep = analyze_sequence(seq, lim, 1.0, PHI)
        assert not rep.perimeter_converges

    def test_table_rows(self):
        seq, lim = FAMILIES["translation"](1.0, terms=3)
        text = analyze_sequence(seq, lim, 1.0, PHI).table()
        assert text.splitlines()[0] == "index,hausdorff,l1,perimeter,F"
        assert len(text.splitlines()) == 4


class TestEquivalence:
    def test_small_shift_both_small(self):
        R = 1.0
        base = disk(3 * R, spacing=R / 16)
        rep = equivalence_probe([([base], [base.translated(0.01 * R, 0)])], R,
                                include_counterexample=False)
        assert rep.hausdorff[0] < 0.02 and rep.l1[0] < 0.5

    def test_identical_pair(self):
        d = disk(2.0, spacing=1 / 16)
        rep = equivalence_probe([([d], [d])], 1.0, include_counterexample=False)
        assert rep.l1[0] == 0 and rep.hausdorff[0] == 0

    def test_counterexample(self):
        rep = equivalence_probe(shifted_pairs(1.0, count=8), 1.0)
        l1, haus = rep.counterexample
        assert l1 < 0.3 and haus > 5.0
        assert rep.in_class.all()
        hs = [h for _, h in rep.deciles]
        assert all(a <= b + 1e-12 for a, b in zip(hs, hs[1:]))


@pytest.mark.parametrize("name", SUITES)
def test_suites_pass(name):
    res = verify_suite(name, 1.0)
    assert res.passed, res.to_text()
    assert res.to_text().startswith(f"suite {name}")


def test_unknown_suite():
    with pytest.raises(ValueError, match="metrics"):
        verify_suite("bogus", 1.0)


# ------------------------------------------------------------------ properties

SUITE = feasible_suite(1.0)
idx = st.integers(0, len(SUITE) - 1)


@settings(max_examples=30, deadline=None)
@given(idx, idx)
def test_hausdorff_symmetric(i, j):
    assert hausdorff_distance(SUITE[i], SUITE[j]) == pytest.approx(
        hausdorff_distance(SUITE[j], SUITE[i]), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(idx, idx, idx)
def test_hausdorff_triangle(i, j, k):
    a, b, c = SUITE[i], SUITE[j], SUITE[k]
    assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-9


@settings(max_examples=20, deadline=None)
@given(idx, idx)
def test_l1_bounded_by_areas(i, j):
    a, b = SUITE[i], SUITE[j]
    frame = Grid.covering([a, b], 0.05, pad=0.5)
    assert l1_distance(a, b, frame) <= set_area(a) + set_area(b) + 0.05 * 40
