import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reachseg.energy import (EnergyParams, LayeredSegmentation, PhiModel, curvature_energy,
                             fidelity, fidelity_from_sums, jensen_lower_bound, k_upper_bound,
                             overlap_decompose, phi_eval, region_mean, total_energy)
from reachseg.geometry import ClosedCurve, Region, perimeter
from reachseg.raster import Grid, RasterImage
from reachseg.shapes import disk, feasible_suite, regular_polygon, rounded_rectangle, square

NM = PhiModel.nitzberg_mumford(1, 1, 2)
PHIS = [PhiModel.power(2), PhiModel.power(1.5), NM, PhiModel.quadratic(1, 2)]


class TestPhi:
    def test_nm_quadratic_branch(self):
        assert phi_eval(NM, 1.0) == 2.0

    def test_nm_linear_branch(self):
        assert phi_eval(NM, 3.0) == 7.0

    def test_power_at_zero(self):
        assert phi_eval(PhiModel.power(2), 0.0) == 1.0

    def test_even_in_kappa(self):
        for phi in PHIS:
            assert phi_eval(phi, -0.7) == phi_eval(phi, 0.7)

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -1, 1), (1, 1, 0)])
    def test_nm_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            PhiModel.nitzberg_mumford(*bad)

    def test_power_rejects_small_exponent(self):
        with pytest.raises(ValueError):
            PhiModel.power(0.5)

    @pytest.mark.parametrize("text", ["power:2", "nm:1,1,2", "quadratic:1,2"])
    def test_parse_round_trip(self, text):
        assert str(PhiModel.parse(text)) == text

    def test_parse_garbage(self):
        with pytest.raises(ValueError):
            PhiModel.parse("power:x")
        with pytest.raises(ValueError):
            PhiModel.parse("cubic:1")

    def test_envelope_is_convex_minorant(self):
        k = np.linspace(0, 6, 601)
        for phi in PHIS:
            env = phi.envelope(k)
            assert np.all(env <= phi(k) + 1e-12)
            assert np.all(np.diff(env, 2) >= -1e-9)


class TestCurvatureEnergy:
    @pytest.mark.parametrize("R", [1.0, 1.5, 2.0, 3.0])
    def test_circle_closed_form(self, R):
        e = curvature_energy(regular_polygon(512, R), PhiModel.power(2))
        assert e == pytest.approx(2 * math.pi * R + 2 * math.pi / R, rel=0.01)

    def test_radius_2_is_5pi(self):
        e = curvature_energy(regular_polygon(512, 2.0), PhiModel.power(2))
        assert e == pytest.approx(5 * math.pi, rel=0.01)

    def test_constant_density_gives_perimeter(self):
        c = rounded_rectangle(3, 2, 0.5, 0.05).outer
        assert curvature_energy(c, PhiModel.quadratic(2.5, 0)) == pytest.approx(2.5 * perimeter(c))

    def test_second_order_convergence(self):
        R = 1.3
        exact = 2 * math.pi * R + 2 * math.pi / R
        errs = [abs(curvature_energy(regular_polygon(n, R), PhiModel.power(2)) - exact)
                for n in (64, 128, 256)]
        assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)

    def test_region_counts_hole_boundary(self):
        from reachseg.shapes import annulus
        a = annulus(4.0, 2.0, 0.02)
        phi = PhiModel.power(2)
        expected = 2 * math.pi * 4 + 2 * math.pi / 4 + 2 * math.pi * 2 + 2 * math.pi / 2
        assert curvature_energy(a, phi) == pytest.approx(expected, rel=0.01)


class TestOverlap:
    grid = Grid.square(5, 10)

    def test_left_half(self):
        left = Region(ClosedCurve([(-5, -5), (0, -5), (0, 5), (-5, 5)]))
        masks, bg = overlap_decompose(LayeredSegmentation([left]), self.grid)
        assert masks[0][:, :5].all() and not masks[0][:, 5:].any()
        np.testing.assert_array_equal(bg, ~masks[0])

    def test_identical_layers(self):
        d = disk(3.0, n=256)
        masks, _ = overlap_decompose(LayeredSegmentation([d, d]), self.grid)
        assert masks[0].any() and not masks[1].any()

    def test_half_overlapping_squares(self):
        grid = Grid(20, 10, 0.1, (0.0, 0.0))
        a, b = square(1.0, (0, 0)), square(1.0, (0.5, 0))
        masks, bg = overlap_decompose(LayeredSegmentation([a, b]), grid)
        xs, _ = grid.centers()
        np.testing.assert_array_equal(masks[1], (xs > 1.0) & (xs < 1.5))
        assert not bg[:, :15].any()

    def test_partition(self):
        layers = [disk(2.0, (1, 0), n=128), disk(2.0, (-1, 1), n=128), square(3.0, (-4, -4))]
        masks, bg = overlap_decompose(LayeredSegmentation(layers), self.grid)
        total = sum(m.astype(int) for m in masks) + bg
        assert np.all(total == 1)


class TestFidelity:
    def test_constant_image_mean(self):
        img = RasterImage.from_array(np.full((8, 8), 0.7))
        m = np.zeros((8, 8), bool)
        m[2:5, 1:3] = True
        assert region_mean(img, m) == pytest.approx(0.7)
        assert fidelity(img, m) == pytest.approx(0.0, abs=1e-14)

    def test_empty_mask(self):
        img = RasterImage.from_array(np.random.default_rng(0).random((5, 5)))
        empty = np.zeros((5, 5), bool)
        assert region_mean(img, empty) == 0.0
        assert fidelity(img, empty) == 0.0

    def test_half_and_half(self):
        img = RasterImage.from_array(np.array([[0.0, 0.0, 1.0, 1.0]]))
        assert region_mean(img, np.ones((1, 4), bool)) == 0.5

    def test_two_pixels(self):
        img = RasterImage.from_array(np.array([[0.0, 1.0]]), pixel_size=0.3)
        assert fidelity(img, np.ones((1, 2), bool)) == pytest.approx(0.5 * 0.09)

    def test_disk_empty_segmentation(self):
        grid = Grid.square(5, 200)
        img = RasterImage.indicator(disk(2.0, n=4096), grid)
        expected = 4 * math.pi - 16 * math.pi ** 2 / 100
        assert fidelity(img, np.ones(grid.shape, bool)) == pytest.approx(expected, rel=0.02)


class TestTotalEnergy:
    grid = Grid.square(5, 200)

    def test_empty_segmentation(self):
        img = RasterImage.indicator(disk(2.0, n=4096), self.grid)
        bd = total_energy(LayeredSegmentation(), img, EnergyParams(1, 1, 1, 1))
        assert bd.G == pytest.approx(4 * math.pi - 16 * math.pi ** 2 / 100, rel=0.02)
        assert bd.feasible and bd.fidelity_per_layer == []

    def test_matching_disk_is_9pi(self):
        d = disk(2.0, n=512)
        img = RasterImage.indicator(disk(2.0, n=4096), self.grid)
        bd = total_energy(LayeredSegmentation([d]), img, EnergyParams(10, 1, 1, 1))
        assert bd.G == pytest.approx(9 * math.pi, rel=0.02)
        assert bd.feasible

    def test_constant_image_is_geometric(self):
        d = disk(2.0, n=512)
        img = RasterImage.from_array(np.full(self.grid.shape, 0.3), self.grid.pixel_size,
                                     self.grid.origin)
        params = EnergyParams(5, 0.7, 1.3, 1)
        bd = total_energy(LayeredSegmentation([d]), img, params)
        geo = 0.7 * 4 * math.pi * (512 / (2 * math.pi)) * math.sin(2 * math.pi / 512) \
            + 1.3 * curvature_energy(d, params.phi)
        assert bd.G == pytest.approx(geo, abs=1e-9)

    def test_infeasible_layer_flagged(self):
        img = RasterImage.from_array(np.zeros(self.grid.shape), self.grid.pixel_size,
                                     self.grid.origin)
        bd = total_energy(LayeredSegmentation([disk(0.5, n=256)]), img, EnergyParams(1, 1, 1, 1))
        assert not bd.feasible

    def test_frame_mismatch(self):
        img = RasterImage.from_array(np.zeros((10, 10)))
        seg = LayeredSegmentation([], Grid.square(5, 20))
        with pytest.raises(ValueError, match="frame"):
            total_energy(seg, img, EnergyParams(1, 1, 1, 1))

    def test_alpha_scales_only_fidelity(self):
        rng = np.random.default_rng(3)
        layers = [disk(2.0, (1, 0), n=256), disk(2.0, (-1, 0.5), n=256)]
        seg = LayeredSegmentation(layers)
        img = RasterImage.from_array(rng.random(self.grid.shape), self.grid.pixel_size,
                                     self.grid.origin)
        a = total_energy(seg, img, EnergyParams(1, 1, 1, 1))
        b = total_energy(seg, img, EnergyParams(3, 1, 1, 1))
        assert b.fidelity_background == pytest.approx(3 * a.fidelity_background)
        assert b.area_terms == a.area_terms and b.curvature_terms == a.curvature_terms

    def test_order_changes_only_fidelity(self):
        rng = np.random.default_rng(4)
        layers = [disk(2.0, (1, 0), n=256), disk(1.5, (-1, 0.5), n=256)]
        img = RasterImage.from_array(rng.random(self.grid.shape), self.grid.pixel_size,
                                     self.grid.origin)
        p = EnergyParams(1, 1, 1, 1)
        a = total_energy(LayeredSegmentation(layers), img, p)
        b = total_energy(LayeredSegmentation(layers[::-1]), img, p)
        assert math.fsum(a.area_terms + a.curvature_terms) == pytest.approx(
            math.fsum(b.area_terms + b.curvature_terms), abs=1e-12)

    def test_serializes(self):
        img = RasterImage.from_array(np.zeros(self.grid.shape), self.grid.pixel_size,
                                     self.grid.origin)
        js = total_energy(LayeredSegmentation(), img, EnergyParams(1, 1, 1, 1)).to_json()
        assert '"feasible": true' in js and '"G"' in js


class TestJensen:
    @pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
    def test_circle_equality(self, R):
        c = regular_polygon(512, R)
        assert jensen_lower_bound(c, PhiModel.power(2)) == pytest.approx(
            curvature_energy(c, PhiModel.power(2)), rel=1e-4)

    def test_unit_square(self):
        b = jensen_lower_bound(square().outer, PhiModel.power(2))
        assert b == pytest.approx(4 + math.pi ** 2)
        for r in (0.05, 0.1, 0.2):
            rr = rounded_rectangle(1.0, 1.0, r, r / 20)
            assert jensen_lower_bound(rr, PhiModel.power(2)) <= curvature_energy(rr, PhiModel.power(2))

    def test_constant_phi_is_perimeter(self):
        c = rounded_rectangle(3, 2, 0.5, 0.05).outer
        assert jensen_lower_bound(c, PhiModel.quadratic(1, 0)) == pytest.approx(perimeter(c))

    def test_bound_holds_on_suite(self):
        for reg in feasible_suite(1.0)[:20]:
            for phi in PHIS:
                assert jensen_lower_bound(reg, phi) <= curvature_energy(reg.outer, phi) * (1 + 1e-9)


class TestKBound:
    p = EnergyParams(1, 1, 1, 1)

    def test_examples(self):
        assert k_upper_bound(10, self.p) == 3
        assert k_upper_bound(math.pi, self.p) == 1
        assert k_upper_bound(3.0, self.p) == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            k_upper_bound(-1, self.p)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.floats(0.1, 3))
def test_fidelity_sum_identity(vals, h):
    g = np.array(vals)
    img = RasterImage.from_array(g[None, :], pixel_size=h)
    m = np.ones_like(img.values, bool)
    direct = fidelity(img, m)
    fast = fidelity_from_sums(g.sum(), (g * g).sum(), g.size, h * h)
    assert fast == pytest.approx(direct, rel=1e-7, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 4))
def test_alpha_zero_ignores_image(seed):
    # alpha must be positive, so check the limit through the weighted terms
    grid = Grid.square(3, 30)
    rng = np.random.default_rng(seed)
    seg = LayeredSegmentation([disk(1.5, n=128)])
    p = EnergyParams(1e-300, 1, 1, 1)
    a = total_energy(seg, RasterImage.from_array(rng.random(grid.shape), grid.pixel_size,
                                                 grid.origin), p)
    b = total_energy(seg, RasterImage.from_array(rng.random(grid.shape), grid.pixel_size,
                                                 grid.origin), p)
    assert a.G == pytest.approx(b.G, rel=1e-12)
