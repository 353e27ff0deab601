import math

import numpy as np
import pytest

from reachseg.convergence import hausdorff_distance
from reachseg.energy import EnergyParams, LayeredSegmentation, curvature_energy, total_energy
from reachseg.errors import PreconditionError
from reachseg.geometry import curvature_profile
from reachseg.optimizer import (MOVE_KINDS, Schedule, accept, disk_layer, metropolis,
                                optimize_fixed_k, optimize_variable_k, propose_move,
                                seed_segmentation)
from reachseg.raster import Grid, RasterImage
from reachseg.shapes import disk
from reachseg.sphere import check_region

GRID = Grid.square(5, 100)


def disk_image(radius=2.0, centers=((0.0, 0.0),), grid=GRID):
    return RasterImage.indicator([disk(radius, c, n=2048) for c in centers], grid)


class TestSchedule:
    def test_defaults(self):
        s = Schedule()
        assert s.iterations == 20000 and s.T0 is None and s.move_scale == 0.1

    @pytest.mark.parametrize("kw", [{"iterations": 0}, {"T0": -1.0}, {"cooling": 0.0},
                                    {"cooling": 1.5}, {"move_scale": 0.6}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            Schedule(**kw)

    def test_temperature_steps(self):
        s = Schedule(cooling=0.5, cool_every=10)
        assert s.temperature(8.0, 9) == 8.0
        assert s.temperature(8.0, 10) == 4.0
        assert s.temperature(8.0, 25) == 2.0


class TestMetropolis:
    rng = np.random.default_rng(0)

    def test_improvement_always(self):
        assert metropolis(-1.0, 0.0, self.rng) == (True, "improved")
        assert metropolis(-1.0, 5.0, self.rng)[0]

    def test_greedy_at_zero_temperature(self):
        assert metropolis(1.0, 0.0, self.rng) == (False, "rejected")

    def test_tie_keeps_incumbent(self):
        assert metropolis(0.0, 1.0, self.rng) == (False, "rejected")

    def test_acceptance_rate(self):
        rng = np.random.default_rng(1)
        hits = sum(metropolis(1.0, 1.0, rng)[0] for _ in range(4000))
        assert hits / 4000 == pytest.approx(math.exp(-1), abs=0.03)


class TestAccept:
    img = disk_image()
    params = EnergyParams(10, 1, 1, 1.0)

    def test_infeasible_rejected(self):
        cand = LayeredSegmentation([disk(0.5, n=256)], GRID)
        d = accept(1e9, cand, self.img, self.params, 1e9, np.random.default_rng(0))
        assert not d.accepted and d.reason == "infeasible"

    def test_improvement_accepted(self):
        cand = LayeredSegmentation([disk(2.0, n=512)], GRID)
        G = total_energy(cand, self.img, self.params).G
        d = accept(G + 1, cand, self.img, self.params, 0.0, np.random.default_rng(0))
        assert d.accepted and d.delta == pytest.approx(-1)

    def test_worse_rejected_greedy(self):
        cand = LayeredSegmentation([disk(2.0, n=512)], GRID)
        G = total_energy(cand, self.img, self.params).G
        d = accept(G - 1, cand, self.img, self.params, 0.0, np.random.default_rng(0))
        assert not d.accepted


class TestSeed:
    def test_disk(self):
        img = disk_image()
        seg = seed_segmentation(img, 1.0, 1)
        assert seg.k == 1
        assert check_region(seg.layers[0], 1.0).passed
        assert hausdorff_distance(seg.layers[0], disk(2.0, n=2048)) <= 3 * GRID.pixel_size

    def test_constant_image(self):
        img = RasterImage.from_array(np.full(GRID.shape, 0.4), GRID.pixel_size, GRID.origin)
        assert seed_segmentation(img, 1.0, 3).k == 0

    def test_salt_and_pepper(self):
        rng = np.random.default_rng(0)
        vals = (rng.random(GRID.shape) < 0.02).astype(float)
        img = RasterImage.from_array(vals, GRID.pixel_size, GRID.origin)
        assert seed_segmentation(img, 1.0, 3).k == 0

    def test_radius_too_small(self):
        with pytest.raises(PreconditionError):
            seed_segmentation(disk_image(), 0.15, 1)

    def test_k_hint_limits_layers(self):
        img = disk_image(1.5, [(-2.5, 0), (2.5, 0)])
        assert seed_segmentation(img, 1.0, 2).k == 2
        assert seed_segmentation(img, 1.0, 1).k == 1


class TestMoves:
    sched = Schedule()

    def test_delete_single_layer(self):
        m = propose_move([disk_layer((0, 0), 1.0)], np.random.default_rng(0), 1.0, self.sched,
                         kind="delete")
        assert m.layers == []

    def test_swap_identity_on_one_layer(self):
        L = disk_layer((0, 0), 1.0)
        m = propose_move([L], np.random.default_rng(0), 1.0, self.sched, kind="swap")
        assert m.layers == [L] and m.changed == []

    def test_inserted_disk_is_feasible_and_tight(self):
        img = disk_image()
        rng = np.random.default_rng(5)
        for _ in range(5):
            m = propose_move([], rng, 1.0, self.sched, img, kind="insert")
            L = m.layers[m.index]
            assert check_region(L, 1.0).passed
            k, _ = curvature_profile(L.outer)
            assert np.abs(k).max() == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("kind", ["bump", "mode", "smooth", "inflate", "translate"])
    def test_geometric_moves_keep_spacing(self, kind):
        L = disk_layer((0, 0), 1.0)
        m = propose_move([L], np.random.default_rng(2), 1.0, self.sched, kind=kind)
        assert m.changed == [0]
        assert m.layers[0].outer.edge_lengths().max() <= 1.0 / 8 + 1e-12

    def test_empty_state_without_insert(self):
        m = propose_move([], np.random.default_rng(0), 1.0, self.sched, allow_insert=False)
        assert m.kind == "none"


class TestRuns:
    params = EnergyParams(10, 1, 1, 1.0)

    def test_greedy_trace_monotone(self):
        img = disk_image()
        rep = optimize_fixed_k(img, self.params, Schedule(iterations=400, T0=0.0, seed=3), 1)
        g = [e for _, e, _ in rep.energy_trace]
        assert all(b <= a for a, b in zip(g, g[1:]))
        assert rep.feasible

    def test_deterministic(self):
        img = disk_image()
        s = Schedule(iterations=300, seed=11)
        a = optimize_fixed_k(img, self.params, s, 1)
        b = optimize_fixed_k(img, self.params, s, 1)
        assert a.trace_csv() == b.trace_csv() and a.move_stats == b.move_stats

    def test_debug_mode_checks_every_state(self):
        img = disk_image()
        rep = optimize_variable_k(img, self.params, Schedule(iterations=200, seed=1), debug=True)
        assert rep.feasible

    def test_move_stats_add_up(self):
        rep = optimize_fixed_k(disk_image(), self.params, Schedule(iterations=300, seed=2), 1)
        for kind in MOVE_KINDS:
            st = rep.move_stats[kind]
            assert st["proposed"] == (st["accepted"] + st["rejected_constraint"]
                                      + st["rejected_energy"])
        assert len(rep.energy_trace) == 1 + sum(st["accepted"] for st in rep.move_stats.values())

    def test_init_too_many_layers(self):
        init = LayeredSegmentation([disk_layer((0, 0), 1.0), disk_layer((2, 0), 1.0)], GRID)
        with pytest.raises(PreconditionError):
            optimize_fixed_k(disk_image(), self.params, Schedule(iterations=1), 1, init=init)

    def test_infeasible_init(self):
        init = LayeredSegmentation([disk(0.5, n=64)], GRID)
        with pytest.raises(PreconditionError):
            optimize_fixed_k(disk_image(), self.params, Schedule(iterations=1), 1, init=init)

    def test_expensive_geometry_deletes_layer(self):
        img = RasterImage.from_array(np.full(GRID.shape, 0.5), GRID.pixel_size, GRID.origin)
        init = LayeredSegmentation([disk_layer((0, 0), 1.0)], GRID)
        rep = optimize_fixed_k(img, EnergyParams(0.1, 5, 5, 1.0),
                               Schedule(iterations=300, T0=0.0, seed=0), 1, init=init)
        assert rep.final.k == 0 and rep.best_energy == 0.0

    def test_empty_image_variable_k(self):
        img = RasterImage.from_array(np.zeros(GRID.shape), GRID.pixel_size, GRID.origin)
        rep = optimize_variable_k(img, self.params, Schedule(iterations=200, seed=0))
        assert rep.final.k == 0

    def test_fixed_k_example_radius_1_5(self):
        grid = Grid.square(5, 200)
        img = RasterImage.indicator(disk(1.5, n=4096), grid)
        params = EnergyParams(10, 1, 1, 1.5)
        rep = optimize_fixed_k(img, params, Schedule(iterations=3000, seed=0), 1)
        target = 2.25 * math.pi + 3 * math.pi + 4 * math.pi / 3
        assert rep.best_energy == pytest.approx(target, rel=0.02)
        assert rep.feasible

    def test_two_disks_variable_k(self):
        img = disk_image(2.0, [(-2.6, 0), (2.6, 0)], Grid.square(5.5, 110))
        rep = optimize_variable_k(img, self.params, Schedule(iterations=500, seed=0))
        assert rep.final.k == 2
        for _, G, k in rep.energy_trace:
            assert k <= math.floor(G / math.pi)

    def test_final_layers_are_clean(self):
        rep = optimize_fixed_k(disk_image(), self.params, Schedule(iterations=200, seed=4), 1)
        for L in rep.final.layers:
            assert check_region(L, 1.0).passed
            assert curvature_energy(L, self.params.phi) > 0
