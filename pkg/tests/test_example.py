import math

import pytest

from reachseg.errors import PreconditionError
from reachseg.example import (choose_weights, competitors, disk_energy, empty_energy,
                              example_ball)
from reachseg.geometry import perimeter
from reachseg.sphere import check_region


@pytest.fixture(scope="module")
def rep2():
    return example_ball(2.0, 200, seed=0)


class TestClosedForms:
    def test_disk_energy(self):
        assert disk_energy(2.0, 1, 1) == pytest.approx(9 * math.pi)

    def test_empty_energy(self):
        assert empty_energy(2.0, 1.0, 100.0) == pytest.approx(4 * math.pi - 16 * math.pi ** 2 / 100)


class TestBallR2:
    def test_disk_matches_closed_form(self, rep2):
        assert rep2.G_disk == pytest.approx(4 * math.pi * rep2.beta + 5 * math.pi * rep2.gamma,
                                            rel=0.02)

    def test_empty_matches_closed_form(self, rep2):
        assert rep2.G_empty == pytest.approx(rep2.G_empty_analytic, rel=0.02)

    def test_disk_wins(self, rep2):
        assert rep2.disk_wins and rep2.passed
        assert len(rep2.competitors) == 21
        assert all(rep2.G_disk < c.energy for c in rep2.competitors)

    def test_inequality_both_branches(self, rep2):
        assert any(c.name == "empty" for c in rep2.competitors)
        assert any(c.perimeter > 2 * math.pi * 2 + 2 for c in rep2.competitors)

    def test_report_text(self, rep2):
        text = rep2.to_text()
        assert "alpha = 10" in text and text.rstrip().endswith("PASS")
        assert rep2.to_dict()["passed"] is True


def test_radius_1_5():
    rep = example_ball(1.5, 200, seed=0)
    assert rep.G_disk == pytest.approx(2.25 * math.pi + 3 * math.pi + 4 * math.pi / 3, rel=0.02)
    assert rep.disk_wins


@pytest.mark.parametrize("R", [1.0, 0.5])
def test_small_radius_rejected(R):
    with pytest.raises(PreconditionError, match="R > 1"):
        example_ball(R)


def test_competitors_feasible_and_seeded():
    a = competitors(1.5, seed=3)
    b = competitors(1.5, seed=3)
    assert [n for n, _ in a] == [n for n, _ in b]
    for _, reg in a:
        assert check_region(reg, 1.5).passed
    assert any(perimeter(reg) > 2 * math.pi * 1.5 + 1.5 for _, reg in a)


def test_choose_weights_doubles():
    need = disk_energy(2.0, 1, 1)
    alpha = choose_weights(2.0, 100.0, alpha=0.1)
    assert alpha * empty_energy(2.0, 1.0, 100.0) >= need
    assert (alpha / 2) * empty_energy(2.0, 1.0, 100.0) < need


def test_choose_weights_impossible():
    # a frame no larger than the disk leaves no fidelity gain to trade against
    with pytest.raises(PreconditionError, match="right side"):
        choose_weights(2.0, math.pi * 4.0)
