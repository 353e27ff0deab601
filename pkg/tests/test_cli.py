import json
import subprocess
import sys

import numpy as np
import pytest

from reachseg import io as rio
from reachseg.cli import main
from reachseg.energy import LayeredSegmentation
from reachseg.raster import Grid, RasterImage
from reachseg.shapes import disk

GRID = Grid.square(5, 100)
IMG_FLAGS = ["--pixel-size", "0.1", "--origin", "-5", "-5"]


@pytest.fixture
def image(tmp_path):
    p = tmp_path / "disk.pgm"
    rio.write_pgm(p, RasterImage.indicator(disk(2.0, n=2048), GRID))
    return str(p)


@pytest.fixture
def region(tmp_path):
    p = tmp_path / "disk.json"
    rio.write_region(p, disk(2.0, n=256))
    return str(p)


class TestCheck:
    def test_pass(self, region, tmp_path, capsys):
        out = tmp_path / "rep.json"
        assert main(["check", region, "--radius", "1", "--out", str(out)]) == 0
        assert "PASS" in capsys.readouterr().out
        assert json.loads(out.read_text())["pass"] is True

    def test_fail(self, tmp_path, capsys):
        p = tmp_path / "small.json"
        rio.write_region(p, disk(0.5, n=256))
        assert main(["check", str(p), "--radius", "1"]) == 1
        assert "failing regions: 0" in capsys.readouterr().out

    def test_missing_radius_is_usage(self, region, capsys):
        assert main(["check", region]) == 2
        assert "--radius" in capsys.readouterr().err

    def test_missing_file_is_io(self, tmp_path):
        assert main(["check", str(tmp_path / "nope.json"), "--radius", "1"]) == 3

    def test_bad_json_is_io(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        assert main(["check", str(p), "--radius", "1"]) == 3

    def test_undersampled_is_usage(self, tmp_path):
        p = tmp_path / "coarse.json"
        rio.write_region(p, disk(2.0, n=8))
        assert main(["check", str(p), "--radius", "1"]) == 2

    def test_unknown_flag(self, region):
        assert main(["check", region, "--radius", "1", "--bogus"]) == 2


class TestEnergy:
    def test_breakdown(self, image, tmp_path):
        seg = tmp_path / "seg.json"
        rio.write_segmentation(seg, LayeredSegmentation([disk(2.0, n=512)]))
        out = tmp_path / "e.json"
        rc = main(["energy", "--image", image, *IMG_FLAGS, "--radius", "1", "--alpha", "10",
                   "--segmentation", str(seg), "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["G"] == pytest.approx(9 * np.pi, rel=0.02) and doc["feasible"]

    def test_bad_phi(self, image, tmp_path):
        seg = tmp_path / "seg.json"
        rio.write_segmentation(seg, LayeredSegmentation())
        assert main(["energy", "--image", image, "--radius", "1", "--phi", "nm:1,0,2",
                     "--segmentation", str(seg)]) == 2

    def test_bad_image_is_io(self, tmp_path):
        img = tmp_path / "x.pgm"
        img.write_bytes(b"P6\n1 1\n255\n\0\0\0")
        seg = tmp_path / "seg.json"
        rio.write_segmentation(seg, LayeredSegmentation())
        assert main(["energy", "--image", str(img), "--radius", "1",
                     "--segmentation", str(seg)]) == 3


class TestSegment:
    def args(self, image, out, *extra):
        return ["segment", "--image", image, *IMG_FLAGS, "--radius", "1", "--alpha", "10",
                "--iters", "150", "--out", str(out), *extra]

    def test_outputs(self, image, tmp_path):
        out = tmp_path / "run"
        assert main(self.args(image, out, "--k", "1", "--seed", "0")) == 0
        names = sorted(p.name for p in out.iterdir())
        assert names == ["energy.json", "labels.pgm", "layer_000.json", "segmentation.json",
                         "trace.csv"]
        assert (out / "trace.csv").read_text().startswith("iteration,energy,layers\n")

    def test_seed_required(self, image, tmp_path, capsys):
        assert main(self.args(image, tmp_path / "r", "--k", "1")) == 2
        assert "--seed" in capsys.readouterr().err

    def test_k_or_variable(self, image, tmp_path):
        assert main(self.args(image, tmp_path / "r", "--seed", "0")) == 2
        assert main(self.args(image, tmp_path / "r", "--seed", "0", "--k", "1",
                              "--variable-k")) == 2

    def test_deterministic_traces(self, image, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(self.args(image, a, "--variable-k", "--seed", "7")) == 0
        assert main(self.args(image, b, "--variable-k", "--seed", "7")) == 0
        assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()

    def test_config_file(self, image, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"image = {image}\npixel-size = 0.1\norigin = -5 -5\nradius = 1\n"
                       "alpha = 10\nk = 1\nseed = 0\niters = 200\n")
        out = tmp_path / "r"
        # command-line flags override the file
        assert main(["segment", "--config", str(cfg), "--iters", "50", "--out", str(out)]) == 0
        last = (out / "trace.csv").read_text().strip().splitlines()[-1]
        assert int(last.split(",")[0]) <= 50

    def test_config_unknown_key(self, image, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("radios = 1\n")
        assert main(["segment", "--config", str(cfg)]) == 3
        assert "valid keys" in capsys.readouterr().err

    def test_config_bad_bool(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("variable-k = maybe\n")
        assert main(["segment", "--config", str(cfg)]) == 3


class TestOtherCommands:
    def test_verify(self, tmp_path):
        out = tmp_path / "v.txt"
        assert main(["verify", "--suite", "metrics", "--radius", "1", "--out", str(out)]) == 0
        assert out.read_text().startswith("suite metrics")

    def test_verify_bad_suite(self):
        assert main(["verify", "--suite", "nope", "--radius", "1"]) == 2

    def test_regularize(self, image, tmp_path):
        out = tmp_path / "regs.json"
        assert main(["regularize", "--image", image, *IMG_FLAGS, "--radius", "1",
                     "--out", str(out)]) == 0
        assert len(rio.read_regions(out)) == 1

    def test_regularize_nothing(self, tmp_path):
        img = tmp_path / "z.pgm"
        rio.write_pgm(img, np.zeros((20, 20)))
        assert main(["regularize", "--image", str(img), "--radius", "3",
                     "--out", str(tmp_path / "o.json")]) == 1

    def test_example_ball_requires_seed(self):
        assert main(["example-ball"]) == 2

    def test_example_ball_small_radius(self):
        assert main(["example-ball", "--radius", "1", "--seed", "0"]) == 2

    def test_example_ball(self, tmp_path):
        out = tmp_path / "ex.txt"
        assert main(["example-ball", "--radius", "2", "--grid", "100", "--seed", "0",
                     "--out", str(out)]) == 0
        assert "disk" in out.read_text()


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "reachseg.cli", "--help"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and "segment" in r.stdout
