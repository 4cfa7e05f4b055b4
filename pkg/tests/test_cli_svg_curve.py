import json
import math
import re
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pareidolia._errors import DataError, ParameterError
from pareidolia._io import netpbm_bytes, read_image, read_netpbm
from pareidolia.cli import UsageError, main, parse_grid
from pareidolia.curve import Curve, curve_from_csv, curve_to_csv, peak_of_curve
from pareidolia.feature_model import peak_rate
from pareidolia.svg import render_svg

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


class TestCurve:
    def test_rejects_unsorted_x(self):
        with pytest.raises(ParameterError):
            Curve((1.0, 1.0), (0.0, 0.0))

    def test_rejects_negative_band(self):
        with pytest.raises(ParameterError):
            Curve((1.0,), (0.0,), (-1.0,))

    def test_peak_ties_to_smaller_x(self):
        assert peak_of_curve(Curve((1, 2, 3), (5, 7, 7))) == (2.0, 7.0)

    @settings(max_examples=100)
    @given(st.lists(st.tuples(st.floats(allow_nan=False, allow_infinity=False, width=64),
                              st.floats(allow_nan=False, width=64),
                              st.floats(0, 1e300)), min_size=1, max_size=20, unique_by=lambda t: t[0]),
           st.booleans())
    def test_csv_round_trip(self, rows, with_band):
        rows = sorted(rows)
        c = Curve([r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows] if with_band else None,
                  x_name="width", y_name="p")
        back = curve_from_csv(curve_to_csv(c))
        assert back == c

    def test_csv_rejects_garbage(self):
        with pytest.raises(DataError):
            curve_from_csv("a,b\n1,x\n")


class TestSvg:
    def test_two_points_one_polyline(self):
        svg = render_svg(Curve((0, 1), (2, 3)))
        assert svg.count("<polyline") == 1
        pts = re.search(r'<polyline points="([^"]*)"', svg).group(1).split()
        assert len(pts) == 2

    def test_deterministic(self):
        c = Curve(np.geomspace(0.25, 64, 9), np.sin(np.arange(9.0)), np.full(9, 0.1))
        assert render_svg(c, log_x=True).encode() == render_svg(c, log_x=True).encode()

    def test_band_iff_positive_ci(self):
        assert 'class="ci"' not in render_svg(Curve((0, 1), (2, 3)))
        assert 'class="ci"' not in render_svg(Curve((0, 1), (2, 3), (0, 0)))
        assert 'class="ci"' in render_svg(Curve((0, 1), (2, 3), (0, 0.5)))

    def test_log_y_drops_nonpositive(self):
        with pytest.warns(UserWarning, match="dropped 2"):
            svg = render_svg(Curve((1, 2, 3, 4), (0.0, 1.0, -1.0, 10.0)), log_y=True)
        pts = re.search(r'<polyline points="([^"]*)"', svg).group(1).split()
        assert len(pts) == 2

    def test_nothing_to_plot(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            with pytest.raises(ParameterError):
                render_svg(Curve((1,), (0.0,)), log_y=True)


class TestParseGrid:
    def test_forms(self):
        assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
        np.testing.assert_allclose(parse_grid("1:100:3:log"), [1, 10, 100])
        np.testing.assert_allclose(parse_grid("1:100:3(log)"), [1, 10, 100])
        assert parse_grid("1,2,4") == [1.0, 2.0, 4.0]

    @pytest.mark.parametrize("bad", ["", "a:b:c", "1:2", "0:1:3:log", "1:2:0", "1:2:3:cubic"])
    def test_rejects(self, bad):
        with pytest.raises(UsageError):
            parse_grid(bad)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestCli:
    def test_no_arguments(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, _, err = run(capsys)
        assert code == 1 and "usage" in err

    def test_unknown_subcommand(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, _, err = run(capsys, "frobnicate")
        assert code == 1 and "usage" in err
        assert not list(tmp_path.iterdir())

    def test_bad_parameter_exit_1(self, capsys, tmp_path):
        code, _, err = run(capsys, "gen-noise", "--width", "-3", "--out", tmp_path / "n")
        assert code == 1 and "width" in err

    def test_data_error_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "gt.jsonl"
        bad.write_text('{"image_id": "q1", "boxes": [{"x_min": 0, "y_min": 0, "x_max": 1, "y_max": 1, '
                       '"attributes": {"emotion": "smug"}}]}\n')
        code, _, err = run(capsys, "stats", "--gt", bad)
        assert code == 2 and "q1" in err
        code, _, _ = run(capsys, "stats", "--gt", tmp_path / "missing.jsonl")
        assert code == 2

    def test_feature_curve_peak(self, capsys, tmp_path):
        out = tmp_path / "f.csv"
        code, _, _ = run(capsys, "model-curve", "--model", "feature", "--regions", 4,
                         "--lambdas", "0:2:100", "--out", out, "--svg", tmp_path / "f.svg")
        assert code == 0
        c = curve_from_csv(out.read_text())
        assert c.x_name == "lambda" and len(c) == 100
        assert abs(peak_of_curve(c)[0] - peak_rate(4, 1.0)[0]) <= 2 / 99
        assert (tmp_path / "f.svg").read_text().startswith("<svg")
        meta = json.loads((tmp_path / "f.csv.meta.json").read_text())
        assert meta["command"] == "model-curve" and meta["parameters"]["regions"] == 4
        assert {"version", "seed", "wall_time_s", "parameters"} <= set(meta)

    def test_gaussian_curve(self, capsys, tmp_path):
        out = tmp_path / "g.csv"
        assert run(capsys, "model-curve", "--model", "gaussian", "--out", out)[0] == 0
        c = curve_from_csv(out.read_text())
        assert len(c) == 25 and c.y_name == "log10_density"
        k = int(np.argmax(c.y))
        assert 0 < k < 24

    def test_eval_ap_perfect(self, capsys, tmp_path):
        recs = [json.loads(line) for line in (FIXTURES / "annotations.jsonl").read_text().splitlines()]
        dets = tmp_path / "d.jsonl"
        dets.write_text("".join(json.dumps({"image_id": r["image_id"], "score": 1.0,
                                            **{k: b[k] for k in ("x_min", "y_min", "x_max", "y_max")}}) + "\n"
                                for r in recs for b in r["boxes"]))
        code, out, _ = run(capsys, "eval-ap", "--gt", FIXTURES / "annotations.jsonl", "--dets", dets,
                           "--meta", tmp_path / "m.json")
        assert code == 0 and out.strip() == "AP 1.0000"
        assert json.loads((tmp_path / "m.json").read_text())["result"]["ap"] == 1.0

    def test_eval_ap_subset(self, capsys, tmp_path):
        code, out, _ = run(capsys, "eval-ap", "--gt", FIXTURES / "annotations.jsonl",
                           "--dets", FIXTURES / "detections.jsonl", "--subset", "emotion=happy",
                           "--meta", tmp_path / "m.json")
        assert code == 0 and out.startswith("AP ")
        assert run(capsys, "eval-ap", "--gt", FIXTURES / "annotations.jsonl",
                   "--dets", FIXTURES / "detections.jsonl", "--subset", "mood=happy")[0] == 1

    def test_stats(self, capsys, tmp_path):
        out = tmp_path / "s.json"
        assert run(capsys, "stats", "--gt", FIXTURES / "annotations.jsonl", "--out", out)[0] == 0
        body = json.loads(out.read_text())
        assert body["n_faces"] == 8
        assert body["per_face"]["emotion"]["happy"]["fraction"] == 3 / 8

    def test_gen_noise(self, capsys, tmp_path):
        d = tmp_path / "noise"
        assert run(capsys, "gen-noise", "--size", 32, "--width", 4, "--seed", 7, "--count", 3, "--out", d)[0] == 0
        manifest = json.loads((d / "manifest.json").read_text())
        assert [m["file"] for m in manifest["images"]] == [f"noise_w4_s7_{k}.pgm" for k in range(3)]
        img = read_netpbm(d / "noise_w4_s7_0.pgm")
        assert img.shape == (32, 32) and img.min() == 0 and img.max() == 255
        assert json.loads((d / "run.meta.json").read_text())["seed"] == 7
        first = (d / "noise_w4_s7_1.pgm").read_bytes()
        run(capsys, "gen-noise", "--size", 32, "--width", 4, "--seed", 7, "--count", 3, "--out", d)
        assert (d / "noise_w4_s7_1.pgm").read_bytes() == first

    def test_simulate_feature(self, capsys, tmp_path):
        out = tmp_path / "mc.csv"
        assert run(capsys, "simulate", "feature", "--trials", 200_000, "--seed", 3, "--out", out)[0] == 0
        row = out.read_text().splitlines()[1].split(",")
        assert abs(float(row[5])) < 4
        assert run(capsys, "simulate", "feature", "--trials", 10)[0] == 1

    def test_simulate_detect_curve(self, capsys, tmp_path):
        out = tmp_path / "det.csv"
        code, _, _ = run(capsys, "simulate", "detect-curve", "--widths", "4,16", "--per-width", 2,
                         "--size", 64, "--out", out)
        assert code == 0
        assert len(curve_from_csv(out.read_text())) == 2

    def test_psycho_pipeline(self, capsys, tmp_path):
        trials = tmp_path / "t.csv"
        assert run(capsys, "psycho", "synth", "--design", "appendix", "--seed", 5, "--out", trials)[0] == 0
        assert len(trials.read_text().splitlines()) == 14 * 270 + 1
        kept, dropped = tmp_path / "k.csv", tmp_path / "d.csv"
        assert run(capsys, "psycho", "clean", "--trials", trials, "--out", kept, "--dropped", dropped)[0] == 0
        n_kept = len(kept.read_text().splitlines()) - 1
        n_dropped = len(dropped.read_text().splitlines()) - 1
        assert n_kept + n_dropped == 14 * 270 and n_dropped > 0
        curve = tmp_path / "c.csv"
        assert run(capsys, "psycho", "curve", "--trials", trials, "--out", curve, "--svg", tmp_path / "c.svg")[0] == 0
        c = curve_from_csv(curve.read_text())
        assert len(c) == 9 and c.has_band
        assert 'class="ci"' in (tmp_path / "c.svg").read_text()
        for action in ("rt", "groups"):
            assert run(capsys, "psycho", action, "--trials", trials, "--out", tmp_path / f"{action}.csv")[0] == 0
        code, out, _ = run(capsys, "psycho", "fit", "--trials", trials, "--out", tmp_path / "fit.csv")
        assert code == 0 and out.startswith("gamma_hat")
        assert len((tmp_path / "fit.csv").read_text().splitlines()) == 21

    def test_psycho_needs_trials(self, capsys, tmp_path):
        assert run(capsys, "psycho", "curve", "--meta", tmp_path / "m.json")[0] == 1

    def test_avg_face(self, capsys, tmp_path):
        rng = np.random.default_rng(0)
        raster = rng.integers(0, 256, size=(40, 50, 3)).astype(np.uint8)
        (tmp_path / "img_0001.ppm").write_bytes(netpbm_bytes(raster))
        gt = tmp_path / "gt.jsonl"
        gt.write_text(json.dumps({"image_id": "img_0001", "boxes": [
            {"x_min": 0, "y_min": 0, "x_max": 50, "y_max": 40}]}) + "\n")
        out, eq = tmp_path / "avg.png", tmp_path / "eq.ppm"
        code, _, _ = run(capsys, "avg-face", "--gt", gt, "--images", tmp_path, "--size", 16,
                         "--out", out, "--equalized", eq)
        assert code == 0
        assert read_image(out).shape == (16, 16, 3)
        assert read_netpbm(eq).shape == (16, 16, 3)

    def test_avg_face_missing_image(self, capsys, tmp_path):
        gt = tmp_path / "gt.jsonl"
        gt.write_text(json.dumps({"image_id": "nope", "boxes": [
            {"x_min": 0, "y_min": 0, "x_max": 5, "y_max": 5}]}) + "\n")
        assert run(capsys, "avg-face", "--gt", gt, "--images", tmp_path, "--out", tmp_path / "a.png")[0] == 2

    def test_verbose_logs(self, capsys, tmp_path):
        code, _, err = run(capsys, "-v", "model-curve", "--model", "feature", "--out", tmp_path / "f.csv")
        assert code == 0 and "finished" in err
