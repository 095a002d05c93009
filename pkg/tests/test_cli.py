import csv
import io
import json
import math

import numpy as np
import pytest

from polcoh.cli import (EXIT_ARGS, EXIT_FAIL, EXIT_OK, RunConfig, _corrupted, build_parser,
                        cmd_check, density_tables, dumps_json, evolve_table, fmt_float, main)
from polcoh.errors import InvalidParameterError


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_float_format_has_17_digits():
    assert fmt_float(0.1) == "1.0000000000000001e-01"
    assert float(fmt_float(math.pi)) == math.pi


def test_json_writer_deterministic_and_parseable():
    obj = {"b": [1.5, 2], "a": {"x": float("nan"), "ok": True}}
    text = dumps_json(obj)
    assert text == dumps_json(obj)
    assert json.loads(text) == {"b": [1.5, 2], "a": {"x": None, "ok": True}}


@pytest.mark.parametrize("kwargs", [dict(steps=0), dict(t0=1.0, t1=0.0), dict(alpha=1.1), dict(fmt="xml"),
                                    dict(accuracy=0.0)])
def test_config_validation(kwargs):
    with pytest.raises(InvalidParameterError):
        RunConfig(**kwargs)


def test_times_include_endpoints():
    t = RunConfig(t0=0, t1=1, steps=4).times
    assert t.tolist() == [0, 0.25, 0.5, 0.75, 1.0]


def test_parser_chirality_and_defaults():
    args = build_parser().parse_args(["evolve", "--chirality", "left", "--alpha-im", "0.2"])
    assert args.chirality == "left" and args.alpha_im == 0.2 and args.fmt == "csv"


def test_density_contour_encloses_center():
    cfg = RunConfig(alpha=0.4, beta=5, t0=0, t1=0, steps=1)
    tables, contours = density_tables(cfg, 0.05, spacing=0.1)
    poly = contours[0]
    assert len(poly) == 1
    pts = poly[0]
    assert np.allclose(pts[0], pts[-1])
    centroid = pts[:-1].mean(axis=0)
    assert np.hypot(*(centroid - [25 / 7, 0])) < 0.1


def test_density_vacuum_single_circle():
    cfg = RunConfig(alpha=0, beta=0, t0=0, t1=0, steps=1)
    _, contours = density_tables(cfg, 0.05, spacing=0.05)
    (pts,) = contours[0]
    radius = np.hypot(pts[:, 0], pts[:, 1])
    # |psi|^2 = exp(-r^2)/pi crosses 0.05 at r = sqrt(ln(20/pi))
    assert np.allclose(radius, math.sqrt(math.log(20 / math.pi)), atol=2e-3)


def test_density_threshold_above_peak_warns(caplog):
    cfg = RunConfig(alpha=0, beta=0, t0=0, t1=0, steps=1)
    tables, contours = density_tables(cfg, 5.0, spacing=0.2)
    assert contours[0] == []
    assert "empty contour" in caplog.text
    assert tables[1].rows == []


def test_density_rejects_bad_threshold():
    with pytest.raises(InvalidParameterError):
        density_tables(RunConfig(), 0.0)


def test_density_files_and_determinism(tmp_path):
    args = ["density", "--alpha-re", "0.4", "--beta-re", "5", "--steps", "2", "--spacing", "0.5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("density.csv", "contour.csv", "ellipse.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = read_csv(tmp_path / "a" / "density.csv")
    assert list(rows[0]) == ["x", "y", "t", "density"]
    assert list(read_csv(tmp_path / "a" / "contour.csv")[0]) == ["t", "polyline", "vertex", "x", "y"]


def test_density_json(tmp_path):
    assert main(["density", "--alpha-re", "0", "--beta-re", "0", "--steps", "1", "--spacing", "0.5",
                 "--format", "json", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "density.json").read_text())
    assert set(data[0]) == {"x", "y", "t", "density"}


def test_evolve_fig_parameters():
    cfg = RunConfig(alpha=0.4, beta=5, steps=32)
    table = evolve_table(cfg)
    rec = table.records()
    rs = [r["rs_x_cf"] for r in rec]
    assert max(abs(v - 0.25) for v in rs) <= 1e-12
    dx2 = [r["dx2_cf"] for r in rec]
    assert min(dx2) == pytest.approx(0.5 * 0.6 / 1.4, abs=1e-12)
    assert max(dx2) == pytest.approx(0.5 * 1.4 / 0.6, abs=1e-12)
    first, last = rec[0], rec[-1]
    for key in first:
        if key != "t":
            assert abs(first[key] - last[key]) <= 1e-10, key
    for key in first:
        if key.endswith("_absdiff"):
            assert max(r[key] for r in rec) <= 1e-7, key


def test_evolve_complex_label_stdout(capsys):
    assert main(["evolve", "--alpha-im", "0.5", "--beta-re", "1", "--beta-im", "1", "--steps", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("# evolve\n")
    rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
    assert len(rows) == 3
    assert all(float(r["qx_absdiff"]) < 1e-8 for r in rows)


def test_check_defaults_pass(capsys):
    assert main(["check"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"normalization", "series_vs_closed_form", "commutators", "eigenrelation_first"} <= names


def test_check_corrupted_amplitude_fails(capsys):
    assert main(["check", "--corrupt-amplitude"]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "normalization" in failed


def test_check_writes_file(tmp_path):
    assert cmd_check(RunConfig(out=tmp_path), _corrupted) == EXIT_FAIL
    assert json.loads((tmp_path / "check.json").read_text())["passed"] is False


def test_invalid_alpha_exit_code(capsys):
    assert main(["check", "--alpha-re", "1.2"]) == EXIT_ARGS
    assert "alpha" in capsys.readouterr().err


def test_argparse_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["evolve", "--chirality", "up"])
    assert exc.value.code == EXIT_ARGS


def test_near_boundary_alpha_reports_clearly(capsys):
    code = main(["check", "--alpha-re", "0.95"])
    assert code in (EXIT_OK, 3)
    if code == 3:
        assert "resource limit" in capsys.readouterr().err
