"""CLI contract: parsing, round-trips, exit codes, config echoes, and the
bandwidth JSON schema."""

import csv
import json

import numpy as np
import pytest

from modalreg.cli import main, parse_dataset, parse_grid
from modalreg.errors import DimensionError, NonFiniteError, ParseError
from modalreg.modal_lpr import Dataset
from modalreg.varying_coeff import VCDataset


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_parse_grid():
    g = parse_grid("0:1:5")
    assert np.allclose(g, [0.0, 0.25, 0.5, 0.75, 1.0])
    from modalreg.cli import CLIError
    for bad in ("0:1", "1:0:5", "a:b:c"):
        with pytest.raises(CLIError):
            parse_grid(bad)


def test_parse_scalar_dataset(tmp_path):
    p = _write(tmp_path / "d.csv", "x,y\n0.1,1.0\n0.2,2.0\n")
    data = parse_dataset(p)
    assert isinstance(data, Dataset)
    assert data.n == 2
    assert data.y[1] == 2.0


def test_parse_vc_dataset_synthesizes_intercept(tmp_path):
    p = _write(tmp_path / "d.csv",
               "u,x1,x2,y\n0.1,1.0,2.0,3.0\n0.2,0.5,0.5,1.0\n")
    data = parse_dataset(p)
    assert isinstance(data, VCDataset)
    assert data.p == 3
    assert np.all(data.X[:, 0] == 1.0)
    assert data.X[0, 1] == 1.0 and data.X[0, 2] == 2.0


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_dataset(_write(tmp_path / "a.csv", "x,y\n0.1,notanumber\n0,0\n"))
    with pytest.raises(DimensionError):
        parse_dataset(_write(tmp_path / "b.csv", "x,y\n0.1,1.0,9\n0,0\n"))
    with pytest.raises(NonFiniteError):
        parse_dataset(_write(tmp_path / "c.csv", "x,y\n0.1,nan\n0,0\n"))
    with pytest.raises(ParseError):
        parse_dataset(_write(tmp_path / "d.csv", "a,b\n0.1,1.0\n"), "scalar")
    with pytest.raises(ParseError):
        parse_dataset(str(tmp_path / "missing.csv"))


def test_simulate_round_trip(tmp_path):
    out = str(tmp_path / "sim.csv")
    assert main(["simulate", "--scenario", "example1", "--n", "40",
                 "--seed", "11", "--output", out]) == 0
    data = parse_dataset(out)
    from modalreg.study import example1
    truth = example1().sample(40, 11, 0)
    # 17-significant-digit CSV round-trips float64 exactly
    assert np.array_equal(data.x, truth.x)
    assert np.array_equal(data.y, truth.y)
    echo = json.loads((tmp_path / "sim.csv.config.json").read_text())
    assert echo["seed"] == 11 and echo["n"] == 40


def test_fit_noiseless_line_via_cli(tmp_path):
    rows = ["x,y"] + [f"{x},{2.0 * x}" for x in np.linspace(0, 1, 60)]
    inp = _write(tmp_path / "line.csv", "\n".join(rows) + "\n")
    out = str(tmp_path / "fit.csv")
    assert main(["fit", "--input", inp, "--output", out,
                 "--bandwidth", "manual", "--h1", "0.3", "--h2", "0.5",
                 "--grid", "0.1:0.9:9"]) == 0
    with open(out) as fh:
        got = list(csv.DictReader(fh))
    assert len(got) == 9
    for row in got:
        assert float(row["m_hat"]) == pytest.approx(2.0 * float(row["x"]),
                                                    abs=1e-8)
        assert row["converged"] == "True"


def test_exit_codes(tmp_path, capsys):
    inp = _write(tmp_path / "d.csv",
                 "x,y\n" + "\n".join(f"0.{i},{i}" for i in range(1, 9)) + "\n")
    out = str(tmp_path / "o.csv")
    # validation error: unknown method
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--input", inp, "--output", out, "--method", "zzz"])
    assert exc.value.code == 1
    assert "E_METHOD" in capsys.readouterr().err
    # validation error: missing seed on a study subcommand
    with pytest.raises(SystemExit) as exc:
        main(["coverage", "--scenario", "example1", "--n", "50",
              "--reps", "2", "--output", out])
    assert exc.value.code == 1
    # numerical failure: degenerate manual bandwidth window
    code = main(["fit", "--input", inp, "--output", out,
                 "--bandwidth", "manual", "--h1", "1e-6", "--h2", "0.5",
                 "--grid", "0.45:0.45:1"])
    assert code == 2
    assert "E_" in capsys.readouterr().err
    # validation error: grid outside data range
    code = main(["fit", "--input", inp, "--output", out,
                 "--bandwidth", "manual", "--h1", "0.3", "--h2", "0.5",
                 "--grid", "0:5:3"])
    assert code == 1


def test_bandwidth_json_schema(tmp_path, capsys):
    from modalreg.study import example1
    data = example1().sample(300, 2, 0)
    rows = ["x,y"] + [f"{x:.17g},{y:.17g}" for x, y in zip(data.x, data.y)]
    inp = _write(tmp_path / "d.csv", "\n".join(rows) + "\n")
    assert main(["bandwidth", "--input", inp]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"K", "M", "N", "L", "delta", "h1", "h2"}
    assert payload["h1"] > 0 and payload["h2"] > 0


def test_cv_subcommand(tmp_path):
    from modalreg.study import example1
    data = example1().sample(150, 3, 0)
    rows = ["x,y"] + [f"{x:.17g},{y:.17g}" for x, y in zip(data.x, data.y)]
    inp = _write(tmp_path / "d.csv", "\n".join(rows) + "\n")
    out = str(tmp_path / "cv.csv")
    assert main(["cv", "--input", inp, "--output", out, "--method", "ll",
                 "--seed", "1"]) == 0
    with open(out) as fh:
        got = list(csv.DictReader(fh))
    assert len(got) == 1
    assert float(got[0]["median_mspe"]) > 0


def test_coverage_csv_schema_and_byte_determinism(tmp_path):
    out1 = str(tmp_path / "c1.csv")
    out2 = str(tmp_path / "c2.csv")
    args = ["coverage", "--scenario", "example1", "--method", "ll",
            "--n", "100", "--reps", "2", "--widths", "0.5", "--seed", "5",
            "--grid-size", "15"]
    assert main(args + ["--output", out1]) == 0
    assert main(args + ["--output", out2, "--threads", "2"]) == 0
    b1 = open(out1, "rb").read()
    b2 = open(out2, "rb").read()
    assert b1 == b2
    with open(out1) as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == ["method", "n", "width", "mean_coverage",
                            "sd_coverage", "replications", "failures"]
