import csv
import json
import subprocess
import sys

import pytest

from shiftdyn.cli.config import load_config, parse_config
from shiftdyn.cli.main import closed_form_3_2, main, run
from shiftdyn.cli.report import RunReport, Table, dumps, loads, table_csv
from shiftdyn.errors import ConfigInvalid


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norms_match_closed_form(tmp_path, capsys):
    cfg = write(tmp_path, "[window]\nm = 1\n[norms]\ni_min = 0\ni_max = 3\nl_min = 2\nl_max = 10\n")
    code, out, _ = run_cli(capsys, "norms", "--config", cfg)
    assert code == 0
    rep = loads(out)
    assert rep.verdict == "Yes"
    rows = rep.tables["norms"].rows
    assert len(rows) == 4 * 9
    for i, m, l, numeric, cf, diff in rows:
        assert cf == pytest.approx((i + m + 1) ** 2 / ((i + 1) * (i + l + 1)))
        assert diff < 1e-10


def test_norms_dense_column(tmp_path, capsys):
    cfg = write(tmp_path, "[truncation]\nM = 30\n[norms]\ndense = true\nl_max = 6\n")
    code, out, _ = run_cli(capsys, "norms", "--config", cfg)
    assert code == 0
    for row in loads(out).tables["norms"].rows:
        assert row[6] == pytest.approx(row[3], abs=1e-10)


def test_closed_form_ranges():
    assert closed_form_3_2(0, 1, 1) is None
    assert closed_form_3_2(0, 1, 2) == pytest.approx(4 / 3)
    assert closed_form_3_2(-3, 1, 5) is None
    assert closed_form_3_2(-3, 1, 6) == pytest.approx(4 / 3)


def test_star_on_disjoint_pair(tmp_path, capsys):
    cfg = write(tmp_path, '[family]\nname = "example_3_6"\n[star]\nm = 2\nNm = 5\n')
    code, out, _ = run_cli(capsys, "star", "--config", cfg)
    assert code == 0
    rep = loads(out)
    assert rep.verdict == "Yes"
    assert rep.values["Nm"] == 5


def test_scan_geometric(tmp_path, capsys):
    cfg = write(tmp_path, '[family]\nname = "example_3_11"\nalpha = 2.0\n[horizons]\nN = 200\n[tolerances]\neps = 0.1\n')
    code, out, _ = run_cli(capsys, "scan", "--config", cfg)
    assert code == 0
    rep = loads(out)
    assert rep.verdict == "Yes"
    assert rep.values["lower_density"] >= 0.8
    assert rep.tables["scan"].columns == ["n", "certified"]


def test_report_round_trip():
    rep = RunReport(
        subcommand="x",
        config={"a": 1, "b": {"c": 0.1}},
        verdict="Yes",
        summary="s",
        values={"f": 1 / 3, "i": 3, "n": None, "big": 1e300, "whole": 2.0},
        tables={"t": Table(columns=["a", "b"], rows=[[1, 0.1 + 0.2], [2, None]])},
    )
    back = loads(dumps(rep))
    assert back == rep
    assert isinstance(back.values["whole"], float)
    assert dumps(back) == dumps(rep)


def test_non_finite_becomes_null():
    rep = RunReport(subcommand="x", config={}, verdict="No", summary="", values={"v": float("nan"), "w": float("inf")})
    data = json.loads(dumps(rep))
    assert data["values"] == {"v": None, "w": None}


def test_reruns_are_byte_identical(tmp_path, capsys):
    cfg = write(tmp_path, '[family]\nname = "example_3_11"\nalpha = 2.0\n[witness]\nseed = 7\nn_k = [10, 20]\n')
    outs = [run_cli(capsys, "witness", "--config", cfg)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    assert "timings" in outs[0] and '"timings": null' in outs[0]


def test_timings_opt_in():
    cfg = parse_config({"output": {"timings": True}, "periodic": {"L": 3}})
    rep = run(cfg, "periodic")
    assert rep.timings is not None and rep.timings["total_s"] >= 0


@pytest.mark.parametrize(
    "text, field",
    [
        ("[window]\nJ = 0\n", "window.J"),
        ("[window]\nbogus = 1\n", "window.bogus"),
        ("[nonsense]\n", "nonsense"),
        ('[family]\nname = "example_3_11"\nalpha = 0.5\n', "family"),
        ('[furstenberg]\nvariant = "LowerDensity"\n', "furstenberg"),
        ("[truncation]\nM = 5\n[norms]\ndense = true\n", "truncation.M"),
        ("[window\n", "run.toml"),
    ],
    ids=["range", "unknown-key", "unknown-section", "alpha", "delta", "dense-window", "toml-syntax"],
)
def test_invalid_config_exit_2(tmp_path, capsys, text, field):
    cfg = write(tmp_path, text)
    code, out, err = run_cli(capsys, "norms", "--config", cfg)
    assert code == 2
    assert out == ""
    assert field in err


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run_cli(capsys, "norms", "--config", tmp_path / "absent.toml")
    assert code == 2 and "absent.toml" in err


def test_runtime_error_exit_1(tmp_path, capsys):
    # a valid config whose witness horizon overlaps the support window
    cfg = write(tmp_path, "[window]\nJ = 2\n[witness]\nn_k = [3]\n")
    code, _, err = run_cli(capsys, "witness", "--config", cfg)
    assert code == 1 and "SupportCollision" in err


def test_env_overrides():
    cfg = parse_config({"horizons": {"N": 10}}, {"SHIFTDYN_N": "50", "SHIFTDYN_L_MAX": "40", "SHIFTDYN_K_COUNT": "3"})
    assert (cfg.horizons.N, cfg.horizons.L_max, cfg.horizons.k_count) == (50, 40, 3)
    with pytest.raises(ConfigInvalid) as exc:
        parse_config({}, {"SHIFTDYN_N": "many"})
    assert "SHIFTDYN_N" in exc.value.errors[0]
    with pytest.raises(ConfigInvalid):
        parse_config({}, {"SHIFTDYN_N": "0"})
    assert load_config(None, {}).horizons.N == 200


def test_csv_output(tmp_path, capsys):
    cfg = write(tmp_path, "[periodic]\nn = 3\nL = 4\n")
    out = tmp_path / "per.csv"
    code, stdout, _ = run_cli(capsys, "periodic", "--config", cfg, "--format", "csv", "--out", out)
    assert code == 0 and stdout == ""
    table = tmp_path / "per_periodic.csv"
    with table.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["coordinate", "norm"]
    assert len(rows) == 1 + 9
    summary = json.loads((tmp_path / "per.json").read_text())
    assert summary["verdict"] == "Yes" and summary["tables"] == {}


def test_table_csv_blank_for_missing():
    t = Table(columns=["a", "b"], rows=[[1, None], [2, float("nan")], [3, 0.25]])
    assert table_csv(t) == "a,b\n1,\n2,\n3,0.25\n"


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, "[periodic]\nL = 2\n")
    proc = subprocess.run(
        [sys.executable, "-m", "shiftdyn.cli.main", "periodic", "--config", str(cfg)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert loads(proc.stdout).subcommand == "periodic"
