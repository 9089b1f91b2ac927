import csv
import io
import json

import numpy as np
import pytest

from singreen import cli, greens3d
from singreen.cli import UsageError
from singreen.potentials import power_exp


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_parse_grid():
    assert np.allclose(cli.parse_grid("1:3:3:lin"), [1, 2, 3])
    assert np.allclose(cli.parse_grid("1:100:3:log"), [1, 10, 100])
    assert np.allclose(cli.parse_grid("0.5,2"), [0.5, 2.0])
    assert np.allclose(cli.parse_grid("7"), [7.0])


@pytest.mark.parametrize("bad", ["1:2:3", "1:2:x:lin", "0:1:3:log", "1:2:3:cubic", "abc",
                                 "1:2:0:lin"])
def test_parse_grid_rejects(bad):
    with pytest.raises(UsageError):
        cli.parse_grid(bad)


def test_greens_eval_csv(capsys):
    code, out, _ = run(capsys, "greens-eval", "--set", "model=power_exp", "--set", "rho=0.5",
                       "--set", "r=0.2,0.3", "--set", "rprime=1.5", "--set", "cos_angle=0.2")
    assert code == 0
    head = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert head[0].startswith("# command=greens-eval")
    assert any(ln.startswith("# version") for ln in head)
    assert "# set rho=0.5" in head
    rows = table(out)
    assert len(rows) == 2
    ref = greens3d.green_sum(power_exp(1.0, 0.5), 1.0, 0.3, 1.5, 0.2).value
    assert complex(float(rows[1]["re_G"]), float(rows[1]["im_G"])) == ref


def test_greens_eval_origin_row(capsys):
    code, out, _ = run(capsys, "greens-eval", "--set", "r=0.01", "--set", "rprime=0",
                       "--set", "rho=0.5")
    assert code == 0
    ref = greens3d.green_at_origin(power_exp(1.0, 0.5), 1.0, 0.01)
    assert float(table(out)[0]["re_G"]) == ref.real


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# chi sweep\neta = 0.5\nR = 20,40\nell = 1\n")
    code, out, _ = run(capsys, "chi-sweep", "--config", str(cfg), "--set", "eta=1.0",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["settings"]["eta"] == "1.0"
    assert [row["R"] for row in doc["results"]] == [20.0, 40.0]
    assert {"re_chi", "im_chi", "valid"} <= set(doc["results"][0])


def test_out_file(tmp_path, capsys):
    path = tmp_path / "o.csv"
    code, out, _ = run(capsys, "born-check", "--set", "rho=1.5", "--set", "mu=0",
                       "--set", "screening_radius=5", "--set", "k=0.001",
                       "--set", "r=1e-4:1e-2:3:log", "--out", str(path))
    assert code == 0 and out == ""
    rows = table(path.read_text())
    assert len(rows) == 3
    assert all(r["converged"] == "true" for r in rows)


def test_asymptote_fit_from_input(tmp_path, capsys):
    r = np.geomspace(1e-4, 1e-2, 20)
    g = 1 / (4 * np.pi * r) + 0.25 - 0.5j
    src = tmp_path / "g.csv"
    src.write_text("r,re,im\n" + "".join(f"{a:.17g},{b.real:.17g},{b.imag:.17g}\n" for a, b in zip(r, g)))
    code, out, _ = run(capsys, "asymptote-fit", "--set", f"input={src}", "--set", "rho=0.5")
    assert code == 0
    row = table(out)[0]
    assert float(row["re_const"]) == pytest.approx(0.25, abs=1e-9)
    assert float(row["im_const"]) == pytest.approx(-0.5, abs=1e-9)


def test_zero_range(capsys):
    code, out, _ = run(capsys, "zero-range", "--set", "rho=1.0", "--set", "lam=2")
    assert code == 0
    row = table(out)[0]
    assert row["class"] == "Coulomb"
    assert float(row["beta_rel_diff"]) < 1e-3
    assert row["extrapolation_flag"] == "false"


def test_flagged_exit_code(capsys):
    args = ["asymptote-fit", "--set", "rho=1.0", "--set", "class=SubCoulomb"]
    code, out, err = run(capsys, *args)
    assert code == 2
    assert "numerical flag" in err
    assert table(out)[0]["class_mismatch"] == "true"
    code, _, _ = run(capsys, *args, "--allow-flagged")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["chi-sweep", "--set", "eta"],
    ["chi-sweep", "--set", "R=1:2:x:lin"],
    ["chi-sweep", "--config", "/nonexistent/file.cfg"],
    ["greens-eval", "--set", "model=yukawa"],
    ["chi-sweep", "--set", "k=fast"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == 1


def test_output_is_deterministic(capsys):
    argv = ["chi-sweep", "--set", "R=10,50", "--set", "eta=0.5"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_threads_do_not_change_output(capsys, monkeypatch):
    argv = ["greens-eval", "--set", "model=screened_coulomb", "--set", "screening_radius=10",
            "--set", "r=0.2:1.2:6:lin", "--set", "rprime=2"]
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("SG_THREADS", "3")
    _, b, _ = run(capsys, *argv)
    assert a == b
