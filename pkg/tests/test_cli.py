import json
import subprocess
import sys

import pytest

from silm.cli import main
from silm.experiments import read_csv

SCENARIO = """\
# small mixed scenario
L_d = 2
L_u = 1
K = 2
N_b = 4
N_m = 2
s = 1
snr_db = 10
rho_db = -10
w = 0.5
trials = 3
max_iters = 20
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text(SCENARIO)
    return str(path)


def run_cli(*argv):
    try:
        return main(list(argv))
    except SystemExit as exc:     # argparse failures
        return exc.code


def test_run_to_stdout(config, capsys):
    assert run_cli("run", "--config", config) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].startswith("experiment,axis,value,metric")
    assert len(lines) == 4
    assert lines[1].startswith("run,snr_db,10,R_DL,")


def test_sweep_to_stdout(config, capsys):
    assert run_cli("sweep", "--config", config, "--axis", "rho_db",
                   "--values=-20,-10") == 0
    assert len(capsys.readouterr().out.splitlines()) == 1 + 2 * 3


def test_mode_ilm_overrides_config_weight(config, tmp_path):
    out = tmp_path / "ilm.csv"
    assert run_cli("run", "--config", config, "--mode", "ilm", "--out", str(out)) == 0
    meta = json.loads((tmp_path / "ilm.csv.meta.json").read_text())
    assert meta["mode"] == "ilm" and meta["w_effective"] == 0.0
    assert all(p["config"]["w"] == 0.0 for p in meta["points"])


def test_mode_ilm_equals_zero_weight(config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli("run", "--config", config, "--mode", "ilm", "--out", str(a))
    run_cli("run", "--config", config, "--mode", "silm", "--w", "0", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_flags_override_config(config, tmp_path):
    out = tmp_path / "o.csv"
    run_cli("run", "--config", config, "--trials", "2", "--seed", "4",
            "--precoder", "zf", "--out", str(out))
    rows = read_csv(out)
    assert {r["trials"] for r in rows} == {2} and {r["seed"] for r in rows} == {4}
    meta = json.loads((tmp_path / "o.csv.meta.json").read_text())
    assert meta["points"][0]["precoder"] == "zf"


def test_figure_fig2(tmp_path):
    out = tmp_path / "fig2.csv"
    assert run_cli("figure", "fig2", "--trials", "1", "--seed", "7",
                   "--max-iters", "3", "--out", str(out)) == 0
    rows = read_csv(out)
    assert {r["axis"] for r in rows} == {"rho_db"}
    assert {r["experiment"] for r in rows} == {"fig2/ilm", "fig2/silm_w0.01", "fig2/silm_w0.02"}
    assert len(rows) == 3 * 9 * 3


def test_plot_written(config, tmp_path):
    png = tmp_path / "c.png"
    assert run_cli("sweep", "--config", config, "--axis", "K", "--values", "1,2",
                   "--out", str(tmp_path / "c.csv"), "--plot", str(png)) == 0
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_identical_bytes_across_thread_counts(tmp_path):
    paths = []
    for i, threads in enumerate(("1", "1", "2")):
        p = tmp_path / f"r{i}.csv"
        assert run_cli("figure", "fig6", "--trials", "2", "--seed", "3",
                       "--max-iters", "5", "--threads", threads, "--out", str(p)) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


@pytest.mark.parametrize("argv", [
    ["run", "--bogus"],
    ["figure", "fig9"],
    ["sweep", "--axis", "rho_db"],
    ["run", "--trials", "0"],
])
def test_invalid_input_exit_1(argv, capsys):
    assert run_cli(*argv) == 1
    assert capsys.readouterr().err


def test_bad_config_value_exit_1(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("K = 3\ns = 2\nN_m = 2\nN_b = 5\n")
    assert run_cli("run", "--config", str(bad)) == 1


def test_io_errors_exit_2(config, tmp_path):
    assert run_cli("run", "--config", str(tmp_path / "none.txt")) == 2
    assert run_cli("run", "--config", config, "--out", str(tmp_path / "no" / "o.csv")) == 2


def test_module_entry_point(config):
    proc = subprocess.run([sys.executable, "-m", "silm", "run", "--config", config,
                           "--trials", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("experiment,")
