from pathlib import Path

import numpy as np
import pytest

from swarmagg.analysis import containment_check
from swarmagg.cli import main
from swarmagg.config import load_scenario
from swarmagg.coupling import save_matrix
from swarmagg.errors import ConfigError
from swarmagg.io import read_csv_columns, read_trajectory_csv
from swarmagg.runner import (
    EXIT_CONFIG,
    EXIT_DIVERGENCE,
    EXIT_INVALID_COUPLING,
    EXIT_NOT_CONTAINED,
    EXIT_OK,
    run_batch,
    run_scenario,
)

from conftest import complete_unit

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

SHORT = """\
[scenario]
name = {name}
assert_contained = true

[kernel]
type = gaussian
a = 1
b = 20
c = 0.2

[coupling]
n_agents = 6
density = 0.5
seed = {seed}

[initial]
dimension = 2
low = -5
high = 5
seed = 3

[integration]
dt = {dt}
t_end = {t_end}
record_stride = 10
method = {method}

[analysis]
t_hold = 10
"""


def write_scenario(directory, name, seed=1, dt=0.001, t_end=12, method="rk4"):
    path = Path(directory) / f"{name}.ini"
    path.write_text(SHORT.format(name=name, seed=seed, dt=dt, t_end=t_end, method=method))
    return path


@pytest.fixture
def out(tmp_path, monkeypatch):
    root = tmp_path / "runs"
    monkeypatch.setenv("SWARMAGG_OUTPUT_ROOT", str(root))
    return root


def test_run_writes_artifacts(tmp_path, out, capsys):
    cfg = write_scenario(tmp_path, "short")
    assert main(["run", str(cfg)]) == EXIT_OK
    run_dir = out / "short"
    for name in ("trajectory.csv", "center.csv", "series.csv", "bound_report.txt", "manifest.csv",
                 "trajectories.png", "center.png", "dispersion.png"):
        assert (run_dir / name).exists(), name
    assert (run_dir / "trajectory.csv").read_text().splitlines()[0] == "t,agent,x0,x1"
    assert (run_dir / "series.csv").read_text().splitlines()[0] == "t,V,dispersion,rho_sq"
    manifest = (run_dir / "manifest.csv").read_text()
    assert "version,0.1.0" in manifest and "kernel.b,20.0" in manifest
    assert "contained: True" in capsys.readouterr().out


def test_byte_identical_reruns(tmp_path, out):
    cfg = write_scenario(tmp_path, "repro")
    main(["run", str(cfg), "--no-plot"])
    first = {p.name: p.read_bytes() for p in (out / "repro").iterdir()}
    main(["run", str(cfg), "--no-plot"])
    second = {p.name: p.read_bytes() for p in (out / "repro").iterdir()}
    assert first == second


def test_trajectory_csv_roundtrip(tmp_path, out):
    cfg = write_scenario(tmp_path, "roundtrip")
    code, run_dir, result = run_scenario(cfg, plot=False)
    assert code == EXIT_OK
    reloaded = read_trajectory_csv(run_dir / "trajectory.csv")
    assert reloaded.positions.tobytes() == result.trajectory.positions.tobytes()
    assert containment_check(reloaded, result.bound, 10.0) == result.report
    series = read_csv_columns(run_dir / "series.csv")
    np.testing.assert_array_equal(series["dispersion"], result.trajectory.dispersion)


def test_malformed_config_no_artifacts(tmp_path, out, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[kernel]\ntype = gaussian\na = one\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


@pytest.mark.parametrize("text", [
    "not an ini file",
    SHORT.replace("[analysis]", "[analysys]"),
    SHORT.replace("density = 0.5", "densty = 0.5"),
    SHORT.replace("t_hold = 10", "t_hold = 100"),
    SHORT.replace("type = gaussian", "type = cubic"),
])
def test_config_errors(tmp_path, text):
    p = tmp_path / "x.ini"
    p.write_text(text.format(name="x", seed=1, dt=0.001, t_end=12, method="rk4") if "{" in text else text)
    with pytest.raises(ConfigError):
        load_scenario(p)


def test_explicit_files(tmp_path, out):
    save_matrix(complete_unit(4), tmp_path / "W.txt")
    np.savetxt(tmp_path / "x0.txt", [[0, 0], [1, 0], [0, 1], [1, 1.5]])
    text = SHORT.replace("n_agents = 6\ndensity = 0.5\nseed = {seed}", "file = W.txt").replace(
        "dimension = 2\nlow = -5\nhigh = 5\nseed = 3", "file = x0.txt")
    cfg = tmp_path / "files.ini"
    cfg.write_text(text.format(name="files", dt=0.001, t_end=11, method="rk4"))
    sc = load_scenario(cfg)
    assert sc.n_agents == 4 and sc.initial.shape == (4, 2)
    code, _, result = run_scenario(cfg, plot=False)
    assert code == EXIT_OK
    assert result.bound.lambda2 == pytest.approx(8.0)


def test_missing_matrix_file(tmp_path):
    text = SHORT.replace("n_agents = 6\ndensity = 0.5\nseed = {seed}", "file = nowhere.txt")
    cfg = tmp_path / "missing.ini"
    cfg.write_text(text.format(name="m", dt=0.001, t_end=11, method="rk4"))
    with pytest.raises(ConfigError):
        load_scenario(cfg)


def test_not_contained_exit_code(tmp_path, out):
    # a cloud of size 1e4 cannot shrink inside rho within the first half second
    cfg = tmp_path / "wide.ini"
    cfg.write_text(SHORT.format(name="wide", seed=1, dt=0.001, t_end=10.5, method="rk4")
                   .replace("low = -5\nhigh = 5", "low = -10000\nhigh = 10000"))
    code, run_dir, result = run_scenario(cfg, plot=False)
    assert code == EXIT_NOT_CONTAINED
    assert not result.report.contained and result.report.entry_time > 0.5
    assert (run_dir / "bound_report.txt").exists()


def test_unbalanced_file_rejected(tmp_path, out):
    np.savetxt(tmp_path / "W.txt", [[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    text = SHORT.replace("n_agents = 6\ndensity = 0.5\nseed = {seed}", "file = W.txt").replace(
        "dimension = 2", "dimension = 3")
    cfg = tmp_path / "unbalanced.ini"
    cfg.write_text(text.format(name="u", dt=0.001, t_end=11, method="rk4"))
    assert main(["run", str(cfg)]) == EXIT_INVALID_COUPLING


def test_divergence_exit_code(tmp_path, out):
    cfg = write_scenario(tmp_path, "boom", dt=1.0, t_end=400, method="euler")
    assert main(["run", str(cfg)]) == EXIT_DIVERGENCE
    assert not (out / "boom").exists()


def test_batch_empty(tmp_path, out, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["batch", str(empty)]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == ["scenario,status,exit_code,seed,lambda2,M,rho,entry_time,contained,max_dispersion_ratio,message"]


def test_batch_isolates_failures(tmp_path, out):
    d = tmp_path / "batch"
    d.mkdir()
    write_scenario(d, "a-ok", seed=1)
    write_scenario(d, "b-boom", dt=1.0, t_end=400, method="euler")
    write_scenario(d, "c-ok", seed=2)
    rows = run_batch(d)
    assert [r["scenario"] for r in rows] == ["a-ok", "b-boom", "c-ok"]
    assert [r["status"] for r in rows] == ["ok", "divergence", "ok"]
    assert rows[0]["contained"] and rows[0]["seed"] == 1


def test_batch_parallel_matches_serial(tmp_path, out):
    d = tmp_path / "batch"
    d.mkdir()
    for i in range(3):
        write_scenario(d, f"s{i}", seed=10 + i)
    assert run_batch(d, parallel=2) == run_batch(d, parallel=1)


def test_batch_cli_summary_file(tmp_path, out):
    d = tmp_path / "batch"
    d.mkdir()
    write_scenario(d, "only")
    assert main(["batch", str(d)]) == EXIT_OK
    assert (out / "summary.csv").read_text().startswith("scenario,status")


def test_validate_coupling_cli(tmp_path, capsys):
    good = tmp_path / "good.txt"
    good.write_text("0 2 1\n1 0 2\n2 1 0\n")
    assert main(["validate-coupling", str(good)]) == EXIT_OK
    assert "valid: True" in capsys.readouterr().out
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n0 0\n")
    assert main(["validate-coupling", str(bad)]) == EXIT_INVALID_COUPLING
    assert "balanced: False" in capsys.readouterr().out


def test_bounds_cli(capsys):
    assert main(["bounds", str(SCENARIOS / "paper-fig-n10.ini")]) == EXIT_OK
    out = dict(line.split(": ") for line in capsys.readouterr().out.strip().splitlines())
    assert set(out) == {"lambda2", "M", "rho", "threshold_V", "rho_star"}
    assert float(out["rho"]) == pytest.approx(float(out["rho_star"]), rel=1e-12)
    assert main(["bounds", str(SCENARIOS / "bounded-repulsion-n10.ini")]) == EXIT_OK
    out = dict(line.split(": ") for line in capsys.readouterr().out.strip().splitlines())
    assert out["rho"] == "n/a"
    assert float(out["rho_star"]) == pytest.approx(4 * 20 * float(out["M"]) / float(out["lambda2"]))


def test_plot_verb(tmp_path, out):
    cfg = write_scenario(tmp_path, "plotme")
    run_scenario(cfg, plot=False)
    assert not (out / "plotme" / "trajectories.png").exists()
    assert main(["plot", str(out / "plotme")]) == EXIT_OK
    assert (out / "plotme" / "trajectories.png").stat().st_size > 0


@pytest.mark.parametrize("name", ["paper-fig-n10", "paper-fig-n5"])
def test_bundled_paper_scenarios(tmp_path, name):
    code, run_dir, result = run_scenario(SCENARIOS / f"{name}.ini", root=tmp_path, plot=False)
    assert code == EXIT_OK and result.report.contained
    assert (run_dir / "trajectory.csv").exists()
