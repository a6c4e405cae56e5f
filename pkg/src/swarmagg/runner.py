"""Scenario execution: generation -> integration -> analysis -> artifacts."""

from __future__ import annotations

import logging
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import BoundReport, CohesionBound, center_drift_summary, cohesion_bound, containment_check
from .config import Scenario, load_scenario
from .coupling import save_matrix, validate_coupling
from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    DivergenceError,
    GenerationError,
    PreconditionError,
)
from .integrator import Trajectory, integrate
from .io import write_center_csv, write_key_values, write_series_csv, write_table, write_trajectory_csv

log = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "SWARMAGG_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_NOT_CONTAINED = 1
EXIT_CONFIG = 3
EXIT_GENERATION = 4
EXIT_DIVERGENCE = 5
EXIT_INVALID_COUPLING = 6

STATUS = {
    EXIT_OK: "ok",
    EXIT_NOT_CONTAINED: "not-contained",
    EXIT_CONFIG: "config-error",
    EXIT_GENERATION: "generation-error",
    EXIT_DIVERGENCE: "divergence",
    EXIT_INVALID_COUPLING: "invalid-coupling",
}

SUMMARY_COLUMNS = [
    "scenario", "status", "exit_code", "seed", "lambda2", "M", "rho",
    "entry_time", "contained", "max_dispersion_ratio", "message",
]


def output_root(override=None) -> Path:
    return Path(override or os.environ.get(OUTPUT_ROOT_ENV, "runs"))


@dataclass
class RunResult:
    scenario: Scenario
    bound: CohesionBound
    trajectory: Trajectory
    report: BoundReport

    @property
    def exit_code(self):
        if self.scenario.assert_contained and not self.report.contained:
            return EXIT_NOT_CONTAINED
        return EXIT_OK


class RunFailure(Exception):
    def __init__(self, exit_code, message):
        super().__init__(message)
        self.exit_code = exit_code


def simulate(scenario: Scenario) -> RunResult:
    report = validate_coupling(scenario.coupling)
    if not report.ok:
        raise RunFailure(EXIT_INVALID_COUPLING, "invalid coupling matrix: " + ", ".join(report.lines()))
    try:
        bound = cohesion_bound(scenario.kernel, scenario.coupling)
    except (DegenerateSpectrumError, PreconditionError) as exc:
        raise RunFailure(EXIT_INVALID_COUPLING, str(exc)) from None
    try:
        traj = integrate(scenario.initial, scenario.coupling, scenario.kernel, scenario.integration)
    except DivergenceError as exc:
        raise RunFailure(EXIT_DIVERGENCE, str(exc)) from None
    return RunResult(scenario, bound, traj, containment_check(traj, bound, scenario.t_hold))


def manifest_rows(result: RunResult):
    sc = result.scenario
    drift = center_drift_summary(result.trajectory)
    rows = [("software", "swarmagg"), ("version", __version__), ("config", str(sc.path))]
    rows += sc.resolved
    rows += [("kernel.family", getattr(sc.kernel, "name", "gaussian"))]
    rows += [("trajectory.samples", len(result.trajectory)), ("trajectory.n_clamped", result.trajectory.n_clamped)]
    rows += [(f"report.{k}", v) for k, v in result.report.as_dict().items()]
    rows += [
        ("center.net_displacement", drift.net_displacement),
        ("center.path_length", drift.path_length),
        ("center.turning_angle", drift.turning_angle),
    ]
    return rows


def write_artifacts(result: RunResult, out_dir: Path, plot=True):
    """Write all artifacts into a scratch directory, then move it into place."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}-", dir=out_dir.parent))
    try:
        traj = result.trajectory
        write_trajectory_csv(traj, tmp / "trajectory.csv")
        write_center_csv(traj, tmp / "center.csv")
        write_series_csv(traj, result.report.rho_sq, tmp / "series.csv")
        (tmp / "bound_report.txt").write_text(result.report.to_text())
        write_key_values(manifest_rows(result), tmp / "manifest.csv")
        save_matrix(result.scenario.coupling, tmp / "coupling.txt")
        np.savetxt(tmp / "initial.txt", result.scenario.initial, fmt="%.17g")
        if plot:
            from .plotting import render_run

            render_run(tmp, title=result.scenario.name)
        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.replace(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out_dir


def run_scenario(path, root=None, plot=True):
    """Run one scenario file. Returns ``(exit_code, out_dir or None, result or message)``.

    Nothing is written unless the run completes.
    """
    try:
        scenario = load_scenario(path)
        result = simulate(scenario)
    except ConfigError as exc:
        return EXIT_CONFIG, None, str(exc)
    except GenerationError as exc:
        return EXIT_GENERATION, None, str(exc)
    except RunFailure as exc:
        return exc.exit_code, None, str(exc)
    out_dir = write_artifacts(result, output_root(root) / scenario.name, plot=plot)
    return result.exit_code, out_dir, result


def _batch_row(args):
    path, root, plot = args
    code, _, payload = run_scenario(path, root, plot=plot)
    row = {"scenario": Path(path).stem, "status": STATUS[code], "exit_code": code}
    if isinstance(payload, RunResult):
        rep = payload.report
        row.update(
            scenario=payload.scenario.name,
            seed=payload.scenario.coupling_seed,
            lambda2=rep.lambda2, M=rep.M, rho=rep.rho, entry_time=rep.entry_time,
            contained=rep.contained, max_dispersion_ratio=rep.max_dispersion_ratio,
        )
    else:
        row["message"] = payload
    return row


def run_batch(directory, parallel=1, root=None, plot=False):
    """Run every ``*.ini`` scenario in ``directory``; one summary row each, sorted by name."""
    paths = sorted(Path(directory).glob("*.ini"))
    jobs = [(str(p), root, plot) for p in paths]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(_batch_row, jobs))
    else:
        rows = [_batch_row(job) for job in jobs]
    return sorted(rows, key=lambda r: r["scenario"])


def write_summary(rows, fh):
    write_table(rows, SUMMARY_COLUMNS, fh)
