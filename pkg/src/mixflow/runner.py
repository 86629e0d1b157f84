"""Orchestration: turn a RunConfig into trajectories, audits and files."""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import euler, lagrange
from .config import RunConfig, make_initial
from .estimates import EstimateReport, attach_time_fields, build_report, record_maker
from .field import EULERIAN, LAGRANGIAN, Grid1D, State, Trajectory, total_mass
from .io import render_report_plots, save_report, save_trajectory
from .model import DerivedMatrices, derive_matrices


@dataclass
class RunResult:
    config: RunConfig
    derived: DerivedMatrices
    initial: State
    dval: float
    eulerian: Trajectory | None
    lagrangian: Trajectory | None
    report: EstimateReport


def execute(rc: RunConfig, progress=None) -> RunResult:
    """Run the configured problem in the requested frame(s) and audit it.

    ``frame = "both"`` runs the Eulerian problem and its mass-coordinate twin
    started from the transformed initial data.
    """
    grid = Grid1D(domain_length=1.0, n_cells=rc.n_cells)
    initial = make_initial(rc.initial, grid)
    derived = derive_matrices(rc.params)
    rec = record_maker(rc.params, derived)
    dval = total_mass(initial)

    traj_e = None
    traj_l = None
    if rc.frame in (EULERIAN, "both"):
        if progress:
            progress(f"running eulerian solver to t = {rc.t_end}")
        traj_e = euler.run(
            initial, rc.params, derived, rc.scheme, rc.t_end,
            snapshot_every=rc.snapshot_every, make_record=rec,
        )
        if len(traj_e) >= 2:
            attach_time_fields(traj_e, rc.params, derived)
    if rc.frame in (LAGRANGIAN, "both"):
        if progress:
            progress(f"running lagrangian solver to t = {rc.t_end}")
        init_l = lagrange.euler_to_lagrange(initial)
        traj_l = lagrange.run_lagrangian(
            init_l, rc.params, derived, rc.scheme, rc.t_end,
            snapshot_every=rc.snapshot_every, make_record=rec,
        )
        if len(traj_l) >= 2:
            attach_time_fields(traj_l, rc.params, derived)

    report = build_report(
        rc.params, derived, eulerian=traj_e, lagrangian=traj_l,
        audits=rc.audit_set, dval=dval,
    )
    return RunResult(
        config=rc, derived=derived, initial=initial, dval=dval,
        eulerian=traj_e, lagrangian=traj_l, report=report,
    )


def save_result(result: RunResult, out_dir: str, plots: bool = False) -> list[str]:
    """Write trajectory directories plus report.json under ``out_dir``."""
    rc = result.config
    os.makedirs(out_dir, exist_ok=True)
    written = []
    single = (result.eulerian is None) != (result.lagrangian is None)
    for traj in (result.eulerian, result.lagrangian):
        if traj is None:
            continue
        sub = out_dir if single else os.path.join(out_dir, traj.frame)
        save_trajectory(sub, traj, rc.params, rc.scheme)
        written.append(sub)
        if plots:
            render_report_plots(sub, traj)
    save_report(os.path.join(out_dir, "report.json"), result.report)
    written.append(os.path.join(out_dir, "report.json"))
    return written
