import os
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src import plumbing
from src.admissibility import (
    BetaContext,
    CutoffSequence,
    check_admissible,
    check_sufficient_condition,
    eval_beta,
    eval_beta_eps,
    eval_psi,
    parse_theta_spec,
)
from src.errors import DomainError
from src.harness import emit_report, run_sweep
from src.objects.record import ConvergenceRecord
from src.osgood import RateBound, theoretical_l2_bound
from src.spectral import calderon_zygmund_ratio, run
from src.workspace import Workspace, sim_config_dict, sim_config_from_file, sweep_config_from_file


def beta_eval(M: float, theta: str, p0: Optional[float], x: float, eps: Optional[float] = None) -> Dict:
    """
    Evaluate the interpolation modulus beta(x) = inf over eps of M^eps x^(1-eps) phi(1/eps).

    With `eps`, beta_eps(x) at that single eps is reported next to the infimum.
    """
    ctx = BetaContext(M, parse_theta_spec(theta, p0=p0))
    result = {"M": M, "theta": theta, "p0": ctx.p0, "x": x, "beta": eval_beta(ctx, x)}
    if eps is not None:
        result["eps"] = eps
        result["beta_eps"] = eval_beta_eps(ctx, eps, x)
    return result


def psi_eval(theta: str, p0: Optional[float], x: float) -> Dict:
    """psi(x) = inf over eps of (x^eps / eps) theta(1/eps), for x >= 1."""
    bound = parse_theta_spec(theta, p0=p0)
    return {"theta": theta, "p0": bound.p0, "x": x, "psi": eval_psi(bound, x)}


def admissible_check(
    theta: str, p0: Optional[float], M: float = 1.0, decades: int = 12, growth_threshold=0.05
) -> Dict:
    """
    Numerical admissibility test of a growth profile.

    The integral of ds / beta(s) is computed down to 10^-(decades + 1) and its tail is
    examined under condensation. The verdict is a heuristic, never a proof.
    """
    cutoffs = CutoffSequence(delta0=0.1, ratio=0.1, count=decades + 1)
    ctx = BetaContext(M, parse_theta_spec(theta, p0=p0))
    verdict = check_admissible(ctx, cutoffs, growth_threshold)
    return {"theta": theta, "p0": ctx.p0, "M": M, **verdict.as_dict()}


def sufficient_check(theta: str, p0: Optional[float], growth_threshold=0.05) -> Dict:
    """Does the integral of dp / (p theta(p)) over [p0, oo) diverge?"""
    bound = parse_theta_spec(theta, p0=p0)
    verdict = check_sufficient_condition(bound, growth_threshold)
    return {"theta": theta, "p0": bound.p0, **verdict.as_dict()}


def _rate_bound(theta: str, M: float, p0: Optional[float], T: float, R: float) -> RateBound:
    return RateBound(BetaContext(M, parse_theta_spec(theta, p0=p0)), T, R)


def rate_bound(
    theta: str, M: float, p0: Optional[float], T: float, R: float, nu: float, t: Optional[float] = None
) -> Dict:
    """
    The bound f(R nu t) on the squared L2 distance between the viscous and the
    inviscid velocity at time t (default T).
    """
    t = T if t is None else t
    rb = _rate_bound(theta, M, p0, T, R)
    return {"nu": nu, "t": t, "bound": theoretical_l2_bound(rb, nu, t)}


def rate_table(
    theta: str,
    M: float,
    p0: Optional[float],
    T: float,
    R: float,
    nu_list: Sequence[float],
    times: Optional[Sequence[float]] = None,
) -> List[Tuple[float, float, float]]:
    """Bounds f(R nu t) for every nu and every t; times default to T/10, 2T/10, ..., T."""
    if not nu_list:
        raise DomainError("nu_list must not be empty")
    times = list(times) if times else [float(t) for t in np.linspace(T / 10, T, 10)]
    rb = _rate_bound(theta, M, p0, T, R)
    return [(nu, t, theoretical_l2_bound(rb, nu, t)) for nu in nu_list for t in times]


def sim_run(config_path: str, output_dir: str = "run", label: str = "run") -> Dict:
    """
    Run one simulation from a config file and persist its diagnostics and snapshots
    under `output_dir`.
    """
    cfg = sim_config_from_file(config_path)
    result = run(cfg)
    workspace = Workspace(output_dir)
    workspace.create_dir()
    paths = plumbing.write_run(workspace.root, label, result.records, result.snapshots)
    plumbing.write_json(workspace.build_path(f"{label}_config.json"), sim_config_dict(cfg))
    logger.info(f"Run written to {workspace.root}")
    first, last = result.records[0], result.records[-1]
    return {
        "N": cfg.N,
        "nu": cfg.nu,
        "T": cfg.T,
        "records": len(result.records),
        "snapshots": len(result.snapshots),
        "energy": [first.energy, last.energy],
        "max_vel": [first.max_vel, last.max_vel],
        "calderon_zygmund_ratio": calderon_zygmund_ratio(result.records),
        "diagnostics": paths[0],
    }


def sweep_run(config_path: str, output_dir: Optional[str] = None) -> Dict:
    """
    Run a viscosity sweep from a config file. Records, the summary and plot data are
    written to the sweep's output directory; the summary is returned.
    """
    cfg = sweep_config_from_file(config_path, output_dir)
    _, summary = run_sweep(cfg)
    keys = ("alpha_hat", "alpha_ci", "monotone", "bound_satisfied", "smallest_sufficient_C", "M", "R")
    return {"output_dir": cfg.output_dir, **{key: summary[key] for key in keys}}


def sweep_report(directory: str, fmt: str, output_dir: Optional[str] = None):
    """
    Re-emit a finished sweep in one format.

    Returns the CSV text, the summary dict or the list of plot files written.
    """
    workspace = Workspace(directory)
    records_path = workspace.build_path("records.csv")
    summary_path = workspace.build_path("summary.json")
    if not os.path.exists(records_path):
        raise DomainError(f"No sweep records in {directory}")
    records = plumbing.read_records(records_path, ConvergenceRecord)
    summary = plumbing.read_json(summary_path) if os.path.exists(summary_path) else {}
    paths = emit_report(records, summary, fmt, output_dir or directory)
    if fmt == "csv":
        with open(paths[0]) as file:
            return file.read()
    if fmt == "json":
        return summary
    return paths
