"""
Viscosity sweeps: Navier-Stokes runs for a list of nu against one Euler
reference from the same omega^0, measured L2 velocity differences, their
theoretical bound f(R nu t), and the integral energy inequality

    ||w(t)||^2 <= R nu t + 2 int_0^t int |grad v'| |w|^2 dx ds,   w = v_nu - v'.
"""
import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid
from scipy.stats import linregress

import src
from src import plumbing
from src.admissibility import BetaContext, ThetaBound, parse_theta_spec, theta_envelope_scale
from src.errors import DomainError, InstabilityError, SweepAborted
from src.objects.field import ScalarField
from src.objects.record import LP_ORDERS, ConvergenceRecord
from src.osgood import RateBound, theoretical_l2_bound
from src.spectral import (
    InitialData,
    RunResult,
    SimConfig,
    Snapshot,
    biot_savart,
    initial_vorticity,
    l2_velocity_diff,
    lp_norm,
    restrict,
    run,
    velocity_gradient,
)

WORKERS_ENV = "INVISCID_WORKERS"
MONOTONE_SLACK = 0.05
FIT_POINTS = 4


@dataclass
class SweepConfig:
    base: SimConfig = field(default_factory=SimConfig)
    nu_list: List[float] = field(default_factory=lambda: list(np.geomspace(1e-2, 1e-4, 8)))
    theta: str = "iterlog:1"
    theta_scale: float = 1.0
    M: Union[str, float] = "auto"
    p0: Optional[float] = None
    R_constant: float = 1.0
    calibrations: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    control_run: bool = True
    output_dir: str = "sweep"
    workers: Optional[int] = None
    bootstrap_samples: int = 200
    perturbation_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.nu_list:
            raise DomainError("nu_list must not be empty")
        if any(nu <= 0 for nu in self.nu_list):
            raise DomainError("Every nu in the sweep must be positive")
        if any(b > a for a, b in zip(self.nu_list, self.nu_list[1:])):
            raise DomainError("nu_list must be decreasing")
        if self.M != "auto" and not float(self.M) > 0:
            raise DomainError(f"M must be positive or 'auto', got {self.M}")
        if self.R_constant < 0:
            raise DomainError("R_constant must be nonnegative")
        if self.perturbation_amplitude < 0:
            raise DomainError("perturbation_amplitude must be nonnegative")

    def theta_bound(self) -> ThetaBound:
        return parse_theta_spec(self.theta, p0=self.p0, scale=self.theta_scale)

    def worker_count(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))


class EnergyTerms(NamedTuple):
    """The parts of the energy inequality that do not depend on R."""

    times: np.ndarray
    lhs: np.ndarray
    integral: np.ndarray
    error: np.ndarray


class EnergyReport(NamedTuple):
    times: List[float]
    lhs: List[float]
    rhs: List[float]
    slack: List[float]
    error_estimate: List[float]
    min_slack: float
    satisfied: bool

    def as_dict(self) -> Dict:
        return self._asdict()


class PerturbationReport(NamedTuple):
    amplitude: float
    times: List[float]
    differences: List[float]
    growth: float

    def as_dict(self) -> Dict:
        return self._asdict()


class SweepResult(NamedTuple):
    records: List[ConvergenceRecord]
    summary: Dict


def _run_job(job: Tuple[str, SimConfig]) -> Tuple[str, SimConfig, RunResult]:
    label, cfg = job
    logger.info(f"Job {label} started")
    result = run(cfg)
    logger.info(f"Job {label} finished ({len(result.records)} records)")
    return label, cfg, result


def _jobs(cfg: SweepConfig) -> List[Tuple[str, SimConfig]]:
    base = dataclasses.replace(cfg.base, snapshot_times=None)
    jobs = [("euler", dataclasses.replace(base, nu=0.0))]
    if cfg.control_run:
        jobs.append(("control", dataclasses.replace(base, nu=0.0, N=2 * base.N)))
    jobs += [(f"ns{index}", dataclasses.replace(base, nu=nu)) for index, nu in enumerate(cfg.nu_list)]
    return jobs


def _execute(jobs, workers: int):
    """Yields (label, cfg, result) in job order; stops at the first instability."""
    if workers == 1:
        for job in jobs:
            yield _run_job(job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_job, job) for job in jobs]
        for future in futures:
            yield future.result()


def _aligned(a: Sequence[Snapshot], b: Sequence[Snapshot]):
    if len(a) != len(b) or any(abs(x.t - y.t) > 1e-12 for x, y in zip(a, b)):
        raise DomainError("Snapshot times of the two runs are not aligned")
    return list(zip(a, b))


def measured_differences(ns: Sequence[Snapshot], reference: Sequence[Snapshot]) -> List[Tuple[float, float]]:
    """(t, ||v_nu(t) - v(t)||_2) at every shared snapshot time."""
    return [(x.t, l2_velocity_diff(x.field, y.field)) for x, y in _aligned(ns, reference)]


def energy_terms(snapshots: Sequence[Snapshot], reference: Sequence[Snapshot]) -> EnergyTerms:
    """
    ||w(t)||^2 and the cumulative gradient integral at every snapshot time.

    w = v - v' where `reference` holds v'. The time integral is the cumulative
    trapezoid rule; its error is estimated by Richardson comparison with the rule
    on every other sample.
    """
    pairs = _aligned(snapshots, reference)
    times = np.array([a.t for a, _ in pairs])
    lhs, integrand = [], []
    for a, b in pairs:
        w = biot_savart(a.field - b.field)
        w_sq = w.u**2 + w.v**2
        grad_ref = velocity_gradient(biot_savart(b.field))
        lhs.append(lp_norm(w, 2) ** 2)
        integrand.append(2.0 * float(np.sum(grad_ref * w_sq)) * a.field.cell_measure)
    integrand = np.array(integrand)

    if len(times) > 1:
        integral = cumulative_trapezoid(integrand, times, initial=0.0)
    else:
        integral = np.zeros(1)
    error = np.zeros_like(integral)
    if len(times) > 2:
        coarse = cumulative_trapezoid(integrand[::2], times[::2], initial=0.0)
        even_error = np.abs(integral[::2] - coarse) / 3.0
        # odd samples take the estimate of the next even sample
        nearest = np.minimum((np.arange(len(times)) + 1) // 2, len(even_error) - 1)
        error = np.maximum.accumulate(even_error[nearest])
    return EnergyTerms(times, np.array(lhs), integral, error)


def energy_report(terms: EnergyTerms, nu: float, R: float) -> EnergyReport:
    """Slack of the inequality for one R; satisfied when slack >= -error_estimate everywhere."""
    times, error = terms.times, terms.error
    rhs = R * nu * times + terms.integral
    slack = rhs - terms.lhs
    satisfied = bool(np.all(slack >= -error - 1e-12 * np.maximum(rhs, 1.0)))
    return EnergyReport(
        times=times.tolist(),
        lhs=terms.lhs.tolist(),
        rhs=rhs.tolist(),
        slack=slack.tolist(),
        error_estimate=error.tolist(),
        min_slack=float(np.min(slack)),
        satisfied=satisfied,
    )


def check_energy_inequality(
    snapshots: Sequence[Snapshot], reference: Sequence[Snapshot], nu: float, R: float
) -> EnergyReport:
    """Evaluate both sides of the energy inequality at every snapshot time."""
    return energy_report(energy_terms(snapshots, reference), nu, R)


def perturbation_response(cfg: SimConfig, perturbation: InitialData) -> PerturbationReport:
    """
    Run `cfg` from omega^0 and from omega^0 + eta, eta built from `perturbation`,
    and measure ||v_eta(t) - v(t)||_2 at every record time. growth is the largest
    difference over the initial one.
    """
    run_cfg = dataclasses.replace(cfg, snapshot_times=None)
    omega0 = initial_vorticity(cfg.initial_data, cfg.N, cfg.box_length)
    eta = initial_vorticity(perturbation, cfg.N, cfg.box_length)
    base = run(run_cfg, omega0)
    moved = run(run_cfg, ScalarField(omega0.values + eta.values, cfg.box_length))
    diffs = measured_differences(moved.snapshots, base.snapshots)
    differences = [d for _, d in diffs]
    growth = max(differences) / differences[0] if differences[0] > 0 else 0.0
    logger.info(f"Perturbation of size {differences[0]:.3g} grew by a factor {growth:.3g}")
    return PerturbationReport(perturbation.amplitude, [t for t, _ in diffs], differences, growth)


def fit_rate_exponent(nus: Sequence[float], sups: Sequence[float]) -> Optional[float]:
    """Slope of log(sup_t measured) against log(nu); None with fewer than two usable points."""
    points = [(math.log(nu), math.log(s)) for nu, s in zip(nus, sups) if s > 0]
    if len({x for x, _ in points}) < 2:
        return None
    xs, ys = zip(*points)
    return float(linregress(xs, ys).slope)


def bootstrap_rate_exponent(
    nus: Sequence[float], curves: Sequence[Sequence[float]], samples: int, seed: int
) -> Optional[Tuple[float, float]]:
    """95% interval of the fitted exponent over resampled record times."""
    rng = np.random.default_rng(seed)
    curves = np.asarray(curves)
    if curves.ndim != 2 or curves.shape[1] < 2:
        return None
    fits = []
    for _ in range(samples):
        chosen = rng.integers(0, curves.shape[1], size=curves.shape[1])
        slope = fit_rate_exponent(nus, curves[:, chosen].max(axis=1))
        if slope is not None:
            fits.append(slope)
    if not fits:
        return None
    low, high = np.percentile(fits, [2.5, 97.5])
    return float(low), float(high)


def rate_regime(alpha_hat: Optional[float]) -> str:
    """
    Classify a fitted exponent: "linear" is O(nu) as for smooth data, "square_root"
    is the O(sqrt(nu t)) scaling of vortex patches.
    """
    if alpha_hat is None:
        return "undetermined"
    if alpha_hat >= 0.9:
        return "linear"
    if alpha_hat > 0.6:
        return "intermediate"
    if alpha_hat >= 0.4:
        return "square_root"
    return "sublinear"


def calibrate(
    records: Sequence[ConvergenceRecord],
    beta_ctx: BetaContext,
    T: float,
    enstrophy: float,
    calibrations: Sequence[float],
) -> Optional[float]:
    """Smallest C with measured^2 <= f(C ||omega^0||^2 nu t) at every record, or None."""
    for C in sorted(calibrations):
        rb = RateBound(beta_ctx, T, C * enstrophy)
        if all(r.measured_sq <= theoretical_l2_bound(rb, r.nu, r.t) for r in records):
            logger.info(f"Smallest sufficient calibration C={C:g}")
            return C
    logger.warning(f"No calibration in {list(calibrations)} bounds every record")
    return None


def _is_monotone(sups: Sequence[float]) -> bool:
    # sup differences along decreasing nu, allowing relative noise
    return all(b <= a * (1 + MONOTONE_SLACK) for a, b in zip(sups, sups[1:]))


def run_sweep(cfg: SweepConfig, persist: bool = True) -> SweepResult:
    """
    Run the Euler reference, the optional 2N control and one NS run per nu, then
    compare. An instability aborts the sweep with the records of the completed
    NS runs persisted.
    """
    omega0 = initial_vorticity(cfg.base.initial_data, cfg.base.N, cfg.base.box_length)
    enstrophy = lp_norm(omega0, 2) ** 2
    theta = cfg.theta_bound()
    jobs = _jobs(cfg)
    logger.info(f"Sweep over {len(cfg.nu_list)} viscosities, {cfg.worker_count()} worker(s)")

    results: Dict[str, Tuple[SimConfig, RunResult]] = {}
    try:
        for label, job_cfg, result in _execute(jobs, cfg.worker_count()):
            results[label] = (job_cfg, result)
    except InstabilityError as error:
        logger.error(f"Sweep aborted: {error}")
        if "euler" not in results:
            raise SweepAborted(f"Euler reference failed: {error}", []) from error
        partial = _compare(cfg, results, enstrophy, theta)[0]
        if persist:
            emit_report(partial, {"aborted": True, "reason": str(error)}, "csv", cfg.output_dir)
        raise SweepAborted(str(error), partial) from error

    records, summary = _compare(cfg, results, enstrophy, theta)
    summary["perturbation"] = None
    if cfg.perturbation_amplitude > 0:
        euler_cfg, _ = results["euler"]
        eta = InitialData("modes", amplitude=cfg.perturbation_amplitude, seed=cfg.seed + 1)
        summary["perturbation"] = perturbation_response(euler_cfg, eta).as_dict()
    if persist:
        for fmt in ("csv", "json", "plot"):
            emit_report(records, summary, fmt, cfg.output_dir)
    return SweepResult(records, summary)


def _compare(cfg: SweepConfig, results, enstrophy: float, theta: ThetaBound):
    _, euler = results["euler"]
    ns_runs = [(index, nu) for index, nu in enumerate(cfg.nu_list) if f"ns{index}" in results]

    if cfg.M == "auto":
        peaks = [max(r.max_vel for r in results[f"ns{i}"][1].records) for i, _ in ns_runs]
        peak = max(peaks, default=0.0)
        M = (peak + max(r.max_vel for r in euler.records)) ** 2
    else:
        M = float(cfg.M)
    M = max(M, 1e-300)
    beta_ctx = BetaContext(M, theta)
    rb = RateBound(beta_ctx, cfg.base.T, cfg.R_constant * enstrophy)

    records: List[ConvergenceRecord] = []
    curves, energy = [], []
    for index, nu in ns_runs:
        _, result = results[f"ns{index}"]
        diffs = measured_differences(result.snapshots, euler.snapshots)
        for t, measured in diffs:
            records.append(ConvergenceRecord(nu, t, measured, theoretical_l2_bound(rb, nu, t)))
        curves.append([m for _, m in diffs])
        terms = energy_terms(result.snapshots, euler.snapshots)
        for C in sorted(set(cfg.calibrations) | {cfg.R_constant}):
            report = energy_report(terms, nu, C * enstrophy)
            energy.append(
                {
                    "nu": nu,
                    "C": C,
                    "min_slack": report.min_slack,
                    "satisfied": report.satisfied,
                    "max_error_estimate": max(report.error_estimate),
                }
            )
    records.sort(key=lambda r: (r.nu, r.t))

    nus = [nu for _, nu in ns_runs]
    sups = [max(curve) for curve in curves]
    fit_nus, fit_curves = nus[-FIT_POINTS:], curves[-FIT_POINTS:]
    alpha_hat = fit_rate_exponent(fit_nus, [max(c) for c in fit_curves])
    alpha_ci = None
    if curves:
        alpha_ci = bootstrap_rate_exponent(fit_nus, fit_curves, cfg.bootstrap_samples, cfg.seed)

    bound_flags = []
    for nu in sorted(set(nus), reverse=True):
        ratios = [r.ratio for r in records if r.nu == nu]
        bound_flags.append({"nu": nu, "sup_ratio": max(ratios), "satisfied": max(ratios) <= 1.0})

    discretization_error = None
    if "control" in results:
        _, control = results["control"]
        discretization_error = max(
            l2_velocity_diff(restrict(c.field, cfg.base.N), e.field)
            for c, e in _aligned(control.snapshots, euler.snapshots)
        )

    lp_omega0 = {p: lp_norm(euler.snapshots[0].field, p) for p in LP_ORDERS}
    summary = {
        "alpha_hat": alpha_hat,
        "alpha_ci": list(alpha_ci) if alpha_ci else None,
        "rate_regime": rate_regime(alpha_hat),
        "sup_diffs": [{"nu": nu, "sup_measured": s} for nu, s in zip(nus, sups)],
        "monotone": _is_monotone(sups),
        "bound_flags": bound_flags,
        "bound_satisfied": all(flag["satisfied"] for flag in bound_flags),
        "smallest_sufficient_C": calibrate(records, beta_ctx, cfg.base.T, enstrophy, cfg.calibrations)
        if records
        else None,
        "energy_inequality": energy,
        "discretization_error": discretization_error,
        "M": M,
        "R": rb.R,
        "theta_envelope_scale": theta_envelope_scale(lp_omega0, theta),
        "config": config_echo(cfg),
        "version": src.__version__,
    }
    return records, summary


def config_echo(cfg: SweepConfig) -> Dict:
    echo = dataclasses.asdict(cfg)
    echo["nu_list"] = [float(nu) for nu in cfg.nu_list]
    return echo


REPORT_FORMATS = ("csv", "json", "plot")


def emit_report(records: Sequence[ConvergenceRecord], summary: Dict, fmt: str, output_dir: str) -> List[str]:
    """
    csv: records.csv; json: summary.json; plot: whitespace-separated .dat files,
    one per curve (measured and bound against nu, measured against t per nu).
    """
    if fmt not in REPORT_FORMATS:
        raise DomainError(f"Unknown report format '{fmt}'")
    os.makedirs(output_dir, exist_ok=True)
    if fmt == "csv":
        return [plumbing.write_records(os.path.join(output_dir, "records.csv"), records)]
    if fmt == "json":
        return [plumbing.write_json(os.path.join(output_dir, "summary.json"), summary)]

    nus = sorted({r.nu for r in records}, reverse=True)
    by_nu = {nu: [r for r in records if r.nu == nu] for nu in nus}
    paths = [
        plumbing.write_plot_data(
            os.path.join(output_dir, "measured_vs_nu.dat"),
            ["nu", "sup_measured"],
            [(nu, max(r.measured for r in by_nu[nu])) for nu in nus],
        ),
        plumbing.write_plot_data(
            os.path.join(output_dir, "bound_vs_nu.dat"),
            ["nu", "sup_bound", "sup_measured_sq"],
            [(nu, max(r.bound for r in by_nu[nu]), max(r.measured_sq for r in by_nu[nu])) for nu in nus],
        ),
    ]
    for index, nu in enumerate(nus):
        paths.append(
            plumbing.write_plot_data(
                os.path.join(output_dir, f"measured_vs_t_{index}.dat"),
                ["t", "measured", "measured_sq", "bound"],
                [(r.t, r.measured, r.measured_sq, r.bound) for r in by_nu[nu]],
                comment=f"nu={plumbing.format_float(nu)}",
            )
        )
    return paths
