"""
Yudovich admissibility calculus.

For a growth profile theta on [p0, oo) and phi(p) = p theta(p):

    beta_eps(x) = M^eps x^(1 - eps) phi(1/eps)
    beta(x)     = inf { beta_eps(x) : eps in (0, 1/p0] }
    psi(x)      = inf { (x^eps / eps) theta(1/eps) : eps in (0, 1/p0] }

theta is admissible when the integral of ds / beta(s) over (0, 1] diverges.
Infima are found on a logarithmic eps grid refined by golden-section search.
"""
import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.interpolate import PchipInterpolator

from src.algorithms import (
    condensation_ratios,
    golden_section_minimize,
    integrate_geometric,
)
from src.errors import DomainError


class ThetaKind(enum.Enum):
    CONSTANT = "const"
    ITERATED_LOG = "iterlog"
    POWER_LAW = "pow"
    TABULATED = "table"


class ThetaBound:
    """
    A vorticity growth profile p -> C * theta(p) on [p0, oo).

    Families: Constant (theta = 1), IteratedLog(m) (ln p * ln ln p * ... * ln^m p),
    PowerLaw(a) (p^a) and Tabulated (monotone cubic through (p, theta) samples).
    """

    def __init__(self, kind, p0, scale=1.0, m=0, exponent=1.0, samples=None):
        self.kind = ThetaKind(kind)
        self.p0 = float(p0)
        self.scale = float(scale)
        self.m = int(m)
        self.exponent = float(exponent)
        self.samples = None
        self._interpolator = None

        if not self.p0 > 1:
            raise DomainError(f"p0 must exceed 1, got {self.p0}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        if self.kind is ThetaKind.ITERATED_LOG:
            if self.m < 0:
                raise DomainError(f"IteratedLog order must be nonnegative, got {self.m}")
            # Every factor ln^j p must be positive at p0.
            value = self.p0
            for j in range(1, self.m + 1):
                value = math.log(value) if value > 0 else -math.inf
                if not value > 0:
                    raise DomainError(
                        f"p0={self.p0} too small for IteratedLog({self.m}): ln^{j} p0 <= 0"
                    )
        if self.kind is ThetaKind.POWER_LAW and not self.exponent > 0:
            raise DomainError(f"PowerLaw exponent must be positive, got {self.exponent}")
        if self.kind is ThetaKind.TABULATED:
            self._set_samples(samples)

    def _set_samples(self, samples):
        if not samples or len(samples) < 2:
            raise DomainError("Tabulated theta needs at least two samples")
        ps = np.array([float(p) for p, _ in samples])
        values = np.array([float(v) for _, v in samples])
        if np.any(np.diff(ps) <= 0):
            raise DomainError("Tabulated theta samples must be strictly increasing in p")
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise DomainError("Tabulated theta values must be positive and finite")
        if self.p0 < ps[0]:
            raise DomainError(f"p0={self.p0} lies before the first sample p={ps[0]}")
        self.samples = list(zip(ps.tolist(), values.tolist()))
        self._interpolator = PchipInterpolator(ps, values, extrapolate=False)

    @classmethod
    def constant(cls, p0=2.0, scale=1.0):
        return cls(ThetaKind.CONSTANT, p0, scale=scale)

    @classmethod
    def iterated_log(cls, m, p0=None, scale=1.0):
        return cls(ThetaKind.ITERATED_LOG, p0 or minimal_iterated_log_p0(m), scale=scale, m=m)

    @classmethod
    def power_law(cls, exponent, p0=2.0, scale=1.0):
        return cls(ThetaKind.POWER_LAW, p0, scale=scale, exponent=exponent)

    @classmethod
    def tabulated(cls, samples, p0=None, scale=1.0):
        p0 = samples[0][0] if p0 is None else p0
        return cls(ThetaKind.TABULATED, p0, scale=scale, samples=samples)

    @property
    def p_max(self) -> float:
        if self.kind is ThetaKind.TABULATED:
            return self.samples[-1][0]
        return math.inf

    def log_theta(self, log_p, shift=0.0):
        """
        ln(C theta(p)) at ln p = log_p + shift, for arrays.

        The split into `log_p` and `shift` keeps PowerLaw exact when log_p is huge.
        """
        log_p = np.asarray(log_p, dtype=float)
        shift = np.asarray(shift, dtype=float)
        base = math.log(self.scale)
        if self.kind is ThetaKind.CONSTANT:
            return base + np.zeros(np.broadcast(log_p, shift).shape)
        if self.kind is ThetaKind.POWER_LAW:
            return base + self.exponent * log_p + self.exponent * shift
        if self.kind is ThetaKind.ITERATED_LOG:
            factor = log_p + shift
            total = base + np.zeros(np.broadcast(log_p, shift).shape)
            with np.errstate(divide="ignore", invalid="ignore"):
                for _ in range(self.m):
                    total = total + np.log(factor)
                    factor = np.log(factor)
            return total
        p = np.exp(log_p + shift)
        return base + np.log(self._tabulated(p))

    def _tabulated(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p > self.p_max * (1 + 1e-12)):
            raise DomainError(
                f"Tabulated theta evaluated at p={float(np.max(p)):.6g} beyond last sample {self.p_max}"
            )
        # exp(ln p) may land a rounding error outside the sampled range
        return self._interpolator(np.clip(p, self.samples[0][0], self.p_max))

    def evaluate(self, p):
        """C theta(p) for scalars or arrays; p < p0 is a domain error."""
        p_arr = np.asarray(p, dtype=float)
        if np.any(p_arr < self.p0):
            raise DomainError(f"theta evaluated below p0={self.p0}")
        if self.kind is ThetaKind.TABULATED:
            values = self.scale * self._tabulated(p_arr)
        else:
            values = np.exp(self.log_theta(np.log(p_arr)))
        return float(values) if np.ndim(values) == 0 else values

    def describe(self) -> str:
        if self.kind is ThetaKind.ITERATED_LOG:
            family = f"iterlog:{self.m}"
        elif self.kind is ThetaKind.POWER_LAW:
            family = f"pow:{self.exponent:g}"
        elif self.kind is ThetaKind.TABULATED:
            family = f"table:{len(self.samples)} samples"
        else:
            family = "const"
        return f"{family} scale={self.scale:g} p0={self.p0:g}"


def minimal_iterated_log_p0(m) -> float:
    """Smallest integer p0 >= 2 with every factor of theta_m positive: 2, 2, 3, 16, ... for m = 0, 1, 2, 3."""
    # ln^m p > 0 exactly when p exceeds exp applied m - 1 times to 1
    threshold = 1.0
    for _ in range(max(m - 1, 0)):
        threshold = math.exp(threshold)
    return max(2.0, float(math.floor(threshold) + 1))


def eval_theta(theta: ThetaBound, p):
    return theta.evaluate(p)


def parse_theta_spec(spec: str, p0: Optional[float] = None, scale: float = 1.0) -> ThetaBound:
    """
    Parse the command-line theta notation: const:C, iterlog:m, pow:a, table:PATH.

    Without p0 each family picks its own: 2 for const and pow, the smallest valid
    integer for iterlog, the first sample for table.

    For `table:PATH`, PATH is a CSV with a header row and two columns p,theta.
    """
    family, _, arg = spec.partition(":")
    family = family.strip().lower()
    try:
        if family == "const":
            return ThetaBound.constant(p0=p0 or 2.0, scale=scale * (float(arg) if arg else 1.0))
        if family == "iterlog":
            return ThetaBound.iterated_log(int(arg or 0), p0=p0, scale=scale)
        if family == "pow":
            return ThetaBound.power_law(float(arg or 1.0), p0=p0 or 2.0, scale=scale)
    except DomainError:
        raise
    except ValueError as error:
        raise DomainError(f"Bad theta parameter in '{spec}': {error}") from error
    if family == "table":
        return ThetaBound.tabulated(read_theta_table(arg), p0=p0, scale=scale)
    raise DomainError(f"Unknown theta family '{family}' in '{spec}'")


def read_theta_table(path) -> List[Tuple[float, float]]:
    try:
        with open(path, newline="") as file:
            reader = csv.reader(file)
            header = next(reader, None)
            if header is None or len(header) < 2:
                raise DomainError(f"{path}: expected a header row 'p,theta'")
            return [(float(row[0]), float(row[1])) for row in reader if row]
    except DomainError:
        raise
    except OSError as error:
        raise DomainError(f"Cannot read theta table: {error}") from error
    except (ValueError, IndexError) as error:
        raise DomainError(f"{path}: rows must be two numbers p,theta ({error})") from error


@dataclass(frozen=True)
class EpsSearch:
    grid_points_per_decade: int = 40
    eps_min: float = 1e-8
    refinement_tolerance: float = 1e-8


@dataclass(frozen=True)
class BetaContext:
    """The triple (M, phi, p0) of beta_eps / beta, with phi(p) = p theta(p)."""

    M: float
    theta: ThetaBound
    eps_search: EpsSearch = field(default_factory=EpsSearch)

    def __post_init__(self):
        if not self.M > 0:
            raise DomainError(f"M must be positive, got {self.M}")
        if not self.eps_search.eps_min < 1.0 / self.p0:
            raise DomainError(
                f"eps_min={self.eps_search.eps_min} must be below 1/p0={1.0 / self.p0}"
            )

    @property
    def p0(self) -> float:
        return self.theta.p0

    @property
    def eps_max(self) -> float:
        return 1.0 / self.p0

    def __call__(self, x):
        return eval_beta(self, x)


def _eps_grid(search: EpsSearch, p0: float, p_max=math.inf) -> np.ndarray:
    """ln(eps) grid over [max(eps_min, 1/p_max), 1/p0], endpoints included."""
    lo = math.log(max(search.eps_min, 1.0 / p_max))
    hi = math.log(1.0 / p0)
    decades = (hi - lo) / math.log(10.0)
    count = max(int(math.ceil(decades * search.grid_points_per_decade)), 2) + 1
    return np.linspace(lo, hi, count)


def _minimize_log_objective(objective, log_eps, search: EpsSearch, shape):
    """
    Minimize objective(ln eps) for a batch of points.

    `objective` maps an array of ln(eps) broadcast against the batch shape (batch
    axis first) to log-values. A grid scan picks the best grid cell, golden-section
    search refines inside the neighbouring cells.
    """
    grid = log_eps.reshape((1,) * len(shape) + (-1,))
    values = objective(grid)
    best = np.argmin(values, axis=-1)
    grid_min = np.take_along_axis(values, best[..., None], axis=-1)[..., 0]
    lo = log_eps[np.maximum(best - 1, 0)]
    hi = log_eps[np.minimum(best + 1, len(log_eps) - 1)]
    _, refined = golden_section_minimize(
        lambda e: objective(e[..., None])[..., 0],
        lo,
        hi,
        rtol=search.refinement_tolerance,
    )
    return np.minimum(grid_min, refined)


def _log_beta_eps(ctx: BetaContext, log_eps, log_x):
    eps = np.exp(log_eps)
    return (
        eps * math.log(ctx.M)
        + (1.0 - eps) * log_x
        - log_eps
        + ctx.theta.log_theta(-log_eps)
    )


def eval_beta_eps(ctx: BetaContext, eps, x):
    """beta_eps(x) = M^eps x^(1 - eps) phi(1/eps)."""
    eps_arr = np.asarray(eps, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(eps_arr <= 0) or np.any(eps_arr > ctx.eps_max * (1 + 1e-12)):
        raise DomainError(f"eps must lie in (0, 1/p0] = (0, {ctx.eps_max:.6g}]")
    if np.any(x_arr <= 0):
        raise DomainError("beta_eps is defined for x > 0")
    if np.any(1.0 / eps_arr > ctx.theta.p_max):
        raise DomainError("eps too small for the tabulated theta range")
    values = np.exp(_log_beta_eps(ctx, np.log(eps_arr), np.log(x_arr)))
    return float(values) if np.ndim(values) == 0 else values


def eval_beta(ctx: BetaContext, x):
    """
    beta(x) = inf over eps in (0, 1/p0] of beta_eps(x).

    Works on scalars and arrays. The result never exceeds beta_eps at any grid eps.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise DomainError("beta is defined for x > 0")
    log_x = np.log(np.atleast_1d(x_arr))[:, None]
    log_eps = _eps_grid(ctx.eps_search, ctx.p0, ctx.theta.p_max)
    log_values = _minimize_log_objective(
        lambda e: _log_beta_eps(ctx, e, log_x),
        log_eps,
        ctx.eps_search,
        (log_x.shape[0],),
    )
    values = np.exp(log_values)
    return float(values[0]) if x_arr.ndim == 0 else values.reshape(x_arr.shape)


def _log_psi_objective(theta: ThetaBound, log_eps, log_x):
    return np.exp(log_eps) * log_x - log_eps + theta.log_theta(-log_eps)


def eval_psi(theta: ThetaBound, x, eps_search: Optional[EpsSearch] = None):
    """psi(x) = inf over eps in (0, 1/p0] of (x^eps / eps) theta(1/eps), for x >= 1."""
    search = eps_search or EpsSearch()
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 1):
        raise DomainError("psi is defined for x >= 1")
    log_x = np.log(np.atleast_1d(x_arr))[:, None]
    log_eps = _eps_grid(search, theta.p0, theta.p_max)
    log_values = _minimize_log_objective(
        lambda e: _log_psi_objective(theta, e, log_x),
        log_eps,
        search,
        (log_x.shape[0],),
    )
    values = np.exp(log_values)
    return float(values[0]) if x_arr.ndim == 0 else values.reshape(x_arr.shape)


def yudovich_beta_bound(theta: ThetaBound, x):
    """
    e x ln(1/x) theta(ln(1/x)), the bound on beta (M = 1) from the choice
    eps = 1/ln(1/x); valid for x <= exp(-p0).
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0) or np.any(-np.log(x_arr) < theta.p0):
        raise DomainError(f"Bound holds for 0 < x <= exp(-p0) = {math.exp(-theta.p0):.6g}")
    log_inv = -np.log(x_arr)
    values = math.e * x_arr * log_inv * theta.evaluate(log_inv)
    return float(values) if np.ndim(values) == 0 else values


class Verdict(enum.Enum):
    DIVERGENT = "NumericallyDivergent"
    CONVERGENT = "NumericallyConvergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CutoffSequence:
    """delta_k = delta0 * ratio^k for k = 0..count-1."""

    delta0: float = 0.1
    ratio: float = 0.1
    count: int = 13

    def __post_init__(self):
        if not (0 < self.ratio < 1) or not self.delta0 > 0:
            raise DomainError("Cutoffs need delta0 > 0 and 0 < ratio < 1")
        if self.decades < 6:
            raise DomainError(f"Cutoffs must span at least 6 decades, got {self.decades:.3g}")

    @property
    def decades(self) -> float:
        return (self.count - 1) * -math.log10(self.ratio)

    def values(self) -> List[float]:
        return [self.delta0 * self.ratio**k for k in range(self.count)]


@dataclass(frozen=True)
class TailWindows:
    """Consecutive windows of width `width` in y = ln ln(M/s) on which condensation ratios are measured."""

    start: float = 40.0
    width: float = 5.0
    count: int = 3

    def edges(self) -> List[float]:
        return [self.start + j * self.width for j in range(self.count + 1)]


@dataclass
class AdmissibilityVerdict:
    """
    Outcome of a numerical admissibility test. A heuristic on finitely many partial
    integrals: it never proves divergence or convergence.
    """

    verdict: Verdict
    partial_integrals: List[Tuple[float, float]]
    growth_per_decade: float
    condensation_ratios: List[float] = field(default_factory=list)
    note: str = "numerical heuristic, not a proof"

    def as_dict(self) -> Dict:
        return {
            "verdict": self.verdict.value,
            "partial_integrals": [[d, v] for d, v in self.partial_integrals],
            "growth_per_decade": self.growth_per_decade,
            "condensation_ratios": list(self.condensation_ratios),
            "note": self.note,
        }


def classify_ratios(ratios: Sequence[float], growth_threshold: float) -> Verdict:
    """
    Divergent when every window keeps growing under condensation (ratio >= 1 + tau);
    convergent when every ratio is <= 1 - tau and the ratios do not increase.
    """
    if all(r >= 1.0 + growth_threshold for r in ratios):
        return Verdict.DIVERGENT
    decaying = all(b <= a * (1 + 1e-9) + 1e-300 for a, b in zip(ratios, ratios[1:]))
    if all(r <= 1.0 - growth_threshold for r in ratios) and decaying:
        return Verdict.CONVERGENT
    return Verdict.INCONCLUSIVE


def log_psi_excess(theta: ThetaBound, L, mu_span=40.0, search: Optional[EpsSearch] = None):
    """
    K(L) = ln psi(exp(exp(L))) - L, computed without forming exp(exp(L)).

    With ln p = L + mu the objective is mu + exp(-mu) + ln theta(e^(L + mu)), minimized
    over mu >= ln p0 - L. This reaches tails far beyond floating-point cutoffs.
    """
    search = search or EpsSearch()
    L = np.atleast_1d(np.asarray(L, dtype=float))
    lo = np.maximum(math.log(theta.p0) - L, -mu_span)
    hi = np.full_like(L, mu_span)
    steps = np.linspace(0.0, 1.0, 8 * int(mu_span) + 1)
    grid = lo[:, None] + (hi - lo)[:, None] * steps[None, :]

    def objective(mu, L_b):
        return mu + np.exp(-mu) + theta.log_theta(L_b, mu)

    values = objective(grid, L[:, None])
    best = np.argmin(values, axis=-1)
    grid_min = values[np.arange(len(L)), best]
    b_lo = grid[np.arange(len(L)), np.maximum(best - 1, 0)]
    b_hi = grid[np.arange(len(L)), np.minimum(best + 1, grid.shape[1] - 1)]
    _, refined = golden_section_minimize(
        lambda mu: objective(mu, L), b_lo, b_hi, rtol=search.refinement_tolerance
    )
    return np.minimum(grid_min, refined)


def tail_condensation_ratios(theta: ThetaBound, windows: Optional[TailWindows] = None):
    """
    Condensation ratios of the admissibility integral in y = ln ln(M/s).

    There ds / beta(s) = exp(-K(y)) dy, independent of M, and the condensed integrand
    is exp(x - K(e^x)).
    """
    windows = windows or TailWindows()
    return condensation_ratios(
        lambda y: np.exp(-log_psi_excess(theta, y)),
        windows.edges(),
        condensed=lambda x: np.exp(x - log_psi_excess(theta, np.exp(x))),
    )


def _partial_integrals(ctx: BetaContext, cutoffs: Sequence[float], rtol=1e-9):
    """I_k = integral over [delta_k, 1] of ds / beta(s), accumulated segment by segment."""
    integrand = lambda s: 1.0 / eval_beta(ctx, s)
    partials = []
    total = 0.0
    upper = 1.0
    for delta in cutoffs:
        if delta < upper:
            total += integrate_geometric(integrand, delta, upper, rtol=rtol)
        elif delta > upper:
            total -= integrate_geometric(integrand, upper, delta, rtol=rtol)
        partials.append((delta, total))
        upper = delta
    return partials


def check_admissible(
    ctx: BetaContext,
    cutoffs: Optional[CutoffSequence] = None,
    growth_threshold: float = 0.05,
    windows: Optional[TailWindows] = None,
) -> AdmissibilityVerdict:
    """
    Numerically test admissibility: does the integral of ds / beta(s)
    over (0, 1] diverge?

    Partial integrals are computed down the cutoff sequence; the verdict comes from
    condensation ratios of the same integral far in the tail.
    """
    cutoffs = cutoffs or CutoffSequence()
    deltas = cutoffs.values()
    partials = _partial_integrals(ctx, deltas)

    per_decade = -math.log10(cutoffs.ratio)
    last = partials[-4:]
    increments = [(b[1] - a[1]) / per_decade for a, b in zip(last, last[1:])]
    growth = float(np.mean(increments))

    try:
        ratios = tail_condensation_ratios(ctx.theta, windows)
        verdict = classify_ratios(ratios, growth_threshold)
    except DomainError as error:
        # A tabulated profile cannot be evaluated in the far tail.
        logger.warning(f"Tail test unavailable for {ctx.theta.describe()}: {error}")
        ratios, verdict = [], Verdict.INCONCLUSIVE

    logger.info(f"Admissibility of {ctx.theta.describe()} (M={ctx.M:g}): {verdict.value}")
    return AdmissibilityVerdict(verdict, partials, growth, ratios)


def check_sufficient_condition(
    theta: ThetaBound,
    growth_threshold: float = 0.05,
    windows: Optional[TailWindows] = None,
) -> AdmissibilityVerdict:
    """
    The simpler sufficient criterion: the integral of dp / (p theta(p)) over
    [p0, oo) diverges.

    In y = ln ln p the integrand is exp(y - ln theta(e^(e^y))).
    """
    windows = windows or TailWindows(start=3.0, width=1.0)
    g = lambda y: np.exp(y - theta.log_theta(np.exp(y)))
    try:
        ratios = condensation_ratios(
            g,
            windows.edges(),
            condensed=lambda x: np.exp(x + np.exp(x) - theta.log_theta(np.exp(np.exp(x)))),
        )
        verdict = classify_ratios(ratios, growth_threshold)
    except DomainError as error:
        logger.warning(f"Sufficient-condition test unavailable: {error}")
        ratios, verdict = [], Verdict.INCONCLUSIVE

    # Partial integrals in p over decades of p, for reporting.
    partials = []
    total = 0.0
    lower = theta.p0
    for k in range(1, 7):
        upper = min(theta.p0 * 10.0**k, theta.p_max)
        if upper > lower:
            total += integrate_geometric(
                lambda p: 1.0 / (p * theta.evaluate(p)), lower, upper
            )
        partials.append((upper, total))
        lower = upper
    growth = partials[-1][1] - partials[-2][1]
    return AdmissibilityVerdict(verdict, partials, growth, ratios)


def theta_envelope_scale(lp_norms: Mapping[float, float], theta: ThetaBound) -> float:
    """Smallest C with norm_p <= C theta(p) on every sampled p >= p0."""
    ratios = [
        norm / theta.evaluate(p) for p, norm in lp_norms.items() if p >= theta.p0
    ]
    if not ratios:
        raise DomainError(f"No sampled p at or above p0={theta.p0}")
    return max(ratios)


def check_holder_chain(
    f, g, eps_values: Sequence[float], cell_measure: float = 1.0, M: Optional[float] = None
) -> Tuple[bool, float]:
    """
    Check, on samples with a common cell measure, the chain

        sum f g <= M^eps sum f^(1-eps) g <= M^eps ||f||_1^(1-eps) ||g||_(1/eps)

    for each eps. Returns (holds, minimum slack over both links and all eps).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise DomainError("f and g must be sampled on the same grid")
    if np.any(f < 0) or np.any(g < 0):
        raise DomainError("Hölder chain needs nonnegative samples")
    M = float(np.max(f)) if M is None else float(M)
    if M < np.max(f):
        raise DomainError("M must bound f")

    lhs = float(np.sum(f * g)) * cell_measure
    l1 = float(np.sum(f)) * cell_measure
    min_slack = math.inf
    for eps in eps_values:
        if not 0 < eps < 1:
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        middle = M**eps * float(np.sum(f ** (1.0 - eps) * g)) * cell_measure
        g_norm = (float(np.sum(g ** (1.0 / eps))) * cell_measure) ** eps
        right = M**eps * l1 ** (1.0 - eps) * g_norm
        # Slack relative to the larger side, so rounding does not read as failure.
        scale = max(abs(right), abs(lhs), 1e-300)
        slack = min(middle - lhs, right - middle) / scale
        min_slack = min(min_slack, slack)
    holds = min_slack >= -1e-12
    # round-off below the tolerance is reported as zero slack
    return holds, max(min_slack, 0.0) if holds else min_slack
