"""
Osgood bounds and the implicit rate function.

For a modulus mu with M(x) = integral over [x, 1] of ds / mu(s), an Osgood
inequality gives M(a) - M(L(t)) <= integral of gamma over [t0, t]. Both the
bound L* and the rate function f (integral over [x, f(x)] of ds / beta(s) = T)
solve the same forward problem: find u >= a with integral over [a, u] of
ds / mu(s) equal to a target G.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from loguru import logger

from src.admissibility import (
    BetaContext,
    ThetaKind,
    Verdict,
    classify_ratios,
    eval_beta,
    tail_condensation_ratios,
)
from src.algorithms import bisect_increasing, condensation_ratios, integrate, integrate_geometric
from src.errors import DomainError, NumericalError

# Lower quadrature limit standing in for 0.
ZERO_GUARD = 1e-300
# Past this the forward solve reports an unbounded solution.
OVERFLOW_BOUND = 1e300
# Windows of u = ln(1/s) for the divergence test of a generic modulus.
GENERIC_TAIL_EDGES = (4.0, 4.8, 5.6, 6.4)


class PiecewiseConstant:
    """gamma(t) = values[j] on [breaks[j], breaks[j+1]), with an exact integral."""

    def __init__(self, breaks: Sequence[float], values: Sequence[float]):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if len(self.breaks) != len(self.values) + 1:
            raise DomainError("Need one more break than values")
        if np.any(np.diff(self.breaks) <= 0):
            raise DomainError("Breaks must be strictly increasing")
        if np.any(self.values <= 0):
            raise DomainError("gamma must be positive")

    def __call__(self, t):
        index = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.values) - 1)
        return self.values[index]

    def integral(self, a: float, b: float) -> float:
        clipped = np.clip(self.breaks, a, b)
        return float(np.dot(np.diff(clipped), self.values))


Modulus = Union[BetaContext, Callable]


@dataclass
class OsgoodProblem:
    a: float
    mu: Modulus
    gamma: Optional[Callable] = None  # None means gamma == 1
    t0: float = 0.0
    t1: float = 1.0

    def __post_init__(self):
        if self.a < 0:
            raise DomainError(f"Initial bound must be nonnegative, got {self.a}")
        if self.t1 < self.t0:
            raise DomainError("Need t0 <= t1")

    def gamma_integral(self, t: float) -> float:
        if not self.t0 <= t <= self.t1:
            raise DomainError(f"t={t} outside [{self.t0}, {self.t1}]")
        if self.gamma is None:
            return t - self.t0
        if hasattr(self.gamma, "integral"):
            return self.gamma.integral(self.t0, t)
        return integrate(lambda s: np.asarray(self.gamma(s), dtype=float), self.t0, t)


@dataclass
class RateBound:
    beta_ctx: BetaContext
    T: float
    R: float

    def __post_init__(self):
        if not self.T > 0:
            raise DomainError(f"Time horizon must be positive, got {self.T}")
        if self.R < 0:
            raise DomainError(f"R must be nonnegative, got {self.R}")


def _modulus(mu: Modulus) -> Callable:
    if isinstance(mu, BetaContext):
        return lambda s: eval_beta(mu, s)
    return lambda s: np.asarray(mu(s), dtype=float)


def _check_monotone(mu: Callable, lower: float, upper: float, samples=65):
    grid = np.geomspace(lower, upper, samples)
    values = np.asarray(mu(grid), dtype=float)
    if np.any(values <= 0):
        raise DomainError("mu must be positive on (0, oo)")
    if np.any(np.diff(values) < -1e-12 * np.abs(values[1:])):
        raise DomainError(f"mu is not nondecreasing on [{lower:.3g}, {upper:.3g}]")


def solve_forward(mu: Callable, a: float, target: float, rtol=1e-12) -> float:
    """
    The u >= a with integral over [a, u] of ds / mu(s) = target.

    The bracket grows one doubling panel [u, 2u] at a time; the root is then
    bisected inside the last panel. Returns math.inf when the integral stays below
    the target up to OVERFLOW_BOUND.
    """
    if target <= 0:
        return a
    reciprocal = lambda s: 1.0 / mu(s)
    lower = max(a, ZERO_GUARD)
    accumulated = 0.0
    while True:
        upper = 2.0 * lower
        if upper > OVERFLOW_BOUND:
            return math.inf
        panel = integrate(reciprocal, lower, upper)
        if accumulated + panel >= target:
            break
        accumulated += panel
        lower = upper

    remaining = target - accumulated
    return bisect_increasing(
        lambda u: integrate(reciprocal, lower, u),
        lower,
        upper,
        remaining,
        rtol=rtol,
    )


def modulus_diverges_at_zero(mu: Modulus) -> bool:
    """Numerical test of integral over (0, 1] of ds / mu(s) = oo."""
    if isinstance(mu, BetaContext):
        verdict = classify_ratios(tail_condensation_ratios(mu.theta), 0.05)
    else:
        func = _modulus(mu)
        # ds / mu(s) in u = ln(1/s)
        g = lambda u: np.exp(-u) / func(np.exp(-u))
        verdict = classify_ratios(condensation_ratios(g, GENERIC_TAIL_EDGES), 0.05)
    logger.debug(f"Modulus divergence at 0: {verdict.value}")
    return verdict is Verdict.DIVERGENT


def osgood_upper_bound(prob: OsgoodProblem, t: float) -> float:
    """
    Upper bound L* on L(t) from the Osgood inequality.

    a = 0 with a divergent M(0) gives 0. Otherwise L* solves M(L*) = M(a) - int gamma,
    returned as math.inf when that level is below the range of M.
    """
    G = prob.gamma_integral(t)
    if G == 0:
        return prob.a
    if prob.a == 0 and modulus_diverges_at_zero(prob.mu):
        return 0.0

    mu = _modulus(prob.mu)
    bound = solve_forward(mu, prob.a, G)
    upper = bound if math.isfinite(bound) else OVERFLOW_BOUND
    _check_monotone(mu, max(prob.a, 1e-12), max(upper, 2.0 * max(prob.a, 1e-12)))
    return bound


def rate_function(rb: RateBound, x: float) -> float:
    """f(x) with integral over [x, f(x)] of ds / beta(s) = T."""
    if not x > 0:
        raise DomainError(f"rate function is defined for x > 0, got {x}")
    value = solve_forward(lambda s: eval_beta(rb.beta_ctx, s), x, rb.T)
    if not math.isfinite(value):
        raise NumericalError(f"No bracket for f({x:.6g}) below {OVERFLOW_BOUND:g}")
    return value


def rate_integral(rb: RateBound, x: float, fx: float) -> float:
    """integral over [x, fx] of ds / beta(s), the left side of the defining equation of f."""
    return integrate_geometric(lambda s: 1.0 / eval_beta(rb.beta_ctx, s), x, fx)


def theoretical_l2_bound(rb: RateBound, nu: float, t: float) -> float:
    """f(R nu t), the bound on the squared L2 distance between the viscous and inviscid velocity."""
    if nu <= 0:
        raise DomainError(f"nu must be positive, got {nu}")
    if not 0 <= t <= rb.T * (1 + 1e-12):
        raise DomainError(f"t={t} outside [0, {rb.T}]")
    if rb.R == 0 or t == 0:
        return 0.0
    return rate_function(rb, rb.R * nu * t)


def bounded_vorticity_rate(rb: RateBound, x: float) -> float:
    """
    Closed-form f(x) for a constant profile theta = C.

    beta(s) = C e s ln(M/s) while ln(M/s) >= p0 and C p0 M^(1/p0) s^(1 - 1/p0) beyond,
    so the defining integral is elementary on each piece.
    """
    theta = rb.beta_ctx.theta
    if theta.kind is not ThetaKind.CONSTANT:
        raise DomainError("closed form needs a constant theta")
    if not x > 0:
        raise DomainError(f"rate function is defined for x > 0, got {x}")
    C, M, p0, T = theta.scale, rb.beta_ctx.M, theta.p0, rb.T

    def power_branch(start, duration):
        return (start ** (1.0 / p0) + C * M ** (1.0 / p0) * duration) ** p0

    s_star = M * math.exp(-p0)
    if x >= s_star:
        return power_branch(x, T)
    log_ratio = math.log(M / x)
    switch_time = math.log(log_ratio / p0) / (math.e * C)
    if T <= switch_time:
        return M * math.exp(-log_ratio * math.exp(-math.e * C * T))
    return power_branch(s_star, T - switch_time)
