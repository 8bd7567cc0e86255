import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import NumericalError, QuadratureError

GAUSS_ORDER = 15
GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Underflow floor for integrands that vanish in the far tail.
TINY = 1e-300


def gauss_legendre(f: Callable, a: float, b: float) -> float:
    """
    15-point Gauss-Legendre rule on [a, b].

    `f` must accept a numpy array of nodes and return an array of the same shape.
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    values = np.asarray(f(mid + half * GAUSS_NODES), dtype=float)
    return float(half * np.dot(GAUSS_WEIGHTS, values))


def integrate(f: Callable, a: float, b: float, rtol=1e-9, max_depth=40) -> float:
    """
    Adaptive Gauss-Legendre quadrature on [a, b].

    A panel is accepted when the rule on the whole panel agrees with the sum over
    its two halves to `rtol`; otherwise both halves are refined. A panel that is
    still unresolved after `max_depth` halvings raises QuadratureError.
    """
    if b == a:
        return 0.0
    if b < a:
        return -integrate(f, b, a, rtol=rtol, max_depth=max_depth)

    total = 0.0
    # (left, right, estimate, depth)
    stack = [(a, b, gauss_legendre(f, a, b), 0)]
    while stack:
        left, right, whole, depth = stack.pop()
        mid = 0.5 * (left + right)
        left_half = gauss_legendre(f, left, mid)
        right_half = gauss_legendre(f, mid, right)
        refined = left_half + right_half
        if not math.isfinite(refined):
            raise QuadratureError("Non-finite integrand", (left, right))
        if abs(refined - whole) <= rtol * abs(refined) + TINY:
            total += refined
            continue
        if depth >= max_depth:
            raise QuadratureError("Quadrature did not converge", (left, right))
        stack.append((left, mid, left_half, depth + 1))
        stack.append((mid, right, right_half, depth + 1))
    return total


def geometric_panels(lower: float, upper: float) -> List[Tuple[float, float]]:
    # [lower, 2 lower], [2 lower, 4 lower], ... with the last panel clipped at upper
    panels = []
    left = lower
    while left < upper:
        right = min(2.0 * left, upper)
        panels.append((left, right))
        left = right
    return panels


def integrate_geometric(f: Callable, lower: float, upper: float, rtol=1e-9) -> float:
    """
    Integrate over [lower, upper] (0 < lower) on geometric panels, so integrands that
    vary on a logarithmic scale near 0 are resolved panel by panel.
    """
    if lower <= 0:
        raise ValueError("Geometric panels need a positive lower limit")
    if upper <= lower:
        return 0.0
    return math.fsum(integrate(f, a, b, rtol=rtol) for a, b in geometric_panels(lower, upper))


def golden_section_minimize(
    func: Callable, lo: np.ndarray, hi: np.ndarray, rtol=1e-8, max_iter=200
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized golden-section search.

    Every entry of `lo`/`hi` is an independent bracket; `func` is evaluated on arrays
    shaped like the brackets. Iterates until every bracket is narrower than
    rtol * max(1, |centre|). Returns (argmin, min) arrays.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc = func(c)
    fd = func(d)
    for _ in range(max_iter):
        width = hi - lo
        scale = np.maximum(1.0, np.abs(0.5 * (hi + lo)))
        if np.all(width <= rtol * scale):
            break
        left = fc < fd
        # minimum in [lo, d] where fc < fd, otherwise in [c, hi]
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = hi - GOLDEN * (hi - lo)
        new_d = lo + GOLDEN * (hi - lo)
        fc_next = np.where(left, func(new_c), fd)
        fd_next = np.where(left, fc, func(new_d))
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        fc, fd = fc_next, fd_next
    best = np.where(fc < fd, c, d)
    return best, np.minimum(fc, fd)


def bisect_increasing(
    func: Callable, lo: float, hi: float, target: float, rtol=1e-13, max_iter=400
) -> float:
    """
    Solve func(x) = target for an increasing `func` with func(lo) <= target <= func(hi).

    Bisection is geometric when the bracket is positive. Stops when the bracket is
    narrower than rtol * hi.
    """
    f_lo = func(lo)
    f_hi = func(hi)
    if f_lo > target or f_hi < target:
        raise NumericalError(
            f"Target {target:.6g} not bracketed by [{f_lo:.6g}, {f_hi:.6g}]"
        )
    for _ in range(max_iter):
        if hi - lo <= rtol * abs(hi):
            break
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        if func(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def condense(g: Callable) -> Callable:
    """Integrand after the change of variables x -> e^x: e^x g(e^x)."""

    def condensed(x):
        w = np.exp(x)
        return w * g(w)

    return condensed


def condensation_ratios(
    g: Callable,
    edges: Sequence[float],
    condensed: Optional[Callable] = None,
    rtol=1e-9,
) -> List[float]:
    """
    For each window [edges[j], edges[j+1]] return the ratio of the integral of the
    condensed integrand e^x g(e^x) over the window to the integral of g over it.

    Since the condensed integral over [a, b] equals the integral of g over
    [e^a, e^b], a ratio that stays >= 1 means the partial integrals keep growing at
    least as much arbitrarily far out (divergence); a ratio collapsing to 0 means the
    tail is exhausted (convergence).
    """
    if condensed is None:
        condensed = condense(g)
    ratios = []
    for a, b in zip(edges[:-1], edges[1:]):
        base = integrate(g, a, b, rtol=rtol)
        far = integrate(condensed, a, b, rtol=rtol)
        ratios.append(far / base if base > 0 else math.inf)
    return ratios
