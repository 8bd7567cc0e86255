"""
Doubly periodic pseudo-spectral solver for the 2D vorticity equation

    d omega / dt + v . grad omega = nu Laplace omega,    curl v = omega,  div v = 0

on [0, L)^2. nu = 0 gives the Euler equations. Time stepping is classical RK4 on
the advection term with an exact integrating factor exp(-nu |k|^2 t) for diffusion.

Grid convention: values[i, j] = f(x_i, y_j) with x_i = i L / N, so axis 0 is x.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid, trapezoid
from tqdm import tqdm

from src.errors import DomainError, GridMismatchError, InstabilityError
from src.objects.field import ScalarField, VectorField
from src.objects.record import LP_ORDERS, DiagnosticsRecord

MEAN_TOLERANCE = 1e-12
CFL_LIMIT = 0.5
# Points per unit radius for the radial circulation integral.
RADIAL_SAMPLES = 20000


@dataclass
class InitialData:
    """
    Descriptor of omega^0.

    kind: taylor_green | modes | stationary | loglog | log | smooth_bump
    """

    kind: str = "taylor_green"
    amplitude: float = 1.0
    # taylor_green
    wavenumber: int = 1
    # modes
    seed: int = 0
    max_mode: int = 4
    # stationary
    profile: str = "gaussian_ring"
    ring_radius: float = 0.75
    ring_width: float = 0.13
    r_min: float = 0.2
    r_max: float = 1.2
    neutralized: bool = True
    # loglog, log, smooth_bump
    core_radius: float = 0.5
    cap: Union[str, float] = "grid"
    center: Optional[Tuple[float, float]] = None


@dataclass
class SimConfig:
    nu: float = 0.0
    T: float = 1.0
    dt: Union[str, float] = "auto"
    N: int = 128
    box_length: float = 2.0 * math.pi
    dealias: str = "two_thirds"
    initial_data: InitialData = field(default_factory=InitialData)
    record_every: float = 0.1
    snapshot_times: Optional[List[float]] = None
    cfl: float = CFL_LIMIT
    progress: bool = False

    def __post_init__(self):
        if self.nu < 0:
            raise DomainError(f"nu must be nonnegative, got {self.nu}")
        if self.T < 0:
            raise DomainError(f"T must be nonnegative, got {self.T}")
        if self.dealias not in ("two_thirds", "none"):
            raise DomainError(f"Unknown dealias rule '{self.dealias}'")
        if not self.record_every > 0:
            raise DomainError("record_every must be positive")
        if self.dt != "auto" and not float(self.dt) > 0:
            raise DomainError(f"dt must be positive or 'auto', got {self.dt}")
        if not 0 < self.cfl <= CFL_LIMIT:
            raise DomainError(f"cfl must lie in (0, {CFL_LIMIT}]")


class Snapshot(NamedTuple):
    t: float
    field: ScalarField


class RunResult(NamedTuple):
    final: ScalarField
    records: List[DiagnosticsRecord]
    snapshots: List[Snapshot]


class Wavenumbers:
    """Wavenumber arrays for rfft2 layouts on an N x N grid of side L."""

    def __init__(self, N: int, box_length: float, dealias: str = "two_thirds"):
        self.N = N
        self.box_length = box_length
        modes_x = np.fft.fftfreq(N, 1.0 / N)[:, None]
        modes_y = np.fft.rfftfreq(N, 1.0 / N)[None, :]
        scale = 2.0 * math.pi / box_length
        self.kx = scale * modes_x
        self.ky = scale * modes_y
        self.k2 = self.kx**2 + self.ky**2
        self.inv_k2 = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        if dealias == "two_thirds":
            cutoff = N / 3.0
            self.mask = (np.abs(modes_x) < cutoff) & (modes_y < cutoff)
        else:
            # drop the Nyquist modes, whose odd derivatives are undefined
            self.mask = (np.abs(modes_x) < N / 2) & (modes_y < N / 2)

    def velocity_hat(self, omega_hat):
        # psi_hat = omega_hat / k^2, u = d psi / dy, v = -d psi / dx
        psi_hat = omega_hat * self.inv_k2
        return 1j * self.ky * psi_hat, -1j * self.kx * psi_hat


@lru_cache(maxsize=8)
def wavenumbers(N: int, box_length: float, dealias: str = "two_thirds") -> Wavenumbers:
    return Wavenumbers(N, box_length, dealias)


def to_spectral(values: np.ndarray) -> np.ndarray:
    return np.fft.rfft2(values)


def to_physical(values_hat: np.ndarray, N: int) -> np.ndarray:
    return np.fft.irfft2(values_hat, s=(N, N))


def grid_coordinates(N: int, box_length: float) -> Tuple[np.ndarray, np.ndarray]:
    x = np.arange(N) * box_length / N
    return np.meshgrid(x, x, indexing="ij")


def _displacement(N, box_length, center):
    # minimum-image offsets from `center`
    X, Y = grid_coordinates(N, box_length)
    cx, cy = center if center is not None else (box_length / 2, box_length / 2)
    dx = (X - cx + box_length / 2) % box_length - box_length / 2
    dy = (Y - cy + box_length / 2) % box_length - box_length / 2
    return dx, dy


def _require_zero_mean(omega: ScalarField):
    scale = float(np.mean(np.abs(omega.values)))
    if abs(omega.mean()) > MEAN_TOLERANCE * max(scale, 1e-300):
        raise DomainError(
            f"Vorticity must have zero mean on the torus (mean {omega.mean():.3g}, scale {scale:.3g})"
        )


def biot_savart(omega: ScalarField) -> VectorField:
    """The zero-mean divergence-free velocity with curl v = omega."""
    _require_zero_mean(omega)
    wn = wavenumbers(omega.N, omega.box_length)
    u_hat, v_hat = wn.velocity_hat(to_spectral(omega.values))
    return VectorField(to_physical(u_hat, omega.N), to_physical(v_hat, omega.N), omega.box_length)


def divergence(velocity: VectorField) -> np.ndarray:
    wn = wavenumbers(velocity.N, velocity.box_length)
    div_hat = 1j * wn.kx * to_spectral(velocity.u) + 1j * wn.ky * to_spectral(velocity.v)
    return to_physical(div_hat, velocity.N)


def velocity_gradient(velocity: VectorField) -> np.ndarray:
    """Pointwise Frobenius norm |grad v|."""
    wn = wavenumbers(velocity.N, velocity.box_length)
    total = np.zeros_like(velocity.u)
    for component in (velocity.u, velocity.v):
        component_hat = to_spectral(component)
        for k in (wn.kx, wn.ky):
            total += to_physical(1j * k * component_hat, velocity.N) ** 2
    return np.sqrt(total)


def lp_norm(f, p) -> float:
    """
    Discrete L^p norm with cell measure (L/N)^2; p = inf gives max |f|.

    Vector fields use the pointwise Euclidean magnitude.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if isinstance(f, VectorField):
        values = f.magnitude()
    else:
        values = np.abs(f.values)
    peak = float(np.max(values))
    if math.isinf(p) or peak == 0:
        return peak
    # scaled by the peak so large p cannot overflow
    return peak * float(np.sum((values / peak) ** p) * f.cell_measure) ** (1.0 / p)


def l2_velocity_diff(a: ScalarField, b: ScalarField) -> float:
    """||biot_savart(a) - biot_savart(b)||_2 for two vorticity snapshots on one grid."""
    a.require_same_grid(b)
    return lp_norm(biot_savart(a - b), 2)


def restrict(omega: ScalarField, N: int) -> ScalarField:
    """Spectral truncation of a field to a coarser N (exact for band-limited data)."""
    if N > omega.N:
        raise GridMismatchError(f"Cannot restrict N={omega.N} to the finer N={N}")
    if N == omega.N:
        return omega
    fine = to_spectral(omega.values)
    half = N // 2
    coarse = np.zeros((N, half + 1), dtype=complex)
    # modes 0 .. N/2 - 1 and -(N/2 - 1) .. -1 along x; the coarse Nyquist stays zero
    coarse[:half, :half] = fine[:half, :half]
    coarse[half + 1 :, :half] = fine[omega.N - half + 1 :, :half]
    values = to_physical(coarse * (N / omega.N) ** 2, N)
    return ScalarField(values, omega.box_length)


class RadialProfile:
    """
    Radial vorticity profile g(r) for a stationary field, with its circulation
    function c(r) = integral over [0, r] of rho g(rho) d rho.

    gaussian_ring: A exp(-((r - r_c) / a)^2), effective support [r_c - 5a, r_c + 5a].
    bump: A exp(1 - 1 / (1 - s^2)) on [r_min, r_max], s the rescaled radius.
    neutralized variants have c(r) -> 0 past the support.
    """

    def __init__(self, kind="gaussian_ring", amplitude=1.0, ring_radius=0.75, ring_width=0.13,
                 r_min=0.2, r_max=1.2, neutralized=False):
        self.kind = kind
        self.amplitude = float(amplitude)
        self.neutralized = neutralized
        if kind == "gaussian_ring":
            if not ring_width > 0:
                raise DomainError("ring_width must be positive")
            self.ring_radius = float(ring_radius)
            self.ring_width = float(ring_width)
            self.r_min = self.ring_radius - 5.0 * self.ring_width
            self.r_max = self.ring_radius + 5.0 * self.ring_width
        elif kind == "bump":
            self.r_min = float(r_min)
            self.r_max = float(r_max)
        else:
            raise DomainError(f"Unknown radial profile '{kind}'")
        if not 0 < self.r_min < self.r_max:
            raise DomainError(f"Need 0 < r_min < r_max, got [{self.r_min:g}, {self.r_max:g}]")
        self._weight = None
        if kind == "bump" and neutralized:
            self._weight = self._counter_weight()

    @staticmethod
    def _bump(s):
        inside = np.abs(s) < 1
        out = np.zeros_like(s, dtype=float)
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    def _half_bumps(self, r):
        mid = 0.5 * (self.r_min + self.r_max)
        quarter = 0.25 * (self.r_max - self.r_min)
        inner = self._bump((r - (self.r_min + quarter)) / quarter)
        outer = self._bump((r - (mid + quarter)) / quarter)
        return inner, outer

    def _counter_weight(self):
        r = np.linspace(0.0, self.r_max, self._samples())
        inner, outer = self._half_bumps(r)
        return trapezoid(r * inner, r) / trapezoid(r * outer, r)

    def _samples(self):
        return int(RADIAL_SAMPLES * self.r_max) + 1

    def g(self, r):
        r = np.asarray(r, dtype=float)
        A = self.amplitude
        if self.kind == "gaussian_ring":
            z = (r - self.ring_radius) / self.ring_width
            if self.neutralized:
                return 2.0 * A * (1.0 - r * (r - self.ring_radius) / self.ring_width**2) * np.exp(-(z**2))
            return A * np.exp(-(z**2))
        if self.neutralized:
            inner, outer = self._half_bumps(r)
            return A * (inner - self._weight * outer)
        return A * self._bump((r - 0.5 * (self.r_min + self.r_max)) / (0.5 * (self.r_max - self.r_min)))

    def circulation(self, r):
        """c(r); closed form for the neutralized ring, cumulative quadrature otherwise."""
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian_ring" and self.neutralized:
            z = (r - self.ring_radius) / self.ring_width
            return self.amplitude * r**2 * np.exp(-(z**2))
        radii = np.linspace(0.0, self.r_max, self._samples())
        cumulative = cumulative_trapezoid(radii * self.g(radii), radii, initial=0.0)
        if self.kind == "bump" and self.neutralized:
            cumulative[-1] = 0.0
        return np.interp(r, radii, cumulative, right=cumulative[-1])


def stationary_field(
    profile: RadialProfile, N: int, box_length: float = 2.0 * math.pi, center=None
) -> Tuple[VectorField, ScalarField]:
    """
    The radial steady Euler flow

        sigma(x) = (-x2, x1) / r^2 * c(r),   c(r) = integral over [0, r] of rho g(rho) d rho

    and its vorticity g(r), sampled around `center` (default: box centre).
    """
    if not profile.r_max < box_length / 4:
        raise DomainError(f"Profile support r_max={profile.r_max:g} must lie below L/4={box_length / 4:g}")
    dx, dy = _displacement(N, box_length, center)
    r = np.hypot(dx, dy)
    c = profile.circulation(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(r > 0, c / np.where(r > 0, r, 1.0) ** 2, 0.0)
    sigma = VectorField(-dy * factor, dx * factor, box_length)
    omega = ScalarField(profile.g(r), box_length)
    return sigma, omega


SINGULAR_PROFILES = ("loglog", "log", "smooth_bump")


def _smooth_step_down(rho):
    """1 on [0, 1/2], 0 on [1, oo), C-infinity in between."""

    def f(t):
        out = np.zeros_like(t)
        positive = t > 0
        out[positive] = np.exp(-1.0 / t[positive])
        return out

    s = np.clip(2.0 * rho - 1.0, 0.0, 1.0)
    return f(1.0 - s) / (f(1.0 - s) + f(s))


def singular_profile(profile, amplitude, core_radius, cap, r):
    """Un-normalized singular profile omega(r), before mean correction."""
    r = np.asarray(r, dtype=float)
    rho = r / core_radius
    inside = rho < 1
    capped = np.maximum(r, cap)
    out = np.zeros_like(r)
    if profile == "loglog":
        out[inside] = np.log1p(np.log(core_radius / capped[inside]))
    elif profile == "log":
        out[inside] = np.log(core_radius / capped[inside])
    elif profile == "smooth_bump":
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho[inside] ** 2))
        return amplitude * out
    else:
        raise DomainError(f"Unknown singular profile '{profile}'")
    return amplitude * out * _smooth_step_down(rho)


def singular_vorticity(
    profile: str,
    amplitude: float,
    core_radius: float,
    cap: Union[str, float],
    N: int,
    box_length: float = 2.0 * math.pi,
    center=None,
) -> ScalarField:
    """
    Radial vorticity with a point singularity at `center`, mean-corrected to zero.

    loglog: A ln(1 + ln(r_core / r)), the ln ln(1/r) growth; log: A ln(r_core / r);
    smooth_bump: a bounded C-infinity bump. Both singular profiles are held at their
    value at r = cap inside the cap ("grid" means one grid spacing) and cut off
    smoothly between r_core / 2 and r_core.
    """
    if not core_radius < box_length / 8:
        raise DomainError(f"core_radius={core_radius:g} must lie below L/8={box_length / 8:g}")
    cap_value = box_length / N if cap == "grid" else float(cap)
    if not cap_value > 0:
        raise DomainError("cap must be positive")
    dx, dy = _displacement(N, box_length, center)
    values = singular_profile(profile, amplitude, core_radius, cap_value, np.hypot(dx, dy))
    return ScalarField(values - np.mean(values), box_length)


def initial_vorticity(desc: InitialData, N: int, box_length: float = 2.0 * math.pi) -> ScalarField:
    """omega^0 built from a descriptor, always returned with zero mean."""
    A = desc.amplitude
    if desc.kind == "taylor_green":
        X, Y = grid_coordinates(N, box_length)
        k = 2.0 * math.pi * desc.wavenumber / box_length
        values = -2.0 * A * np.cos(k * X) * np.cos(k * Y)
    elif desc.kind == "modes":
        values = _random_modes(desc, N)
    elif desc.kind == "stationary":
        profile = RadialProfile(
            desc.profile,
            A,
            ring_radius=desc.ring_radius,
            ring_width=desc.ring_width,
            r_min=desc.r_min,
            r_max=desc.r_max,
            neutralized=desc.neutralized,
        )
        values = stationary_field(profile, N, box_length, desc.center)[1].values
    elif desc.kind in SINGULAR_PROFILES:
        return singular_vorticity(desc.kind, A, desc.core_radius, desc.cap, N, box_length, desc.center)
    else:
        raise DomainError(f"Unknown initial data kind '{desc.kind}'")

    mean = float(np.mean(values))
    if abs(mean) > 1e-8 * max(float(np.max(np.abs(values))), 1e-300):
        logger.warning(f"Removing mean {mean:.3g} from {desc.kind} initial vorticity")
    return ScalarField(values - mean, box_length)


def _random_modes(desc: InitialData, N: int) -> np.ndarray:
    """Deterministic random low modes 1 <= |m| <= max_mode, scaled to max |omega| = A."""
    rng = np.random.default_rng(desc.seed)
    omega_hat = np.zeros((N, N // 2 + 1), dtype=complex)
    modes = np.fft.fftfreq(N, 1.0 / N)
    for i in range(N):
        for j in range(desc.max_mode + 1):
            magnitude = math.hypot(modes[i], j)
            if 1 <= magnitude <= desc.max_mode:
                omega_hat[i, j] = (rng.normal() + 1j * rng.normal()) / magnitude
    values = to_physical(omega_hat, N)
    return desc.amplitude * values / np.max(np.abs(values))


class SpectralSolver:
    """
    RK4 with an exact integrating factor for the vorticity equation.

    Works on rfft2 coefficients; every nonlinear evaluation dealiases its input and
    its product.
    """

    def __init__(self, N: int, box_length: float, nu: float, dealias: str = "two_thirds"):
        self.N = N
        self.box_length = box_length
        self.nu = nu
        self.wn = wavenumbers(N, box_length, dealias)
        self._factors = {}

    @property
    def spacing(self) -> float:
        return self.box_length / self.N

    def integrating_factors(self, dt: float):
        if dt not in self._factors:
            decay = -self.nu * self.wn.k2
            self._factors[dt] = (np.exp(decay * dt), np.exp(decay * dt / 2))
        return self._factors[dt]

    def velocity(self, omega_hat):
        u_hat, v_hat = self.wn.velocity_hat(omega_hat)
        return to_physical(u_hat, self.N), to_physical(v_hat, self.N)

    def nonlinear(self, omega_hat):
        """-(v . grad omega) in spectral space."""
        wn = self.wn
        masked = omega_hat * wn.mask
        u, v = self.velocity(masked)
        omega_x = to_physical(1j * wn.kx * masked, self.N)
        omega_y = to_physical(1j * wn.ky * masked, self.N)
        advection = to_spectral(u * omega_x + v * omega_y) * wn.mask
        advection[0, 0] = 0.0
        return -advection

    def step_hat(self, omega_hat, dt: float):
        E, E_half = self.integrating_factors(dt)
        k1 = self.nonlinear(omega_hat)
        k2 = self.nonlinear(E_half * (omega_hat + 0.5 * dt * k1))
        k3 = self.nonlinear(E_half * omega_hat + 0.5 * dt * k2)
        k4 = self.nonlinear(E * omega_hat + dt * E_half * k3)
        return E * omega_hat + dt / 6.0 * (E * k1 + 2.0 * E_half * (k2 + k3) + k4)

    def max_velocity(self, omega_hat) -> float:
        u, v = self.velocity(omega_hat)
        return float(np.max(np.hypot(u, v)))

    def cfl_number(self, omega_hat, dt: float) -> float:
        return dt * self.max_velocity(omega_hat) / self.spacing

    def diagnostics(self, omega_hat, t: float) -> DiagnosticsRecord:
        omega = ScalarField(to_physical(omega_hat, self.N), self.box_length)
        u_hat, v_hat = self.wn.velocity_hat(omega_hat)
        velocity = VectorField(to_physical(u_hat, self.N), to_physical(v_hat, self.N), self.box_length)
        grad = ScalarField(velocity_gradient(velocity), self.box_length)
        return DiagnosticsRecord(
            t=t,
            energy=0.5 * lp_norm(velocity, 2) ** 2,
            lp_norms={p: lp_norm(omega, p) for p in LP_ORDERS},
            grad_lp={p: lp_norm(grad, p) for p in LP_ORDERS},
            max_vel=lp_norm(velocity, math.inf),
        )


def _solver_for(cfg: SimConfig) -> SpectralSolver:
    return SpectralSolver(cfg.N, cfg.box_length, cfg.nu, cfg.dealias)


def step(omega: ScalarField, cfg: SimConfig, dt: float, t: float = 0.0) -> ScalarField:
    """Advance omega by one step of size dt."""
    _require_zero_mean(omega)
    if omega.N != cfg.N or not math.isclose(omega.box_length, cfg.box_length):
        raise GridMismatchError("Field grid does not match the configuration")
    solver = _solver_for(cfg)
    omega_hat = to_spectral(omega.values)
    advanced = solver.step_hat(omega_hat, dt)
    if not np.all(np.isfinite(advanced)):
        raise InstabilityError(t + dt, solver.cfl_number(omega_hat, dt))
    return ScalarField(to_physical(advanced, cfg.N), cfg.box_length)


def record_times(cfg: SimConfig) -> List[float]:
    """k * record_every up to T, and T itself."""
    count = int(math.floor(cfg.T / cfg.record_every + 1e-9))
    times = {round(k * cfg.record_every, 12) for k in range(count + 1)}
    times.add(cfg.T)
    return sorted(t for t in times if t <= cfg.T)


def stop_times(cfg: SimConfig) -> List[float]:
    """Record times plus any snapshot times."""
    times = set(record_times(cfg))
    for t in cfg.snapshot_times or []:
        if not 0 <= t <= cfg.T:
            raise DomainError(f"Snapshot time {t} outside [0, {cfg.T}]")
        times.add(t)
    return sorted(t for t in times if t <= cfg.T)


def base_time_step(cfg: SimConfig, solver: SpectralSolver, omega_hat) -> float:
    if cfg.dt != "auto":
        return float(cfg.dt)
    max_vel = solver.max_velocity(omega_hat)
    if max_vel == 0:
        return cfg.record_every
    return cfg.cfl * solver.spacing / max_vel


def run(cfg: SimConfig, omega0: Optional[ScalarField] = None) -> RunResult:
    """
    Time-step omega from 0 to T.

    Diagnostics are recorded every record_every (and at T); snapshots at
    cfg.snapshot_times or, when unset, at every record. Steps are shrunk so every
    stop time is hit exactly. Identical configs give bit-identical output.
    """
    omega = omega0 if omega0 is not None else initial_vorticity(cfg.initial_data, cfg.N, cfg.box_length)
    _require_zero_mean(omega)
    solver = _solver_for(cfg)
    omega_hat = to_spectral(omega.values)
    dt_base = base_time_step(cfg, solver, omega_hat)
    logger.info(
        f"Run N={cfg.N} L={cfg.box_length:.6g} nu={cfg.nu:g} T={cfg.T:g} "
        f"dt={dt_base:.4g} CFL={solver.cfl_number(omega_hat, dt_base):.3g}"
    )

    times = stop_times(cfg)
    recorded = set(record_times(cfg))
    snapshot_times = recorded if cfg.snapshot_times is None else set(cfg.snapshot_times) | {0.0}

    schedule = []
    for start, end in zip(times, times[1:]):
        steps = max(1, math.ceil((end - start) / dt_base - 1e-9))
        schedule.append((end, steps, (end - start) / steps))

    records, snapshots = [], []

    def emit(t):
        if t in recorded:
            record = solver.diagnostics(omega_hat, t)
            records.append(record)
            logger.debug(f"t={t:.6g} energy={record.energy:.10g} max_vel={record.max_vel:.6g}")
        if t in snapshot_times:
            snapshots.append(Snapshot(t, ScalarField(to_physical(omega_hat, cfg.N), cfg.box_length)))

    emit(times[0])
    t = 0.0
    total_steps = sum(steps for _, steps, _ in schedule)
    with tqdm(total=total_steps, disable=not cfg.progress, desc=f"nu={cfg.nu:g}") as bar:
        for end, steps, dt in schedule:
            for n in range(steps):
                advanced = solver.step_hat(omega_hat, dt)
                if not np.all(np.isfinite(advanced)):
                    cfl = solver.cfl_number(omega_hat, dt)
                    logger.error(f"Instability at t={t + dt:.6g} (CFL {cfl:.3g})")
                    raise InstabilityError(t + dt, cfl)
                omega_hat = advanced
                t = end if n == steps - 1 else t + dt
                bar.update(1)
            emit(end)

    final = ScalarField(to_physical(omega_hat, cfg.N), cfg.box_length)
    return RunResult(final, records, snapshots)


def calderon_zygmund_ratio(records: Sequence[DiagnosticsRecord]) -> float:
    """max over records and p of ||grad v||_p / (p ||omega||_p)."""
    ratios = [
        record.grad_lp[p] / (p * record.lp_norms[p])
        for record in records
        for p in LP_ORDERS
        if record.lp_norms[p] > 0
    ]
    if not ratios:
        raise DomainError("No record with nonzero vorticity")
    return max(ratios)
