import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List

from src.errors import DomainError

LP_ORDERS = (2, 4, 8, 16, 32)


def format_float(value: float) -> str:
    return "%.17g" % value


@dataclass
class DiagnosticsRecord:
    """One row of a run's diagnostics CSV."""

    t: float
    energy: float
    lp_norms: Dict[int, float] = field(default_factory=dict)
    grad_lp: Dict[int, float] = field(default_factory=dict)
    max_vel: float = 0.0

    def __post_init__(self):
        entries = [self.t, self.energy, self.max_vel, *self.lp_norms.values(), *self.grad_lp.values()]
        if not all(math.isfinite(x) and x >= 0 for x in entries):
            raise DomainError(f"Diagnostics at t={self.t} must be finite and nonnegative")

    @staticmethod
    def header() -> List[str]:
        return (
            ["t", "energy"]
            + [f"lp{p}" for p in LP_ORDERS]
            + [f"glp{p}" for p in LP_ORDERS]
            + ["max_vel"]
        )

    def serialize(self) -> List[str]:
        values = (
            [self.t, self.energy]
            + [self.lp_norms[p] for p in LP_ORDERS]
            + [self.grad_lp[p] for p in LP_ORDERS]
            + [self.max_vel]
        )
        return [format_float(v) for v in values]

    @classmethod
    def deserialize(cls, row: Dict[str, str]) -> "DiagnosticsRecord":
        return cls(
            t=float(row["t"]),
            energy=float(row["energy"]),
            lp_norms={p: float(row[f"lp{p}"]) for p in LP_ORDERS},
            grad_lp={p: float(row[f"glp{p}"]) for p in LP_ORDERS},
            max_vel=float(row["max_vel"]),
        )


@dataclass
class ConvergenceRecord:
    """
    One (nu, t) sample of a sweep.

    measured is ||v_nu(t) - v(t)||_2; the bound f(R nu t) applies to its square, so
    ratio = measured_sq / bound.
    """

    nu: float
    t: float
    measured: float
    bound: float
    measured_sq: float = None
    ratio: float = None

    def __post_init__(self):
        if self.measured < 0 or self.bound < 0:
            raise DomainError("measured and bound must be nonnegative")
        if self.measured_sq is None:
            self.measured_sq = self.measured**2
        if self.ratio is None:
            if self.bound > 0:
                self.ratio = self.measured_sq / self.bound
            else:
                self.ratio = 0.0 if self.measured_sq == 0 else math.inf

    @staticmethod
    def header() -> List[str]:
        return ["nu", "t", "measured", "measured_sq", "bound", "ratio"]

    def serialize(self) -> List[str]:
        return [format_float(getattr(self, key)) for key in self.header()]

    @classmethod
    def deserialize(cls, row: Dict[str, str]) -> "ConvergenceRecord":
        return cls(**{key: float(row[key]) for key in cls.header()})

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)
