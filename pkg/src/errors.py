class InviscidError(Exception):
    """Base class for every error raised by the toolkit."""

    kind = "error"


class DomainError(InviscidError, ValueError):
    kind = "domain"


class GridMismatchError(DomainError):
    kind = "grid_mismatch"


class NumericalError(InviscidError, ArithmeticError):
    kind = "numerical"


class QuadratureError(NumericalError):
    kind = "quadrature"

    def __init__(self, message, panel):
        super().__init__(f"{message} on panel [{panel[0]:.6g}, {panel[1]:.6g}]")
        self.reason = message
        self.panel = panel

    def __reduce__(self):
        return type(self), (self.reason, self.panel)


class InstabilityError(NumericalError):
    kind = "instability"

    def __init__(self, t, cfl):
        super().__init__(f"Non-finite vorticity at t={t:.6g} (CFL number {cfl:.3g})")
        self.t = t
        self.cfl = cfl

    # Worker processes send exceptions back pickled.
    def __reduce__(self):
        return type(self), (self.t, self.cfl)


class SnapshotFormatError(InviscidError):
    kind = "snapshot_format"


class SweepAborted(InviscidError):
    kind = "sweep_aborted"

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records

    def __reduce__(self):
        return type(self), (str(self), self.records)
