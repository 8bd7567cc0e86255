import math

import numpy as np

from src.errors import DomainError, GridMismatchError, SnapshotFormatError

from .base import HEADER, BaseObject, is_power_of_two

MIN_RESOLUTION = 16
VALUE_DTYPE = np.dtype("<f8")


def check_grid(values: np.ndarray, box_length: float):
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DomainError(f"Expected an N x N grid, got shape {values.shape}")
    N = values.shape[0]
    if N < MIN_RESOLUTION or not is_power_of_two(N):
        raise DomainError(f"N must be a power of two >= {MIN_RESOLUTION}, got {N}")
    if not box_length > 0:
        raise DomainError(f"box_length must be positive, got {box_length}")
    if not np.all(np.isfinite(values)):
        raise DomainError("Field values must be finite")


class GridMixin:
    """Geometry of the doubly periodic grid [0, L)^2 with N points per side."""

    values: np.ndarray
    box_length: float

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.box_length / self.N

    @property
    def cell_measure(self) -> float:
        return self.spacing**2

    def same_grid(self, other) -> bool:
        return self.N == other.N and math.isclose(self.box_length, other.box_length)

    def require_same_grid(self, other):
        if not self.same_grid(other):
            raise GridMismatchError(
                f"Grid mismatch: N={self.N}, L={self.box_length:g} vs N={other.N}, L={other.box_length:g}"
            )


class ScalarField(GridMixin, BaseObject):
    """
    Samples f(x_i, y_j) at x_i = i L / N, y_j = j L / N, stored as values[i, j].

    Format: header, then N * N little-endian float64 in row-major order.
    """

    object_type = "scalar"
    magic = b"INVSCAL\x00"

    def __init__(self, values=None, box_length=2.0 * math.pi, data=None):
        self.box_length = float(box_length)
        if data is not None:
            super().__init__(data)
            return
        self.values = np.array(values, dtype=float)
        check_grid(self.values, self.box_length)

    def serialize(self) -> bytes:
        return self.pack_header(self.N) + self.values.astype(VALUE_DTYPE).tobytes(order="C")

    def deserialize(self, data):
        N = self.unpack_header(data)
        expected = HEADER.size + N * N * VALUE_DTYPE.itemsize
        if len(data) != expected:
            raise SnapshotFormatError(f"Expected {expected} bytes for N={N}, got {len(data)}")
        self.values = np.frombuffer(data, dtype=VALUE_DTYPE, offset=HEADER.size).reshape(N, N).astype(float)
        check_grid(self.values, self.box_length)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        self.require_same_grid(other)
        return ScalarField(self.values - other.values, self.box_length)


class VectorField(GridMixin, BaseObject):
    """
    Components (u, v) = (v^1, v^2) on the same grid as ScalarField.

    Format: header, then u and v, each N * N little-endian float64 row-major.
    """

    object_type = "vector"
    magic = b"INVSVEC\x00"

    def __init__(self, u=None, v=None, box_length=2.0 * math.pi, data=None):
        self.box_length = float(box_length)
        if data is not None:
            super().__init__(data)
            return
        self.u = np.array(u, dtype=float)
        self.v = np.array(v, dtype=float)
        if self.u.shape != self.v.shape:
            raise DomainError("Vector components must share a grid")
        check_grid(self.u, self.box_length)
        check_grid(self.v, self.box_length)

    @property
    def N(self) -> int:
        return self.u.shape[0]

    @property
    def values(self) -> np.ndarray:
        return np.stack([self.u, self.v])

    def serialize(self) -> bytes:
        payload = self.values.astype(VALUE_DTYPE).tobytes(order="C")
        return self.pack_header(self.N) + payload

    def deserialize(self, data):
        N = self.unpack_header(data)
        expected = HEADER.size + 2 * N * N * VALUE_DTYPE.itemsize
        if len(data) != expected:
            raise SnapshotFormatError(f"Expected {expected} bytes for N={N}, got {len(data)}")
        stacked = np.frombuffer(data, dtype=VALUE_DTYPE, offset=HEADER.size).reshape(2, N, N)
        self.u, self.v = stacked[0].astype(float), stacked[1].astype(float)
        check_grid(self.u, self.box_length)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    def __sub__(self, other: "VectorField") -> "VectorField":
        self.require_same_grid(other)
        return VectorField(self.u - other.u, self.v - other.v, self.box_length)


def object_class(object_type: str):
    classes = {"scalar": ScalarField, "vector": VectorField}
    if object_type not in classes:
        raise SnapshotFormatError(f"Unknown object type {object_type}")
    return classes[object_type]
