import struct

from src.errors import SnapshotFormatError

VERSION = 1
# 8-byte magic, uint32 version, uint32 N; little endian
HEADER = struct.Struct("<8sII")


class BaseObject:
    """
    A persisted object. Binary layout:

    {magic: 8 bytes}{version: uint32}{N: uint32}{payload}

    Subclasses set `object_type` and `magic` and implement the payload part.
    """

    object_type = None
    magic = None

    def __init__(self, data=None):
        if data is not None:
            self.deserialize(data)

    def serialize(self) -> bytes:
        raise NotImplementedError

    def deserialize(self, data):
        raise NotImplementedError

    def pack_header(self, N: int) -> bytes:
        return HEADER.pack(self.magic, VERSION, N)

    def unpack_header(self, data: bytes) -> int:
        if len(data) < HEADER.size:
            raise SnapshotFormatError(f"Truncated {self.object_type} header ({len(data)} bytes)")
        magic, version, N = HEADER.unpack_from(data)
        if magic != self.magic:
            raise SnapshotFormatError(f"Bad magic {magic!r}, expected {self.magic!r}")
        if version != VERSION:
            raise SnapshotFormatError(f"Unsupported {self.object_type} version {version}")
        return N


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0
