"""Binary tensor files.

Layout (all little-endian)::

    magic    4 bytes  b"ATNS"
    version  u16      1
    rank     u16
    dims     rank x u64
    payload  prod(dims) x f64, row-major
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import BadMagic, BadVersion, DimOverflow, TensorFormatError, TruncatedPayload

MAGIC = b"ATNS"
VERSION = 1
_HEADER = struct.Struct("<4sHH")
_MAX_ELEMENTS = (2**63 - 1) // 8


def _element_count(dims) -> int:
    count = 1
    for d in dims:
        count *= d
        if count > _MAX_ELEMENTS:
            raise DimOverflow(f"dims {tuple(dims)} describe more than {_MAX_ELEMENTS} elements")
    return count


def encode(data) -> bytes:
    arr = np.asarray(data, dtype=np.float64)
    dims = arr.shape
    if len(dims) > 0xFFFF:
        raise DimOverflow(f"rank {len(dims)} does not fit in u16")
    _element_count(dims)
    return (_HEADER.pack(MAGIC, VERSION, len(dims))
            + struct.pack(f"<{len(dims)}Q", *dims)
            + np.ascontiguousarray(arr, dtype="<f8").tobytes())


def decode(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        if not MAGIC.startswith(buf[:4]):
            raise BadMagic(f"bad magic {buf[:4]!r}")
        raise TruncatedPayload(f"header needs {_HEADER.size} bytes, file has {len(buf)}")
    magic, version, rank = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise BadVersion(f"unsupported tensor format version {version}")
    dims_end = _HEADER.size + 8 * rank
    if len(buf) < dims_end:
        raise TruncatedPayload(f"header declares rank {rank} but file ends after {len(buf)} bytes")
    dims = struct.unpack_from(f"<{rank}Q", buf, _HEADER.size)
    count = _element_count(dims)
    expected = dims_end + 8 * count
    if len(buf) < expected:
        raise TruncatedPayload(f"payload needs {8 * count} bytes, file has {len(buf) - dims_end}")
    if len(buf) > expected:
        raise TensorFormatError(f"{len(buf) - expected} unexpected trailing bytes after payload")
    arr = np.frombuffer(buf, dtype="<f8", count=count, offset=dims_end)
    return arr.astype(np.float64).reshape(dims)


def write_tensor(path, data, dims=None) -> None:
    """Write ``data``; if ``dims`` is given the flat data is laid out in that shape."""
    if dims is not None:
        dims = tuple(int(d) for d in dims)
        if any(d < 0 or d >= 2**64 for d in dims):
            raise DimOverflow(f"dims {dims} do not fit in u64")
        flat = np.asarray(data, dtype=np.float64).reshape(-1)
        if flat.size != _element_count(dims):
            raise TensorFormatError(f"{flat.size} values do not fill dims {dims}")
        data = flat.reshape(dims)
    with open(path, "wb") as fh:
        fh.write(encode(data))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode(fh.read())
