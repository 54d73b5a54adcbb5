"""RDT1 binary tensor format and atomic file writing.

Layout, all little-endian:

    bytes 0..3   magic  b"RDT1"
    byte  4      dtype code: 0 = float32, 1 = float64,
                 2 = complex64 stored as interleaved float32 pairs
    byte  5      ndim
    next 8*ndim  dims, u64 each
    rest         payload, row-major (C order)

The format is deliberately minimal: no metadata, no alignment, no compression.
Whatever this toolkit writes it reads back byte-identically.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import FormatError

MAGIC = b"RDT1"

_CODE_TO_DTYPE = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<c8")}
_DTYPE_TO_CODE = {np.dtype(np.float32): 0,
                  np.dtype(np.float64): 1,
                  np.dtype(np.complex64): 2}


def tensor_to_bytes(arr: np.ndarray) -> bytes:
    dtype = np.dtype(arr.dtype)
    if dtype not in _DTYPE_TO_CODE:
        raise FormatError(
            f"unsupported dtype {dtype}; RDT1 stores float32, float64 or complex64")
    if arr.ndim > 255:
        raise FormatError("too many dimensions for RDT1")
    header = MAGIC + struct.pack("<BB", _DTYPE_TO_CODE[dtype], arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = np.ascontiguousarray(arr).astype(dtype.newbyteorder("<")).tobytes()
    return header + payload


def tensor_from_bytes(blob: bytes) -> np.ndarray:
    if len(blob) < 6 or blob[:4] != MAGIC:
        raise FormatError("not an RDT1 tensor (bad magic)")
    code, ndim = struct.unpack_from("<BB", blob, 4)
    if code not in _CODE_TO_DTYPE:
        raise FormatError(f"unknown RDT1 dtype code {code}")
    offset = 6
    if len(blob) < offset + 8 * ndim:
        raise FormatError("truncated RDT1 header")
    dims = struct.unpack_from(f"<{ndim}Q", blob, offset)
    offset += 8 * ndim
    dtype = _CODE_TO_DTYPE[code]
    count = 1
    for d in dims:
        count *= d
    expected = count * dtype.itemsize
    if len(blob) - offset != expected:
        raise FormatError(
            f"RDT1 payload length {len(blob) - offset} != expected {expected}")
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
    return arr.reshape(dims).copy()


def write_tensor(path, arr: np.ndarray) -> None:
    atomic_write_bytes(path, tensor_to_bytes(arr))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return tensor_from_bytes(fh.read())


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the same directory plus rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rdnet-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
