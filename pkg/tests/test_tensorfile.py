import os

import numpy as np
import pytest

from rdnet.errors import FormatError
from rdnet.tensorfile import (MAGIC, read_tensor, tensor_from_bytes,
                              tensor_to_bytes, write_tensor)


@pytest.mark.parametrize("dtype", [np.float32, np.float64, np.complex64])
@pytest.mark.parametrize("shape", [(3,), (2, 5), (4, 3, 2), (1, 1, 1, 7)])
def test_round_trip_bit_exact(dtype, shape, rng):
    arr = rng.normal(size=shape)
    if np.dtype(dtype).kind == "c":
        arr = arr + 1j * rng.normal(size=shape)
    arr = arr.astype(dtype)
    blob = tensor_to_bytes(arr)
    back = tensor_from_bytes(blob)
    assert back.dtype == np.dtype(dtype)
    assert back.shape == shape
    assert np.array_equal(back, arr)
    # re-serialization is byte-identical
    assert tensor_to_bytes(back) == blob


def test_header_layout():
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    blob = tensor_to_bytes(arr)
    assert blob[:4] == MAGIC
    assert blob[4] == 0          # float32 code
    assert blob[5] == 2          # ndim
    dims = np.frombuffer(blob[6:22], dtype="<u8")
    assert list(dims) == [2, 3]
    assert len(blob) == 22 + arr.nbytes


def test_dtype_codes():
    assert tensor_to_bytes(np.zeros(1, np.float32))[4] == 0
    assert tensor_to_bytes(np.zeros(1, np.float64))[4] == 1
    assert tensor_to_bytes(np.zeros(1, np.complex64))[4] == 2


def test_unsupported_dtype_rejected():
    with pytest.raises(FormatError):
        tensor_to_bytes(np.zeros(3, dtype=np.int32))
    with pytest.raises(FormatError):
        tensor_to_bytes(np.zeros(3, dtype=np.complex128))


def test_bad_magic_rejected():
    with pytest.raises(FormatError):
        tensor_from_bytes(b"NOPE" + bytes(10))
    with pytest.raises(FormatError):
        tensor_from_bytes(b"RD")


def test_unknown_code_rejected():
    blob = bytearray(tensor_to_bytes(np.zeros(2, np.float32)))
    blob[4] = 9
    with pytest.raises(FormatError):
        tensor_from_bytes(bytes(blob))


def test_truncated_payload_rejected():
    blob = tensor_to_bytes(np.zeros((2, 3), np.float32))
    with pytest.raises(FormatError):
        tensor_from_bytes(blob[:-1])
    with pytest.raises(FormatError):
        tensor_from_bytes(blob + b"\x00")
    with pytest.raises(FormatError):
        tensor_from_bytes(blob[:8])


def test_non_contiguous_input_ok(rng):
    arr = rng.normal(size=(6, 8)).astype(np.float32)
    view = arr[::2, ::2]
    back = tensor_from_bytes(tensor_to_bytes(view))
    assert np.array_equal(back, view)


def test_file_round_trip(tmp_path, rng):
    arr = (rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4)))
    arr = arr.astype(np.complex64)
    path = tmp_path / "t.rdt"
    write_tensor(path, arr)
    assert np.array_equal(read_tensor(path), arr)
    # no temp droppings left behind
    assert os.listdir(tmp_path) == ["t.rdt"]


def test_write_is_atomic_replace(tmp_path, rng):
    path = tmp_path / "t.rdt"
    first = rng.normal(size=(4,)).astype(np.float32)
    second = rng.normal(size=(5,)).astype(np.float32)
    write_tensor(path, first)
    write_tensor(path, second)
    assert np.array_equal(read_tensor(path), second)
    assert os.listdir(tmp_path) == ["t.rdt"]


def test_write_to_missing_directory_raises_oserror(rng):
    with pytest.raises(OSError):
        write_tensor("/nonexistent-dir-rdnet/x.rdt",
                     np.zeros(2, np.float32))
