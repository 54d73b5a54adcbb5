"""Checkpoint directory layout.

    ckpt/
      weights.rdt     concatenated RDT1 tensor records
      manifest.json   {tensor name: {"shape", "dtype", "offset"}}
      spec.json       model architecture
      config.json     radar config the model was built for
"""

from __future__ import annotations

import json
import os

import numpy as np

from .config import ValidatedConfig, config_to_json, load_config, validate
from .errors import FormatError
from .nn.model import (FftRadNet, ModelSpec, build_fftradnet, load_spec,
                       spec_to_json)
from .tensorfile import atomic_write_bytes, atomic_write_text, tensor_from_bytes, tensor_to_bytes

WEIGHTS_FILE = "weights.rdt"
MANIFEST_FILE = "manifest.json"
SPEC_FILE = "spec.json"
CONFIG_FILE = "config.json"


def save_checkpoint(directory, model: FftRadNet) -> None:
    os.makedirs(directory, exist_ok=True)
    blob = bytearray()
    manifest = {}
    for name, value in model.state().items():
        record = tensor_to_bytes(np.asarray(value))
        manifest[name] = {
            "shape": list(value.shape),
            "dtype": str(value.dtype),
            "offset": len(blob),
        }
        blob += record
    atomic_write_bytes(os.path.join(directory, WEIGHTS_FILE), bytes(blob))
    atomic_write_text(os.path.join(directory, MANIFEST_FILE),
                      json.dumps(manifest, indent=2) + "\n")
    atomic_write_text(os.path.join(directory, SPEC_FILE),
                      spec_to_json(model.spec))
    atomic_write_text(os.path.join(directory, CONFIG_FILE),
                      config_to_json(model.config))


def load_checkpoint(directory, dtype=np.float32) -> FftRadNet:
    spec = load_spec(os.path.join(directory, SPEC_FILE))
    config = validate(load_config(os.path.join(directory, CONFIG_FILE)))
    with open(os.path.join(directory, MANIFEST_FILE), encoding="utf-8") as fh:
        manifest = json.load(fh)
    with open(os.path.join(directory, WEIGHTS_FILE), "rb") as fh:
        blob = fh.read()

    model = build_fftradnet(spec, config, dtype=dtype)
    state = {}
    for name, entry in manifest.items():
        offset = entry["offset"]
        if not (0 <= offset < len(blob)):
            raise FormatError(f"manifest offset {offset} outside weights file")
        state[name] = tensor_from_bytes(_record_at(blob, offset))
    model.load_state(state)
    return model


def _record_at(blob: bytes, offset: int) -> bytes:
    """Slice one RDT1 record starting at offset (header gives the length)."""
    import struct

    if blob[offset:offset + 4] != b"RDT1":
        raise FormatError(f"no RDT1 record at offset {offset}")
    code, ndim = struct.unpack_from("<BB", blob, offset + 4)
    dims = struct.unpack_from(f"<{ndim}Q", blob, offset + 6)
    widths = {0: 4, 1: 8, 2: 8}
    if code not in widths:
        raise FormatError(f"unknown dtype code {code} at offset {offset}")
    count = 1
    for d in dims:
        count *= d
    end = offset + 6 + 8 * ndim + count * widths[code]
    return blob[offset:end]
