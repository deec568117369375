"""Versioned binary model container.

Layout (all integers little-endian):

    magic   4 bytes  b"RSMK"
    version u16      currently 1
    hdr_len u32      length of the JSON header in bytes
    header  UTF-8 JSON: {"format": 1,
                         "config": {...},
                         "arrays": [{"name": str, "shape": [int, ...]}, ...]}
    payload concatenated float32 values, little-endian, row-major,
            in the order the header lists them
"""

from __future__ import annotations

import json
import struct
from typing import Dict, Tuple

import numpy as np

MAGIC = b"RSMK"
VERSION = 1


def save_arrays(path, config: dict, arrays: Dict[str, np.ndarray]) -> None:
    header = {
        "format": VERSION,
        "config": config,
        "arrays": [
            {"name": name, "shape": list(np.asarray(arr).shape)}
            for name, arr in arrays.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in arrays.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_arrays(path) -> Tuple[dict, Dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a model container: magic {magic!r}")
        (version,) = struct.unpack("<H", fh.read(2))
        if version != VERSION:
            raise ValueError(f"unsupported container version {version}")
        (hdr_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hdr_len).decode("utf-8"))
        arrays: Dict[str, np.ndarray] = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(4 * count)
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f4").reshape(shape).copy()
    return header["config"], arrays
