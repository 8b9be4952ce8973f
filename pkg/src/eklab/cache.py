"""Binary omega-table cache.

Layout (little-endian)::

    b"EKW1" | version:u8 | limit:u64 | cutoff:u64 (0 = none) | counts[1..limit]:u8
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import IntegrityError
from .primes import OmegaTable

MAGIC = b"EKW1"
VERSION = 1
_HEADER = struct.Struct("<4sBQQ")


def dump_omega_table(table: OmegaTable, path) -> Path:
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, table.limit, table.cutoff or 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(table.counts[1:], dtype=np.uint8).tobytes())
    return path


def load_omega_table(path) -> OmegaTable:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise IntegrityError(f"{path}: truncated header")
    magic, version, limit, cutoff = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IntegrityError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise IntegrityError(f"{path}: unsupported version {version}")
    if len(data) != _HEADER.size + limit:
        raise IntegrityError(f"{path}: expected {limit} count bytes, found {len(data) - _HEADER.size}")
    counts = np.zeros(limit + 1, dtype=np.uint8)
    counts[1:] = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    counts.flags.writeable = False
    return OmegaTable(int(limit), int(cutoff) or None, counts)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
